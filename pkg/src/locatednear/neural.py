"""LSTM relation classifier with explicit forward and backward passes.

Per-step input is the concatenation of a learned token embedding (over the
normalized token stream) and two learned position embeddings indexed by the
clipped signed distance to E1 and E2. A single-layer LSTM consumes the
sequence; its final hidden state is the sentence encoding. In parallel the
two pretrained object word vectors pass through a tanh dense layer. Both
encodings concatenate into one affine unit with a sigmoid output.

Training is binary cross-entropy with RMSProp and inverted dropout on the
embedded inputs and the LSTM output. All gradients are analytic; nothing
here relies on autodiff.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .corpus import Instance
from .embeddings import EmbeddingTable, lookup
from .normalize import TokenIndex, normalize_instance, render_pos, truncation_window

_CKPT_MAGIC = b"LNCKPT01"
_LOGIT_CLIP = 36.0  # keeps sigmoid output strictly inside (0, 1) in float64

VARIANTS = ("norm", "word", "pos")


@dataclass(frozen=True)
class NeuralConfig:
    token_emb_dim: int = 64
    pos_emb_dim: int = 16
    lstm_hidden: int = 128
    pair_dense_dim: int = 64
    dropout_rate: float = 0.5
    learning_rate: float = 1e-3
    rmsprop_decay: float = 0.9
    epsilon: float = 1e-8
    batch_size: int = 32
    epochs: int = 20
    seed: int = 0
    pos_clip: int = 30
    max_len: int = 100
    variant: str = "norm"

    def __post_init__(self):
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        for name in ("token_emb_dim", "pos_emb_dim", "lstm_hidden", "pair_dense_dim", "pos_clip"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")


@dataclass
class NeuralModel:
    config: NeuralConfig
    vocab_size: int
    pair_dim: int           # length of one object word vector
    params: dict[str, np.ndarray]
    rms: dict[str, np.ndarray] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not self.rms:
            self.rms = {name: np.zeros_like(p) for name, p in self.params.items()}


def _pos_table_rows(pos_clip: int) -> int:
    # id 0 is padding; distances -clip..+clip occupy 1..2*clip+1
    return 2 * pos_clip + 2


def position_id(distance: int, pos_clip: int) -> int:
    return int(np.clip(distance, -pos_clip, pos_clip)) + pos_clip + 1


def init_model(config: NeuralConfig, vocab_size: int, pair_dim: int, seed: int | None = None) -> NeuralModel:
    """Uniform(-0.05, 0.05) weights, zero biases except the forget gate at 1."""
    rng = np.random.default_rng(config.seed if seed is None else seed)
    d_x = config.token_emb_dim + 2 * config.pos_emb_dim
    d_z = d_x + config.lstm_hidden
    h = config.lstm_hidden

    def uniform(*shape):
        return rng.uniform(-0.05, 0.05, size=shape)

    params = {
        "tok_emb": uniform(vocab_size, config.token_emb_dim),
        "pos1_emb": uniform(_pos_table_rows(config.pos_clip), config.pos_emb_dim),
        "pos2_emb": uniform(_pos_table_rows(config.pos_clip), config.pos_emb_dim),
        "w_i": uniform(d_z, h),
        "w_f": uniform(d_z, h),
        "w_o": uniform(d_z, h),
        "w_g": uniform(d_z, h),
        "b_i": np.zeros(h),
        "b_f": np.ones(h),
        "b_o": np.zeros(h),
        "b_g": np.zeros(h),
        "w_pair": uniform(2 * pair_dim, config.pair_dense_dim),
        "b_pair": np.zeros(config.pair_dense_dim),
        "w_out": uniform(h + config.pair_dense_dim),
        "b_out": np.zeros(1),
    }
    return NeuralModel(config=config, vocab_size=vocab_size, pair_dim=pair_dim, params=params)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -_LOGIT_CLIP, _LOGIT_CLIP)))


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def forward(model: NeuralModel, token_ids, pos1_ids, pos2_ids, pair_vec, train_mode: bool = False, rng=None):
    """Probability of the positive class plus the cache for backward.

    With ``train_mode`` the dropout masks are drawn from ``rng`` (seed or
    generator); the same seed reproduces the same masks exactly.
    """
    cfg = model.config
    P = model.params
    token_ids = np.asarray(token_ids, dtype=np.int64)
    pos1_ids = np.asarray(pos1_ids, dtype=np.int64)
    pos2_ids = np.asarray(pos2_ids, dtype=np.int64)
    if token_ids.size == 0:
        raise ValueError("empty input sequence")
    if token_ids.min() < 0 or token_ids.max() >= model.vocab_size:
        raise ValueError("token id out of range")
    rows = _pos_table_rows(cfg.pos_clip)
    for ids in (pos1_ids, pos2_ids):
        if ids.min() < 0 or ids.max() >= rows:
            raise ValueError("position id out of range")
    pair_vec = np.asarray(pair_vec, dtype=np.float64)

    T = len(token_ids)
    h_dim = cfg.lstm_hidden
    d_x = cfg.token_emb_dim + 2 * cfg.pos_emb_dim

    x = np.concatenate([P["tok_emb"][token_ids], P["pos1_emb"][pos1_ids], P["pos2_emb"][pos2_ids]], axis=1)
    mask_x = None
    mask_h = None
    if train_mode and cfg.dropout_rate > 0.0:
        rng = _as_rng(rng)
        keep = 1.0 - cfg.dropout_rate
        mask_x = (rng.random(x.shape) < keep) / keep
        x = x * mask_x

    zs = np.zeros((T, d_x + h_dim))
    gate_i = np.zeros((T, h_dim))
    gate_f = np.zeros((T, h_dim))
    gate_o = np.zeros((T, h_dim))
    gate_g = np.zeros((T, h_dim))
    cs = np.zeros((T, h_dim))
    tanh_cs = np.zeros((T, h_dim))
    hs = np.zeros((T, h_dim))
    h_prev = np.zeros(h_dim)
    c_prev = np.zeros(h_dim)
    for t in range(T):
        z = np.concatenate([x[t], h_prev])
        zs[t] = z
        gate_i[t] = _sigmoid(z @ P["w_i"] + P["b_i"])
        gate_f[t] = _sigmoid(z @ P["w_f"] + P["b_f"])
        gate_o[t] = _sigmoid(z @ P["w_o"] + P["b_o"])
        gate_g[t] = np.tanh(z @ P["w_g"] + P["b_g"])
        cs[t] = gate_f[t] * c_prev + gate_i[t] * gate_g[t]
        tanh_cs[t] = np.tanh(cs[t])
        hs[t] = gate_o[t] * tanh_cs[t]
        h_prev, c_prev = hs[t], cs[t]

    h_final = hs[-1]
    if train_mode and cfg.dropout_rate > 0.0:
        keep = 1.0 - cfg.dropout_rate
        mask_h = (rng.random(h_dim) < keep) / keep
        h_final = h_final * mask_h

    pair_pre = pair_vec @ P["w_pair"] + P["b_pair"]
    pair_act = np.tanh(pair_pre)
    concat = np.concatenate([h_final, pair_act])
    logit = float(concat @ P["w_out"] + P["b_out"][0])
    prob = float(_sigmoid(logit))

    cache = {
        "token_ids": token_ids,
        "pos1_ids": pos1_ids,
        "pos2_ids": pos2_ids,
        "x": x,
        "mask_x": mask_x,
        "mask_h": mask_h,
        "zs": zs,
        "gate_i": gate_i,
        "gate_f": gate_f,
        "gate_o": gate_o,
        "gate_g": gate_g,
        "cs": cs,
        "tanh_cs": tanh_cs,
        "hs": hs,
        "pair_vec": pair_vec,
        "pair_act": pair_act,
        "concat": concat,
        "prob": prob,
    }
    return prob, cache


def bce_loss(prob: float, label) -> float:
    """Binary cross-entropy with the probability clamped to [1e-7, 1 - 1e-7]."""
    p = min(max(prob, 1e-7), 1.0 - 1e-7)
    y = 1.0 if label else 0.0
    return float(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def backward(model: NeuralModel, cache: dict, label) -> dict[str, np.ndarray]:
    """Analytic loss gradients for every parameter, embedding rows included."""
    cfg = model.config
    P = model.params
    y = 1.0 if label else 0.0
    grads = {name: np.zeros_like(p) for name, p in P.items()}

    h_dim = cfg.lstm_hidden
    d_x = cfg.token_emb_dim + 2 * cfg.pos_emb_dim
    d_t = cfg.token_emb_dim
    d_p = cfg.pos_emb_dim

    d_logit = cache["prob"] - y
    grads["w_out"] = cache["concat"] * d_logit
    grads["b_out"] = np.array([d_logit])
    d_concat = P["w_out"] * d_logit
    d_h_final = d_concat[:h_dim]
    d_pair_act = d_concat[h_dim:]

    d_pair_pre = (1.0 - cache["pair_act"] ** 2) * d_pair_act
    grads["w_pair"] = np.outer(cache["pair_vec"], d_pair_pre)
    grads["b_pair"] = d_pair_pre

    if cache["mask_h"] is not None:
        d_h_final = d_h_final * cache["mask_h"]

    T = len(cache["token_ids"])
    d_h = d_h_final
    d_c_next = np.zeros(h_dim)
    for t in range(T - 1, -1, -1):
        gi, gf, go, gg = cache["gate_i"][t], cache["gate_f"][t], cache["gate_o"][t], cache["gate_g"][t]
        tanh_c = cache["tanh_cs"][t]
        d_o = tanh_c * d_h
        d_c = d_c_next + go * (1.0 - tanh_c**2) * d_h
        d_i = gg * d_c
        d_g = gi * d_c
        c_prev = cache["cs"][t - 1] if t > 0 else np.zeros(h_dim)
        d_f = c_prev * d_c
        d_c_next = gf * d_c

        d_pre_i = gi * (1.0 - gi) * d_i
        d_pre_f = gf * (1.0 - gf) * d_f
        d_pre_o = go * (1.0 - go) * d_o
        d_pre_g = (1.0 - gg**2) * d_g

        z = cache["zs"][t]
        grads["w_i"] += np.outer(z, d_pre_i)
        grads["w_f"] += np.outer(z, d_pre_f)
        grads["w_o"] += np.outer(z, d_pre_o)
        grads["w_g"] += np.outer(z, d_pre_g)
        grads["b_i"] += d_pre_i
        grads["b_f"] += d_pre_f
        grads["b_o"] += d_pre_o
        grads["b_g"] += d_pre_g

        d_z = P["w_i"] @ d_pre_i + P["w_f"] @ d_pre_f + P["w_o"] @ d_pre_o + P["w_g"] @ d_pre_g
        d_x_t = d_z[:d_x]
        if cache["mask_x"] is not None:
            d_x_t = d_x_t * cache["mask_x"][t]
        grads["tok_emb"][cache["token_ids"][t]] += d_x_t[:d_t]
        grads["pos1_emb"][cache["pos1_ids"][t]] += d_x_t[d_t : d_t + d_p]
        grads["pos2_emb"][cache["pos2_ids"][t]] += d_x_t[d_t + d_p :]
        d_h = d_z[d_x:]

    return grads


def rmsprop_step(model: NeuralModel, grads: dict[str, np.ndarray], config: NeuralConfig | None = None) -> None:
    """acc <- rho*acc + (1-rho)*g^2; param <- param - lr*g/sqrt(acc + eps)."""
    cfg = config or model.config
    for name, g in grads.items():
        acc = model.rms[name]
        acc *= cfg.rmsprop_decay
        acc += (1.0 - cfg.rmsprop_decay) * g * g
        model.params[name] -= cfg.learning_rate * g / np.sqrt(acc + cfg.epsilon)
        if not np.all(np.isfinite(model.params[name])):
            raise FloatingPointError(f"parameter {name!r} became non-finite after an update")


@dataclass(frozen=True)
class EncodedInstance:
    token_ids: np.ndarray
    pos1_ids: np.ndarray
    pos2_ids: np.ndarray
    pair_vec: np.ndarray
    label: bool | None = None


def token_stream(instance: Instance, variant: str = "norm", max_len: int = 100) -> list[str]:
    """Input token texts for one of the three architecture variants.

    ``norm`` is the normalized sequence, ``word`` the surface lemmas, ``pos``
    plain POS tags; all three share the truncation window and distances.
    """
    if variant == "norm":
        return normalize_instance(instance, max_len).texts
    lo, hi = truncation_window(len(instance.sentence), instance.e1_pos, instance.e2_pos, max_len)
    window = instance.sentence.tokens[lo - 1 : hi]
    if variant == "word":
        return [t.lemma for t in window]
    if variant == "pos":
        return [render_pos(t.upos) for t in window]
    raise ValueError(f"unknown variant {variant!r}")


def encode_instance(
    instance: Instance, index: TokenIndex, table: EmbeddingTable, config: NeuralConfig
) -> EncodedInstance:
    texts = token_stream(instance, config.variant, config.max_len)
    lo, hi = truncation_window(len(instance.sentence), instance.e1_pos, instance.e2_pos, config.max_len)
    positions = range(lo, hi + 1)
    return EncodedInstance(
        token_ids=np.array([index.id_of(t) for t in texts], dtype=np.int64),
        pos1_ids=np.array([position_id(i - instance.e1_pos, config.pos_clip) for i in positions], dtype=np.int64),
        pos2_ids=np.array([position_id(i - instance.e2_pos, config.pos_clip) for i in positions], dtype=np.int64),
        pair_vec=np.concatenate([lookup(table, instance.e1), lookup(table, instance.e2)]),
        label=instance.label,
    )


def train(model: NeuralModel, data: list[EncodedInstance], config: NeuralConfig | None = None):
    """Seeded mini-batch training; returns the model and the per-epoch mean loss curve."""
    cfg = config or model.config
    if not data:
        raise ValueError("empty training set")
    if any(enc.label is None for enc in data):
        raise ValueError("training instances must be labeled")
    rng = np.random.default_rng(cfg.seed)
    curve: list[float] = []
    n = len(data)
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            summed: dict[str, np.ndarray] | None = None
            for k in batch:
                enc = data[k]
                prob, cache = forward(
                    model, enc.token_ids, enc.pos1_ids, enc.pos2_ids, enc.pair_vec, train_mode=True, rng=rng
                )
                epoch_loss += bce_loss(prob, enc.label)
                g = backward(model, cache, enc.label)
                if summed is None:
                    summed = g
                else:
                    for name in summed:
                        summed[name] += g[name]
            scale = 1.0 / len(batch)
            rmsprop_step(model, {name: g * scale for name, g in summed.items()}, cfg)
        curve.append(epoch_loss / n)
    return model, curve


def predict_conf(model: NeuralModel, encoded: EncodedInstance) -> float:
    prob, _ = forward(model, encoded.token_ids, encoded.pos1_ids, encoded.pos2_ids, encoded.pair_vec)
    return prob


_PARAM_ORDER = (
    "tok_emb",
    "pos1_emb",
    "pos2_emb",
    "w_i",
    "w_f",
    "w_o",
    "w_g",
    "b_i",
    "b_f",
    "b_o",
    "b_g",
    "w_pair",
    "b_pair",
    "w_out",
    "b_out",
)


def save_checkpoint(model: NeuralModel, path, token_index_file: str | None = None) -> None:
    """Versioned checkpoint: magic, JSON header with config and a shape manifest,
    then every tensor as little-endian float32 in manifest order."""
    header = {
        "version": 1,
        "config": asdict(model.config),
        "vocab_size": model.vocab_size,
        "pair_dim": model.pair_dim,
        "token_index_file": token_index_file,
        "params": [{"name": name, "shape": list(model.params[name].shape)} for name in _PARAM_ORDER],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_CKPT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for name in _PARAM_ORDER:
            fh.write(model.params[name].astype("<f4").tobytes())


def load_checkpoint(path) -> tuple[NeuralModel, dict]:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _CKPT_MAGIC:
            raise ValueError(f"{path}: not a model checkpoint (bad magic {magic!r})")
        (header_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        params = {}
        for entry in header["params"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape))
            data = np.frombuffer(fh.read(4 * count), dtype="<f4").astype(np.float64)
            params[entry["name"]] = data.reshape(shape)
    config = NeuralConfig(**header["config"])
    model = NeuralModel(config=config, vocab_size=header["vocab_size"], pair_dim=header["pair_dim"], params=params)
    return model, header
