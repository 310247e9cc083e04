"""Kernel SVM trained with sequential minimal optimization.

The solver is the simplified SMO variant: sweep the training set for KKT
violators, pick the second index of each working pair at random (seeded),
solve the two-variable subproblem analytically, and stop after ``max_passes``
consecutive sweeps without an update. Margins are maintained incrementally,
and the dual objective is recorded per sweep; it must never decrease.

Decision values map to confidences through a plain logistic of the margin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

_GRAM_CACHE_LIMIT = 20_000
_MIN_STEP = 1e-5
_MAX_SWEEPS = 1_000


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and (self.gamma is None or self.gamma <= 0):
            raise ValueError("rbf kernel needs gamma > 0")


def kernel_eval(spec: KernelSpec, u, v) -> float:
    """Kernel value between two vectors: u.v (linear) or exp(-gamma |u-v|^2) (rbf)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"vector dimensions differ: {u.shape} vs {v.shape}")
    if spec.kind == "linear":
        return float(np.dot(u, v))
    diff = u - v
    return float(np.exp(-spec.gamma * np.dot(diff, diff)))


def _row_sq_norms(X) -> np.ndarray:
    if sp.issparse(X):
        return np.asarray(X.multiply(X).sum(axis=1)).ravel()
    return np.einsum("ij,ij->i", X, X)


def kernel_matrix(spec: KernelSpec, A, B=None) -> np.ndarray:
    """Dense Gram matrix between row sets; accepts dense or scipy-sparse input."""
    B = A if B is None else B
    G = A @ B.T
    if sp.issparse(G):
        G = G.toarray()
    G = np.asarray(G, dtype=np.float64)
    if spec.kind == "linear":
        return G
    sq_a = _row_sq_norms(A)
    sq_b = _row_sq_norms(B)
    d2 = np.maximum(sq_a[:, None] + sq_b[None, :] - 2.0 * G, 0.0)
    return np.exp(-spec.gamma * d2)


@dataclass
class SmoDiagnostics:
    """Training-time state kept for KKT and consistency checks."""

    alphas: np.ndarray          # unsigned multipliers, all training points
    labels: np.ndarray          # +-1 labels
    margins: np.ndarray         # incrementally maintained decision values
    objective_curve: list[float]
    sweeps: int


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    alphas: np.ndarray          # label-signed dual coefficients
    bias: float
    kernel: KernelSpec
    C: float
    conf_scale: float = 1.0
    diagnostics: SmoDiagnostics | None = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]


def _as_signed_labels(labels) -> np.ndarray:
    y = np.asarray(labels)
    if y.dtype == bool:
        return np.where(y, 1.0, -1.0)
    y = y.astype(np.float64)
    unique = set(np.unique(y).tolist())
    if unique <= {0.0, 1.0}:
        return np.where(y > 0, 1.0, -1.0)
    if unique <= {-1.0, 1.0}:
        return y
    raise ValueError(f"labels must be boolean, 0/1 or -1/+1, got values {sorted(unique)}")


def train_smo(
    X,
    labels,
    C: float = 100.0,
    kernel: KernelSpec = KernelSpec("rbf", 1e-3),
    tol: float = 1e-3,
    max_passes: int = 10,
    seed: int = 0,
) -> SvmModel:
    """Fit the dual problem with simplified SMO; deterministic given the seed.

    Needs at least two examples and both classes present. The returned model
    keeps only support vectors; full training-time state stays available on
    ``model.diagnostics``.
    """
    dense = not sp.issparse(X)
    if dense:
        X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two training examples")
    y = _as_signed_labels(labels)
    if y.shape[0] != n:
        raise ValueError("label count does not match example count")
    if np.all(y > 0) or np.all(y < 0):
        raise ValueError("training data contains a single class")

    rng = np.random.default_rng(seed)
    full_gram = n <= _GRAM_CACHE_LIMIT
    if full_gram:
        K = kernel_matrix(kernel, X)

        def krow(i):
            return K[i]

    else:
        cache: dict[int, np.ndarray] = {}

        def krow(i):
            row = cache.get(i)
            if row is None:
                row = kernel_matrix(kernel, X[i : i + 1], X).ravel()
                cache[i] = row
            return row

    alphas = np.zeros(n)
    bias = 0.0
    margins = np.full(n, bias)  # K @ (alphas * y) + bias, maintained incrementally
    objective_curve: list[float] = []
    clean_passes = 0
    sweeps = 0

    def try_update(i, j) -> bool:
        nonlocal bias
        if i == j:
            return False
        row_i, row_j = krow(i), krow(j)
        e_i = margins[i] - y[i]
        e_j = margins[j] - y[j]
        a_i_old, a_j_old = alphas[i], alphas[j]
        if y[i] != y[j]:
            low, high = max(0.0, a_j_old - a_i_old), min(C, C + a_j_old - a_i_old)
        else:
            low, high = max(0.0, a_i_old + a_j_old - C), min(C, a_i_old + a_j_old)
        if low >= high:
            return False
        eta = 2.0 * row_i[j] - row_i[i] - row_j[j]
        if eta >= 0.0:
            return False
        a_j = a_j_old - y[j] * (e_i - e_j) / eta
        a_j = min(high, max(low, a_j))
        if abs(a_j - a_j_old) < _MIN_STEP:
            return False
        a_i = a_i_old + y[i] * y[j] * (a_j_old - a_j)
        alphas[i], alphas[j] = a_i, a_j

        d_i = y[i] * (a_i - a_i_old)
        d_j = y[j] * (a_j - a_j_old)
        b1 = bias - e_i - d_i * row_i[i] - d_j * row_i[j]
        b2 = bias - e_j - d_i * row_i[j] - d_j * row_j[j]
        if 0.0 < a_i < C:
            new_bias = b1
        elif 0.0 < a_j < C:
            new_bias = b2
        else:
            new_bias = (b1 + b2) / 2.0
        margins[:] = margins + d_i * row_i + d_j * row_j + (new_bias - bias)
        bias = new_bias
        return True

    def violates(i) -> bool:
        e_i = margins[i] - y[i]
        return (y[i] * e_i < -tol and alphas[i] < C) or (y[i] * e_i > tol and alphas[i] > 0)

    while clean_passes < max_passes and sweeps < _MAX_SWEEPS:
        changed = 0
        for i in range(n):
            if not violates(i):
                continue
            # random second choice, then a seeded scan if the first pick stalls
            j = int(rng.integers(n - 1))
            if j >= i:
                j += 1
            if try_update(i, j):
                changed += 1
                continue
            for j in rng.permutation(n):
                if j != i and try_update(i, int(j)):
                    changed += 1
                    break
        sweeps += 1
        # W(a) = sum a - 0.5 coef' K coef, and K coef = margins - bias
        coef = alphas * y
        objective = float(alphas.sum() - 0.5 * np.dot(coef, margins - bias))
        if objective_curve and objective < objective_curve[-1] - 1e-8 * max(1.0, abs(objective_curve[-1])):
            raise RuntimeError(
                f"dual objective decreased from {objective_curve[-1]} to {objective} at sweep {sweeps}"
            )
        objective_curve.append(objective)
        clean_passes = clean_passes + 1 if changed == 0 else 0

    sv_mask = alphas > 0
    support = X[np.flatnonzero(sv_mask)]
    if sp.issparse(support):
        support = support.toarray()
    return SvmModel(
        support_vectors=np.asarray(support, dtype=np.float64),
        alphas=(alphas * y)[sv_mask],
        bias=bias,
        kernel=kernel,
        C=C,
        diagnostics=SmoDiagnostics(
            alphas=alphas, labels=y, margins=margins, objective_curve=objective_curve, sweeps=sweeps
        ),
    )


def kkt_violation_count(alphas, labels, margins, C: float, tol: float) -> int:
    """Training points violating stationarity at tolerance ``tol``.

    alpha = 0 requires y*margin >= 1 - tol, interior alphas require
    |y*margin - 1| <= tol, and alpha = C requires y*margin <= 1 + tol.
    """
    alphas = np.asarray(alphas)
    ym = np.asarray(labels) * np.asarray(margins)
    eps = 1e-10
    at_zero = alphas <= eps
    at_c = alphas >= C - eps
    interior = ~at_zero & ~at_c
    violations = (at_zero & (ym < 1.0 - tol - eps)) | (at_c & (ym > 1.0 + tol + eps))
    violations |= interior & (np.abs(ym - 1.0) > tol + eps)
    return int(violations.sum())


def decision_function(model: SvmModel, X) -> np.ndarray:
    """Margins for a batch of row vectors."""
    K = kernel_matrix(model.kernel, np.atleast_2d(np.asarray(X, dtype=np.float64)), model.support_vectors)
    return K @ model.alphas + model.bias


def predict_margin(model: SvmModel, x) -> float:
    return float(decision_function(model, np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


def predict_conf(model: SvmModel, x) -> float:
    """Confidence in (0, 1): logistic of the margin. The label cut is conf > 0.5."""
    margin = predict_margin(model, x)
    return float(1.0 / (1.0 + np.exp(-model.conf_scale * np.clip(margin, -500.0, 500.0))))


_MODEL_HEADER = "locatednear-svm\t1"


def save_model(model: SvmModel, path) -> None:
    """Text serialization: kernel spec, C, bias, then one (alpha, sparse vector) row per SV."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_MODEL_HEADER + "\n")
        if model.kernel.kind == "rbf":
            fh.write(f"kernel\trbf\t{model.kernel.gamma!r}\n")
        else:
            fh.write("kernel\tlinear\n")
        fh.write(f"C\t{model.C!r}\n")
        fh.write(f"bias\t{model.bias!r}\n")
        fh.write(f"conf_scale\t{model.conf_scale!r}\n")
        fh.write(f"dim\t{model.dim}\n")
        fh.write(f"nsv\t{len(model.alphas)}\n")
        for alpha, row in zip(model.alphas, model.support_vectors):
            nz = np.flatnonzero(row)
            cells = "\t".join(f"{c}:{row[c]!r}" for c in nz)
            fh.write(f"{alpha!r}\t{cells}\n" if len(nz) else f"{alpha!r}\n")


def load_model(path) -> SvmModel:
    with open(path, encoding="utf-8") as fh:
        if fh.readline().rstrip("\n") != _MODEL_HEADER:
            raise ValueError(f"{path}: not a serialized SVM model")
        meta: dict[str, list[str]] = {}
        for _ in range(6):
            parts = fh.readline().rstrip("\n").split("\t")
            meta[parts[0]] = parts[1:]
        kernel = (
            KernelSpec("rbf", float(meta["kernel"][1])) if meta["kernel"][0] == "rbf" else KernelSpec("linear")
        )
        dim = int(meta["dim"][0])
        n_sv = int(meta["nsv"][0])
        alphas = np.zeros(n_sv)
        vectors = np.zeros((n_sv, dim))
        for row in range(n_sv):
            parts = fh.readline().rstrip("\n").split("\t")
            alphas[row] = float(parts[0])
            for cell in parts[1:]:
                col, _, value = cell.partition(":")
                vectors[row, int(col)] = float(value)
    return SvmModel(
        support_vectors=vectors,
        alphas=alphas,
        bias=float(meta["bias"][0]),
        kernel=kernel,
        C=float(meta["C"][0]),
        conf_scale=float(meta["conf_scale"][0]),
    )
