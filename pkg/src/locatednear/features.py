"""Hand-engineered instance features with per-family ablation switches.

Six families, each occupying its own column range:

  BW   bag of sentence lemmas, binary
  BPW  bag of lemmas on the object-to-object dependency path plus the two
       subtrees rooted at the objects, binary
  BAP  bag of adverb and preposition lemmas, binary
  GF   sentence length and counts of nouns, verbs, adverbs, adjectives,
       determiners, prepositions and punctuation (8 numbers)
  SDP  the GF statistics over the dependency-tree traversal and over the
       shortest-path token sequence (8 + 8 numbers)
  SS   cosine similarity of the two object word embeddings (1 number)

Vocabularies come from training data only. ``featurize`` emits raw values;
``FeatureSpace.standardize`` rescales the GF/SDP blocks with train-set
statistics for kernel methods.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import NOUN_TAGS, Instance, ParsedSentence
from .embeddings import EmbeddingTable, cosine, lookup

FAMILY_ORDER = ("BW", "BPW", "BAP", "GF", "SDP", "SS")
GF_WIDTH = 8
SDP_WIDTH = 16
SS_WIDTH = 1

# Counted word classes, in GF block order after the length entry.
_COUNTED_UPOS = (NOUN_TAGS, {"VERB"}, {"ADV"}, {"ADJ"}, {"DET"}, {"ADP"}, {"PUNCT"})


def shortest_dependency_path(sentence: ParsedSentence, i: int, j: int) -> list[int]:
    """Token indices on the unique i-to-j path in the undirected tree, endpoints included.

    Found by walking both root paths and splicing at the lowest common node.
    """
    if i == j:
        raise ValueError("path endpoints must differ")
    up_i = [i]
    node = i
    while sentence.head_of(node) != 0:
        node = sentence.head_of(node)
        up_i.append(node)
    position_in_i = {n: k for k, n in enumerate(up_i)}
    walk = []
    node = j
    while node not in position_in_i:
        walk.append(node)
        node = sentence.head_of(node)
        if node == 0:
            raise ValueError(f"sentence {sentence.id!r}: no path from {i} to {j} (disconnected parse)")
    return up_i[: position_in_i[node] + 1] + walk[::-1]


def subtree(sentence: ParsedSentence, i: int) -> set[int]:
    """Index i plus all its descendants through head links."""
    out = set()
    stack = [i]
    while stack:
        node = stack.pop()
        out.add(node)
        stack.extend(sentence.children_of(node))
    return out


def tree_traversal(sentence: ParsedSentence) -> list[int]:
    """Pre-order walk of the dependency tree from the root, children by index."""
    order = []
    stack = [sentence.root()]
    while stack:
        node = stack.pop()
        order.append(node)
        stack.extend(reversed(sorted(sentence.children_of(node))))
    return order


def _gf_stats(tokens) -> list[int]:
    stats = [len(tokens)]
    for tags in _COUNTED_UPOS:
        stats.append(sum(1 for t in tokens if t.upos in tags))
    return stats


def _sdp_stats(instance: Instance) -> list[int]:
    sentence = instance.sentence
    traversal = [sentence.token_at(k) for k in tree_traversal(sentence)]
    path = [sentence.token_at(k) for k in shortest_dependency_path(sentence, instance.e1_pos, instance.e2_pos)]
    return _gf_stats(traversal) + _gf_stats(path)


def _path_and_subtree_lemmas(instance: Instance) -> set[str]:
    sentence = instance.sentence
    indices = set(shortest_dependency_path(sentence, instance.e1_pos, instance.e2_pos))
    indices |= subtree(sentence, instance.e1_pos)
    indices |= subtree(sentence, instance.e2_pos)
    return {sentence.token_at(k).lemma for k in indices}


@dataclass(frozen=True)
class FeatureVector:
    """Sparse feature values; columns strictly increasing within [0, dim)."""

    columns: np.ndarray
    values: np.ndarray
    dim: int

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        dense[self.columns] = self.values
        return dense


@dataclass
class FeatureSpace:
    enabled: tuple[str, ...]
    bw_vocab: dict[str, int]
    bpw_vocab: dict[str, int]
    bap_vocab: dict[str, int]
    offsets: dict[str, int]
    widths: dict[str, int]
    total_dim: int
    gf_mean: np.ndarray | None = None
    gf_std: np.ndarray | None = None
    sdp_mean: np.ndarray | None = None
    sdp_std: np.ndarray | None = None

    def standardize(self, vector: FeatureVector) -> FeatureVector:
        """Rescale the GF/SDP blocks to train-set zero mean and unit variance."""
        values = vector.values.copy()
        for family, mean, std in (("GF", self.gf_mean, self.gf_std), ("SDP", self.sdp_mean, self.sdp_std)):
            if family not in self.offsets or mean is None:
                continue
            offset = self.offsets[family]
            width = self.widths[family]
            block = (vector.columns >= offset) & (vector.columns < offset + width)
            block_cols = vector.columns[block] - offset
            values[block] = (values[block] - mean[block_cols]) / std[block_cols]
        return FeatureVector(vector.columns, values, vector.dim)


def fit_feature_space(train: Sequence[Instance], enabled: Iterable[str] = FAMILY_ORDER) -> FeatureSpace:
    """Build family vocabularies and standardization statistics from training instances."""
    requested = set(enabled)
    for family in requested:
        if family not in FAMILY_ORDER:
            raise ValueError(f"unknown feature family {family!r}")
    enabled = tuple(f for f in FAMILY_ORDER if f in requested)
    if not train:
        raise ValueError("cannot fit a feature space on an empty training set")

    bw_vocab: dict[str, int] = {}
    bpw_vocab: dict[str, int] = {}
    bap_vocab: dict[str, int] = {}
    if "BW" in requested:
        lemmas = sorted({t.lemma for inst in train for t in inst.sentence.tokens})
        bw_vocab = {lemma: k for k, lemma in enumerate(lemmas)}
    if "BPW" in requested:
        lemmas = sorted({lemma for inst in train for lemma in _path_and_subtree_lemmas(inst)})
        bpw_vocab = {lemma: k for k, lemma in enumerate(lemmas)}
    if "BAP" in requested:
        lemmas = sorted(
            {t.lemma for inst in train for t in inst.sentence.tokens if t.upos in ("ADV", "ADP")}
        )
        bap_vocab = {lemma: k for k, lemma in enumerate(lemmas)}

    family_widths = {
        "BW": len(bw_vocab),
        "BPW": len(bpw_vocab),
        "BAP": len(bap_vocab),
        "GF": GF_WIDTH,
        "SDP": SDP_WIDTH,
        "SS": SS_WIDTH,
    }
    offsets: dict[str, int] = {}
    widths: dict[str, int] = {}
    cursor = 0
    for family in FAMILY_ORDER:
        if family not in requested:
            continue
        offsets[family] = cursor
        widths[family] = family_widths[family]
        cursor += family_widths[family]

    space = FeatureSpace(
        enabled=enabled,
        bw_vocab={w: c + offsets["BW"] for w, c in bw_vocab.items()} if "BW" in requested else {},
        bpw_vocab={w: c + offsets["BPW"] for w, c in bpw_vocab.items()} if "BPW" in requested else {},
        bap_vocab={w: c + offsets["BAP"] for w, c in bap_vocab.items()} if "BAP" in requested else {},
        offsets=offsets,
        widths=widths,
        total_dim=cursor,
    )

    if "GF" in requested:
        blocks = np.array([_gf_stats(inst.sentence.tokens) for inst in train], dtype=np.float64)
        space.gf_mean = blocks.mean(axis=0)
        std = blocks.std(axis=0)
        space.gf_std = np.where(std == 0.0, 1.0, std)
    if "SDP" in requested:
        blocks = np.array([_sdp_stats(inst) for inst in train], dtype=np.float64)
        space.sdp_mean = blocks.mean(axis=0)
        std = blocks.std(axis=0)
        space.sdp_std = np.where(std == 0.0, 1.0, std)
    return space


def featurize(instance: Instance, space: FeatureSpace, table: EmbeddingTable | None = None) -> FeatureVector:
    """Raw feature vector for one instance; unseen bag words contribute nothing."""
    columns: list[int] = []
    values: list[float] = []

    if "BW" in space.offsets:
        lemmas = {t.lemma for t in instance.sentence.tokens}
        present = sorted(space.bw_vocab[w] for w in lemmas if w in space.bw_vocab)
        columns.extend(present)
        values.extend([1.0] * len(present))
    if "BPW" in space.offsets:
        lemmas = _path_and_subtree_lemmas(instance)
        present = sorted(space.bpw_vocab[w] for w in lemmas if w in space.bpw_vocab)
        columns.extend(present)
        values.extend([1.0] * len(present))
    if "BAP" in space.offsets:
        lemmas = {t.lemma for t in instance.sentence.tokens if t.upos in ("ADV", "ADP")}
        present = sorted(space.bap_vocab[w] for w in lemmas if w in space.bap_vocab)
        columns.extend(present)
        values.extend([1.0] * len(present))
    if "GF" in space.offsets:
        offset = space.offsets["GF"]
        for k, v in enumerate(_gf_stats(instance.sentence.tokens)):
            columns.append(offset + k)
            values.append(float(v))
    if "SDP" in space.offsets:
        offset = space.offsets["SDP"]
        for k, v in enumerate(_sdp_stats(instance)):
            columns.append(offset + k)
            values.append(float(v))
    if "SS" in space.offsets:
        if table is None:
            raise ValueError("the SS family needs an embedding table")
        columns.append(space.offsets["SS"])
        values.append(cosine(lookup(table, instance.e1), lookup(table, instance.e2)))

    return FeatureVector(np.asarray(columns, dtype=np.int64), np.asarray(values, dtype=np.float64), space.total_dim)


def stack(vectors: Sequence[FeatureVector]) -> np.ndarray:
    """Dense (n, dim) matrix from feature vectors."""
    if not vectors:
        raise ValueError("no vectors to stack")
    out = np.zeros((len(vectors), vectors[0].dim))
    for row, vec in enumerate(vectors):
        out[row, vec.columns] = vec.values
    return out


def stack_csr(vectors: Sequence[FeatureVector]) -> sp.csr_matrix:
    """Sparse CSR matrix from feature vectors, for larger training sets."""
    if not vectors:
        raise ValueError("no vectors to stack")
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for row, vec in enumerate(vectors):
        indptr[row + 1] = indptr[row] + len(vec.columns)
    indices = np.concatenate([vec.columns for vec in vectors]) if indptr[-1] else np.zeros(0, dtype=np.int64)
    data = np.concatenate([vec.values for vec in vectors]) if indptr[-1] else np.zeros(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), vectors[0].dim))


def save_feature_space(space: FeatureSpace, path) -> None:
    """TSV serialization: header comments, then one (family, token, column) row per bag entry."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# locatednear-feature-space 1\n")
        fh.write(f"# enabled {','.join(space.enabled)}\n")
        fh.write(f"# offsets {','.join(f'{f}={space.offsets[f]}' for f in space.enabled)}\n")
        fh.write(f"# widths {','.join(f'{f}={space.widths[f]}' for f in space.enabled)}\n")
        fh.write(f"# total_dim {space.total_dim}\n")
        for name, stats in (
            ("gf_mean", space.gf_mean),
            ("gf_std", space.gf_std),
            ("sdp_mean", space.sdp_mean),
            ("sdp_std", space.sdp_std),
        ):
            if stats is not None:
                fh.write(f"# {name} {','.join(repr(float(v)) for v in stats)}\n")
        for family, vocab in (("BW", space.bw_vocab), ("BPW", space.bpw_vocab), ("BAP", space.bap_vocab)):
            for token, column in sorted(vocab.items(), key=lambda kv: kv[1]):
                fh.write(f"{family}\t{token}\t{column}\n")


def load_feature_space(path) -> FeatureSpace:
    meta: dict[str, str] = {}
    vocabs: dict[str, dict[str, int]] = {"BW": {}, "BPW": {}, "BAP": {}}
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != "# locatednear-feature-space 1":
            raise ValueError(f"{path}: not a feature-space file")
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(" ")
                meta[key] = value
                continue
            family, token, column = line.split("\t")
            vocabs[family][token] = int(column)
    enabled = tuple(meta["enabled"].split(","))
    offsets = {k: int(v) for k, v in (item.split("=") for item in meta["offsets"].split(","))}
    widths = {k: int(v) for k, v in (item.split("=") for item in meta["widths"].split(","))}

    def stats(name):
        if name not in meta:
            return None
        return np.array([float(v) for v in meta[name].split(",")])

    return FeatureSpace(
        enabled=enabled,
        bw_vocab=vocabs["BW"],
        bpw_vocab=vocabs["BPW"],
        bap_vocab=vocabs["BAP"],
        offsets=offsets,
        widths=widths,
        total_dim=int(meta["total_dim"]),
        gf_mean=stats("gf_mean"),
        gf_std=stats("gf_std"),
        sdp_mean=stats("sdp_mean"),
        sdp_std=stats("sdp_std"),
    )
