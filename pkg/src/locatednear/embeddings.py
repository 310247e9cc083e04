"""Pretrained word-embedding table: text loading, lookup, cosine similarity.

The text format is one entry per line, the word followed by whitespace-
separated numbers. Out-of-vocabulary words map to the all-zeros vector, and
cosine with a zero-norm vector is defined as 0.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

_CACHE_MAGIC = b"LNEMB001"


@dataclass
class EmbeddingTable:
    dim: int
    entries: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries


def load_embeddings(path, expected_dim: int | None = None) -> EmbeddingTable:
    """Load a text embedding file; duplicate words keep their first vector."""
    entries: dict[str, np.ndarray] = {}
    dim = expected_dim
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            parts = raw.split()
            if not parts:
                continue
            word, values = parts[0], parts[1:]
            if dim is None:
                if not values:
                    raise ValueError(f"{path}:{line_no}: entry has no vector components")
                dim = len(values)
            if len(values) != dim:
                raise ValueError(f"{path}:{line_no}: expected {dim} vector components, got {len(values)}")
            if word in entries:
                continue
            try:
                vector = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError:
                raise ValueError(f"{path}:{line_no}: non-numeric vector component") from None
            entries[word] = vector
    if dim is None:
        raise ValueError(f"{path}: embedding file is empty")
    return EmbeddingTable(dim=dim, entries=entries)


def lookup(table: EmbeddingTable, word: str) -> np.ndarray:
    """Vector for a word: exact match, then lowercase, then the zero OOV vector."""
    vector = table.entries.get(word)
    if vector is None:
        vector = table.entries.get(word.lower())
    if vector is None:
        return np.zeros(table.dim)
    return vector


def cosine(u, v) -> float:
    """u.v / (|u||v|), with 0 when either norm is 0."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"vector lengths differ: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def save_cache(table: EmbeddingTable, path) -> None:
    """Write the binary reload cache.

    Layout: 8-byte magic, uint32 version, uint32 dim, uint64 entry count,
    then per entry a uint16 byte length, the UTF-8 word, and dim little-endian
    float64 components.
    """
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<IIQ", 1, table.dim, len(table.entries)))
        for word, vector in table.entries.items():
            encoded = word.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(vector.astype("<f8").tobytes())


def load_cache(path) -> EmbeddingTable:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _CACHE_MAGIC:
            raise ValueError(f"{path}: not an embedding cache (bad magic {magic!r})")
        _, dim, count = struct.unpack("<IIQ", fh.read(16))
        entries: dict[str, np.ndarray] = {}
        for _ in range(count):
            (word_len,) = struct.unpack("<H", fh.read(2))
            word = fh.read(word_len).decode("utf-8")
            vector = np.frombuffer(fh.read(8 * dim), dtype="<f8").astype(np.float64)
            entries[word] = vector
    return EmbeddingTable(dim=dim, entries=entries)
