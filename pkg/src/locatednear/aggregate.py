"""Pool per-instance confidences into per-pair scores, rank, and extract triples.

Five scoring choices over the m confidences collected for a pair:

  f0  m, the raw sentence count
  f1  sum of confidences
  f2  mean confidence, f1 / m
  f3  count of confidences strictly above the threshold (default 0.5)
  f4  fraction above the threshold, f3 / m

Pairs pool symmetrically under the sorted lemma pair. Triple extraction keeps
pairs whose f3 score reaches the cut (inclusive), default 40.0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

F_CHOICES = ("f0", "f1", "f2", "f3", "f4")
DEFAULT_F = "f3"
DEFAULT_EXTRACTION_THRESHOLD = 40.0
RELATION_NAME = "LocatedNear"


@dataclass(frozen=True)
class PairEvidence:
    pair: tuple[str, str]
    confs: tuple[float, ...]

    def __post_init__(self):
        if len(self.confs) < 1:
            raise ValueError("evidence needs at least one confidence")
        if any(not 0.0 < c < 1.0 for c in self.confs):
            raise ValueError("confidences must lie strictly inside (0, 1)")

    @property
    def m(self) -> int:
        return len(self.confs)


@dataclass(frozen=True)
class PairScore:
    pair: tuple[str, str]
    f_choice: str
    score: float
    m: int


def _sorted_pair(e1: str, e2: str) -> tuple[str, str]:
    return (e1, e2) if e1 < e2 else (e2, e1)


def collect_evidence(classified: Iterable) -> dict[tuple[str, str], PairEvidence]:
    """Group (instance, confidence) pairs by the sorted lemma pair.

    Items may be (Instance, conf) or ((e1, e2), conf).
    """
    groups: dict[tuple[str, str], list[float]] = {}
    for item, conf in classified:
        if hasattr(item, "e1"):
            pair = _sorted_pair(item.e1, item.e2)
        else:
            pair = _sorted_pair(item[0], item[1])
        groups.setdefault(pair, []).append(float(conf))
    return {pair: PairEvidence(pair, tuple(confs)) for pair, confs in groups.items()}


def score(evidence: PairEvidence, f_choice: str = DEFAULT_F, threshold: float = 0.5) -> PairScore:
    """Apply one scoring function; the indicator comparison is strict (conf > threshold)."""
    m = evidence.m
    if f_choice == "f0":
        value = float(m)
    elif f_choice == "f1":
        value = sum(evidence.confs)
    elif f_choice == "f2":
        value = sum(evidence.confs) / m
    elif f_choice == "f3":
        value = float(sum(1 for c in evidence.confs if c > threshold))
    elif f_choice == "f4":
        value = sum(1 for c in evidence.confs if c > threshold) / m
    else:
        raise ValueError(f"unknown scoring function {f_choice!r}; expected one of {F_CHOICES}")
    return PairScore(pair=evidence.pair, f_choice=f_choice, score=value, m=m)


def score_all(
    evidence: dict[tuple[str, str], PairEvidence], f_choice: str = DEFAULT_F, threshold: float = 0.5
) -> list[PairScore]:
    return [score(ev, f_choice, threshold) for ev in evidence.values()]


def rank(scores: Sequence[PairScore], k: int | None = None) -> list[PairScore]:
    """Descending by score, ties broken lexicographically by pair."""
    choices = {s.f_choice for s in scores}
    if len(choices) > 1:
        raise ValueError(f"cannot rank mixed scoring functions: {sorted(choices)}")
    ordered = sorted(scores, key=lambda s: (-s.score, s.pair))
    return ordered if k is None else ordered[:k]


def extract_triples(
    scores: Sequence[PairScore], threshold: float = DEFAULT_EXTRACTION_THRESHOLD
) -> list[tuple[str, str, str, float]]:
    """Ranked (e1, LocatedNear, e2, score) triples for f3 scores at or above the cut."""
    for s in scores:
        if s.f_choice != "f3":
            raise ValueError(f"triple extraction expects f3 scores, got {s.f_choice!r}")
    kept = rank([s for s in scores if s.score >= threshold])
    return [(s.pair[0], RELATION_NAME, s.pair[1], s.score) for s in kept]


def write_scores_tsv(scores: Sequence[PairScore], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("e1\te2\tf_choice\tscore\tm\n")
        for s in scores:
            fh.write(f"{s.pair[0]}\t{s.pair[1]}\t{s.f_choice}\t{s.score!r}\t{s.m}\n")


def read_scores_tsv(path) -> list[PairScore]:
    scores = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("e1\t"):
            raise ValueError(f"{path}: missing scores header")
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            e1, e2, f_choice, value, m = line.split("\t")
            scores.append(PairScore(pair=(e1, e2), f_choice=f_choice, score=float(value), m=int(m)))
    return scores


def write_triples_tsv(triples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("e1\trelation\te2\tscore\n")
        for e1, relation, e2, value in triples:
            fh.write(f"{e1}\t{relation}\t{e2}\t{value!r}\n")


def write_triples_conceptnet(triples, path) -> None:
    """ConceptNet-style line export: /r/LocatedNear /c/en/<e1> /c/en/<e2> score."""
    with open(path, "w", encoding="utf-8") as fh:
        for e1, relation, e2, value in triples:
            fh.write(f"/r/{relation}\t/c/en/{e1}\t/c/en/{e2}\t{value!r}\n")
