"""Corpus loading and candidate instance generation.

Three input formats are handled here: CoNLL-U dependency parses, one-word-
per-line object vocabularies, and labeled instance TSVs with a CoNLL-U
sidecar. Candidate instances pair up vocabulary objects that occur as nouns
in the same sentence.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple

NOUN_TAGS = frozenset({"NOUN", "PROPN"})

# CoNLL-U column layout: ID FORM LEMMA UPOS XPOS FEATS HEAD DEPREL DEPS MISC
_CONLLU_COLUMNS = 10


@dataclass(frozen=True)
class Token:
    """One parsed token. ``head`` is the 1-based index of the governor, 0 at the root."""

    index: int
    form: str
    lemma: str
    upos: str
    head: int
    deprel: str


@dataclass(frozen=True)
class ParsedSentence:
    id: str
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def token_at(self, index: int) -> Token:
        """Token at a 1-based position."""
        return self.tokens[index - 1]

    def head_of(self, index: int) -> int:
        return self.tokens[index - 1].head

    def children_of(self, index: int) -> list[int]:
        return [t.index for t in self.tokens if t.head == index]

    def root(self) -> int:
        for t in self.tokens:
            if t.head == 0:
                return t.index
        raise ValueError(f"sentence {self.id!r} has no root token")


@dataclass(frozen=True)
class ObjectVocabulary:
    """Set of lowercase single-word object lemmas."""

    objects: frozenset[str]

    def __contains__(self, word: str) -> bool:
        return word in self.objects

    def __len__(self) -> int:
        return len(self.objects)


@dataclass(frozen=True)
class Instance:
    """A sentence with a grounded object pair, optionally labeled.

    The pair is canonicalized by first mention: ``e1_pos < e2_pos``. Both
    positions must point at noun tokens whose lemma matches the pair.
    """

    sentence: ParsedSentence
    e1: str
    e2: str
    e1_pos: int
    e2_pos: int
    label: bool | None = None

    def __post_init__(self):
        if self.e1 == self.e2:
            raise ValueError(f"object pair must be two distinct lemmas, got {self.e1!r} twice")
        if not (1 <= self.e1_pos < self.e2_pos <= len(self.sentence)):
            raise ValueError(
                f"positions must satisfy 1 <= e1_pos < e2_pos <= len(sentence), "
                f"got ({self.e1_pos}, {self.e2_pos})"
            )
        for lemma, pos in ((self.e1, self.e1_pos), (self.e2, self.e2_pos)):
            tok = self.sentence.token_at(pos)
            if tok.upos not in NOUN_TAGS:
                raise ValueError(f"token {pos} of {self.sentence.id!r} is {tok.upos}, not a noun")
            if tok.lemma != lemma:
                raise ValueError(
                    f"token {pos} of {self.sentence.id!r} has lemma {tok.lemma!r}, expected {lemma!r}"
                )

    @property
    def pair(self) -> tuple[str, str]:
        """Lexicographically sorted lemma pair, the aggregation key."""
        return (self.e1, self.e2) if self.e1 < self.e2 else (self.e2, self.e1)


class SkippedRow(NamedTuple):
    line: int
    sentence_id: str
    reason: str


class LabeledDataset(NamedTuple):
    instances: list[Instance]
    skipped: list[SkippedRow]


def _is_tree(heads: list[int]) -> bool:
    n = len(heads)
    if sum(1 for h in heads if h == 0) != 1:
        return False
    if any(h < 0 or h > n for h in heads):
        return False
    for start in range(1, n + 1):
        seen = set()
        node = start
        while node != 0:
            if node in seen:
                return False
            seen.add(node)
            node = heads[node - 1]
    return True


def _build_sentence(block: list[tuple[int, str]], sent_id: str, path) -> ParsedSentence | None:
    tokens = []
    for line_no, line in block:
        cols = line.split("\t")
        if len(cols) != _CONLLU_COLUMNS:
            raise ValueError(
                f"{path}:{line_no}: expected {_CONLLU_COLUMNS} tab-separated columns, got {len(cols)}"
            )
        token_id = cols[0]
        if "-" in token_id or "." in token_id:
            # multi-word token ranges and empty nodes carry no tree structure
            continue
        try:
            index = int(token_id)
            head = int(cols[6])
        except ValueError:
            raise ValueError(f"{path}:{line_no}: non-integer ID or HEAD field") from None
        tokens.append(
            Token(index=index, form=cols[1], lemma=cols[2].lower(), upos=cols[3], head=head, deprel=cols[7])
        )
    if not tokens:
        return None
    if [t.index for t in tokens] != list(range(1, len(tokens) + 1)):
        raise ValueError(f"{path}:{block[0][0]}: token IDs are not sequential from 1")
    if not _is_tree([t.head for t in tokens]):
        warnings.warn(f"skipping sentence {sent_id!r}: head links do not form a single tree")
        return None
    return ParsedSentence(id=sent_id, tokens=tuple(tokens))


def load_conllu(path) -> list[ParsedSentence]:
    """Read a CoNLL-U file into parsed sentences.

    Uses the ID, FORM, LEMMA, UPOS, HEAD and DEPREL columns; lemmas are
    lowercased. Sentences whose head links are cyclic or multi-rooted are
    skipped with a warning. Syntactically malformed lines raise ValueError
    naming the offending line.
    """
    sentences: list[ParsedSentence] = []
    block: list[tuple[int, str]] = []
    sent_id: str | None = None
    ordinal = 0

    def flush():
        nonlocal sent_id, ordinal
        if not block:
            sent_id = None
            return
        ordinal += 1
        sentence = _build_sentence(block, sent_id or f"s{ordinal}", path)
        if sentence is not None:
            sentences.append(sentence)
        block.clear()
        sent_id = None

    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                flush()
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                if key.strip() == "sent_id" and value.strip():
                    sent_id = value.strip()
                continue
            block.append((line_no, line))
        flush()
    return sentences


def write_conllu(sentences: Iterable[ParsedSentence], path) -> None:
    """Serialize sentences back to CoNLL-U (unused columns written as ``_``)."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in sentences:
            fh.write(f"# sent_id = {s.id}\n")
            for t in s.tokens:
                fh.write(f"{t.index}\t{t.form}\t{t.lemma}\t{t.upos}\t_\t_\t{t.head}\t{t.deprel}\t_\t_\n")
            fh.write("\n")


def load_vocab(path) -> ObjectVocabulary:
    """Read an object vocabulary, one lowercase single word per line.

    Blank lines and ``#`` comments are ignored; duplicates collapse.
    """
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            word = raw.strip()
            if not word or word.startswith("#"):
                continue
            if len(word.split()) != 1:
                raise ValueError(f"{path}:{line_no}: vocabulary entries must be single words, got {word!r}")
            words.add(word.lower())
    if not words:
        raise ValueError(f"{path}: vocabulary is empty")
    return ObjectVocabulary(frozenset(words))


def _first_noun_positions(sentence: ParsedSentence, wanted) -> dict[str, int]:
    positions: dict[str, int] = {}
    for tok in sentence.tokens:
        if tok.upos in NOUN_TAGS and tok.lemma in wanted and tok.lemma not in positions:
            positions[tok.lemma] = tok.index
    return positions


def generate_instances(sentence: ParsedSentence, vocab: ObjectVocabulary) -> list[Instance]:
    """All unordered pairs of distinct vocabulary lemmas appearing as nouns.

    Each lemma is grounded at its first noun occurrence; the earlier mention
    becomes e1. Returns C(k, 2) instances for k distinct grounded lemmas.
    """
    grounded = sorted(_first_noun_positions(sentence, vocab.objects).items(), key=lambda kv: kv[1])
    return [
        Instance(sentence, lemma_a, lemma_b, pos_a, pos_b)
        for (lemma_a, pos_a), (lemma_b, pos_b) in combinations(grounded, 2)
    ]


def load_labeled_dataset(labels_path, parses_path) -> LabeledDataset:
    """Read a labeled benchmark: TSV rows (sentence-id, e1, e2, label) plus parses.

    Rows are grounded against the sidecar parses with the same first-noun rule
    as candidate generation. Rows whose sentence id is unknown, or whose pair
    cannot be grounded, are skipped with a warning and reported. A label
    outside {0, 1} is an error.
    """
    sentences = {s.id: s for s in load_conllu(parses_path)}
    instances: list[Instance] = []
    skipped: list[SkippedRow] = []
    with open(labels_path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#") or line.startswith("sentence_id\t"):
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise ValueError(f"{labels_path}:{line_no}: expected 4 tab-separated columns, got {len(cols)}")
            sid, e1, e2, label_text = cols
            if label_text not in ("0", "1"):
                raise ValueError(f"{labels_path}:{line_no}: label must be 0 or 1, got {label_text!r}")
            sentence = sentences.get(sid)
            if sentence is None:
                warnings.warn(f"{labels_path}:{line_no}: unknown sentence id {sid!r}, row skipped")
                skipped.append(SkippedRow(line_no, sid, "unknown sentence id"))
                continue
            e1, e2 = e1.lower(), e2.lower()
            if e1 == e2:
                warnings.warn(f"{labels_path}:{line_no}: identical object lemmas, row skipped")
                skipped.append(SkippedRow(line_no, sid, "identical object lemmas"))
                continue
            positions = _first_noun_positions(sentence, {e1, e2})
            missing = [w for w in (e1, e2) if w not in positions]
            if missing:
                warnings.warn(
                    f"{labels_path}:{line_no}: {missing[0]!r} does not occur as a noun in {sid!r}, row skipped"
                )
                skipped.append(SkippedRow(line_no, sid, f"object {missing[0]!r} not found as a noun"))
                continue
            first, second = sorted((e1, e2), key=lambda w: positions[w])
            instances.append(
                Instance(sentence, first, second, positions[first], positions[second], label=label_text == "1")
            )
    return LabeledDataset(instances, skipped)


def count_pair_sentences(instances: Iterable[Instance]) -> Counter:
    """Number of distinct sentences mentioning each sorted object pair."""
    seen = {(inst.pair, inst.sentence.id) for inst in instances}
    return Counter(pair for pair, _ in seen)


def pairs_cooccurring(counts: Counter, min_sentences: int = 10, strict: bool = True) -> dict:
    """Pairs whose sentence count exceeds (or, with strict=False, reaches) the threshold."""
    if strict:
        return {pair: c for pair, c in counts.items() if c > min_sentences}
    return {pair: c for pair, c in counts.items() if c >= min_sentences}
