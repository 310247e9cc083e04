"""Multi-level sentence normalization for an object-pair instance.

Every token is rewritten to one of four representations, applied in strict
priority order:

  1. the two grounded object tokens become the markers E1 and E2;
  2. verbs, adverbs and prepositions keep their lemma;
  3. noun arguments of verbs become ``governor-lemma#s`` (subjects) or
     ``governor-lemma#o`` (direct objects), and the noun a ``case``
     preposition attaches to becomes ``preposition-lemma#o``;
  4. everything else becomes its POS tag.

Signed token-index distances to the E1 and E2 positions ride along with the
rewritten sequence for position features.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .corpus import Instance, ParsedSentence, Token


class TokenKind(Enum):
    OBJECT_E1 = "object_e1"
    OBJECT_E2 = "object_e2"
    LEMMA = "lemma"
    DEP_ROLE = "dep_role"
    POS = "pos"


@dataclass(frozen=True)
class NormalizedToken:
    kind: TokenKind
    text: str


@dataclass(frozen=True)
class NormalizedSequence:
    tokens: tuple[NormalizedToken, ...]
    dist_e1: tuple[int, ...]
    dist_e2: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]


LEMMA_UPOS = frozenset({"VERB", "ADV", "ADP"})

# UD v1 spells the direct-object relation "dobj", v2 spells it "obj".
DIRECT_OBJECT_RELS = frozenset({"dobj", "obj"})

# Compact display tags for word classes that commonly survive to the POS level.
POS_RENDER = {"DET": "DT", "PRON": "PR", "CCONJ": "CC", "CONJ": "CC", "ADJ": "JJ"}

# Longer sentences are cut to a window around the object span.
MAX_SEQUENCE_TOKENS = 100


def render_pos(upos: str) -> str:
    return POS_RENDER.get(upos, upos)


def truncation_window(n: int, e1_pos: int, e2_pos: int, max_len: int) -> tuple[int, int]:
    """1-based inclusive window keeping the E1..E2 span plus symmetric context.

    The span itself is never cut, even when longer than ``max_len``.
    """
    if n <= max_len:
        return 1, n
    span = e2_pos - e1_pos + 1
    if span >= max_len:
        return e1_pos, e2_pos
    extra = max_len - span
    lo = e1_pos - extra // 2
    hi = e2_pos + (extra - extra // 2)
    if lo < 1:
        hi += 1 - lo
        lo = 1
    if hi > n:
        lo = max(1, lo - (hi - n))
        hi = n
    return lo, hi


def _dependency_role(sentence: ParsedSentence, tok: Token) -> str | None:
    if tok.head > 0:
        governor = sentence.token_at(tok.head)
        if governor.upos == "VERB":
            if tok.deprel == "nsubj":
                return f"{governor.lemma}#s"
            if tok.deprel in DIRECT_OBJECT_RELS:
                return f"{governor.lemma}#o"
    for child_index in sentence.children_of(tok.index):
        child = sentence.token_at(child_index)
        if child.deprel == "case" and child.upos == "ADP":
            return f"{child.lemma}#o"
    return None


def _normalize_token(sentence: ParsedSentence, tok: Token, e1_pos: int, e2_pos: int) -> NormalizedToken:
    if tok.index == e1_pos:
        return NormalizedToken(TokenKind.OBJECT_E1, "E1")
    if tok.index == e2_pos:
        return NormalizedToken(TokenKind.OBJECT_E2, "E2")
    if tok.upos in LEMMA_UPOS:
        return NormalizedToken(TokenKind.LEMMA, tok.lemma)
    role = _dependency_role(sentence, tok)
    if role is not None:
        return NormalizedToken(TokenKind.DEP_ROLE, role)
    return NormalizedToken(TokenKind.POS, render_pos(tok.upos))


def normalize_instance(instance: Instance, max_len: int = MAX_SEQUENCE_TOKENS) -> NormalizedSequence:
    """Rewrite an instance's sentence into the normalized token sequence.

    Distances are signed token-index offsets against the original positions,
    so differences between entries always equal position differences.
    """
    sentence = instance.sentence
    e1_pos, e2_pos = instance.e1_pos, instance.e2_pos
    lo, hi = truncation_window(len(sentence), e1_pos, e2_pos, max_len)
    tokens = []
    dist_e1 = []
    dist_e2 = []
    for tok in sentence.tokens[lo - 1 : hi]:
        tokens.append(_normalize_token(sentence, tok, e1_pos, e2_pos))
        dist_e1.append(tok.index - e1_pos)
        dist_e2.append(tok.index - e2_pos)
    return NormalizedSequence(tuple(tokens), tuple(dist_e1), tuple(dist_e2))


PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"


@dataclass(frozen=True)
class TokenIndex:
    """Token-text to integer-id map. Id 0 is padding; unseen text maps to the UNK id."""

    ids: dict[str, int]
    unk_id: int

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def size(self) -> int:
        return self.unk_id + 1

    def id_of(self, text: str) -> int:
        return self.ids.get(text, self.unk_id)


def _stream_texts(stream) -> Iterable[str]:
    if isinstance(stream, NormalizedSequence):
        return stream.texts
    return stream


def build_token_index(token_streams: Iterable[Sequence[str] | NormalizedSequence]) -> TokenIndex:
    """Assign contiguous ids (from 1, sorted text order) over training streams.

    Rebuilding on the same data always yields the identical mapping.
    """
    texts = sorted({t for stream in token_streams for t in _stream_texts(stream)})
    if not texts:
        raise ValueError("cannot build a token index from an empty training set")
    return TokenIndex(ids={t: i for i, t in enumerate(texts, start=1)}, unk_id=len(texts) + 1)


def save_token_index(index: TokenIndex, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{PAD_TOKEN}\t0\n")
        for text, token_id in sorted(index.ids.items(), key=lambda kv: kv[1]):
            fh.write(f"{text}\t{token_id}\n")
        fh.write(f"{UNK_TOKEN}\t{index.unk_id}\n")


def load_token_index(path) -> TokenIndex:
    ids: dict[str, int] = {}
    unk_id = None
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            text, _, id_text = line.partition("\t")
            try:
                token_id = int(id_text)
            except ValueError:
                raise ValueError(f"{path}:{line_no}: malformed id {id_text!r}") from None
            if text == PAD_TOKEN:
                continue
            if text == UNK_TOKEN:
                unk_id = token_id
                continue
            ids[text] = token_id
    if unk_id is None:
        raise ValueError(f"{path}: token index has no {UNK_TOKEN} entry")
    return TokenIndex(ids=ids, unk_id=unk_id)
