"""Synthetic labeled corpus with gold parses, for tests and desk-scale runs.

Sentences come from hand-parsed templates: co-location templates ("the X sat
on the Y") are positive, comparison templates ("the X is older than the Y")
are negative. Each object pair is assigned one class and only ever appears in
templates of that class, so the sentence labels and the pair-level gold are
consistent and the corpus is separable by construction.

Output is byte-identical for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .corpus import ParsedSentence, Token, write_conllu

# (form, lemma, upos, head, deprel); X and Y mark the object slots
POSITIVE_TEMPLATES = (
    (
        ("the", "the", "DET", 2, "det"),
        ("X", "X", "NOUN", 3, "nsubj"),
        ("sat", "sit", "VERB", 0, "root"),
        ("on", "on", "ADP", 6, "case"),
        ("the", "the", "DET", 6, "det"),
        ("Y", "Y", "NOUN", 3, "obl"),
        (".", ".", "PUNCT", 3, "punct"),
    ),
    (
        ("a", "a", "DET", 2, "det"),
        ("X", "X", "NOUN", 3, "nsubj"),
        ("lay", "lie", "VERB", 0, "root"),
        ("near", "near", "ADP", 6, "case"),
        ("the", "the", "DET", 6, "det"),
        ("Y", "Y", "NOUN", 3, "obl"),
        (".", ".", "PUNCT", 3, "punct"),
    ),
    (
        ("the", "the", "DET", 2, "det"),
        ("X", "X", "NOUN", 3, "nsubj"),
        ("stood", "stand", "VERB", 0, "root"),
        ("beside", "beside", "ADP", 6, "case"),
        ("the", "the", "DET", 6, "det"),
        ("Y", "Y", "NOUN", 3, "obl"),
        (".", ".", "PUNCT", 3, "punct"),
    ),
    (
        ("the", "the", "DET", 2, "det"),
        ("X", "X", "NOUN", 3, "nsubj"),
        ("rested", "rest", "VERB", 0, "root"),
        ("under", "under", "ADP", 6, "case"),
        ("the", "the", "DET", 6, "det"),
        ("Y", "Y", "NOUN", 3, "obl"),
        (".", ".", "PUNCT", 3, "punct"),
    ),
)

NEGATIVE_TEMPLATES = (
    (
        ("the", "the", "DET", 2, "det"),
        ("X", "X", "NOUN", 4, "nsubj"),
        ("is", "be", "AUX", 4, "cop"),
        ("older", "old", "ADJ", 0, "root"),
        ("than", "than", "ADP", 7, "case"),
        ("the", "the", "DET", 7, "det"),
        ("Y", "Y", "NOUN", 4, "obl"),
        (".", ".", "PUNCT", 4, "punct"),
    ),
    (
        ("the", "the", "DET", 2, "det"),
        ("X", "X", "NOUN", 3, "nsubj"),
        ("resembles", "resemble", "VERB", 0, "root"),
        ("the", "the", "DET", 5, "det"),
        ("Y", "Y", "NOUN", 3, "obj"),
        (".", ".", "PUNCT", 3, "punct"),
    ),
    (
        ("the", "the", "DET", 2, "det"),
        ("X", "X", "NOUN", 3, "nsubj"),
        ("costs", "cost", "VERB", 0, "root"),
        ("more", "more", "ADV", 3, "advmod"),
        ("than", "than", "ADP", 7, "case"),
        ("the", "the", "DET", 7, "det"),
        ("Y", "Y", "NOUN", 3, "obl"),
        (".", ".", "PUNCT", 3, "punct"),
    ),
    (
        ("my", "my", "PRON", 2, "nmod:poss"),
        ("X", "X", "NOUN", 4, "nsubj"),
        ("is", "be", "AUX", 4, "cop"),
        ("cheaper", "cheap", "ADJ", 0, "root"),
        ("than", "than", "ADP", 7, "case"),
        ("the", "the", "DET", 7, "det"),
        ("Y", "Y", "NOUN", 4, "obl"),
        (".", ".", "PUNCT", 4, "punct"),
    ),
)

OBJECT_WORDS = (
    "dog", "cat", "table", "chair", "lamp", "book", "cup", "plate",
    "fork", "knife", "spoon", "bed", "door", "window", "garden", "tree",
    "fence", "wall", "shelf", "box", "stove", "mirror", "couch", "rug",
)


@dataclass
class SynthCorpus:
    sentences: list[ParsedSentence]
    labels: list[tuple[str, str, str, bool]]      # sentence id, first mention, second mention, label
    vocab: list[str]
    pair_gold: dict[tuple[str, str], bool]        # sorted pair -> is a true co-location pair
    embeddings: dict[str, np.ndarray]
    embedding_dim: int


def _instantiate(template, x: str, y: str, sentence_id: str) -> ParsedSentence:
    tokens = []
    for index, (form, lemma, upos, head, deprel) in enumerate(template, start=1):
        if form == "X":
            form = lemma = x
        elif form == "Y":
            form = lemma = y
        tokens.append(Token(index=index, form=form, lemma=lemma, upos=upos, head=head, deprel=deprel))
    return ParsedSentence(id=sentence_id, tokens=tuple(tokens))


def generate(n: int, seed: int = 0, n_pairs: int = 16, embedding_dim: int = 16) -> SynthCorpus:
    """Build n labeled sentences over n_pairs object pairs, half of each class."""
    if n < 2:
        raise ValueError("need at least two sentences")
    if n_pairs < 2:
        raise ValueError("need at least two object pairs")
    rng = np.random.default_rng(seed)

    all_pairs = list(combinations(OBJECT_WORDS, 2))
    chosen = [all_pairs[k] for k in rng.choice(len(all_pairs), size=n_pairs, replace=False)]
    half = n_pairs // 2
    positive_pairs = chosen[:half]
    negative_pairs = chosen[half:]
    pair_gold = {pair: True for pair in positive_pairs}
    pair_gold.update({pair: False for pair in negative_pairs})

    schedule = [True] * (n // 2) + [False] * (n - n // 2)
    rng.shuffle(schedule)

    sentences = []
    labels = []
    for k, positive in enumerate(schedule, start=1):
        pool = positive_pairs if positive else negative_pairs
        pair = pool[int(rng.integers(len(pool)))]
        templates = POSITIVE_TEMPLATES if positive else NEGATIVE_TEMPLATES
        template = templates[int(rng.integers(len(templates)))]
        x, y = pair if rng.random() < 0.5 else (pair[1], pair[0])
        sentence_id = f"syn{k:05d}"
        sentences.append(_instantiate(template, x, y, sentence_id))
        labels.append((sentence_id, x, y, positive))

    vocab = sorted({w for pair in chosen for w in pair})
    embeddings = {w: np.round(rng.normal(size=embedding_dim), 6) for w in vocab}
    return SynthCorpus(
        sentences=sentences,
        labels=labels,
        vocab=vocab,
        pair_gold={tuple(sorted(p)): v for p, v in pair_gold.items()},
        embeddings=embeddings,
        embedding_dim=embedding_dim,
    )


def write_corpus(corpus: SynthCorpus, out_dir) -> dict[str, Path]:
    """Write the five pipeline inputs; returns the path of each file."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "corpus": out_dir / "corpus.conllu",
        "labels": out_dir / "labels.tsv",
        "vocab": out_dir / "vocab.txt",
        "pairs_gold": out_dir / "pairs_gold.tsv",
        "embeddings": out_dir / "embeddings.txt",
    }
    write_conllu(corpus.sentences, paths["corpus"])
    with open(paths["labels"], "w", encoding="utf-8") as fh:
        fh.write("sentence_id\te1\te2\tlabel\n")
        for sentence_id, e1, e2, label in corpus.labels:
            fh.write(f"{sentence_id}\t{e1}\t{e2}\t{int(label)}\n")
    with open(paths["vocab"], "w", encoding="utf-8") as fh:
        for word in corpus.vocab:
            fh.write(word + "\n")
    with open(paths["pairs_gold"], "w", encoding="utf-8") as fh:
        fh.write("e1\te2\tlabel\n")
        for pair in sorted(corpus.pair_gold):
            fh.write(f"{pair[0]}\t{pair[1]}\t{int(corpus.pair_gold[pair])}\n")
    with open(paths["embeddings"], "w", encoding="utf-8") as fh:
        for word in corpus.vocab:
            components = " ".join(f"{v:.6f}" for v in corpus.embeddings[word])
            fh.write(f"{word} {components}\n")
    return paths
