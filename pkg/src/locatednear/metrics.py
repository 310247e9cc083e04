"""Evaluation metrics: classification scores, ranking scores, annotator agreement."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class ClassificationReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    flags: tuple[str, ...] = ()


def classification_metrics(preds: Sequence, labels: Sequence) -> ClassificationReport:
    """Accuracy plus precision/recall/F1 of the positive class.

    Zero-denominator cases score 0 and are named in ``flags``.
    """
    if len(preds) != len(labels):
        raise ValueError(f"prediction and label counts differ: {len(preds)} vs {len(labels)}")
    if not preds:
        raise ValueError("cannot score an empty prediction list")
    preds = [bool(p) for p in preds]
    labels = [bool(l) for l in labels]
    tp = sum(1 for p, l in zip(preds, labels) if p and l)
    fp = sum(1 for p, l in zip(preds, labels) if p and not l)
    fn = sum(1 for p, l in zip(preds, labels) if not p and l)
    tn = len(preds) - tp - fp - fn

    flags = []
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision = 0.0
        flags.append("no_positive_predictions")
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall = 0.0
        flags.append("no_positive_labels")
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        flags.append("f1_undefined")
    return ClassificationReport(
        accuracy=(tp + tn) / len(preds), precision=precision, recall=recall, f1=f1, flags=tuple(flags)
    )


def average_precision(ranked: Sequence) -> float:
    """Mean of precision at each relevant rank, normalized by the relevant count.

    A ranking with no relevant item scores 0 and emits a warning.
    """
    if len(ranked) == 0:
        raise ValueError("cannot score an empty ranking")
    hits = 0
    total = 0.0
    for position, relevant in enumerate(ranked, start=1):
        if relevant:
            hits += 1
            total += hits / position
    if hits == 0:
        warnings.warn("ranking has no relevant items; average precision defined as 0")
        return 0.0
    return total / hits


def mean_average_precision(rankings: Iterable[Sequence]) -> float:
    values = [average_precision(r) for r in rankings]
    if not values:
        raise ValueError("no rankings given")
    return sum(values) / len(values)


def precision_at_k(ranked: Sequence, k: int) -> float:
    """Relevant items among the top k, divided by k."""
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if len(ranked) < k:
        warnings.warn(f"ranking has only {len(ranked)} items, truncated below k={k}")
    hits = sum(1 for relevant in ranked[:k] if relevant)
    return hits / k


def cohens_kappa(labels_a: Sequence, labels_b: Sequence) -> float:
    """Chance-corrected agreement between two binary label vectors."""
    if len(labels_a) != len(labels_b):
        raise ValueError(f"label counts differ: {len(labels_a)} vs {len(labels_b)}")
    if not labels_a:
        raise ValueError("cannot score empty label vectors")
    a = [bool(v) for v in labels_a]
    b = [bool(v) for v in labels_b]
    n = len(a)
    p_o = sum(1 for u, v in zip(a, b) if u == v) / n
    p_a = sum(a) / n
    p_b = sum(b) / n
    p_e = p_a * p_b + (1 - p_a) * (1 - p_b)
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1 - p_e)


def mean_pairwise_kappa(label_sets: Sequence[Sequence]) -> float:
    """Multi-annotator agreement reported as the mean of pairwise kappas."""
    if len(label_sets) < 2:
        raise ValueError("need at least two annotators")
    values = []
    for i in range(len(label_sets)):
        for j in range(i + 1, len(label_sets)):
            values.append(cohens_kappa(label_sets[i], label_sets[j]))
    return sum(values) / len(values)


def format_classification_table(reports: dict[str, ClassificationReport]) -> str:
    """Aligned text table, methods as columns and Acc./P/R/F1 as rows."""
    names = list(reports)
    width = max(8, *(len(n) for n in names)) + 2
    lines = ["".ljust(6) + "".join(n.rjust(width) for n in names)]
    for row_name, attr in (("Acc.", "accuracy"), ("P", "precision"), ("R", "recall"), ("F1", "f1")):
        cells = "".join(f"{getattr(reports[n], attr):.3f}".rjust(width) for n in names)
        lines.append(row_name.ljust(6) + cells)
    flagged = {n: r.flags for n, r in reports.items() if r.flags}
    for name, flags in flagged.items():
        lines.append(f"# {name}: {', '.join(flags)}")
    return "\n".join(lines)


def classification_table_tsv(reports: dict[str, ClassificationReport]) -> str:
    lines = ["method\taccuracy\tprecision\trecall\tf1\tflags"]
    for name, r in reports.items():
        lines.append(f"{name}\t{r.accuracy!r}\t{r.precision!r}\t{r.recall!r}\t{r.f1!r}\t{','.join(r.flags)}")
    return "\n".join(lines)


def format_ranking_table(rows: dict[str, dict[str, float]]) -> str:
    """Aligned text table of ranking metrics, one row per scoring function."""
    metric_names: list[str] = []
    for metrics_row in rows.values():
        for name in metrics_row:
            if name not in metric_names:
                metric_names.append(name)
    width = max(8, *(len(n) for n in metric_names)) + 2
    lines = ["f".ljust(6) + "".join(n.rjust(width) for n in metric_names)]
    for row_name, metrics_row in rows.items():
        cells = "".join(
            (f"{metrics_row[n]:.3f}" if n in metrics_row else "-").rjust(width) for n in metric_names
        )
        lines.append(row_name.ljust(6) + cells)
    return "\n".join(lines)


def ranking_table_tsv(rows: dict[str, dict[str, float]]) -> str:
    metric_names: list[str] = []
    for metrics_row in rows.values():
        for name in metrics_row:
            if name not in metric_names:
                metric_names.append(name)
    lines = ["f\t" + "\t".join(metric_names)]
    for row_name, metrics_row in rows.items():
        lines.append(row_name + "\t" + "\t".join(repr(metrics_row.get(n, "")) for n in metric_names))
    return "\n".join(lines)
