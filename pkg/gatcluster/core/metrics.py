"""
Clustering evaluation against ground-truth classes: ACC, NMI, F-score and ARI.

Predicted ids and class ids may be arbitrary integers and their counts may
differ; ACC solves a rectangular assignment on the contingency table.
"""

import logging
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score, f1_score, normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix

from ..models.training_models import MetricsReport
from .exceptions import MetricsException

logger = logging.getLogger(__name__)

NMI_NORMALIZATION = "arithmetic"
FSCORE_VARIANT = "macro-f1-after-acc-mapping"
METRIC_NAMES = ("acc", "nmi", "fscore", "ari")


def _as_labels(pred: Sequence[int], truth: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred).astype(np.int64).reshape(-1)
    truth = np.asarray(truth).astype(np.int64).reshape(-1)
    if pred.size != truth.size:
        raise MetricsException(f"Label length mismatch: {pred.size} predicted vs {truth.size} true")
    if pred.size == 0:
        raise MetricsException("Cannot evaluate an empty labeling")
    return pred, truth


def contingency(pred: Sequence[int], truth: Sequence[int]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Counts table C[cluster, class] plus the sorted cluster and class ids."""
    pred, truth = _as_labels(pred, truth)
    table = contingency_matrix(pred, truth).astype(np.int64)
    return table, np.unique(pred), np.unique(truth)


def accuracy(pred: Sequence[int], truth: Sequence[int]) -> Tuple[float, Dict[int, int]]:
    """
    Fraction of nodes correctly labeled under the best one-to-one mapping of
    clusters to classes.

    Returns:
        (acc, mapping) where mapping sends cluster ids to class ids. With more
        clusters than classes, the unmatched clusters are absent.
    """
    table, clusters, classes = contingency(pred, truth)
    rows, cols = linear_sum_assignment(table, maximize=True)
    matched = int(table[rows, cols].sum())
    mapping = {int(clusters[r]): int(classes[c]) for r, c in zip(rows, cols)}
    return matched / float(table.sum()), mapping


def nmi(pred: Sequence[int], truth: Sequence[int]) -> float:
    """Mutual information normalized by the arithmetic mean of the entropies."""
    pred, truth = _as_labels(pred, truth)
    value = normalized_mutual_info_score(truth, pred, average_method=NMI_NORMALIZATION)
    return float(np.clip(value, 0.0, 1.0))


def ari(pred: Sequence[int], truth: Sequence[int]) -> float:
    pred, truth = _as_labels(pred, truth)
    return float(np.clip(adjusted_rand_score(truth, pred), -1.0, 1.0))


def fscore(pred: Sequence[int], truth: Sequence[int]) -> float:
    """Macro F1 over the true classes after relabeling clusters by the ACC mapping."""
    pred, truth = _as_labels(pred, truth)
    _, mapping = accuracy(pred, truth)
    mapped = np.array([mapping.get(int(c), -1) for c in pred], dtype=np.int64)
    value = f1_score(truth, mapped, labels=np.unique(truth), average="macro", zero_division=0)
    return float(np.clip(value, 0.0, 1.0))


def evaluate_clustering(pred: Sequence[int], truth: Sequence[int]) -> MetricsReport:
    """All four metrics plus the mapping used for ACC and F-score."""
    acc, mapping = accuracy(pred, truth)
    report = MetricsReport(
        acc=acc,
        nmi=nmi(pred, truth),
        fscore=fscore(pred, truth),
        ari=ari(pred, truth),
        mapping=mapping,
        nmi_normalization=NMI_NORMALIZATION,
        fscore_variant=FSCORE_VARIANT,
    )
    logger.debug("Evaluated clustering: %s", report.as_row())
    return report


def format_table(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> str:
    """Render dict rows as a left-aligned text table; floats get 4 decimals."""
    def cell(value: Any) -> str:
        if isinstance(value, float):
            return f"{value:.4f}"
        return str(value)

    body: List[List[str]] = [[cell(row.get(column, "")) for column in columns] for row in rows]
    widths = [max([len(column)] + [len(line[i]) for line in body]) for i, column in enumerate(columns)]
    lines = ["  ".join(column.ljust(width) for column, width in zip(columns, widths))]
    lines.append("  ".join("-" * width for width in widths))
    for line in body:
        lines.append("  ".join(value.ljust(width) for value, width in zip(line, widths)))
    return "\n".join(lines)


def format_report(report: MetricsReport) -> str:
    return format_table(
        [{"metric": name, "value": float(getattr(report, name))} for name in METRIC_NAMES],
        ["metric", "value"],
    )


__all__ = [
    "METRIC_NAMES",
    "accuracy",
    "ari",
    "contingency",
    "evaluate_clustering",
    "fscore",
    "format_report",
    "format_table",
    "nmi",
]
