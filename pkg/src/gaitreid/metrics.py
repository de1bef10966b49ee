"""Classification metrics, majority-vote re-identification, and benchmarks."""

from __future__ import annotations

import csv
import gc
import threading
import time
from dataclasses import dataclass, field

import numpy as np
import psutil

from .errors import ContractViolationError, EmptyInputError


@dataclass
class ConfusionMatrix:
    """K x K count grid: rows are true classes, columns are predictions."""

    labels: list
    grid: np.ndarray

    @property
    def total(self) -> int:
        return int(self.grid.sum())


@dataclass
class ClassMetrics:
    label: object
    precision: float
    recall: float
    f1: float
    support: int
    degenerate: tuple[str, ...] = ()


@dataclass
class EvaluationReport:
    accuracy: float
    per_class: list[ClassMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    total: int
    track_accuracy: float | None = None
    training_seconds: float | None = None
    peak_memory_mb: float | None = None


def confusion_matrix(predicted, actual, labels=None) -> ConfusionMatrix:
    """Count grid over (true, predicted) label pairs.

    labels fixes the class set (the model's classes); values outside it
    are a contract violation, as is a length mismatch.
    """
    predicted = list(predicted)
    actual = list(actual)
    if len(predicted) != len(actual):
        raise ContractViolationError(
            f"length mismatch: {len(predicted)} predictions vs {len(actual)} labels"
        )
    if labels is None:
        labels = sorted(set(actual) | set(predicted))
    labels = list(labels)
    index = {label: i for i, label in enumerate(labels)}
    grid = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for true_label, pred_label in zip(actual, predicted):
        if true_label not in index or pred_label not in index:
            raise ContractViolationError(
                f"label outside the class set: ({true_label!r}, {pred_label!r})"
            )
        grid[index[true_label], index[pred_label]] += 1
    return ConfusionMatrix(labels=labels, grid=grid)


def classification_report(matrix: ConfusionMatrix) -> EvaluationReport:
    """Accuracy plus one-vs-rest precision/recall/F1 per class.

    Zero-denominator rates are reported as 0 and flagged as degenerate.
    """
    grid = matrix.grid
    total = int(grid.sum())
    if total == 0:
        raise EmptyInputError("empty confusion matrix")

    accuracy = float(np.trace(grid)) / total
    per_class = []
    tp_sum = fp_sum = fn_sum = 0
    for i, label in enumerate(matrix.labels):
        tp = int(grid[i, i])
        fp = int(grid[:, i].sum()) - tp
        fn = int(grid[i, :].sum()) - tp
        support = int(grid[i, :].sum())
        degenerate = []
        if tp + fp > 0:
            precision = tp / (tp + fp)
        else:
            precision = 0.0
            degenerate.append("precision")
        if tp + fn > 0:
            recall = tp / (tp + fn)
        else:
            recall = 0.0
            degenerate.append("recall")
        if precision + recall > 0:
            f1 = 2 * precision * recall / (precision + recall)
        else:
            f1 = 0.0
            degenerate.append("f1")
        per_class.append(
            ClassMetrics(label, precision, recall, f1, support, tuple(degenerate))
        )
        tp_sum += tp
        fp_sum += fp
        fn_sum += fn

    k = len(per_class)
    micro_precision = tp_sum / (tp_sum + fp_sum) if tp_sum + fp_sum > 0 else 0.0
    micro_recall = tp_sum / (tp_sum + fn_sum) if tp_sum + fn_sum > 0 else 0.0
    if micro_precision + micro_recall > 0:
        micro_f1 = 2 * micro_precision * micro_recall / (micro_precision + micro_recall)
    else:
        micro_f1 = 0.0
    return EvaluationReport(
        accuracy=accuracy,
        per_class=per_class,
        macro_precision=sum(c.precision for c in per_class) / k,
        macro_recall=sum(c.recall for c in per_class) / k,
        macro_f1=sum(c.f1 for c in per_class) / k,
        micro_precision=micro_precision,
        micro_recall=micro_recall,
        micro_f1=micro_f1,
        total=total,
    )


def majority_vote(frame_probabilities, labels):
    """Track-level identity from per-frame class distributions.

    Counts per-frame argmax votes; the most frequent label wins. Ties fall
    back to the higher summed probability, then to the smaller label.
    """
    probs = np.asarray(frame_probabilities, dtype=np.float64)
    if probs.ndim == 1:
        probs = probs.reshape(1, -1)
    if probs.shape[0] == 0:
        raise EmptyInputError("majority_vote on an empty track")
    if probs.shape[1] != len(labels):
        raise ContractViolationError("probability width does not match label count")
    votes = np.bincount(np.argmax(probs, axis=1), minlength=len(labels))
    prob_sums = probs.sum(axis=0)
    ranked = sorted(
        range(len(labels)),
        key=lambda i: (-votes[i], -prob_sums[i], labels[i]),
    )
    return labels[ranked[0]]


@dataclass
class BenchmarkReport:
    runs: list[dict] = field(default_factory=list)
    median_seconds: float = 0.0
    median_peak_mb: float = 0.0


class _MemorySampler:
    """Samples this process's RSS on a 50 ms cadence, tracking the peak."""

    def __init__(self, interval: float = 0.05):
        self.interval = interval
        self.process = psutil.Process()
        self.peak = 0
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def _run(self):
        while not self._stop.is_set():
            self.peak = max(self.peak, self.process.memory_info().rss)
            self._stop.wait(self.interval)

    def __enter__(self):
        self.baseline = self.process.memory_info().rss
        self.peak = self.baseline
        self._thread.start()
        return self

    def __exit__(self, *_):
        self._stop.set()
        self._thread.join()
        self.peak = max(self.peak, self.process.memory_info().rss)

    @property
    def peak_delta_mb(self) -> float:
        return (self.peak - self.baseline) / (1024.0 * 1024.0)


def benchmark_training(features, labels, params, repetitions: int = 1,
                       csv_path=None) -> BenchmarkReport:
    """Median wall-clock time and peak RSS delta over repeated trainings.

    Runs serially; optionally writes a plot-ready CSV (run, seconds, peak_mb).
    """
    from .boosting import train

    if repetitions < 1:
        raise ContractViolationError("repetitions must be >= 1")
    report = BenchmarkReport()
    for run in range(1, repetitions + 1):
        gc.collect()
        with _MemorySampler() as sampler:
            start = time.perf_counter()
            train(features, labels, params)
            elapsed = time.perf_counter() - start
        report.runs.append(
            {"run": run, "seconds": elapsed, "peak_mb": sampler.peak_delta_mb}
        )
    report.median_seconds = float(np.median([r["seconds"] for r in report.runs]))
    report.median_peak_mb = float(np.median([r["peak_mb"] for r in report.runs]))
    if csv_path is not None:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["run", "seconds", "peak_mb"])
            for r in report.runs:
                writer.writerow([r["run"], repr(r["seconds"]), repr(r["peak_mb"])])
    return report


def write_report_csv(path, report: EvaluationReport) -> None:
    """Per-class rows mirroring (Class, Precision, Recall, F1, Support)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["CLASS", "PRECISION", "RECALL", "F1", "SUPPORT"])
        for c in report.per_class:
            writer.writerow(
                [c.label, repr(c.precision), repr(c.recall), repr(c.f1), c.support]
            )


def write_confusion_csv(path, matrix: ConfusionMatrix) -> None:
    """K x K grid with a header row/column of labels."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["TRUE\\PRED"] + [str(l) for l in matrix.labels])
        for label, row in zip(matrix.labels, matrix.grid):
            writer.writerow([label] + [int(v) for v in row])


def read_confusion_csv(path) -> ConfusionMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        labels = [_parse_label(cell) for cell in header[1:]]
        grid = []
        for cells in reader:
            grid.append([int(v) for v in cells[1:]])
    return ConfusionMatrix(labels=labels, grid=np.asarray(grid, dtype=np.int64))


def _parse_label(cell: str):
    try:
        return int(cell)
    except ValueError:
        return cell


def format_report(report: EvaluationReport) -> str:
    """Human-readable per-class table."""
    lines = [f"{'class':>8} {'precision':>10} {'recall':>10} {'f1':>10} {'support':>8}"]
    for c in report.per_class:
        lines.append(
            f"{c.label!s:>8} {c.precision:>10.4f} {c.recall:>10.4f} "
            f"{c.f1:>10.4f} {c.support:>8d}"
        )
    lines.append(f"accuracy: {report.accuracy:.4f} on {report.total} rows")
    if report.track_accuracy is not None:
        lines.append(f"track accuracy: {report.track_accuracy:.4f}")
    return "\n".join(lines)
