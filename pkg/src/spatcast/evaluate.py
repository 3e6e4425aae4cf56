"""Prediction-error curves over elapsed phase time.

For a grid of times t, the error at t averages a loss between the
prediction made at t and the realized duration, over exactly the cycles
whose duration exceeds t (the cycles for which a prediction at t was ever
needed).  In-sample evaluation is the default; leave-one-out refits the
predictor without the evaluated cycle.  Grid points are independent, so
evaluation parallelizes trivially.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .cycles import CycleTable
from .distributions import EmpiricalDist, JointSamples
from .errors import EmptyGrid
from .ioutil import text_sink
from .predict import (
    DEFAULT_HOLD_S,
    Method,
    predict,
    predict_sum_joint,
)

PredictorLike = Callable  # a Method, or callable(dist_or_joint, t) -> float


@dataclass(frozen=True)
class ErrorCurve:
    """Loss versus elapsed time, with surviving-sample counts."""

    ts: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    predictor: str
    metric: str

    def __post_init__(self) -> None:
        if np.any(np.diff(self.counts) > 0):
            raise ValueError("survivor counts must be non-increasing in t")

    def aggregate(self) -> float:
        """Unweighted mean of the curve over its defined grid."""
        return float(self.values.mean())


def _mae_loss(err: np.ndarray) -> np.ndarray:
    return np.abs(err)


def _mse_loss(err: np.ndarray) -> np.ndarray:
    return err * err


def _asym_loss(c1: float, c2: float) -> Callable[[np.ndarray], np.ndarray]:
    def loss(err: np.ndarray) -> np.ndarray:
        return np.where(err < 0, c1 * np.abs(err), c2 * err)
    return loss


def _eval_arrays(dist_or_joint, eval_table: CycleTable) -> tuple[np.ndarray, np.ndarray]:
    """(survival key, prediction target) per evaluation cycle.

    For a scalar distribution both are the quantity itself.  For joint
    samples the survival key is the leading duration (predictions exist
    while the lead phase runs) and the target is the per-cycle sum.
    """
    if isinstance(dist_or_joint, JointSamples):
        lead = eval_table.column(dist_or_joint.lead_quantity)
        follow = eval_table.column(dist_or_joint.follow_quantity)
        return lead, lead + follow
    values = eval_table.column(dist_or_joint.quantity)
    return values, values


def _point_prediction(predictor, dist_or_joint, t: float, hold: float) -> float:
    if hasattr(predictor, "apply"):
        if isinstance(dist_or_joint, JointSamples):
            return predict_sum_joint(
                dist_or_joint, t, predictor, hold_interval=hold
            ).predicted_duration
        return predict(
            dist_or_joint, t, predictor, hold_interval=hold
        ).predicted_duration
    return float(predictor(dist_or_joint, t))


def _drop_one(dist_or_joint, key_value: float, target_value: float):
    """Remove one sample matching the evaluated cycle from the training set."""
    if isinstance(dist_or_joint, JointSamples):
        mask = (dist_or_joint.lead == key_value) & (
            dist_or_joint.lead + dist_or_joint.follow == target_value
        )
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            raise ValueError("leave-one-out requires in-sample evaluation")
        keep = np.ones(dist_or_joint.n, dtype=bool)
        keep[idx[0]] = False
        if not keep.any():
            return None
        return JointSamples(
            dist_or_joint.lead[keep], dist_or_joint.follow[keep],
            dist_or_joint.lead_quantity, dist_or_joint.follow_quantity,
            dist_or_joint.stratum, dist_or_joint.provenance,
        )
    values = dist_or_joint.values
    pos = int(np.searchsorted(values, key_value))
    if pos >= values.size or values[pos] != key_value:
        raise ValueError("leave-one-out requires in-sample evaluation")
    if values.size == 1:
        return None
    return EmpiricalDist(
        np.delete(values, pos), dist_or_joint.quantity,
        dist_or_joint.stratum, dist_or_joint.provenance,
    )


def error_curve(
    predictor: PredictorLike,
    dist_or_joint,
    eval_table: CycleTable,
    loss: Callable[[np.ndarray], np.ndarray],
    metric: str,
    *,
    predictor_label: str | None = None,
    grid_step: float = 1.0,
    leave_one_out: bool = False,
    threads: int = 1,
    hold_interval: float = DEFAULT_HOLD_S,
) -> ErrorCurve:
    """Average ``loss`` between predictions at each grid t and realizations.

    The grid runs from 0 in steps of ``grid_step`` while at least one
    evaluation cycle survives (duration strictly greater than t).  When the
    training distribution is exhausted before the evaluation samples are
    (possible out-of-sample), the broadcast fallback of t + hold_interval
    stands in for the prediction.  Leave-one-out needs a refittable
    predictor (a Method) and in-sample data.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    key, target = _eval_arrays(dist_or_joint, eval_table)
    if key.size == 0 or not np.any(key > 0):
        raise EmptyGrid("no evaluation sample survives any t >= 0")
    if leave_one_out and not hasattr(predictor, "apply"):
        raise ValueError("leave-one-out needs a refittable prediction method")

    ts = np.arange(0.0, float(key.max()), grid_step)

    def at(t: float):
        mask = key > t
        n = int(mask.sum())
        if n == 0:
            return None
        if leave_one_out:
            errs = np.empty(n)
            for i, (kv, tv) in enumerate(zip(key[mask], target[mask])):
                reduced = _drop_one(dist_or_joint, kv, tv)
                if reduced is None:
                    pred = t + hold_interval
                else:
                    pred = _point_prediction(predictor, reduced, t, hold_interval)
                errs[i] = pred - tv
            return t, float(loss(errs).mean()), n
        pred = _point_prediction(predictor, dist_or_joint, t, hold_interval)
        return t, float(loss(pred - target[mask]).mean()), n

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = [p for p in pool.map(at, ts) if p is not None]
    else:
        points = [p for p in map(at, ts) if p is not None]
    if not points:
        raise EmptyGrid("no grid point has surviving samples")

    label = predictor_label or getattr(predictor, "label", repr(predictor))
    return ErrorCurve(
        ts=np.array([p[0] for p in points]),
        values=np.array([p[1] for p in points]),
        counts=np.array([p[2] for p in points], dtype=np.int64),
        predictor=label,
        metric=metric,
    )


def mae_curve(predictor, dist_or_joint, eval_table, **kwargs) -> ErrorCurve:
    """Mean absolute error versus elapsed time."""
    return error_curve(predictor, dist_or_joint, eval_table, _mae_loss, "mae", **kwargs)


def mse_curve(predictor, dist_or_joint, eval_table, **kwargs) -> ErrorCurve:
    """Mean squared error versus elapsed time."""
    return error_curve(predictor, dist_or_joint, eval_table, _mse_loss, "mse", **kwargs)


def loss_curve(predictor, dist_or_joint, eval_table, c1: float, c2: float, **kwargs) -> ErrorCurve:
    """Asymmetric loss (c1 under, c2 over) versus elapsed time.

    With c1 = c2 = 1 this reduces exactly to ``mae_curve``.
    """
    if c1 <= 0 or c2 <= 0:
        raise ValueError("c1 and c2 must be > 0")
    return error_curve(
        predictor, dist_or_joint, eval_table,
        _asym_loss(c1, c2), f"loss({c1:g},{c2:g})", **kwargs
    )


def _metric_curve(metric_spec: str, predictor, dist_or_joint, eval_table, **kwargs) -> ErrorCurve:
    name, _, rest = metric_spec.partition(":")
    if name == "mae":
        return mae_curve(predictor, dist_or_joint, eval_table, **kwargs)
    if name == "mse":
        return mse_curve(predictor, dist_or_joint, eval_table, **kwargs)
    if name == "loss":
        try:
            c1_s, c2_s = rest.split(":")
            c1, c2 = float(c1_s), float(c2_s)
        except ValueError as exc:
            raise ValueError(f"loss metric must look like 'loss:c1:c2', got {metric_spec!r}") from exc
        return loss_curve(predictor, dist_or_joint, eval_table, c1, c2, **kwargs)
    raise ValueError(f"unknown metric {metric_spec!r}")


def compare(
    predictors: Sequence[tuple[str, PredictorLike]],
    dist_or_joint,
    eval_table: CycleTable,
    metrics: Sequence[str] = ("mae", "mse"),
    **kwargs,
) -> list[tuple[float, str, str, float, int]]:
    """Long-format rows (t, predictor, metric, value, n) for each curve."""
    if not predictors:
        raise ValueError("at least one predictor is required")
    if not metrics:
        raise ValueError("at least one metric is required")
    rows = []
    for label, pred in predictors:
        for metric_spec in metrics:
            curve = _metric_curve(
                metric_spec, pred, dist_or_joint, eval_table,
                predictor_label=label, **kwargs,
            )
            rows.extend(
                (float(t), label, curve.metric, float(v), int(n))
                for t, v, n in zip(curve.ts, curve.values, curve.counts)
            )
    return rows


def write_comparison_csv(rows, target) -> None:
    with text_sink(target) as f:
        w = csv.writer(f)
        w.writerow(["t", "predictor", "metric", "value", "n"])
        for t, label, metric, value, n in rows:
            w.writerow([f"{t:g}", label, metric, f"{value:.6f}", n])


def write_distribution_csv(dist: EmpiricalDist, target) -> None:
    """Dump (value, probability) rows of a fitted distribution."""
    values, probs = dist.pdf()
    with text_sink(target) as f:
        w = csv.writer(f)
        w.writerow(["value", "probability"])
        for v, p in zip(values, probs):
            w.writerow([f"{v:.2f}", f"{p:.10g}"])


def write_plot_data(dist: EmpiricalDist, prefix: str, bin_width: float = 1.0) -> None:
    """Emit binned pdf and exact cdf CSVs for external plotting."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    lo = np.floor(dist.support_min() / bin_width) * bin_width
    hi = np.ceil(dist.support_max() / bin_width) * bin_width
    edges = np.arange(lo, hi + bin_width, bin_width)
    hist, _ = np.histogram(dist.values, bins=edges)
    with open(f"{prefix}_pdf.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["bin_left", "bin_right", "probability"])
        for left, right, count in zip(edges[:-1], edges[1:], hist):
            w.writerow([f"{left:g}", f"{right:g}", f"{count / dist.n:.10g}"])
    values, probs = dist.pdf()
    with open(f"{prefix}_cdf.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["value", "cdf"])
        cum = 0.0
        for v, p in zip(values, probs):
            cum += p
            w.writerow([f"{v:.2f}", f"{cum:.10g}"])
