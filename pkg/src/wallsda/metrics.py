"""CV(RMSE), NMBE and the ASHRAE Guideline 14 hourly calibration bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CV_RMSE_LIMIT = 30.0
NMBE_LIMIT = 10.0


class MetricError(ValueError):
    pass


def _pair(truth, pred):
    t = np.asarray(truth, dtype=float).ravel()
    p = np.asarray(pred, dtype=float).ravel()
    if t.shape != p.shape:
        raise MetricError(f"length mismatch: truth {t.size}, prediction {p.size}")
    if t.size < 1:
        raise MetricError("metrics need at least one sample")
    return t, p


def cv_rmse(truth, pred) -> float:
    """RMSE normalised by the mean of ``truth``, in percent (1/n convention)."""
    t, p = _pair(truth, pred)
    mean = t.mean()
    if mean == 0:
        raise MetricError("CV(RMSE) is undefined for a zero-mean reference series")
    return float(100.0 * np.sqrt(np.mean((t - p) ** 2)) / mean)


def nmbe(truth, pred) -> float:
    """Signed bias ``sum(pred - truth) / sum(truth)`` in percent; positive = over-prediction."""
    t, p = _pair(truth, pred)
    total = t.sum()
    if total == 0:
        raise MetricError("NMBE is undefined when the reference series sums to zero")
    return float(100.0 * (p - t).sum() / total)


def passes_ashrae(cv: float, bias: float) -> bool:
    return bool(cv <= CV_RMSE_LIMIT and abs(bias) <= NMBE_LIMIT)


@dataclass(frozen=True)
class MetricsReport:
    cv_rmse: float
    nmbe: float
    channel: str = "T_ext1"
    window: str = "forecast"

    @property
    def passes_ashrae(self) -> bool:
        return passes_ashrae(self.cv_rmse, self.nmbe)


def verdict(cv: float, bias: float) -> dict:
    if not (np.isfinite(cv) and np.isfinite(bias)):
        raise MetricError("verdict needs finite metrics")
    return {"cv_rmse": float(cv), "nmbe": float(bias), "passes_ashrae": passes_ashrae(cv, bias)}


def evaluate(truth, pred, channel: str = "T_ext1", window: str = "forecast") -> MetricsReport:
    return MetricsReport(cv_rmse=cv_rmse(truth, pred), nmbe=nmbe(truth, pred),
                         channel=channel, window=window)


def rms(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))
