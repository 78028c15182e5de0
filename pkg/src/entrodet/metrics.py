"""Per-sample detection metrics: soft/hard discovery rates, ROC sweeps,
and the band-limited energy baseline score.

All rates are computed per sample against a presence mask.  Soft rates
average the pseudo-probability scores themselves; with hard 0/1 scores
they reduce to the conventional TPR/TNR.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Optional, Tuple, Union

import numpy as np

from .entropy import BandSelection
from .errors import InvalidInputError, UndefinedRateError
from .timefreq import PowerSpectrogram

HIGHER_IS_SIGNAL = "higher_is_signal"
LOWER_IS_SIGNAL = "lower_is_signal"


@dataclass(frozen=True)
class ScoreSeries:
    """Detection scores plus the polarity of their decision rule.

    ``higher_is_signal`` scores (pseudo-probabilities, band energies)
    detect where ``score >= threshold``; ``lower_is_signal`` scores
    (raw entropy) detect where ``score <= threshold``.
    """

    values: np.ndarray
    polarity: str = HIGHER_IS_SIGNAL

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("scores contain NaN or Inf")
        if self.polarity not in (HIGHER_IS_SIGNAL, LOWER_IS_SIGNAL):
            raise InvalidInputError(f"unknown polarity {self.polarity!r}")
        object.__setattr__(self, "values", values)

    def detections(self, threshold: float) -> np.ndarray:
        if self.polarity == HIGHER_IS_SIGNAL:
            return self.values >= threshold
        return self.values <= threshold


@dataclass(frozen=True)
class SoftRates:
    stpr: float
    stnr: float


@dataclass(frozen=True)
class RocCurve:
    """ROC points ordered by strictly increasing threshold.

    ``degenerate`` marks the single-point curve produced by a constant
    score series.
    """

    thresholds: np.ndarray
    tpr: np.ndarray
    fpr: np.ndarray
    degenerate: bool = False

    def write_csv(self, out: IO[str]) -> None:
        out.write("threshold,tpr,fpr\n")
        for t, tp, fp in zip(self.thresholds, self.tpr, self.fpr):
            out.write(f"{t!r},{tp!r},{fp!r}\n")


def _mask_bool(mask, n: int) -> np.ndarray:
    """Accept a PresenceMask-like object or a boolean array."""
    if hasattr(mask, "to_bool"):
        b = mask.to_bool()
    else:
        b = np.asarray(mask).astype(bool)
    if b.size != n:
        raise InvalidInputError(f"mask length {b.size} does not match scores ({n})")
    return b


def _check_mask_nontrivial(b: np.ndarray) -> None:
    k = int(b.sum())
    if k == 0 or k == b.size:
        raise UndefinedRateError("presence mask must be neither empty nor full")


def soft_rates(c_s: Union[ScoreSeries, np.ndarray], mask) -> SoftRates:
    """Soft true positive / true negative discovery rates.

    STPR is the mean score over presence samples; STNR the mean of
    ``1 - score`` over the remaining samples.
    """
    values = c_s.values if isinstance(c_s, ScoreSeries) else np.asarray(c_s, dtype=np.float64)
    b = _mask_bool(mask, values.size)
    _check_mask_nontrivial(b)
    stpr = float(values[b].mean())
    stnr = float((1.0 - values[~b]).mean())
    return SoftRates(stpr=stpr, stnr=stnr)


def hard_rates(detections: np.ndarray, mask) -> Tuple[float, float]:
    """Per-sample (TPR, FPR) of binary detections against the mask."""
    d = np.asarray(detections).astype(bool)
    b = _mask_bool(mask, d.size)
    _check_mask_nontrivial(b)
    tpr = float(d[b].mean())
    fpr = float(d[~b].mean())
    return tpr, fpr


def roc_sweep(
    score: ScoreSeries,
    mask,
    n_thresholds: int = 200,
    sweep_range: Optional[Tuple[float, float]] = None,
) -> RocCurve:
    """Trace the ROC curve over a linear threshold sweep.

    Thresholds span ``sweep_range`` if given (use ``(0, 1)`` for
    pseudo-probability scores), otherwise the observed score range.  A
    constant score series with no explicit range yields a single
    degenerate point.
    """
    if n_thresholds < 2:
        raise InvalidInputError("n_thresholds must be >= 2")
    b = _mask_bool(mask, score.values.size)
    _check_mask_nontrivial(b)
    if sweep_range is None:
        lo, hi = float(score.values.min()), float(score.values.max())
        if lo == hi:
            d = score.detections(lo)
            return RocCurve(
                thresholds=np.array([lo]),
                tpr=np.array([float(d[b].mean())]),
                fpr=np.array([float(d[~b].mean())]),
                degenerate=True,
            )
    else:
        lo, hi = float(sweep_range[0]), float(sweep_range[1])
        if not lo < hi:
            raise InvalidInputError("sweep_range must be increasing")
    thresholds = np.linspace(lo, hi, n_thresholds)
    n_sig = int(b.sum())
    n_noise = b.size - n_sig
    tpr = np.empty(n_thresholds)
    fpr = np.empty(n_thresholds)
    for i, t in enumerate(thresholds):
        d = score.detections(t)
        tpr[i] = d[b].sum() / n_sig
        fpr[i] = d[~b].sum() / n_noise
    return RocCurve(thresholds=thresholds, tpr=tpr, fpr=fpr)


def bled_score(power: PowerSpectrogram, band: BandSelection) -> ScoreSeries:
    """Band-limited energy detector baseline: in-band power sum per
    time index, higher meaning more likely signal."""
    values = np.asarray(power.values)[band.k1 : band.k2, :].sum(axis=0)
    return ScoreSeries(values=values, polarity=HIGHER_IS_SIGNAL)
