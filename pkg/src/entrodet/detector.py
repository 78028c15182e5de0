"""Two-class k-means on the entropy series and sigmoid soft classification.

The entropy series is clustered into a signal class (low entropy, mean
``mu_s``) and a no-signal class (mean ``mu_ns``).  Initializing the
means at the series minimum and maximum guarantees they cannot swap.
The midpoint between the converged means is the hard decision boundary;
a sigmoid centered there converts entropy to a pseudo-probability of
signal presence, scaled so the class means map to fixed probabilities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import expit

from .entropy import EntropySeries
from .errors import DegenerateClustersError, InvalidInputError

# below this fraction of the mean magnitude, a separation is treated as zero
_REL_SEPARATION_FLOOR = 1e-12


@dataclass(frozen=True)
class KMeansConfig:
    """Convergence control for the two-class k-means.

    ``epsilon`` is the threshold on the largest mean change per
    iteration; if None it defaults to ``1e-6 * (max(H) - min(H))``.
    """

    epsilon: Optional[float] = None
    max_iterations: int = 100

    def __post_init__(self):
        if self.epsilon is not None and not (self.epsilon > 0):
            raise InvalidInputError("epsilon must be positive")
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")


@dataclass(frozen=True)
class ClassMeans:
    """Converged class means with convergence status."""

    mu_s: float
    mu_ns: float
    converged: bool
    iterations_used: int

    @property
    def separation(self) -> float:
        return self.mu_ns - self.mu_s


@dataclass(frozen=True)
class ClassAssignment:
    """Binary membership per time index (1 = signal class)."""

    w: np.ndarray


def _values(h: Union[EntropySeries, np.ndarray]) -> np.ndarray:
    v = h.values if isinstance(h, EntropySeries) else np.asarray(h, dtype=np.float64)
    if v.size == 0:
        raise InvalidInputError("entropy series is empty")
    return v


def _assign(values: np.ndarray, mu_s: float, mu_ns: float) -> np.ndarray:
    # closest mean wins; ties go to the signal class
    return (values - mu_s) ** 2 <= (values - mu_ns) ** 2


def kmeans_two_class(
    h: Union[EntropySeries, np.ndarray],
    cfg: Optional[KMeansConfig] = None,
) -> Tuple[ClassMeans, ClassAssignment]:
    """Cluster an entropy series into signal / no-signal classes.

    Means start at the series minimum and maximum, then alternate
    closest-mean assignment and mean updates until the largest mean
    change is at most ``epsilon`` or the iteration cap is hit.  If an
    iteration empties a class, that class keeps its previous mean.
    """
    cfg = cfg or KMeansConfig()
    values = _values(h)
    mu_s = float(values.min())
    mu_ns = float(values.max())
    eps = cfg.epsilon if cfg.epsilon is not None else 1e-6 * (mu_ns - mu_s)

    converged = False
    iterations = 0
    for _ in range(cfg.max_iterations):
        iterations += 1
        w = _assign(values, mu_s, mu_ns)
        new_mu_s = float(values[w].mean()) if w.any() else mu_s
        new_mu_ns = float(values[~w].mean()) if (~w).any() else mu_ns
        delta = max(abs(new_mu_s - mu_s), abs(new_mu_ns - mu_ns))
        mu_s, mu_ns = new_mu_s, new_mu_ns
        if delta <= eps:
            converged = True
            break

    final = _assign(values, mu_s, mu_ns)
    means = ClassMeans(mu_s=mu_s, mu_ns=mu_ns, converged=converged, iterations_used=iterations)
    return means, ClassAssignment(w=final.astype(np.int8))


def decision_boundary(means: ClassMeans) -> float:
    """Midpoint between the class means."""
    return means.mu_s + (means.mu_ns - means.mu_s) / 2.0


def _check_separation(means: ClassMeans) -> float:
    sep = means.separation
    floor = _REL_SEPARATION_FLOOR * max(abs(means.mu_s), abs(means.mu_ns))
    if sep <= 0 or sep < floor:
        raise DegenerateClustersError(
            f"class means are degenerate (separation {sep:.3g}); "
            "run point_of_interest_test before soft classification"
        )
    return sep


def sigmoid_gain(p: float, means: ClassMeans) -> float:
    """Gain that makes the soft output equal ``p`` at ``H = mu_s``.

    Requires ``0.5 < p < 1`` and positive class separation.  With the
    boundary at the midpoint the expression reduces to ``ln(p/(1-p))``.
    """
    if not (0.5 < p < 1.0):
        raise InvalidInputError("target pseudo-probability must satisfy 0.5 < p < 1")
    _check_separation(means)
    return math.log(p / (1.0 - p))


def soft_classify(
    h: Union[EntropySeries, np.ndarray],
    means: ClassMeans,
    g: float,
) -> np.ndarray:
    """Pseudo-probability of signal presence for each entropy value.

    ``c_s(H) = sigmoid(-2 g (H - boundary) / (mu_ns - mu_s))``: strictly
    decreasing in H, exactly 0.5 at the boundary, and symmetric about
    it.  The normalization by the separation keeps the meaning of ``g``
    consistent across entropy scales.
    """
    if not (g > 0):
        raise InvalidInputError("gain must be positive")
    sep = _check_separation(means)
    values = _values(h)
    beta = decision_boundary(means)
    return expit(-2.0 * g * (values - beta) / sep)


def hard_classify(h: Union[EntropySeries, np.ndarray], means: ClassMeans) -> np.ndarray:
    """Hard decisions: 1 where entropy is at or below the boundary."""
    values = _values(h)
    return (values <= decision_boundary(means)).astype(np.int8)


def point_of_interest_test(means: ClassMeans, min_separation: float) -> bool:
    """Screen for signal presence: converged and separated class means.

    A recording with no signal segments drives both means to nearly the
    same value, so small separation (or non-convergence at the iteration
    cap) indicates there is nothing to detect.
    """
    return bool(means.converged and means.separation >= min_separation)
