"""
CoreMotif — Choosing k: coreness histogram, normal vs power-law classification,
and band-targeted selection of the top-core size.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Dict, Union

import numpy as np
from scipy import optimize, stats

from config import K_BANDS, MIN_DISTINCT_CORENESS
from errors import ConfigError, DegenerateDistributionError
from kcore import CorenessMap

logger = logging.getLogger("coremotif")

NORMAL = "normal"
POWER_LAW = "power_law"


@dataclass(frozen=True, eq=False)
class CorenessHistogram:
    values: np.ndarray  # distinct coreness values, ascending
    counts: np.ndarray
    n: int

    @property
    def count_at(self) -> Dict[int, int]:
        return dict(zip(self.values.tolist(), self.counts.tolist()))


@dataclass(frozen=True)
class DistributionClass:
    kind: str
    fit_score_normal: float
    fit_score_powerlaw: float


def coreness_histogram(c: CorenessMap) -> CorenessHistogram:
    values, counts = np.unique(c.core, return_counts=True)
    return CorenessHistogram(values=values.astype(np.int64), counts=counts.astype(np.int64), n=c.n)


def _r_squared(observed: np.ndarray, predicted: np.ndarray) -> float:
    ss_tot = float(np.sum((observed - observed.mean()) ** 2))
    if ss_tot == 0.0:
        return 0.0
    ss_res = float(np.sum((observed - predicted) ** 2))
    return float(np.clip(1.0 - ss_res / ss_tot, 0.0, 1.0))


def _refine_amplitude(shape: np.ndarray, freq: np.ndarray) -> np.ndarray:
    """Least-squares amplitude for a fixed curve shape."""
    if not np.any(shape):
        return shape
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", optimize.OptimizeWarning)
        (amp,), _ = optimize.curve_fit(lambda _x, a: a * shape, np.arange(len(shape)), freq, p0=[1.0])
    return amp * shape


def fit_normal(h: CorenessHistogram) -> float:
    x = h.values.astype(np.float64)
    freq = h.counts / float(h.n)
    mean = float(np.average(x, weights=h.counts))
    sd = float(np.sqrt(np.average((x - mean) ** 2, weights=h.counts)))
    shape = stats.norm.pdf(x, loc=mean, scale=max(sd, 1e-12))
    return _r_squared(freq, _refine_amplitude(shape, freq))


def fit_power_law(h: CorenessHistogram) -> float:
    x = h.values.astype(np.float64)
    freq = h.counts / float(h.n)
    usable = (x > 0) & (freq > 0)
    if usable.sum() < 2:
        return 0.0
    fit = stats.linregress(np.log(x[usable]), np.log(freq[usable]))
    shape = np.zeros_like(freq)
    shape[x > 0] = np.exp(fit.intercept) * np.power(x[x > 0], fit.slope)
    return _r_squared(freq, _refine_amplitude(shape, freq))


def classify_distribution(h: CorenessHistogram) -> DistributionClass:
    """Pick whichever of the normal and power-law fits explains the histogram better."""
    if len(h.values) < MIN_DISTINCT_CORENESS:
        raise DegenerateDistributionError(
            "degenerate distribution: {} distinct coreness values (need {}); supply k manually".format(
                len(h.values), MIN_DISTINCT_CORENESS))
    r2_normal = fit_normal(h)
    r2_power = fit_power_law(h)
    kind = NORMAL if r2_normal >= r2_power else POWER_LAW
    logger.info("Coreness distribution: %s (R^2 normal=%.4f, power-law=%.4f)", kind, r2_normal, r2_power)
    return DistributionClass(kind=kind, fit_score_normal=r2_normal, fit_score_powerlaw=r2_power)


# ── k selection ──

def retained_fractions(c: CorenessMap) -> np.ndarray:
    """fractions[k] = |k-core| / n for k = 0 .. max_core + 1."""
    counts = np.bincount(c.core, minlength=c.max_core + 2)
    suffix = np.cumsum(counts[::-1])[::-1]
    return suffix / float(max(c.n, 1))


def k_for_fraction(c: CorenessMap, target: float) -> int:
    """Largest k >= 1 whose k-core still holds at least target of the nodes."""
    if not 0.0 < target <= 1.0:
        raise ConfigError("retained fraction must be in (0, 1], got {}".format(target))
    fractions = retained_fractions(c)
    ok = np.flatnonzero(fractions[1:c.max_core + 1] >= target)
    return int(ok[-1]) + 1 if len(ok) else 1


def select_k(c: CorenessMap, cls: Union[DistributionClass, str]) -> int:
    kind = getattr(cls, "kind", cls)
    if kind not in K_BANDS:
        raise ConfigError("unknown distribution class {!r}".format(kind))
    low, high = K_BANDS[kind]
    k = k_for_fraction(c, low)
    fraction = c.retained_fraction(k)
    if fraction > high:
        logger.info("k=%d retains %.2f%% of nodes; the %.0f-%.0f%% band is not reachable exactly",
                    k, 100 * fraction, 100 * low, 100 * high)
    else:
        logger.info("k=%d retains %.2f%% of nodes (%s band)", k, 100 * fraction, kind)
    return k
