"""Univariate marginal models with PDF/CDF/quantile and bounded parameter
boxes for Bayesian evidence integration.

Parameter layouts: Gauss (mean, std), Gamma (shape, scale),
Lognormal (log-mean, log-std), Uniform (lower, upper).  Boxes are built from
data by moment matching widened to +-3 jackknife standard errors and
intersected with positivity constraints, which keeps the uniform-prior
evidence integral proper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaincinv, gammaln, ndtr, ndtri

from .errors import DomainError
from .families import MarginalFamily

__all__ = ["MarginalModel", "ParameterBox", "fit_box", "data_supported"]

_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class MarginalModel:
    """A marginal family plus its parameter vector."""

    family: MarginalFamily
    beta: tuple[float, float]

    def __post_init__(self):
        b = tuple(float(x) for x in self.beta)
        object.__setattr__(self, "beta", b)
        fam = self.family
        if len(b) != 2 or not all(math.isfinite(x) for x in b):
            raise DomainError(f"{fam.name} expects 2 finite parameters, got {b}")
        if fam is MarginalFamily.GAUSS and b[1] <= 0.0:
            raise DomainError(f"GAUSS std must be positive, got {b[1]}")
        if fam is MarginalFamily.GAMMA and (b[0] <= 0.0 or b[1] <= 0.0):
            raise DomainError(f"GAMMA shape/scale must be positive, got {b}")
        if fam is MarginalFamily.LOGNORMAL and b[1] <= 0.0:
            raise DomainError(f"LOGNORMAL log-std must be positive, got {b[1]}")
        if fam is MarginalFamily.UNIFORM and b[0] >= b[1]:
            raise DomainError(f"UNIFORM requires lower < upper, got {b}")

    def pdf(self, x):
        return _pdf(self.family, self.beta, x)

    def logpdf(self, x):
        return _logpdf(self.family, self.beta, x)

    def cdf(self, x):
        return _cdf(self.family, self.beta, x)

    def quantile(self, p):
        """Inverse CDF; p = 0/1 map to the support boundary (+-inf for
        unbounded tails: Gauss both ends, Gamma/Lognormal upper end)."""
        return _quantile(self.family, self.beta, p)


def _pdf(fam, beta, x):
    x = np.asarray(x, dtype=np.float64)
    a, b = beta
    if fam is MarginalFamily.GAUSS:
        z = (x - a) / b
        out = np.exp(-0.5 * z * z) / (b * _SQRT2PI)
    elif fam is MarginalFamily.GAMMA:
        with np.errstate(divide="ignore", invalid="ignore"):
            lx = np.log(x / b)
            out = np.exp((a - 1.0) * lx - x / b - gammaln(a)) / b
        out = np.where(x > 0.0, out, 0.0)
    elif fam is MarginalFamily.LOGNORMAL:
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(x) - a) / b
            out = np.exp(-0.5 * z * z) / (x * b * _SQRT2PI)
        out = np.where(x > 0.0, out, 0.0)
    else:
        out = np.where((x >= a) & (x <= b), 1.0 / (b - a), 0.0)
    return out if out.ndim else float(out)


def _logpdf(fam, beta, x):
    x = np.asarray(x, dtype=np.float64)
    a, b = beta
    if fam is MarginalFamily.GAUSS:
        z = (x - a) / b
        out = -0.5 * z * z - math.log(b * _SQRT2PI)
    elif fam is MarginalFamily.GAMMA:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (a - 1.0) * np.log(x / b) - x / b - gammaln(a) - math.log(b)
        out = np.where(x > 0.0, out, -np.inf)
    elif fam is MarginalFamily.LOGNORMAL:
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(x) - a) / b
            out = -0.5 * z * z - np.log(x) - math.log(b * _SQRT2PI)
        out = np.where(x > 0.0, out, -np.inf)
    else:
        out = np.where((x >= a) & (x <= b), -math.log(b - a), -np.inf)
    return out if out.ndim else float(out)


def _cdf(fam, beta, x):
    x = np.asarray(x, dtype=np.float64)
    a, b = beta
    if fam is MarginalFamily.GAUSS:
        out = ndtr((x - a) / b)
    elif fam is MarginalFamily.GAMMA:
        out = np.where(x > 0.0, gammainc(a, np.maximum(x, 0.0) / b), 0.0)
    elif fam is MarginalFamily.LOGNORMAL:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(x > 0.0, ndtr((np.log(np.maximum(x, 1e-300)) - a) / b), 0.0)
    else:
        out = np.clip((x - a) / (b - a), 0.0, 1.0)
    return out if out.ndim else float(out)


def _quantile(fam, beta, p):
    p = np.asarray(p, dtype=np.float64)
    if np.any((p < 0.0) | (p > 1.0)):
        raise DomainError("quantile argument must lie in [0, 1]")
    a, b = beta
    with np.errstate(divide="ignore", invalid="ignore"):
        if fam is MarginalFamily.GAUSS:
            out = a + b * ndtri(p)
        elif fam is MarginalFamily.GAMMA:
            # p = 0 -> support boundary 0; p = 1 -> +inf
            out = b * gammaincinv(a, p)
        elif fam is MarginalFamily.LOGNORMAL:
            out = np.exp(a + b * ndtri(p))
        else:
            out = a + p * (b - a)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ParameterBox:
    """Per-coordinate closed intervals with finite positive Lebesgue lengths."""

    lows: tuple[float, ...]
    highs: tuple[float, ...]

    def __post_init__(self):
        lows = tuple(float(x) for x in self.lows)
        highs = tuple(float(x) for x in self.highs)
        object.__setattr__(self, "lows", lows)
        object.__setattr__(self, "highs", highs)
        if len(lows) != len(highs):
            raise DomainError("box lows/highs length mismatch")
        for lo, hi in zip(lows, highs):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise DomainError(f"box interval [{lo}, {hi}] is not finite with lo < hi")

    @property
    def ndim(self) -> int:
        return len(self.lows)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(h - l for l, h in zip(self.lows, self.highs))

    def measure(self) -> float:
        out = 1.0
        for ln in self.lengths:
            out *= ln
        return out


def data_supported(family: MarginalFamily, x: np.ndarray) -> bool:
    """Whether the family can assign positive density to every observation."""
    if family in (MarginalFamily.GAMMA, MarginalFamily.LOGNORMAL):
        return bool(np.min(x) > 0.0)
    return True


def _jackknife_se(estimates: np.ndarray) -> np.ndarray:
    n = estimates.shape[0]
    mean = estimates.mean(axis=0)
    return np.sqrt((n - 1) / n * np.sum((estimates - mean) ** 2, axis=0))


def _loo_moments(x: np.ndarray):
    n = x.size
    s1 = x.sum()
    s2 = np.sum(x * x)
    loo_mean = (s1 - x) / (n - 1)
    loo_var = ((s2 - x * x) - (n - 1) * loo_mean**2) / (n - 2)
    return loo_mean, np.sqrt(np.maximum(loo_var, 1e-300))


def fit_box(family: MarginalFamily, x: np.ndarray,
            widen: float = 3.0) -> tuple[tuple[float, float], ParameterBox]:
    """Moment-matched point estimate and its +-widen jackknife-SE box."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 10:
        raise DomainError("need at least 10 observations to build a parameter box")
    if not data_supported(family, x):
        raise DomainError(f"{family.name} does not support nonpositive observations")

    if family is MarginalFamily.UNIFORM:
        a, b = float(np.min(x)), float(np.max(x))
        r = max(b - a, 1e-12 * max(1.0, abs(a)))
        pad = widen * r / n
        est = (a, b)
        box = ParameterBox((a - 2.0 * pad, b), (a, b + 2.0 * pad))
        return est, box

    if family is MarginalFamily.LOGNORMAL:
        lx = np.log(x)
        est_m, est_s = float(lx.mean()), float(lx.std(ddof=1))
        loo_m, loo_s = _loo_moments(lx)
    else:
        est_m, est_s = float(x.mean()), float(x.std(ddof=1))
        loo_m, loo_s = _loo_moments(x)

    if family is MarginalFamily.GAMMA:
        est = (est_m**2 / est_s**2, est_s**2 / est_m)
        loo = np.stack([loo_m**2 / loo_s**2, loo_s**2 / loo_m], axis=1)
    else:  # GAUSS parameters, or LOGNORMAL parameters on the log scale
        est = (est_m, est_s)
        loo = np.stack([loo_m, loo_s], axis=1)

    se = _jackknife_se(loo)
    se = np.maximum(se, 1e-8 * np.maximum(1.0, np.abs(est)))
    lo0, hi0 = est[0] - widen * se[0], est[0] + widen * se[0]
    lo1, hi1 = est[1] - widen * se[1], est[1] + widen * se[1]
    # positivity constraints
    if family is MarginalFamily.GAMMA:
        lo0 = max(lo0, 1e-3 * est[0])
    lo1 = max(lo1, 1e-3 * abs(est[1]))
    return est, ParameterBox((lo0, lo1), (hi0, hi1))
