"""Bivariate copulas: CDF, density, conditional h-function and its inverse,
plus Kendall-tau calibration.

A :class:`BivariateCopula` is an immutable (family, theta) pair.  Every
operation is pure, accepts scalars or arrays, and clamps unit-interval
arguments to [1e-12, 1 - 1e-12] for density/h evaluation so that corner
singularities cannot emit NaN.  The h-function is h(x, v) = dC(x, v)/dv,
the conditional CDF of the first argument given the second; its inverse is
solved by bisection to width ~1e-12 followed by two Newton polish steps
(the Gauss and independence families use their analytic inverses).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtri, owens_t

from .backend import kernels
from .errors import ConvergenceError, RangeError
from .families import (
    AMH,
    CLAYTON,
    FGM,
    FRANK,
    GAUSS,
    GUMBEL,
    INDEPENDENCE,
    JOE,
    THETA_DOMAIN,
    THETA_INDEP_EPS,
    CopulaFamily,
    validate_theta,
)

EPS_UNIT = kernels.EPS_UNIT

__all__ = [
    "BivariateCopula",
    "copula_cdf",
    "copula_density",
    "h_function",
    "h_inverse",
    "kendall_tau",
    "theta_from_tau",
    "tau_range",
]


@dataclass(frozen=True)
class BivariateCopula:
    """A copula family tag plus its scalar parameter theta."""

    family: CopulaFamily
    theta: float = 0.0
    _code: int = field(init=False, repr=False)

    def __post_init__(self):
        validate_theta(self.family, self.theta)
        code = self.family.code
        # near-zero Frank/Clayton parameters dispatch to independence to
        # avoid catastrophic cancellation in the closed forms
        if code in (FRANK, CLAYTON) and abs(self.theta) < THETA_INDEP_EPS:
            code = INDEPENDENCE
        object.__setattr__(self, "_code", code)

    def cdf(self, u, v):
        return copula_cdf(self, u, v)

    def density(self, u, v):
        return copula_density(self, u, v)

    def h(self, x, v):
        return h_function(self, x, v)

    def h_inv(self, p, v):
        return h_inverse(self, p, v)

    def tau(self) -> float:
        return kendall_tau(self)


def _as_array(a):
    return np.asarray(a, dtype=np.float64)


def copula_cdf(c: BivariateCopula, u, v):
    """C(u, v).  Exact at the unit-square boundary (no clamping)."""
    u = _as_array(u)
    v = _as_array(v)
    code, th = c._code, c.theta
    if code == INDEPENDENCE:
        out = u * v
    elif code == FRANK:
        g = math.expm1(-th)
        out = -np.log1p(np.expm1(-th * u) * np.expm1(-th * v) / g) / th
    elif code == CLAYTON:
        with np.errstate(divide="ignore", invalid="ignore"):
            a = -th * np.log(u)
            b = -th * np.log(v)
            m = np.maximum(a, b)
            logs = m + np.log(np.exp(a - m) + np.exp(b - m) - np.exp(-m))
            out = np.exp(-logs / th)
        out = np.where((u <= 0.0) | (v <= 0.0), 0.0, out)
    elif code == GUMBEL:
        with np.errstate(divide="ignore", invalid="ignore"):
            a = th * np.log(-np.log(u))
            b = th * np.log(-np.log(v))
            lt = np.logaddexp(a, b)
            out = np.exp(-np.exp(lt / th))
        out = np.where((u <= 0.0) | (v <= 0.0), 0.0, out)
    elif code == GAUSS:
        out = _gauss_cdf(th, u, v)
    elif code == JOE:
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = th * np.log1p(-np.clip(u, 0.0, 1.0))
            lq = th * np.log1p(-np.clip(v, 0.0, 1.0))
            logs = np.logaddexp(lp, lq + np.log1p(-np.exp(lp)))
            out = -np.expm1(logs / th)
        out = np.where((u <= 0.0) | (v <= 0.0), 0.0, out)
    elif code == FGM:
        out = u * v * (1.0 + th * (1.0 - u) * (1.0 - v))
    elif code == AMH:
        out = u * v / (1.0 - th * (1.0 - u) * (1.0 - v))
    else:  # pragma: no cover
        raise ValueError(code)
    return out if out.ndim else float(out)


def _gauss_cdf(rho, u, v):
    """Bivariate normal copula CDF through Owen's T function.

    Uses P(X<=h, Y<=k) = (Phi(h)+Phi(k))/2 - T(h,a_h) - T(k,a_k) - delta with
    delta = 1/2 when hk < 0; the h=0 (or k=0) axis uses the analytic limit
    P = Phi(k)/2 - T(k, -rho/sqrt(1-rho^2)).
    """
    from scipy.special import ndtr

    u1d = np.atleast_1d(np.clip(u, 0.0, 1.0)).astype(np.float64)
    v1d = np.atleast_1d(np.clip(v, 0.0, 1.0)).astype(np.float64)
    u1d, v1d = np.broadcast_arrays(u1d, v1d)
    s = math.sqrt(1.0 - rho * rho)
    zero = (u1d <= 0.0) | (v1d <= 0.0)
    uone = u1d >= 1.0
    vone = v1d >= 1.0
    interior = ~(zero | uone | vone)
    h = ndtri(np.where(interior, u1d, 0.5))
    k = ndtri(np.where(interior, v1d, 0.5))
    hz = h == 0.0
    kz = k == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ah = (k - rho * h) / (np.where(hz, 1.0, h) * s)
        ak = (h - rho * k) / (np.where(kz, 1.0, k) * s)
    generic = (0.5 * (ndtr(h) + ndtr(k)) - owens_t(h, ah) - owens_t(k, ak)
               - np.where(h * k < 0.0, 0.5, 0.0))
    axis_h = 0.5 * ndtr(k) - owens_t(k, -rho / s)
    axis_k = 0.5 * ndtr(h) - owens_t(h, -rho / s)
    val = np.where(hz, axis_h, np.where(kz, axis_k, generic))
    val = np.clip(val, 0.0, 1.0)
    out = np.where(zero, 0.0, np.where(uone, v1d, np.where(vone, u1d, val)))
    return out.reshape(np.broadcast(np.asarray(u), np.asarray(v)).shape)


def copula_density(c: BivariateCopula, u, v):
    """c(u, v) = d2 C / du dv, evaluated with clamped arguments."""
    out = np.exp(kernels.logpdf_array(c._code, c.theta, _as_array(u), _as_array(v)))
    return out if out.ndim else float(out)


def h_function(c: BivariateCopula, x, v):
    """Conditional CDF h(x, v) = dC(x, v)/dv."""
    out = kernels.h_array(c._code, c.theta, _as_array(x), _as_array(v))
    return out if out.ndim else float(out)


def h_inverse(c: BivariateCopula, p, v):
    """Solve h(x, v) = p for x (absolute tolerance ~1e-10)."""
    p_arr = _as_array(p)
    v_arr = _as_array(v)
    out = kernels.hinv_array(c._code, c.theta, p_arr, v_arr)
    # verify convergence; a numerically flat h cannot bracket the root
    pc = np.clip(p_arr, EPS_UNIT, 1.0 - EPS_UNIT)
    resid = np.abs(kernels.h_array(c._code, c.theta, out, v_arr) - pc)
    if np.any(resid > 1e-6):
        bad = np.unravel_index(int(np.argmax(resid)), np.shape(resid)) if resid.ndim else ()
        raise ConvergenceError(
            f"h_inverse failed to converge for {c.family.name}(theta={c.theta}): "
            f"residual {float(np.max(resid)):.3e} at index {bad}"
        )
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Kendall's tau
# ---------------------------------------------------------------------------


def _adaptive_simpson(f, a, b, tol=1e-10, depth=50):
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return (_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + _simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1))


def debye1(theta: float) -> float:
    """First Debye function D1(theta) = (1/theta) * int_0^theta t/(e^t - 1) dt."""
    if theta == 0.0:
        return 1.0

    def integrand(t):
        if abs(t) < 1e-12:
            return 1.0 - 0.5 * t
        return t / math.expm1(t)

    return _adaptive_simpson(integrand, 0.0, theta, tol=1e-10) / theta


def _frank_tau(theta: float) -> float:
    a = abs(theta)
    if a < THETA_INDEP_EPS:
        return 0.0
    tau = 1.0 - 4.0 / a * (1.0 - debye1(a))
    return math.copysign(tau, theta)


def _amh_tau(theta: float) -> float:
    if abs(theta) < 1e-5:
        return 2.0 * theta / 9.0
    return 1.0 - 2.0 * (theta + (1.0 - theta) ** 2 * math.log1p(-theta)) / (3.0 * theta * theta)


def _joe_tau(theta: float) -> float:
    # generic Archimedean identity tau = 1 + 4 * int_0^1 phi(t)/phi'(t) dt
    if theta == 1.0:
        return 0.0

    def integrand(t):
        if t <= 0.0 or t >= 1.0:
            return 0.0
        w = -math.expm1(theta * math.log1p(-t))  # 1 - (1-t)^theta
        if w <= 0.0:
            return 0.0
        return w * math.log(w) * math.exp((1.0 - theta) * math.log1p(-t)) / theta

    return 1.0 + 4.0 * _adaptive_simpson(integrand, 0.0, 1.0, tol=1e-10)


def kendall_tau(c: BivariateCopula) -> float:
    """Population Kendall's tau of the copula."""
    code, th = c._code, c.theta
    if code == INDEPENDENCE:
        return 0.0
    if code == FRANK:
        return _frank_tau(th)
    if code == CLAYTON:
        return th / (th + 2.0)
    if code == GUMBEL:
        return 1.0 - 1.0 / th
    if code == GAUSS:
        return 2.0 * math.asin(th) / math.pi
    if code == JOE:
        return _joe_tau(th)
    if code == FGM:
        return 2.0 * th / 9.0
    if code == AMH:
        return _amh_tau(th)
    raise ValueError(code)  # pragma: no cover


def tau_range(family: CopulaFamily) -> tuple[float, float]:
    """Attainable Kendall-tau interval of a family on its implemented domain."""
    lo, hi, lo_open, hi_open = THETA_DOMAIN[family]
    if family is CopulaFamily.INDEPENDENCE:
        return (0.0, 0.0)
    if family is CopulaFamily.CLAYTON:
        return (0.0, hi / (hi + 2.0))
    if family is CopulaFamily.AMH:
        return (_amh_tau(-1.0), 1.0 / 3.0)
    c_lo = BivariateCopula(family, lo + 1e-9 if lo_open else lo)
    c_hi = BivariateCopula(family, hi - 1e-9 if hi_open else hi)
    return (kendall_tau(c_lo), kendall_tau(c_hi))


def theta_from_tau(family: CopulaFamily, tau: float) -> float:
    """Invert tau(theta) for the family (|residual| <= 1e-8).

    Raises RangeError naming the attainable interval when tau cannot be
    reached on the implemented parameter domain.
    """
    tau = float(tau)
    lo_t, hi_t = tau_range(family)
    if family is CopulaFamily.INDEPENDENCE:
        if abs(tau) > 1e-12:
            raise RangeError("INDEPENDENCE attains only tau = 0")
        return 0.0
    if not (lo_t - 1e-12 <= tau <= hi_t + 1e-12):
        raise RangeError(
            f"tau={tau} is outside the attainable range [{lo_t:.6g}, {hi_t:.6g}] "
            f"of the {family.name} family"
        )
    lo, hi, lo_open, hi_open = THETA_DOMAIN[family]
    if family is CopulaFamily.GAUSS:
        return math.sin(math.pi * tau / 2.0)
    if family is CopulaFamily.CLAYTON:
        if tau <= 0.0:
            return 0.0  # construction dispatches to independence
        return min(2.0 * tau / (1.0 - tau), hi)
    if family is CopulaFamily.GUMBEL:
        if tau <= 0.0:
            return 1.0
        return min(1.0 / (1.0 - tau), hi)
    if family is CopulaFamily.FGM:
        return 4.5 * tau
    if family is CopulaFamily.FRANK:
        if abs(tau) < 1e-9:
            return 0.0
        a = abs(tau)
        theta = brentq(lambda t: _frank_tau(t) - a, 1e-6, 35.0, xtol=1e-13)
        return math.copysign(theta, tau)
    if family is CopulaFamily.JOE:
        if tau <= 0.0:
            return 1.0
        return brentq(lambda t: _joe_tau(t) - tau, 1.0, 30.0, xtol=1e-12)
    if family is CopulaFamily.AMH:
        if abs(tau) < 1e-10:
            return 0.0
        return brentq(lambda t: _amh_tau(t) - tau, -1.0, 1.0 - 1e-12, xtol=1e-14)
    raise ValueError(family)  # pragma: no cover


def conditional_sample(c: BivariateCopula, n: int, seed: int) -> np.ndarray:
    """Sample n pairs from the copula via (u, h_inverse(w, u))."""
    return kernels.conditional_pairs_kernel(c._code, c.theta, int(n), int(seed))
