"""Numba kernel backend.

JIT twins of ``_kernels_numpy`` with identical signatures.  Hot loops are
scalar recursions compiled with ``@njit``; batch entry points parallelize
over independent rows/elements so results are deterministic at any thread
count.  ``cache=True`` keeps compilation a one-time cost per environment.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from numba import njit, prange
from numba.core.errors import NumbaWarning

# threading-layer fallback notices (e.g. an old TBB) are harmless
warnings.filterwarnings("ignore", category=NumbaWarning, message=".*TBB.*")

from .families import AMH, CLAYTON, FGM, FRANK, GAUSS, GUMBEL, INDEPENDENCE, JOE

IS_JIT = True

EPS_UNIT = 1e-12
_BISECT_ITERS = 45
_NEWTON_ITERS = 2

_U64_30 = np.uint64(30)
_U64_27 = np.uint64(27)
_U64_31 = np.uint64(31)
_U64_11 = np.uint64(11)
_U64_1 = np.uint64(1)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SEED_TWEAK = np.uint64(0x243F6A8885A308D3)
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> _U64_30)) * _MIX1
    z = (z ^ (z >> _U64_27)) * _MIX2
    return z ^ (z >> _U64_31)


@njit(cache=True)
def _unit_double(seed, row, col):
    s0 = _mix64(seed ^ _SEED_TWEAK)
    z = _mix64(s0 + _GOLDEN * (row + _U64_1))
    z = _mix64(z + _GOLDEN * (col + _U64_1))
    return (np.float64(z >> _U64_11) + 0.5) * _INV_2_53


@njit(cache=True, parallel=True)
def _uniform_stream_kernel(seed, rows, cols, out):
    for i in prange(rows.shape[0]):
        out[i] = _unit_double(seed, rows[i], cols[i])


def uniform_stream(seed: int, rows, cols):
    """Uniform (0,1) doubles keyed by (seed, row index, column index)."""
    rows = np.asarray(rows, dtype=np.uint64)
    cols = np.broadcast_to(np.asarray(cols, dtype=np.uint64), rows.shape)
    out = np.empty(rows.shape, dtype=np.float64)
    _uniform_stream_kernel(np.uint64(seed & 0xFFFFFFFFFFFFFFFF), rows.ravel(),
                           np.ascontiguousarray(cols.ravel()), out.ravel())
    return out


# ---------------------------------------------------------------------------
# Scalar normal CDF / inverse CDF (Wichura's PPND16 rational approximation).
# ---------------------------------------------------------------------------

_SQRT1_2 = 1.0 / math.sqrt(2.0)


@njit(cache=True)
def _ndtr(x):
    return 0.5 * math.erfc(-x * _SQRT1_2)


@njit(cache=True)
def _ndtri(p):
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    if r <= 0.0:
        return -math.inf if q < 0.0 else math.inf
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r = r - 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    return -val if q < 0.0 else val


# ---------------------------------------------------------------------------
# Scalar copula primitives dispatched on an integer family code.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _clampu(x):
    if x < EPS_UNIT:
        return EPS_UNIT
    if x > 1.0 - EPS_UNIT:
        return 1.0 - EPS_UNIT
    return x


@njit(cache=True)
def _clayton_log_s(theta, lu, lv):
    a = -theta * lu
    b = -theta * lv
    m = a if a > b else b
    return m + math.log(math.exp(a - m) + math.exp(b - m) - math.exp(-m))


@njit(cache=True)
def _joe_log_s(lp, lq):
    p = math.exp(lp)
    b = lq + math.log1p(-p)
    m = lp if lp > b else b
    return m + math.log(math.exp(lp - m) + math.exp(b - m))


@njit(cache=True)
def _h_scalar(code, theta, x, v):
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    x = _clampu(x)
    v = _clampu(v)
    if code == INDEPENDENCE:
        return x
    if code == FRANK:
        a = math.expm1(-theta * x)
        b = math.expm1(-theta * v)
        g = math.expm1(-theta)
        return math.exp(-theta * v) * a / (g + a * b)
    if code == CLAYTON:
        lx = math.log(x)
        lv = math.log(v)
        ls = _clayton_log_s(theta, lx, lv)
        return math.exp((-theta - 1.0) * lv + (-1.0 / theta - 1.0) * ls)
    if code == GUMBEL:
        llx = math.log(-math.log(x))
        llv = math.log(-math.log(v))
        a1 = theta * llx
        b1 = theta * llv
        m = a1 if a1 > b1 else b1
        lt = m + math.log(math.exp(a1 - m) + math.exp(b1 - m))
        a_big = math.exp(lt / theta)
        return math.exp(-a_big + (theta - 1.0) * llv + (1.0 / theta - 1.0) * lt
                        - math.log(v))
    if code == GAUSS:
        s = math.sqrt(1.0 - theta * theta)
        return _ndtr((_ndtri(x) - theta * _ndtri(v)) / s)
    if code == JOE:
        lp = theta * math.log1p(-x)
        lq = theta * math.log1p(-v)
        ls = _joe_log_s(lp, lq)
        return math.exp((1.0 / theta - 1.0) * ls + (theta - 1.0) * math.log1p(-v)
                        + math.log1p(-math.exp(lp)))
    if code == FGM:
        return x * (1.0 + theta * (1.0 - x) * (1.0 - 2.0 * v))
    if code == AMH:
        dd = 1.0 - theta * (1.0 - x) * (1.0 - v)
        return x * (1.0 - theta * (1.0 - x)) / (dd * dd)
    return math.nan


@njit(cache=True)
def _logpdf_scalar(code, theta, u, v):
    u = _clampu(u)
    v = _clampu(v)
    if code == INDEPENDENCE:
        return 0.0
    if (code == FRANK or code == CLAYTON) and abs(theta) < 1e-6:
        return 0.0
    if code == FRANK:
        a = math.expm1(-theta * u)
        b = math.expm1(-theta * v)
        g = math.expm1(-theta)
        return (math.log(-theta * g) - theta * (u + v)
                - 2.0 * math.log(abs(g + a * b)))
    if code == CLAYTON:
        lu = math.log(u)
        lv = math.log(v)
        ls = _clayton_log_s(theta, lu, lv)
        return (math.log1p(theta) - (1.0 + theta) * (lu + lv)
                - (2.0 + 1.0 / theta) * ls)
    if code == GUMBEL:
        llu = math.log(-math.log(u))
        llv = math.log(-math.log(v))
        a1 = theta * llu
        b1 = theta * llv
        m = a1 if a1 > b1 else b1
        lt = m + math.log(math.exp(a1 - m) + math.exp(b1 - m))
        a_big = math.exp(lt / theta)
        return (-a_big + (theta - 1.0) * (llu + llv) + (1.0 / theta - 2.0) * lt
                + math.log(theta - 1.0 + a_big) - math.log(u) - math.log(v))
    if code == GAUSS:
        s2 = 1.0 - theta * theta
        xx = _ndtri(u)
        yy = _ndtri(v)
        return (-0.5 * math.log(s2)
                - (theta * theta * (xx * xx + yy * yy) - 2.0 * theta * xx * yy)
                / (2.0 * s2))
    if code == JOE:
        lp = theta * math.log1p(-u)
        lq = theta * math.log1p(-v)
        ls = _joe_log_s(lp, lq)
        p = math.exp(lp)
        q = math.exp(lq)
        bracket = (1.0 - 1.0 / theta) * (1.0 - p) * (1.0 - q) + math.exp(ls)
        return (math.log(theta) + (theta - 1.0) * (math.log1p(-u) + math.log1p(-v))
                + (1.0 / theta - 2.0) * ls + math.log(bracket))
    if code == FGM:
        return math.log1p(theta * (1.0 - 2.0 * u) * (1.0 - 2.0 * v))
    if code == AMH:
        dd = 1.0 - theta * (1.0 - u) * (1.0 - v)
        num = ((1.0 - theta + 2.0 * theta * u) * dd
               - 2.0 * theta * (1.0 - v) * u * (1.0 - theta + theta * u))
        return math.log(num) - 3.0 * math.log(dd)
    return math.nan


@njit(cache=True)
def _frank_hinv(theta, pc, v):
    # bisection with the v-dependent factors hoisted out of the loop
    g = math.expm1(-theta)
    b = math.expm1(-theta * v)
    ev = math.exp(-theta * v)
    lo = EPS_UNIT
    hi = 1.0 - EPS_UNIT
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        a = math.expm1(-theta * mid)
        if ev * a / (g + a * b) < pc:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(_NEWTON_ITERS):
        a = math.expm1(-theta * x)
        denom = g + a * b
        fx = ev * a / denom - pc
        dens = -theta * g * (a + 1.0) * ev / (denom * denom)
        if dens > 1e-300:
            x = x - fx / dens
            if x < EPS_UNIT:
                x = EPS_UNIT
            elif x > 1.0 - EPS_UNIT:
                x = 1.0 - EPS_UNIT
    return x


@njit(cache=True)
def _hinv_scalar(code, theta, p, v):
    v = _clampu(v)
    if code == INDEPENDENCE:
        if p < 0.0:
            return 0.0
        if p > 1.0:
            return 1.0
        return p
    if code == GAUSS:
        s = math.sqrt(1.0 - theta * theta)
        pc = _clampu(p)
        return _ndtr(s * _ndtri(pc) + theta * _ndtri(v))
    pc = _clampu(p)
    if code == FRANK:
        return _frank_hinv(theta, pc, v)
    lo = EPS_UNIT
    hi = 1.0 - EPS_UNIT
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if _h_scalar(code, theta, mid, v) < pc:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(_NEWTON_ITERS):
        fx = _h_scalar(code, theta, x, v) - pc
        dens = math.exp(_logpdf_scalar(code, theta, x, v))
        if dens > 1e-300:
            x = x - fx / dens
            if x < EPS_UNIT:
                x = EPS_UNIT
            elif x > 1.0 - EPS_UNIT:
                x = 1.0 - EPS_UNIT
    return x


# ---------------------------------------------------------------------------
# Array entry points matching the numpy backend.
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _h_arr(code, theta, x, v, out):
    for i in prange(x.shape[0]):
        out[i] = _h_scalar(code, theta, x[i], v[i])


@njit(cache=True, parallel=True)
def _hinv_arr(code, theta, p, v, out):
    for i in prange(p.shape[0]):
        out[i] = _hinv_scalar(code, theta, p[i], v[i])


@njit(cache=True, parallel=True)
def _logpdf_arr(code, theta, u, v, out):
    for i in prange(u.shape[0]):
        out[i] = _logpdf_scalar(code, theta, u[i], v[i])


def _pair_broadcast(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a, b = np.broadcast_arrays(a, b)
    return np.ascontiguousarray(a), np.ascontiguousarray(b), a.shape


def h_array(code: int, theta: float, x, v):
    x, v, shape = _pair_broadcast(x, v)
    out = np.empty(x.size)
    _h_arr(code, theta, x.ravel(), v.ravel(), out)
    return out.reshape(shape)


def hinv_array(code: int, theta: float, p, v):
    p, v, shape = _pair_broadcast(p, v)
    out = np.empty(p.size)
    _hinv_arr(code, theta, p.ravel(), v.ravel(), out)
    return out.reshape(shape)


def logpdf_array(code: int, theta: float, u, v):
    u, v, shape = _pair_broadcast(u, v)
    out = np.empty(u.size)
    _logpdf_arr(code, theta, u.ravel(), v.ravel(), out)
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# D-vine sampling recursion (one independent scalar recursion per row).
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _dvine_kernel(fams, thetas, n, seed, out):
    d = fams.shape[0] + 1
    for r in prange(n):
        row = np.uint64(r)
        out[r, 0] = _unit_double(seed, row, np.uint64(0))
        if d == 1:
            continue
        w2 = _unit_double(seed, row, np.uint64(1))
        out[r, 1] = _hinv_scalar(fams[0, 0], thetas[0, 0], w2, out[r, 0])
        if d == 2:
            continue
        vprev = np.empty(2 * d, dtype=np.float64)
        vcur = np.empty(2 * d, dtype=np.float64)
        vprev[1] = out[r, 1]
        vprev[2] = _h_scalar(fams[0, 0], thetas[0, 0], out[r, 0], out[r, 1])
        for i in range(3, d + 1):
            cur = _unit_double(seed, row, np.uint64(i - 1))
            for k in range(i - 1, 1, -1):
                cur = _hinv_scalar(fams[k - 1, i - k - 1], thetas[k - 1, i - k - 1],
                                   cur, vprev[2 * k - 2])
            cur = _hinv_scalar(fams[0, i - 2], thetas[0, i - 2], cur, vprev[1])
            out[r, i - 1] = cur
            if i == d:
                break
            vcur[1] = cur
            vcur[2] = _h_scalar(fams[0, i - 2], thetas[0, i - 2], vprev[1], cur)
            vcur[3] = _h_scalar(fams[0, i - 2], thetas[0, i - 2], cur, vprev[1])
            if i > 3:
                for j in range(2, i - 1):
                    fam = fams[j - 1, i - j - 1]
                    th = thetas[j - 1, i - j - 1]
                    vcur[2 * j] = _h_scalar(fam, th, vprev[2 * j - 2], vcur[2 * j - 1])
                    vcur[2 * j + 1] = _h_scalar(fam, th, vcur[2 * j - 1],
                                                vprev[2 * j - 2])
            vcur[2 * i - 2] = _h_scalar(fams[i - 2, 0], thetas[i - 2, 0],
                                        vprev[2 * i - 4], vcur[2 * i - 3])
            for m in range(1, 2 * i - 1):
                vprev[m] = vcur[m]
    return out


def dvine_sample_kernel(fams, thetas, n: int, seed: int):
    d = fams.shape[0] + 1
    out = np.empty((n, d))
    _dvine_kernel(np.ascontiguousarray(fams.astype(np.int64)),
                  np.ascontiguousarray(thetas.astype(np.float64)),
                  n, np.uint64(seed & 0xFFFFFFFFFFFFFFFF), out)
    return out


@njit(cache=True, parallel=True)
def _conditional_pairs(code, theta, n, seed, out):
    for r in prange(n):
        row = np.uint64(r)
        u = _unit_double(seed, row, np.uint64(0))
        w = _unit_double(seed, row, np.uint64(1))
        out[r, 0] = u
        out[r, 1] = _hinv_scalar(code, theta, w, u)


def conditional_pairs_kernel(code: int, theta: float, n: int, seed: int):
    """Draw (u, h^-1(w, u)) pairs, i.e. a sample from the bivariate copula."""
    out = np.empty((n, 2))
    _conditional_pairs(code, theta, n, np.uint64(seed & 0xFFFFFFFFFFFFFFFF), out)
    return out


# ---------------------------------------------------------------------------
# Candidate-evidence accumulation.
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _frank_loglik(thetas, pu, pv, su, sv, out):
    # pu[a, t, i] = expm1(-theta_t * U[a, i]); su[a] = sum_i U[a, i]
    na, nt, ndata = pu.shape
    nb = pv.shape[0]
    for ia in prange(na):
        for t in range(nt):
            th = thetas[t]
            if abs(th) < 1e-6:
                for ib in range(nb):
                    out[ia, ib, t] = 0.0
                continue
            g = math.expm1(-th)
            lead = ndata * math.log(-th * g)
            for ib in range(nb):
                acc = 0.0
                for i in range(ndata):
                    acc += math.log(abs(g + pu[ia, t, i] * pv[ib, t, i]))
                out[ia, ib, t] = lead - th * (su[ia] + sv[ib]) - 2.0 * acc
    return out


@njit(cache=True, parallel=True)
def _clayton_loglik(thetas, pu, pv, slu, slv, out):
    # pu[a, t, i] = U[a, i]^(-theta_t); slu[a] = sum_i log U[a, i]
    na, nt, ndata = pu.shape
    nb = pv.shape[0]
    for ia in prange(na):
        for t in range(nt):
            th = thetas[t]
            if abs(th) < 1e-6:
                for ib in range(nb):
                    out[ia, ib, t] = 0.0
                continue
            lead = ndata * math.log1p(th)
            for ib in range(nb):
                acc = 0.0
                for i in range(ndata):
                    acc += math.log(pu[ia, t, i] + pv[ib, t, i] - 1.0)
                out[ia, ib, t] = (lead - (1.0 + th) * (slu[ia] + slv[ib])
                                  - (2.0 + 1.0 / th) * acc)
    return out


@njit(cache=True, parallel=True)
def _gumbel_loglik(thetas, pu, pv, sllu, sllv, slu, slv, out):
    # pu[a, t, i] = (-log U[a, i])^theta_t; sllu = sum log(-log U); slu = sum log U
    na, nt, ndata = pu.shape
    nb = pv.shape[0]
    for ia in prange(na):
        for t in range(nt):
            th = thetas[t]
            for ib in range(nb):
                acc_a = 0.0
                acc_lt = 0.0
                acc_b = 0.0
                for i in range(ndata):
                    lt = math.log(pu[ia, t, i] + pv[ib, t, i])
                    a_big = math.exp(lt / th)
                    acc_a += a_big
                    acc_lt += lt
                    acc_b += math.log(th - 1.0 + a_big)
                out[ia, ib, t] = (-acc_a + (th - 1.0) * (sllu[ia] + sllv[ib])
                                  + (1.0 / th - 2.0) * acc_lt + acc_b
                                  - slu[ia] - slv[ib])
    return out


@njit(cache=True, parallel=True)
def _generic_loglik(code, thetas, U, V, out):
    na, ndata = U.shape
    nb = V.shape[0]
    nt = thetas.shape[0]
    for ia in prange(na):
        for ib in range(nb):
            for t in range(nt):
                acc = 0.0
                for i in range(ndata):
                    acc += _logpdf_scalar(code, thetas[t], U[ia, i], V[ib, i])
                out[ia, ib, t] = acc
    return out


def loglik_matrix(code: int, thetas, U, V):
    thetas = np.ascontiguousarray(np.asarray(thetas, dtype=np.float64))
    U = np.ascontiguousarray(np.clip(U, EPS_UNIT, 1 - EPS_UNIT))
    V = np.ascontiguousarray(np.clip(V, EPS_UNIT, 1 - EPS_UNIT))
    out = np.empty((U.shape[0], V.shape[0], thetas.shape[0]))
    if code == INDEPENDENCE:
        out[:] = 0.0
        return out
    if code == GAUSS:
        # exact separable algebra: one BLAS product instead of a scalar loop
        from scipy.special import ndtri as _sndtri

        x = _sndtri(U)
        y = _sndtri(V)
        sx2 = np.sum(x * x, axis=1)
        sy2 = np.sum(y * y, axis=1)
        xy = x @ y.T
        ndata = U.shape[1]
        for t in range(thetas.shape[0]):
            rho = thetas[t]
            s2 = 1.0 - rho * rho
            out[:, :, t] = (-0.5 * ndata * np.log(s2)
                            - (rho * rho * (sx2[:, None] + sy2[None, :])
                               - 2.0 * rho * xy) / (2.0 * s2))
        return out
    if code == FRANK:
        pu = np.expm1(-thetas[None, :, None] * U[:, None, :])
        pv = np.expm1(-thetas[None, :, None] * V[:, None, :])
        return _frank_loglik(thetas, pu, pv, U.sum(axis=1), V.sum(axis=1), out)
    if code == CLAYTON:
        lu = np.log(U)
        lv = np.log(V)
        pu = np.exp(-thetas[None, :, None] * lu[:, None, :])
        pv = np.exp(-thetas[None, :, None] * lv[:, None, :])
        return _clayton_loglik(thetas, pu, pv, lu.sum(axis=1), lv.sum(axis=1), out)
    if code == GUMBEL:
        lu = np.log(U)
        lv = np.log(V)
        llu = np.log(-lu)
        llv = np.log(-lv)
        pu = np.exp(thetas[None, :, None] * llu[:, None, :])
        pv = np.exp(thetas[None, :, None] * llv[:, None, :])
        return _gumbel_loglik(thetas, pu, pv, llu.sum(axis=1), llv.sum(axis=1),
                              lu.sum(axis=1), lv.sum(axis=1), out)
    return _generic_loglik(code, thetas, U, V, out)


# ---------------------------------------------------------------------------
# Mindlin quad element kernels.
# ---------------------------------------------------------------------------

_GP = 1.0 / math.sqrt(3.0)


@njit(cache=True, parallel=True)
def _laminate_abd_kernel(theta_hat, tvec, z3w, dm, ds, am, ab, ash):
    ne, nply = theta_hat.shape
    for e in prange(ne):
        for i in range(nply):
            c = math.cos(theta_hat[e, i])
            s = math.sin(theta_hat[e, i])
            c2 = c * c
            s2 = s * s
            cs = c * s
            # strain transformation for [eps_x, eps_y, gamma_xy]
            t00, t01, t02 = c2, s2, cs
            t10, t11, t12 = s2, c2, -cs
            t20, t21, t22 = -2.0 * cs, 2.0 * cs, c2 - s2
            q11, q12, q66 = dm[0, 0], dm[0, 1], dm[2, 2]
            q22 = dm[1, 1]
            # D^T = T^T D T for D = [[q11,q12,0],[q12,q22,0],[0,0,q66]]
            # rows of (D @ T)
            a00 = q11 * t00 + q12 * t10
            a01 = q11 * t01 + q12 * t11
            a02 = q11 * t02 + q12 * t12
            a10 = q12 * t00 + q22 * t10
            a11 = q12 * t01 + q22 * t11
            a12 = q12 * t02 + q22 * t12
            a20 = q66 * t20
            a21 = q66 * t21
            a22 = q66 * t22
            d00 = t00 * a00 + t10 * a10 + t20 * a20
            d01 = t00 * a01 + t10 * a11 + t20 * a21
            d02 = t00 * a02 + t10 * a12 + t20 * a22
            d11 = t01 * a01 + t11 * a11 + t21 * a21
            d12 = t01 * a02 + t11 * a12 + t21 * a22
            d22 = t02 * a02 + t12 * a12 + t22 * a22
            am[e, 0, 0] += tvec[i] * d00
            am[e, 0, 1] += tvec[i] * d01
            am[e, 0, 2] += tvec[i] * d02
            am[e, 1, 0] += tvec[i] * d01
            am[e, 1, 1] += tvec[i] * d11
            am[e, 1, 2] += tvec[i] * d12
            am[e, 2, 0] += tvec[i] * d02
            am[e, 2, 1] += tvec[i] * d12
            am[e, 2, 2] += tvec[i] * d22
            ab[e, 0, 0] += z3w[i] * d00
            ab[e, 0, 1] += z3w[i] * d01
            ab[e, 0, 2] += z3w[i] * d02
            ab[e, 1, 0] += z3w[i] * d01
            ab[e, 1, 1] += z3w[i] * d11
            ab[e, 1, 2] += z3w[i] * d12
            ab[e, 2, 0] += z3w[i] * d02
            ab[e, 2, 1] += z3w[i] * d12
            ab[e, 2, 2] += z3w[i] * d22
            # transverse shear rotation on [gamma_yz, gamma_xz]
            q44 = ds[0, 0]
            q55 = ds[1, 1]
            s00 = q44 * c2 + q55 * s2
            s01 = (q55 - q44) * cs
            s11 = q44 * s2 + q55 * c2
            ash[e, 0, 0] += tvec[i] * s00
            ash[e, 0, 1] += tvec[i] * s01
            ash[e, 1, 0] += tvec[i] * s01
            ash[e, 1, 1] += tvec[i] * s11


def laminate_abd(theta_hat, tvec, z3w, dm, ds):
    """Thickness-integrated membrane/bending/shear material matrices."""
    ne = theta_hat.shape[0]
    am = np.zeros((ne, 3, 3))
    ab = np.zeros((ne, 3, 3))
    ash = np.zeros((ne, 2, 2))
    _laminate_abd_kernel(np.ascontiguousarray(theta_hat),
                         np.ascontiguousarray(tvec), np.ascontiguousarray(z3w),
                         np.ascontiguousarray(dm), np.ascontiguousarray(ds),
                         am, ab, ash)
    return am, ab, ash


@njit(cache=True)
def _quad_geometry(xe, xi, eta, dndx, dndy):
    dxi0 = -0.25 * (1.0 - eta)
    dxi1 = 0.25 * (1.0 - eta)
    dxi2 = 0.25 * (1.0 + eta)
    dxi3 = -0.25 * (1.0 + eta)
    det0 = -0.25 * (1.0 - xi)
    det1 = -0.25 * (1.0 + xi)
    det2 = 0.25 * (1.0 + xi)
    det3 = 0.25 * (1.0 - xi)
    j00 = dxi0 * xe[0, 0] + dxi1 * xe[1, 0] + dxi2 * xe[2, 0] + dxi3 * xe[3, 0]
    j01 = dxi0 * xe[0, 1] + dxi1 * xe[1, 1] + dxi2 * xe[2, 1] + dxi3 * xe[3, 1]
    j10 = det0 * xe[0, 0] + det1 * xe[1, 0] + det2 * xe[2, 0] + det3 * xe[3, 0]
    j11 = det0 * xe[0, 1] + det1 * xe[1, 1] + det2 * xe[2, 1] + det3 * xe[3, 1]
    det = j00 * j11 - j01 * j10
    i00 = j11 / det
    i01 = -j01 / det
    i10 = -j10 / det
    i11 = j00 / det
    dndx[0] = i00 * dxi0 + i01 * det0
    dndx[1] = i00 * dxi1 + i01 * det1
    dndx[2] = i00 * dxi2 + i01 * det2
    dndx[3] = i00 * dxi3 + i01 * det3
    dndy[0] = i10 * dxi0 + i11 * det0
    dndy[1] = i10 * dxi1 + i11 * det1
    dndy[2] = i10 * dxi2 + i11 * det2
    dndy[3] = i10 * dxi3 + i11 * det3
    return det


@njit(cache=True, parallel=True)
def _element_stiffness(xe_all, am_all, ab_all, as_all, ke):
    ne = xe_all.shape[0]
    gps = np.array([[-_GP, -_GP], [_GP, -_GP], [_GP, _GP], [-_GP, _GP]])
    idx_m = np.array([0, 1, 5, 6, 10, 11, 15, 16])
    idx_b = np.array([3, 4, 8, 9, 13, 14, 18, 19])
    idx_s = np.array([2, 3, 4, 7, 8, 9, 12, 13, 14, 17, 18, 19])
    for e in prange(ne):
        xe = xe_all[e]
        am = am_all[e]
        ab = ab_all[e]
        ash = as_all[e]
        dndx = np.empty(4)
        dndy = np.empty(4)
        bm = np.zeros((3, 8))
        bs = np.zeros((2, 12))
        tmp3 = np.empty((3, 8))
        tmp2 = np.empty((2, 12))
        for g in range(4):
            det = _quad_geometry(xe, gps[g, 0], gps[g, 1], dndx, dndy)
            for a in range(4):
                bm[0, 2 * a] = dndx[a]
                bm[1, 2 * a + 1] = dndy[a]
                bm[2, 2 * a] = dndy[a]
                bm[2, 2 * a + 1] = dndx[a]
            # membrane then bending share the same strain operator
            for r in range(3):
                for cidx in range(8):
                    tmp3[r, cidx] = (am[r, 0] * bm[0, cidx] + am[r, 1] * bm[1, cidx]
                                     + am[r, 2] * bm[2, cidx])
            for r in range(8):
                for cidx in range(8):
                    acc = (bm[0, r] * tmp3[0, cidx] + bm[1, r] * tmp3[1, cidx]
                           + bm[2, r] * tmp3[2, cidx])
                    ke[e, idx_m[r], idx_m[cidx]] += acc * det
            for r in range(3):
                for cidx in range(8):
                    tmp3[r, cidx] = (ab[r, 0] * bm[0, cidx] + ab[r, 1] * bm[1, cidx]
                                     + ab[r, 2] * bm[2, cidx])
            for r in range(8):
                for cidx in range(8):
                    acc = (bm[0, r] * tmp3[0, cidx] + bm[1, r] * tmp3[1, cidx]
                           + bm[2, r] * tmp3[2, cidx])
                    ke[e, idx_b[r], idx_b[cidx]] += acc * det
        det = _quad_geometry(xe, 0.0, 0.0, dndx, dndy)
        for a in range(4):
            bs[0, 3 * a] = dndy[a]
            bs[0, 3 * a + 2] = 0.25
            bs[1, 3 * a] = dndx[a]
            bs[1, 3 * a + 1] = 0.25
        for r in range(2):
            for cidx in range(12):
                tmp2[r, cidx] = ash[r, 0] * bs[0, cidx] + ash[r, 1] * bs[1, cidx]
        w = 4.0 * det
        for r in range(12):
            for cidx in range(12):
                acc = bs[0, r] * tmp2[0, cidx] + bs[1, r] * tmp2[1, cidx]
                ke[e, idx_s[r], idx_s[cidx]] += acc * w
    return ke


def element_stiffness_batch(xe, am, ab, ash):
    """Element stiffness matrices for a batch of 4-node Mindlin quads."""
    ne = xe.shape[0]
    ke = np.zeros((ne, 20, 20))
    _element_stiffness(np.ascontiguousarray(xe), np.ascontiguousarray(am),
                       np.ascontiguousarray(ab), np.ascontiguousarray(ash), ke)
    return ke
