"""Pure-numpy kernel backend.

Vectorized twins of the numba kernels in ``_kernels_numba``: identical
signatures and semantics, selected when the ``VSUQ_NUMBA`` environment flag
disables JIT or numba is unavailable.  All copula evaluations clamp their
unit-interval arguments to [EPS_UNIT, 1 - EPS_UNIT] so corner singularities
never emit NaN inside the vine recursion.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr, ndtri

from .families import AMH, CLAYTON, FGM, FRANK, GAUSS, GUMBEL, INDEPENDENCE, JOE

IS_JIT = False

EPS_UNIT = 1e-12
_BISECT_ITERS = 45
_NEWTON_ITERS = 2

# ---------------------------------------------------------------------------
# Counter-based RNG: a splitmix64-style finalizer hashed over (seed, row, col)
# so any entry of a sample batch is computable independently of the others.
# ---------------------------------------------------------------------------

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_SEED_TWEAK = _U64(0x243F6A8885A308D3)


def _mix64(z):
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    return z ^ (z >> _U64(31))


def uniform_stream(seed: int, rows, cols):
    """Uniform (0,1) doubles keyed by (seed, row index, column index)."""
    rows = np.asarray(rows, dtype=np.uint64)
    cols = np.asarray(cols, dtype=np.uint64)
    with np.errstate(over="ignore"):
        s0 = _mix64(_U64(seed & 0xFFFFFFFFFFFFFFFF) ^ _SEED_TWEAK)
        z = _mix64(s0 + _GOLDEN * (rows + _U64(1)))
        z = _mix64(z + _GOLDEN * (cols + _U64(1)))
    return ((z >> _U64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


# ---------------------------------------------------------------------------
# Copula h-functions, inverse h-functions and log-densities by family code.
# h(x, v) = dC(x, v)/dv, the CDF of x conditional on v.
# ---------------------------------------------------------------------------


def _clamp(a):
    return np.clip(np.asarray(a, dtype=np.float64), EPS_UNIT, 1.0 - EPS_UNIT)


def h_array(code: int, theta: float, x, v):
    x_raw = np.asarray(x, dtype=np.float64)
    x = _clamp(x)
    v = _clamp(v)
    if code == INDEPENDENCE:
        return np.clip(x_raw, 0.0, 1.0)
    out = _h_core(code, theta, x, v)
    # exact boundary conditional probabilities, clamp-free
    return np.where(x_raw <= 0.0, 0.0, np.where(x_raw >= 1.0, 1.0, out))


def _h_core(code: int, theta: float, x, v):
    if code == FRANK:
        a = np.expm1(-theta * x)
        b = np.expm1(-theta * v)
        g = np.expm1(-theta)
        return np.exp(-theta * v) * a / (g + a * b)
    if code == INDEPENDENCE:
        return x
    if code == CLAYTON:
        lx = np.log(x)
        lv = np.log(v)
        ls = _clayton_log_s(theta, lx, lv)
        return np.exp((-theta - 1.0) * lv + (-1.0 / theta - 1.0) * ls)
    if code == GUMBEL:
        llx = np.log(-np.log(x))
        llv = np.log(-np.log(v))
        lt = np.logaddexp(theta * llx, theta * llv)
        a_big = np.exp(lt / theta)
        return np.exp(-a_big + (theta - 1.0) * llv + (1.0 / theta - 1.0) * lt - np.log(v))
    if code == GAUSS:
        s = np.sqrt(1.0 - theta * theta)
        return ndtr((ndtri(x) - theta * ndtri(v)) / s)
    if code == JOE:
        lp = theta * np.log1p(-x)
        lq = theta * np.log1p(-v)
        ls = _joe_log_s(lp, lq)
        return np.exp((1.0 / theta - 1.0) * ls + (theta - 1.0) * np.log1p(-v)
                      + np.log1p(-np.exp(lp)))
    if code == FGM:
        return x * (1.0 + theta * (1.0 - x) * (1.0 - 2.0 * v))
    if code == AMH:
        dd = 1.0 - theta * (1.0 - x) * (1.0 - v)
        return x * (1.0 - theta * (1.0 - x)) / (dd * dd)
    raise ValueError(f"unknown copula code {code}")


def logpdf_array(code: int, theta: float, u, v):
    u = _clamp(u)
    v = _clamp(v)
    if code == INDEPENDENCE or (code in (FRANK, CLAYTON) and abs(theta) < 1e-6):
        return np.zeros(np.broadcast(u, v).shape)
    if code == FRANK:
        a = np.expm1(-theta * u)
        b = np.expm1(-theta * v)
        g = np.expm1(-theta)
        return (np.log(-theta * g) - theta * (u + v)
                - 2.0 * np.log(np.abs(g + a * b)))
    if code == CLAYTON:
        lu = np.log(u)
        lv = np.log(v)
        ls = _clayton_log_s(theta, lu, lv)
        return (np.log1p(theta) - (1.0 + theta) * (lu + lv)
                - (2.0 + 1.0 / theta) * ls)
    if code == GUMBEL:
        llu = np.log(-np.log(u))
        llv = np.log(-np.log(v))
        lt = np.logaddexp(theta * llu, theta * llv)
        a_big = np.exp(lt / theta)
        return (-a_big + (theta - 1.0) * (llu + llv) + (1.0 / theta - 2.0) * lt
                + np.log(theta - 1.0 + a_big) - np.log(u) - np.log(v))
    if code == GAUSS:
        s2 = 1.0 - theta * theta
        xx = ndtri(u)
        yy = ndtri(v)
        return (-0.5 * np.log(s2)
                - (theta * theta * (xx * xx + yy * yy) - 2.0 * theta * xx * yy)
                / (2.0 * s2))
    if code == JOE:
        lp = theta * np.log1p(-u)
        lq = theta * np.log1p(-v)
        ls = _joe_log_s(lp, lq)
        p = np.exp(lp)
        q = np.exp(lq)
        bracket = (1.0 - 1.0 / theta) * (1.0 - p) * (1.0 - q) + np.exp(ls)
        return (np.log(theta) + (theta - 1.0) * (np.log1p(-u) + np.log1p(-v))
                + (1.0 / theta - 2.0) * ls + np.log(bracket))
    if code == FGM:
        return np.log1p(theta * (1.0 - 2.0 * u) * (1.0 - 2.0 * v))
    if code == AMH:
        dd = 1.0 - theta * (1.0 - u) * (1.0 - v)
        num = ((1.0 - theta + 2.0 * theta * u) * dd
               - 2.0 * theta * (1.0 - v) * u * (1.0 - theta + theta * u))
        return np.log(num) - 3.0 * np.log(dd)
    raise ValueError(f"unknown copula code {code}")


def _clayton_log_s(theta, lu, lv):
    # log(u^-theta + v^-theta - 1) without overflow for strongly negative logs
    a = -theta * lu
    b = -theta * lv
    m = np.maximum(a, b)
    return m + np.log(np.exp(a - m) + np.exp(b - m) - np.exp(-m))


def _joe_log_s(lp, lq):
    # log(p + q - p*q) with p = exp(lp), q = exp(lq)
    return np.logaddexp(lp, lq + np.log1p(-np.exp(lp)))


def hinv_array(code: int, theta: float, p, v):
    """Solve h(x, v) = p for x: bisection to width ~1e-12 plus Newton polish."""
    p = np.asarray(p, dtype=np.float64)
    v = _clamp(v)
    if code == INDEPENDENCE:
        return np.clip(p, 0.0, 1.0)
    if code == GAUSS:
        # analytic inverse: x = Phi(sqrt(1-rho^2) * Phi^-1(p) + rho * Phi^-1(v))
        s = np.sqrt(1.0 - theta * theta)
        pc = np.clip(p, EPS_UNIT, 1.0 - EPS_UNIT)
        return ndtr(s * ndtri(pc) + theta * ndtri(v))
    pc = np.clip(p, EPS_UNIT, 1.0 - EPS_UNIT)
    lo = np.full(np.broadcast(pc, v).shape, EPS_UNIT)
    hi = np.full_like(lo, 1.0 - EPS_UNIT)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        below = _h_core(code, theta, mid, v) < pc
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(_NEWTON_ITERS):
        fx = _h_core(code, theta, x, v) - pc
        dens = np.exp(logpdf_array(code, theta, x, v))
        step = np.where(dens > 1e-300, fx / np.maximum(dens, 1e-300), 0.0)
        x = np.clip(x - step, EPS_UNIT, 1.0 - EPS_UNIT)
    return x


# ---------------------------------------------------------------------------
# D-vine sampling recursion, vectorized across sample rows.
# fams/thetas are (d-1, d-1) arrays indexed [tree-1, edge-1].
# ---------------------------------------------------------------------------


def dvine_sample_kernel(fams, thetas, n: int, seed: int):
    d = fams.shape[0] + 1
    rows = np.arange(n, dtype=np.uint64)
    x = np.empty((n, d))
    x[:, 0] = uniform_stream(seed, rows, np.uint64(0))
    if d == 1:
        return x
    w2 = uniform_stream(seed, rows, np.uint64(1))
    x[:, 1] = hinv_array(int(fams[0, 0]), float(thetas[0, 0]), w2, x[:, 0])
    if d == 2:
        return x
    # v arrays indexed 1..2i-2 per the standard recursion; index 0 unused
    vprev = [None] * (2 * d)
    vprev[1] = x[:, 1].copy()
    vprev[2] = h_array(int(fams[0, 0]), float(thetas[0, 0]), x[:, 0], x[:, 1])
    for i in range(3, d + 1):
        cur = uniform_stream(seed, rows, np.uint64(i - 1))
        for k in range(i - 1, 1, -1):
            cur = hinv_array(int(fams[k - 1, i - k - 1]),
                             float(thetas[k - 1, i - k - 1]), cur, vprev[2 * k - 2])
        cur = hinv_array(int(fams[0, i - 2]), float(thetas[0, i - 2]), cur, vprev[1])
        x[:, i - 1] = cur
        if i == d:
            break
        vcur = [None] * (2 * d)
        vcur[1] = cur
        vcur[2] = h_array(int(fams[0, i - 2]), float(thetas[0, i - 2]), vprev[1], cur)
        vcur[3] = h_array(int(fams[0, i - 2]), float(thetas[0, i - 2]), cur, vprev[1])
        if i > 3:
            for j in range(2, i - 1):
                fam = int(fams[j - 1, i - j - 1])
                th = float(thetas[j - 1, i - j - 1])
                vcur[2 * j] = h_array(fam, th, vprev[2 * j - 2], vcur[2 * j - 1])
                vcur[2 * j + 1] = h_array(fam, th, vcur[2 * j - 1], vprev[2 * j - 2])
        vcur[2 * i - 2] = h_array(int(fams[i - 2, 0]), float(thetas[i - 2, 0]),
                                  vprev[2 * i - 4], vcur[2 * i - 3])
        vprev = vcur
    return x


def conditional_pairs_kernel(code: int, theta: float, n: int, seed: int):
    """Draw (u, h^-1(w, u)) pairs, i.e. a sample from the bivariate copula."""
    rows = np.arange(n, dtype=np.uint64)
    u = uniform_stream(seed, rows, np.uint64(0))
    w = uniform_stream(seed, rows, np.uint64(1))
    out = np.empty((n, 2))
    out[:, 0] = u
    out[:, 1] = hinv_array(code, theta, w, u)
    return out


# ---------------------------------------------------------------------------
# Candidate-evidence accumulation: M[a, b, t] = sum_i log c(U[a,i], V[b,i]; theta_t)
# ---------------------------------------------------------------------------


def loglik_matrix(code: int, thetas, U, V):
    thetas = np.asarray(thetas, dtype=np.float64)
    U = _clamp(U)
    V = _clamp(V)
    na = U.shape[0]
    nb = V.shape[0]
    nt = thetas.shape[0]
    out = np.empty((na, nb, nt))
    if code == INDEPENDENCE:
        out[:] = 0.0
        return out
    if code == GAUSS:
        x = ndtri(U)
        y = ndtri(V)
        sx2 = np.sum(x * x, axis=1)
        sy2 = np.sum(y * y, axis=1)
        xy = x @ y.T
        ndata = U.shape[1]
        for t in range(nt):
            rho = thetas[t]
            s2 = 1.0 - rho * rho
            out[:, :, t] = (-0.5 * ndata * np.log(s2)
                            - (rho * rho * (sx2[:, None] + sy2[None, :])
                               - 2.0 * rho * xy) / (2.0 * s2))
        return out
    if code == FRANK:
        su = np.sum(U, axis=1)
        sv = np.sum(V, axis=1)
        ndata = U.shape[1]
        for t in range(nt):
            th = thetas[t]
            if abs(th) < 1e-6:
                out[:, :, t] = 0.0
                continue
            g = np.expm1(-th)
            a = np.expm1(-th * U)
            b = np.expm1(-th * V)
            const = ndata * np.log(-th * g) - th * (su[:, None] + sv[None, :])
            for ia in range(na):
                out[ia, :, t] = const[ia] - 2.0 * np.sum(
                    np.log(np.abs(g + a[ia][None, :] * b)), axis=1)
        return out
    for t in range(nt):
        th = thetas[t]
        for ia in range(na):
            out[ia, :, t] = np.sum(logpdf_array(code, th, U[ia][None, :], V), axis=1)
    return out


# ---------------------------------------------------------------------------
# Mindlin plate element stiffness (5 DOF/node bilinear quad, 2x2 membrane and
# bending integration, single-point shear integration).
# ---------------------------------------------------------------------------

_GP = 1.0 / np.sqrt(3.0)
_GAUSS_PTS = np.array([[-_GP, -_GP], [_GP, -_GP], [_GP, _GP], [-_GP, _GP]])
_IDX_M = np.array([0, 1, 5, 6, 10, 11, 15, 16])
_IDX_B = np.array([3, 4, 8, 9, 13, 14, 18, 19])
_IDX_S = np.array([2, 3, 4, 7, 8, 9, 12, 13, 14, 17, 18, 19])


def _shape_derivs(xi, eta):
    dxi = 0.25 * np.array([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)])
    deta = 0.25 * np.array([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)])
    return dxi, deta


def _shape(xi, eta):
    return 0.25 * np.array([(1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
                            (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)])


def plane_rotation_3(c, s):
    """Strain transformation for [eps_x, eps_y, gamma_xy] (engineering shear)."""
    c = np.asarray(c, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    z = np.zeros_like(c)
    return np.stack([
        np.stack([c * c, s * s, c * s], axis=-1),
        np.stack([s * s, c * c, -c * s], axis=-1),
        np.stack([-2 * c * s, 2 * c * s, c * c - s * s], axis=-1),
    ], axis=-2) + z[..., None, None]


def shear_rotation_2(c, s):
    """Vector rotation for the transverse shear pair [gamma_yz, gamma_xz]."""
    c = np.asarray(c, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    z = np.zeros_like(c)
    return np.stack([
        np.stack([c, -s], axis=-1),
        np.stack([s, c], axis=-1),
    ], axis=-2) + z[..., None, None]


def laminate_abd(theta_hat, tvec, z3w, dm, ds):
    """Thickness-integrated membrane/bending/shear material matrices.

    theta_hat: (ne, n_ply) material angles; returns (ne,3,3),(ne,3,3),(ne,2,2).
    """
    ne = theta_hat.shape[0]
    am = np.zeros((ne, 3, 3))
    ab = np.zeros((ne, 3, 3))
    ash = np.zeros((ne, 2, 2))
    for i in range(theta_hat.shape[1]):
        c = np.cos(theta_hat[:, i])
        s = np.sin(theta_hat[:, i])
        tm = plane_rotation_3(c, s)
        dbar = np.einsum("eji,jk,ekl->eil", tm, dm, tm)
        am += tvec[i] * dbar
        ab += z3w[i] * dbar
        ts = shear_rotation_2(c, s)
        ash += tvec[i] * np.einsum("eji,jk,ekl->eil", ts, ds, ts)
    return am, ab, ash


def element_stiffness_batch(xe, am, ab, ash):
    """Element stiffness matrices for a batch of 4-node Mindlin quads.

    xe: (ne,4,2) nodal coordinates; am/ab/ash from :func:`laminate_abd`.
    Returns (ne,20,20).
    """
    ne = xe.shape[0]
    ke = np.zeros((ne, 20, 20))
    for xi, eta in _GAUSS_PTS:
        dxi, deta = _shape_derivs(xi, eta)
        jac = np.empty((ne, 2, 2))
        jac[:, 0, 0] = xe[:, :, 0] @ dxi
        jac[:, 0, 1] = xe[:, :, 1] @ dxi
        jac[:, 1, 0] = xe[:, :, 0] @ deta
        jac[:, 1, 1] = xe[:, :, 1] @ deta
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        inv00 = jac[:, 1, 1] / det
        inv01 = -jac[:, 0, 1] / det
        inv10 = -jac[:, 1, 0] / det
        inv11 = jac[:, 0, 0] / det
        dndx = inv00[:, None] * dxi[None, :] + inv01[:, None] * deta[None, :]
        dndy = inv10[:, None] * dxi[None, :] + inv11[:, None] * deta[None, :]
        bm = np.zeros((ne, 3, 8))
        bm[:, 0, 0::2] = dndx
        bm[:, 1, 1::2] = dndy
        bm[:, 2, 0::2] = dndy
        bm[:, 2, 1::2] = dndx
        k8m = np.einsum("eji,ejk,ekl->eil", bm, am, bm) * det[:, None, None]
        k8b = np.einsum("eji,ejk,ekl->eil", bm, ab, bm) * det[:, None, None]
        ke[:, _IDX_M[:, None], _IDX_M[None, :]] += k8m
        ke[:, _IDX_B[:, None], _IDX_B[None, :]] += k8b
    # single-point shear integration (weight 4) to avoid transverse locking
    dxi, deta = _shape_derivs(0.0, 0.0)
    nsh = _shape(0.0, 0.0)
    jac = np.empty((ne, 2, 2))
    jac[:, 0, 0] = xe[:, :, 0] @ dxi
    jac[:, 0, 1] = xe[:, :, 1] @ dxi
    jac[:, 1, 0] = xe[:, :, 0] @ deta
    jac[:, 1, 1] = xe[:, :, 1] @ deta
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    inv00 = jac[:, 1, 1] / det
    inv01 = -jac[:, 0, 1] / det
    inv10 = -jac[:, 1, 0] / det
    inv11 = jac[:, 0, 0] / det
    dndx = inv00[:, None] * dxi[None, :] + inv01[:, None] * deta[None, :]
    dndy = inv10[:, None] * dxi[None, :] + inv11[:, None] * deta[None, :]
    bs = np.zeros((ne, 2, 12))
    bs[:, 0, 0::3] = dndy
    bs[:, 0, 2::3] = nsh[None, :]
    bs[:, 1, 0::3] = dndx
    bs[:, 1, 1::3] = nsh[None, :]
    k12 = np.einsum("eji,ejk,ekl->eil", bs, ash, bs) * (4.0 * det)[:, None, None]
    ke[:, _IDX_S[:, None], _IDX_S[None, :]] += k12
    return ke
