"""Joint Bayesian scoring of (marginal, copula, marginal) candidates.

Each candidate is scored in one step by the uniform-prior evidence integral

    w = (1 / (N * L(box1) * L(box2) * L(box_theta)))
        * Int prod_i c(F1(x1i|b1), F2(x2i|b2) | th) f1(x1i|b1) f2(x2i|b2)
          db1 db2 dth

evaluated with a tensor-product Gauss-Legendre rule (15 nodes per parameter
coordinate) over data-driven boxes.  All products are accumulated as sums of
logs with a max shift, so 500-term likelihoods cannot underflow; evidences are
carried in log space and normalized at the end.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp
from scipy.stats import kendalltau

from .backend import kernels
from .copulas import BivariateCopula, tau_range, theta_from_tau
from .errors import ConfigError, SelectionError
from .families import CopulaFamily, MarginalFamily
from .marginals import MarginalModel, ParameterBox, _cdf, _logpdf, data_supported, fit_box

__all__ = [
    "CandidateModel",
    "CandidatePool",
    "SelectionResult",
    "build_pool",
    "candidate_evidence",
    "candidate_log_evidence",
    "select",
    "generate_pairs",
    "read_pairs_csv",
]

GL_NODES = 15


@dataclass(frozen=True)
class CandidateModel:
    """Ordered (marginal, copula, marginal) triple with parameter boxes.

    ``box1``/``box2``/``box_theta`` are None when the data lies outside the
    support of a marginal family; such candidates carry zero evidence.
    """

    m1: MarginalFamily
    cop: CopulaFamily
    m2: MarginalFamily
    box1: ParameterBox | None
    box2: ParameterBox | None
    box_theta: ParameterBox | None

    @property
    def supported(self) -> bool:
        return self.box1 is not None and self.box2 is not None \
            and self.box_theta is not None

    @property
    def name(self) -> str:
        return f"{self.m1.name.capitalize()}-{self.cop.name.capitalize()}-" \
               f"{self.m2.name.capitalize()}"


@dataclass(frozen=True)
class CandidatePool:
    candidates: tuple[CandidateModel, ...]

    def __len__(self) -> int:
        return len(self.candidates)


@dataclass(frozen=True)
class SelectionResult:
    weights: np.ndarray
    best: int
    names: tuple[str, ...]
    posterior_means: tuple[dict, ...]
    log_evidences: np.ndarray = field(repr=False)
    tie: bool = False
    flags: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "best": int(self.best),
            "best_name": self.names[self.best],
            "tie": self.tie,
            "candidates": [
                {
                    "name": self.names[i],
                    "weight": float(self.weights[i]),
                    "log_evidence": float(self.log_evidences[i]),
                    "posterior_mean": self.posterior_means[i],
                    "flag": self.flags[i] if self.flags else "",
                }
                for i in range(len(self.names))
            ],
        }


def _theta_box(cop: CopulaFamily, tau_hat: float, n: int) -> ParameterBox:
    """Map a +-3 SE Kendall-tau interval through theta(tau)."""
    lo_t, hi_t = tau_range(cop)
    se = math.sqrt(2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0)))
    t_lo = tau_hat - 3.0 * se
    t_hi = tau_hat + 3.0 * se
    span = hi_t - lo_t
    pad = max(0.02 * span, 1e-3)
    # clamp into the attainable range, keeping a nonempty sliver at the edge
    t_lo = min(max(t_lo, lo_t + 1e-9), hi_t - pad)
    t_hi = max(min(t_hi, hi_t - 1e-9), lo_t + pad)
    if t_hi - t_lo < 1e-6:
        mid = 0.5 * (t_lo + t_hi)
        t_lo, t_hi = mid - 5e-7, mid + 5e-7
    th_lo = theta_from_tau(cop, t_lo)
    th_hi = theta_from_tau(cop, t_hi)
    if th_lo > th_hi:
        th_lo, th_hi = th_hi, th_lo
    if th_hi - th_lo < 1e-9:
        th_hi = th_lo + max(1e-9, 1e-6 * abs(th_lo))
    return ParameterBox((th_lo,), (th_hi,))


def build_pool(marginals, copulas, data, *, allow_equal_marginals: bool = False,
               widen: float = 3.0) -> CandidatePool:
    """Enumerate candidates with data-driven parameter boxes.

    In the strict mode the marginal pairs are the ordered distinct ones, so
    the pool holds exactly n*(n-1)*m candidates; ``allow_equal_marginals``
    additionally includes the n equal pairs.
    """
    marginals = list(marginals)
    copulas = list(copulas)
    if len(marginals) < 2 or len(set(marginals)) != len(marginals):
        raise ConfigError("need >= 2 distinct marginal families")
    if not copulas:
        raise ConfigError("need >= 1 copula family")
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 10:
        raise ConfigError("data must be a (n >= 10, 2) paired-sample matrix")
    x1 = data[:, 0]
    x2 = data[:, 1]
    n = data.shape[0]
    tau_hat = float(kendalltau(x1, x2).statistic)

    box_cache: dict[tuple, ParameterBox | None] = {}

    def marg_box(fam: MarginalFamily, col: int) -> ParameterBox | None:
        key = (fam, col)
        if key not in box_cache:
            x = x1 if col == 0 else x2
            if not data_supported(fam, x):
                box_cache[key] = None
            else:
                box_cache[key] = fit_box(fam, x, widen=widen)[1]
        return box_cache[key]

    theta_boxes = {cop: _theta_box(cop, tau_hat, n) for cop in copulas}

    pairs = [(a, b) for a in marginals for b in marginals if a != b]
    if allow_equal_marginals:
        pairs += [(a, a) for a in marginals]
    cands = []
    for m1, m2 in pairs:
        for cop in copulas:
            b1 = marg_box(m1, 0)
            b2 = marg_box(m2, 1)
            cands.append(CandidateModel(m1, cop, m2, b1, b2,
                                        theta_boxes[cop] if b1 and b2 else None))
    return CandidatePool(tuple(cands))


def _gl_nodes(box: ParameterBox, nodes: int):
    """Tensor-product Gauss-Legendre nodes, log-weights and coordinates."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    coords = []
    logws = []
    for lo, hi in zip(box.lows, box.highs):
        half = 0.5 * (hi - lo)
        coords.append(0.5 * (lo + hi) + half * x)
        logws.append(np.log(w * half))
    if box.ndim == 1:
        return coords[0][:, None], logws[0]
    g = np.meshgrid(*coords, indexing="ij")
    params = np.stack([a.ravel() for a in g], axis=1)
    lw = logws[0][:, None] + logws[1][None, :]
    return params, lw.ravel()


def _marginal_grid(fam: MarginalFamily, box: ParameterBox, x: np.ndarray,
                   nodes: int):
    """CDF matrix, per-node log-likelihood sums and node bookkeeping."""
    params, logw = _gl_nodes(box, nodes)
    na = params.shape[0]
    u = np.empty((na, x.size))
    slog = np.empty(na)
    for a in range(na):
        beta = (params[a, 0], params[a, 1])
        u[a] = _cdf(fam, beta, x)
        slog[a] = float(np.sum(_logpdf(fam, beta, x)))
    return params, logw, u, slog


def candidate_log_evidence(cand: CandidateModel, data, n_pool: int,
                           nodes: int = GL_NODES):
    """Log of Eq.-style evidence w plus posterior-mean parameters and a flag."""
    if not cand.supported:
        return -math.inf, {}, "unsupported-marginal-support"
    data = np.asarray(data, dtype=np.float64)
    x1 = data[:, 0]
    x2 = data[:, 1]
    p1, lw1, u_grid, slog1 = _marginal_grid(cand.m1, cand.box1, x1, nodes)
    p2, lw2, v_grid, slog2 = _marginal_grid(cand.m2, cand.box2, x2, nodes)
    tgrid, lwt = _gl_nodes(cand.box_theta, nodes)
    thetas = tgrid[:, 0]
    mmat = kernels.loglik_matrix(cand.cop.code, thetas, u_grid, v_grid)
    lse = (mmat
           + (slog1 + lw1)[:, None, None]
           + (slog2 + lw2)[None, :, None]
           + lwt[None, None, :])
    shift = float(np.max(lse))
    if not math.isfinite(shift):
        return -math.inf, {}, "all-zero-integrand"
    ez = np.exp(lse - shift)
    z = float(ez.sum())
    log_norm = -(math.log(n_pool) + math.log(cand.box1.measure())
                 + math.log(cand.box2.measure())
                 + math.log(cand.box_theta.measure()))
    log_w = shift + math.log(z) + log_norm
    post = {
        "beta1": [float(np.sum(ez.sum(axis=(1, 2)) * p1[:, k]) / z) for k in range(2)],
        "beta2": [float(np.sum(ez.sum(axis=(0, 2)) * p2[:, k]) / z) for k in range(2)],
        "theta": float(np.sum(ez.sum(axis=(0, 1)) * thetas) / z),
    }
    return log_w, post, ""


def candidate_evidence(cand: CandidateModel, data, n_pool: int,
                       nodes: int = GL_NODES) -> float:
    """Linear-space evidence; exact 0 (with the flag logged) on underflow."""
    log_w, _, _ = candidate_log_evidence(cand, data, n_pool, nodes)
    return math.exp(log_w) if math.isfinite(log_w) else 0.0


def select(pool: CandidatePool, data, nodes: int = GL_NODES) -> SelectionResult:
    """Normalized candidate weights; best = argmax, ties to the lowest index."""
    if len(pool) == 0:
        raise ConfigError("empty candidate pool")
    n_pool = len(pool)
    logs = np.full(n_pool, -np.inf)
    posts = []
    flags = []
    for i, cand in enumerate(pool.candidates):
        lw, post, flag = candidate_log_evidence(cand, data, n_pool, nodes)
        logs[i] = lw
        posts.append(post)
        flags.append(flag)
    if not np.any(np.isfinite(logs)):
        raise SelectionError(
            "every candidate evidence underflowed to zero; widen the parameter boxes")
    total = logsumexp(logs)
    weights = np.exp(logs - total)
    best = int(np.argmax(weights))
    tie = bool(np.sum(np.isclose(weights, weights[best], rtol=1e-9, atol=0)) > 1)
    return SelectionResult(
        weights=weights,
        best=best,
        names=tuple(c.name for c in pool.candidates),
        posterior_means=tuple(posts),
        log_evidences=logs,
        tie=tie,
        flags=tuple(flags),
    )


# ---------------------------------------------------------------------------
# synthetic pairs and CSV I/O
# ---------------------------------------------------------------------------


def generate_pairs(m1: MarginalModel, copula: BivariateCopula, m2: MarginalModel,
                   n: int, seed: int) -> np.ndarray:
    """Sample paired observations with the given marginals and dependence."""
    uv = kernels.conditional_pairs_kernel(copula._code, copula.theta, int(n),
                                          int(seed))
    out = np.empty_like(uv)
    out[:, 0] = m1.quantile(np.clip(uv[:, 0], 1e-12, 1 - 1e-12))
    out[:, 1] = m2.quantile(np.clip(uv[:, 1], 1e-12, 1 - 1e-12))
    return out


def read_pairs_csv(path) -> np.ndarray:
    """Two-column CSV with a header row; raises ConfigError with line numbers."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        if len(header) < 2:
            raise ConfigError(f"{path}: line 1: expected two columns")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ConfigError(f"{path}: line {lineno}: expected two columns")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                raise ConfigError(
                    f"{path}: line {lineno}: non-numeric value {row!r}") from None
    if len(rows) < 10:
        raise ConfigError(f"{path}: need at least 10 numeric pairs, got {len(rows)}")
    return np.asarray(rows, dtype=np.float64)
