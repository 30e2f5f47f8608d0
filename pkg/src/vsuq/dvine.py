"""D-vine pair-copula construction and simulation.

A :class:`DVineSpec` holds the triangular array of pair copulas indexed by
(tree j = 1..d-1, edge i = 1..d-j); tree-1 edges couple adjacent coordinates
(i, i+1), deeper trees couple (i, i+j) conditionally.  Sampling follows the
standard recursion for path vines: each output coordinate is obtained from
independent uniforms by chained inverse h-functions, conditional CDFs are
propagated with forward h-functions.  Uniform draws come from a counter-based
generator keyed by (seed, sample index, coordinate), so batches are
reproducible for any worker-thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backend import kernels
from .copulas import BivariateCopula, theta_from_tau
from .errors import ConfigError, ConvergenceError
from .families import CopulaFamily
from .marginals import MarginalModel

__all__ = ["DVineSpec", "VineSampleBatch", "spec_from_taus", "sample",
           "push_to_marginals", "empirical_kendall_tau"]


@dataclass(frozen=True)
class DVineSpec:
    """Dimension d plus pair copulas for every (tree, edge) of the vine."""

    d: int
    pairs: tuple[tuple[BivariateCopula, ...], ...]

    def __post_init__(self):
        if self.d < 2:
            raise ConfigError("vine dimension must be >= 2")
        if len(self.pairs) != self.d - 1:
            raise ConfigError(f"expected {self.d - 1} trees, got {len(self.pairs)}")
        for j, tree in enumerate(self.pairs, start=1):
            if len(tree) != self.d - j:
                raise ConfigError(
                    f"tree {j} must have {self.d - j} edges, got {len(tree)}")

    @property
    def n_edges(self) -> int:
        return self.d * (self.d - 1) // 2

    def edge(self, tree: int, i: int) -> BivariateCopula:
        """Copula of edge i in tree `tree` (both 1-based)."""
        return self.pairs[tree - 1][i - 1]

    def _arrays(self):
        dm1 = self.d - 1
        fams = np.zeros((dm1, dm1), dtype=np.int64)
        thetas = np.zeros((dm1, dm1), dtype=np.float64)
        for j, tree in enumerate(self.pairs):
            for i, cop in enumerate(tree):
                fams[j, i] = cop._code
                thetas[j, i] = cop.theta
        return fams, thetas


@dataclass(frozen=True)
class VineSampleBatch:
    """Matrix of dependent uniforms plus the seed that generated it."""

    values: np.ndarray
    seed: int
    spec: DVineSpec = field(repr=False, default=None)

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise ConfigError("batch values must be a 2-D matrix")
        bad = ~np.isfinite(v) | (v < 0.0) | (v > 1.0)
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            raise ConvergenceError(
                f"vine recursion produced an invalid value at sample {int(i)}, "
                f"coordinate {int(j)}: {v[i, j]!r}")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    def to_csv(self, path) -> None:
        header = ",".join(f"dim{j + 1}" for j in range(self.dimension))
        _write_float_csv(path, header, self.values)


def _write_float_csv(path, header, matrix):
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in np.atleast_2d(matrix):
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def spec_from_taus(d: int, tree1_taus, deep_tau: float,
                   family: CopulaFamily) -> DVineSpec:
    """Build a vine whose tree-1 edges hit given Kendall taus.

    Edge (i, i+1) of tree 1 receives theta_from_tau(tree1_taus[i]); every edge
    of trees >= 2 receives theta_from_tau(deep_tau).  A tau of zero yields an
    independence edge.
    """
    tree1_taus = [float(t) for t in tree1_taus]
    if len(tree1_taus) != d - 1:
        raise ConfigError(f"need {d - 1} tree-1 taus for dimension {d}")

    def edge_for(tau: float) -> BivariateCopula:
        if abs(tau) < 1e-12:
            return BivariateCopula(CopulaFamily.INDEPENDENCE, 0.0)
        return BivariateCopula(family, theta_from_tau(family, tau))

    trees = [tuple(edge_for(t) for t in tree1_taus)]
    for j in range(2, d):
        trees.append(tuple(edge_for(deep_tau) for _ in range(d - j)))
    return DVineSpec(d, tuple(trees))


def sample(spec: DVineSpec, n_samples: int, seed: int) -> VineSampleBatch:
    """Draw dependent uniform vectors from the vine (deterministic per seed)."""
    if n_samples < 1:
        raise ConfigError("n_samples must be >= 1")
    fams, thetas = spec._arrays()
    values = kernels.dvine_sample_kernel(fams, thetas, int(n_samples), int(seed))
    return VineSampleBatch(values=values, seed=int(seed), spec=spec)


def push_to_marginals(batch: VineSampleBatch, m: MarginalModel) -> np.ndarray:
    """Apply the marginal quantile elementwise.

    Strictly monotone maps leave rank statistics (Kendall's tau) unchanged.
    """
    return m.quantile(batch.values)


def empirical_kendall_tau(x, y) -> float:
    """Sample Kendall tau via the O(n log n) concordance count."""
    from scipy.stats import kendalltau

    return float(kendalltau(np.asarray(x), np.asarray(y)).statistic)
