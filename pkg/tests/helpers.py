"""Shared test oracles."""

import numpy as np

from vsuq.copulas import h_function
from vsuq.dvine import sample


def pcc_density_d3(spec, pts):
    """Analytic three-dimensional pair-copula density with uniform margins."""
    c12 = spec.edge(1, 1)
    c23 = spec.edge(1, 2)
    c13 = spec.edge(2, 1)
    x1, x2, x3 = pts[:, 0], pts[:, 1], pts[:, 2]
    dens = c12.density(x1, x2) * c23.density(x2, x3)
    f1 = h_function(c12, x1, x2)
    f3 = h_function(c23, x3, x2)
    return dens * c13.density(f1, f3)


def chi2_per_dof_d3(spec, n_samples, seed, bins=10):
    """Empirical histogram of vine samples vs the analytic density."""
    x = sample(spec, n_samples, seed=seed).values
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _ = np.histogramdd(x, bins=(edges, edges, edges))
    gl_x, gl_w = np.polynomial.legendre.leggauss(3)
    centers = (edges[:-1] + edges[1:]) / 2.0
    half = 0.5 / bins
    nodes = (centers[:, None] + half * gl_x[None, :]).ravel()
    g1, g2, g3 = np.meshgrid(nodes, nodes, nodes, indexing="ij")
    pts = np.stack([g1.ravel(), g2.ravel(), g3.ravel()], axis=1)
    dens = pcc_density_d3(spec, pts).reshape(bins, 3, bins, 3, bins, 3)
    prob = np.einsum("aibjck,i,j,k->abc", dens, gl_w * half, gl_w * half,
                     gl_w * half)
    expected = prob * n_samples
    chi2 = np.sum((counts - expected) ** 2 / np.maximum(expected, 1e-12))
    return chi2 / (bins**3 - 1)
