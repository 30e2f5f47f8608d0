"""Combined-approximations reanalysis: fast approximate re-solves of the
perturbed system (K0 + dK) r = R reusing the factorization of K0.

The reduced basis is the binomial-series recursion r1 = r0,
r_i = -K0^{-1} dK r_{i-1} (one triangular solve each), orthonormalized before
projecting; the small s x s system uses the perturbed matrix K = K0 + dK.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import SolveError
from .fem.model import LaminateModel

__all__ = ["ReanalysisContext", "prepare", "approximate", "evaluate", "basis_study"]

DEFAULT_BASIS_SIZE = 6


@dataclass
class ReanalysisContext:
    """Factorization of the nominal system plus cached nominal matrices."""

    model: LaminateModel
    basis_size: int
    lu: object = field(repr=False)
    r0_free: np.ndarray = field(repr=False)
    r0: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    k0_ff: sp.csc_matrix = field(repr=False)
    k0_data: np.ndarray = field(repr=False)
    factorizations: int = 1
    reuse_count: int = 0
    fallbacks: int = 0
    last_fallback: bool = False


def prepare(model: LaminateModel, basis_size: int = DEFAULT_BASIS_SIZE,
            eps0=0.0) -> ReanalysisContext:
    """Assemble and factorize the nominal stiffness once; store r0 = K0^-1 R."""
    if basis_size < 2:
        raise SolveError("basis size must be >= 2")
    k0_data = model.element_matrices(eps0)
    k0 = model.assemble(element_data=k0_data)
    k0_ff, rhs = model.reduce(k0)
    try:
        lu = splu(k0_ff)
    except RuntimeError as exc:
        raise SolveError(f"nominal factorization failed: {exc}") from None
    r0_free = lu.solve(rhs)
    return ReanalysisContext(
        model=model, basis_size=int(basis_size), lu=lu, r0_free=r0_free,
        r0=model.expand(r0_free), rhs=rhs, k0_ff=k0_ff, k0_data=k0_data,
    )


def _reduce_square(model: LaminateModel, k_full) -> sp.csc_matrix:
    free, _, _ = model.partition()
    return k_full.tocsr()[free][:, free].tocsc()


def approximate(ctx: ReanalysisContext, dk, s: int | None = None) -> np.ndarray:
    """Approximate displacement under the stiffness perturbation dk.

    dk may be a full-size sparse matrix or one already restricted to the free
    DOFs.  No new factorization is performed; if the reduced system is
    singular after rank truncation the call falls back to a full solve and
    flags it.
    """
    s = ctx.basis_size if s is None else int(s)
    ctx.reuse_count += 1
    ctx.last_fallback = False
    nf = ctx.r0_free.size
    dk_ff = dk if dk.shape[0] == nf else _reduce_square(ctx.model, dk)
    basis = np.empty((nf, s))
    basis[:, 0] = ctx.r0_free
    for i in range(1, s):
        basis[:, i] = -ctx.lu.solve(dk_ff @ basis[:, i - 1])
    # orthonormalize (the raw binomial vectors go collinear quickly)
    q, rr = np.linalg.qr(basis)
    keep = np.abs(np.diag(rr)) > 1e-12 * abs(rr[0, 0])
    q = q[:, keep]
    k_ff = ctx.k0_ff + dk_ff
    kq = k_ff @ q
    k_r = q.T @ kq
    r_r = q.T @ ctx.rhs
    try:
        y = np.linalg.solve(k_r, r_r)
    except np.linalg.LinAlgError:
        ctx.fallbacks += 1
        ctx.last_fallback = True
        ctx.factorizations += 1
        try:
            return ctx.model.expand(splu(k_ff.tocsc()).solve(ctx.rhs))
        except RuntimeError as exc:
            raise SolveError(
                f"reduced system singular and full-solve fallback failed: "
                f"{exc}") from None
    return ctx.model.expand(q @ y)


def evaluate(ctx: ReanalysisContext, eps, s: int | None = None) -> np.ndarray:
    """Approximate displacement for per-ply deviations eps.

    dK is formed by differencing freshly assembled element matrices against
    the cached nominal ones (identical sparsity, no refactorization).
    """
    delta = ctx.model.element_matrices(eps) - ctx.k0_data
    dk = ctx.model.assemble(element_data=delta)
    return approximate(ctx, dk, s=s)


def basis_study(ctx: ReanalysisContext, dk, s_values,
                csv_path=None) -> list[dict]:
    """Error-vs-basis-size table against the full-solve oracle.

    The oracle factorizes K0 + dK directly (diagnostic use only).  Pass
    ``csv_path`` to also emit the table as CSV.
    """
    nf = ctx.r0_free.size
    dk_ff = dk if dk.shape[0] == nf else _reduce_square(ctx.model, dk)
    exact_free = splu((ctx.k0_ff + dk_ff).tocsc()).solve(ctx.rhs)
    exact = ctx.model.expand(exact_free)
    ref = np.linalg.norm(exact)
    rows = []
    for s in s_values:
        approx = approximate(ctx, dk_ff, s=int(s))
        err = np.linalg.norm(approx - exact) / (ref if ref > 0 else 1.0)
        rows.append({"s": int(s), "relative_error": float(err)})
    if csv_path is not None:
        from ._io import write_csv

        write_csv(csv_path, "s,relative_error",
                  [[r["s"], r["relative_error"]] for r in rows])
    return rows
