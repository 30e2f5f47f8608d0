"""Copula and marginal family enumerations with their admissible parameter domains.

Each copula family maps to a small integer code used by the numerical kernels,
and to a closed parameter interval.  The open-ended Archimedean domains are
capped at values beyond which double-precision evaluation of the closed forms
degrades; the caps are part of the implemented domain and are reported in
error messages.
"""

from __future__ import annotations

from enum import Enum

from .errors import DomainError

# Integer codes shared with the kernel backends.
INDEPENDENCE = 0
FRANK = 1
CLAYTON = 2
GUMBEL = 3
GAUSS = 4
JOE = 5
FGM = 6
AMH = 7


class CopulaFamily(Enum):
    """Bivariate copula families available to the library."""

    INDEPENDENCE = INDEPENDENCE
    FRANK = FRANK
    CLAYTON = CLAYTON
    GUMBEL = GUMBEL
    GAUSS = GAUSS
    JOE = JOE
    FGM = FGM
    AMH = AMH

    @property
    def code(self) -> int:
        return self.value


class MarginalFamily(Enum):
    """Univariate marginal distribution families."""

    GAUSS = "gauss"
    GAMMA = "gamma"
    LOGNORMAL = "lognormal"
    UNIFORM = "uniform"


# theta domain per copula family: (lo, hi, lo_open, hi_open).
# Frank excludes 0 separately; |theta| < THETA_INDEP_EPS dispatches to the
# independence copula for Frank and Clayton.
THETA_DOMAIN = {
    CopulaFamily.INDEPENDENCE: (0.0, 0.0, False, False),
    CopulaFamily.FRANK: (-35.0, 35.0, False, False),
    CopulaFamily.CLAYTON: (0.0, 28.0, True, False),
    CopulaFamily.GUMBEL: (1.0, 50.0, False, False),
    CopulaFamily.GAUSS: (-0.999, 0.999, False, False),
    CopulaFamily.JOE: (1.0, 30.0, False, False),
    CopulaFamily.FGM: (-1.0, 1.0, False, False),
    CopulaFamily.AMH: (-1.0, 1.0, False, True),
}

THETA_INDEP_EPS = 1e-6


def validate_theta(family: CopulaFamily, theta: float) -> float:
    """Check theta against the family domain, returning it unchanged.

    Raises DomainError naming the family and its interval otherwise.
    """
    theta = float(theta)
    lo, hi, lo_open, hi_open = THETA_DOMAIN[family]
    ok = (theta > lo if lo_open else theta >= lo) and (
        theta < hi if hi_open else theta <= hi
    )
    if family is CopulaFamily.INDEPENDENCE:
        ok = True
    if ok and not (theta == theta):  # NaN guard
        ok = False
    if not ok:
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        raise DomainError(
            f"{family.name} copula parameter theta={theta!r} outside the "
            f"admissible interval {lb}{lo}, {hi}{rb}"
        )
    return theta


def copula_family_from_name(name: str) -> CopulaFamily:
    try:
        return CopulaFamily[name.strip().upper()]
    except KeyError:
        raise DomainError(f"unknown copula family {name!r}") from None


def marginal_family_from_name(name: str) -> MarginalFamily:
    try:
        return MarginalFamily[name.strip().upper()]
    except KeyError:
        raise DomainError(f"unknown marginal family {name!r}") from None
