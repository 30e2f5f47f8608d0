"""Candidate pool and Bayesian evidence tests."""

import numpy as np
import pytest

from vsuq.copulas import BivariateCopula, theta_from_tau
from vsuq.errors import ConfigError, SelectionError
from vsuq.families import CopulaFamily as F
from vsuq.families import MarginalFamily as M
from vsuq.marginals import MarginalModel, ParameterBox
from vsuq.selection import (
    CandidateModel,
    CandidatePool,
    build_pool,
    candidate_evidence,
    candidate_log_evidence,
    generate_pairs,
    read_pairs_csv,
    select,
)

THREE_MARGINALS = [M.GAUSS, M.GAMMA, M.LOGNORMAL]
FIVE_COPULAS = [F.FRANK, F.CLAYTON, F.GUMBEL, F.GAUSS, F.FGM]
SEVEN_COPULAS = [F.FRANK, F.CLAYTON, F.GUMBEL, F.GAUSS, F.JOE, F.FGM, F.AMH]


@pytest.fixture(scope="module")
def positive_pairs():
    m = MarginalModel(M.GAMMA, (3.0, 2.0))
    cop = BivariateCopula(F.FRANK, 4.0)
    return generate_pairs(m, cop, m, 400, seed=7)


@pytest.fixture(scope="module")
def gauss_frank_pairs():
    g = MarginalModel(M.GAUSS, (0.0, 1.0))
    cop = BivariateCopula(F.FRANK, theta_from_tau(F.FRANK, 0.5))
    return generate_pairs(g, cop, g, 500, seed=42)


# ---------------------------------------------------------------------------
# pool enumeration
# ---------------------------------------------------------------------------


def test_pool_size_three_marginals_five_copulas(positive_pairs):
    pool = build_pool(THREE_MARGINALS, FIVE_COPULAS, positive_pairs)
    assert len(pool) == 3 * 2 * 5


def test_pool_size_two_marginals_one_copula(positive_pairs):
    pool = build_pool([M.GAUSS, M.GAMMA], [F.FRANK], positive_pairs)
    assert len(pool) == 2


def test_pool_size_and_enumeration_three_by_seven(positive_pairs):
    pool = build_pool(THREE_MARGINALS, SEVEN_COPULAS, positive_pairs)
    assert len(pool) == 42
    seen = {(c.m1, c.cop, c.m2) for c in pool.candidates}
    assert len(seen) == 42  # each ordered pair listed once per copula
    assert all(c.m1 != c.m2 for c in pool.candidates)


def test_pool_equal_marginals_flag(positive_pairs):
    pool = build_pool(THREE_MARGINALS, FIVE_COPULAS, positive_pairs,
                      allow_equal_marginals=True)
    assert len(pool) == 45
    assert any(c.m1 == c.m2 for c in pool.candidates)


def test_pool_configuration_errors(positive_pairs):
    with pytest.raises(ConfigError):
        build_pool([M.GAUSS], FIVE_COPULAS, positive_pairs)
    with pytest.raises(ConfigError):
        build_pool(THREE_MARGINALS, [], positive_pairs)
    with pytest.raises(ConfigError):
        build_pool(THREE_MARGINALS, FIVE_COPULAS, positive_pairs[:5])


# ---------------------------------------------------------------------------
# evidence
# ---------------------------------------------------------------------------


def test_single_candidate_pool_weight_is_one(positive_pairs):
    base = build_pool([M.GAUSS, M.GAMMA], [F.FRANK], positive_pairs)
    pool = CandidatePool((base.candidates[0],))
    res = select(pool, positive_pairs)
    assert res.weights[0] == pytest.approx(1.0, abs=1e-15)


def test_identical_candidates_split_weight_and_tie_to_lowest_index(positive_pairs):
    base = build_pool([M.GAUSS, M.GAMMA], [F.FRANK], positive_pairs)
    cand = base.candidates[0]
    pool = CandidatePool((cand, cand))
    res = select(pool, positive_pairs)
    assert res.weights == pytest.approx([0.5, 0.5], abs=1e-12)
    assert res.best == 0
    assert res.tie


def test_evidence_invariant_under_row_permutation(positive_pairs, rng):
    base = build_pool([M.GAUSS, M.GAMMA], [F.FRANK], positive_pairs)
    cand = base.candidates[0]
    lw1, _, _ = candidate_log_evidence(cand, positive_pairs, 2)
    perm = rng.permutation(positive_pairs.shape[0])
    lw2, _, _ = candidate_log_evidence(cand, positive_pairs[perm], 2)
    assert abs(lw1 - lw2) < 1e-10


def test_weights_equal_normalized_evidences(positive_pairs):
    pool = build_pool([M.GAUSS, M.GAMMA], [F.FRANK, F.GAUSS], positive_pairs)
    res = select(pool, positive_pairs)
    ref = np.exp(res.log_evidences - res.log_evidences.max())
    ref = ref / ref.sum()
    assert np.max(np.abs(res.weights - ref)) < 1e-12
    assert res.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_doubling_box_lengths_shrinks_evidence(positive_pairs):
    base = build_pool([M.GAUSS, M.GAMMA], [F.FRANK], positive_pairs)
    cand = base.candidates[0]

    def doubled(box):
        mids = [0.5 * (l + h) for l, h in zip(box.lows, box.highs)]
        return ParameterBox(
            tuple(m - (h - l) for m, l, h in zip(mids, box.lows, box.highs)),
            tuple(m + (h - l) for m, l, h in zip(mids, box.lows, box.highs)))

    wide = CandidateModel(cand.m1, cand.cop, cand.m2, doubled(cand.box1),
                          doubled(cand.box2), doubled(cand.box_theta))
    lw_base, _, _ = candidate_log_evidence(cand, positive_pairs, 1)
    lw_wide, _, _ = candidate_log_evidence(wide, positive_pairs, 1)
    assert lw_wide <= lw_base  # Lebesgue penalty dominates once mass is inside


def test_unsupported_marginal_gives_exact_zero_with_flag(rng):
    data = np.column_stack([rng.normal(size=200), rng.normal(size=200)])
    pool = build_pool([M.GAUSS, M.GAMMA], [F.FRANK], data)
    gamma_first = [c for c in pool.candidates if c.m1 == M.GAMMA][0]
    assert not gamma_first.supported
    assert candidate_evidence(gamma_first, data, len(pool)) == 0.0
    _, _, flag = candidate_log_evidence(gamma_first, data, len(pool))
    assert "unsupported" in flag


def test_all_zero_evidences_raise_selection_error(rng):
    data = np.column_stack([rng.normal(size=100), rng.normal(size=100)])
    pool = build_pool([M.GAMMA, M.LOGNORMAL], [F.FRANK], data)
    with pytest.raises(SelectionError, match="widen"):
        select(pool, data)


# ---------------------------------------------------------------------------
# recovery of a known generator
# ---------------------------------------------------------------------------


def test_generating_triple_wins(gauss_frank_pairs):
    pool = build_pool(THREE_MARGINALS, FIVE_COPULAS, gauss_frank_pairs,
                      allow_equal_marginals=True)
    res = select(pool, gauss_frank_pairs)
    assert res.names[res.best] == "Gauss-Frank-Gauss"
    post = res.posterior_means[res.best]
    assert post["beta1"][0] == pytest.approx(0.0, abs=0.2)
    assert post["beta1"][1] == pytest.approx(1.0, abs=0.2)
    assert post["theta"] == pytest.approx(theta_from_tau(F.FRANK, 0.5), abs=1.5)


# ---------------------------------------------------------------------------
# CSV input
# ---------------------------------------------------------------------------


def test_read_pairs_csv_roundtrip(tmp_path, positive_pairs):
    p = tmp_path / "pairs.csv"
    with open(p, "w") as fh:
        fh.write("x1,x2\n")
        for a, b in positive_pairs[:50]:
            fh.write(f"{a:.17g},{b:.17g}\n")
    loaded = read_pairs_csv(p)
    assert np.allclose(loaded, positive_pairs[:50], rtol=0, atol=0)


def test_read_pairs_csv_error_reports_line_number(tmp_path):
    p = tmp_path / "bad.csv"
    with open(p, "w") as fh:
        fh.write("x1,x2\n1.0,2.0\noops,3.0\n")
    with pytest.raises(ConfigError, match="line 3"):
        read_pairs_csv(p)
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ConfigError, match="empty"):
        read_pairs_csv(empty)
