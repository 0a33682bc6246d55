import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsecert import bounds
from sparsecert.bounds import (
    DELTA_BEST,
    BoundInputs,
    asymptotic_constants,
    certificate,
    constants,
    covering_log_count,
    covering_radius,
    delta_threshold_best,
    delta_threshold_improved,
    figure1_data,
    g_of_delta,
    grid_count_bound,
    holder_exponents,
    khintchine_bound,
    lemma_radius,
    maurey_grid,
    sample_complexity,
    sample_complexity_extended,
    table1,
    table1_grid,
)
from sparsecert.errors import HypothesisViolation, InvalidParameter

INF = math.inf
TABLE = {
    "0": (40943, INF, 36613, INF),
    "1/9": (51818, 270695, 46339, 242072),
    "1/2": (163769, 13368, 146452, 11955),
    "1/sqrt(e)": (264453, 9085, 236489, 8124),
    "1": (INF, 3342, INF, 2989),
}


def mp_constants(delta, lam):
    with mpmath.workdps(40):
        d, l, e = mpmath.mpf(delta), mpmath.mpf(lam), mpmath.e
        c1 = 2**5 * e**0.25 / mpmath.log(2) * mpmath.sqrt(mpmath.sqrt(e) + d) / ((1 - l) * d)
        c2 = 2**6 * e**1.5 * (d + mpmath.sqrt(e)) / (d * l) ** 2
        return float(c1), float(c2)


class TestElementary:
    def test_khintchine_constant(self):
        assert khintchine_bound(2, 1) == pytest.approx(2**0.75 * 2 / math.e)
        assert khintchine_bound(2, 1) == pytest.approx(1.2374, abs=5e-5)

    def test_khintchine_two_signs(self):
        # E|e1 + e2|^2 = 2 by enumeration of the four sign patterns
        moment = np.mean([(a + b) ** 2 for a, b in itertools.product((1, -1), repeat=2)])
        assert moment <= khintchine_bound(2, math.sqrt(2))

    def test_khintchine_p_below_two(self):
        with pytest.raises((InvalidParameter, HypothesisViolation)):
            khintchine_bound(1.5, 1)

    @pytest.mark.parametrize("s", [5, 10, 37])
    def test_holder_against_mpmath(self, s):
        p, q = holder_exponents(1, s)
        with mpmath.workdps(30):
            mp_p = mpmath.log(mpmath.mpf(2) ** 0.75 * s)
        assert p == pytest.approx(float(mp_p), rel=1e-14)
        assert 1 / p + 1 / q == pytest.approx(1)

    def test_holder_pinned(self):
        p, q = holder_exponents(1, 10)
        assert p == pytest.approx(2.822445, abs=1e-6)
        assert q == pytest.approx(1.548713, abs=1e-6)
        assert holder_exponents(1, 5)[0] == pytest.approx(2.129298, abs=1e-6)

    def test_holder_needs_p_two(self):
        with pytest.raises(HypothesisViolation):
            holder_exponents(1, 4)

    def test_g_values(self):
        assert g_of_delta(DELTA_BEST) == pytest.approx(0.3227, abs=5e-5)
        assert g_of_delta(1e-12) < 1e-12
        assert g_of_delta(0.3) < g_of_delta(0.6)

    def test_covering_radius_halves(self):
        r3 = covering_radius(1, 10, 2.8, 3)
        assert covering_radius(1, 10, 2.8, 4) == pytest.approx(r3 / 2)

    @pytest.mark.parametrize("N,k", [(10, 0), (1024, 3), (10**6, 12), (5, 20)])
    def test_log_count_against_mpmath(self, N, k):
        with mpmath.workdps(50):
            M = mpmath.mpf(4) ** k
            exact = M * mpmath.log(2 * N * mpmath.e / M + mpmath.e)
        assert covering_log_count(N, k) == pytest.approx(float(exact), rel=1e-13)

    def test_lemma_radius_solves_defining_equation(self):
        r = lemma_radius(1.0, 2.5, 6)
        assert 2 ** (3 / 10) * 8 * 2.5 / (r * r * math.e) == pytest.approx(6)


class TestGrid:
    def test_one_dimensional(self):
        g = grid_count_bound(1, 2)
        assert g.grid_cardinality == 5 and g.exact_binomial == 6
        assert math.exp(g.log_upper_bound) == pytest.approx((2 * math.e) ** 2)
        assert sorted(maurey_grid(1, 2)[:, 0] / 2) == [-1, -0.5, 0, 0.5, 1]

    def test_zero_mesh(self):
        g = grid_count_bound(3, 0)
        assert g.grid_cardinality == 1 and g.exact_binomial == 1

    def test_two_dimensional(self):
        g = grid_count_bound(2, 2)
        assert (g.grid_cardinality, g.exact_binomial) == (13, 15)

    @pytest.mark.parametrize("N,M", [(1, 7), (2, 5), (3, 8), (4, 6)])
    def test_grid_matches_direct_count(self, N, M):
        direct = sum(1 for c in itertools.product(range(-M, M + 1), repeat=N) if sum(map(abs, c)) <= M)
        assert grid_count_bound(N, M).grid_cardinality == direct

    def test_large_inputs_skip_enumeration(self):
        g = grid_count_bound(100, 50)
        assert g.grid_cardinality is None and g.ordered


class TestConstants:
    def test_table(self):
        grid = table1_grid()
        assert len(grid) == 5
        for row in grid:
            assert tuple(row[1:]) == TABLE[row[0]]

    def test_long_format(self):
        rows = table1()
        assert len(rows) == 10
        assert {r.delta_label for r in rows} == {"4/sqrt(41)", "2/3"}

    @pytest.mark.parametrize("delta", [DELTA_BEST, 2 / 3, 0.3])
    @pytest.mark.parametrize("lam", [1 / 9, 0.5, 0.9])
    def test_against_mpmath(self, delta, lam):
        c = constants(delta, lam)
        c1, c2 = mp_constants(delta, lam)
        assert c.C1 == pytest.approx(c1, rel=1e-13)
        assert c.C2 == pytest.approx(c2, rel=1e-13)
        assert c.C_squared == pytest.approx(2 * c1 * c1, rel=1e-13)
        assert c.D == pytest.approx(2 * c2, rel=1e-13)

    def test_endpoints_are_infinite(self):
        assert constants(0.5, 0).C2 == INF and constants(0.5, 0).D == INF
        assert constants(0.5, 1).C1 == INF and constants(0.5, 1).C_squared == INF

    def test_delta_out_of_range(self):
        with pytest.raises(InvalidParameter):
            constants(1.0, 0.5)

    def test_asymptotic(self):
        assert [math.ceil(v) for v in asymptotic_constants(DELTA_BEST)] == [17747, 1449]
        assert [math.ceil(v) for v in asymptotic_constants(2 / 3)] == [15985, 1305]


class TestSampleComplexity:
    PINNED = BoundInputs(N=1024, K=1.0, s=10, delta=DELTA_BEST, epsilon=0.01, lam=0.5)

    def test_pinned(self):
        assert sample_complexity(self.PINNED) == 2153807455
        assert sample_complexity_extended(self.PINNED) == 2153807455

    def test_crosscheck_hook(self):
        assert sample_complexity(self.PINNED, crosscheck=True) == 2153807455

    def test_hypotheses(self):
        with pytest.raises(HypothesisViolation) as err:
            sample_complexity(BoundInputs(N=100, K=1.0, s=2, delta=0.5, epsilon=0.1, lam=0.5))
        assert any("p =" in v for v in err.value.violations)
        with pytest.raises(HypothesisViolation):
            sample_complexity(BoundInputs(N=100, K=1.0, s=10, delta=0.5, epsilon=0.1, lam=1.0))

    def test_epsilon_slope(self):
        # RHS^2 grows affinely in sqrt(ln(1/eps)) inside the square: check the finite-difference
        base = dict(N=1024, K=1.0, s=10, delta=DELTA_BEST, lam=0.5)
        rhs = [bounds.sample_complexity_rhs(BoundInputs(epsilon=math.exp(-u), **base)) for u in (4.0, 9.0, 16.0)]
        diffs = np.diff(rhs)
        assert diffs[0] == pytest.approx(diffs[1], rel=1e-12)  # equal steps in sqrt(u)

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from([64, 1024, 10**6]), st.sampled_from([1.0, 2.0]), st.integers(5, 60),
           st.floats(0.05, 0.95), st.floats(1e-6, 0.5), st.floats(0.05, 0.95))
    def test_double_matches_extended(self, N, K, s, delta, eps, lam):
        inputs = BoundInputs(N=N, K=K, s=s, delta=delta, epsilon=eps, lam=lam)
        assert sample_complexity(inputs) == sample_complexity_extended(inputs)


class TestCertificate:
    def test_pinned_chain(self):
        inputs = TestSampleComplexity.PINNED
        m = sample_complexity(inputs)
        cert = certificate(BoundInputs(**{**inputs.__dict__, "m": m}))
        assert cert.inequality_ok and cert.margin > 0
        assert (cert.l, cert.L) == (4, 10)
        assert cert.scales == list(range(4, 11))
        assert all(n >= math.log(100) for n in cert.n_schedule)

    def test_too_few_samples_fail(self):
        inputs = BoundInputs(N=1024, K=1.0, s=10, delta=DELTA_BEST, epsilon=0.01, lam=0.5, m=1000)
        assert not certificate(inputs).inequality_ok

    def test_needs_m(self):
        with pytest.raises(HypothesisViolation):
            certificate(TestSampleComplexity.PINNED)

    def test_needs_N_above_4p(self):
        with pytest.raises(HypothesisViolation):
            certificate(BoundInputs(N=8, K=1.0, s=10, delta=0.5, epsilon=0.1, lam=0.5, m=10))

    def test_json_has_margin(self):
        inputs = BoundInputs(N=1024, K=1.0, s=10, delta=0.5, epsilon=0.1, lam=0.5, m=10**10)
        out = certificate(inputs).to_json()
        assert out["margin"] == pytest.approx(out["rhs"] - out["lhs"])


class TestThresholds:
    def test_multiples_of_five(self):
        for s in range(5, 201, 5):
            assert delta_threshold_best(s) == 2 / 3

    def test_small_s_plateau(self):
        for s in (1, 2, 3, 4, 6):
            assert delta_threshold_best(s) == DELTA_BEST

    def test_formula(self):
        assert delta_threshold_improved(7) == pytest.approx(math.sqrt((4 - 5 / 7) / (9 - 5 / 7)), abs=1e-15)

    def test_improved_needs_two(self):
        with pytest.raises(InvalidParameter):
            delta_threshold_improved(1)

    def test_monotone_off_multiples(self):
        vals = [delta_threshold_improved(s) for s in range(2, 400) if s % 5]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 2 / 3

    def test_figure_range(self):
        data = figure1_data(200)
        assert [s for s, _ in data] == list(range(1, 201))
        assert all(0.6 < v <= 2 / 3 for _, v in data)
