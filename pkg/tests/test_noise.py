import math
import random
from itertools import combinations_with_replacement, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import EXAMPLE6, EXAMPLE7
from nblsat import _pykernel
from nblsat.cnf import CnfFormula, PartialAssignment
from nblsat.kernels import AVAILABLE
from nblsat.noise import (
    CorrelationEstimate,
    NoiseTape,
    SeedSpec,
    StoppingRule,
    accumulate,
    binding_mask,
    clause_codes,
    draw_tape,
    eval_sigma,
    eval_tau,
    merge,
    run_correlation,
    run_trace,
    sample_sn,
)

KERNELS = sorted(AVAILABLE)


def tape_of(values):
    return NoiseTape(np.asarray(values, dtype=float))


class TestTape:
    def test_deterministic(self):
        assert draw_tape(3, 17, 2, 3) == draw_tape(3, 17, 2, 3)
        assert draw_tape(3, 17, 2, 3) != draw_tape(3, 18, 2, 3)
        assert draw_tape(3, 17, 2, 3) != draw_tape(4, 17, 2, 3)

    def test_shape_and_range(self):
        tape = draw_tape(0, 0, 3, 4)
        assert tape.values.shape == (4, 3, 2)
        assert (np.abs(tape.values) <= 0.5).all()

    def test_rejects_degenerate_sizes(self):
        with pytest.raises(ValueError):
            draw_tape(0, 0, 0, 1)

    def test_counter_overflow(self):
        with pytest.raises(OverflowError):
            draw_tape(0, 2**62, 2, 2)

    def test_block_partition_invariance(self):
        key = SeedSpec(9).key
        whole = _pykernel.draws(key, 0, 10, 2, 3)
        parts = np.concatenate([_pykernel.draws(key, 0, 4, 2, 3), _pykernel.draws(key, 4, 6, 2, 3)])
        assert np.array_equal(whole, parts)
        assert np.array_equal(whole[7], draw_tape(9, 7, 2, 3).values)

    def test_single_coordinate_moments(self):
        d = _pykernel.draws(SeedSpec(1).key, 0, 10**6, 1, 1)
        x = d[:, 0, 0, 0]
        se = math.sqrt(1 / 12) / 1000
        assert abs(x.mean()) <= 4 * se
        assert x.var() == pytest.approx(1 / 12, rel=0.01)

    def test_distinct_coordinates_uncorrelated(self):
        d = _pykernel.draws(SeedSpec(2).key, 0, 10**6, 2, 2)
        se = (1 / 12) / 1000
        for a, b in [((0, 0, 0), (0, 0, 1)), ((0, 1, 0), (1, 1, 0)), ((1, 0, 1), (0, 1, 0))]:
            prod = d[(slice(None),) + a] * d[(slice(None),) + b]
            assert abs(prod.mean()) <= 4 * se

    def test_decoupled_family_differs(self):
        assert draw_tape(5, 0, 2, 2) != draw_tape(5, 0, 2, 2, independent=True)


class TestTau:
    def test_single_unbound(self):
        tape = tape_of([[[0.3, -0.2]]])
        assert eval_tau(tape) == pytest.approx(0.1)

    def test_single_bound_true(self):
        tape = tape_of([[[0.3, -0.2]]])
        assert eval_tau(tape, PartialAssignment.from_literals(1, [1])) == 0.3
        assert eval_tau(tape, PartialAssignment.from_literals(1, [-1])) == -0.2

    @pytest.mark.parametrize("bound", [{}, {1: True}, {2: False}, {1: False, 2: True}])
    def test_matches_expansion(self, bound):
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = oracles.uniform_tape(rng, 2, 2)
            b = PartialAssignment.from_literals(2, [k if val else -k for k, val in bound.items()])
            assert eval_tau(tape_of(v), b) == pytest.approx(oracles.expanded_tau(v, 2, 2, bound), rel=1e-12)


class TestSigma:
    def test_example7(self):
        v = np.array([[[0.1, 0.2]], [[0.3, 0.4]]])
        f = CnfFormula.from_ints(1, EXAMPLE7)
        assert eval_sigma(tape_of(v), f) == pytest.approx(0.1 * 0.4)

    def test_empty_clause_is_zero(self):
        f = CnfFormula.from_ints(2, [[1, 2], []])
        rng = np.random.default_rng(1)
        for _ in range(10):
            assert eval_sigma(tape_of(oracles.uniform_tape(rng, 2, 2)), f) == 0.0

    def test_example6_three_by_three_expansion(self):
        rng = np.random.default_rng(2)
        f = CnfFormula.from_ints(2, EXAMPLE6)
        for _ in range(20):
            v = oracles.uniform_tape(rng, 2, 2)
            N = lambda j, i, pos: v[j - 1, i - 1, 0 if pos else 1]  # noqa: E731
            z1 = N(1, 1, 1) * N(1, 2, 1) + N(1, 1, 1) * N(1, 2, 0) + N(1, 1, 0) * N(1, 2, 0)
            z2 = N(2, 1, 1) * N(2, 2, 0) + N(2, 1, 0) * N(2, 2, 1) + N(2, 1, 0) * N(2, 2, 0)
            assert eval_sigma(tape_of(v), f) == pytest.approx(z1 * z2, rel=1e-12)

    def test_duplicates_and_tautologies(self):
        rng = np.random.default_rng(3)
        for clauses in ([[1, 1, -2]], [[1, -1]], [[2, -2, 1], [1]]):
            f = CnfFormula.from_ints(2, clauses)
            v = oracles.uniform_tape(rng, 2, len(clauses))
            assert eval_sigma(tape_of(v), f) == pytest.approx(
                oracles.expanded_sigma(v, 2, clauses), rel=1e-12, abs=1e-15)

    def test_exhaustive_small_formulas(self):
        rng = np.random.default_rng(4)
        for n in (1, 2, 3):
            pool = [list(c) for w in range(1, n + 1)
                    for vs in product(range(1, n + 1), repeat=w)
                    if len(set(vs)) == w and list(vs) == sorted(vs)
                    for c in product(*[(v, -v) for v in vs])]
            for m in (1, 2):
                for clauses in combinations_with_replacement(pool, m):
                    f = CnfFormula.from_ints(n, clauses)
                    v = oracles.uniform_tape(rng, n, m)
                    assert eval_sigma(tape_of(v), f) == pytest.approx(
                        oracles.expanded_sigma(v, n, clauses), rel=1e-9, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            eval_sigma(draw_tape(0, 0, 2, 1), CnfFormula.from_ints(2, EXAMPLE6))


class TestExpectationAlgebra:
    """E[tau*sigma] from the explicit minterm expansion equals K/12**(nm)."""

    def test_example6(self):
        assert oracles.exact_expectation(2, EXAMPLE6) == 2 * oracles.SECOND_MOMENT**4

    def test_example7(self):
        assert oracles.exact_expectation(1, EXAMPLE7) == 0

    def test_random_small(self):
        rng = random.Random(5)
        for _ in range(150):
            n, m = rng.randint(1, 3), rng.randint(1, 3)
            clauses = oracles.random_cnf(rng, n, m, allow_empty=True)
            bound = {v: rng.random() < 0.5 for v in range(1, n + 1) if rng.random() < 0.3}
            k = oracles.truth_table_count(n, clauses, bound)
            assert oracles.exact_expectation(n, clauses, bound) == k * oracles.SECOND_MOMENT ** (n * m)


class TestSampleSN:
    def test_example7_symbolic(self):
        f = CnfFormula.from_ints(1, EXAMPLE7)
        for t in range(5):
            tape = draw_tape(11, t, 1, 2)
            p1, n1 = tape.draw(1, 1, True), tape.draw(1, 1, False)
            p2, n2 = tape.draw(2, 1, True), tape.draw(2, 1, False)
            assert sample_sn(11, t, f) == pytest.approx(p1 * n2 * (p1 * p2 + n1 * n2), rel=1e-12)

    def test_bound_false_unmatched(self):
        f = CnfFormula.from_ints(1, [[1]])
        b = PartialAssignment.from_literals(1, [-1])
        tape = draw_tape(12, 3, 1, 1)
        assert sample_sn(12, 3, f, b) == pytest.approx(tape.draw(1, 1, False) * tape.draw(1, 1, True))
        est = run_correlation(f, b, 12, StoppingRule.fixed(10**5))
        assert abs(est.mean) <= 4 * est.stderr

    @pytest.mark.parametrize("kernel", KERNELS)
    def test_kernel_matches_reference(self, kernel, ex5):
        s = SeedSpec(13)
        b = PartialAssignment.from_literals(3, [2])
        vals = AVAILABLE[kernel].block_values(
            s.key, s.sigma_key, False, 40, 25, clause_codes(ex5), binding_mask(3, b))
        ref = [sample_sn(13, t, ex5, b) for t in range(40, 65)]
        np.testing.assert_allclose(vals, ref, rtol=1e-12, atol=1e-300)

    def test_kernels_agree(self, s_sat):
        if len(KERNELS) < 2:
            pytest.skip("compiled kernel not built")
        s = SeedSpec(14)
        args = (s.key, s.sigma_key, True, 7, 5000, clause_codes(s_sat), binding_mask(2, None))
        np.testing.assert_array_equal(AVAILABLE["compiled"].block_values(*args),
                                      AVAILABLE["python"].block_values(*args))

    def test_kernels_give_identical_estimates(self, ex6):
        if len(KERNELS) < 2:
            pytest.skip("compiled kernel not built")
        rule = StoppingRule.fixed(300_000, 1 << 14)
        a, b = (run_correlation(ex6, None, 5, rule, kernel=k) for k in ("compiled", "python"))
        assert a == b


class TestEstimate:
    def test_first_value(self):
        assert accumulate(CorrelationEstimate(), 2.5) == CorrelationEstimate(1, 2.5, 0.0)

    def test_constant_stream(self):
        assert accumulate(CorrelationEstimate(1, 3.0, 0.0), 3.0) == CorrelationEstimate(2, 3.0, 0.0)

    def test_one_two_three(self):
        e = CorrelationEstimate.from_values([1, 2, 3])
        assert (e.count, e.mean, e.m2) == (3, 2.0, 2.0)
        assert e.stderr == pytest.approx(math.sqrt(2 / 6))

    def test_merge_identity(self):
        e = CorrelationEstimate.from_values([1, 5])
        assert merge(CorrelationEstimate(), e) == e
        assert merge(e, CorrelationEstimate()) == e

    def test_merge_halves(self):
        e = merge(CorrelationEstimate.from_values([1, 2]), CorrelationEstimate.from_values([3, 4]))
        assert (e.count, e.mean, e.m2) == (4, 2.5, 5.0)

    @settings(max_examples=200)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=0, max_size=40),
           st.lists(st.floats(-1e3, 1e3), min_size=0, max_size=40))
    def test_merge_equals_concatenation(self, xs, ys):
        a, b = CorrelationEstimate.from_values(xs), CorrelationEstimate.from_values(ys)
        whole = CorrelationEstimate.from_values(xs + ys)
        for got in (merge(a, b), merge(b, a)):
            assert got.count == whole.count
            assert got.mean == pytest.approx(whole.mean, rel=1e-12, abs=1e-9)
            assert got.m2 == pytest.approx(whole.m2, rel=1e-9, abs=1e-6)

    def test_stable_for_offset_stream(self):
        rng = np.random.default_rng(0)
        x = 1e9 + rng.standard_normal(10**5)
        e = CorrelationEstimate.from_values(x[:50000]).merge(CorrelationEstimate.from_values(x[50000:]))
        assert e.variance == pytest.approx(x.var(ddof=1), rel=1e-6)


class TestRunCorrelation:
    def test_example7_zero(self, ex7):
        e = run_correlation(ex7, None, 0, StoppingRule.fixed(10**6))
        assert e.count == 10**6
        assert abs(e.mean) <= 4 * e.stderr

    def test_example6_analytic(self, ex6):
        e = run_correlation(ex6, None, 1, StoppingRule.fixed(10**7))
        assert abs(e.mean - 2 / 12**4) <= 4 * e.stderr

    def test_rejects_zero_budget(self):
        with pytest.raises(ValueError):
            StoppingRule(max_samples=0)

    def test_thread_count_invariant(self, ex6):
        stop = StoppingRule.fixed(300_000, block_size=10_000)
        one = run_correlation(ex6, None, 21, stop, threads=1)
        four = run_correlation(ex6, None, 21, stop, threads=4)
        assert one == four

    def test_block_size_changes_only_rounding(self, ex6):
        a = run_correlation(ex6, None, 22, StoppingRule.fixed(200_000, block_size=1 << 16))
        b = run_correlation(ex6, None, 22, StoppingRule.fixed(200_000, block_size=7919))
        assert a.count == b.count
        assert a.mean == pytest.approx(b.mean, rel=1e-12)

    def test_converges_early_on_sat_instance(self):
        f = CnfFormula.from_ints(1, [[1]])
        e = run_correlation(f, None, 0, StoppingRule(max_samples=10**8, digits=2, min_samples=1 << 16))
        assert e.count < 10**8
        assert abs(e.mean - 1 / 12) <= 4 * e.stderr

    def test_zero_band_stops_unsat(self, ex7):
        e = run_correlation(ex7, None, 0, StoppingRule(max_samples=10**8, min_samples=1 << 17))
        assert e.count < 10**7
        assert abs(e.mean) < e.stderr

    def test_decoupled_control_kills_signal(self):
        f = CnfFormula.from_ints(1, [[1]])
        e = run_correlation(f, None, 3, StoppingRule.fixed(10**6), decouple=True)
        assert abs(e.mean) <= 4 * e.stderr

    def test_unbiased_small_formulas(self):
        rng = random.Random(31)
        for _ in range(6):
            n, m = rng.randint(1, 3), rng.randint(1, 3)
            clauses = oracles.random_cnf(rng, n, m)
            f = CnfFormula.from_ints(n, clauses)
            k = oracles.truth_table_count(n, clauses)
            e = run_correlation(f, None, rng.randrange(2**32), StoppingRule.fixed(10**6))
            assert abs(e.mean - k / 12 ** (n * m)) <= 4 * e.stderr, (clauses, k)

    def test_zero_clause_formula(self):
        e = run_correlation(CnfFormula(3), None, 0, StoppingRule.fixed(1000))
        assert e.mean == 8.0 and e.m2 == 0.0


class TestTrace:
    def test_checkpoints_and_final_value(self, ex6):
        recs = list(run_trace(ex6, None, 5, [10, 100, 1000, 5000], block_size=777))
        assert [r.count for r in recs] == [10, 100, 1000, 5000]
        direct = run_correlation(ex6, None, 5, StoppingRule.fixed(5000))
        assert recs[-1].mean == pytest.approx(direct.mean, rel=1e-12)
        assert recs[-1].m2 == pytest.approx(direct.m2, rel=1e-9)

    def test_early_stop_emits_stop_point(self):
        f = CnfFormula.from_ints(1, [[1]])
        stop = StoppingRule(max_samples=10**8, digits=2, min_samples=1 << 16)
        recs = list(run_trace(f, None, 0, [10**6, 10**8], stop=stop))
        assert recs[-1].count < 10**8
