import csv
import io
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seplab import estimator
from seplab.criteria import Verdict
from seplab.ensembles import Bures, HS, Induced, MeasureSpec
from seplab.errors import InvalidConfig, StreamExhausted, Unsupported
from seplab.estimator import (CoupledState, EstimatorState, corrected_bures, merge, run, update,
                              wilson_ci, wilson_interval)
from seplab.qrseq import QrState


def verdict(ppt, det=False, spec=False):
    return Verdict(ppt, det, spec, 0.0 if ppt else -0.1, 0 if ppt else 1)


states = st.builds(
    lambda t, h, d, s: EstimatorState(t + h + d + s, h + d + s, d, s),
    st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))


class TestUpdate:
    def test_ppt_and_det(self):
        s = update(EstimatorState(), verdict(True, det=True))
        assert (s.trials, s.hits, s.det_greater_hits, s.spectrum_hits) == (1, 1, 1, 0)

    def test_non_ppt_ignores_other_flags(self):
        s = update(EstimatorState(), Verdict(False, True, True, -0.2, 1))
        assert (s.trials, s.hits, s.det_greater_hits, s.spectrum_hits) == (1, 0, 0, 0)

    def test_all_separable_boundary(self):
        s = EstimatorState()
        v = verdict(True)
        for _ in range(100_000):
            s = s.update(v)
        assert s.p_hat == 1.0
        assert wilson_ci(s)[1] == 1.0

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            EstimatorState(5, 6)
        with pytest.raises(ValueError):
            EstimatorState(5, 3, 0, 4)
        with pytest.raises(ValueError):
            EstimatorState(5, 3, 4, 0)


class TestMerge:
    @given(states, states, states)
    def test_associative(self, a, b, c):
        assert merge(merge(a, b), c) == merge(a, merge(b, c))

    @given(states, states)
    def test_commutative(self, a, b):
        assert merge(a, b) == merge(b, a)

    @settings(max_examples=50)
    @given(st.lists(st.booleans(), min_size=1, max_size=300), st.data())
    def test_random_partition_equals_sequential(self, flags, data):
        whole = EstimatorState()
        for f in flags:
            whole = whole.update(verdict(f, det=f))
        cuts = sorted(data.draw(st.sets(st.integers(1, len(flags)), max_size=6)))
        parts = []
        for lo, hi in zip([0] + cuts, cuts + [len(flags)]):
            s = EstimatorState()
            for f in flags[lo:hi]:
                s = s.update(verdict(f, det=f))
            parts.append(s)
        acc = EstimatorState()
        for p in data.draw(st.permutations(parts)):
            acc = acc.merge(p)
        assert acc == whole

    def test_quasi_concatenation(self):
        spec = MeasureSpec("C", (2, 2))
        a = run(spec, 10**6, quasi=QrState(32, 0.5, 1)).state
        b = run(spec, 10**6, quasi=QrState(32, 0.5, 1 + 10**6)).state
        both = run(spec, 2 * 10**6, quasi=QrState(32, 0.5, 1), stride=10**7).state
        merged = merge(a, b)
        assert (merged.trials, merged.hits, merged.det_greater_hits, merged.spectrum_hits) == (
            both.trials, both.hits, both.det_greater_hits, both.spectrum_hits)


class TestWilson:
    def test_qubit_qutrit_interval(self):
        lo, hi = wilson_interval(2_900_000_000, 78_293_301)
        assert lo == pytest.approx(0.0269918, abs=1e-7)
        assert hi == pytest.approx(0.0270036, abs=1e-7)

    def test_rebit_retrit_interval(self):
        lo, hi = wilson_interval(3_530_000_000, 462_704_503)
        assert lo == pytest.approx(0.131067, abs=1e-6)
        assert hi == pytest.approx(0.131089, abs=1e-6)

    def test_zero_hits(self):
        lo, hi = wilson_interval(100, 0)
        z2 = 1.959963984540054**2
        assert lo == 0.0
        assert hi == pytest.approx(z2 / (100 + z2), rel=1e-12)
        assert hi == pytest.approx(0.0370, abs=1e-4)

    def test_coverage(self):
        rng = np.random.default_rng(2024)
        p = 8 / 33
        hits = rng.binomial(10_000, p, size=1000)
        covered = sum(lo <= p <= hi for lo, hi in (wilson_interval(10_000, int(h)) for h in hits))
        assert 940 <= covered <= 965

    @given(st.integers(1, 10**9), st.data())
    def test_contains_estimate(self, n, data):
        h = data.draw(st.integers(0, n))
        lo, hi = wilson_interval(n, h)
        assert 0 <= lo <= h / n <= hi <= 1

    def test_level_widens(self):
        a = wilson_interval(1000, 300, 0.9)
        b = wilson_interval(1000, 300, 0.99)
        assert b[0] < a[0] and b[1] > a[1]

    def test_bad_input(self):
        with pytest.raises(ValueError):
            wilson_interval(0, 0)
        with pytest.raises(ValueError):
            wilson_interval(10, 1, 1.0)


class TestCorrectedBures:
    def test_exact_hs_leaves_estimate(self):
        c = CoupledState(33_000, 8_000, 2_400)
        assert corrected_bures(c) == pytest.approx(2_400 / 33_000, rel=1e-15)

    def test_two_qubit_factor_example(self):
        trials = 4_372_000_000
        hs_hits = round(F(8, 33) * trials / F("1.00002224983"))
        c = CoupledState(trials, hs_hits, round(F("0.0733181043") * trials))
        factor = F(8, 33) * trials / hs_hits
        assert float(factor) == pytest.approx(1.00002224983, abs=1e-9)
        assert corrected_bures(c) == pytest.approx(0.07331891996, abs=2e-10)

    def test_two_qubit_counts_carry_inverse_factor(self):
        # these reference coupled counts give hs_hat / (8/33), not its reciprocal;
        # see the decisions ledger
        trials, hs_hits, bures_hits = 4_372_000_000, 1_059_902_370, 320_546_752
        assert bures_hits / trials == pytest.approx(0.0733181043, abs=1e-10)
        ratio = F(hs_hits, trials) / F(8, 33)
        assert float(ratio) == pytest.approx(1.00002224983, abs=1e-10)

    def test_two_rebit_reconstruction(self):
        # only trials and Bures hits are known; some HS count consistent with
        # 29/64 must reproduce the target corrected value
        trials, bures_hits = 40_000_000, 6_286_209
        sigma = math.sqrt(29 / 64 * 35 / 64 / trials)
        lo, hi = (round((29 / 64 + s * 4 * sigma) * trials) for s in (-1, 1))
        matches = [h for h in range(lo, hi + 1)
                   if abs(corrected_bures(CoupledState(trials, h, bures_hits), F(29, 64)) - 0.1571469) < 5e-8]
        assert matches

    def test_zero_hs_hits(self):
        with pytest.raises(ZeroDivisionError):
            corrected_bures(CoupledState(10, 0, 1))

    def test_merge(self):
        assert CoupledState(3, 1, 2).merge(CoupledState(4, 2, 0)) == CoupledState(7, 3, 2)
        with pytest.raises(ValueError):
            CoupledState(3, 4, 0)


class TestTrace:
    def test_csv_format(self):
        s = EstimatorState(10, 4, trace=((5, 2), (10, 4)))
        rows = list(csv.reader(io.StringIO(s.trace_csv())))
        assert rows[0] == ["trials", "hits", "p_hat", "ci_lo", "ci_hi"]
        assert [int(r[0]) for r in rows[1:]] == [5, 10]
        assert float(rows[2][2]) == 0.4

    def test_run_checkpoints(self):
        res = run(MeasureSpec("C", (2, 2)), 2_500_000, seed=3, stride=700_000)
        trials = [t for t, _ in res.state.trace]
        assert trials == [700_000, 1_400_000, 2_100_000, 2_500_000]
        hits = [h for _, h in res.state.trace]
        assert all(b >= a for a, b in zip(hits, hits[1:]))
        assert res.state.trace[-1] == (res.state.trials, res.state.hits)


class TestRunner:
    SPEC = MeasureSpec("C", (2, 2))

    def test_thread_count_irrelevant(self):
        a = run(self.SPEC, 2_300_000, seed=4, threads=1, stride=500_000)
        b = run(self.SPEC, 2_300_000, seed=4, threads=3, stride=500_000)
        assert a == b

    def test_stride_irrelevant_to_totals(self):
        a = run(self.SPEC, 2_300_000, seed=4, stride=300_000).state
        b = run(self.SPEC, 2_300_000, seed=4, stride=10**7).state
        assert (a.trials, a.hits, a.det_greater_hits) == (b.trials, b.hits, b.det_greater_hits)
        common = set(a.trace) & {(t, h) for t, h in a.trace if t % 600_000 == 0}
        c = run(self.SPEC, 2_300_000, seed=4, stride=600_000).state
        assert common <= set(c.trace)

    def test_x_state_pieces_continue_stream(self):
        spec = MeasureSpec("C", (2, 2), Induced(1))
        a = run(spec, 1_200_000, seed=5, x_states=True, stride=250_000)
        b = run(spec, 1_200_000, seed=5, x_states=True, stride=10**7, threads=2)
        assert (a.state.trials, a.state.hits) == (b.state.trials, b.state.hits)

    def test_quasi_threads(self):
        spec = MeasureSpec("C", (2, 2), Bures())
        q = QrState(64, 0.0, 1)
        a = run(spec, 1_500_000, quasi=q, threads=1, stride=400_000)
        b = run(spec, 1_500_000, quasi=QrState(64, 0.0, 1), threads=2, stride=400_000)
        assert a == b
        assert a.points == 1_500_000

    def test_seed_changes_result(self):
        a = run(self.SPEC, 200_000, seed=1).state
        b = run(self.SPEC, 200_000, seed=2).state
        assert a.hits != b.hits

    def test_coupled(self):
        res = run(MeasureSpec("R", (2, 2), Bures()), 300_000, seed=6, coupled=True)
        c = res.coupled
        assert c.trials == 300_000 and c.bures_hits == res.state.hits
        assert abs(c.hs_hits / c.trials - 29 / 64) < 5 * math.sqrt(0.25 / c.trials)

    @pytest.mark.parametrize("kwargs,error", [
        (dict(samples=0), InvalidConfig),
        (dict(stride=0), InvalidConfig),
        (dict(coupled=True), InvalidConfig),
        (dict(x_states=True, quasi=QrState(8)), InvalidConfig),
        (dict(quasi=QrState(16)), StreamExhausted),
    ])
    def test_bad_config(self, kwargs, error):
        args = dict(samples=10)
        args.update(kwargs)
        with pytest.raises(error):
            run(self.SPEC, args.pop("samples"), **args)

    def test_quaternionic_unsupported(self):
        with pytest.raises(Unsupported):
            run(MeasureSpec("H", (2, 2), Induced(1)), 10)

    def test_x_state_validation(self):
        with pytest.raises(Exception):
            run(MeasureSpec("C", (2, 4)), 10, x_states=True)

    def test_z_score(self):
        s = EstimatorState(10_000, 2_500)
        assert s.z_score(0.25) == 0
        assert s.z_score(F(1, 5)) == pytest.approx(0.05 / math.sqrt(0.16 / 10_000))
