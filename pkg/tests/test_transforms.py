import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from logconheat.transforms import (NEG_INF, ConcavityTransform, DomainError, ExtReal, LogPower,
                                   Power, ins_scalar_convexity, logpower_bridge_convexity,
                                   power_mean, psi, psi_prime, weak_counterexample_curvature)

TRANSFORMS = [LogPower(0.5), LogPower(1), LogPower(2), LogPower(3), Power(-2), Power(-0.5),
              Power(0), Power(0.5), Power(1)]
unit = st.floats(min_value=1e-100, max_value=1.0, allow_nan=False)


class TestExtReal:
    def test_bottom_absorbs_addition(self):
        assert (NEG_INF + 3.0).bottom
        assert (2.0 + NEG_INF).bottom
        assert (NEG_INF + NEG_INF).bottom

    def test_scaling(self):
        assert (0.4 * NEG_INF).bottom
        assert not (0.0 * NEG_INF).bottom
        assert float(0.0 * NEG_INF) == 0.0
        with pytest.raises(DomainError):
            NEG_INF * -1.0

    def test_ordering(self):
        assert NEG_INF >= NEG_INF
        assert NEG_INF < ExtReal(-1e300)
        assert ExtReal(1.0) > NEG_INF
        assert not NEG_INF > NEG_INF

    def test_finite_only(self):
        with pytest.raises(DomainError):
            ExtReal(math.nan)
        assert ExtReal.of(-math.inf) is NEG_INF

    def test_subtraction(self):
        assert (ExtReal(3.0) - 1.0).value == 2.0
        assert (NEG_INF - 1.0).bottom
        with pytest.raises(DomainError):
            ExtReal(1.0) - NEG_INF


class TestEval:
    def test_spec_examples(self):
        assert LogPower(2).eval(math.exp(-4)).value == pytest.approx(-2.0, rel=1e-15)
        assert Power(0).eval(math.exp(-1)).value == pytest.approx(-1.0, rel=1e-15)
        for F in TRANSFORMS:
            assert F.eval(0.0).bottom

    def test_logpower_one_is_log(self):
        s = np.linspace(0.01, 1, 50)
        vals, bottom = LogPower(1).eval_array(s)
        assert not bottom.any()
        np.testing.assert_allclose(vals, np.log(s), rtol=1e-15)

    def test_against_high_precision(self, oracle):
        for rec in oracle["logpower"]:
            got = LogPower(rec["alpha"]).eval(rec["s"]).value
            assert got == pytest.approx(rec["value"], rel=1e-12), rec

    def test_near_one_accuracy(self):
        # -log s must keep full relative accuracy for s in [0.5, 1)
        s = 1 - np.logspace(-15, np.log10(0.5), 200)
        vals, _ = LogPower(1).eval_array(s)
        np.testing.assert_allclose(-vals, -np.log1p(s - 1), rtol=1e-12)

    @pytest.mark.parametrize("bad", [-1e-12, 1.0 + 1e-12, math.nan])
    def test_domain(self, bad):
        for F in TRANSFORMS:
            with pytest.raises(DomainError):
                F.eval(bad)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            LogPower(0)
        with pytest.raises(ValueError):
            ConcavityTransform("table", 1.0)
        with pytest.raises(ValueError):
            Power(math.inf)

    @given(unit, unit)
    def test_strictly_increasing(self, s1, s2):
        if s1 == s2:
            return
        lo, hi = sorted((s1, s2))
        for F in TRANSFORMS:
            a, b = F.eval(lo), F.eval(hi)
            # distinct doubles can round to the same value; never decrease
            assert b >= a

    def test_strictly_increasing_on_grid(self):
        s = np.geomspace(1e-100, 1, 2000)
        for F in TRANSFORMS:
            vals, bottom = F.eval_array(s)
            assert not bottom.any()
            assert np.all(np.diff(vals) > 0), F.name


class TestInverse:
    def test_examples(self):
        assert LogPower(2).inverse(-2.0) == pytest.approx(math.exp(-4), rel=1e-14)
        assert LogPower(2).inverse(NEG_INF) == 0.0
        assert Power(1).inverse(0.25) == pytest.approx(0.25, rel=1e-15)

    def test_above_top(self):
        with pytest.raises(DomainError):
            LogPower(2).inverse(0.1)
        with pytest.raises(DomainError):
            Power(-1).inverse(0.0)

    def test_round_trip(self, rng):
        s = rng.uniform(1e-6, 1, 10_000)
        for F in TRANSFORMS:
            back = np.array([F.inverse(F.eval(v)) for v in s])
            assert np.max(np.abs(back - s) / s) <= 1e-12, F.name

    @given(st.floats(min_value=-50, max_value=0))
    def test_generalised_inverse_positive_p(self, y):
        # F_p(s) = s^p / p > 0 for p > 0, so every y <= 0 maps to s = 0
        assert Power(2).inverse(y) == 0.0


class TestPowerMean:
    def test_examples(self):
        assert power_mean(2, 4, 0.5, 1) == pytest.approx(3)
        for g in (-3, -1, 0, 0.5, 2):
            assert power_mean(0.7, 0.7, 0.3, g) == pytest.approx(0.7, rel=1e-14)
        assert power_mean(2, 8, 0.5, 0) == pytest.approx(4)

    def test_domain(self):
        with pytest.raises(DomainError):
            power_mean(0, 1, 0.5, 1)
        with pytest.raises(DomainError):
            power_mean(1, 1, 1.5, 1)

    @given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0, 1),
           st.floats(-4, 4), st.floats(0, 3))
    def test_bounds_and_monotone(self, a, b, mu, g, dg):
        m = power_mean(a, b, mu, g)
        assert min(a, b) * (1 - 1e-12) <= m <= max(a, b) * (1 + 1e-12)
        assert power_mean(a, b, mu, g + dg) >= m * (1 - 1e-12)

    def test_jensen_for_alpha_at_least_one(self, rng):
        a, b, mu = rng.uniform(0.01, 1, 10_000), rng.uniform(0.01, 1, 10_000), rng.uniform(0, 1, 10_000)
        for alpha in (1, 1.3, 2, 5):
            assert np.all(power_mean(a, b, mu, 1 / alpha)
                          >= power_mean(a, b, mu, (1 - alpha) / alpha) * (1 - 1e-12))


def _psi_sample(rng, n):
    k = rng.uniform(0.01, 1, n)
    a = rng.uniform(0.01, 0.999, n) * np.minimum(1, 1 / k)
    b = rng.uniform(0.01, 0.999, n) * np.minimum(1, 1 / k)
    return k, np.minimum(a, 1), np.minimum(b, 1), rng.uniform(0, 1, n)


class TestPsi:
    def test_against_high_precision(self, oracle):
        for rec in oracle["psi"]:
            args = rec["args"]
            assert psi(*args) == pytest.approx(rec["psi"], rel=1e-12)
            assert psi_prime(*args) == pytest.approx(rec["psi_prime"], rel=1e-9, abs=1e-14)

    def test_equal_arguments(self):
        for k in (0.1, 0.5, 1.0):
            assert psi(k, 0.4, 0.4, 0.3, 2.0) == pytest.approx(0.4, rel=1e-13)

    @pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
    def test_nonnegative(self, rng, alpha):
        d = psi_prime(*_psi_sample(rng, 10_000), alpha)
        assert d.min() >= -1e-12

    @pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
    def test_finite_differences(self, rng, alpha):
        k, a, b, mu = _psi_sample(rng, 2000)
        k = np.clip(k, 2e-6, None)
        a, b = a * 0.999, b * 0.999
        h = 1e-6
        fd = (psi(k + h, a, b, mu, alpha) - psi(k - h, a, b, mu, alpha)) / (2 * h)
        d = psi_prime(k, a, b, mu, alpha)
        scale = np.abs(d) + psi(k, a, b, mu, alpha) / k
        assert np.max(np.abs(fd - d) / scale) <= 1e-5

    def test_domain(self):
        with pytest.raises(DomainError):
            psi(0.5, 1.5, 0.5, 0.5, 2.0)
        with pytest.raises(DomainError):
            psi(1.0, 0.0, 0.5, 0.5, 2.0)
        with pytest.raises(DomainError):
            psi_prime(1.0, 1.0, 0.5, 0.5, 2.0)


class TestWeakCounterexample:
    def test_positive_example(self):
        assert weak_counterexample_curvature(0.5, 0.5, 1.0) > 0

    def test_against_high_precision(self, oracle):
        for rec in oracle["weak_curvature"]:
            assert weak_counterexample_curvature(*rec["args"]) == pytest.approx(rec["value"],
                                                                                rel=1e-9)

    def test_vanishes_as_kappa_to_one(self):
        vals = [weak_counterexample_curvature(0.5, 1 - 10.0**-k, 1.0) for k in (2, 4, 6, 8)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-7

    def test_positive_on_random_tuples(self, rng):
        n = 10_000
        v = weak_counterexample_curvature(rng.uniform(0.01, 0.99, n), rng.uniform(0.01, 0.99, n),
                                          rng.uniform(0.01, 10, n))
        assert v.min() > 0

    def test_finite_differences(self, rng):
        def prof(alpha, kappa, r):
            return -((-np.log(kappa) + r**alpha) ** (1 / alpha))

        for alpha, kappa, r in zip(rng.uniform(0.2, 0.8, 50), rng.uniform(0.05, 0.9, 50),
                                   rng.uniform(0.3, 3, 50)):
            h = 1e-4 * r
            fd = (prof(alpha, kappa, r + h) - 2 * prof(alpha, kappa, r) + prof(alpha, kappa, r - h)) / h**2
            cf = weak_counterexample_curvature(alpha, kappa, r)
            assert abs(fd - cf) <= 1e-4 * abs(cf)

    def test_domain(self):
        for args in ((1.0, 0.5, 1.0), (0.5, 1.0, 1.0), (0.5, 0.5, 0.0)):
            with pytest.raises(DomainError):
                weak_counterexample_curvature(*args)


class TestBridge:
    def test_convex_below_inflection(self):
        v = logpower_bridge_convexity(1, 2, math.exp(-2))
        assert v.convex and v.witness is None
        assert v.s_pass == pytest.approx(math.exp(-2))

    def test_log_is_convex(self):
        assert logpower_bridge_convexity(2, 1, 0.999).convex

    def test_witness_matches_inflection(self, oracle):
        for rec in oracle["bridge_inflection"]:
            if rec["alpha"] <= 1:
                continue
            v = logpower_bridge_convexity(rec["p"], rec["alpha"], 0.999, n=4000)
            assert not v.convex
            # the first violating sample sits just above the inflection point
            assert rec["s_star"] <= v.witness <= rec["s_star"] * 1.02
            assert v.s_pass <= rec["s_star"]

    def test_second_derivative_sign(self, oracle):
        for rec in oracle["bridge_second_derivative"]:
            s_star = math.exp(-(rec["alpha"] - 1) / rec["alpha"])
            assert (rec["value"] >= 0) == (rec["s"] <= s_star)

    def test_domain(self):
        with pytest.raises(DomainError):
            logpower_bridge_convexity(1, 2, 1.0)
        with pytest.raises(DomainError):
            logpower_bridge_convexity(-1, 2, 0.5)


class TestIns:
    @pytest.mark.parametrize("gamma", [0.5, 0.6, 0.75, 1.0])
    def test_convex_range(self, gamma):
        v = ins_scalar_convexity(gamma)
        assert v.convex and v.witness is None

    @pytest.mark.parametrize("gamma", [0.3, 0.4, 0.45])
    def test_witness_range(self, gamma, oracle):
        v = ins_scalar_convexity(gamma)
        assert not v.convex
        r_star = next(r["r_star"] for r in oracle["ins"] if r["gamma"] == gamma)
        # nonconvexity lives at r = -s > r_star
        assert -v.witness > r_star

    def test_oracle_signs(self, oracle):
        for rec in oracle["ins"]:
            assert rec["phi2_at_minus3"] < 0
        for rec in oracle["ins_convex_phi2"]:
            assert rec["value"] >= -1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            ins_scalar_convexity(0.0)
        with pytest.raises(DomainError):
            ins_scalar_convexity(1.2)
        with pytest.raises(DomainError):
            ins_scalar_convexity(0.5, s=[-1.0, 0.5, 1.0])
