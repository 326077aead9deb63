import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logconheat.certify import (CERTIFIED, VIOLATED, KappaInfeasibleError, Witness,
                                alpha_logconcave, check_F_concave, default_kappa_schedule,
                                default_triples, dyadic_triples, exhaustive_triples,
                                find_violation, hull_triples, inclusion_suite, kappa_threshold,
                                p_concave, quasiconcave, random_triples, reverify)
from logconheat.grid import ConvexDomain, Grid, SampledFunction, gauss_kernel, indicator, sample
from logconheat.transforms import LogPower, Power

G1 = Grid.centered(4.0, 1 / 16)
WIDE = Grid.centered(20.0, 1 / 8)


def gauss(t=1.0, grid=WIDE):
    return sample(lambda x: gauss_kernel(x, t), grid)


def two_bump(grid=G1):
    return sample(lambda x: ((np.abs(x) >= 1) & (np.abs(x) <= 2)).astype(float), grid)


def sampled_triples(u, seed=0, budget=20_000):
    """The non-exhaustive policy used on large grids."""
    return dyadic_triples(u.grid) | hull_triples(u) | random_triples(u.grid, budget, seed)


class TestTripleSets:
    @pytest.mark.parametrize("grid", [Grid.centered(1.0, 0.25), Grid.centered(1.0, 0.5, dim=2)])
    def test_alignment(self, grid):
        for ts in (exhaustive_triples(grid), dyadic_triples(grid), random_triples(grid, 500, 3)):
            shape = ts.shape
            x, z, y = (np.array(np.unravel_index(a, shape)).T for a in (ts.x, ts.z, ts.y))
            np.testing.assert_allclose((1 - ts.mu)[:, None] * x + ts.mu[:, None] * y, z,
                                       atol=1e-9)
            assert np.all((ts.mu > 0) & (ts.mu < 1))

    def test_exhaustive_count(self):
        # padded n = 7 points: sum over pairs of (gap - 1) = C(7, 3)
        assert len(exhaustive_triples(Grid.centered(1.0, 0.5))) == math.comb(7, 3)

    def test_exhaustive_limit(self):
        with pytest.raises(ValueError):
            exhaustive_triples(Grid.centered(10.0, 1 / 64), limit=1000)

    def test_random_is_seeded(self):
        a, b = random_triples(G1, 1000, 7), random_triples(G1, 1000, 7)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.mu, b.mu)
        assert not np.array_equal(a.x, random_triples(G1, 1000, 8).x)

    def test_union_checks_grid(self):
        with pytest.raises(ValueError):
            dyadic_triples(G1) | dyadic_triples(WIDE)

    def test_hull_triples_cover_holes(self):
        u = two_bump()
        pos = np.flatnonzero(u.values)
        ts = hull_triples(u)
        assert len(ts) == int((u.values[pos[0]:pos[-1] + 1] == 0).sum()) > 0


class TestCheckExamples:
    def test_indicator_certified_for_any_F(self):
        u = indicator(ConvexDomain.interval(-1, 1), G1)
        for F in (LogPower(0.5), LogPower(2), LogPower(5), Power(-3), Power(1), Power(2)):
            for kappa in (1.0, 0.3, 1e-3):
                assert check_F_concave(u, F, kappa).certified

    def test_two_bump_support_violation(self):
        u = two_bump()
        rep = check_F_concave(u, LogPower(2), 1.0)
        assert rep.verdict == VIOLATED
        assert rep.witness.kind == "support" and rep.witness.gap == -math.inf
        # the midpoint witness through the gap is equally bad
        w = Witness((-1.5,), (1.5,), 0.5, -math.inf, "support")
        assert reverify(u, LogPower(2), 1.0, w) == -math.inf

    def test_gaussian_at_closed_form_kappa(self):
        kappa = math.sqrt(4 * math.pi) / math.e
        rep = check_F_concave(gauss(), LogPower(2), kappa, tol=1e-10)
        assert rep.certified and rep.witness is None

    def test_kappa_infeasible(self):
        with pytest.raises(KappaInfeasibleError):
            check_F_concave(sample(lambda x: 2 * np.exp(-x**2), G1), LogPower(1), 0.6)
        with pytest.raises(ValueError):
            check_F_concave(gauss(), LogPower(1), 0.0)

    def test_foreign_triples(self):
        with pytest.raises(ValueError):
            check_F_concave(gauss(), LogPower(1), 1.0, dyadic_triples(G1))

    def test_report_json(self):
        rep = check_F_concave(two_bump(), LogPower(2), 1.0)
        d = json.loads(rep.to_json())
        assert set(d) == {"verdict", "transform", "alpha_or_p", "kappa", "tol", "witness",
                          "triples_checked", "seed"}
        assert d["witness"]["gap"] == "-inf"


class TestSweeps:
    def test_l15_concave_certified_everywhere(self):
        # L_1.5(u) = -(1 + x^2) concave, i.e. u = exp(-(1 + x^2)^1.5)
        u = sample(lambda x: np.exp(-(1 + x**2) ** 1.5), G1)
        sweep = kappa_threshold(u, LogPower(1.5))
        assert sweep.all_certified and sweep.kappa_monotone
        assert sweep.kappa_threshold == default_kappa_schedule(u)[0]

    def test_sqrt_profile_only_kappa_one(self):
        u = sample(lambda x: np.exp(-np.sqrt(np.abs(x))), Grid.centered(4.0, 1 / 16))
        sweep = kappa_threshold(u, LogPower(0.5), tol=1e-9)
        verdicts = [r.certified for r in sweep.reports]
        assert verdicts[0] and not any(verdicts[1:])

    def test_gaussian_logpower3_violated_everywhere(self, oracle):
        u = gauss()
        sweep = kappa_threshold(u, LogPower(3))
        assert sweep.all_violated
        for r in sweep.reports:
            assert r.witness.gap < -1e-6
        assert sweep.tail_start is None and sweep.kappa_threshold is None

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            kappa_threshold(gauss(), LogPower(1), schedule=[])
        with pytest.raises(ValueError):
            kappa_threshold(gauss(), LogPower(1), schedule=[0.1, 0.2])
        with pytest.raises(ValueError):
            default_kappa_schedule(SampledFunction(G1, np.zeros(G1.size)))

    def test_wrappers(self):
        u = sample(lambda x: np.exp(-(1 + np.abs(x)) ** 2), G1)
        assert alpha_logconcave(u, 2).certified
        assert p_concave(u, -1).certified
        hat = sample(lambda x: np.maximum(0, 1 - np.abs(x) / 3), G1)
        for alpha in (1, 2):
            assert alpha_logconcave(hat, alpha).certified


class TestFindViolation:
    def test_gaussian_logpower3(self, oracle):
        u = gauss()
        kappa = 0.1 * math.sqrt(4 * math.pi)
        w = find_violation(u, LogPower(3), kappa)
        assert w is not None and w.gap < -1e-6
        assert reverify(u, LogPower(3), kappa, w) < -1e-6
        # the violation sits outside the concavity ball of the profile
        rho2 = next(r["rho2"] for r in oracle["gauss_L3_threshold"] if r["t"] == 1.0)
        assert max(abs(w.x[0]), abs(w.y[0])) ** 2 > rho2

    def test_concave_hat(self):
        hat = sample(lambda x: np.maximum(0, 1 - np.abs(x) / 3), G1)
        assert find_violation(hat, Power(1), 1.0, budget=100_000) is None

    def test_deterministic(self):
        u = gauss()
        a = find_violation(u, LogPower(3), 0.5, budget=5000, seed=4)
        b = find_violation(u, LogPower(3), 0.5, budget=5000, seed=4)
        assert a == b


class TestQuasiconcavity:
    def test_convex_indicator(self):
        assert quasiconcave(indicator(ConvexDomain.interval(-1, 1), G1))
        g2 = Grid.centered(2.0, 0.25, dim=2)
        assert quasiconcave(indicator(ConvexDomain.ball((0, 0), 1.5), g2))

    def test_two_bump(self):
        res = quasiconcave(two_bump())
        assert not res and res.level == 1.0
        x, z, y = res.witness
        assert x < z < y

    def test_two_bump_2d(self):
        g2 = Grid.centered(3.0, 0.25, dim=2)
        u = sample(lambda x, y: ((np.abs(x) >= 1) & (np.abs(x) <= 2) & (np.abs(y) < 1))
                   .astype(float), g2)
        assert not quasiconcave(u)

    @given(st.integers(0, 2**32 - 1))
    def test_certified_implies_quasiconcave(self, seed):
        rng = np.random.default_rng(seed)
        grid = Grid.centered(1.0, 0.25)
        u = SampledFunction(grid, rng.uniform(0, 1, grid.size) * (rng.random(grid.size) < 0.8))
        if u.sup_bound == 0:
            return
        if check_F_concave(u, LogPower(1), 1 / u.sup_bound).certified:
            assert quasiconcave(u)


class TestInclusion:
    def test_gaussian(self):
        rep = inclusion_suite(gauss())
        # a Gaussian is not concave; everything from LogPower(2) down holds
        assert rep.certified == (False, True, True, True, True, True) and rep.monotone
        assert not alpha_logconcave(gauss(), 2.5).certified

    def test_indicator(self):
        assert all(inclusion_suite(indicator(ConvexDomain.interval(-1, 1), G1)).certified)

    def test_two_bump(self):
        rep = inclusion_suite(two_bump())
        assert not any(rep.certified) and rep.monotone
        assert rep.to_dict()["ladder"][0] == "Power(1)"


class TestSoundness:
    @settings(max_examples=40)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([0.5, 1.0, 2.0, 3.0]))
    def test_witnesses_reverify(self, seed, alpha):
        rng = np.random.default_rng(seed)
        grid = Grid.centered(2.0, 0.125)
        u = SampledFunction(grid, rng.uniform(0, 1, grid.size) ** 3)
        F = LogPower(alpha)
        kappa = min(1.0, 1 / u.sup_bound) * rng.uniform(0.01, 1)
        rep = check_F_concave(u, F, kappa, tol=1e-9)
        if rep.verdict == VIOLATED:
            assert reverify(u, F, kappa, rep.witness) < -1e-9
        else:
            assert rep.witness is None

    @pytest.mark.parametrize("n", [3, 5, 8, 13, 21, 34, 55, 64])
    def test_exhaustive_matches_sampled(self, n):
        grid = Grid((-1.0,), 2.0 / (n - 1), (n,))
        x = grid.axes()[0]
        funcs = [np.exp(-x**2), np.exp(-(1 + np.abs(x)) ** 2), np.exp(-np.abs(x) ** 3),
                 np.maximum(0, 1 - np.abs(x)), (np.abs(x) > 0.5).astype(float),
                 np.exp(-np.sqrt(np.abs(x))), 1 + 0 * x, np.exp(-(x - 0.3) ** 4 * 5)]
        for vals in funcs:
            u = SampledFunction(grid, vals)
            ex = exhaustive_triples(grid)
            st_ = sampled_triples(u)
            for F in (LogPower(1), LogPower(2), LogPower(3), LogPower(0.5), Power(1), Power(-1)):
                for kappa in default_kappa_schedule(u, 6):
                    a = check_F_concave(u, F, kappa, ex, tol=1e-9)
                    b = check_F_concave(u, F, kappa, st_, tol=1e-9)
                    assert a.verdict == b.verdict, (n, F.name, kappa)

    def test_alpha_monotone_on_fixed_triples(self, rng):
        ts = default_triples(gauss(0.5))
        for _ in range(20):
            u = SampledFunction(WIDE, np.exp(-np.abs(WIDE.axes()[0]) ** rng.uniform(1, 3)))
            ts = default_triples(u)
            for kappa in (1.0, 0.1, 1e-3):
                verdicts = [check_F_concave(u, LogPower(a), kappa, ts).certified
                            for a in (0.5, 1, 1.5, 2, 3)]
                # certified at beta implies certified at every alpha <= beta
                assert verdicts == sorted(verdicts, reverse=True)

    def test_kappa_monotone_for_alpha_at_least_one(self, rng):
        for _ in range(10):
            vals = np.exp(-np.abs(G1.axes()[0]) ** rng.uniform(1, 3)) * rng.uniform(0.2, 1)
            u = SampledFunction(G1, vals)
            for alpha in (1, 1.5, 2):
                assert kappa_threshold(u, LogPower(alpha)).kappa_monotone

    def test_byte_identical_across_workers(self):
        u = two_bump(Grid.centered(4.0, 1 / 64))
        ts = default_triples(u, seed=3, budget=200_000)
        from logconheat import certify

        outs = set()
        for n_jobs in (1, 2, 4):
            for chunk in (1 << 20, 997):
                vals, bottom = certify._transform_values(u, LogPower(2), 0.9)
                outs.add(certify._best(vals, bottom, ts, 1e-9, n_jobs, chunk))
            outs.add(check_F_concave(u, LogPower(2), 0.9, ts, n_jobs=n_jobs).to_json())
        assert len(outs) == 2  # one reduction tuple, one serialised report
