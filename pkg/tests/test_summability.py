import math

import numpy as np
import pytest

from vilenkin.basis import CylinderGrid1D, character_row, random_grid_1d
from vilenkin.group import GroupPoint, ModulusSequence
from vilenkin.summability import (
    BudgetExceededError,
    CylinderGrid2D,
    forward_transform_2d,
    fridli_schipp_mean_1d,
    gauge_dominates,
    glukhov_integral,
    glukhov_ratio,
    inverse_transform_2d,
    marginal_sum_1,
    marginal_sum_2,
    parse_gauge,
    power_gauge,
    power_mean_block,
    random_grid_2d,
    rect_partial_sum,
    sqrt_gauge,
    strong_mean_2d,
    strong_mean_table,
    zero_gauge,
)

MS = ModulusSequence((2, 3, 2, 3))
SIZE = 36
SCALES = MS.number_system.scales


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(7)


def tensor_mode(a: int, b: int) -> CylinderGrid2D:
    """f(x, y) = psi_a(x) psi_b(y)."""
    return CylinderGrid2D(
        MS, 4, np.outer(character_row(MS, 4, a), character_row(MS, 4, b))
    )


class TestRectPartialSums:
    def test_full_band_identity(self, rng):
        f = random_grid_2d(MS, 4, rng)
        s = rect_partial_sum(f, SIZE, SIZE)
        assert np.max(np.abs(s.values - f.values)) < 1e-10

    def test_tensor_mode_kept_or_killed(self):
        f = tensor_mode(5, 11)
        kept = rect_partial_sum(f, 6, 12)
        killed = rect_partial_sum(f, 5, 12)
        assert np.max(np.abs(kept.values - f.values)) < 1e-10
        assert np.max(np.abs(killed.values)) < 1e-10

    def test_ladder_contraction(self, rng):
        f = random_grid_2d(MS, 4, rng)
        for L in range(5):
            for R in range(5):
                s = rect_partial_sum(f, SCALES[L], SCALES[R])
                assert s.sup_norm <= f.sup_norm + 1e-10

    def test_round_trip_2d(self, rng):
        f = random_grid_2d(MS, 4, rng)
        back = inverse_transform_2d(forward_transform_2d(f))
        assert np.max(np.abs(back.values - f.values)) < 1e-10

    def test_parseval_2d(self, rng):
        f = random_grid_2d(MS, 4, rng)
        co = forward_transform_2d(f).coeffs
        assert np.sum(np.abs(co) ** 2) == pytest.approx(
            np.sum(np.abs(f.values) ** 2) / SIZE**2, abs=1e-10
        )


class TestMarginalSums:
    def test_composition_identity(self, rng):
        f = random_grid_2d(MS, 4, rng)
        for L in range(5):
            for R in range(5):
                lhs = marginal_sum_1(marginal_sum_2(f, SCALES[R]), SCALES[L])
                rhs = rect_partial_sum(f, SCALES[L], SCALES[R])
                assert np.max(np.abs(lhs.values - rhs.values)) < 1e-10

    def test_full_order_is_identity(self, rng):
        f = random_grid_2d(MS, 4, rng)
        assert np.max(np.abs(marginal_sum_1(f, SIZE).values - f.values)) < 1e-10
        assert np.max(np.abs(marginal_sum_2(f, SIZE).values - f.values)) < 1e-10

    def test_constant_in_x(self):
        row = character_row(MS, 4, 3)
        f = CylinderGrid2D(MS, 4, np.tile(row, (SIZE, 1)))  # depends on y only
        s = marginal_sum_1(f, 1)
        assert np.max(np.abs(s.values - f.values)) < 1e-10


class TestStrongMeans:
    def test_constant_function_mean_zero(self):
        f = CylinderGrid2D(MS, 4, np.full((SIZE, SIZE), 2.0 + 1j))
        res = strong_mean_2d(f, 5, 7, sqrt_gauge(1.0))
        assert res.value < 1e-7  # sqrt amplifies float noise in |S - f|
        assert not res.overflowed

    def test_single_rejected_mode(self):
        f = tensor_mode(1, 1)
        res = strong_mean_2d(f, 1, 1, sqrt_gauge(2.0))
        # S_11 f = 0, |f| = 1 everywhere, so the mean is e^(2*sqrt(1)) - 1
        assert res.value == pytest.approx(math.expm1(2.0), abs=1e-9)

    def test_zero_gauge_gives_zero(self, rng):
        f = random_grid_2d(MS, 4, rng)
        assert strong_mean_2d(f, 9, 4, zero_gauge()).value == 0.0

    def test_monotone_in_gauge(self, rng):
        f = random_grid_2d(MS, 4, rng)
        lo = strong_mean_2d(f, 6, 6, sqrt_gauge(0.5)).value
        hi = strong_mean_2d(f, 6, 6, sqrt_gauge(1.5)).value
        assert lo <= hi + 1e-12

    def test_decreasing_trend_for_smooth_grid(self, rng):
        base = random_grid_2d(MS, 2, rng)
        f = base.refine(4)
        table = strong_mean_table(f, [(2, 2), (SIZE, SIZE)], sqrt_gauge(1.0))
        assert table[(SIZE, SIZE)].value < table[(2, 2)].value

    def test_overflow_sentinel(self):
        f = tensor_mode(1, 1)
        res = strong_mean_2d(f, 1, 1, power_gauge(1000.0, 1.0))
        assert res.overflowed and res.value == math.inf

    def test_fridli_schipp_zero_function(self):
        f = CylinderGrid1D(MS, 4, np.zeros(SIZE))
        assert fridli_schipp_mean_1d(f, 5, sqrt_gauge(1.0)).value < 1e-12

    def test_fridli_schipp_single_mode(self):
        f = CylinderGrid1D(MS, 4, character_row(MS, 4, 1))
        res = fridli_schipp_mean_1d(f, 1, power_gauge(3.0, 1.0))
        assert res.value == pytest.approx(3.0, abs=1e-10)  # gauge(|0 - psi_1|) = gauge(1)

    def test_fridli_schipp_converges_for_smooth(self, rng):
        f = random_grid_1d(MS, 2, rng).refine(4)
        lo = fridli_schipp_mean_1d(f, SIZE, sqrt_gauge(1.0)).value
        hi = fridli_schipp_mean_1d(f, 2, sqrt_gauge(1.0)).value
        assert lo < hi


class TestPowerMeans:
    def test_constant_function(self):
        # S_nl(const) = const, so the mean is
        # ((m_A - 1) M_A (m_B - 1) M_B / (M_A M_B))^(1/p)
        f = CylinderGrid2D(MS, 4, np.ones((SIZE, SIZE)))
        for p in (1.0, 2.0):
            res = power_mean_block(f, 1, 1, p)
            assert res.sup == pytest.approx(4.0 ** (1.0 / p), abs=1e-9)

    def test_normalized_monotone_in_p(self, rng):
        # the true cellwise average (avg |S|^p)^(1/p) is nondecreasing in p
        f = random_grid_2d(MS, 4, rng)
        for A, B in ((0, 0), (1, 2)):
            count = (SCALES[A + 1] - SCALES[A]) * (SCALES[B + 1] - SCALES[B])
            norm = SCALES[A] * SCALES[B] / count
            lo = power_mean_block(f, A, B, 2.0).values
            hi = power_mean_block(f, A, B, 3.0).values
            lo_avg = (lo**2.0 * norm) ** (1 / 2.0)
            hi_avg = (hi**3.0 * norm) ** (1 / 3.0)
            assert np.all(lo_avg <= hi_avg + 1e-10)

    def test_p2_matches_direct_accumulation(self, rng):
        # oracle: accumulate |S_nl|^2 from explicitly truncated spectra
        ms = ModulusSequence((2, 3))
        f = random_grid_2d(ms, 2, rng)
        co = forward_transform_2d(f).coeffs
        psi = np.array([character_row(ms, 2, n) for n in range(6)])
        A, B = 1, 0
        sc = ms.number_system.scales
        acc = np.zeros((6, 6))
        for n in range(sc[A], sc[A + 1]):
            for l in range(sc[B], sc[B + 1]):
                s_nl = psi[:n].T @ co[:n, :l] @ psi[:l]
                acc += np.abs(s_nl) ** 2
        oracle = np.sqrt(acc / (sc[A] * sc[B]))
        res = power_mean_block(f, A, B, 2.0)
        assert np.max(np.abs(res.values - oracle)) < 1e-10

    def test_bad_exponent(self, rng):
        f = random_grid_2d(MS, 4, rng)
        with pytest.raises(ValueError):
            power_mean_block(f, 0, 0, 0.0)


class TestGlukhov:
    def test_single_factor_hand_value(self):
        # p=1, n=0, m == 2: (1/1) * integral |D_2 - D_1| = integral |psi_1| = 1
        ms = ModulusSequence((2, 2, 2))
        assert glukhov_integral(1, 0, ms) == pytest.approx(1.0, abs=1e-12)

    def test_single_factor_direct_oracle(self):
        ms = ModulusSequence((2, 3, 2))
        n = 1
        sc = ms.number_system.scales
        acc = np.zeros(ms.order, dtype=complex)
        from vilenkin.basis import dirichlet_direct
        for l in range(sc[n], sc[n + 1]):
            for idx in range(ms.order):
                acc[idx] += dirichlet_direct(l, GroupPoint.from_index(ms, idx))
        oracle = float(np.mean(np.abs(acc))) / sc[n]
        assert glukhov_integral(1, n, ms) == pytest.approx(oracle, abs=1e-10)

    def test_ratio_stable_over_blocks(self):
        ms = ModulusSequence((2,) * 5)
        for p in (1, 2):
            ratios = [glukhov_ratio(p, n, ms) for n in range(4)]
            assert all(math.isfinite(r) for r in ratios)
            assert max(ratios) <= 10.0

    def test_budget_refusal(self):
        ms = ModulusSequence((2,) * 10)
        with pytest.raises(BudgetExceededError):
            glukhov_integral(3, 0, ms, cell_budget=10**6)


class TestGaugeTools:
    def test_sqrt_dominated_by_linear(self):
        rep = gauge_dominates(sqrt_gauge(1.0), power_gauge(1.0, 1.0), 1e6)
        assert rep.dominated

    def test_identity_ratio_one(self):
        g = power_gauge(2.0, 1.3)
        rep = gauge_dominates(g, g, 1e6)
        assert rep.dominated and rep.limsup_estimate == pytest.approx(1.0)

    def test_linear_not_dominated_by_sqrt(self):
        rep = gauge_dominates(power_gauge(1.0, 1.0), sqrt_gauge(1.0), 1e6)
        assert not rep.dominated

    def test_parse_gauge_specs(self):
        assert parse_gauge("zero")(3.0) == 0.0
        assert parse_gauge("pow:1.5")(4.0) == pytest.approx(8.0)
        assert parse_gauge("pow:2,A=3")(2.0) == pytest.approx(12.0)
        assert parse_gauge("exp-sqrt:A=2")(9.0) == pytest.approx(6.0)

    def test_class_psi_membership(self):
        assert power_gauge(1.0, 1.5).is_class_psi()
        assert zero_gauge()(0.0) == 0.0
