import numpy as np
import pytest

from synthvol import (
    BlockCountMismatch,
    DomainError,
    LossTriple,
    NonpositiveGroundTruth,
    NonpositiveInput,
    RVConfig,
    ape_loss,
    intraday_block_returns,
    loss_triple,
    mse_loss,
    ql_advantage,
    ql_loss,
    realized_volatility,
)


class TestRealizedVolatility:
    def test_constant_blocks(self):
        c = 0.013
        rv = realized_volatility(np.full((1, 77), c), RVConfig(K=1, m=77))
        assert rv == pytest.approx(77 * c * c, rel=1e-14)

    def test_two_day_averaging(self):
        rng = np.random.default_rng(0)
        days = rng.standard_normal((2, 77)) * 0.01
        s1, s2 = ((days[i] ** 2).sum() for i in range(2))
        rv = realized_volatility(days, RVConfig(K=2, m=77))
        assert rv == pytest.approx((s1 + s2) / 2, rel=1e-12)

    def test_first_block_drop(self):
        day = np.arange(1.0, 79.0) * 1e-3
        with_drop = realized_volatility(day, RVConfig(K=1, m=77, drop_first_block=True))
        manual = float(np.sum(day[1:] ** 2))
        assert with_drop == pytest.approx(manual, rel=1e-14)

    def test_block_count_mismatch(self):
        with pytest.raises(BlockCountMismatch):
            realized_volatility(np.zeros((1, 70)), RVConfig(K=1, m=77))
        with pytest.raises(BlockCountMismatch):
            realized_volatility(np.zeros((3, 77)), RVConfig(K=2, m=77))

    def test_expectation_mu2_over_m_plus_delta2(self):
        # Blocks ~ N(mu/m, delta^2/m) so the daily return is N(mu, delta^2);
        # E[RV] = mu^2/m + delta^2, checked within 2 standard errors.
        rng = np.random.default_rng(123)
        mu, delta, m, days = 0.4, 1.3, 77, 3000
        blocks = rng.normal(mu / m, delta / np.sqrt(m), size=(days, m))
        rvs = np.array([realized_volatility(b, RVConfig(K=1, m=m)) for b in blocks])
        want = mu**2 / m + delta**2
        se = rvs.std(ddof=1) / np.sqrt(days)
        assert abs(rvs.mean() - want) < 2 * se


class TestIntradayBlocks:
    def _make_day(self, date, log_prices):
        # Ticks exactly on the 5-minute grid 9:35..16:00 (78 points).
        stamps = []
        minutes = 9 * 60 + 35
        for i in range(78):
            h, m = divmod(minutes + 5 * i, 60)
            stamps.append(f"{date}T{h:02d}:{m:02d}:00")
        return stamps, np.exp(log_prices)

    def test_grid_produces_77_blocks(self):
        rng = np.random.default_rng(1)
        logp = np.cumsum(rng.standard_normal(78) * 1e-3) + 4.0
        stamps, prices = self._make_day("2016-11-09", logp)
        blocks = intraday_block_returns(stamps, prices)
        assert blocks.shape == (1, 77)
        np.testing.assert_allclose(blocks[0], np.diff(logp), rtol=1e-12)

    def test_price_path_matches_precomputed_blocks(self):
        rng = np.random.default_rng(2)
        logp = np.cumsum(rng.standard_normal(78) * 2e-3) + 3.0
        stamps, prices = self._make_day("2020-03-02", logp)
        blocks = intraday_block_returns(stamps, prices)
        rv_blocks = realized_volatility(np.diff(logp), RVConfig(K=1, m=77))
        rv_prices = realized_volatility(blocks, RVConfig(K=1, m=77))
        assert rv_prices == pytest.approx(rv_blocks, abs=1e-12)

    def test_last_tick_before_boundary(self):
        # Off-grid ticks: the last tick at or before each boundary is used.
        stamps = ["2021-01-04T09:31:00"]
        prices = [100.0]
        for i in range(77):
            h, m = divmod(9 * 60 + 37 + 5 * i, 60)
            stamps.append(f"2021-01-04T{h:02d}:{m:02d}:30")
            prices.append(100.0 + i * 0.1)
        blocks = intraday_block_returns(stamps, np.array(prices))
        assert blocks.shape == (1, 77)

    def test_missing_block_is_hard_error(self):
        stamps = ["2021-01-04T12:00:00", "2021-01-04T15:59:00"]
        with pytest.raises(BlockCountMismatch):
            intraday_block_returns(stamps, np.array([10.0, 10.5]))


class TestLosses:
    def test_ql_examples(self):
        assert ql_loss(2.0, 1.0) == pytest.approx(0.193147, abs=1e-6)
        assert ql_loss(1.0, 2.0) == pytest.approx(0.306853, abs=1e-6)
        assert ql_loss(3.3, 3.3) == 0.0

    def test_mse_ape_examples(self):
        assert mse_loss(3.0, 1.0) == 4.0
        assert ape_loss(3.0, 1.0) == 2.0
        assert mse_loss(1.0, 1.0) == 0.0
        assert ape_loss(1.0, 1.0) == 0.0
        assert mse_loss(0.5, 2.0) == pytest.approx(2.25)
        assert ape_loss(0.5, 2.0) == pytest.approx(0.75)

    def test_ql_nonnegative_zero_only_at_equality(self):
        rng = np.random.default_rng(11)
        p = np.exp(rng.uniform(-2, 2, size=20000))
        g = np.exp(rng.uniform(-2, 2, size=20000))
        losses = ql_loss(p, g)
        assert np.all(losses >= 0)
        apart = np.abs(p - g) > 1e-6
        assert np.all(losses[apart] > 0)
        np.testing.assert_array_equal(ql_loss(p, p), 0.0)

    def test_loss_difference_identity(self):
        # QL(u, gt) - QL(a, gt) == gt (a - u) / (a u) + log(u / a)
        rng = np.random.default_rng(4)
        for _ in range(1000):
            u, a, gt = np.exp(rng.uniform(-1.5, 1.5, size=3))
            lhs = ql_loss(u, gt) - ql_loss(a, gt)
            rhs = gt * (a - u) / (a * u) + np.log(u / a)
            assert abs(lhs - rhs) < 1e-12

    def test_nonpositive_inputs_raise(self):
        with pytest.raises(NonpositiveInput):
            ql_loss(0.0, 1.0)
        with pytest.raises(NonpositiveInput):
            ql_loss(1.0, -1.0)
        with pytest.raises(NonpositiveGroundTruth):
            ape_loss(1.0, 0.0)

    def test_loss_triple(self):
        lt = loss_triple(2.0, 1.0)
        assert isinstance(lt, LossTriple)
        assert lt.mse == 1.0
        assert lt.ape == 1.0
        assert lt.ql == pytest.approx(0.193147, abs=1e-6)


class TestQlAdvantage:
    def test_zero_at_origin(self):
        assert ql_advantage(0.0, 5.0) == 0.0

    def test_hand_values(self):
        assert ql_advantage(1.0, 2.0) == pytest.approx(0.306853, abs=1e-6)
        assert ql_advantage(-1.0, 1.0) == pytest.approx(0.193147, abs=1e-6)

    def test_nonnegative_on_domain(self):
        rng = np.random.default_rng(8)
        sigma2 = 2.5
        xs = rng.uniform(-5 * sigma2, 0.99 * sigma2, size=5000)
        vals = np.array([ql_advantage(x, sigma2) for x in xs])
        assert np.all(vals >= 0)

    def test_convex_on_grid(self):
        # g''(x) = (sigma2 + x) / (sigma2 - x)^3, so convexity holds on
        # (-sigma2, sigma2); outside that the function stays nonnegative
        # but turns concave.
        sigma2 = 3.0
        grid = np.linspace(-0.99 * sigma2, 0.95 * sigma2, 2001)
        vals = np.array([ql_advantage(x, sigma2) for x in grid])
        second = np.diff(vals, 2)
        assert np.all(second >= -1e-9)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            ql_advantage(2.0, 2.0)
        with pytest.raises(DomainError):
            ql_advantage(0.0, -1.0)
