"""Exponential smoothing: filtering oracles, estimation, selection,
and forecasting."""

import json
import math

import numpy as np
import pytest

from epicast import ets
from epicast.ets import EtsSpec, auto_fit, fit, forecast, smooth_pass
from epicast.errors import ContractError


LEVEL = EtsSpec()
TREND = EtsSpec(trend="additive")
SEASONAL3 = EtsSpec(seasonal="additive", period=3)


class TestSpec:
    def test_validation(self):
        with pytest.raises(ContractError):
            EtsSpec(trend="multiplicative")
        with pytest.raises(ContractError):
            EtsSpec(seasonal="additive", period=1)
        with pytest.raises(ContractError):
            EtsSpec(damped=True)  # damping without trend

    def test_str(self):
        assert str(LEVEL) == "level"
        assert str(EtsSpec(trend="additive", damped=True)) == "level+damped-trend"


class TestSmoothPass:
    def test_alpha_near_one_tracks_naively(self):
        y = np.array([5.0, 9.0, 2.0, 7.0])
        pred, resid, _ = smooth_pass(y, LEVEL, alpha=1.0 - 1e-12,
                                     init_level=y[0])
        # each prediction is (essentially) the previous observation
        assert np.allclose(pred[1:], y[:-1], atol=1e-9)

    def test_alpha_near_zero_stays_frozen(self):
        y = np.array([5.0, 9.0, 2.0, 7.0])
        pred, resid, (lvl, _, _) = smooth_pass(y, LEVEL, alpha=1e-12,
                                               init_level=3.0)
        assert np.allclose(pred, 3.0, atol=1e-9)
        assert lvl == pytest.approx(3.0, abs=1e-9)

    def test_three_point_hand_unroll(self):
        y = np.array([10.0, 12.0, 11.0])
        alpha, l0 = 0.5, 9.0
        # manual recursion
        lvl = l0
        expect_pred, expect_resid = [], []
        for obs in y:
            expect_pred.append(lvl)
            e = obs - lvl
            expect_resid.append(e)
            lvl = lvl + alpha * e
        pred, resid, (final_lvl, _, _) = smooth_pass(y, LEVEL, alpha=alpha,
                                                     init_level=l0)
        assert np.allclose(pred, expect_pred, atol=1e-12)
        assert np.allclose(resid, expect_resid, atol=1e-12)
        assert final_lvl == pytest.approx(lvl, abs=1e-12)

    def test_trend_hand_unroll(self):
        y = np.array([10.0, 13.0, 15.0])
        alpha, beta, l0, b0 = 0.6, 0.3, 9.0, 1.0
        lvl, trd = l0, b0
        expect = []
        for obs in y:
            p = lvl + trd
            expect.append(p)
            e = obs - p
            lvl = lvl + trd + alpha * e
            trd = trd + beta * e
        pred, _, (fl, ft, _) = smooth_pass(y, TREND, alpha=alpha, beta=beta,
                                           init_level=l0, init_trend=b0)
        assert np.allclose(pred, expect, atol=1e-12)
        assert fl == pytest.approx(lvl, abs=1e-12)
        assert ft == pytest.approx(trd, abs=1e-12)

    def test_seasonal_state_rotation(self):
        # after n observations, final seasonal state 0 applies to step n+1
        y = np.arange(7, dtype=float)
        seas0 = (1.0, -2.0, 1.0)
        _, _, (_, _, final) = smooth_pass(y, SEASONAL3, alpha=0.2, gamma=1e-9,
                                          init_level=0.0, init_seasonals=seas0)
        # gamma ~ 0: states unchanged, rotated by n % period = 1
        assert np.allclose(final, (-2.0, 1.0, 1.0), atol=1e-6)

    def test_parameter_bounds_enforced(self):
        y = np.arange(12, dtype=float)
        with pytest.raises(ContractError):
            smooth_pass(y, LEVEL, alpha=1.5)
        with pytest.raises(ContractError):
            smooth_pass(y, TREND, alpha=0.3, beta=0.4)  # beta > alpha
        with pytest.raises(ContractError):
            smooth_pass(y, SEASONAL3, alpha=0.6, gamma=0.5,
                        init_seasonals=(0, 0, 0))  # gamma > 1 - alpha
        with pytest.raises(ContractError):
            smooth_pass(y, SEASONAL3, alpha=0.2, gamma=0.1,
                        init_seasonals=(0, 0))  # wrong state count


class TestFit:
    def test_constant_series(self):
        f = fit(np.full(40, 7.0), LEVEL)
        assert f.converged
        assert f.final_level == pytest.approx(7.0, abs=1e-6)
        assert f.sigma2 == pytest.approx(0.0, abs=1e-10)

    def test_ramp_recovery(self):
        t = np.arange(60.0)
        f = fit(3.0 + 2.0 * t, TREND)
        assert f.converged
        assert f.final_trend == pytest.approx(2.0, abs=1e-4)
        assert f.final_level == pytest.approx(3.0 + 2.0 * 59, abs=1e-3)

    def test_sse_matches_independent_smooth_pass(self):
        rng = np.random.default_rng(0)
        y = 10 + rng.normal(size=50).cumsum()
        f = fit(y, TREND)
        _, resid, _ = smooth_pass(y, TREND, f.alpha, f.beta,
                                  init_level=f.init_level,
                                  init_trend=f.init_trend)
        # fit.sse is the optimum of the same objective
        assert f.sse == pytest.approx(float(np.dot(resid, resid)), rel=1e-9)

    def test_seasonal_sinusoid_recovery(self):
        t = np.arange(70)
        y = 50 + 5 * np.sin(2 * np.pi * t / 7)
        f = fit(y, EtsSpec(seasonal="additive", period=7))
        assert f.converged
        # in-sample rmse far below the seasonal amplitude
        assert math.sqrt(f.sigma2) < 0.5
        assert np.asarray(f.init_seasonals).sum() == pytest.approx(0.0, abs=1e-8)
        assert np.asarray(f.final_seasonals).sum() == pytest.approx(0.0, abs=1e-8)

    def test_shift_equivariance(self):
        rng = np.random.default_rng(1)
        y = rng.normal(size=60).cumsum()
        f0 = fit(y, LEVEL)
        f1 = fit(y + 500.0, LEVEL)
        assert f1.alpha == pytest.approx(f0.alpha, abs=1e-3)
        assert f1.final_level - f0.final_level == pytest.approx(500.0, abs=1e-3)

    def test_too_short_rejected(self):
        with pytest.raises(ContractError):
            fit(np.arange(9.0), LEVEL)
        with pytest.raises(ContractError):
            fit(np.arange(20.0), EtsSpec(seasonal="additive", period=7))

    def test_json_roundtrip(self):
        f = fit(np.arange(30.0), TREND)
        doc = json.loads(f.to_json())
        assert doc["alpha"] == f.alpha
        assert doc["spec"]["trend"] == "additive"


class TestForecast:
    def _manual(self, spec=LEVEL, **kw):
        base = dict(spec=spec, alpha=0.3, beta=0.0, gamma=0.0, phi_damp=1.0,
                    init_level=0.0, init_trend=0.0, init_seasonals=(),
                    sigma2=1.0, sse=20.0, aic=0.0, residuals=(0.0,) * 20,
                    converged=True, final_level=10.0, final_trend=0.0,
                    final_seasonals=(), n_obs=20)
        base.update(kw)
        return ets.EtsFit(**base)

    def test_level_only_is_flat(self):
        fc = forecast(self._manual(), 5)
        assert np.allclose(fc.point, 10.0, atol=1e-12)

    def test_trend_extrapolation(self):
        f = self._manual(spec=TREND, beta=0.1, final_level=10.0,
                         final_trend=2.0)
        fc = forecast(f, 3)
        assert np.allclose(fc.point, [12.0, 14.0, 16.0], atol=1e-12)

    def test_damped_trend_converges_geometrically(self):
        f = self._manual(spec=EtsSpec(trend="additive", damped=True),
                         beta=0.1, phi_damp=0.9, final_level=10.0,
                         final_trend=2.0)
        fc = forecast(f, 3)
        expect = [10 + 2 * 0.9, 10 + 2 * (0.9 + 0.81), 10 + 2 * (0.9 + 0.81 + 0.729)]
        assert np.allclose(fc.point, expect, atol=1e-12)

    def test_seasonal_pattern_repeats(self):
        f = self._manual(spec=SEASONAL3, gamma=0.1,
                         final_seasonals=(1.0, -3.0, 2.0))
        fc = forecast(f, 6)
        assert np.allclose(fc.point, [11.0, 7.0, 12.0, 11.0, 7.0, 12.0],
                           atol=1e-12)

    def test_variance_recursion_oracle(self):
        # level-only: var_h = sigma2 * (1 + (h-1) * alpha^2)
        f = self._manual(alpha=0.4, sigma2=2.0)
        fc = forecast(f, 4, clamp_zero=False)
        for h in range(1, 5):
            se = math.sqrt(2.0 * (1 + (h - 1) * 0.4 ** 2))
            assert fc.upper95[h - 1] - fc.point[h - 1] == pytest.approx(
                1.96 * se, abs=1e-9)

    def test_interval_width_monotone(self):
        fc = forecast(self._manual(), 10)
        widths = np.subtract(fc.upper80, fc.lower80)
        assert (np.diff(widths) >= -1e-12).all()

    def test_ramp_forecast_within_one_percent(self):
        t = np.arange(60.0)
        y = 3.0 + 2.0 * t
        f = auto_fit(y, period=7)
        fc = forecast(f, 10)
        expect = 3.0 + 2.0 * (60 + np.arange(10))
        assert np.all(np.abs(np.subtract(fc.point, expect)) / expect < 0.01)

    def test_unconverged_rejected(self):
        f = self._manual(converged=False)
        with pytest.raises(ContractError):
            forecast(f, 2)
        assert len(forecast(f, 2, allow_unconverged=True).point) == 2


class TestAutoFit:
    def test_white_noise_prefers_level(self):
        hits = 0
        for seed in range(50):
            y = 5 + np.random.default_rng(seed).normal(size=100)
            f = auto_fit(y, period=7)
            if not f.spec.has_seasonal and (not f.spec.has_trend or f.spec.damped):
                hits += 1
        assert hits >= 40  # >= 80%

    def test_sinusoid_selects_seasonal(self):
        hits = 0
        for seed in range(50):
            rng = np.random.default_rng(seed)
            t = np.arange(100)
            y = 20 + 5 * np.sin(2 * np.pi * t / 7) + rng.normal(0, 0.5, 100)
            if auto_fit(y, period=7).spec.has_seasonal:
                hits += 1
        assert hits >= 48  # >= 95%

    def test_ramp_selects_trend(self):
        f = auto_fit(3.0 + 2.0 * np.arange(60.0), period=7)
        assert f.spec.has_trend

    def test_winner_minimizes_aic_over_ladder(self):
        rng = np.random.default_rng(2)
        y = 10 + rng.normal(size=80).cumsum()
        best = auto_fit(y, period=7)
        ladder = [EtsSpec(), EtsSpec(trend="additive"),
                  EtsSpec(trend="additive", damped=True),
                  EtsSpec(seasonal="additive", period=7),
                  EtsSpec(trend="additive", seasonal="additive", period=7)]
        aics = [fit(y, s).aic for s in ladder if fit(y, s).converged]
        assert best.aic <= min(aics) + 1e-9
