import numpy as np
import pytest
from dataclasses import replace

from qfnn.baselines import climatology
from qfnn.data import TimeSeries, split_and_normalize
from qfnn.evaluation import quantile_score
from qfnn.forecast import QuantileGrid
from qfnn.fourier_network import Gradients, backward, init_params, predict_quantiles
from qfnn.synthetic import TRAIN_FRACTION, seasonal_series, training_config
from qfnn.trainer import (
    TrainConfig,
    TrainingDivergedError,
    fit,
    gradient_check,
    gradient_errors,
    numerical_gradient,
)


@pytest.fixture(scope="module")
def synthetic_split():
    return split_and_normalize(seasonal_series(), TRAIN_FRACTION)


def small_cfg(**kw):
    base = dict(epochs=50, hidden_sinusoids=4, grid=QuantileGrid([0.1, 0.5, 0.9]))
    base.update(kw)
    return TrainConfig(**base)


def wave(n=80, seed=0):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 1, n)
    return TimeSeries(t, 1 + t + 0.5 * np.sin(2 * np.pi * 3 * t) + 0.2 * rng.normal(size=n))


class TestConfig:
    def test_published_defaults(self):
        cfg = TrainConfig()
        assert (cfg.epochs, cfg.learning_rate, cfg.alpha, cfg.lam, cfg.mix, cfg.hidden_sinusoids) == (
            1000, 0.1, 0.01, 0.1, 0.5, 20)
        assert cfg.phase_init == "zero"
        assert len(cfg.grid) == 100
        assert cfg.grid.taus[0] == 0.01 and cfg.grid.taus[-1] == 0.99

    @pytest.mark.parametrize("kw", [
        dict(epochs=-1), dict(epochs=2.5), dict(learning_rate=0.0), dict(learning_rate=np.inf),
        dict(alpha=0.0), dict(lam=-0.1), dict(mix=1.5), dict(hidden_sinusoids=0),
        dict(phase_init="random"), dict(regularize="none"),
        dict(lr_overrides={"weights": 0.1}), dict(lr_overrides={"freqs": -1.0}),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            TrainConfig(**kw)

    def test_lr_for(self):
        cfg = TrainConfig(lr_overrides={"amplitudes": 5.0})
        assert cfg.lr_for("amplitudes") == 5.0
        assert cfg.lr_for("freqs") == 0.1

    def test_bundled_config(self):
        cfg = training_config()
        assert cfg.epochs == 3000 and cfg.lam == 0.0
        assert cfg.lr_overrides == {"amplitudes": 10.0, "out_bias": 10.0}
        assert cfg.grid == TrainConfig().grid


class TestFit:
    def test_zero_epochs_returns_init(self):
        train = wave()
        cfg = small_cfg(epochs=0)
        report = fit(train, cfg)
        assert report.epochs_run == 0 and report.cost_history.size == 0
        assert report.final_params == init_params(4, 3, train)

    def test_history_length_and_first_entry(self):
        train = wave()
        cfg = small_cfg(epochs=7)
        report = fit(train, cfg)
        assert report.cost_history.size == 7 == report.epochs_run
        first, _ = backward(report.initial_params, train, cfg.grid, cfg.loss_config())
        assert report.cost_history[0] == first

    def test_bit_identical_reruns(self):
        train = wave()
        cfg = small_cfg(epochs=30, phase_init="quadrature")
        a, b = fit(train, cfg), fit(train, cfg)
        assert a.cost_history.tobytes() == b.cost_history.tobytes()
        assert a.final_params == b.final_params

    def test_single_step_is_plain_descent(self):
        train = wave()
        cfg = small_cfg(epochs=1, lr_overrides={"phases": 0.0, "amplitudes": 2.0})
        report = fit(train, cfg)
        p0 = report.initial_params
        _, g = backward(p0, train, cfg.grid, cfg.loss_config())
        np.testing.assert_array_equal(report.final_params.amplitudes, p0.amplitudes - 2.0 * g.amplitudes)
        np.testing.assert_array_equal(report.final_params.freqs, p0.freqs - 0.1 * g.freqs)
        np.testing.assert_array_equal(report.final_params.phases, p0.phases)

    def test_constant_series(self):
        t = np.linspace(0, 1, 50)
        train = TimeSeries(t, np.full(50, 3.0))
        cfg = small_cfg(epochs=200, grid=QuantileGrid([0.4, 0.5, 0.6]))
        report = fit(train, cfg)
        assert report.cost_history[-1] < report.cost_history[0]
        q = predict_quantiles(report.final_params, t, cfg.grid).values
        np.testing.assert_allclose(q[:, 1], 3.0, atol=0.05)

    def test_line_starts_near_optimum(self):
        t = np.linspace(0, 1, 60)
        train = TimeSeries(t, 2 * t)
        cfg = small_cfg(epochs=100, lam=0.0, learning_rate=1e-3)
        h = fit(train, cfg).cost_history
        # residuals are zero at init, leaving only the smoothing floor alpha*ln2
        assert h[0] == pytest.approx(0.01 * np.log(2), rel=1e-9)
        assert np.all(np.diff(h) <= 1e-15)

    def test_monotone_at_small_rate_on_synthetic(self, synthetic_split):
        train, _ = synthetic_split
        h = fit(train, TrainConfig(epochs=200, lam=0.0, learning_rate=1e-3)).cost_history
        assert np.all(np.diff(h) <= 0.0)

    def test_callback_sees_every_epoch(self):
        seen = []
        fit(wave(), small_cfg(epochs=5), on_epoch=lambda e, c: seen.append(e))
        assert seen == [0, 1, 2, 3, 4]

    def test_divergence_names_epoch(self):
        with pytest.raises(TrainingDivergedError) as info:
            fit(wave(), small_cfg(epochs=500, learning_rate=1e200))
        assert info.value.epoch >= 0
        assert "epoch" in str(info.value)

    def test_too_short_series(self):
        with pytest.raises(ValueError):
            fit(TimeSeries(np.array([0.0]), np.array([1.0])), small_cfg())


@pytest.fixture(scope="module")
def default_run(synthetic_split):
    train, test = synthetic_split
    return fit(train, TrainConfig()), train, test


class TestDefaults:
    def test_final_cost_not_above_initial(self, default_run):
        report, _, _ = default_run
        assert report.final_cost <= report.cost_history[0]

    def test_defaults_beat_climatology(self, default_run):
        # Recorded outcome: at the published defaults the penalty dominates the
        # averaged loss and the heads shrink towards zero, so this stays red.
        report, train, test = default_run
        grid = TrainConfig().grid
        qs_model = quantile_score(test.values, predict_quantiles(report.final_params, test.times, grid))
        qs_clim = quantile_score(test.values, climatology(train.values, grid, test.times))
        assert qs_model < qs_clim


class TestGradientCheck:
    def test_initialized(self):
        train = wave()
        cfg = small_cfg(lam=0.05, alpha=0.1)
        p = init_params(4, 3, train)
        assert gradient_check(p, train, cfg, 1e-6) < 1e-5

    def test_after_training(self):
        train = wave()
        cfg = small_cfg(epochs=100, lam=0.0, lr_overrides={"amplitudes": 3.0, "out_bias": 3.0})
        p = fit(train, cfg).final_params
        assert gradient_check(p, train, cfg, 1e-6) < 1e-5

    def test_regularize_all(self):
        train = wave()
        cfg = small_cfg(lam=0.05, alpha=0.1, regularize="all", l1_epsilon=1e-2)
        p = fit(train, replace(cfg, epochs=20)).final_params
        assert gradient_check(p, train, cfg, 1e-6) < 1e-5

    @pytest.mark.parametrize("step", [0.0, -1e-6])
    def test_step_must_be_positive(self, step):
        train = wave()
        with pytest.raises(ValueError):
            gradient_check(init_params(4, 3, train), train, small_cfg(), step)

    def test_numerical_matches_brute_force_on_heads(self):
        # column-wise head differences agree with perturbing the full cost
        from qfnn.fourier_network import cost
        train = wave(40)
        cfg = small_cfg(lam=0.07, alpha=0.1, regularize="all", l1_epsilon=1e-2)
        p = fit(train, replace(cfg, epochs=10)).final_params
        num = numerical_gradient(p, train, cfg)
        h = 1e-6
        amps = np.array(p.amplitudes)
        up, down = amps.copy(), amps.copy()
        up[1, 2] += h
        down[1, 2] -= h
        lc = cfg.loss_config()
        brute = (cost(replace(p, amplitudes=up), train, cfg.grid, lc, "all")
                 - cost(replace(p, amplitudes=down), train, cfg.grid, lc, "all")) / (2 * h)
        assert num.amplitudes[1, 2] == pytest.approx(brute, rel=1e-6)

    def test_detects_wrong_gradient(self):
        train = wave()
        cfg = small_cfg()
        p = init_params(4, 3, train)
        _, g = backward(p, train, cfg.grid, cfg.loss_config())
        bad = replace(g, out_bias=g.out_bias * (1 + 1e-3))
        errors = gradient_errors(bad, numerical_gradient(p, train, cfg))
        assert errors["out_bias"] > 1e-4
        assert errors["trend_in_weight"] < 1e-5

    def test_abs_floor(self):
        zeros = Gradients(*(np.zeros(1) for _ in range(4)), np.zeros((1, 1)), np.zeros(1))
        tiny = replace(zeros, freqs=np.array([5e-9]))
        assert gradient_errors(zeros, tiny)["freqs"] == 0.0
        assert gradient_errors(zeros, tiny, abs_floor=0.0)["freqs"] == 1.0
