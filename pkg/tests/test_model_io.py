import numpy as np
import pytest

from qfnn.data import TimeSeries
from qfnn.forecast import (
    ForecastFileError,
    QuantileForecast,
    QuantileGrid,
    read_forecast_csv,
    write_forecast_csv,
)
from qfnn.fourier_network import NetworkParams
from qfnn.model_io import FORMAT_VERSION, ModelFormatError, SavedModel, dumps, load, loads, save
from qfnn.trainer import TrainConfig, fit


def awkward_params(rng, h=3, m=4):
    # values whose decimal text is long: thirds, tiny, huge, negative zero
    return NetworkParams(
        freqs=np.array([0.0, 2 * np.pi / 3, 1e-300])[:h],
        phases=rng.normal(size=h),
        trend_in_weight=-0.0,
        trend_in_bias=1 / 3,
        amplitudes=rng.normal(size=(m, h + 1)) * 1e8,
        out_bias=rng.normal(size=m) / 7,
    )


@pytest.fixture
def model():
    rng = np.random.default_rng(2)
    cfg = TrainConfig(epochs=12, hidden_sinusoids=3, grid=QuantileGrid.uniform(4, 0.1, 0.9),
                      phase_init="quadrature", regularize="all", lam=0.03,
                      lr_overrides={"amplitudes": 1.5, "freqs": 0.0})
    return SavedModel(awkward_params(rng), cfg, time_offset=3.5, time_scale=99.0,
                      cadence=0.25, train_end=28.25, value_offset=-2.0, value_scale=7.0)


class TestModelFile:
    def test_round_trip_exact(self, model, tmp_path):
        save(model, tmp_path / "m.txt")
        back = load(tmp_path / "m.txt")
        assert back.params == model.params
        assert back.config == model.config
        for key in ("time_offset", "time_scale", "cadence", "train_end", "value_offset", "value_scale"):
            assert getattr(back, key) == getattr(model, key)
        assert np.signbit(back.params.trend_in_weight)

    def test_text_is_stable(self, model):
        assert dumps(loads(dumps(model))) == dumps(model)

    def test_human_readable(self, model):
        text = dumps(model)
        assert text.startswith("format = qfnn-model\nversion = 1\n")
        assert "config.phase_init = quadrature" in text
        assert "amplitudes.3 = " in text

    def test_trained_model_round_trip(self):
        t = np.linspace(0, 1, 30)
        train = TimeSeries(t, np.sin(6 * t))
        cfg = TrainConfig(epochs=5, hidden_sinusoids=4, grid=QuantileGrid([0.2, 0.8]))
        params = fit(train, cfg).final_params
        m = SavedModel(params, cfg, 0.0, 1.0, 1 / 29, 1.0)
        assert loads(dumps(m)).params == params

    @pytest.mark.parametrize("edit", [
        lambda s: s.replace("format = qfnn-model", "format = other"),
        lambda s: s.replace(f"version = {FORMAT_VERSION}", "version = 99"),
        lambda s: s.replace(f"version = {FORMAT_VERSION}\n", ""),
        lambda s: s.replace("time.cadence", "time.cadense"),
        lambda s: s.replace("n_quantiles = 4", "n_quantiles = 3"),
        lambda s: s.replace("trend_in_bias = ", "trend_in_bias = x"),
        lambda s: s.replace("trend_in_bias = ", "trend_in_bias = inf #"),
        lambda s: s.replace("freqs = 0.0", "freqs = 0.0 1.0"),
        lambda s: s.replace("config.phase_init = quadrature", "config.phase_init = sideways"),
        lambda s: s + "garbage line\n",
        lambda s: "",
    ])
    def test_corrupt(self, model, edit):
        with pytest.raises(ModelFormatError):
            loads(edit(dumps(model)))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load(tmp_path / "absent.txt")


class TestForecastCsv:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        grid = QuantileGrid.uniform()
        fc = QuantileForecast(np.arange(5.0) / 3, grid, rng.normal(size=(5, 100)))
        write_forecast_csv(tmp_path / "f.csv", fc)
        assert read_forecast_csv(tmp_path / "f.csv") == fc

    def test_header(self, tmp_path):
        fc = QuantileForecast([1.0], QuantileGrid([0.1, 0.5]), [[0.0, 1.0]])
        write_forecast_csv(tmp_path / "f.csv", fc)
        assert (tmp_path / "f.csv").read_text() == "time,tau_0.1,tau_0.5\n1.0,0.0,1.0\n"

    def test_empty_horizon(self, tmp_path):
        fc = QuantileForecast([], QuantileGrid([0.25, 0.75]), np.zeros((0, 2)))
        write_forecast_csv(tmp_path / "f.csv", fc)
        assert (tmp_path / "f.csv").read_text() == "time,tau_0.25,tau_0.75\n"
        assert read_forecast_csv(tmp_path / "f.csv").horizon == 0

    @pytest.mark.parametrize("text", [
        "", "t,tau_0.5\n0,1\n", "time,q50\n0,1\n", "time\n0\n",
        "time,tau_0.5\n0,x\n", "time,tau_0.5\n0,1,2\n", "time,tau_0.5,tau_0.6\n0,1\n",
        "time,tau_0.7,tau_0.6\n0,1,2\n", "time,tau_0.5\n0,inf\n",
    ])
    def test_malformed(self, tmp_path, text):
        (tmp_path / "f.csv").write_text(text)
        with pytest.raises(ValueError):
            read_forecast_csv(tmp_path / "f.csv")

    def test_ragged_is_format_error(self, tmp_path):
        (tmp_path / "f.csv").write_text("time,tau_0.5\n0,1,2\n")
        with pytest.raises(ForecastFileError, match="row 2"):
            read_forecast_csv(tmp_path / "f.csv")


class TestGrid:
    def test_uniform_default(self):
        g = QuantileGrid.uniform()
        assert len(g) == 100
        assert g.taus[1] - g.taus[0] == pytest.approx(0.98 / 99)

    @pytest.mark.parametrize("taus", [[], [0.0, 0.5], [0.5, 1.0], [0.3, 0.3], [0.6, 0.4], [np.nan]])
    def test_invalid(self, taus):
        with pytest.raises(ValueError):
            QuantileGrid(taus)

    def test_hashable_by_value(self):
        assert hash(QuantileGrid([0.2, 0.4])) == hash(QuantileGrid(np.array([0.2, 0.4])))

    def test_forecast_shape_checked(self):
        with pytest.raises(ValueError):
            QuantileForecast([0.0, 1.0], QuantileGrid([0.5]), [[1.0]])
