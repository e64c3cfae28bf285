import numpy as np
import pytest

from misscov.core import DiagonalModel, SpectralMeasure
from misscov.experiments import (
    Figure1Config,
    compare_to_limit,
    figure1_models,
    hist_support,
    homogeneous_params,
    reduction_distance,
    reference_law,
    run_figure1,
    sample_spectrum,
    worker_count,
)
from misscov.simulate import SeededRng


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("MS_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("MS_THREADS", "0")
    assert worker_count() == 1
    monkeypatch.setenv("MS_THREADS", "junk")
    assert worker_count(5) == 5


def test_homogeneous_detection_and_reference_sources():
    null = DiagonalModel.null(20, 80, 2.0, 0.5)
    assert homogeneous_params(null) == (2.0, 0.5)
    _, edges, source = reference_law(null)
    assert source == "closed_form" and edges == pytest.approx((2 * (-0.5), 2 * 3.5))
    mixed = DiagonalModel(np.ones(4), [0.25, 0.25, 0.75, 0.75], 16)
    assert homogeneous_params(mixed) is None
    curve, (a, b), source = reference_law(mixed, grid_points=801)
    assert source == "solver" and a < 0 < b and curve.mass == pytest.approx(1.0, abs=0.02)


def test_compare_report_fields():
    model = DiagonalModel.null(200, 800, 1.0, 0.5)
    mu = sample_spectrum(model, 4)
    rep = compare_to_limit(mu, model)
    assert rep["kolmogorov"] < 0.05 and rep["levy"] < 0.05
    assert rep["edge_errors"]["min"] == pytest.approx(rep["lambda_min"] + 0.5)
    assert rep["warnings"] == []
    over = DiagonalModel.null(20, 10, 1.0, 1.0)
    assert compare_to_limit(SpectralMeasure(np.linspace(0, 5, 20)), over)["warnings"]


def test_reduction_distance_is_small():
    assert reduction_distance(DiagonalModel.null(100, 400, 1.0, 0.5), SeededRng(1)) < 0.05


def test_figure1_models_layout():
    cfg = Figure1Config(scale=0.01)
    assert (cfg.d, cfg.n) == (20, 80)
    rows = dict(figure1_models(cfg))
    assert np.all(rows["row1"].p == 1) and np.all(rows["row2"].p == 0.5)
    np.testing.assert_array_equal(rows["row3"].p, [0.25] * 10 + [0.75] * 10)


def test_hist_support():
    assert hist_support(np.arange(6.0), [0, 0.5, 0, 0.5, 0]) == (1.0, 4.0)


@pytest.fixture(scope="module")
def quarter_scale():
    return run_figure1(Figure1Config(seed=0, scale=0.25))


def test_figure1_row1_inside_classical_band(quarter_scale):
    edges, masses, _ = quarter_scale["histograms"]["hist_row1_sigma_hat.csv"]
    lo, hi = hist_support(edges, masses)
    assert 0.15 <= lo and hi <= 2.35


def test_figure1_row2_near_shifted_edges(quarter_scale):
    edges, masses, _ = quarter_scale["histograms"]["hist_row2_sigma_hat.csv"]
    lo, hi = hist_support(edges, masses)
    assert -0.6 <= lo <= -0.4 and 3.4 <= hi <= 3.6


def test_centering_barely_moves_complete_data_spectrum(quarter_scale):
    assert quarter_scale["manifest"]["rows"]["row1"]["kolmogorov_t_hat_vs_sigma_hat"] < 0.03
