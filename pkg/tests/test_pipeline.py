from dataclasses import replace

import numpy as np
import pytest

from wallsda.io import NoiseSpec, ScenarioConfig, WallConfig, write_frame
from wallsda.pipeline import PipelineError, forecast_pipeline, metric_rows, simulate
from wallsda.thermal import CONCRETE, WallSpec


def wall(w, material=None):
    return WallConfig(spec=WallSpec.with_thickness(w) if material is None
                      else WallSpec.with_thickness(w, material))


def test_self_transfer_is_exact():
    rep = forecast_pipeline(ScenarioConfig(target_model="ssm"))
    assert rep.metrics["forecast"]["post"].cv_rmse < 1e-6
    assert rep.metrics["forecast"]["pre"].cv_rmse < 1e-9


def test_default_calibration_improves(default_report):
    m = default_report.metrics["forecast"]
    assert m["post"].cv_rmse < m["pre"].cv_rmse
    assert default_report.improved
    assert default_report.forecast.target.start_index == 2000
    assert len(default_report.forecast.target) == 1000
    rows = metric_rows(default_report)
    assert [r["window"] for r in rows] == ["train", "forecast"]


def test_cross_thickness_improves():
    rep = forecast_pipeline(ScenarioConfig(source=wall(0.6), target=wall(0.2)))
    m = rep.metrics["forecast"]
    assert m["post"].cv_rmse < m["pre"].cv_rmse


def test_brick_to_concrete_improves():
    rep = forecast_pipeline(ScenarioConfig(source=wall(0.8), target=wall(0.3, CONCRETE)))
    assert rep.improved


def test_bergman_full_rank_forecast_is_shifted_ssm():
    rep = forecast_pipeline(ScenarioConfig(alignment="bergman"))
    assert rep.notes and "bergman" in rep.notes[0]
    src = rep.forecast.pre_aligned.values
    shift = rep.model.mu_t - rep.model.mu_s
    np.testing.assert_allclose(rep.forecast.aligned.values, src + shift, atol=1e-10)


def test_noisy_target_is_filtered():
    rep = forecast_pipeline(ScenarioConfig(noise=NoiseSpec(mean=0.5, sd=0.9)))
    n = rep.metrics["noise_rms"]
    assert n["aligned"] <= n["measurement"]


def test_dmd_target_refused_for_complex_modes():
    with pytest.raises(PipelineError) as exc:
        forecast_pipeline(ScenarioConfig(rom="dmd"))
    assert exc.value.stage == "target subspace"


def test_stage_tagging_for_complex_source():
    a = np.array([[-1e-5, -2e-5], [2e-5, -1e-5]])
    cfg = ScenarioConfig(source=WallConfig(A=a), target_model="fd")
    with pytest.raises(PipelineError) as exc:
        forecast_pipeline(cfg)
    assert exc.value.stage == "source subspace"


def test_csv_inputs_and_target_match_generated(tmp_path):
    cfg = ScenarioConfig(train_hours=200, forecast_hours=100)
    data = simulate(cfg)
    write_frame(data.inputs, tmp_path / "in.csv")
    write_frame(data.target, tmp_path / "tgt.csv")
    cfg2 = replace(cfg, input_csv=str(tmp_path / "in.csv"), target_model="csv",
                   target_csv=str(tmp_path / "tgt.csv"))
    a, b = forecast_pipeline(cfg), forecast_pipeline(cfg2)
    assert a.metrics["forecast"]["post"].cv_rmse == pytest.approx(
        b.metrics["forecast"]["post"].cv_rmse, rel=1e-6)


def test_regression_suite_improves_in_six_of_seven():
    pairs = [(0.2, 0.6), (0.2, 0.8), (0.2, 0.9), (0.6, 0.2), (0.8, 0.2), (0.9, 0.2)]
    cfgs = [ScenarioConfig(source=wall(a), target=wall(b)) for a, b in pairs]
    cfgs.append(ScenarioConfig(source=wall(0.8), target=wall(0.3, CONCRETE)))
    ok = 0
    for cfg in cfgs:
        m = forecast_pipeline(cfg).metrics["forecast"]
        ok += m["post"].cv_rmse <= m["pre"].cv_rmse
    assert ok >= 6
