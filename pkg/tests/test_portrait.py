import numpy as np
import pytest

from wallsda.cli import main, portraits_for
from wallsda.io import ConfigError, PortraitRequest, ScenarioConfig, WallConfig, read_frame
from wallsda.numerics import expm_dt
from wallsda.portrait import (field_rows, free_trajectory, grid_points, portrait, principal_angle_deg,
                              trajectory_rows, vector_field)
from wallsda.thermal import REFERENCE_A, WallSpec, source_subspace, wall_ssm


def test_origin_is_a_fixed_point():
    req = PortraitRequest(t1_range=(-1.0, 1.0), t2_range=(-1.0, 1.0), resolution=3)
    phi = expm_dt(REFERENCE_A, 3600.0)
    for field in ("continuous", "discrete"):
        p = portrait("physics", PortraitRequest(**{**req.__dict__, "field": field}), phi, a=REFERENCE_A)
        i = np.flatnonzero(np.all(p.grid == 0.0, axis=1))[0]
        np.testing.assert_array_equal(p.velocity[i], 0.0)


def test_field_kinds():
    x = np.array([[1.0, 2.0], [3.0, -1.0]])
    np.testing.assert_allclose(vector_field(x, REFERENCE_A, "continuous"), x @ REFERENCE_A.T)
    phi = expm_dt(REFERENCE_A, 3600.0)
    np.testing.assert_allclose(vector_field(x, phi, "discrete"), x @ (phi - np.eye(2)).T / 3600.0)
    with pytest.raises(ValueError):
        vector_field(x, phi, "other")


def test_trajectory_decays_monotonically_to_origin():
    phi = expm_dt(REFERENCE_A, 3600.0)
    tr = free_trajectory(phi, (10.73, 10.82), 300)
    assert tr.shape == (301, 2)
    norms = np.linalg.norm(tr, axis=1)
    assert np.all(np.diff(norms) < 0)
    assert norms[-1] < 0.01 * norms[0]
    assert np.all(np.diff(tr[:, 0]) < 0)


def test_grid_points_cover_bounds():
    g = grid_points(PortraitRequest(t1_range=(0.0, 4.0), t2_range=(-1.0, 1.0), resolution=5))
    assert g.shape == (25, 2)
    assert g[:, 0].min() == 0.0 and g[:, 0].max() == 4.0
    assert g[:, 1].min() == -1.0 and g[:, 1].max() == 1.0


def test_principal_directions_rotate_with_thickness():
    b2 = source_subspace(wall_ssm(WallSpec.with_thickness(0.2))).basis
    b6 = source_subspace(wall_ssm(WallSpec.with_thickness(0.6))).basis
    assert principal_angle_deg(b2[:, 0], b6[:, 0]) > 5.0
    assert principal_angle_deg([1.0, 0.0], [-1.0, 0.0]) == 0.0
    assert principal_angle_deg([1.0, 0.0], [0.0, 2.0]) == pytest.approx(90.0)


def test_request_validation():
    with pytest.raises(ConfigError):
        PortraitRequest(resolution=1)
    with pytest.raises(ConfigError):
        PortraitRequest(operator="koopman")
    with pytest.raises(ConfigError):
        PortraitRequest(t1_range=(3.0, 1.0))


def test_rows_and_physics_vs_dmd():
    cfg = ScenarioConfig(source=WallConfig(A=REFERENCE_A), target=WallConfig(spec=WallSpec(0.2, 1.8)),
                         portrait=PortraitRequest(operator="both", resolution=4, steps=20))
    ps = portraits_for(cfg)
    assert [p.label for p in ps] == ["physics", "dmd"]
    rows = field_rows(ps[0])
    assert len(rows) == 16 and set(rows[0]) == {"operator", "T_ext1", "T_ext2", "dT_ext1", "dT_ext2"}
    t = trajectory_rows(ps[1])
    assert len(t) == 21 and t[-1]["hours"] == 20.0


def test_portrait_command_writes_artifacts(tmp_path):
    cfg = tmp_path / "p.ini"
    cfg.write_text("[portrait]\noperator = both\nfield = continuous\nresolution = 5\nsteps = 50\n")
    for d in ("a", "b"):
        assert main(["portrait", "--config", str(cfg), "--out", str(tmp_path / d)]) == 0
    for name in ("field.csv", "trajectories.csv", "portrait.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "field.csv").read_text().count("\n") == 1 + 2 * 25


def test_portrait_needs_two_states(tmp_path):
    cfg = tmp_path / "p.ini"
    cfg.write_text("[source]\nA = -2,1,0; 1,-2,1; 0,1,-2\n[target]\nmodel = ssm\n")
    assert main(["portrait", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
