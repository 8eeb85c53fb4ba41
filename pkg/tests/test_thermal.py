import numpy as np
import pytest
from scipy.integrate import quad_vec

from wallsda.numerics import expm_dt
from wallsda.thermal import (CONCRETE, REFERENCE_A, RED_BRICK, MaterialSpec, StateSpaceModel, ThermalModelError,
                             WallSpec,
                             build_ssm, derive_rc, discretize, reference_wall, source_subspace,
                             ssm_from_matrices, wall_ssm)


def test_reference_rc_values():
    rc = derive_rc(reference_wall())
    assert rc.c_ext1 == pytest.approx(780 * 1920 * 1.8)
    assert rc.c_ext2 == rc.c_ext1
    assert rc.u_cond == pytest.approx(0.72 * 9.0 / 0.2)
    assert rc.u_out == pytest.approx(25.0 * 9.0)
    assert rc.u_in is None
    assert rc.r_cond == pytest.approx(1 / 32.4)


def test_reference_matrix_entries():
    a = wall_ssm(reference_wall()).A
    c = 2695680.0
    np.testing.assert_allclose(a, [[-32.4 / c, 32.4 / c], [32.4 / c, -(32.4 + 225.0) / c]], rtol=1e-12)


def test_exterior_conductance_override():
    a = wall_ssm(reference_wall(exterior_conductance=180.0)).A
    assert a[1, 1] == pytest.approx(-(32.4 + 180.0) / 2695680.0)


def test_wall_is_metzler_with_ambient_equilibrium():
    for w in (0.2, 0.6, 0.9):
        ssm = wall_ssm(WallSpec.with_thickness(w, CONCRETE))
        a = ssm.A
        assert a[0, 1] > 0 and a[1, 0] > 0 and a[0, 0] < 0 and a[1, 1] < 0
        np.testing.assert_allclose(a.sum(axis=1) + ssm.B[:, 0], 0.0, atol=1e-18)


def test_indoor_branch_and_heat_gains():
    rc = derive_rc(reference_wall(indoor_branch=True))
    assert rc.u_in == pytest.approx(8.0 * 9.0)
    ssm = build_ssm(rc, heat_gains=(10.0, 0.0))
    assert ssm.input_names == ("T_ext", "T_int", "Q")
    assert ssm.B.shape == (2, 3)
    # constant T_ext = T_int is still an equilibrium without gains
    np.testing.assert_allclose(ssm.A.sum(axis=1) + ssm.B[:, 0] + ssm.B[:, 1], 0.0, atol=1e-18)


def test_spec_validation():
    with pytest.raises(ThermalModelError):
        WallSpec(thickness=0.0, volume=1.0)
    with pytest.raises(ThermalModelError):
        WallSpec(thickness=0.2, volume=-1.0)
    with pytest.raises(ThermalModelError):
        MaterialSpec(0.0, 1.0, 1.0)
    with pytest.raises(ThermalModelError):
        StateSpaceModel(A=np.eye(2), B=np.ones((2, 1)), C=np.ones((1, 2)), D=np.zeros((1, 1)),
                        state_names=("a",))


def test_with_thickness_scales_volume():
    w = WallSpec.with_thickness(0.6)
    assert w.volume == pytest.approx(5.4)
    assert w.face_area == pytest.approx(9.0)
    assert w.material is RED_BRICK
    assert RED_BRICK.diffusivity == pytest.approx(0.72 / (1920 * 780))


def test_ssm_from_matrices_default_b():
    ssm = ssm_from_matrices(REFERENCE_A)
    np.testing.assert_allclose(ssm.B[:, 0], [0.0, 7.879e-05 - 1.2019e-05], atol=1e-18)
    assert ssm.state_names == ("T_ext1", "T_ext2")


def test_zoh_gamma_matches_quadrature():
    ssm = wall_ssm(reference_wall())
    d = discretize(ssm, 3600.0)
    integral, _ = quad_vec(lambda s: expm_dt(ssm.A, s) @ ssm.B if s > 0 else ssm.B, 0.0, 3600.0)
    np.testing.assert_allclose(d.Gamma, integral, rtol=1e-8)
    np.testing.assert_allclose(d.Phi, expm_dt(ssm.A, 3600.0))
    assert d.spectral_radius < 1.0


def test_zoh_preserves_ambient_equilibrium():
    d = discretize(wall_ssm(reference_wall()), 3600.0)
    x = np.full(2, 7.5)
    np.testing.assert_allclose(d.Phi @ x + d.Gamma @ [7.5], x, rtol=1e-12)


def test_discretize_rejects_singular_and_bad_dt():
    ssm = ssm_from_matrices(np.array([[-1.0, 1.0], [1.0, -1.0]]), np.zeros((2, 1)))
    with pytest.raises(ThermalModelError):
        discretize(ssm, 1.0)
    with pytest.raises(ThermalModelError):
        discretize(wall_ssm(reference_wall()), 0.0)


def test_source_subspace_is_orthonormal_physics_basis():
    s = source_subspace(wall_ssm(reference_wall()))
    assert s.origin == "physics"
    assert s.orthonormal
    assert s.eigenvalues[0] > s.eigenvalues[1]
