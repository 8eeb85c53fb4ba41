import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import random_alternatives_beaten, random_orthogonal

from wallsda import align
from wallsda.align import AlignmentError, AlignmentModel, fit_bergman, fit_procrustes, procrustes
from wallsda.rom import Subspace, center, embed, pod
from wallsda.sim import TimeSeriesFrame


def frame(values, start=0):
    return TimeSeriesFrame(dt=3600.0, channels=("T_ext1", "T_ext2"), values=values, start_index=start)


def orthonormal_subspace(rng, n=2, origin="pod"):
    return Subspace(basis=random_orthogonal(rng, n), orthonormal=True, origin=origin)


def test_self_alignment_is_identity(rng):
    z = rng.standard_normal((100, 2))
    z -= z.mean(axis=0)
    r, s = procrustes(z, z)
    np.testing.assert_allclose(r, np.eye(2), atol=1e-12)
    assert s == pytest.approx(1.0, abs=1e-12)


def test_exact_similarity_recovery(rng):
    z = rng.standard_normal((100, 2))
    r0 = random_orthogonal(rng, 2)
    r, s = procrustes(z, 2.0 * z @ r0)
    np.testing.assert_allclose(r, r0, atol=1e-9)
    assert s == pytest.approx(2.0, abs=1e-9)
    np.testing.assert_allclose(r.T @ r, np.eye(2), atol=1e-10)


def test_fitted_pair_beats_random_alternatives(rng):
    z_s = rng.standard_normal((80, 2))
    z_t = rng.standard_normal((80, 2)) + 0.5 * z_s
    r, s = procrustes(z_s, z_t)
    assert random_alternatives_beaten(z_s, z_t, r, s, rng)


def test_bergman_full_rank_identity(rng):
    x_s = rng.normal(5.0, 2.0, (60, 2))
    x_t = rng.normal(8.0, 1.0, (60, 2))
    m = fit_bergman(frame(x_s), frame(x_t), orthonormal_subspace(rng), orthonormal_subspace(rng))
    out = align.apply(m, frame(x_s))
    np.testing.assert_allclose(out.values - m.mu_t, x_s - x_s.mean(axis=0), atol=1e-10)
    np.testing.assert_allclose(m.V_a, m.V_t.basis, atol=1e-12)


def test_bergman_reduced_rank_projects(rng):
    b = random_orthogonal(rng, 3)
    v_s = Subspace(basis=b[:, :2], orthonormal=True)
    v_t = Subspace(basis=b[:, 1:], orthonormal=True)
    x = rng.standard_normal((40, 3))
    tf = TimeSeriesFrame(dt=3600.0, channels=("a", "b", "c"), values=x)
    m = fit_bergman(tf, tf, v_s, v_t)
    # only the shared direction b[:, 1] survives
    np.testing.assert_allclose(m.M, [[0.0, 0.0], [1.0, 0.0]], atol=1e-12)


def test_procrustes_identity_model_returns_input(rng):
    x = rng.normal(3.0, 1.0, (20, 2))
    v = orthonormal_subspace(rng)
    mu = np.array([1.0, 2.0])
    m = AlignmentModel(method="procrustes", V_s=v, V_t=v, mu_s=mu, mu_t=mu, channels=("T_ext1", "T_ext2"),
                       r=np.eye(2), s=1.0, t=np.zeros(2))
    np.testing.assert_allclose(align.apply(m, frame(x)).values, x, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_rotation_invariance_of_procrustes(seed):
    rng = np.random.default_rng(seed)
    x_s = rng.standard_normal((50, 2)) @ rng.standard_normal((2, 2))
    x_t = x_s @ rng.standard_normal((2, 2)) + 0.1 * rng.standard_normal((50, 2))
    v_s = orthonormal_subspace(rng, origin="physics")
    v_t = pod(center(frame(x_t)), 2)
    q = random_orthogonal(rng, 2)
    a = align.apply(fit_procrustes(frame(x_s), frame(x_t), v_s, v_t), frame(x_s))
    b = align.apply(fit_procrustes(frame(x_s), frame(x_t), v_s.rotated(q), v_t), frame(x_s))
    np.testing.assert_allclose(a.values, b.values, atol=1e-8)
    r = fit_procrustes(frame(x_s), frame(x_t), v_s, v_t).r
    np.testing.assert_allclose(r.T @ r, np.eye(2), atol=1e-10)


def test_training_reconstruction_no_worse_than_raw(default_report):
    m = default_report.metrics["train"]
    assert m["post"].cv_rmse <= m["pre"].cv_rmse


def test_procrustes_residual_optimal_on_wall_data(default_report, rng):
    model = default_report.model
    src = default_report.data.source.window(0, 2000)
    tgt = default_report.data.target.window(0, 2000)
    z_s = embed(center(src), model.V_s)
    z_t = embed(center(tgt), model.V_t)
    assert random_alternatives_beaten(z_s, z_t, model.r, model.s, rng)


def test_embedded_views_shapes(default_report):
    v = align.embedded_views(default_report.model, default_report.data.source.window(0, 10),
                             default_report.data.target.window(0, 10))
    assert set(v) == {"source", "aligned", "target"}
    assert all(a.shape == (10, 2) for a in v.values())


def test_serialisation_roundtrip(default_report):
    m = default_report.model
    text = align.dumps_model(m)
    m2 = align.loads_model(text)
    src = default_report.data.source.window(2000, 2100)
    np.testing.assert_array_equal(align.apply(m, src).values, align.apply(m2, src).values)
    assert align.dumps_model(m2) == text
    with pytest.raises(AlignmentError):
        align.loads_model("[alignment]\nmethod = procrustes\n")
    with pytest.raises(AlignmentError):
        align.loads_model("garbage line")


def test_errors(rng):
    v = orthonormal_subspace(rng)
    x = frame(rng.standard_normal((10, 2)))
    with pytest.raises(AlignmentError):
        align.fit("cca", x, x, v, v)
    with pytest.raises(AlignmentError):
        fit_procrustes(x, frame(rng.standard_normal((11, 2))), v, v)
    with pytest.raises(AlignmentError):
        AlignmentModel(method="bergman", V_s=v, V_t=v, mu_s=np.zeros(2), mu_t=np.zeros(2),
                       channels=("a", "b"))
    m = fit_procrustes(x, x, v, v)
    with pytest.raises(AlignmentError):
        align.apply(m, TimeSeriesFrame(dt=3600.0, channels=("a",), values=np.zeros(3)))
    with pytest.raises(AlignmentError):
        m.V_a
