"""Phase portraits of the autonomous (zero-input) wall dynamics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .io import PortraitRequest


@dataclass(frozen=True)
class Portrait:
    label: str
    grid: np.ndarray  # (m, 2) sample points
    velocity: np.ndarray  # (m, 2) field values, K/s
    trajectories: tuple  # each (steps + 1, 2)
    basis: np.ndarray | None = None


def vector_field(points, operator: np.ndarray, kind: str, dt: float = 3600.0) -> np.ndarray:
    """``A x`` for a continuous operator, ``(Phi - I) x / dt`` for a discrete one."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if kind == "continuous":
        return pts @ operator.T
    if kind == "discrete":
        return pts @ (operator - np.eye(operator.shape[0])).T / dt
    raise ValueError(f"unknown field kind {kind!r}")


def grid_points(req: PortraitRequest) -> np.ndarray:
    t1 = np.linspace(*req.t1_range, req.resolution)
    t2 = np.linspace(*req.t2_range, req.resolution)
    g1, g2 = np.meshgrid(t1, t2, indexing="ij")
    return np.column_stack([g1.ravel(), g2.ravel()])


def free_trajectory(phi: np.ndarray, x0, steps: int) -> np.ndarray:
    """``x(k) = Phi^k x0`` for ``k = 0..steps``."""
    x = np.empty((steps + 1, phi.shape[0]))
    x[0] = np.asarray(x0, dtype=float)
    for k in range(steps):
        x[k + 1] = phi @ x[k]
    return x


def portrait(label: str, req: PortraitRequest, phi: np.ndarray, a: np.ndarray | None = None,
             dt: float = 3600.0, basis=None) -> Portrait:
    """Sample the field on the request grid and integrate its trajectories.

    ``a`` (continuous generator) is required when the request asks for the
    continuous field; trajectories always step with ``phi``.
    """
    pts = grid_points(req)
    if req.field == "continuous":
        if a is None:
            raise ValueError("a continuous field needs the continuous-time generator")
        vel = vector_field(pts, a, "continuous")
    else:
        vel = vector_field(pts, phi, "discrete", dt)
    trajs = tuple(free_trajectory(phi, x0, req.steps) for x0 in req.initial_states)
    return Portrait(label=label, grid=pts, velocity=vel, trajectories=trajs, basis=basis)


def principal_angle_deg(u, v) -> float:
    """Angle between two lines spanned by ``u`` and ``v`` (0..90 degrees)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    c = abs(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(np.degrees(np.arccos(np.clip(c, 0.0, 1.0))))


def field_rows(p: Portrait) -> list[dict]:
    return [{"operator": p.label, "T_ext1": x[0], "T_ext2": x[1], "dT_ext1": v[0], "dT_ext2": v[1]}
            for x, v in zip(p.grid, p.velocity)]


def trajectory_rows(p: Portrait, dt: float = 3600.0) -> list[dict]:
    rows = []
    for i, tr in enumerate(p.trajectories):
        for k, x in enumerate(tr):
            rows.append({"operator": p.label, "trajectory": i, "step": k,
                         "hours": k * dt / 3600.0, "T_ext1": x[0], "T_ext2": x[1]})
    return rows
