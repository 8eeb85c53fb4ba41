"""Time-series generation: weather drive, SSM rollouts, a finite-volume wall
reference simulator, and additive measurement noise."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .thermal import DiscreteSSM, WallSpec


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class TimeSeriesFrame:
    """Hourly (or ``dt``-spaced) multi-channel table, rows = time steps."""

    dt: float
    channels: tuple
    values: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        chans = tuple(self.channels)
        if vals.ndim != 2 or vals.shape[0] < 1:
            raise SimulationError("a frame needs at least one row")
        if vals.shape[1] != len(chans):
            raise SimulationError(f"{len(chans)} channel names for {vals.shape[1]} columns")
        if len(set(chans)) != len(chans):
            raise SimulationError(f"duplicate channel names in {chans}")
        if not np.all(np.isfinite(vals)):
            raise SimulationError("frame values must be finite")
        if not self.dt > 0:
            raise SimulationError("dt must be positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "channels", chans)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def steps(self) -> np.ndarray:
        return np.arange(self.start_index, self.start_index + len(self))

    @property
    def hours(self) -> np.ndarray:
        return self.steps * self.dt / 3600.0

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.channels.index(name)]
        except ValueError:
            raise KeyError(f"no channel {name!r}; have {self.channels}") from None

    def select(self, names) -> "TimeSeriesFrame":
        idx = []
        for n in names:
            if n not in self.channels:
                raise KeyError(f"no channel {n!r}; have {self.channels}")
            idx.append(self.channels.index(n))
        return replace(self, channels=tuple(names), values=self.values[:, idx])

    def window(self, start: int, stop: int | None = None) -> "TimeSeriesFrame":
        """Rows ``start:stop`` (positions, not absolute step indices)."""
        vals = self.values[start:stop]
        if vals.shape[0] == 0:
            raise SimulationError(f"empty window [{start}:{stop}] of {len(self)} rows")
        return replace(self, values=vals, start_index=self.start_index + start)

    def with_values(self, values, channels=None) -> "TimeSeriesFrame":
        return replace(self, values=values, channels=self.channels if channels is None else channels)

    def rename(self, mapping: dict) -> "TimeSeriesFrame":
        return replace(self, channels=tuple(mapping.get(c, c) for c in self.channels))

    def concat_channels(self, other: "TimeSeriesFrame") -> "TimeSeriesFrame":
        if len(other) != len(self):
            raise SimulationError("frames differ in length")
        return replace(self, channels=self.channels + other.channels,
                       values=np.hstack([self.values, other.values]))


@dataclass(frozen=True)
class WeatherSpec:
    """Synthetic hourly outdoor air temperature.

    Mean plus a diurnal and an annual sinusoid plus a stationary AR(1)
    residual.  The default drive has no annual term: forecasts re-use
    training-window means, which a seasonal trend would bias.
    """

    mean: float = 10.0
    diurnal_amplitude: float = 2.0
    diurnal_phase: float = -np.pi / 2
    annual_amplitude: float = 0.0
    ar1_coefficient: float = 0.98
    ar1_noise_sd: float = 0.4
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.ar1_coefficient < 1.0:
            raise SimulationError("ar1_coefficient must lie in [0, 1)")
        if self.ar1_noise_sd < 0:
            raise SimulationError("ar1_noise_sd must be non-negative")


def generate_weather(spec: WeatherSpec, steps: int, dt: float = 3600.0) -> TimeSeriesFrame:
    if steps < 1:
        raise SimulationError("steps must be >= 1")
    t = np.arange(steps) * dt / 3600.0
    temp = (spec.mean
            + spec.diurnal_amplitude * np.sin(2 * np.pi * t / 24.0 + spec.diurnal_phase)
            + spec.annual_amplitude * np.sin(2 * np.pi * t / 8760.0))
    if spec.ar1_noise_sd > 0:
        rng = np.random.default_rng(spec.seed)
        eps = rng.standard_normal(steps) * spec.ar1_noise_sd
        phi = spec.ar1_coefficient
        resid = np.empty(steps)
        resid[0] = eps[0] / np.sqrt(1.0 - phi * phi)
        for i in range(1, steps):
            resid[i] = phi * resid[i - 1] + eps[i]
        temp = temp + resid
    return TimeSeriesFrame(dt=dt, channels=("T_ext",), values=temp)


def constant_inputs(value: float, steps: int, dt: float = 3600.0, channel: str = "T_ext") -> TimeSeriesFrame:
    return TimeSeriesFrame(dt=dt, channels=(channel,), values=np.full(steps, float(value)))


def steady_state(ssm: DiscreteSSM, u) -> np.ndarray:
    """Fixed point ``(I - Phi)^-1 Gamma u`` of the discrete dynamics."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    n = ssm.n_states
    return np.linalg.solve(np.eye(n) - ssm.Phi, ssm.Gamma @ u)


def rollout(ssm: DiscreteSSM, x0, inputs: TimeSeriesFrame) -> TimeSeriesFrame:
    """Simulate ``x(t) = Phi x(t-1) + Gamma u(t-1)``.

    Row ``t`` of the result holds the state ``x(t)`` (``x(0) = x0``) and
    the output ``C x(t) + D u(t)`` under channel ``y_<name>``.  If ``x0`` is
    None the steady state for the first input row is used.
    """
    u = inputs.select(ssm.input_names).values if set(ssm.input_names) <= set(inputs.channels) else None
    if u is None:
        if inputs.values.shape[1] != len(ssm.input_names):
            raise SimulationError(
                f"inputs have channels {inputs.channels}, model needs {ssm.input_names}")
        u = inputs.values
    n = ssm.n_states
    x0 = steady_state(ssm, u[0]) if x0 is None else np.asarray(x0, dtype=float).ravel()
    if x0.shape != (n,):
        raise SimulationError(f"x0 has length {x0.size}, model has {n} states")
    if abs(inputs.dt - ssm.dt) > 1e-9 * ssm.dt:
        raise SimulationError(f"input dt {inputs.dt} differs from model dt {ssm.dt}")
    steps = u.shape[0]
    x = np.empty((steps, n))
    x[0] = x0
    forced = u @ ssm.Gamma.T
    phi_t = ssm.Phi.T
    for t in range(1, steps):
        x[t] = x[t - 1] @ phi_t + forced[t - 1]
    y = x @ ssm.C.T + u @ ssm.D.T
    names = tuple(ssm.state_names) + tuple(f"y_{o}" for o in ssm.output_names)
    return TimeSeriesFrame(dt=inputs.dt, channels=names, values=np.hstack([x, y]),
                           start_index=inputs.start_index)


@dataclass(frozen=True)
class FdWallConfig:
    """Finite-volume conduction model of a wall.

    Depths are fractions of the thickness measured from the interior
    surface; the defaults place the T_ext1 sensor in the inner half and the
    T_ext2 sensor in the outer half, at the layer midpoints.
    """

    wall: WallSpec
    cells: int = 20
    sensor_depths: tuple = (0.25, 0.75)
    substeps: int = 6
    sensor_names: tuple = ("T_ext1", "T_ext2")

    def __post_init__(self):
        if self.cells < 3:
            raise SimulationError("cells must be >= 3")
        if self.substeps < 1:
            raise SimulationError("substeps must be >= 1")
        if not all(0.0 < d < 1.0 for d in self.sensor_depths):
            raise SimulationError("sensor depths must lie strictly inside (0, 1)")
        if len(self.sensor_names) != len(self.sensor_depths):
            raise SimulationError("one sensor name per depth")


@dataclass(frozen=True)
class FdOperator:
    """Assembled implicit-Euler system for one wall.

    ``capacity`` per cell (J/K), ``stiffness`` the conductance Laplacian
    (W/K), ``boundary`` maps boundary air temperatures to cell heat input.
    """

    capacity: np.ndarray
    stiffness: np.ndarray
    boundary: np.ndarray
    centers: np.ndarray
    boundary_names: tuple
    g_out: float
    g_in: float


def assemble_fd(cfg: FdWallConfig) -> FdOperator:
    wall = cfg.wall
    m = wall.material
    n = cfg.cells
    area = wall.face_area
    dx = wall.thickness / n
    cap = np.full(n, m.density * m.specific_heat * area * dx)
    g = m.conductivity * area / dx
    k = np.zeros((n, n))
    for i in range(n - 1):
        k[i, i] -= g
        k[i + 1, i + 1] -= g
        k[i, i + 1] += g
        k[i + 1, i] += g
    # cell 0 touches the interior surface, cell n-1 the exterior surface
    film_out = wall.exterior_conductance if wall.exterior_conductance is not None else wall.h_out * area
    g_out = 0.0 if film_out == 0 else 1.0 / (0.5 * dx / (m.conductivity * area) + 1.0 / film_out)
    k[n - 1, n - 1] -= g_out
    cols = [np.zeros(n)]
    cols[0][n - 1] = g_out
    names = ["T_ext"]
    g_in = 0.0
    if wall.indoor_branch and wall.h_in > 0:
        g_in = 1.0 / (0.5 * dx / (m.conductivity * area) + 1.0 / (wall.h_in * area))
        k[0, 0] -= g_in
        col = np.zeros(n)
        col[0] = g_in
        cols.append(col)
        names.append("T_int")
    centers = (np.arange(n) + 0.5) / n
    return FdOperator(capacity=cap, stiffness=k, boundary=np.column_stack(cols),
                      centers=centers, boundary_names=tuple(names), g_out=g_out, g_in=g_in)


def fd_hourly_propagator(op: FdOperator, dt: float, substeps: int):
    """One-step maps ``(M, G)`` with ``T+ = M T + G u`` over ``dt``.

    Composes ``substeps`` implicit-Euler substeps with the boundary input
    held constant.
    """
    h = dt / substeps
    lhs = np.diag(op.capacity / h) - op.stiffness
    m1 = np.linalg.solve(lhs, np.diag(op.capacity / h))
    g1 = np.linalg.solve(lhs, op.boundary)
    m = np.eye(len(op.capacity))
    g = np.zeros_like(g1)
    for _ in range(substeps):
        g = m1 @ g + g1
        m = m1 @ m
    return m, g


def fd_steady_profile(op: FdOperator, u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return np.linalg.solve(-op.stiffness, op.boundary @ u)


def fd_simulate(cfg: FdWallConfig, inputs: TimeSeriesFrame, x0=None,
                return_profile: bool = False):
    """Implicit-Euler conduction with a convective exterior boundary.

    The interior face is adiabatic unless the wall enables the indoor
    branch, in which case ``T_int`` must be an input channel.  ``x0`` is a
    uniform temperature, a per-cell profile, or None for the steady profile
    of the first input row.  Returns sensor channels sampled every ``dt``
    (and the full cell history when ``return_profile``).
    """
    op = assemble_fd(cfg)
    missing = [c for c in op.boundary_names if c not in inputs.channels]
    if missing:
        raise SimulationError(f"fd_simulate needs input channels {missing}")
    u = inputs.select(op.boundary_names).values
    n = cfg.cells
    if x0 is None:
        prof = fd_steady_profile(op, u[0])
    else:
        x0 = np.asarray(x0, dtype=float)
        prof = np.full(n, float(x0)) if x0.ndim == 0 else x0.ravel().copy()
        if prof.shape != (n,):
            raise SimulationError(f"initial profile needs {n} cells")
    m, g = fd_hourly_propagator(op, inputs.dt, cfg.substeps)
    if not (np.all(np.isfinite(m)) and np.all(np.isfinite(g))):
        raise SimulationError("implicit solve produced non-finite values")
    steps = u.shape[0]
    hist = np.empty((steps, n))
    hist[0] = prof
    forced = u @ g.T
    mt = m.T
    for t in range(1, steps):
        hist[t] = hist[t - 1] @ mt + forced[t - 1]
    sensors = np.column_stack([_sample(hist, op.centers, d) for d in cfg.sensor_depths])
    frame = TimeSeriesFrame(dt=inputs.dt, channels=cfg.sensor_names, values=sensors,
                            start_index=inputs.start_index)
    if return_profile:
        return frame, hist
    return frame


def _sample(hist: np.ndarray, centers: np.ndarray, depth: float) -> np.ndarray:
    # linear interpolation between cell centres; constant beyond the outermost centres
    j = np.searchsorted(centers, depth)
    if j == 0:
        return hist[:, 0]
    if j >= len(centers):
        return hist[:, -1]
    w = (depth - centers[j - 1]) / (centers[j] - centers[j - 1])
    return (1.0 - w) * hist[:, j - 1] + w * hist[:, j]


def add_noise(frame: TimeSeriesFrame, mean: float, sd: float, seed: int = 0) -> TimeSeriesFrame:
    """Add i.i.d. Gaussian noise to every value of ``frame``."""
    if sd < 0:
        raise SimulationError("noise sd must be non-negative")
    if sd == 0:
        return frame.with_values(frame.values + mean)
    rng = np.random.default_rng(seed)
    noise = rng.normal(mean, sd, size=frame.values.shape)
    return frame.with_values(frame.values + noise)
