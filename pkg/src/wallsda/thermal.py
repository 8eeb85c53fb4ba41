"""Lumped 3R2C wall model: RC parameters, continuous SSM, and ZOH discretisation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import as_matrix, eig, expm_dt, is_orthonormal


class ThermalModelError(ValueError):
    pass


@dataclass(frozen=True)
class MaterialSpec:
    conductivity: float  # W/(m K)
    density: float  # kg/m3
    specific_heat: float  # J/(kg K)

    def __post_init__(self):
        for name in ("conductivity", "density", "specific_heat"):
            if not getattr(self, name) > 0:
                raise ThermalModelError(f"material {name} must be positive")

    @property
    def diffusivity(self) -> float:
        return self.conductivity / (self.density * self.specific_heat)


RED_BRICK = MaterialSpec(conductivity=0.72, density=1920.0, specific_heat=780.0)
CONCRETE = MaterialSpec(conductivity=1.3, density=2240.0, specific_heat=840.0)

#: Face area of the reference wall: layer volume 1.8 m3 over 0.2 m thickness.
REFERENCE_FACE_AREA = 9.0
#: Exterior conductance implied by entry (2,2) of the published 0.2 m A matrix.
REFERENCE_EXTERIOR_CONDUCTANCE = 180.0


@dataclass(frozen=True)
class WallSpec:
    """Geometry, material and surface coefficients of a single-layer wall.

    ``exterior_conductance`` overrides ``h_out * face_area`` (W/K) when set;
    it exists to reproduce the published matrices, whose exterior term is
    not recoverable from the tabulated convection coefficient.
    """

    thickness: float
    volume: float
    material: MaterialSpec = RED_BRICK
    h_out: float = 25.0
    h_in: float = 8.0
    indoor_branch: bool = False
    exterior_conductance: float | None = None

    def __post_init__(self):
        if not self.thickness > 0:
            raise ThermalModelError("wall thickness must be positive")
        if not self.volume > 0:
            raise ThermalModelError("wall volume must be positive")
        if not self.h_out >= 0 or not self.h_in >= 0:
            raise ThermalModelError("convection coefficients must be non-negative")
        if self.exterior_conductance is not None and not self.exterior_conductance >= 0:
            raise ThermalModelError("exterior_conductance must be non-negative")

    @property
    def face_area(self) -> float:
        return self.volume / self.thickness

    @classmethod
    def with_thickness(cls, thickness: float, material: MaterialSpec = RED_BRICK,
                       face_area: float = REFERENCE_FACE_AREA, **kw) -> "WallSpec":
        """Wall of the reference face area scaled to ``thickness``."""
        return cls(thickness=thickness, volume=face_area * thickness, material=material, **kw)


def reference_wall(**kw) -> WallSpec:
    """The 0.2 m red-brick wall with V = 1.8 m3."""
    return WallSpec(thickness=0.2, volume=1.8, **kw)


@dataclass(frozen=True)
class RcParameters:
    c_ext1: float
    c_ext2: float
    u_cond: float
    u_out: float
    u_in: float | None = None

    def __post_init__(self):
        if not (self.c_ext1 > 0 and self.c_ext2 > 0):
            raise ThermalModelError("capacitances must be positive")
        if not self.u_cond > 0:
            raise ThermalModelError("conduction conductance must be positive")
        if not self.u_out >= 0:
            raise ThermalModelError("exterior conductance must be non-negative")
        if self.u_in is not None and not self.u_in > 0:
            raise ThermalModelError("indoor conductance must be positive when enabled")

    @property
    def r_cond(self) -> float:
        return 1.0 / self.u_cond

    @property
    def r_out(self) -> float:
        return np.inf if self.u_out == 0 else 1.0 / self.u_out


def derive_rc(spec: WallSpec) -> RcParameters:
    """First-principles R and C values for the two-node wall.

    Each node stores ``Cp * rho * V``; the nodes are linked by the
    full-thickness conductance ``k * A / w``; the exterior film is
    ``h_out * A``.
    """
    m = spec.material
    cap = m.specific_heat * m.density * spec.volume
    area = spec.face_area
    u_cond = m.conductivity * area / spec.thickness
    if spec.exterior_conductance is not None:
        u_out = spec.exterior_conductance
    else:
        u_out = spec.h_out * area
    u_in = spec.h_in * area if spec.indoor_branch else None
    return RcParameters(c_ext1=cap, c_ext2=cap, u_cond=u_cond, u_out=u_out, u_in=u_in)


@dataclass(frozen=True)
class StateSpaceModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    state_names: tuple = ("T_ext1", "T_ext2")
    input_names: tuple = ("T_ext",)
    output_names: tuple = ("T_ext1",)

    def __post_init__(self):
        a = as_matrix(self.A, "A")
        n = a.shape[0]
        if a.shape != (n, n):
            raise ThermalModelError(f"A must be square, got {a.shape}")
        b = as_matrix(self.B, "B").reshape(n, -1)
        c = as_matrix(self.C, "C").reshape(-1, n)
        d = as_matrix(self.D, "D").reshape(c.shape[0], b.shape[1])
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "D", d)
        for names, size, what in ((self.state_names, n, "state"),
                                  (self.input_names, b.shape[1], "input"),
                                  (self.output_names, c.shape[0], "output")):
            if len(names) != size:
                raise ThermalModelError(f"{len(names)} {what} names for {size} {what}s")

    @property
    def n_states(self) -> int:
        return self.A.shape[0]


def build_ssm(rc: RcParameters, heat_gains: tuple[float, float] | None = None) -> StateSpaceModel:
    """Continuous-time SSM of the 3R2C wall.

    States (T_ext1, T_ext2), input T_ext, output T_ext1.  With the indoor
    branch enabled ``T_int`` becomes a second input; ``heat_gains`` (W per
    node) adds a unit-valued constant input column ``Q``.
    """
    c1, c2 = rc.c_ext1, rc.c_ext2
    a = np.array([[-rc.u_cond / c1, rc.u_cond / c1],
                  [rc.u_cond / c2, -(rc.u_cond + rc.u_out) / c2]])
    b_cols = [np.array([0.0, rc.u_out / c2])]
    inputs = ["T_ext"]
    if rc.u_in is not None:
        a[0, 0] -= rc.u_in / c1
        b_cols.append(np.array([rc.u_in / c1, 0.0]))
        inputs.append("T_int")
    if heat_gains is not None:
        b_cols.append(np.array([heat_gains[0] / c1, heat_gains[1] / c2]))
        inputs.append("Q")
    b = np.column_stack(b_cols)
    return StateSpaceModel(A=a, B=b, C=np.array([[1.0, 0.0]]),
                           D=np.zeros((1, b.shape[1])), input_names=tuple(inputs))


def ssm_from_matrices(a, b=None) -> StateSpaceModel:
    """Wrap explicitly supplied A (and B) as a wall SSM.

    When ``b`` is omitted the input column is chosen so that every row of
    ``[A | B]`` sums to zero, i.e. constant ambient temperature is an
    equilibrium.
    """
    a = as_matrix(a, "A")
    if b is None:
        b = -a.sum(axis=1, keepdims=True)
    b = as_matrix(b, "B").reshape(a.shape[0], -1)
    n = a.shape[0]
    states = ("T_ext1", "T_ext2") if n == 2 else tuple(f"x{i}" for i in range(n))
    c = np.zeros((1, n))
    c[0, 0] = 1.0
    inputs = ("T_ext",) if b.shape[1] == 1 else tuple(f"u{i}" for i in range(b.shape[1]))
    return StateSpaceModel(A=a, B=b, C=c, D=np.zeros((1, b.shape[1])),
                           state_names=states, input_names=inputs, output_names=(states[0],))


#: A of the published 0.2 m wall, taken literally.
REFERENCE_A = np.array([[-1.2019e-05, 1.2019e-05],
                    [1.2019e-05, -7.879e-05]])


@dataclass(frozen=True)
class DiscreteSSM:
    Phi: np.ndarray
    Gamma: np.ndarray
    C: np.ndarray
    D: np.ndarray
    dt: float
    state_names: tuple = ("T_ext1", "T_ext2")
    input_names: tuple = ("T_ext",)
    output_names: tuple = ("T_ext1",)

    @property
    def n_states(self) -> int:
        return self.Phi.shape[0]

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.Phi))))


def discretize(ssm: StateSpaceModel, dt: float) -> DiscreteSSM:
    """Exact zero-order-hold discretisation.

    ``Gamma = A^-1 (Phi - I) B``, which is valid for the invertible A of a
    dissipative wall.  Singular A (adiabatic exterior) raises.
    """
    if not dt > 0:
        raise ThermalModelError(f"dt must be positive, got {dt}")
    phi = expm_dt(ssm.A, dt)
    n = ssm.n_states
    if np.linalg.matrix_rank(ssm.A) < n:
        raise ThermalModelError("A is singular; zero-order hold needs a dissipative wall")
    gamma = np.linalg.solve(ssm.A, (phi - np.eye(n)) @ ssm.B)
    return DiscreteSSM(Phi=phi, Gamma=gamma, C=ssm.C.copy(), D=ssm.D.copy(), dt=float(dt),
                       state_names=ssm.state_names, input_names=ssm.input_names,
                       output_names=ssm.output_names)


def source_subspace(ssm: StateSpaceModel):
    """Basis of eigenvectors of A, with continuous-time eigenvalues."""
    from .rom import Subspace

    dec = eig(ssm.A)
    if not dec.is_real:
        raise ThermalModelError("A has complex eigenvectors; a real source basis is undefined")
    basis = dec.eigenvectors
    return Subspace(basis=basis, eigenvalues=dec.eigenvalues,
                    orthonormal=is_orthonormal(basis), origin="physics")


def wall_ssm(spec: WallSpec) -> StateSpaceModel:
    return build_ssm(derive_rc(spec))
