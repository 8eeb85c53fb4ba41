"""Centering, POD and DMD target subspaces, and embed/lift maps.

Data orientation throughout: rows are time steps, columns are channels.
A basis is ``n_channels x d``; embedding is ``X_c @ basis``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import ORTHONORMAL_TOL, eig, is_orthonormal, svd
from .sim import TimeSeriesFrame


class RomError(ValueError):
    pass


@dataclass(frozen=True)
class Subspace:
    basis: np.ndarray
    eigenvalues: np.ndarray | None = None
    orthonormal: bool = False
    origin: str = "pod"

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim != 2:
            raise RomError("basis must be 2-D")
        norms = np.linalg.norm(b, axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise RomError("basis columns must have unit 2-norm")
        if self.orthonormal and not is_orthonormal(b, ORTHONORMAL_TOL):
            raise RomError("basis flagged orthonormal but B^T B != I")
        if self.origin not in ("physics", "pod", "dmd"):
            raise RomError(f"unknown subspace origin {self.origin!r}")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def n_channels(self) -> int:
        return self.basis.shape[0]

    def rotated(self, q) -> "Subspace":
        """Basis ``V @ Q`` for an orthogonal ``Q`` (eigenvalues dropped)."""
        return Subspace(basis=self.basis @ q, eigenvalues=None,
                        orthonormal=self.orthonormal, origin=self.origin)


@dataclass(frozen=True)
class CenteredFrame:
    data: TimeSeriesFrame
    means: np.ndarray


def center(frame: TimeSeriesFrame, means=None) -> CenteredFrame:
    """Subtract per-channel means (the frame's own unless ``means`` given)."""
    vals = frame.values
    mu = vals.mean(axis=0) if means is None else np.asarray(means, dtype=float)
    return CenteredFrame(data=frame.with_values(vals - mu), means=mu)


def pod(centered: CenteredFrame, d: int) -> Subspace:
    """Leading ``d`` right singular vectors of the centered snapshot matrix."""
    x = centered.data.values
    n = x.shape[1]
    if not 1 <= d <= n:
        raise RomError(f"POD rank d={d} must lie in [1, {n}]")
    dec = svd(x)
    s = dec.singular_values
    tol = max(x.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    if d > rank:
        warnings.warn(f"POD rank {d} exceeds numerical rank {rank} of the data", stacklevel=2)
    basis = dec.Vt[:d].T
    return Subspace(basis=basis, eigenvalues=None, orthonormal=True, origin="pod")


def pod_energy(centered: CenteredFrame) -> np.ndarray:
    """Singular values of the centered data (descending)."""
    return svd(centered.data.values).singular_values


def dmd(centered: CenteredFrame, d: int) -> Subspace:
    """Exact DMD modes of the centered data, truncated at rank ``d``.

    Snapshots are paired ``x(t) -> x(t+1)``; modes are unit-normalized and
    returned with their discrete-time eigenvalues, sorted by decreasing
    real part.  Complex spectra are refused.
    """
    x = centered.data.values
    if x.shape[0] < 2:
        raise RomError("DMD needs at least two rows")
    n = x.shape[1]
    if not 1 <= d <= n:
        raise RomError(f"DMD rank d={d} must lie in [1, {n}]")
    # column-snapshot convention inside: X1 -> X2, each n x (z-1)
    x1 = x[:-1].T
    x2 = x[1:].T
    dec = svd(x1)
    u = dec.U[:, :d]
    s = dec.singular_values[:d]
    if np.any(s <= np.finfo(float).eps * max(dec.singular_values[0], 1.0)):
        raise RomError("DMD rank exceeds the rank of the snapshot matrix")
    vt = dec.Vt[:d]
    atilde = u.T @ x2 @ vt.T / s
    red = eig(atilde)
    if not red.is_real:
        raise RomError("DMD produced complex eigenvalues; use POD for this data")
    modes = x2 @ vt.T / s @ red.eigenvectors
    # zero eigenvalues give vanishing exact modes; use projected modes there
    norms = np.linalg.norm(modes, axis=0)
    weak = norms <= 1e-12 * max(1.0, norms.max(initial=0.0))
    if np.any(weak):
        modes[:, weak] = u @ red.eigenvectors[:, weak]
        norms = np.linalg.norm(modes, axis=0)
    modes = modes / norms
    ortho = bool(d == 1 or is_orthonormal(modes, 1e-8))
    return Subspace(basis=modes, eigenvalues=red.eigenvalues, orthonormal=ortho and d == 1,
                    origin="dmd")


def _as_values(x) -> np.ndarray:
    if isinstance(x, CenteredFrame):
        return x.data.values
    if isinstance(x, TimeSeriesFrame):
        return x.values
    return np.asarray(x, dtype=float)


def embed(centered, s: Subspace) -> np.ndarray:
    """Project centered data onto the basis: ``X_c @ V``."""
    x = _as_values(centered)
    if x.shape[1] != s.n_channels:
        raise RomError(f"data has {x.shape[1]} channels, basis has {s.n_channels} rows")
    return x @ s.basis


def lift_matrix(s: Subspace) -> np.ndarray:
    """Right factor mapping embedded coordinates back to channel space."""
    if s.orthonormal:
        return s.basis.T
    return np.linalg.pinv(s.basis)


def lift(embedded, s: Subspace, means, like: TimeSeriesFrame | None = None,
         channels=None, dt: float = 3600.0, start_index: int = 0) -> TimeSeriesFrame:
    """Map embedded coordinates to channel space and add ``means``.

    Orthonormal bases use the transpose; others the pseudoinverse, so the
    result is the least-squares preimage of the embedding.
    """
    z = np.atleast_2d(np.asarray(embedded, dtype=float))
    if z.shape[1] != s.dim:
        raise RomError(f"embedded data has {z.shape[1]} columns, basis has {s.dim}")
    vals = z @ lift_matrix(s) + np.asarray(means, dtype=float)
    if like is not None:
        return like.with_values(vals, channels=channels or like.channels)
    if channels is None:
        channels = tuple(f"x{i}" for i in range(s.n_channels))
    return TimeSeriesFrame(dt=dt, channels=channels, values=vals, start_index=start_index)


def dmd_operator(centered: CenteredFrame, d: int | None = None) -> np.ndarray:
    """Best-fit one-step operator ``x(t+1) ~ K x(t)`` in channel coordinates.

    Rank-``d`` projected form ``U_d Atilde U_d^T``; with ``d = n`` this is
    the least-squares solution ``X2 X1^+``.
    """
    x = centered.data.values
    if x.shape[0] < 2:
        raise RomError("DMD needs at least two rows")
    n = x.shape[1]
    d = n if d is None else d
    x1, x2 = x[:-1].T, x[1:].T
    dec = svd(x1)
    u, s, vt = dec.U[:, :d], dec.singular_values[:d], dec.Vt[:d]
    if np.any(s <= 0):
        raise RomError("snapshot matrix is rank deficient")
    atilde = u.T @ x2 @ vt.T / s
    return u @ atilde @ u.T
