"""Dense matrix kernels with explicit tolerance contracts.

Eigen- and singular-value decompositions are delegated to LAPACK through
numpy; this module fixes ordering and sign conventions on top of them so
every caller sees deterministic bases.  The matrix exponential follows the
eigendecomposition route ``V exp(dt*lambda) V^-1`` and falls back to
scaling-and-squaring when the eigenvector matrix is badly conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

# Shared numerical acceptance thresholds.
EIG_RESIDUAL_TOL = 1e-9
SVD_RECON_TOL = 1e-9
SEMIGROUP_TOL = 1e-8
ORTHONORMAL_TOL = 1e-10
EIGVEC_COND_LIMIT = 1e8


class NumericsError(ValueError):
    """Raised when a matrix kernel cannot honour its contract."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D float array, or raise."""
    m = np.array(a, dtype=float, copy=True)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise NumericsError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericsError(f"{name} contains NaN or Inf")
    return m


def _require_square(a: np.ndarray, name: str) -> None:
    if a.shape[0] != a.shape[1]:
        raise NumericsError(f"{name} must be square, got shape {a.shape}")


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    is_real: bool

    def residuals(self, a: np.ndarray) -> np.ndarray:
        """2-norm of ``A v_i - lambda_i v_i`` for every pair."""
        r = a @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(r, axis=0)


@dataclass(frozen=True)
class SvdDecomposition:
    U: np.ndarray
    singular_values: np.ndarray
    Vt: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.Vt


def _canonical_signs(vecs: np.ndarray) -> np.ndarray:
    """Flip each column so its first non-negligible component is positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        scale = np.max(np.abs(col)) if col.size else 0.0
        for c in col:
            # complex columns are keyed on the real part, then imaginary part
            key = c.real if abs(c.real) > 1e-12 * scale else c.imag
            if abs(key) > 1e-12 * scale:
                if key < 0:
                    out[:, j] = -col
                break
    return out


def eig(a) -> EigenDecomposition:
    """Eigendecomposition sorted by descending real part.

    Symmetric input goes through the symmetric solver so the returned
    eigenvectors are orthonormal.  Each eigenvector column has unit 2-norm
    and its first nonzero entry is positive.
    """
    a = as_matrix(a, "A")
    _require_square(a, "A")
    if np.allclose(a, a.T, rtol=0.0, atol=1e-14 * max(1.0, np.abs(a).max())):
        w, v = np.linalg.eigh(0.5 * (a + a.T))
    else:
        try:
            w, v = np.linalg.eig(a)
        except np.linalg.LinAlgError as exc:
            raise NumericsError(f"eigendecomposition failed to converge: {exc}") from exc
        if np.all(np.abs(w.imag) <= 1e-14 * max(1.0, np.abs(w).max())) and np.all(
            np.abs(v.imag) <= 1e-12
        ):
            w, v = w.real, v.real
    # stable sort on (-real, -imag) keeps conjugate pairs adjacent
    order = np.lexsort((-np.imag(w), -np.real(w)))
    w = w[order]
    v = v[:, order]
    v = v / np.linalg.norm(v, axis=0)
    v = _canonical_signs(v)
    return EigenDecomposition(eigenvalues=w, eigenvectors=v, is_real=not np.iscomplexobj(w))


def svd(x) -> SvdDecomposition:
    """Thin SVD with singular values in descending order."""
    x = as_matrix(x, "X")
    try:
        u, s, vt = np.linalg.svd(x, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(f"SVD failed to converge: {exc}") from exc
    return SvdDecomposition(U=u, singular_values=s, Vt=vt)


def expm_dt(a, dt: float) -> np.ndarray:
    """State transition matrix ``exp(dt * A)``.

    Uses ``V exp(dt*lambda) V^-1``; if the eigenvector matrix has a
    condition number above ``EIGVEC_COND_LIMIT`` (defective or nearly
    defective ``A``) the Pade scaling-and-squaring routine is used instead.
    """
    a = as_matrix(a, "A")
    _require_square(a, "A")
    if not dt > 0:
        raise NumericsError(f"dt must be positive, got {dt}")
    if not np.any(a):
        return np.eye(a.shape[0])
    dec = eig(a)
    v = dec.eigenvectors
    if np.linalg.cond(v) <= EIGVEC_COND_LIMIT:
        phi = (v * np.exp(dt * dec.eigenvalues)) @ np.linalg.inv(v)
        if np.iscomplexobj(phi):
            phi = phi.real
        if np.all(np.isfinite(phi)):
            return phi
    phi = scipy.linalg.expm(dt * a)
    if not np.all(np.isfinite(phi)):
        raise NumericsError("matrix exponential did not produce finite values")
    return phi


def is_orthonormal(basis: np.ndarray, tol: float = ORTHONORMAL_TOL) -> bool:
    basis = np.asarray(basis, dtype=float)
    gram = basis.T @ basis
    return bool(np.max(np.abs(gram - np.eye(gram.shape[0]))) <= tol)
