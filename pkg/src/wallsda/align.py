"""Subspace alignment between physics (source) and measured (target) data.

Two fitted transforms are provided:

* ``bergman``: rotate the source basis towards the target basis with
  ``M = V_s^T V_t`` and re-express centered source data through the aligned
  basis ``V_a = V_s M``.
* ``procrustes``: embed both centered windows into their own bases and fit
  an orthogonal map ``r`` plus isotropic scale ``s`` between the embedded
  point clouds, then lift through the target basis.

Both lift back with the target training means, so forecasts never look at
target data beyond the training window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import svd
from .rom import Subspace, center, embed, lift, lift_matrix
from .sim import TimeSeriesFrame


class AlignmentError(ValueError):
    pass


METHODS = ("bergman", "procrustes")


@dataclass(frozen=True)
class AlignmentModel:
    method: str
    V_s: Subspace
    V_t: Subspace
    mu_s: np.ndarray
    mu_t: np.ndarray
    channels: tuple
    M: np.ndarray | None = None
    r: np.ndarray | None = None
    s: float | None = None
    t: np.ndarray | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise AlignmentError(f"unknown alignment method {self.method!r}")
        if self.method == "bergman":
            if self.M is None or self.r is not None or self.s is not None:
                raise AlignmentError("a bergman model carries M only")
        else:
            if self.r is None or self.s is None or self.M is not None:
                raise AlignmentError("a procrustes model carries r, s and t only")
            if not self.s > 0:
                raise AlignmentError("procrustes scale must be positive")

    @property
    def V_a(self) -> np.ndarray:
        """Target-aligned source basis ``V_s M`` (bergman only)."""
        if self.M is None:
            raise AlignmentError("V_a is defined for bergman models only")
        return self.V_s.basis @ self.M

    def embedded_transform(self, z_s: np.ndarray) -> np.ndarray:
        """Map source-embedded coordinates to aligned target-embedded ones."""
        if self.method == "bergman":
            # X_c V_a = (X_c V_s) M
            return z_s @ self.M
        return self.s * z_s @ self.r + self.t


def _check_pair(source: TimeSeriesFrame, target: TimeSeriesFrame, v_s: Subspace, v_t: Subspace):
    if source.values.shape != target.values.shape:
        raise AlignmentError(
            f"source {source.values.shape} and target {target.values.shape} windows differ")
    if v_s.n_channels != source.values.shape[1] or v_t.n_channels != target.values.shape[1]:
        raise AlignmentError("basis row count must equal the channel count")
    if v_s.dim != v_t.dim:
        raise AlignmentError(f"source basis has {v_s.dim} columns, target basis {v_t.dim}")


def fit_bergman(source_train: TimeSeriesFrame, target_train: TimeSeriesFrame,
                V_s: Subspace, V_t: Subspace) -> AlignmentModel:
    """Closed-form minimiser of ``||V_s M - V_t||_F``: ``M = V_s^T V_t``."""
    _check_pair(source_train, target_train, V_s, V_t)
    m = V_s.basis.T @ V_t.basis
    return AlignmentModel(method="bergman", V_s=V_s, V_t=V_t,
                          mu_s=source_train.values.mean(axis=0),
                          mu_t=target_train.values.mean(axis=0),
                          channels=target_train.channels, M=m)


def procrustes(z_s: np.ndarray, z_t: np.ndarray):
    """Orthogonal ``r`` and scale ``s`` minimising ``||z_t - s z_s r||_F``.

    Both inputs are assumed centered.
    """
    dec = svd(z_s.T @ z_t)
    r = dec.U @ dec.Vt
    denom = np.trace(z_s.T @ z_s)
    if denom <= 0:
        raise AlignmentError("source window has zero energy; scale is undefined")
    s = float(dec.singular_values.sum() / denom)
    return r, s


def fit_procrustes(source_train: TimeSeriesFrame, target_train: TimeSeriesFrame,
                   V_s: Subspace, V_t: Subspace) -> AlignmentModel:
    _check_pair(source_train, target_train, V_s, V_t)
    cs = center(source_train)
    ct = center(target_train)
    r, s = procrustes(embed(cs, V_s), embed(ct, V_t))
    if not s > 0:
        raise AlignmentError("source and target windows are uncorrelated in the embedding")
    return AlignmentModel(method="procrustes", V_s=V_s, V_t=V_t, mu_s=cs.means, mu_t=ct.means,
                          channels=target_train.channels, r=r, s=s, t=np.zeros(V_s.dim))


def fit(method: str, source_train, target_train, V_s, V_t) -> AlignmentModel:
    if method == "bergman":
        return fit_bergman(source_train, target_train, V_s, V_t)
    if method == "procrustes":
        return fit_procrustes(source_train, target_train, V_s, V_t)
    raise AlignmentError(f"unknown alignment method {method!r}; expected one of {METHODS}")


def embedded_views(model: AlignmentModel, source_frame: TimeSeriesFrame,
                   target_frame: TimeSeriesFrame | None = None) -> dict:
    """Source, aligned and (optionally) target data in the embedded space.

    Everything is centered with the fitted training means.
    """
    z_s = embed(center(source_frame, model.mu_s), model.V_s)
    out = {"source": z_s, "aligned": model.embedded_transform(z_s)}
    if target_frame is not None:
        out["target"] = embed(center(target_frame, model.mu_t), model.V_t)
    return out


def apply(model: AlignmentModel, source_frame: TimeSeriesFrame) -> TimeSeriesFrame:
    """Transform source data into the target domain."""
    if source_frame.values.shape[1] != model.V_s.n_channels:
        raise AlignmentError(
            f"frame has {source_frame.values.shape[1]} channels, model expects {model.V_s.n_channels}")
    z_a = embedded_views(model, source_frame)["aligned"]
    return lift(z_a, model.V_t, model.mu_t, like=source_frame, channels=model.channels)


@dataclass(frozen=True)
class ForecastResult:
    aligned: TimeSeriesFrame
    pre_aligned: TimeSeriesFrame
    target: TimeSeriesFrame
    error_prealigned: TimeSeriesFrame
    error_postaligned: TimeSeriesFrame
    model: AlignmentModel | None = None
    extras: dict = field(default_factory=dict)


def forecast_result(model: AlignmentModel, source: TimeSeriesFrame,
                    target: TimeSeriesFrame) -> ForecastResult:
    aligned = apply(model, source)
    pre = source.with_values(source.values, channels=target.channels)
    return ForecastResult(
        aligned=aligned, pre_aligned=pre, target=target,
        error_prealigned=pre.with_values(pre.values - target.values),
        error_postaligned=aligned.with_values(aligned.values - target.values),
        model=model)


# -- flat text serialisation ---------------------------------------------------

def _fmt(a) -> str:
    return ",".join(f"{v:.17g}" for v in np.asarray(a, dtype=float).ravel())


def _subspace_lines(tag: str, s: Subspace) -> list[str]:
    lines = [f"{tag}.shape = {s.basis.shape[0]},{s.basis.shape[1]}",
             f"{tag}.basis = {_fmt(s.basis)}",
             f"{tag}.orthonormal = {str(s.orthonormal).lower()}",
             f"{tag}.origin = {s.origin}"]
    if s.eigenvalues is not None:
        lines.append(f"{tag}.eigenvalues = {_fmt(np.real(s.eigenvalues))}")
    return lines


def dumps_model(model: AlignmentModel) -> str:
    """Serialise to ``key = value`` lines; matrices row-major, comma-separated."""
    lines = ["[alignment]", f"method = {model.method}",
             f"channels = {','.join(model.channels)}",
             f"mu_s = {_fmt(model.mu_s)}", f"mu_t = {_fmt(model.mu_t)}"]
    lines += _subspace_lines("V_s", model.V_s)
    lines += _subspace_lines("V_t", model.V_t)
    if model.method == "bergman":
        lines.append(f"M = {_fmt(model.M)}")
    else:
        lines += [f"r = {_fmt(model.r)}", f"s = {model.s:.17g}", f"t = {_fmt(model.t)}"]
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> AlignmentModel:
    kv = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("["):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise AlignmentError(f"malformed line {raw!r}")
        kv[key.strip()] = val.strip()

    def vec(key):
        return np.array([float(x) for x in kv[key].split(",")]) if kv[key] else np.zeros(0)

    def sub(tag):
        n, d = (int(x) for x in kv[f"{tag}.shape"].split(","))
        eigs = vec(f"{tag}.eigenvalues") if f"{tag}.eigenvalues" in kv else None
        return Subspace(basis=vec(f"{tag}.basis").reshape(n, d), eigenvalues=eigs,
                        orthonormal=kv[f"{tag}.orthonormal"] == "true", origin=kv[f"{tag}.origin"])

    try:
        v_s, v_t = sub("V_s"), sub("V_t")
        common = dict(method=kv["method"], V_s=v_s, V_t=v_t, mu_s=vec("mu_s"), mu_t=vec("mu_t"),
                      channels=tuple(kv["channels"].split(",")))
        d = v_s.dim
        if kv["method"] == "bergman":
            return AlignmentModel(M=vec("M").reshape(d, d), **common)
        return AlignmentModel(r=vec("r").reshape(d, d), s=float(kv["s"]), t=vec("t"), **common)
    except KeyError as exc:
        raise AlignmentError(f"alignment document lacks key {exc}") from None
