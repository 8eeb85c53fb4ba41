"""CSV frames and the sectioned ``key = value`` scenario configuration."""

from __future__ import annotations

import configparser
import csv
import io as _io
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .sim import SimulationError, TimeSeriesFrame, WeatherSpec
from .thermal import CONCRETE, RED_BRICK, ThermalModelError, WallSpec


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the offending key."""


# -- CSV ----------------------------------------------------------------------

def format_float(v: float) -> str:
    s = f"{v:.9g}"
    return "0" if s == "-0" else s


def frame_to_csv(frame: TimeSeriesFrame) -> str:
    out = _io.StringIO()
    out.write(",".join(("step", "hours") + tuple(frame.channels)) + "\n")
    hours = frame.hours
    for i, step in enumerate(frame.steps):
        row = [str(int(step)), format_float(hours[i])]
        row += [format_float(v) for v in frame.values[i]]
        out.write(",".join(row) + "\n")
    return out.getvalue()


def write_frame(frame: TimeSeriesFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(frame_to_csv(frame))
    return path


def read_frame(path, dt: float | None = None) -> TimeSeriesFrame:
    """Read a ``step,hours,<channels>`` CSV.

    ``dt`` is inferred from the hours column when not given (3600 s for a
    single row).
    """
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path}: empty CSV")
    header = [h.strip() for h in rows[0]]
    if header[:2] != ["step", "hours"] or len(header) < 3:
        raise ConfigError(f"{path}: header must start with 'step,hours' and name at least one channel")
    body = [r for r in rows[1:] if r]
    if not body:
        raise ConfigError(f"{path}: no data rows")
    try:
        arr = np.array([[float(x) for x in r] for r in body])
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric value ({exc})") from None
    if arr.shape[1] != len(header):
        raise ConfigError(f"{path}: ragged rows")
    steps = arr[:, 0].astype(int)
    if np.any(np.diff(steps) != 1):
        raise ConfigError(f"{path}: steps must be consecutive")
    if dt is None:
        if len(arr) > 1:
            dt = float(np.round((arr[1, 1] - arr[0, 1]) * 3600.0, 6))
        else:
            dt = 3600.0
    try:
        return TimeSeriesFrame(dt=dt, channels=tuple(header[2:]), values=arr[:, 2:],
                               start_index=int(steps[0]))
    except SimulationError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def write_table(rows: list[dict], path) -> Path:
    """Write dict rows as CSV with the union of keys in first-seen order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    keys: list[str] = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(keys) + "\n")
        for r in rows:
            fh.write(",".join(_cell(r.get(k, "")) for k in keys) + "\n")
    return path


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    s = str(v)
    return f'"{s}"' if ("," in s or '"' in s) else s


# -- scenario configuration ---------------------------------------------------

MATERIALS = {"brick": RED_BRICK, "red_brick": RED_BRICK, "concrete": CONCRETE}

WALL_KEYS = {"thickness", "volume", "face_area", "material", "conductivity", "density",
             "specific_heat", "h_out", "h_in", "indoor_branch", "exterior_conductance",
             "A", "B"}
TARGET_KEYS = WALL_KEYS | {"model", "cells", "sensor_depths", "substeps", "csv"}
WEATHER_KEYS = {"mean", "diurnal_amplitude", "diurnal_phase", "annual_amplitude",
                "ar1_coefficient", "ar1_noise_sd", "seed", "input_csv"}
EXPERIMENT_KEYS = {"dt", "train_hours", "forecast_hours", "rom", "alignment", "rank", "seed",
                   "initial_state"}
NOISE_KEYS = {"mean", "sd", "seed"}
OUTPUT_KEYS = {"dir", "figures"}
PORTRAIT_KEYS = {"operator", "field", "t1_min", "t1_max", "t2_min", "t2_max", "resolution",
                 "initial_states", "steps"}
SECTIONS = {"source": WALL_KEYS, "target": TARGET_KEYS, "weather": WEATHER_KEYS,
            "experiment": EXPERIMENT_KEYS, "noise": NOISE_KEYS, "output": OUTPUT_KEYS,
            "portrait": PORTRAIT_KEYS}


@dataclass(frozen=True)
class WallConfig:
    """A wall given physically, or as explicit ``A``/``B`` matrices."""

    spec: WallSpec | None = None
    A: np.ndarray | None = None
    B: np.ndarray | None = None

    @property
    def label(self) -> str:
        if self.spec is None:
            return "matrix"
        return f"{self.spec.thickness:g}m"


@dataclass(frozen=True)
class NoiseSpec:
    mean: float = 0.0
    sd: float = 0.0
    seed: int | None = None


@dataclass(frozen=True)
class PortraitRequest:
    operator: str = "physics"
    field: str = "discrete"
    t1_range: tuple = (-2.0, 12.0)
    t2_range: tuple = (-2.0, 12.0)
    resolution: int = 15
    initial_states: tuple = ((10.73, 10.82),)
    steps: int = 300

    def __post_init__(self):
        if self.operator not in ("physics", "dmd", "both"):
            raise ConfigError(f"[portrait] operator: expected physics, dmd or both, got {self.operator!r}")
        if self.field not in ("continuous", "discrete"):
            raise ConfigError(f"[portrait] field: expected continuous or discrete, got {self.field!r}")
        if self.resolution < 2:
            raise ConfigError("[portrait] resolution: need at least 2 points per axis")
        for name, rng in (("t1", self.t1_range), ("t2", self.t2_range)):
            if not rng[1] > rng[0]:
                raise ConfigError(f"[portrait] {name}_max must exceed {name}_min")
        if self.steps < 1:
            raise ConfigError("[portrait] steps: must be >= 1")


@dataclass(frozen=True)
class ScenarioConfig:
    source: WallConfig = field(default_factory=lambda: WallConfig(spec=WallSpec(0.2, 1.8)))
    target: WallConfig = field(default_factory=lambda: WallConfig(spec=WallSpec(0.2, 1.8)))
    target_model: str = "fd"
    target_csv: str | None = None
    fd_cells: int = 20
    fd_sensor_depths: tuple = (0.25, 0.75)
    fd_substeps: int = 6
    weather: WeatherSpec = field(default_factory=WeatherSpec)
    input_csv: str | None = None
    dt: float = 3600.0
    train_hours: int = 2000
    forecast_hours: int = 1000
    rom: str = "pod"
    alignment: str = "procrustes"
    rank: int | None = None
    seed: int = 0
    initial_state: tuple | None = None
    noise: NoiseSpec | None = None
    out_dir: str = "out"
    figures: bool = True
    portrait: PortraitRequest = field(default_factory=PortraitRequest)

    def __post_init__(self):
        validate(self)

    @property
    def n_states(self) -> int:
        return 2 if self.source.A is None else self.source.A.shape[0]

    @property
    def total_hours(self) -> int:
        return self.train_hours + self.forecast_hours

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=seed, weather=replace(self.weather, seed=seed))


def validate(cfg: ScenarioConfig) -> None:
    if cfg.rom not in ("pod", "dmd"):
        raise ConfigError(f"[experiment] rom: expected pod or dmd, got {cfg.rom!r}")
    if cfg.alignment not in ("procrustes", "bergman"):
        raise ConfigError(f"[experiment] alignment: expected procrustes or bergman, got {cfg.alignment!r}")
    if cfg.target_model not in ("fd", "ssm", "csv"):
        raise ConfigError(f"[target] model: expected fd, ssm or csv, got {cfg.target_model!r}")
    if cfg.target_model == "csv" and not cfg.target_csv:
        raise ConfigError("[target] csv: required when model = csv")
    if cfg.target_model == "fd" and cfg.target.spec is None:
        raise ConfigError("[target] thickness: an FD target needs a physical wall, not matrices")
    if not cfg.dt > 0:
        raise ConfigError("[experiment] dt: must be positive")
    if cfg.forecast_hours < 1:
        raise ConfigError("[experiment] forecast_hours: must be >= 1")
    if cfg.train_hours < 2 * cfg.n_states:
        raise ConfigError(
            f"[experiment] train_hours: need at least {2 * cfg.n_states} for {cfg.n_states} states")
    if cfg.rank is not None and not 1 <= cfg.rank <= cfg.n_states:
        raise ConfigError(f"[experiment] rank: must lie in [1, {cfg.n_states}]")
    if cfg.fd_cells < 3:
        raise ConfigError("[target] cells: must be >= 3")
    if cfg.fd_substeps < 1:
        raise ConfigError("[target] substeps: must be >= 1")
    if cfg.noise is not None and cfg.noise.sd < 0:
        raise ConfigError("[noise] sd: must be non-negative")
    if cfg.initial_state is not None and len(cfg.initial_state) != cfg.n_states:
        raise ConfigError(f"[experiment] initial_state: need {cfg.n_states} values")


def _float(sec: str, key: str, val: str) -> float:
    try:
        out = float(val)
    except ValueError:
        raise ConfigError(f"[{sec}] {key}: expected a number, got {val!r}") from None
    if not np.isfinite(out):
        raise ConfigError(f"[{sec}] {key}: must be finite")
    return out


def _int(sec: str, key: str, val: str) -> int:
    try:
        return int(val)
    except ValueError:
        raise ConfigError(f"[{sec}] {key}: expected an integer, got {val!r}") from None


def _bool(sec: str, key: str, val: str) -> bool:
    v = val.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{sec}] {key}: expected true/false, got {val!r}")


def _floats(sec: str, key: str, val: str) -> tuple:
    return tuple(_float(sec, key, v) for v in val.replace(";", ",").split(",") if v.strip())


def _matrix(sec: str, key: str, val: str) -> np.ndarray:
    rows = [r for r in val.split(";") if r.strip()]
    try:
        m = np.array([[float(x) for x in r.split(",")] for r in rows])
    except ValueError:
        raise ConfigError(f"[{sec}] {key}: expected rows 'a,b; c,d'") from None
    if m.ndim != 2:
        raise ConfigError(f"[{sec}] {key}: ragged matrix")
    return m


def _wall(sec: str, kv: dict) -> WallConfig:
    if "A" in kv:
        a = _matrix(sec, "A", kv["A"])
        if a.shape[0] != a.shape[1]:
            raise ConfigError(f"[{sec}] A: must be square")
        b = _matrix(sec, "B", kv["B"]).reshape(a.shape[0], -1) if "B" in kv else None
        return WallConfig(A=a, B=b)
    if "B" in kv:
        raise ConfigError(f"[{sec}] B: only valid together with A")
    material = RED_BRICK
    if "material" in kv:
        name = kv["material"].strip().lower()
        if name not in MATERIALS:
            raise ConfigError(f"[{sec}] material: unknown {name!r}; known {sorted(MATERIALS)}")
        material = MATERIALS[name]
    mat = {}
    for key, attr in (("conductivity", "conductivity"), ("density", "density"),
                      ("specific_heat", "specific_heat")):
        if key in kv:
            mat[attr] = _float(sec, key, kv[key])
    try:
        if mat:
            material = replace(material, **mat)
        thickness = _float(sec, "thickness", kv.get("thickness", "0.2"))
        if "volume" in kv and "face_area" in kv:
            raise ConfigError(f"[{sec}] volume: give volume or face_area, not both")
        if "volume" in kv:
            volume = _float(sec, "volume", kv["volume"])
        else:
            volume = _float(sec, "face_area", kv.get("face_area", "9")) * thickness
        spec = WallSpec(
            thickness=thickness, volume=volume, material=material,
            h_out=_float(sec, "h_out", kv.get("h_out", "25")),
            h_in=_float(sec, "h_in", kv.get("h_in", "8")),
            indoor_branch=_bool(sec, "indoor_branch", kv.get("indoor_branch", "false")),
            exterior_conductance=(_float(sec, "exterior_conductance", kv["exterior_conductance"])
                                  if "exterior_conductance" in kv else None))
    except ThermalModelError as exc:
        raise ConfigError(f"[{sec}] {exc}") from None
    return WallConfig(spec=spec)


def parse_config(text: str, base_dir=None) -> ScenarioConfig:
    """Parse a scenario document; unknown sections or keys are errors."""
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    data = {}
    for sec in cp.sections():
        if sec not in SECTIONS:
            raise ConfigError(f"[{sec}]: unknown section; expected one of {sorted(SECTIONS)}")
        kv = dict(cp.items(sec))
        bad = sorted(set(kv) - SECTIONS[sec])
        if bad:
            raise ConfigError(f"[{sec}] {bad[0]}: unknown key")
        data[sec] = kv
    base = Path(base_dir) if base_dir is not None else Path(".")

    def path(v: str) -> str:
        p = Path(v)
        return str(p if p.is_absolute() else base / p)

    kw: dict = {}
    if "source" in data:
        kw["source"] = _wall("source", data["source"])
    tgt = data.get("target", {})
    if tgt:
        wall_part = {k: v for k, v in tgt.items() if k in WALL_KEYS}
        if wall_part:
            kw["target"] = _wall("target", wall_part)
        elif "source" in kw:
            kw["target"] = kw["source"]
        if "model" in tgt:
            kw["target_model"] = tgt["model"].strip()
        if "csv" in tgt:
            kw["target_csv"] = path(tgt["csv"])
            kw.setdefault("target_model", "csv")
        if "cells" in tgt:
            kw["fd_cells"] = _int("target", "cells", tgt["cells"])
        if "substeps" in tgt:
            kw["fd_substeps"] = _int("target", "substeps", tgt["substeps"])
        if "sensor_depths" in tgt:
            kw["fd_sensor_depths"] = _floats("target", "sensor_depths", tgt["sensor_depths"])
            if len(kw["fd_sensor_depths"]) != 2 or not all(0 < d < 1 for d in kw["fd_sensor_depths"]):
                raise ConfigError("[target] sensor_depths: need two fractions inside (0, 1)")
    elif "source" in kw:
        kw["target"] = kw["source"]

    exp = data.get("experiment", {})
    seed = _int("experiment", "seed", exp["seed"]) if "seed" in exp else 0
    kw["seed"] = seed
    for key in ("dt",):
        if key in exp:
            kw[key] = _float("experiment", key, exp[key])
    for key in ("train_hours", "forecast_hours", "rank"):
        if key in exp:
            kw[key] = _int("experiment", key, exp[key])
    for key in ("rom", "alignment"):
        if key in exp:
            kw[key] = exp[key].strip().lower()
    if "initial_state" in exp:
        kw["initial_state"] = _floats("experiment", "initial_state", exp["initial_state"])

    w = data.get("weather", {})
    wkw = {"seed": seed}
    for key in ("mean", "diurnal_amplitude", "diurnal_phase", "annual_amplitude",
                "ar1_coefficient", "ar1_noise_sd"):
        if key in w:
            wkw[key] = _float("weather", key, w[key])
    if "seed" in w:
        wkw["seed"] = _int("weather", "seed", w["seed"])
    try:
        kw["weather"] = WeatherSpec(**wkw)
    except SimulationError as exc:
        raise ConfigError(f"[weather] {exc}") from None
    if "input_csv" in w:
        kw["input_csv"] = path(w["input_csv"])

    if "noise" in data:
        n = data["noise"]
        kw["noise"] = NoiseSpec(mean=_float("noise", "mean", n.get("mean", "0")),
                                sd=_float("noise", "sd", n.get("sd", "0")),
                                seed=_int("noise", "seed", n["seed"]) if "seed" in n else None)
    out = data.get("output", {})
    if "dir" in out:
        kw["out_dir"] = path(out["dir"])
    if "figures" in out:
        kw["figures"] = _bool("output", "figures", out["figures"])

    if "portrait" in data:
        p = data["portrait"]
        pkw = {}
        if "operator" in p:
            pkw["operator"] = p["operator"].strip().lower()
        if "field" in p:
            pkw["field"] = p["field"].strip().lower()
        for ax in ("t1", "t2"):
            lo, hi = f"{ax}_min", f"{ax}_max"
            if lo in p or hi in p:
                default = PortraitRequest().t1_range
                pkw[f"{ax}_range"] = (_float("portrait", lo, p.get(lo, str(default[0]))),
                                      _float("portrait", hi, p.get(hi, str(default[1]))))
        if "resolution" in p:
            pkw["resolution"] = _int("portrait", "resolution", p["resolution"])
        if "steps" in p:
            pkw["steps"] = _int("portrait", "steps", p["steps"])
        if "initial_states" in p:
            states = []
            for chunk in p["initial_states"].split(";"):
                if chunk.strip():
                    vals = _floats("portrait", "initial_states", chunk)
                    if len(vals) != 2:
                        raise ConfigError("[portrait] initial_states: pairs 'a,b; c,d' expected")
                    states.append(vals)
            pkw["initial_states"] = tuple(states)
        kw["portrait"] = PortraitRequest(**pkw)
    return ScenarioConfig(**kw)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=path.parent)
