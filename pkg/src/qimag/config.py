"""Scenario configuration: a TOML file of flat tables of key = value.

Exactly one level of nesting (top-level tables only).  Analytic field
forms are limited to a documented registry; amplitude-like parameters
accept either a float or a two-element [re, im] list for complex fields.

Grammar (all tables optional unless a mode needs them):

    mode = "audit" | "evolve-complex" | "evolve-quat" | "eigen-reduce"
    seed = 0

    [grid]      n, dx, origin = 0.0, boundary = "periodic" | "dirichlet"
    [physics]   hbar = 1.0, m = 1.0
    [run]       t_end, dt, output_stride = 1
    [audit]     grid_n = 256, threads = 1, tolerance_scale = 1.0
    [complex]   theta0 = 0.0, theta_slope = 0.0, theta_rate = 0.0
    [complex_potential]   a form table (see below)
    [complex_initial]     kind = "eigenstate", level = 1
                          | kind = "gaussian", center, width, momentum = 0.0
    [quat]      gamma0 = 0.0, omega0 = 0.0, level = 1, energy (optional)
    [quat_potential_v]    form table (complex allowed)
    [quat_potential_w]    form table (complex allowed)
    [quat_potential_alpha] form table (real)
    [quat_potential_beta]  form table (complex allowed)
    [quat_initial]        level = 1
    [eigen]     k = [kx, ky, kz], g = [gx, gy, gz], gamma0, omega0,
                level = 1, t_check = 0.37

Form tables:

    {form = "constant", value = v}
    {form = "linear", coeff = c, offset = 0.0}
    {form = "sine", amplitude = a, wavenumber = k, phase = 0.0}
    {form = "gaussian-well", depth = d, width = w, center = c}
    {form = "box", height = h, left = l, right = r}
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .grid import DIRICHLET, Grid1D, PERIODIC

MODES = ("audit", "evolve-complex", "evolve-quat", "eigen-reduce")
FORMS = ("constant", "linear", "sine", "gaussian-well", "box")


def _amplitude(raw, where: str) -> complex:
    if isinstance(raw, (int, float)):
        return complex(raw)
    if isinstance(raw, list) and len(raw) == 2 \
            and all(isinstance(v, (int, float)) for v in raw):
        return complex(raw[0], raw[1])
    raise ConfigError(f"{where}: expected a number or [re, im] pair, got {raw!r}")


def evaluate_form(spec: Dict, x: np.ndarray, where: str) -> np.ndarray:
    """Evaluate a named analytic form on coordinates x (complex array)."""
    if not isinstance(spec, dict) or "form" not in spec:
        raise ConfigError(f"{where}: a form table needs a 'form' key")
    kind = spec["form"]
    if kind == "constant":
        return np.full(x.shape, _amplitude(spec.get("value", 0.0), where))
    if kind == "linear":
        c = _amplitude(spec.get("coeff", 0.0), where)
        off = _amplitude(spec.get("offset", 0.0), where)
        return off + c * x
    if kind == "sine":
        a = _amplitude(spec.get("amplitude", 1.0), where)
        k = float(spec.get("wavenumber", 1.0))
        phase = float(spec.get("phase", 0.0))
        return a * np.sin(k * x + phase)
    if kind == "gaussian-well":
        d = _amplitude(spec.get("depth", 1.0), where)
        w = float(spec.get("width", 1.0))
        c0 = float(spec.get("center", 0.0))
        if w <= 0:
            raise ConfigError(f"{where}: gaussian-well width must be positive")
        return -d * np.exp(-(((x - c0) / w) ** 2))
    if kind == "box":
        h = _amplitude(spec.get("height", 1.0), where)
        left = float(spec.get("left", 0.0))
        right = float(spec.get("right", 0.0))
        return np.where((x.real >= left) & (x.real <= right), h, 0.0 + 0.0j)
    raise ConfigError(f"{where}: unknown form {kind!r}; registry: {', '.join(FORMS)}")


@dataclass
class ScenarioConfig:
    mode: str = "audit"
    seed: int = 0
    grid: Dict = field(default_factory=dict)
    physics: Dict = field(default_factory=dict)
    run: Dict = field(default_factory=dict)
    audit: Dict = field(default_factory=dict)
    complex_block: Dict = field(default_factory=dict)
    complex_potential: Dict = field(default_factory=dict)
    complex_initial: Dict = field(default_factory=dict)
    quat: Dict = field(default_factory=dict)
    quat_potential_v: Dict = field(default_factory=dict)
    quat_potential_w: Dict = field(default_factory=dict)
    quat_potential_alpha: Dict = field(default_factory=dict)
    quat_potential_beta: Dict = field(default_factory=dict)
    quat_initial: Dict = field(default_factory=dict)
    eigen: Dict = field(default_factory=dict)

    @property
    def hbar(self) -> float:
        return float(self.physics.get("hbar", 1.0))

    @property
    def m(self) -> float:
        return float(self.physics.get("m", 1.0))

    def build_grid(self) -> Grid1D:
        if not self.grid:
            raise ConfigError("this mode needs a [grid] table with n and dx")
        try:
            return Grid1D(n=int(self.grid["n"]), dx=float(self.grid["dx"]),
                          origin=float(self.grid.get("origin", 0.0)),
                          boundary=str(self.grid.get("boundary", PERIODIC)))
        except KeyError as exc:
            raise ConfigError(f"[grid] is missing the {exc.args[0]!r} key") from None
        except ValueError as exc:
            raise ConfigError(f"[grid]: {exc}") from None

    def effective(self) -> Dict:
        """Full configuration with defaults applied, ready to re-run."""
        out: Dict = {"mode": self.mode, "seed": self.seed}
        out["physics"] = {"hbar": self.hbar, "m": self.m}
        if self.grid:
            out["grid"] = {"n": int(self.grid["n"]), "dx": float(self.grid["dx"]),
                           "origin": float(self.grid.get("origin", 0.0)),
                           "boundary": str(self.grid.get("boundary", PERIODIC))}
        if self.run:
            out["run"] = {"t_end": float(self.run.get("t_end", 1.0)),
                          "dt": float(self.run.get("dt", 0.0)),
                          "output_stride": int(self.run.get("output_stride", 1))}
        if self.mode == "audit":
            out["audit"] = {"grid_n": int(self.audit.get("grid_n", 256)),
                            "threads": int(self.audit.get("threads", 1))}
        for name, block in (("complex", self.complex_block),
                            ("complex_potential", self.complex_potential),
                            ("complex_initial", self.complex_initial),
                            ("quat", self.quat),
                            ("quat_potential_v", self.quat_potential_v),
                            ("quat_potential_w", self.quat_potential_w),
                            ("quat_potential_alpha", self.quat_potential_alpha),
                            ("quat_potential_beta", self.quat_potential_beta),
                            ("quat_initial", self.quat_initial),
                            ("eigen", self.eigen)):
            if block:
                out[name] = dict(block)
        return out


_TABLE_KEYS = {
    "grid": "grid", "physics": "physics", "run": "run", "audit": "audit",
    "complex": "complex_block", "complex_potential": "complex_potential",
    "complex_initial": "complex_initial", "quat": "quat",
    "quat_potential_v": "quat_potential_v", "quat_potential_w": "quat_potential_w",
    "quat_potential_alpha": "quat_potential_alpha",
    "quat_potential_beta": "quat_potential_beta",
    "quat_initial": "quat_initial", "eigen": "eigen",
}


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: parse error: {exc}") from None
    cfg = ScenarioConfig()
    for key, value in raw.items():
        if key == "mode":
            if value not in MODES:
                raise ConfigError(f"{source}: mode must be one of {', '.join(MODES)}, "
                                  f"got {value!r}")
            cfg.mode = value
        elif key == "seed":
            if not isinstance(value, int) or value < 0:
                raise ConfigError(f"{source}: seed must be a non-negative integer")
            cfg.seed = value
        elif key in _TABLE_KEYS:
            if not isinstance(value, dict):
                raise ConfigError(f"{source}: [{key}] must be a table")
            for sub, subval in value.items():
                if isinstance(subval, dict):
                    raise ConfigError(
                        f"{source}: [{key}].{sub}: only one level of nesting is allowed")
            setattr(cfg, _TABLE_KEYS[key], value)
        else:
            raise ConfigError(f"{source}: unknown top-level key {key!r}")
    _validate(cfg, source)
    return cfg


def load_config(path) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))


def _validate(cfg: ScenarioConfig, source: str) -> None:
    if cfg.mode in ("evolve-complex", "evolve-quat"):
        grid = cfg.build_grid()
        if not cfg.run or "t_end" not in cfg.run or "dt" not in cfg.run:
            raise ConfigError(f"{source}: [run] needs t_end and dt for {cfg.mode}")
        dt = float(cfg.run["dt"])
        if dt <= 0:
            raise ConfigError(f"{source}: [run].dt must be positive")
        bound = 0.5 * (2.0 * cfg.m / cfg.hbar) * grid.dx**2 / 2.0
        if dt > bound:
            raise ConfigError(
                f"{source}: [run].dt = {dt} exceeds the stability bound {bound:.6g} "
                f"for this grid (reduce dt or refine)")
        stride = int(cfg.run.get("output_stride", 1))
        if stride < 1:
            raise ConfigError(f"{source}: [run].output_stride must be >= 1")
        initial = cfg.complex_initial if cfg.mode == "evolve-complex" else cfg.quat_initial
        kind = initial.get("kind", "eigenstate")
        if kind == "eigenstate" and grid.boundary != DIRICHLET:
            raise ConfigError(
                f"{source}: eigenstate initial states need boundary = \"dirichlet\"")
        if cfg.mode == "evolve-quat" and kind != "eigenstate":
            raise ConfigError(
                f"{source}: evolve-quat starts from a factorised eigenstate; "
                f"got kind = {kind!r}")
        if kind not in ("eigenstate", "gaussian"):
            raise ConfigError(f"{source}: unknown initial state kind {kind!r}")
        # evaluate forms once so malformed tables fail at load time
        x = grid.x.astype(complex)
        if cfg.mode == "evolve-complex" and cfg.complex_potential:
            evaluate_form(cfg.complex_potential, x, f"{source}: [complex_potential]")
        if cfg.mode == "evolve-quat":
            for name, block in (("quat_potential_v", cfg.quat_potential_v),
                                ("quat_potential_w", cfg.quat_potential_w),
                                ("quat_potential_alpha", cfg.quat_potential_alpha),
                                ("quat_potential_beta", cfg.quat_potential_beta)):
                if block:
                    values = evaluate_form(block, x, f"{source}: [{name}]")
                    if name == "quat_potential_alpha" and np.any(values.imag != 0.0):
                        raise ConfigError(
                            f"{source}: [quat_potential_alpha] must be real valued")
    if cfg.mode == "eigen-reduce":
        if not cfg.eigen:
            raise ConfigError(f"{source}: eigen-reduce needs an [eigen] table")
        for key in ("k", "g"):
            vec = cfg.eigen.get(key)
            if (not isinstance(vec, list) or len(vec) != 3
                    or not all(isinstance(v, (int, float)) for v in vec)):
                raise ConfigError(f"{source}: [eigen].{key} must be a 3-vector list")
        kv = np.asarray(cfg.eigen["k"], dtype=float)
        gv = np.asarray(cfg.eigen["g"], dtype=float)
        scale = max(float(np.linalg.norm(kv) * np.linalg.norm(gv)), 1.0)
        if abs(float(kv @ gv)) > 1e-12 * scale:
            raise ConfigError(f"{source}: [eigen] needs k.g = 0, got {float(kv @ gv)}")
        cfg.build_grid()


def dump_toml(data: Dict) -> str:
    """Serialise the effective configuration back to (flat-table) TOML."""
    def scalar(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        if isinstance(v, str):
            return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
        if isinstance(v, list):
            return "[" + ", ".join(scalar(item) for item in v) + "]"
        raise ConfigError(f"cannot serialise {type(v).__name__} to TOML")

    top = []
    tables = []
    for key, value in data.items():
        if isinstance(value, dict):
            rows = "\n".join(f"{k} = {scalar(v)}" for k, v in value.items())
            tables.append(f"[{key}]\n{rows}\n")
        else:
            top.append(f"{key} = {scalar(value)}")
    return "\n".join(top) + ("\n\n" if top and tables else "\n" if top else "") \
        + "\n".join(tables)
