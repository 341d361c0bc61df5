"""Experiment configuration: flat INI sections, validated at parse time.

Sections and keys:

    [alpha]      orders = 0.0, 0.5
    [grid]       radius = 10        ; scalar or per-axis list
                 points = 128       ; scalar or per-axis list
                 rule = gauss-legendre
    [scales]     sigma_min = 1e-3   sigma_max = 1e2   count = 200
    [function]   name = gaussian|bump|hermite_gaussian, plus parameters
    [multiplier] name = gaussian_ray|indicator_annulus|paxf, plus parameters
                 sigma = 1.0        ; used by multiplier-apply
    [sets]       e_box = 2.0        ; per-axis uppers, or e_mask = mask.npy
                 s_sigma = 1.0, 10.0
                 s_box = 8.0        ; or s_mask = mask.npy (omit for full domain)
    [verify]     which = hpw|hpw-general|donoho-stark|calderon|admissibility
                 a = 2.0  b = 1.0   ; exponents for hpw-general
    [tolerances] certificate = 1e-6  admissibility = 1e-3  calderon = 1e-3
    [translate]  x = 0.5            ; point for the translate command
    [convolve]   other = g.paxf     ; second operand for convolve

Every precondition of the modules driven by a config is checked here, so a
bad file fails with exit code 2 before any numerics run.
"""

import configparser
import math
import os
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import ConfigError
from .grids import Alpha, Box, ScaleGrid, TensorGrid
from .multiplier import Multiplier, gaussian_ray, indicator_annulus
from .uncertainty import ScaleRegion

__all__ = ["ExperimentConfig", "load_config", "make_function"]

VERIFY_KINDS = ("hpw", "hpw-general", "donoho-stark", "calderon", "admissibility")


def _floats(text):
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list from {text!r}") from exc


def make_function(name, params, n):
    """Vectorized closed-form test function on per-axis coordinates."""

    def radius_sq(*coords):
        total = 0.0
        for c in coords:
            total = total + np.asarray(c, dtype=float) ** 2
        return total

    if name == "gaussian":
        t = float(params.get("t", 1.0 / math.sqrt(2.0)))
        if t <= 0:
            raise ConfigError("gaussian needs t > 0")
        return lambda *cs: np.exp(-(t * t) * radius_sq(*cs))
    if name == "bump":
        a = float(params.get("a", 1.0))
        b = float(params.get("b", 4.0))
        if not 0 <= a < b:
            raise ConfigError("bump needs 0 <= a < b")

        def bump(*cs):
            r = np.sqrt(radius_sq(*cs))
            inside = (r > a) & (r < b)
            out = np.zeros_like(r)
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                vals = np.exp(-1.0 / np.where(inside, (r - a) * (b - r), 1.0))
            out[inside] = vals[inside]
            return out

        return bump
    if name == "hermite_gaussian":
        k = int(params.get("k", 1))
        if k < 0:
            raise ConfigError("hermite_gaussian needs k >= 0")
        return lambda *cs: radius_sq(*cs) ** k * np.exp(-radius_sq(*cs) / 2.0)
    raise ConfigError(f"unknown function {name!r}")


def _make_multiplier(name, params, base_dir):
    if name == "gaussian_ray":
        return gaussian_ray(float(params.get("c", 2.0)), float(params.get("p", 1.0)))
    if name == "indicator_annulus":
        return indicator_annulus(float(params.get("a", 1.0)), float(params.get("b", 1.0 * math.e)))
    if name == "paxf":
        from .fieldio import read_paxf

        path = params.get("path")
        if not path:
            raise ConfigError("paxf multiplier needs a path")
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        samples = read_paxf(path)
        return Multiplier(
            samples=samples,
            memberships=frozenset({"L1", "L2"}),
            name="paxf",
            params={"path": path},
        )
    raise ConfigError(f"unknown multiplier {name!r}")


@dataclass
class ExperimentConfig:
    path: str
    alpha: Alpha
    radii: list
    points: list
    rule: str
    sigma_min: float = 1e-3
    sigma_max: float = 1e2
    sigma_count: int = 200
    function_name: str = None
    function_params: dict = dataclass_field(default_factory=dict)
    multiplier_name: str = None
    multiplier_params: dict = dataclass_field(default_factory=dict)
    multiplier_sigma: float = 1.0
    e_region: object = None
    s_region: object = None
    verify_which: str = None
    general_a: float = 1.0
    general_b: float = 1.0
    tol_certificate: float = 1e-6
    tol_admissibility: float = 1e-3
    tol_calderon: float = 1e-3
    translate_x: list = None
    convolve_other: str = None

    def build_grid(self):
        return TensorGrid.build(self.alpha, self.radii, self.points, self.rule)

    def build_scales(self):
        return ScaleGrid.build(self.sigma_min, self.sigma_max, self.sigma_count)

    def build_function(self):
        if self.function_name is None:
            raise ConfigError(f"{self.path}: missing [function] section")
        return make_function(self.function_name, self.function_params, self.alpha.n)

    def build_multiplier(self):
        if self.multiplier_name is None:
            raise ConfigError(f"{self.path}: missing [multiplier] section")
        return _make_multiplier(
            self.multiplier_name, self.multiplier_params, os.path.dirname(self.path)
        )

    @property
    def has_multiplier(self):
        return self.multiplier_name is not None


def load_config(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config {path!r}")

    if "alpha" not in parser or "orders" not in parser["alpha"]:
        raise ConfigError(f"{path}: missing [alpha] orders")
    try:
        alpha = Alpha.of(_floats(parser["alpha"]["orders"]))
    except Exception as exc:
        raise ConfigError(f"{path}: bad alpha: {exc}") from exc

    grid_sec = parser["grid"] if "grid" in parser else {}
    radii = _floats(grid_sec.get("radius", "10"))
    points = [int(v) for v in _floats(grid_sec.get("points", "128"))]
    rule = grid_sec.get("rule", "gauss-legendre").strip()
    if len(radii) == 1:
        radii = radii * alpha.n
    if len(points) == 1:
        points = points * alpha.n
    if len(radii) != alpha.n or len(points) != alpha.n:
        raise ConfigError(f"{path}: radius/points must be scalar or one per axis")
    if any(r <= 0 for r in radii):
        raise ConfigError(f"{path}: radii must be positive")
    if any(p < 2 for p in points):
        raise ConfigError(f"{path}: every axis needs at least 2 points")
    if rule not in ("gauss-legendre", "trapezoid"):
        raise ConfigError(f"{path}: unknown rule {rule!r}")

    cfg = ExperimentConfig(
        path=os.path.abspath(path), alpha=alpha, radii=radii, points=points, rule=rule
    )

    if "scales" in parser:
        sec = parser["scales"]
        cfg.sigma_min = float(sec.get("sigma_min", cfg.sigma_min))
        cfg.sigma_max = float(sec.get("sigma_max", cfg.sigma_max))
        cfg.sigma_count = int(float(sec.get("count", cfg.sigma_count)))
        if not 0 < cfg.sigma_min < cfg.sigma_max:
            raise ConfigError(f"{path}: need 0 < sigma_min < sigma_max")
        if cfg.sigma_count < 1:
            raise ConfigError(f"{path}: scale count must be positive")

    if "function" in parser:
        sec = dict(parser["function"])
        cfg.function_name = sec.pop("name", None)
        if cfg.function_name is None:
            raise ConfigError(f"{path}: [function] needs a name")
        cfg.function_params = {k: float(v) for k, v in sec.items()}
        make_function(cfg.function_name, cfg.function_params, alpha.n)  # validate

    if "multiplier" in parser:
        sec = dict(parser["multiplier"])
        cfg.multiplier_name = sec.pop("name", None)
        if cfg.multiplier_name is None:
            raise ConfigError(f"{path}: [multiplier] needs a name")
        cfg.multiplier_sigma = float(sec.pop("sigma", "1.0"))
        if cfg.multiplier_sigma <= 0:
            raise ConfigError(f"{path}: multiplier sigma must be positive")
        cfg.multiplier_params = {
            k: (v if k == "path" else float(v)) for k, v in sec.items()
        }
        if cfg.multiplier_name not in ("gaussian_ray", "indicator_annulus", "paxf"):
            raise ConfigError(f"{path}: unknown multiplier {cfg.multiplier_name!r}")

    if "sets" in parser:
        sec = parser["sets"]
        base = os.path.dirname(os.path.abspath(path))
        if "e_box" in sec:
            uppers = _floats(sec["e_box"])
            if len(uppers) == 1:
                uppers = uppers * alpha.n
            if len(uppers) != alpha.n:
                raise ConfigError(f"{path}: e_box must have one upper per axis")
            cfg.e_region = Box(tuple(uppers))
        elif "e_mask" in sec:
            cfg.e_region = np.load(os.path.join(base, sec["e_mask"]))
        spatial = None
        if "s_box" in sec:
            uppers = _floats(sec["s_box"])
            if len(uppers) == 1:
                uppers = uppers * alpha.n
            spatial = Box(tuple(uppers))
        elif "s_mask" in sec:
            spatial = np.load(os.path.join(base, sec["s_mask"]))
        if "s_sigma" in sec:
            lo_hi = _floats(sec["s_sigma"])
            if len(lo_hi) != 2 or not lo_hi[0] < lo_hi[1]:
                raise ConfigError(f"{path}: s_sigma must be 'lo, hi' with lo < hi")
            cfg.s_region = ScaleRegion(lo_hi[0], lo_hi[1], spatial)

    if "verify" in parser:
        sec = parser["verify"]
        cfg.verify_which = sec.get("which", "").strip()
        if cfg.verify_which not in VERIFY_KINDS:
            raise ConfigError(
                f"{path}: [verify] which must be one of {VERIFY_KINDS}"
            )
        cfg.general_a = float(sec.get("a", "1.0"))
        cfg.general_b = float(sec.get("b", "1.0"))
        if cfg.general_a < 1 or cfg.general_b < 1:
            raise ConfigError(f"{path}: hpw-general needs a, b >= 1")

    if "tolerances" in parser:
        sec = parser["tolerances"]
        cfg.tol_certificate = float(sec.get("certificate", cfg.tol_certificate))
        cfg.tol_admissibility = float(sec.get("admissibility", cfg.tol_admissibility))
        cfg.tol_calderon = float(sec.get("calderon", cfg.tol_calderon))

    if "translate" in parser and "x" in parser["translate"]:
        xs = _floats(parser["translate"]["x"])
        if len(xs) == 1:
            xs = xs * alpha.n
        if len(xs) != alpha.n or any(v < 0 for v in xs):
            raise ConfigError(f"{path}: translate x must be nonnegative, one per axis")
        cfg.translate_x = xs

    if "convolve" in parser and "other" in parser["convolve"]:
        other = parser["convolve"]["other"].strip()
        if not os.path.isabs(other):
            other = os.path.join(os.path.dirname(os.path.abspath(path)), other)
        cfg.convolve_other = other

    return cfg
