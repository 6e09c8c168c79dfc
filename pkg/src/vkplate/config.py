"""Run configuration: presets and ``key=value`` config files."""

import dataclasses
import math
from dataclasses import dataclass, fields

from .elements import QuadratureMode
from .mesh import BoundarySelector


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


PRESET_NAMES = ("benchmark1", "benchmark2", "custom")
INITIAL_NAMES = ("bump", "zero")


@dataclass(frozen=True)
class RunConfig:
    preset: str = "custom"
    x1_min: float = -1.0
    x1_max: float = 1.0
    x2_min: float = -1.0
    x2_max: float = 1.0
    nx: int = 8
    ny: int = 8
    tau: float = 1.0
    n_max: int = 8
    lam: float = 1e3
    mu: float = 1e3
    c: float = 3e3
    f: float = 0.0
    boundary: str = "all_edges"
    initial: str = "zero"
    quadrature: str = "gauss2"
    grad_tol: float = 1e-8
    max_iter: int = 500
    memory: int = 10
    ls_shrink: float = 0.5
    ls_slope: float = 1e-4
    out: str = "out"
    mag: float = 1.0

    def __post_init__(self):
        for fd in fields(self):
            val = getattr(self, fd.name)
            if isinstance(val, float) and not math.isfinite(val):
                raise ConfigError(fd.name, f"must be finite, got {val}")
        checks = [
            ("preset", self.preset in PRESET_NAMES, f"one of {PRESET_NAMES}"),
            ("initial", self.initial in INITIAL_NAMES, f"one of {INITIAL_NAMES}"),
            ("boundary", self.boundary in {s.value for s in BoundarySelector},
             "all_edges or top_and_bottom"),
            ("quadrature", self.quadrature in {m.value for m in QuadratureMode},
             "paper, gauss2 or gauss3"),
            ("x1_max", self.x1_min < self.x1_max, "must exceed x1_min"),
            ("x2_max", self.x2_min < self.x2_max, "must exceed x2_min"),
            ("nx", self.nx >= 1, "must be >= 1"),
            ("ny", self.ny >= 1, "must be >= 1"),
            ("tau", self.tau > 0, "must be > 0"),
            ("n_max", self.n_max >= 0, "must be >= 0"),
            ("lam", self.lam >= 0, "must be >= 0"),
            ("mu", self.mu > 0, "must be > 0"),
            ("c", self.c > 0, "must be > 0"),
            ("grad_tol", self.grad_tol > 0, "must be > 0"),
            ("max_iter", self.max_iter >= 0, "must be >= 0"),
            ("memory", self.memory >= 1, "must be >= 1"),
            ("ls_shrink", 0 < self.ls_shrink < 1, "must lie in (0, 1)"),
            ("ls_slope", 0 < self.ls_slope < 0.5, "must lie in (0, 1/2)"),
            ("mag", self.mag > 0, "must be > 0"),
        ]
        for key, ok, msg in checks:
            if not ok:
                raise ConfigError(key, f"{msg}, got {getattr(self, key)!r}")


# Values that a preset pins; anything else keeps the RunConfig default.
PRESETS = {
    "benchmark1": dict(tau=1.0, lam=1e3, mu=1e3, c=3e3, f=-1e3,
                       boundary="all_edges", initial="bump", mag=4.0),
    "benchmark2": dict(tau=1.0, lam=1e3, mu=1e3, c=3e3, f=1e2,
                       boundary="top_and_bottom", initial="zero", mag=7.0),
    "custom": dict(),
}

_ALIASES = {"lambda": "lam"}
_TYPES = {fd.name: fd.type for fd in fields(RunConfig)}


def _parse(key, text):
    typ = _TYPES[key]
    try:
        if typ in (int, "int"):
            return int(text)
        if typ in (float, "float"):
            return float(text)
    except ValueError:
        raise ConfigError(key, f"cannot parse {text!r}") from None
    return str(text)


def parse_config_text(text):
    """Parse ``key=value`` lines (``#`` starts a comment) into a dict."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in _TYPES:
            raise ConfigError(key, "unknown key")
        out[key] = _parse(key, val)
    return out


def load_config(path=None, overrides=None):
    """Resolve a RunConfig from an optional file plus overrides.

    The preset supplies base values; file entries override the preset and
    ``overrides`` (e.g. from the command line) override the file.
    """
    values = {}
    if path is not None:
        with open(path) as fh:
            values.update(parse_config_text(fh.read()))
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        key = _ALIASES.get(key, key)
        if key not in _TYPES:
            raise ConfigError(key, "unknown key")
        values[key] = _parse(key, val) if isinstance(val, str) else val
    preset = values.get("preset", "custom")
    if preset not in PRESETS:
        raise ConfigError("preset", f"one of {PRESET_NAMES}, got {preset!r}")
    merged = {**PRESETS[preset], **values, "preset": preset}
    return RunConfig(**merged)


def preset_config(name, **overrides):
    return load_config(overrides={"preset": name, **overrides})


def replace(cfg, **changes):
    return dataclasses.replace(cfg, **changes)
