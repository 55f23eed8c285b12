"""Run configuration: flat ``key=value`` files overlaid with command-line flags."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

COMMANDS = ("scenario1", "scenario2", "solve-rho", "solve-mu", "outage-curve", "validate")
FORMATS = ("csv", "json")

# power keys that may be given either linearly or in dB, never both
POWER_KEYS = ("ps1", "ps2", "pavg")

DEFAULT_SWEEPS = {
    "scenario1": "0:30:16",  # total power P_T in dB
    "scenario2": "0.05:0.9:18",  # target outage
    "outage-curve": "-10:20:16",  # average relay power in dB
}


class ConfigError(InvalidArgument):
    pass


def db_to_linear(v: float) -> float:
    return 10.0 ** (v / 10.0)


def linear_to_db(v: float) -> float:
    return 10.0 * math.log10(v)


@dataclass(frozen=True)
class Sweep:
    start: float
    stop: float
    points: int
    log: bool = False

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        parts = text.strip().split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
            raise ConfigError(f"sweep must be start:stop:points[:log], got {text!r}")
        try:
            start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad sweep {text!r}: {exc}") from None
        return cls(start, stop, points, len(parts) == 4)

    def __post_init__(self):
        if self.points < 1:
            raise ConfigError("sweep needs at least one point")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError("sweep bounds must be finite")
        if self.points > 1 and not self.start < self.stop:
            raise ConfigError("sweep must be increasing (start < stop)")
        if self.log and self.start <= 0:
            raise ConfigError("log sweep needs start > 0")

    def values(self) -> list[float]:
        if self.log:
            grid = np.geomspace(self.start, self.stop, self.points)
        else:
            grid = np.linspace(self.start, self.stop, self.points)
        return [float(v) for v in grid]

    def __str__(self):
        s = f"{self.start:g}:{self.stop:g}:{self.points}"
        return s + ":log" if self.log else s


@dataclass
class RunConfig:
    command: str
    ps1: float = 1.0
    ps2: float = 1.0
    r01: float = 0.5
    r02: float = 0.5
    omega_x: float = 1.0
    omega_y: float = 1.0
    pavg: float | None = None
    target_op: float | None = None
    sweep: Sweep | None = None
    n_samples: int = 10**6
    seed: int = 1
    output_path: str | None = None
    format: str = "csv"
    gnuplot: bool = False
    workers: int = 1
    # scenario2: tie end-node powers to the cutoff (ps1 = ps2 = mu)
    couple_end_nodes: bool = True
    # validate only: scale lambda by this factor in the corner check
    corrupt_lambda: float = 1.0
    given: set = field(default_factory=set, repr=False)

    def effective_sweep(self) -> Sweep | None:
        if self.sweep is not None:
            return self.sweep
        default = DEFAULT_SWEEPS.get(self.command)
        return Sweep.parse(default) if default else None

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        for name in ("ps1", "ps2", "r01", "r02", "omega_x", "omega_y"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive and finite, got {v!r}")
        if self.pavg is not None and not (math.isfinite(self.pavg) and self.pavg > 0):
            raise ConfigError(f"pavg must be positive, got {self.pavg!r}")
        if self.target_op is not None and not 0 < self.target_op < 1:
            raise ConfigError(f"target_op must lie in (0, 1), got {self.target_op!r}")
        if self.n_samples < 1:
            raise ConfigError("samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.gnuplot and not self.output_path:
            raise ConfigError("--gnuplot needs --out")
        if self.command == "solve-rho" and self.pavg is None:
            raise ConfigError("solve-rho needs pavg")
        if self.command == "solve-mu" and self.target_op is None:
            raise ConfigError("solve-mu needs target_op")
        sw = self.effective_sweep()
        if self.command == "scenario2" and sw is not None:
            if not all(0 < v < 1 for v in sw.values()):
                raise ConfigError("scenario2 sweep must lie inside (0, 1)")
        return self


_FLOAT_KEYS = {"ps1", "ps2", "r01", "r02", "omega_x", "omega_y", "pavg", "target_op",
               "corrupt_lambda"}
_INT_KEYS = {"samples": "n_samples", "seed": "seed", "workers": "workers"}
_STR_KEYS = {"out": "output_path", "format": "format"}
_BOOL_KEYS = {"gnuplot", "couple_end_nodes"}


def _parse_bool(key, text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def parse_assignments(pairs: list[tuple[str, str]], source: str) -> dict:
    """Turn raw ``key=value`` pairs into RunConfig field values.

    ``*_db`` power keys are converted to linear here; giving both forms of the
    same power within one source is an error.
    """
    out: dict = {}
    seen_power: dict[str, str] = {}
    for key, text in pairs:
        key = key.strip().replace("-", "_")
        text = text.strip()
        base = key[:-3] if key.endswith("_db") else key
        try:
            if base in POWER_KEYS:
                if base in seen_power and seen_power[base] != key:
                    raise ConfigError(
                        f"{source}: {base} and {base}_db are mutually exclusive"
                    )
                seen_power[base] = key
                v = float(text)
                out[base] = db_to_linear(v) if key.endswith("_db") else v
            elif key in _FLOAT_KEYS:
                out[key] = float(text)
            elif key in _INT_KEYS:
                out[_INT_KEYS[key]] = int(text)
            elif key in _STR_KEYS:
                out[_STR_KEYS[key]] = text
            elif key in _BOOL_KEYS:
                out[key] = _parse_bool(key, text)
            elif key == "sweep":
                out["sweep"] = Sweep.parse(text)
            elif key == "command":
                out["command"] = text
            else:
                raise ConfigError(f"{source}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{source}: bad value for {key}: {text!r}") from None
    return out


def read_config_file(path: str) -> dict:
    pairs = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        pairs.append((key, value))
    return parse_assignments(pairs, path)


def build_config(command: str, file_values: dict, flag_values: dict) -> RunConfig:
    """File values first, flags on top; returns a validated config."""
    merged = {**file_values, **flag_values}
    merged.pop("command", None)
    cfg = RunConfig(command=command)
    names = {f.name for f in dataclasses.fields(RunConfig)}
    for k, v in merged.items():
        if k not in names:
            raise ConfigError(f"unknown setting {k!r}")
        setattr(cfg, k, v)
    cfg.given = set(merged)
    return cfg.validate()
