"""Run configuration: dataclasses, TOML reading and writing, validation."""
from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, fields

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

METHODS = ("exact", "circuit-homogeneous", "lcu", "autonomise")
FAMILIES = ("dirichlet", "neumann", "periodic")
MODES = ("original", "modified")


class ConfigError(ValueError):
    """Validation failure; the message starts with the offending field path."""


@dataclass
class ProblemConfig:
    d: int = 1
    n_x: int = 4
    family: str = "dirichlet"
    a: float = 1.0
    domain: list = field(default_factory=lambda: [0.0, 1.0])
    # face key "<axis><side>" with side "-" or "+", e.g. "0-" -> signal string
    boundary: dict = field(default_factory=dict)
    initial: str = "sin_mode(1)"


@dataclass
class SchrodConfig:
    R: float = 3.0
    n_p: int = 6


@dataclass
class TimeConfig:
    T: float = 0.05
    r: int | None = None
    delta: float = 1e-2
    K: int | None = None
    delta1: float = 1e-2
    n_s: int = 5


@dataclass
class VerifyConfig:
    mode: str = "original"
    circuit_check_segments: int = 2
    segment_check: bool = False
    tolerance: float = 5e-2


@dataclass
class GridConfig:
    d: list = field(default_factory=lambda: [1, 2])
    n_x: list = field(default_factory=lambda: [2, 3, 4, 5])
    n_p: list = field(default_factory=lambda: [2, 3, 4, 5])


@dataclass
class SweepConfig:
    T: list = field(default_factory=lambda: [0.05])
    n_x: list = field(default_factory=lambda: [2, 3])
    measure: bool = True
    r_auto: int = 256


@dataclass
class OutputConfig:
    dir: str = "runs"
    report: str = "report.json"
    csv: str = "table.csv"


@dataclass
class RunConfig:
    method: str = "circuit-homogeneous"
    seed: int = 0
    threads: int = 1
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    schrodingerise: SchrodConfig = field(default_factory=SchrodConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {"problem": ProblemConfig, "schrodingerise": SchrodConfig, "time": TimeConfig,
             "verify": VerifyConfig, "grid": GridConfig, "sweep": SweepConfig,
             "output": OutputConfig}


def _build(cls, data: dict, path: str):
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for k, v in data.items():
        if k not in known:
            raise ConfigError(f"{path}.{k}: unknown field")
        kwargs[k] = v
    return cls(**kwargs)


def from_dict(data: dict) -> RunConfig:
    top = {}
    for k, v in data.items():
        if k in _SECTIONS:
            if not isinstance(v, dict):
                raise ConfigError(f"{k}: expected a table")
            top[k] = _build(_SECTIONS[k], v, k)
        elif k in ("method", "seed", "threads"):
            top[k] = v
        else:
            raise ConfigError(f"{k}: unknown field")
    cfg = RunConfig(**top)
    validate(cfg)
    return cfg


def loads(text: str) -> RunConfig:
    return from_dict(tomllib.loads(text))


def load(path) -> RunConfig:
    with open(path, "rb") as fh:
        return from_dict(tomllib.load(fh))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{_fmt(str(k))} = {_fmt(x)}" for k, x in v.items()) + "}"
    raise TypeError(f"cannot write {type(v).__name__} to TOML")


def dumps(cfg: RunConfig) -> str:
    """TOML text; None-valued keys are omitted (they parse back to None)."""
    d = cfg.to_dict()
    lines = []
    for k in ("method", "seed", "threads"):
        lines.append(f"{k} = {_fmt(d[k])}")
    for sec in _SECTIONS:
        lines.append(f"\n[{sec}]")
        for k, v in d[sec].items():
            if v is not None:
                lines.append(f"{k} = {_fmt(v)}")
    return "\n".join(lines) + "\n"


def _check(cond, path, msg):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def validate(cfg: RunConfig) -> None:
    _check(cfg.method in METHODS, "method", f"must be one of {METHODS}")
    p = cfg.problem
    _check(p.d in (1, 2, 3), "problem.d", "must be 1, 2 or 3")
    _check(isinstance(p.n_x, int) and p.n_x >= 1, "problem.n_x", "must be an integer >= 1")
    _check(p.family in FAMILIES, "problem.family", f"must be one of {FAMILIES}")
    _check(p.a > 0, "problem.a", "must be positive")
    _check(len(p.domain) == 2 and p.domain[0] < p.domain[1], "problem.domain",
           "must be [lo, hi] with lo < hi")
    for key in p.boundary:
        ok = len(key) == 2 and key[0].isdigit() and int(key[0]) < p.d and key[1] in "-+"
        _check(ok, f"problem.boundary.{key}", "face keys look like '0-' or '0+'")
    s = cfg.schrodingerise
    _check(s.R > 0, "schrodingerise.R", "must be positive")
    _check(isinstance(s.n_p, int) and s.n_p >= 1, "schrodingerise.n_p", "must be >= 1")
    t = cfg.time
    _check(t.T > 0, "time.T", "must be positive")
    _check(t.r is None or t.r >= 1, "time.r", "must be >= 1")
    _check(t.delta > 0, "time.delta", "must be positive")
    _check(t.delta1 > 0, "time.delta1", "must be positive")
    _check(t.K is None or (t.K >= 1 and t.K & (t.K - 1) == 0), "time.K",
           "must be a power of two")
    _check(t.n_s >= 1, "time.n_s", "must be >= 1")
    _check(cfg.verify.mode in MODES, "verify.mode", f"must be one of {MODES}")
    # caps before allocation
    n_sys = p.d * p.n_x + s.n_p
    _check(n_sys <= 13, "problem.n_x", f"x+p registers use {n_sys} wires; the dense cap is 13")
    if cfg.method == "autonomise":
        _check(n_sys + 1 + t.n_s <= 24, "time.n_s", "statevector cap of 24 wires exceeded")
    if cfg.method in ("circuit-homogeneous", "lcu", "autonomise"):
        _check(p.family != "neumann", "problem.family",
               "the heat circuits cover dirichlet and periodic boundaries")
