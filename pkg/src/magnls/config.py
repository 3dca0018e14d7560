"""INI experiment configuration: parsing, validation, defaults.

A minimal file needs only [grid] and [potential]; every other section has
defaults tuned so the shipped 1D suite passes its gates.  Every validation
failure names the offending section.key, and unknown sections or keys are
rejected outright (a typo should never silently fall back to a default).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

_POTENTIAL_KINDS = ("gaussian_well", "gauge", "loop", "file")
_INITIAL_KINDS = ("bound_state", "ground_state", "gaussian", "file")
_SIGN_WORDS = {"defocusing": 1, "focusing": -1}


@dataclass(frozen=True)
class GridConfig:
    dim: int = 1
    sizes: tuple[int, ...] = (256,)
    lengths: tuple[float, ...] = (40.0,)


@dataclass(frozen=True)
class PotentialConfig:
    kind: str = "gaussian_well"
    depth: float = -2.0
    width: float = 1.0
    decay_eps: float = 1.0
    lq_exponent: float = 4.0
    chi_amplitude: float = 0.3
    chi_width: float = 2.0
    loop_amplitude: float = 0.3
    loop_radius: float = 1.5
    loop_width: float = 1.0
    v_file: str = ""
    a_files: tuple[str, ...] = ()


@dataclass(frozen=True)
class SolverConfig:
    tol_rel: float = 1e-8
    max_iter: int = 10000
    resolvent_eps: float = 1e-2


@dataclass(frozen=True)
class NonlinearityConfig:
    sign_word: str = "defocusing"
    z_re: float = 0.05
    z_im: float = 0.0
    z_sweep: tuple[float, ...] = (0.01, 0.02, 0.04, 0.08)

    @property
    def sign(self) -> int:
        return _SIGN_WORDS[self.sign_word]

    @property
    def z(self) -> complex:
        return complex(self.z_re, self.z_im)


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float = 1e-4
    t_final: float = 4.0
    snapshot_stride: int = 500
    conserve_tol: float = 1e-6
    initial: str = "bound_state"
    init_amplitude: float = 0.01
    init_width: float = 2.0
    init_file: str = ""


@dataclass(frozen=True)
class ModulationConfig:
    amplitudes: tuple[float, ...] = (1e-3, 2e-3, 4e-3)
    sigma: float = 4.1
    perturb_width: float = 2.0


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "magnls-out"
    seed: int = 12345


@dataclass(frozen=True)
class ExperimentConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    nonlinearity: NonlinearityConfig = field(default_factory=NonlinearityConfig)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    modulation: ModulationConfig = field(default_factory=ModulationConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def echo(self) -> dict:
        """Resolved values, section by section, for the run manifest."""
        out: dict[str, dict] = {}
        for sect, obj in self.__dict__.items():
            vals = {}
            for key, value in obj.__dict__.items():
                vals["sign" if key == "sign_word" else key] = (
                    list(value) if isinstance(value, tuple) else value)
            out[sect] = vals
        return out


def _parse_int(sect: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{sect}.{key} must be an integer, got {raw!r}") from exc


def _parse_float(sect: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{sect}.{key} must be a number, got {raw!r}") from exc


def _parse_float_list(sect: str, key: str, raw: str) -> tuple[float, ...]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"{sect}.{key} must be a comma-separated list")
    return tuple(_parse_float(sect, key, s) for s in items)


def _parse_int_list(sect: str, key: str, raw: str) -> tuple[int, ...]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"{sect}.{key} must be a comma-separated list")
    return tuple(_parse_int(sect, key, s) for s in items)


def _parse_str_list(raw: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in raw.split(",") if s.strip())


# (section, key) -> parser taking (sect, key, raw string) -> value
_SCHEMA: dict[str, dict[str, object]] = {
    "grid": {
        "dim": _parse_int,
        "sizes": _parse_int_list,
        "lengths": _parse_float_list,
    },
    "potential": {
        "kind": None,
        "depth": _parse_float,
        "width": _parse_float,
        "decay_eps": _parse_float,
        "lq_exponent": _parse_float,
        "chi_amplitude": _parse_float,
        "chi_width": _parse_float,
        "loop_amplitude": _parse_float,
        "loop_radius": _parse_float,
        "loop_width": _parse_float,
        "v_file": None,
        "a_files": None,
    },
    "solver": {
        "tol_rel": _parse_float,
        "max_iter": _parse_int,
        "resolvent_eps": _parse_float,
    },
    "nonlinearity": {
        "sign": None,
        "z_re": _parse_float,
        "z_im": _parse_float,
        "z_sweep": _parse_float_list,
    },
    "evolution": {
        "dt": _parse_float,
        "t_final": _parse_float,
        "snapshot_stride": _parse_int,
        "conserve_tol": _parse_float,
        "initial": None,
        "init_amplitude": _parse_float,
        "init_width": _parse_float,
        "init_file": None,
    },
    "modulation": {
        "amplitudes": _parse_float_list,
        "sigma": _parse_float,
        "perturb_width": _parse_float,
    },
    "output": {
        "directory": None,
        "seed": _parse_int,
    },
}

# config key -> dataclass field name where they differ
_FIELD_NAME = {("nonlinearity", "sign"): "sign_word"}


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    g = cfg.grid
    if g.dim not in (1, 2, 3):
        raise ConfigError(f"grid.dim must be 1, 2, or 3, got {g.dim}")
    sizes = g.sizes if len(g.sizes) != 1 else g.sizes * g.dim
    lengths = g.lengths if len(g.lengths) != 1 else g.lengths * g.dim
    if len(sizes) != g.dim:
        raise ConfigError(
            f"grid.sizes needs 1 or {g.dim} entries, got {len(g.sizes)}")
    if len(lengths) != g.dim:
        raise ConfigError(
            f"grid.lengths needs 1 or {g.dim} entries, got {len(g.lengths)}")
    for n in sizes:
        if n < 8 or n & (n - 1):
            raise ConfigError(
                f"grid.sizes entries must be powers of two >= 8, got {n}")
    for length in lengths:
        if length <= 0:
            raise ConfigError(f"grid.lengths entries must be positive, got {length}")
    object.__setattr__(g, "sizes", sizes)
    object.__setattr__(g, "lengths", lengths)

    p = cfg.potential
    if p.kind not in _POTENTIAL_KINDS:
        raise ConfigError(
            f"potential.kind must be one of {', '.join(_POTENTIAL_KINDS)}, "
            f"got {p.kind!r}")
    if p.kind == "file" and not p.v_file:
        raise ConfigError("potential.v_file is required when potential.kind = file")
    if p.kind == "loop" and cfg.grid.dim < 2:
        raise ConfigError("potential.kind = loop needs grid.dim >= 2")
    if p.lq_exponent <= 3.0:
        raise ConfigError(
            f"potential.lq_exponent must exceed 3, got {p.lq_exponent}")
    if p.decay_eps <= 0.0:
        raise ConfigError(f"potential.decay_eps must be positive, got {p.decay_eps}")

    s = cfg.solver
    if s.tol_rel <= 0.0:
        raise ConfigError(f"solver.tol_rel must be positive, got {s.tol_rel}")
    if s.max_iter < 1:
        raise ConfigError(f"solver.max_iter must be >= 1, got {s.max_iter}")
    if s.resolvent_eps < 1e-8:
        raise ConfigError(
            f"solver.resolvent_eps must be >= 1e-8, got {s.resolvent_eps}")

    nl = cfg.nonlinearity
    if nl.sign_word not in _SIGN_WORDS:
        raise ConfigError(
            f"nonlinearity.sign must be focusing or defocusing, got {nl.sign_word!r}")
    for zv in nl.z_sweep:
        if zv <= 0:
            raise ConfigError(f"nonlinearity.z_sweep entries must be positive, got {zv}")

    e = cfg.evolution
    if not 0.0 < e.dt <= 0.1:
        raise ConfigError(f"evolution.dt must lie in (0, 0.1], got {e.dt}")
    if e.t_final < e.dt:
        raise ConfigError(
            f"evolution.t_final must be at least dt = {e.dt}, got {e.t_final}")
    if e.snapshot_stride < 1:
        raise ConfigError(
            f"evolution.snapshot_stride must be >= 1, got {e.snapshot_stride}")
    if e.snapshot_stride * e.dt > 0.1 + 1e-12:
        raise ConfigError(
            "evolution.snapshot_stride * dt must be <= 0.1 for modulation "
            f"tracking, got {e.snapshot_stride * e.dt:.3g}")
    if e.conserve_tol <= 0.0:
        raise ConfigError(
            f"evolution.conserve_tol must be positive, got {e.conserve_tol}")
    if e.initial not in _INITIAL_KINDS:
        raise ConfigError(
            f"evolution.initial must be one of {', '.join(_INITIAL_KINDS)}, "
            f"got {e.initial!r}")
    if e.initial == "file" and not e.init_file:
        raise ConfigError(
            "evolution.init_file is required when evolution.initial = file")

    m = cfg.modulation
    if m.sigma <= 4.0:
        raise ConfigError("modulation.sigma must exceed 4")
    if not m.amplitudes:
        raise ConfigError("modulation.amplitudes must not be empty")
    for a in m.amplitudes:
        if a <= 0:
            raise ConfigError(
                f"modulation.amplitudes entries must be positive, got {a}")
    if m.perturb_width <= 0:
        raise ConfigError(
            f"modulation.perturb_width must be positive, got {m.perturb_width}")

    o = cfg.output
    if not 0 <= o.seed < 2**64:
        raise ConfigError(f"output.seed must fit in 64 bits, got {o.seed}")
    if not o.directory:
        raise ConfigError("output.directory must not be empty")
    return cfg


def _assemble(values: dict[str, dict[str, object]]) -> ExperimentConfig:
    sections = {}
    classes = {
        "grid": GridConfig, "potential": PotentialConfig,
        "solver": SolverConfig, "nonlinearity": NonlinearityConfig,
        "evolution": EvolutionConfig, "modulation": ModulationConfig,
        "output": OutputConfig,
    }
    for sect, cls in classes.items():
        kwargs = {}
        for key, val in values.get(sect, {}).items():
            kwargs[_FIELD_NAME.get((sect, key), key)] = val
        sections[sect] = cls(**kwargs)
    return _validate(ExperimentConfig(**sections))


def _convert(sect: str, key: str, raw: str):
    if sect not in _SCHEMA:
        raise ConfigError(f"[{sect}] is not a recognized section")
    if key not in _SCHEMA[sect]:
        raise ConfigError(f"{sect}.{key} is not recognized")
    parser = _SCHEMA[sect][key]
    if parser is None:
        if (sect, key) == ("potential", "a_files"):
            return _parse_str_list(raw)
        return raw.strip()
    return parser(sect, key, raw)


def parse_config(path: str | Path,
                 overrides: tuple[str, ...] = ()) -> ExperimentConfig:
    """Load, override, validate.

    ``overrides`` are ``section.key=value`` strings applied after the file,
    passing through exactly the same validation.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    values: dict[str, dict[str, object]] = {}
    for sect in parser.sections():
        for key, raw in parser.items(sect):
            values.setdefault(sect, {})[key] = _convert(sect, key, raw)
    for sect in ("grid", "potential"):
        if sect not in values:
            raise ConfigError(f"config must contain a [{sect}] section")

    for text in overrides:
        if "=" not in text or "." not in text.split("=", 1)[0]:
            raise ConfigError(
                f"override must look like section.key=value, got {text!r}")
        target, raw = text.split("=", 1)
        sect, key = target.split(".", 1)
        sect, key = sect.strip(), key.strip()
        values.setdefault(sect, {})[key] = _convert(sect, key, raw)

    return _assemble(values)
