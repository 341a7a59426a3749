"""INI-style run configuration: parsing, validation and normalized serialization."""
from dataclasses import dataclass, field, fields, replace
import configparser
import hashlib
import math

from .equilibrium import FluidConfig, PressureLaw, solve_interface_densities
from .errors import ParseError, ValidationErrors


@dataclass(frozen=True)
class GridSection:
    refinements: tuple = (64, 128, 256)


@dataclass(frozen=True)
class SweepSection:
    xi_min: float = 2.0
    xi_max: float = 60.0
    xi_steps: int = 30


@dataclass(frozen=True)
class SynthSection:
    r3: float = 10.0
    r4: float = 14.0
    k: int = 3
    t_list: tuple = (0.5, 1.0, 2.0)
    n_r: int = 64
    n_theta: int = 16


@dataclass(frozen=True)
class EvolveSection:
    xi1: float = 10.0
    xi2: float = 0.0
    dt: float = 1e-3
    T: float = 1.1
    init: str = "mode"
    seed: int = 0


@dataclass(frozen=True)
class IllposedSection:
    j: int = 2
    k: int = 1
    alpha: float = 1.0
    t0: float = 1.0
    n_max: int = 4


@dataclass(frozen=True)
class OutputSection:
    directory: str = "rti_out"
    format: str = "csv"


@dataclass(frozen=True)
class FluidSection:
    upper_gamma: float = 1.0
    upper_K: float = 1.0
    lower_gamma: float = 1.0
    lower_K: float = 2.0
    g: float = 1.0
    omega: float = 1.0
    m: float = 1.0
    l: float = 1.0
    interface_pressure: float = 2.0
    n_elements: int = 128


SECTIONS = {
    "fluid": FluidSection,
    "grid": GridSection,
    "sweep": SweepSection,
    "synth": SynthSection,
    "evolve": EvolveSection,
    "illposed": IllposedSection,
    "output": OutputSection,
}


@dataclass(frozen=True)
class RunConfig:
    fluid: FluidSection = field(default_factory=FluidSection)
    grid: GridSection = field(default_factory=GridSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    synth: SynthSection = field(default_factory=SynthSection)
    evolve: EvolveSection = field(default_factory=EvolveSection)
    illposed: IllposedSection = field(default_factory=IllposedSection)
    output: OutputSection = field(default_factory=OutputSection)

    def fluid_config(self, omega=None):
        f = self.fluid
        return FluidConfig(
            upper_law=PressureLaw.power(f.upper_K, f.upper_gamma),
            lower_law=PressureLaw.power(f.lower_K, f.lower_gamma),
            g=f.g,
            omega=f.omega if omega is None else float(omega),
            m=f.m,
            l=f.l,
            interface_pressure=f.interface_pressure,
        )

    def with_output_dir(self, directory):
        return replace(self, output=replace(self.output, directory=str(directory)))


# key -> (lower bound, strict) for positivity-style checks
_BOUNDS = {
    ("fluid", "upper_gamma"): (1.0, False), ("fluid", "lower_gamma"): (1.0, False),
    ("fluid", "upper_K"): (0.0, True), ("fluid", "lower_K"): (0.0, True),
    ("fluid", "g"): (0.0, False), ("fluid", "omega"): (0.0, False),
    ("fluid", "m"): (0.0, True), ("fluid", "l"): (0.0, True),
    ("fluid", "interface_pressure"): (0.0, True), ("fluid", "n_elements"): (4, False),
    ("sweep", "xi_min"): (0.0, True), ("sweep", "xi_max"): (0.0, True), ("sweep", "xi_steps"): (1, False),
    ("synth", "r3"): (0.0, True), ("synth", "r4"): (0.0, True), ("synth", "k"): (0, False),
    ("synth", "n_r"): (2, False), ("synth", "n_theta"): (2, False),
    ("evolve", "dt"): (0.0, True), ("evolve", "T"): (0.0, True),
    ("illposed", "j"): (0, False), ("illposed", "k"): (0, False),
    ("illposed", "alpha"): (0.0, True), ("illposed", "t0"): (0.0, True), ("illposed", "n_max"): (1, False),
}


def _convert(raw, default):
    if isinstance(default, bool):
        raise TypeError
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError("not finite")
        return value
    if isinstance(default, tuple):
        kind = type(default[0]) if default else float
        return tuple(kind(tok) for tok in raw.replace(",", " ").split())
    return raw.strip()


def _parse_error(exc):
    if isinstance(exc, configparser.MissingSectionHeaderError):
        return ParseError("missing section header", exc.lineno, 1)
    if isinstance(exc, configparser.ParsingError):
        lineno, line = exc.errors[0]
        return ParseError(f"cannot parse {line.strip()!r}", lineno, 1)
    if isinstance(exc, (configparser.DuplicateSectionError, configparser.DuplicateOptionError)):
        return ParseError(str(exc).split(":")[0], getattr(exc, "lineno", None), 1)
    return ParseError(str(exc))


def parse_config(text):
    """Parse and validate; every violation is reported in one ValidationErrors."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise _parse_error(exc) from None

    errors = []
    built = {}
    for name in cp.sections():
        if name not in SECTIONS:
            errors.append(f"unknown section [{name}]")
    for name, cls in SECTIONS.items():
        defaults = cls()
        values = {}
        if cp.has_section(name):
            known = {f.name for f in fields(cls)}
            for key, raw in cp.items(name):
                if key not in known:
                    errors.append(f"[{name}] unknown key {key!r}")
                    continue
                try:
                    values[key] = _convert(raw, getattr(defaults, key))
                except (TypeError, ValueError):
                    errors.append(f"[{name}] {key}: cannot read {raw!r}")
        section = replace(defaults, **values)
        for key, (lo, strict) in _BOUNDS.items():
            if key[0] != name:
                continue
            v = getattr(section, key[1])
            if (strict and not v > lo) or (not strict and not v >= lo):
                if strict and lo == 0:
                    errors.append(f"{key[1]} must be positive")
                else:
                    errors.append(f"{key[1]} must be >= {lo}")
        built[name] = section

    s = built["synth"]
    if s.r4 <= s.r3:
        errors.append("r4 must exceed r3")
    if s.n_theta % 2:
        errors.append("n_theta must be even")
    if built["sweep"].xi_max < built["sweep"].xi_min:
        errors.append("xi_max must be >= xi_min")
    if built["illposed"].j < built["illposed"].k:
        errors.append("illposed j must be >= k")
    if built["evolve"].init not in ("mode", "random"):
        errors.append("evolve init must be 'mode' or 'random'")
    if built["output"].format not in ("csv", "json"):
        errors.append("output format must be 'csv' or 'json'")
    if errors:
        raise ValidationErrors(errors)
    cfg = RunConfig(**built)
    solve_interface_densities(cfg.fluid_config())
    return cfg


def _format(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    return str(value)


def serialize_config(cfg, *, include_output=True):
    lines = []
    for name in SECTIONS:
        if name == "output" and not include_output:
            continue
        section = getattr(cfg, name)
        lines.append(f"[{name}]")
        for f in fields(section):
            lines.append(f"{f.name} = {_format(getattr(section, f.name))}")
        lines.append("")
    return "\n".join(lines)


def config_hash(cfg):
    """SHA-256 of the normalized physics/numerics sections (output location excluded)."""
    return hashlib.sha256(serialize_config(cfg, include_output=False).encode()).hexdigest()


REFERENCE_TEXT = serialize_config(RunConfig())
