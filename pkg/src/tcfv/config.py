"""Plain-text run configuration: sectioned key = value files.

Section headers like ``[case]`` are allowed for organization but carry no
meaning; every key is global and may appear at most once.  Parsing errors
always report the offending line number.
"""

from dataclasses import dataclass, fields

from .errors import ConfigError

CASES = ("rp1", "rp1s", "rp2", "rp3", "rp4", "vortex", "shear", "rotor",
         "dsl", "cavity", "vshock")
SCHEMES = ("semidiscrete", "fullydiscrete", "muscl-reference")
TIME_METHODS = ("rk3", "rk4")

# cases governed by the pure gasdynamic subsystem (no distortion/thermal
# impulse energy); only these run with the fully-discrete scheme
EULER_CASES = ("rp1", "rp1s", "rp2", "vortex")
ONE_DIMENSIONAL_CASES = ("rp1", "rp1s", "rp2", "rp3", "rp4", "shear",
                         "vshock")
# periodic cases where the total energy audit is meaningful
CLOSED_BOX_CASES = ("vortex", "rotor", "dsl")


@dataclass
class CaseConfig:
    """One fully-specified run."""

    case: str = ""
    scheme: str = "semidiscrete"
    n: int = 0  # 0: per-case default resolution
    t_end: float = -1.0  # negative: per-case default end time
    chi: float = 0.0  # smoothing width for Riemann data (0: sharp)
    mu: float = 1e-2  # shear-case viscosity; 0 selects the solid limit
    cfl: float = 0.5
    n_gp: int = 3
    time_method: str = "rk3"
    energy_drift_max: float = -1.0  # negative: audit only closed boxes
    production_min: float = -1e-12
    output_dir: str = "out"
    profile_csv: bool = True
    field_vtk: bool = False
    audit_csv: bool = True

    def validate(self) -> None:
        if self.case not in CASES:
            raise ConfigError(f"unknown case {self.case!r}; expected one of "
                              f"{', '.join(CASES)}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.time_method not in TIME_METHODS:
            raise ConfigError(f"unknown time_method {self.time_method!r}")
        if self.scheme == "fullydiscrete" and self.case not in EULER_CASES:
            raise ConfigError(
                f"scheme fullydiscrete supports only the gasdynamic cases "
                f"{', '.join(EULER_CASES)}, not {self.case!r}")
        if (self.scheme == "muscl-reference"
                and self.case not in ONE_DIMENSIONAL_CASES):
            raise ConfigError("scheme muscl-reference is one-dimensional; "
                              f"case {self.case!r} is not")
        if self.n < 0:
            raise ConfigError("n must be positive (or 0 for the default)")
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigError("cfl must lie in (0, 1]")
        if self.n_gp < 1:
            raise ConfigError("n_gp must be at least 1")
        if self.chi < 0.0:
            raise ConfigError("chi must be nonnegative")
        if self.mu < 0.0:
            raise ConfigError("mu must be nonnegative")


_FIELDS = {f.name: f for f in fields(CaseConfig)}
_ALIASES = {"case": "case", "name": "case", "dir": "output_dir"}


def _convert(name: str, raw: str, lineno: int):
    ftype = _FIELDS[name].type
    try:
        if ftype is bool:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if ftype is int:
            return int(raw)
        if ftype is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"line {lineno}: invalid {ftype.__name__} value "
                          f"{raw!r} for key {name!r}")


def parse_config(text: str) -> CaseConfig:
    """Parse a configuration file body into a validated CaseConfig."""
    values = {}
    where = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            continue  # organizational section header
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got "
                              f"{rawline.strip()!r}")
        key, _, raw = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        key = _ALIASES.get(key, key)
        raw = raw.strip()
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} "
                              f"(first set on line {where[key]})")
        values[key] = _convert(key, raw, lineno)
        where[key] = lineno
    if "case" not in values:
        raise ConfigError("missing required key 'case'")
    cfg = CaseConfig(**values)
    cfg.validate()
    return cfg


def serialize_config(cfg: CaseConfig) -> str:
    """Render a config as text that parses back to an equal CaseConfig."""
    lines = ["[case]"]
    for f in fields(CaseConfig):
        lines.append(f"{f.name} = {getattr(cfg, f.name)}")
    return "\n".join(lines) + "\n"
