"""Scenario configuration: sectioned key=value text with SI-suffixed numbers.

Example::

    [beam]
    L = 1.0
    EI = 1.0
    rhoA = 1.0
    zeta = 0.0
    M = 5

    [patches]
    N = 5
    coverage = 0.9
    Cp = 100n
    gamma = 1e-4

    [network]
    topology = single_shunt   # single_shunt | multi_shunt | transmission_line
    R = 80k
    L = 160k
    termination = none        # none | both_ends

    [optimize]
    objective = min-damping-ratio   # or hinf
    target_mode = 1
    per_branch = false

    [simulate]
    dt = auto
    T = auto
    initial = tip_displacement      # zero | tip_displacement | tip_impulse

    [output]
    dir = out

Every section and key is optional; omitted keys take the defaults above.
Unknown sections or keys are rejected with their line number.  A `netlist`
key in [network] points at a netlist file and overrides `topology`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .beam import BeamSpec
from .circuits import parse_si
from .errors import ConfigError

TOPOLOGIES = ("single_shunt", "multi_shunt", "transmission_line")
OBJECTIVES = ("min-damping-ratio", "hinf")
INITIAL_KINDS = ("zero", "tip_displacement", "tip_impulse")


@dataclass
class ScenarioConfig:
    # beam
    length: float = 1.0
    bending_stiffness: float = 1.0
    mass_per_length: float = 1.0
    zeta: float = 0.0
    n_modes: int = 5
    # patches
    n_patches: int = 5
    coverage: float = 0.9
    cp: float = 100e-9
    gamma: float = 1e-4
    # network
    topology: str = "single_shunt"
    netlist_path: str | None = None
    r: float = 8e4
    l: float = 1.6e5
    termination: str = "none"
    # optimize
    objective: str = "min-damping-ratio"
    target_mode: int = 1
    r_bounds: tuple[float, float] | None = None
    l_bounds: tuple[float, float] | None = None
    per_branch: bool = False
    # simulate
    dt: float | None = None      # None = auto from the spectral bound
    t_final: float | None = None  # None = 20 periods of mode 1
    initial: str = "tip_displacement"
    # output
    outdir: str = "out"

    def beam_spec(self):
        return BeamSpec(
            length=self.length,
            bending_stiffness=self.bending_stiffness,
            mass_per_length=self.mass_per_length,
            zeta=self.zeta,
        )


def _number(value, section, line_no):
    try:
        return parse_si(value)
    except ValueError as exc:
        raise ConfigError(str(exc), section, line_no) from None


def _integer(value, section, line_no):
    num = _number(value, section, line_no)
    if num != int(num):
        raise ConfigError(f"expected an integer, got {value!r}", section, line_no)
    return int(num)


def _boolean(value, section, line_no):
    if value in ("true", "yes", "1"):
        return True
    if value in ("false", "no", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}", section, line_no)


def _auto_or_number(value, section, line_no):
    if value == "auto":
        return None
    return _number(value, section, line_no)


def _choice(options):
    def convert(value, section, line_no):
        if value not in options:
            raise ConfigError(f"expected one of {options}, got {value!r}", section, line_no)
        return value
    return convert


def _string(value, section, line_no):
    return value


_SCHEMA = {
    "beam": {
        "L": ("length", _number),
        "EI": ("bending_stiffness", _number),
        "rhoA": ("mass_per_length", _number),
        "zeta": ("zeta", _number),
        "M": ("n_modes", _integer),
    },
    "patches": {
        "N": ("n_patches", _integer),
        "coverage": ("coverage", _number),
        "Cp": ("cp", _number),
        "gamma": ("gamma", _number),
    },
    "network": {
        "topology": ("topology", _choice(TOPOLOGIES)),
        "netlist": ("netlist_path", _string),
        "R": ("r", _number),
        "L": ("l", _number),
        "termination": ("termination", _choice(("none", "both_ends"))),
    },
    "optimize": {
        "objective": ("objective", _choice(OBJECTIVES)),
        "target_mode": ("target_mode", _integer),
        "R_min": ("_r_min", _number),
        "R_max": ("_r_max", _number),
        "L_min": ("_l_min", _number),
        "L_max": ("_l_max", _number),
        "per_branch": ("per_branch", _boolean),
    },
    "simulate": {
        "dt": ("dt", _auto_or_number),
        "T": ("t_final", _auto_or_number),
        "initial": ("initial", _choice(INITIAL_KINDS)),
    },
    "output": {
        "dir": ("outdir", _string),
    },
}


def load_config(text):
    """Parse and validate scenario text, filling defaults for omitted keys."""
    cfg = ScenarioConfig()
    extras = {}
    section = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]", line_no=line_no)
            continue
        if section is None:
            raise ConfigError(f"key outside any section: {line!r}", line_no=line_no)
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", section, line_no)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r}", section, line_no)
        attr, convert = _SCHEMA[section][key]
        parsed = convert(value, section, line_no)
        if attr.startswith("_"):
            extras[attr] = parsed
        else:
            setattr(cfg, attr, parsed)

    if "_r_min" in extras or "_r_max" in extras:
        if not ("_r_min" in extras and "_r_max" in extras):
            raise ConfigError("R_min and R_max must be given together", "optimize")
        cfg.r_bounds = (extras["_r_min"], extras["_r_max"])
    if "_l_min" in extras or "_l_max" in extras:
        if not ("_l_min" in extras and "_l_max" in extras):
            raise ConfigError("L_min and L_max must be given together", "optimize")
        cfg.l_bounds = (extras["_l_min"], extras["_l_max"])

    _validate(cfg)
    return cfg


def _validate(cfg):
    checks = [
        (cfg.length > 0, "beam", "L must be positive"),
        (cfg.bending_stiffness > 0, "beam", "EI must be positive"),
        (cfg.mass_per_length > 0, "beam", "rhoA must be positive"),
        (0 <= cfg.zeta < 1, "beam", "zeta must lie in [0, 1)"),
        (1 <= cfg.n_modes <= 12, "beam", "M must lie in [1, 12]"),
        (cfg.n_patches >= 1, "patches", "N must be at least 1"),
        (0 < cfg.coverage <= 1, "patches", "coverage must lie in (0, 1]"),
        (cfg.cp > 0, "patches", "Cp must be positive"),
        (cfg.r >= 0, "network", "R must be nonnegative"),
        (cfg.l > 0, "network", "L must be positive"),
        (1 <= cfg.target_mode <= cfg.n_modes, "optimize", "target_mode must lie in [1, M]"),
        (cfg.dt is None or cfg.dt > 0, "simulate", "dt must be positive or auto"),
        (cfg.t_final is None or cfg.t_final > 0, "simulate", "T must be positive or auto"),
    ]
    for ok, section, message in checks:
        if not ok:
            raise ConfigError(message, section)
    if cfg.r_bounds is not None and not 0 < cfg.r_bounds[0] < cfg.r_bounds[1]:
        raise ConfigError("R bounds must satisfy 0 < R_min < R_max", "optimize")
    if cfg.l_bounds is not None and not 0 < cfg.l_bounds[0] < cfg.l_bounds[1]:
        raise ConfigError("L bounds must satisfy 0 < L_min < L_max", "optimize")
