"""run configuration: INI text in, RunConfig out

    [run]       subcommand, seed, threads
    [system]    name of a built-in system
    [params]    system parameters (rigid-rotation: psi, twist-std: k,
                nf-map: p q mu psi A B C tol guard)
    [options]   subcommand options, see SUBCOMMANDS

lists are comma separated. every problem found is reported in one go.
"""
import configparser
import difflib
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from src.core.systems import BUILTIN_NAMES, builtin_system
from src.utils.errors import LabError, ValidationError

SECTIONS = ("run", "system", "params", "options")
RUN_KEYS = ("subcommand", "seed", "threads")
DEFAULT_SEED = 0
DEFAULT_THREADS = 1

PARAM_KEYS = {
    "rigid-rotation": ("psi",),
    "twist-std": ("k",),
    "nf-map": ("p", "q", "mu", "psi", "A", "B", "C", "tol", "guard"),
}

NF_COMMANDS = ("nf-portrait", "nf-equilibria", "pendulum-check", "mu-sweep", "pitchfork-scan",
               "certify-sink-source", "map-confirm")


@dataclass(frozen=True)
class Option:
    kind: str
    default: Any = None
    choices: Tuple[str, ...] = ()


def _opt(kind: str, default: Any = None, *choices: str) -> Option:
    return Option(kind, default, tuple(choices))


# kinds: float, pos (> 0), int, count (>= 1), res (>= 2), floats, ints, fracs, bool, str, choice
SUBCOMMANDS: Dict[str, Dict[str, Option]] = {
    "check-rev": {
        "samples": _opt("count", 1000),
        "tol": _opt("pos"),
    },
    "find-sym-orbits": {
        "involution": _opt("choice", "g", "g", "fg"),
        "target": _opt("choice", "same", "same", "g", "fg"),
        "s_lo": _opt("float"),
        "s_hi": _opt("float"),
        "k": _opt("ints", [1]),
        "tol": _opt("pos", 1e-12),
        "samples": _opt("res", 200),
        "classify_tol": _opt("pos", 1e-6),
        "polish": _opt("bool", False),
    },
    "nf-portrait": {
        "rho_lo": _opt("pos"),
        "rho_hi": _opt("pos"),
        "phi_lo": _opt("float", -math.pi),
        "phi_hi": _opt("float", math.pi),
        "n_rho": _opt("res", 25),
        "n_phi": _opt("res", 49),
    },
    "nf-equilibria": {
        "rho_max": _opt("pos"),
    },
    "pendulum-check": {
        "mu_lo": _opt("pos", 1e-6),
        "mu_hi": _opt("pos", 1e-3),
        "points": _opt("res", 8),
        "u_lo": _opt("float", -2.0),
        "u_hi": _opt("float", 2.0),
        "n_theta": _opt("res", 41),
        "n_u": _opt("res", 41),
    },
    "mu-sweep": {
        "mu_lo": _opt("float", -0.02),
        "mu_hi": _opt("float", 0.02),
        "resolution": _opt("res", 41),
        "refine": _opt("bool", True),
    },
    "pitchfork-scan": {
        "A_lo": _opt("pos"),
        "A_hi": _opt("pos"),
        "A_points": _opt("res", 3),
        "s_lo": _opt("float", -2.0),
        "s_hi": _opt("float", 2.0),
        "mu_points": _opt("res", 41),
        "mu_frame": _opt("choice", "centered", "centered", "absolute"),
    },
    "certify-sink-source": {
        "delta_floor": _opt("pos", 1e-10),
        "mu_frame": _opt("choice", "absolute", "absolute", "centered"),
        "s": _opt("float", 0.0),
    },
    "map-confirm": {
        "which": _opt("choice", "all", "all", "symmetric", "asymmetric"),
        "tol": _opt("pos", 1e-13),
        "newton_tol": _opt("pos", 1e-12),
        "pair_tol": _opt("pos", 1e-6),
        "mu_frame": _opt("choice", "absolute", "absolute", "centered"),
        "s": _opt("float", 0.0),
    },
    "rotation": {
        "x0": _opt("floats"),
        "rho": _opt("float", 0.5),
        "N": _opt("count", 10000),
        "chart": _opt("choice", "auto", "auto", "polar", "cylinder"),
        "y0": _opt("float", 0.0),
    },
    "diophantine": {
        "psi0": _opt("str", "golden"),
        "alpha": _opt("pos", 1.0),
        "k_max": _opt("count", 10000),
        "terms": _opt("count", 12),
    },
    "twist": {
        "psi0": _opt("str", ""),
        "y_lo": _opt("float"),
        "y_hi": _opt("float"),
        "rho_lo": _opt("float", -0.05),
        "rho_hi": _opt("float", 0.05),
        "offsets": _opt("res", 5),
        "steps": _opt("count", 4000),
        "noise_cap": _opt("pos", 1e-3),
        "chart": _opt("choice", "auto", "auto", "polar", "cylinder"),
    },
    "fmn-roots": {
        "psi0": _opt("str", "golden"),
        "y_lo": _opt("float"),
        "y_hi": _opt("float"),
        "pairs": _opt("fracs"),
        "n_min": _opt("count", 5),
        "n_max": _opt("count", 21),
        "width": _opt("pos", 0.25),
        "count": _opt("count", 4000),
        "radial_seeds": _opt("res", 6),
        "angular_seeds": _opt("count", 8),
        "gate_policy": _opt("choice", "warn", "warn", "reject"),
        "classify_tol": _opt("pos", 1e-9),
    },
    "averaged-fit": {
        "psi0": _opt("str", "golden"),
        "y_lo": _opt("float"),
        "y_hi": _opt("float"),
        "h": _opt("pos", 2e-4),
        "count": _opt("count", 4000),
        "modes": _opt("count", 24),
        "degree": _opt("count", 2),
        "rho_lo": _opt("pos", 1e-3),
        "rho_hi": _opt("pos", 1e-2),
        "points": _opt("res", 6),
        "thetas": _opt("res", 32),
        "chart": _opt("choice", "auto", "auto", "invariant", "polar", "cylinder"),
        "chart_k": _opt("float"),
    },
}

# built-in used when [system] is left out
DEFAULT_SYSTEM = {name: "nf-map" for name in NF_COMMANDS}
DEFAULT_SYSTEM.update({"check-rev": "rigid-rotation", "find-sym-orbits": "twist-std", "rotation": "rigid-rotation",
                       "twist": "twist-std", "fmn-roots": "twist-std", "averaged-fit": "twist-std"})


@dataclass
class RunConfig:
    subcommand: str
    system: Optional[str]
    params: Dict[str, Any]
    options: Dict[str, Any]
    seed: int = DEFAULT_SEED
    threads: int = DEFAULT_THREADS
    defaults: Dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"subcommand": self.subcommand, "system": self.system, "params": self.params,
                "options": self.options, "seed": self.seed, "threads": self.threads,
                "defaults_filled": self.defaults}


def _suggest(key: str, known) -> str:
    close = difflib.get_close_matches(key, list(known), n=1)
    return f" (did you mean '{close[0]}'?)" if close else ""


def _number(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"{text!r} is not finite")
    return value


def _integer(text: str) -> int:
    value = _number(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _split(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _fraction(text: str) -> Tuple[int, int]:
    m, sep, n = text.partition("/")
    if not sep:
        raise ValueError(f"{text!r} is not of the form m/n")
    return _integer(m), _integer(n)


PARSERS: Dict[str, Callable[[str], Any]] = {
    "float": _number,
    "pos": _number,
    "int": _integer,
    "count": _integer,
    "res": _integer,
    "floats": lambda t: [_number(v) for v in _split(t)],
    "ints": lambda t: [_integer(v) for v in _split(t)],
    "fracs": lambda t: [_fraction(v) for v in _split(t)],
    "str": str.strip,
    "choice": str.strip,
}


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def parse_option(key: str, spec: Option, text: str) -> Any:
    """one option value, raising ValueError with a readable message"""
    if spec.kind == "bool":
        return _bool(text)
    value = PARSERS[spec.kind](text)
    if spec.kind == "pos" and value <= 0:
        raise ValueError(f"must be > 0, got {value}")
    if spec.kind == "count" and value < 1:
        raise ValueError(f"must be >= 1, got {value}")
    if spec.kind == "res" and value < 2:
        raise ValueError(f"resolution must be >= 2, got {value}")
    if spec.kind == "choice" and value not in spec.choices:
        raise ValueError(f"must be one of {list(spec.choices)}, got {value!r}{_suggest(value, spec.choices)}")
    if spec.kind in ("floats", "ints", "fracs") and not value:
        raise ValueError("list is empty")
    if spec.kind == "ints" and any(v < 1 for v in value):
        raise ValueError(f"entries must be >= 1, got {value}")
    return value


def _param_value(text: str) -> Any:
    parts = _split(text)
    if len(parts) > 1:
        return [_number(v) for v in parts]
    return _number(text)


def _read(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    # A, B, C are case sensitive
    parser.optionxform = str
    parser.read_string(text)
    return parser


def validate(text: str, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """parse and check a config document

    overrides (seed, threads) come from the command line and win over the
    file. raises ValidationError listing every problem in diagnostics["errors"].
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    errors: List[str] = []
    try:
        doc = _read(text)
    except configparser.Error as exc:
        raise ValidationError(f"config is not a valid key/value document: {exc}",
                              {"errors": [str(exc)]}) from exc

    for section in doc.sections():
        if section not in SECTIONS:
            errors.append(f"unknown section [{section}]{_suggest(section, SECTIONS)}")
    run = dict(doc["run"]) if doc.has_section("run") else {}
    for key in run:
        if key not in RUN_KEYS:
            errors.append(f"unknown key '{key}' in [run]{_suggest(key, RUN_KEYS)}")

    defaults: Dict[str, Any] = {}
    subcommand = run.get("subcommand", "").strip()
    if not subcommand:
        errors.append("[run] subcommand is required")
    elif subcommand not in SUBCOMMANDS:
        errors.append(f"unknown subcommand '{subcommand}'{_suggest(subcommand, SUBCOMMANDS)}")

    seed, threads = DEFAULT_SEED, DEFAULT_THREADS
    for key, fallback in (("seed", DEFAULT_SEED), ("threads", DEFAULT_THREADS)):
        raw = overrides.get(key, run.get(key))
        if raw is None:
            defaults[f"run.{key}"] = fallback
            continue
        try:
            value = _integer(str(raw))
        except ValueError as exc:
            errors.append(f"[run] {key}: {exc}")
            continue
        if key == "seed":
            if value < 0:
                errors.append(f"[run] seed must be >= 0, got {value}")
            seed = value
        else:
            if value < 1:
                errors.append(f"[run] threads must be >= 1, got {value}")
            threads = value

    if subcommand not in SUBCOMMANDS:
        raise ValidationError(f"{len(errors)} config error(s)", {"errors": errors})

    # system
    system: Optional[str] = None
    params: Dict[str, Any] = {}
    sys_section = dict(doc["system"]) if doc.has_section("system") else {}
    for key in sys_section:
        if key != "name":
            errors.append(f"unknown key '{key}' in [system]{_suggest(key, ('name',))}")
    raw_params = dict(doc["params"]) if doc.has_section("params") else {}
    if subcommand == "diophantine":
        if sys_section or raw_params:
            errors.append("diophantine takes no [system] or [params]")
    else:
        system = sys_section.get("name", "").strip()
        if not system:
            system = DEFAULT_SYSTEM[subcommand]
            defaults["system.name"] = system
        if system not in BUILTIN_NAMES:
            errors.append(f"unknown system '{system}'{_suggest(system, BUILTIN_NAMES)}")
        elif subcommand in NF_COMMANDS and system != "nf-map":
            errors.append(f"{subcommand} works on the nf-map system, got '{system}'")
        else:
            allowed = PARAM_KEYS[system]
            for key, value in raw_params.items():
                numbered = system == "nf-map" and key.startswith("psi") and key[3:].isdigit()
                if key not in allowed and not numbered:
                    errors.append(f"unknown parameter '{key}' for {system}{_suggest(key, allowed)}")
                    continue
                try:
                    params[key] = _param_value(value)
                except ValueError as exc:
                    errors.append(f"[params] {key}: {exc}")

    # options
    schema = SUBCOMMANDS[subcommand]
    raw_options = dict(doc["options"]) if doc.has_section("options") else {}
    options: Dict[str, Any] = {}
    for key, text_value in raw_options.items():
        if key not in schema:
            errors.append(f"unknown option '{key}' for {subcommand}{_suggest(key, schema)}")
            continue
        try:
            options[key] = parse_option(key, schema[key], text_value)
        except ValueError as exc:
            errors.append(f"[options] {key}: {exc}")
    for key, spec in schema.items():
        if key not in options:
            options[key] = spec.default
            defaults[f"options.{key}"] = spec.default

    if not errors and system is not None:
        errors.extend(_check_system(subcommand, system, params, options, defaults))
    errors.extend(_check_ranges(options))
    if errors:
        raise ValidationError(f"{len(errors)} config error(s)", {"errors": errors})
    return RunConfig(subcommand, system, params, options, seed, threads, defaults)


def _check_system(subcommand: str, system: str, params: Dict[str, Any], options: Dict[str, Any],
                  defaults: Dict[str, Any]) -> List[str]:
    # build once so parameter problems (q >= 5, ranges, coprimality) show up here
    try:
        built = builtin_system(system, params)
    except ValidationError as exc:
        return [f"[params] {msg}" for msg in exc.diagnostics.get("problems", [str(exc)])]
    except (LabError, TypeError, ValueError) as exc:
        return [f"[params] {exc}"]
    if subcommand == "check-rev" and options.get("tol") is None:
        options["tol"] = built.tolerance
        defaults["options.tol"] = built.tolerance
    return []


def _check_ranges(options: Dict[str, Any]) -> List[str]:
    errors = []
    pairs = [("s_lo", "s_hi"), ("rho_lo", "rho_hi"), ("phi_lo", "phi_hi"), ("mu_lo", "mu_hi"), ("u_lo", "u_hi"),
             ("A_lo", "A_hi"), ("y_lo", "y_hi"), ("n_min", "n_max")]
    for lo, hi in pairs:
        a, b = options.get(lo), options.get(hi)
        if a is not None and b is not None and not a < b:
            errors.append(f"[options] need {lo} < {hi}, got {a} and {b}")
    x0 = options.get("x0")
    if x0 is not None and len(x0) != 2:
        errors.append(f"[options] x0 needs two coordinates, got {len(x0)}")
    for m, n in options.get("pairs") or ():
        if n < 1:
            errors.append(f"[options] pair {m}/{n} needs n >= 1")
    return errors


def load(path: str, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}", {"errors": [str(exc)]}) from exc
    return validate(text, overrides)
