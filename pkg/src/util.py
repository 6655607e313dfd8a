import re
import os.path
import json
import math
import dataclasses
import logging
import toml

config = {}

config_path = os.path.join(os.path.dirname(__file__), "../config.toml")

DEFAULTS = {
    "log_level": "INFO",
    "metrics_port": 0,
    "tolerances": {},
    "oracle": {},
    "sweep": { "workers": 1 },
}

# update in place for runtime config reload
def load_config(path=None):
    path = path or config_path
    loaded = {}
    if os.path.exists(path):
        with open(path, "r") as f: loaded = toml.load(f)
    else:
        logging.debug("no config at %s, using defaults", path)
    config.clear()
    for k, v in DEFAULTS.items(): config[k] = dict(v) if isinstance(v, dict) else v
    for k, v in loaded.items():
        if isinstance(v, dict) and isinstance(config.get(k), dict): config[k].update(v)
        else: config[k] = v

load_config()

class BlochMixError(Exception):
    pass

class ValidationError(BlochMixError, ValueError):
    """Input that does not describe a valid state, parameter or weight vector."""

class ParseError(ValidationError):
    def __init__(self, message, field=None, line=None):
        where = []
        if field is not None: where.append(f"field {field}")
        if line is not None: where.append(f"line {line}")
        if where: message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.field = field
        self.line = line

class ContractError(BlochMixError, ValueError):
    """A routine was called outside its precondition."""

class ConvergenceError(BlochMixError, RuntimeError):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations

@dataclasses.dataclass(frozen=True)
class Tolerances:
    state: float = 1e-9 # Bloch norm slack
    feasibility: float = 1e-9 # pseudo-probability slack
    degeneracy: float = 1e-12 # relative, for the triple determinant
    tie: float = 1e-10
    rank: float = 1e-9 # relative to the largest singular value
    coincidence: float = 1e-24 # squared edge length treated as a point
    support: float = 1e-14 # weights at or below this are zero
    weight_sum: float = 1e-12
    orthonormal: float = 1e-9
    clamp: float = 1e-12 # negative drift allowed in reduction steps
    fixture_rounding: float = 5e-4 # printed pure states are rounded to 4 decimals

    @classmethod
    def from_config(cls, overrides=None):
        values = dict(config.get("tolerances", {}))
        values.update(overrides or {})
        known = { f.name for f in dataclasses.fields(cls) }
        unknown = sorted(set(values) - known)
        if unknown: raise ValidationError(f"unknown tolerance(s): {', '.join(unknown)}")
        out = {}
        for k, v in values.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                raise ValidationError(f"tolerance {k} must be a finite non-negative number, got {v!r}")
            out[k] = float(v)
        return cls(**out)

def tolerances(tol=None):
    return tol if tol is not None else Tolerances.from_config()

number = "((?:[0-9]+(?:\\.[0-9]*)?|\\.[0-9]+)(?:[eE][-+]?[0-9]+)?)"
phi_regex = re.compile(f"([-+]?){number}?\\s*(pi|π)?(?:\\s*/\\s*([0-9]+(?:\\.[0-9]*)?))?")

def parse_phi(s):
    """Phases as radians, or as multiples of pi: "1.3580pi", "pi/2", "-0.5π"."""
    if isinstance(s, bool): raise ParseError(f"phase must be a number, got {s!r}", field="phi")
    if isinstance(s, (int, float)):
        if not math.isfinite(s): raise ValidationError(f"phase must be finite, got {s!r}")
        return float(s)
    if not isinstance(s, str): raise ParseError(f"phase must be a number or string, got {s!r}", field="phi")
    match = phi_regex.fullmatch(s.strip())
    if not match or not (match.group(2) or match.group(3)): raise ParseError(f"cannot parse phase {s!r}", field="phi")
    sign, coeff, pi, divisor = match.groups()
    num = float(coeff) if coeff else 1.0
    if sign == "-": num = -num
    if pi: num *= math.pi
    if divisor:
        if float(divisor) == 0: raise ParseError(f"zero divisor in phase {s!r}", field="phi")
        num /= float(divisor)
    if not math.isfinite(num): raise ValidationError(f"phase must be finite, got {s!r}")
    return num

def parse_number(s, field=None):
    if isinstance(s, bool) or not isinstance(s, (int, float, str)): raise ParseError(f"expected a number, got {s!r}", field=field)
    try: x = float(s)
    except ValueError: raise ParseError(f"expected a number, got {s!r}", field=field)
    if not math.isfinite(x): raise ValidationError(f"{field or 'value'} must be finite, got {s!r}")
    return x

def parse_range(text):
    """start:stop:step, each part a plain number or a pi multiple."""
    parts = text.split(":")
    if len(parts) != 3: raise ParseError(f"range must look like start:stop:step, got {text!r}", field="range")
    return tuple(parse_phi(p) for p in parts)

# 17 significant digits round-trips any float64
def format_float(x):
    if x is None: return ""
    return f"{float(x):.17g}"

def json_encode(x, **kwargs): return json.dumps(x, separators=(',', ':'), **kwargs)
