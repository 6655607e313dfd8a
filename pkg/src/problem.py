"""Problem files: one JSON document holding a target, a state set and options.

    {
        "target": {"bloch": [x, y, z]} or {"a": 0.3, "k": 0.5, "phi": "1.3580pi"},
        "states": [{"bloch": [x, y, z], "label": "r1", "pure": false}, {"pauli": "+x"}, ...],
        "options": {"oracle_check": false, "allow_invalid_states": false, "tolerances": {"tie": 1e-10}},
        "weights": [w1, ..., wN]
    }

label, pure, options and weights are optional. A state declared pure whose
printed vector is slightly off the sphere is snapped onto it.
"""

import collections
import dataclasses
import json
import numbers
import numpy as np

import util
import bloch
import pauli

@dataclasses.dataclass(frozen=True, eq=False)
class Options:
    oracle_check: bool = False
    allow_invalid_states: bool = False
    tolerance_overrides: dict = dataclasses.field(default_factory=dict)
    tolerances: util.Tolerances | None = None
    weights: np.ndarray | None = None
    target_params: bloch.TargetParams | None = None

Problem = collections.namedtuple("Problem", ["target", "states", "options"])

def _require(obj, kind, field):
    if not isinstance(obj, kind): raise util.ParseError(f"expected {kind.__name__}, got {type(obj).__name__}", field=field)
    return obj

def _flag(options, name):
    x = options.get(name, False)
    if not isinstance(x, bool): raise util.ParseError(f"expected true or false, got {x!r}", field=f"options.{name}")
    return x

def _vector(x, field):
    if not isinstance(x, list) or len(x) != 3: raise util.ParseError("expected a list of 3 numbers", field=field)
    for c in x:
        if isinstance(c, bool) or not isinstance(c, numbers.Real): raise util.ParseError(f"expected a number, got {c!r}", field=field)
    return [float(c) for c in x]

def _target(raw, tol):
    _require(raw, dict, "target")
    if "bloch" in raw:
        if set(raw) - {"bloch"}: raise util.ParseError("give either bloch or a, k, phi", field="target")
        return bloch.bloch_vector(_vector(raw["bloch"], "target.bloch"), tol, name="target"), None
    missing = [key for key in ("a", "k", "phi") if key not in raw]
    if missing: raise util.ParseError(f"missing {', '.join(missing)}", field="target")
    extra = sorted(set(raw) - {"a", "k", "phi"})
    if extra: raise util.ParseError(f"unexpected key(s) {', '.join(extra)}", field="target")
    params = bloch.TargetParams(util.parse_number(raw["a"], "target.a"), util.parse_number(raw["k"], "target.k"), util.parse_phi(raw["phi"]))
    return bloch.bloch_from_params(params), params

def _states(raw, tol, allow_invalid):
    _require(raw, list, "states")
    if not raw: raise util.ParseError("need at least one state", field="states")
    vectors, labels, pure = [], [], []
    for i, entry in enumerate(raw):
        field = f"states[{i}]"
        _require(entry, dict, field)
        if "pauli" in entry:
            spec = pauli.PauliStateSpec.parse(_require(entry["pauli"], str, f"{field}.pauli"))
            vectors.append(spec.bloch())
            labels.append(_require(entry.get("label", spec.label), str, f"{field}.label"))
            pure.append(True)
            continue
        if "bloch" not in entry: raise util.ParseError("expected bloch or pauli", field=field)
        vectors.append(_vector(entry["bloch"], f"{field}.bloch"))
        labels.append(_require(entry.get("label", f"r{i + 1}"), str, f"{field}.label"))
        flagged = entry.get("pure", False)
        if not isinstance(flagged, bool): raise util.ParseError(f"expected true or false, got {flagged!r}", field=f"{field}.pure")
        pure.append(flagged)
    if len(set(labels)) != len(labels): raise util.ParseError("state labels must be unique", field="states")
    return bloch.StateSet.from_vectors(vectors, labels=labels, pure=pure, tol=tol, allow_invalid=allow_invalid)

def parse_problem(text, allow_invalid_states=False):
    """Parse and validate a problem file. allow_invalid_states forces renormalization of states outside the Bloch ball."""
    try: doc = json.loads(text)
    except json.JSONDecodeError as e: raise util.ParseError(f"invalid JSON: {e.msg}", line=e.lineno)
    _require(doc, dict, "top level")
    unknown = sorted(set(doc) - {"target", "states", "options", "weights"})
    if unknown: raise util.ParseError(f"unexpected key(s) {', '.join(unknown)}", field="top level")
    for key in ("target", "states"):
        if key not in doc: raise util.ParseError("missing", field=key)
    options = _require(doc.get("options", {}), dict, "options")
    unknown = sorted(set(options) - {"oracle_check", "allow_invalid_states", "tolerances"})
    if unknown: raise util.ParseError(f"unexpected key(s) {', '.join(unknown)}", field="options")
    overrides = dict(_require(options.get("tolerances", {}), dict, "options.tolerances"))
    try: tol = util.Tolerances.from_config(overrides)
    except util.ValidationError as e: raise util.ParseError(str(e), field="options.tolerances")
    allow_invalid = _flag(options, "allow_invalid_states") or allow_invalid_states
    target, params = _target(doc["target"], tol)
    states = _states(doc["states"], tol, allow_invalid)
    weights = None
    if "weights" in doc:
        raw = _require(doc["weights"], list, "weights")
        weights = np.array([util.parse_number(w, "weights") for w in raw])
        if weights.size != len(states): raise util.ParseError(f"expected {len(states)} weights, got {weights.size}", field="weights")
    return Problem(np.asarray(target), states, Options(
        oracle_check=_flag(options, "oracle_check"),
        allow_invalid_states=_flag(options, "allow_invalid_states"),
        tolerance_overrides=overrides,
        tolerances=tol,
        weights=weights,
        target_params=params
    ))

def load_problem(path, allow_invalid_states=False):
    try:
        with open(path, "r") as f: text = f.read()
    except OSError as e: raise util.ParseError(f"cannot read problem file {path}: {e.strerror}")
    return parse_problem(text, allow_invalid_states)

def emit_problem(problem):
    """Inverse of parse_problem, as a JSON string."""
    target, states, options = problem
    if options.target_params is not None:
        t = options.target_params
        out_target = { "a": t.a, "k": t.k, "phi": t.phi }
    else:
        out_target = { "bloch": [float(c) for c in target] }
    doc = {
        "target": out_target,
        "states": [ { "bloch": [float(c) for c in v], "label": label, "pure": flagged } for v, label, flagged in zip(states.vectors, states.labels, states.pure) ],
        "options": { "oracle_check": options.oracle_check, "allow_invalid_states": options.allow_invalid_states, "tolerances": dict(options.tolerance_overrides) }
    }
    if options.weights is not None: doc["weights"] = [float(w) for w in options.weights]
    return json.dumps(doc, indent=4)
