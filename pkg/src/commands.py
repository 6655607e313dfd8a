import argparse
import logging
import os
import sys
import numpy as np

import util
import solver
import oracle
import caratheodory
import pauli
import problem
import fixtures
import sweep

ORACLE_AGREEMENT = 1e-6

# argparse exits the process on bad flags, which would bypass the exit code mapping in main, so raise instead
class NonExitingArgumentParser(argparse.ArgumentParser):
    def exit(self, status=0, message=None):
        if status:
            raise util.ParseError(f"Flag parse error: {(message or '').strip()}")
        sys.exit(status)

def _emit(text, out=None):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", newline="") as f: f.write(text)

def approximate(args):
    target, states, options = problem.load_problem(args.problem, args.allow_invalid_states)
    tol = options.tolerances
    if args.pauli: res = pauli.solve_pauli(pauli.PauliProblem(target, pauli.specs_from_states(states, tol)), tol)
    else: res = solver.solve(target, states, tol)
    logging.info("%s: D = %.6g via %s", args.problem, res.distance, res.branch.value)
    d_oracle = None
    if args.oracle or options.oracle_check:
        d_oracle = oracle.oracle_solve(target, states, tol=tol).distance
        if abs(d_oracle - res.distance) > ORACLE_AGREEMENT:
            logging.warning("closed form (%.12g) and oracle (%.12g) disagree", res.distance, d_oracle)
    if args.format == "csv":
        header = ["D_analytic", "D_oracle", "support", "branch"] + [ f"p_{label}" for label in states.labels ]
        row = [util.format_float(res.distance), util.format_float(d_oracle), ";".join(map(str, res.support)), res.branch.value] + [ util.format_float(w) for w in res.weights ]
        _emit(",".join(header) + "\n" + ",".join(row) + "\n", args.out)
    else:
        out = res.to_dict()
        out["labels"] = list(states.labels)
        out["target"] = target.tolist()
        out["D_oracle"] = d_oracle
        _emit(util.json_encode(out) + "\n", args.out)

def _fixed_values(args, params):
    fixed = {}
    if params is not None: fixed = { "a": params.a, "k": params.k, "phi": params.phi }
    if args.a is not None: fixed["a"] = util.parse_number(args.a, "a")
    if args.k is not None: fixed["k"] = util.parse_number(args.k, "k")
    if args.phi is not None: fixed["phi"] = util.parse_phi(args.phi)
    fixed.pop(args.param, None)
    return fixed

def run_sweep(args):
    tol = util.tolerances()
    if args.figure:
        if not args.out or args.out == "-": raise util.ValidationError("--figure writes one file per curve and needs --out DIR")
        os.makedirs(args.out, exist_ok=True)
        setup, curves = sweep.figure_sweeps(args.figure, args.oracle, args.allow_invalid_states, tol, args.format)
        for value, spec in curves:
            rows = sweep.run_sweep(spec, args.workers)
            path = os.path.join(args.out, f"{args.figure}_{setup['vary']}={value:.6g}.{args.format}")
            with open(path, "w", newline="") as f: sweep.write_rows(rows, f, args.format)
            logging.info("wrote %d rows to %s", len(rows), path)
        return
    if not args.param or not args.range: raise util.ValidationError("sweep needs --param and --range (or --figure)")
    params = None
    if args.fixture:
        states = fixtures.fixture(args.fixture, allow_invalid_states=args.allow_invalid_states, tol=tol)
        oracle_check, name = args.oracle, args.fixture
    else:
        _, states, options = problem.load_problem(args.problem, args.allow_invalid_states)
        tol, params, name = options.tolerances, options.target_params, args.problem
        oracle_check = args.oracle or options.oracle_check
    start, stop, step = util.parse_range(args.range)
    spec = sweep.SweepSpec(states, args.param, start, stop, step, _fixed_values(args, params), oracle_check=oracle_check,
        output_format=args.format, name=name, tolerances=tol)
    rows = sweep.run_sweep(spec, args.workers)
    if args.out and args.out != "-":
        with open(args.out, "w", newline="") as f: sweep.write_rows(rows, f, args.format)
        logging.info("wrote %d rows to %s", len(rows), args.out)
    else:
        sweep.write_rows(rows, sys.stdout, args.format)

def _describe(d):
    labels = d.states.labels
    return ", ".join(f"{labels[i]}={d.weights[i]:.10g}" for i in d.support)

def reduce_command(args):
    _, states, options = problem.load_problem(args.problem, args.allow_invalid_states)
    tol = options.tolerances
    if args.weights is not None: weights = [ util.parse_number(w, "weights") for w in args.weights.split(",") ]
    elif options.weights is not None: weights = options.weights
    else: raise util.ValidationError("reduce needs --weights or a weights entry in the problem file")
    d = caratheodory.Decomposition.of(states, weights, tol)
    reduced = caratheodory.reduce(d, tol)
    full_rank = solver.matrix_rank(states.decomposition_matrix(), tol)
    residual = float(np.linalg.norm(reduced.states.bloch_matrix() @ reduced.weights - d.mixed_bloch))
    if args.format == "json":
        _emit(util.json_encode({
            "rank": full_rank,
            "original": { "support": list(d.support), "weights": d.weights.tolist() },
            "reduced": { "support": list(reduced.support), "weights": reduced.weights.tolist() },
            "reduced_any": reduced is not d,
            "residual": residual
        }) + "\n")
        return
    lines = [
        f"rank: {full_rank}",
        f"original support ({len(d.support)} states): {_describe(d)}",
    ]
    if reduced is d: lines.append(f"no reduction: support already has at most {full_rank} states")
    else: lines.append(f"reduced support ({len(reduced.support)} states): {_describe(reduced)}")
    lines.append(f"mixture residual: {residual:.3g}")
    _emit("\n".join(lines) + "\n")

def rank(args):
    _, states, options = problem.load_problem(args.problem, args.allow_invalid_states)
    r = solver.matrix_rank(states.decomposition_matrix(), options.tolerances)
    _emit(f"{r}\n")

def list_fixtures(args):
    if args.show:
        s = fixtures.fixture(args.show, allow_invalid_states=args.allow_invalid_states)
        lines = [ f"{label} {' '.join(util.format_float(c) for c in v)}{' pure' if pure else ''}" for v, label, pure in zip(s.vectors, s.labels, s.pure) ]
        _emit("\n".join(lines) + "\n")
        return
    figures = set(fixtures.figure_names())
    lines = []
    for name in fixtures.fixture_names():
        extra = " [figure]" if name in figures else ""
        lines.append(f"{name}: {fixtures.description(name)}{extra}")
    _emit("\n".join(lines) + "\n")

def _workers(text):
    try: n = int(text)
    except ValueError: raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if n < 1: raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return n

def build_parser():
    parser = NonExitingArgumentParser(prog="blochmix", description="Closest convex mixtures of qubit states in trace distance.")
    parser.add_argument("--config", help="config file (default: config.toml next to the source)")
    parser.add_argument("--log-level", help="overrides log_level from the config")
    parser.add_argument("--metrics-file", help="write prometheus metrics here when done")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=NonExitingArgumentParser)

    p = sub.add_parser("approximate", help="solve one problem file")
    p.add_argument("--problem", required=True)
    p.add_argument("--oracle", action="store_true", help="also run the numerical oracle")
    p.add_argument("--pauli", action="store_true", help="use the Pauli-eigenstate closed forms")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.add_argument("--allow-invalid-states", action="store_true")
    p.set_defaults(handler=approximate)

    p = sub.add_parser("sweep", help="solve along a line in (a, k, phi)")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--fixture")
    source.add_argument("--problem")
    source.add_argument("--figure", help="fixture whose plotted curves to reproduce, one file per curve")
    p.add_argument("--param", choices=sweep.PARAMS)
    p.add_argument("--range", help="start:stop:step, e.g. 0:2pi:0.02pi")
    p.add_argument("--a")
    p.add_argument("--k")
    p.add_argument("--phi")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--format", choices=sweep.FORMATS, default="csv")
    p.add_argument("--out")
    p.add_argument("--workers", type=_workers)
    p.add_argument("--allow-invalid-states", action="store_true")
    p.set_defaults(handler=run_sweep)

    p = sub.add_parser("reduce", help="shrink a decomposition to at most rank-many states")
    p.add_argument("--problem", required=True)
    p.add_argument("--weights", help="comma separated, one per state")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--allow-invalid-states", action="store_true")
    p.set_defaults(handler=reduce_command)

    p = sub.add_parser("rank", help="rank of the decomposition matrix")
    p.add_argument("--problem", required=True)
    p.add_argument("--allow-invalid-states", action="store_true")
    p.set_defaults(handler=rank)

    p = sub.add_parser("fixtures", help="list the built-in state sets")
    p.add_argument("--show", metavar="NAME")
    p.add_argument("--allow-invalid-states", action="store_true")
    p.set_defaults(handler=list_fixtures)
    return parser
