import collections
import concurrent.futures
import csv
import dataclasses
import logging
import math
import numpy as np

import util
import bloch
import solver
import oracle
import metrics
import fixtures

PARAMS = ("a", "k", "phi")
FORMATS = ("csv", "json")
HEADER = ("param", "D_analytic", "D_oracle", "support", "branch")

Row = collections.namedtuple("Row", ["param", "d_analytic", "d_oracle", "support", "branch"])

@dataclasses.dataclass(frozen=True, eq=False)
class SweepSpec:
    states: bloch.StateSet
    param: str
    start: float
    stop: float
    step: float
    fixed: dict # values of the two parameters not swept
    oracle_check: bool = False
    output_format: str = "csv"
    name: str = ""
    tolerances: util.Tolerances | None = None
    oracle_config: oracle.OracleConfig | None = None

    def __post_init__(self):
        if self.param not in PARAMS: raise util.ValidationError(f"swept parameter must be one of {', '.join(PARAMS)}, got {self.param!r}")
        if self.output_format not in FORMATS: raise util.ValidationError(f"output format must be one of {', '.join(FORMATS)}, got {self.output_format!r}")
        for x in (self.start, self.stop, self.step):
            if not math.isfinite(x): raise util.ValidationError("sweep range must be finite")
        if not self.step > 0: raise util.ValidationError(f"sweep step must be positive, got {self.step}")
        if self.stop < self.start: raise util.ValidationError(f"sweep range is empty ({self.start} > {self.stop})")
        if self.param in ("a", "k") and not (0 <= self.start and self.stop <= 1): raise util.ValidationError(f"{self.param} must stay within [0, 1]")
        missing = [p for p in PARAMS if p != self.param and p not in self.fixed]
        if missing: raise util.ValidationError(f"sweep over {self.param} needs fixed values for {', '.join(missing)}")
        # checks the fixed values
        self.target_at(self.start)

    def target_at(self, value):
        values = { p: self.fixed[p] for p in PARAMS if p != self.param }
        values[self.param] = value
        return bloch.TargetParams(values["a"], values["k"], values["phi"])

def grid_values(start, stop, step):
    """start, start + step, ... up to stop; the last point is clipped to stop against rounding."""
    n = math.floor((stop - start) / step + 1e-9) + 1
    return np.minimum(start + step * np.arange(n), stop)

def _evaluate(spec, value):
    tol = spec.tolerances or util.tolerances()
    try:
        r_o = bloch.bloch_from_params(spec.target_at(float(value)))
        res = solver.solve(r_o, spec.states, tol)
        d_oracle = None
        if spec.oracle_check: d_oracle = oracle.oracle_solve(r_o, spec.states, spec.oracle_config, tol).distance
    except util.BlochMixError as e:
        raise type(e)(f"at {spec.param} = {float(value):.17g}: {e}") from e
    return Row(float(value), res.distance, d_oracle, res.support, res.branch.value)

def _evaluate_packed(args): return _evaluate(*args)

def run_sweep(spec, workers=None):
    """One row per grid point, in grid order. workers > 1 evaluates points in a process pool."""
    if workers is None: workers = util.config.get("sweep", {}).get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1: raise util.ValidationError(f"workers must be a positive integer, got {workers!r}")
    values = grid_values(spec.start, spec.stop, spec.step)
    logging.info("sweeping %s over %d points%s", spec.param, len(values), f" ({spec.name})" if spec.name else "")
    if workers == 1 or len(values) == 1:
        rows = [ _evaluate(spec, v) for v in values ]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate_packed, [ (spec, v) for v in values ], chunksize=max(1, len(values) // (4 * workers))))
    metrics.sweep_rows.inc(len(rows))
    return rows

def row_fields(row):
    return [util.format_float(row.param), util.format_float(row.d_analytic), util.format_float(row.d_oracle), ";".join(str(i) for i in row.support), row.branch]

def write_rows(rows, out, output_format="csv"):
    if output_format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(HEADER)
        for row in rows: writer.writerow(row_fields(row))
    elif output_format == "json":
        out.write(util.json_encode([ dict(zip(HEADER, (row.param, row.d_analytic, row.d_oracle, list(row.support), row.branch))) for row in rows ]))
        out.write("\n")
    else:
        raise util.ValidationError(f"output format must be one of {', '.join(FORMATS)}, got {output_format!r}")

def read_rows(f):
    """Rows back from CSV written by write_rows."""
    reader = csv.reader(f)
    header = next(reader, None)
    if tuple(header or ()) != HEADER: raise util.ParseError(f"unexpected sweep header {header!r}", line=1)
    rows = []
    for line, fields in enumerate(reader, start=2):
        if len(fields) != len(HEADER): raise util.ParseError(f"expected {len(HEADER)} columns, got {len(fields)}", line=line)
        param, d_analytic, d_oracle, support, branch = fields
        try: rows.append(Row(float(param), float(d_analytic), float(d_oracle) if d_oracle else None, tuple(int(i) for i in support.split(";") if i), branch))
        except ValueError as e: raise util.ParseError(str(e), line=line)
    return rows

def figure_sweeps(name, oracle_check=False, allow_invalid_states=False, tol=None, output_format="csv"):
    """The curves of a fixture's figure setup, as (varied value, SweepSpec) pairs."""
    setup = fixtures.figure_setup(name)
    states = fixtures.fixture(setup["fixture"], allow_invalid_states=allow_invalid_states, tol=tol)
    start, stop, step = setup["range"]
    out = []
    for value in setup["values"]:
        fixed = dict(setup["fixed"])
        fixed[setup["vary"]] = value
        out.append((value, SweepSpec(states, setup["param"], start, stop, step, fixed, oracle_check=oracle_check,
            output_format=output_format, name=f"{name} {setup['vary']}={value:.6g}", tolerances=tol)))
    return setup, out
