"""Command-line front end.

    w2interp <command> [--m INT] [--n INT] [--z REAL] [--zgrid INT]
             [--function sq|exp2|sin] [--samples PATH] [--output csv|json] [--out PATH]

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import checks
from .errors import W2InterpError
from .grid import GridSpec
from .interpolator import (
    BUILTINS,
    DEFAULT_ZGRID,
    SampleSet,
    coefficients,
    default_zgrid,
    error_norm,
    interpolate,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
COEFF_TOL = 1e-8
NODE_TOL = 1e-12
STUDY_ORDERS = (1, 2, 3)
STUDY_SIZES = (5, 10)
COMMANDS = ("coeffs", "interp", "norm", "study", "selftest")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    m: int = None
    n: int = None
    z: float = None
    zgrid: int = None
    function: str = None
    samples_path: str = None
    output_format: str = "csv"
    out_path: str = None


def fmt(value):
    """Shortest round-trip text for floats; integers and strings unchanged."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def render(blocks, output_format):
    """Serialise a list of (columns, rows) blocks.

    CSV separates blocks by a blank line; JSON concatenates all records into
    one flat array.
    """
    if output_format == "json":
        records = []
        for columns, rows in blocks:
            for row in rows:
                records.append({c: _json_value(v) for c, v in zip(columns, row)})
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    for i, (columns, rows) in enumerate(blocks):
        if i:
            buf.write("\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def _grid(cfg):
    if cfg.m is None or cfg.n is None:
        raise UsageError(f"{cfg.command} needs --m and --n")
    try:
        return GridSpec(cfg.m, cfg.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _zs(cfg):
    if cfg.z is not None and cfg.zgrid is not None:
        raise UsageError("give either --z or --zgrid, not both")
    if cfg.z is not None:
        return np.array([cfg.z])
    try:
        return default_zgrid(cfg.zgrid if cfg.zgrid is not None else DEFAULT_ZGRID)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def read_samples(path, grid):
    """Parse an ``x,value`` file whose x column must be the grid nodes."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read samples: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != ["x", "value"]:
        raise UsageError("sample file must start with the header 'x,value'")
    data = [r for r in rows[1:] if r]
    if len(data) != grid.N + 1:
        raise UsageError(f"sample file has {len(data)} rows, grid needs {grid.N + 1}")
    values = []
    for i, row in enumerate(data):
        try:
            x, v = float(row[0]), float(row[1])
        except (ValueError, IndexError):
            raise UsageError(f"sample row {i}: cannot parse {row!r}") from None
        if not abs(x - i * grid.h) <= NODE_TOL:
            raise UsageError(f"sample row {i}: x={x!r} is not the node {i * grid.h!r}")
        if not math.isfinite(v):
            raise UsageError(f"sample row {i}: value is not finite")
        values.append(v)
    return SampleSet(grid, values, f"file:{path}")


def cmd_coeffs(cfg):
    grid = _grid(cfg)
    if cfg.z is None:
        raise UsageError("coeffs needs --z")
    z = cfg.z
    explicit = coefficients(grid, z, "explicit").coeffs
    direct = coefficients(grid, z, "direct").coeffs
    diff = np.abs(explicit - direct)
    worst = float(np.max(diff))
    rows = [(b, explicit[b], direct[b], diff[b]) for b in range(grid.N + 1)]
    print(f"max discrepancy {fmt(worst)}", file=sys.stderr)
    status = EXIT_OK if worst <= COEFF_TOL else EXIT_NUMERIC
    return [(("beta", "explicit", "direct", "discrepancy"), rows)], status


def cmd_interp(cfg):
    grid = _grid(cfg)
    if (cfg.samples_path is None) == (cfg.function is None):
        raise UsageError("interp needs exactly one of --samples or --function")
    samples = read_samples(cfg.samples_path, grid) if cfg.samples_path else SampleSet.from_builtin(grid, cfg.function)
    rows = [(z, interpolate(samples, coefficients(grid, float(z)))) for z in _zs(cfg)]
    return [(("z", "value"), rows)], EXIT_OK


def cmd_norm(cfg):
    grid = _grid(cfg)
    rows = [(z, error_norm(grid, coefficients(grid, float(z)))) for z in _zs(cfg)]
    return [(("z", "norm"), rows)], EXIT_OK


def cmd_study(cfg):
    orders = (cfg.m,) if cfg.m is not None else STUDY_ORDERS
    sizes = (cfg.n,) if cfg.n is not None else STUDY_SIZES
    functions = (cfg.function,) if cfg.function else tuple(BUILTINS)
    if cfg.z is not None:
        raise UsageError("study runs over a grid; use --zgrid")
    zs = _zs(cfg)
    rows, summary = [], []
    for m in orders:
        for N in sizes:
            grid = _grid(RunConfig("study", m, N))
            samples = {f: SampleSet.from_builtin(grid, f) for f in functions}
            per_z = []
            for z in zs:
                cv = coefficients(grid, float(z))
                per_z.append((float(z), cv, error_norm(grid, cv)))
            for f in functions:
                exact = BUILTINS[f].func(zs)
                worst = 0.0
                for (z, cv, norm), ex in zip(per_z, exact):
                    err = abs(float(ex) - interpolate(samples[f], cv))
                    worst = max(worst, err)
                    rows.append((m, N, f, z, err, norm))
                summary.append((m, N, f, worst))
    return [
        (("m", "N", "function", "z", "abs_error", "norm"), rows),
        (("m", "N", "function", "max_error"), summary),
    ], EXIT_OK


def cmd_selftest(cfg):
    results = checks.run_suite()
    for r in results:
        print(r.line(), file=sys.stderr)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed", file=sys.stderr)
    rows = [(r.name, r.value, r.tol, "pass" if r.passed else "fail") for r in results]
    return [(("check", "value", "tol", "status"), rows)], EXIT_OK if failed == 0 else EXIT_NUMERIC


HANDLERS = {"coeffs": cmd_coeffs, "interp": cmd_interp, "norm": cmd_norm, "study": cmd_study, "selftest": cmd_selftest}


def build_parser():
    ap = argparse.ArgumentParser(prog="w2interp", description="Optimal interpolation in W2^(m,m-1)(0,1) on equispaced nodes.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--m", type=int)
    ap.add_argument("--n", type=int)
    ap.add_argument("--z", type=float)
    ap.add_argument("--zgrid", type=int)
    ap.add_argument("--function", choices=sorted(BUILTINS))
    ap.add_argument("--samples", dest="samples_path")
    ap.add_argument("--output", dest="output_format", choices=("csv", "json"), default="csv")
    ap.add_argument("--out", dest="out_path")
    return ap


def parse_config(argv):
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(**vars(ns))
    if cfg.z is not None and not (0.0 <= cfg.z <= 1.0):
        raise UsageError(f"--z must lie in [0, 1], got {cfg.z!r}")
    return cfg


def main(argv=None):
    try:
        cfg = parse_config(argv)
        blocks, status = HANDLERS[cfg.command](cfg)
    except SystemExit as exc:  # argparse
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (W2InterpError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render(blocks, cfg.output_format)
    if cfg.out_path:
        try:
            with open(cfg.out_path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write output: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return status


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
