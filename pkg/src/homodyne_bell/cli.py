"""Command-line entry point: eval, sweep, grid, optimize, table1, verify.

Exit codes: 0 success, 1 verification failure, 2 usage error (bad flags,
malformed state spec, bad ranges), 3 internal numeric error.
"""

import argparse
import contextlib
import datetime
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__, bell, engine, oracle, optimizer, states
from .bell import BellKind
from .exceptions import ProbabilityOutOfRange, StateSpecError

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def manifest(command, parameters, seed=None):
    return {
        "command": command,
        "parameters": parameters,
        "tool_version": __version__,
        "seed": seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def fmt(value):
    return format(float(value), ".12g")


def _open_atomic(path):
    """Write to a temp file next to ``path`` and rename on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    return fd, tmp, path


def write_text(path, text):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    fd, tmp, path = _open_atomic(path)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def write_json(path, doc):
    write_text(path, json.dumps(doc, indent=2) + "\n")


def write_csv(path, header, rows, meta):
    lines = [f"# {key}: {json.dumps(value, sort_keys=True)}" for key, value in meta.items()]
    lines.append(",".join(header))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    write_text(path, "\n".join(lines) + "\n")


def angle(value, degrees):
    return math.radians(value) if degrees else value


def inclusive_range(start, end, step, name):
    """start, start + step, ... with floor((end - start) / step) + 1 points."""
    if not (math.isfinite(start) and math.isfinite(end) and math.isfinite(step)):
        raise UsageError(f"{name} range must be finite")
    if step <= 0:
        raise UsageError(f"{name} step must be > 0")
    if end < start:
        raise UsageError(f"{name} end must be >= start")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def add_state_args(p):
    g = p.add_argument_group("state")
    g.add_argument("--coeff-file", help="state-spec JSON file")
    g.add_argument("--family", choices=sorted(states.FAMILIES))
    g.add_argument("--parameter", type=float, help="r, s or c0 for the family")
    g.add_argument("--truncation", type=int, default=states.DEFAULT_TRUNCATION)


def state_from_args(args):
    if args.coeff_file and args.family:
        raise UsageError("give either --coeff-file or --family, not both")
    try:
        if args.coeff_file:
            return states.load_state_spec(args.coeff_file)
        if args.family:
            if args.parameter is None:
                raise UsageError("--family needs --parameter")
            return states.state_from_spec({"family": args.family,
                                           "parameter": args.parameter,
                                           "truncation": args.truncation})
    except (StateSpecError, ValueError, OSError) as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError("a state is required: --coeff-file or --family/--parameter")


def state_params(args):
    if args.coeff_file:
        return {"coeff_file": args.coeff_file}
    return {"family": args.family, "parameter": args.parameter,
            "truncation": args.truncation}


def log_base_arg(text):
    if text in ("2", "bits"):
        return 2
    if text in ("e", "nats"):
        return math.e
    raise argparse.ArgumentTypeError("log base must be 2 or e")


def cmd_eval(args):
    state = state_from_args(args)
    psi = angle(args.psi, args.degrees)
    kind = BellKind.parse(args.kind)
    table = engine.build_coupling_table(max(1, state.truncation))
    value = float(bell.bell_curve(state, table, kind, psi, args.log_base))
    jp = engine.joint_probabilities(state, table, psi)
    result = bell.BellResult.build(kind, value, psi)
    doc = result.to_dict()
    doc.update(jp.as_dict())
    doc["E"] = engine.correlation_e(state, table, psi)
    doc["H"] = engine.conditional_information(jp, args.log_base)
    doc["log_base"] = "e" if args.log_base != 2 else "2"
    doc["coefficients"] = [float(c) for c in state.coefficients]
    doc["manifest"] = manifest("eval", {**state_params(args), "psi": psi,
                                        "kind": kind.value, "log_base": doc["log_base"]})
    write_json(args.out, doc)
    return EXIT_OK


def cmd_sweep(args):
    state = state_from_args(args)
    kind = BellKind.parse(args.kind)
    psi = inclusive_range(angle(args.psi_start, args.degrees),
                          angle(args.psi_end, args.degrees),
                          angle(args.psi_step, args.degrees), "psi")
    table = engine.build_coupling_table(max(1, state.truncation))
    rows = bell.psi_sweep(state, table, kind, psi, args.log_base)
    meta = manifest("sweep", {**state_params(args), "kind": kind.value,
                              "psi_start": float(psi[0]), "psi_end": float(psi[-1]),
                              "psi_step": angle(args.psi_step, args.degrees),
                              "rows": len(rows)})
    write_csv(args.out, ["psi", "value"], rows, meta)
    return EXIT_OK


def cmd_grid(args):
    kind = BellKind.parse(args.kind)
    r = inclusive_range(args.r_start, args.r_end, args.r_step, "r")
    if r[0] <= 0:
        raise UsageError("r must be > 0")
    psi = inclusive_range(angle(args.psi_start, args.degrees),
                          angle(args.psi_end, args.degrees),
                          angle(args.psi_step, args.degrees), "psi")
    if args.truncation < 1:
        raise UsageError("truncation must be >= 1")
    table = engine.build_coupling_table(args.truncation)
    values = bell.circle_grid(r, psi, table, kind, args.log_base)
    rows = [(ri, pj, values[i, j]) for i, ri in enumerate(r) for j, pj in enumerate(psi)]
    meta = manifest("grid", {"kind": kind.value, "truncation": args.truncation,
                             "r_start": float(r[0]), "r_end": float(r[-1]),
                             "r_step": args.r_step, "psi_start": float(psi[0]),
                             "psi_end": float(psi[-1]),
                             "psi_step": angle(args.psi_step, args.degrees)})
    write_csv(args.out, ["r", "psi", "value"], rows, meta)
    return EXIT_OK


def config_from_args(args):
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(doc, dict):
            raise UsageError("config must be a JSON object")
    for key in ("max_iters", "tol", "restarts", "seed"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    try:
        return optimizer.OptimizerConfig.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_optimize(args):
    kind = BellKind.parse(args.kind)
    if args.truncation < 1 or args.truncation > 60:
        raise UsageError("truncation must be in 1..60")
    config = config_from_args(args)
    report = optimizer.optimize_coefficients(kind, args.truncation, config)
    doc = report.to_dict()
    if not args.trace:
        doc.pop("trace")
    doc["violation_percent"] = optimizer.violation_percent(kind, report.best_value)
    doc["note"] = ("violation found" if report.violated
                   else "no violation found for this kind")
    doc["manifest"] = manifest("optimize", {"kind": kind.value,
                                            "truncation": args.truncation,
                                            **{k: getattr(config, k) for k in
                                               ("max_iters", "tol", "restarts")}},
                               seed=config.seed)
    write_json(args.out, doc)
    return EXIT_OK


def cmd_table1(args):
    config = config_from_args(args)
    report = optimizer.table1_report(args.truncation, config)
    text = optimizer.format_table1(report)
    report["manifest"] = manifest("table1", {"truncation": args.truncation},
                                  seed=config.seed)
    if not args.trace:
        for sub in report["optimizer"].values():
            sub.pop("trace")
    print(text)
    if args.out:
        write_json(args.out, report)
    return EXIT_OK


def cmd_verify(args):
    spec = oracle.QuadratureSpec(points_per_axis=args.points)
    table = None
    if args.corrupt_table:
        table = engine.build_coupling_table(args.truncation)
        table = table.with_entry(1, 0, table[1, 0] * 1.01)
    report = oracle.verify_all(truncation=args.truncation, spec=spec, table=table)
    doc = report.to_dict()
    doc["manifest"] = manifest("verify", {"points": args.points,
                                          "truncation": args.truncation,
                                          "corrupt_table": args.corrupt_table})
    write_json(args.out, doc)
    return EXIT_OK if report.passed else EXIT_VERIFY


def add_optimizer_args(p):
    p.add_argument("--config", help="JSON file with max_iters, tol, restarts, seed")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--trace", action="store_true", help="include the iteration trace")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="homodyne-bell",
        description="Bell tests with binned quadrature homodyne outcomes.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    kinds = [k.value for k in BellKind]

    p = sub.add_parser("eval", help="evaluate one functional at one angle")
    add_state_args(p)
    p.add_argument("--psi", type=float, required=True)
    p.add_argument("--degrees", action="store_true")
    p.add_argument("--kind", choices=kinds, default="ch")
    p.add_argument("--log-base", type=log_base_arg, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="functional versus psi, CSV")
    add_state_args(p)
    p.add_argument("--kind", choices=kinds, default="ch")
    p.add_argument("--psi-start", type=float, default=0.0)
    p.add_argument("--psi-end", type=float, default=math.pi)
    p.add_argument("--psi-step", type=float, default=1e-3)
    p.add_argument("--degrees", action="store_true")
    p.add_argument("--log-base", type=log_base_arg, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("grid", help="circle-state functional over (r, psi), CSV")
    p.add_argument("--kind", choices=kinds, default="ch")
    p.add_argument("--r-start", type=float, default=0.1)
    p.add_argument("--r-end", type=float, default=2.0)
    p.add_argument("--r-step", type=float, default=0.02)
    p.add_argument("--psi-start", type=float, default=0.0)
    p.add_argument("--psi-end", type=float, default=math.pi)
    p.add_argument("--psi-step", type=float, default=0.01)
    p.add_argument("--degrees", action="store_true")
    p.add_argument("--truncation", type=int, default=states.DEFAULT_TRUNCATION)
    p.add_argument("--log-base", type=log_base_arg, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("optimize", help="optimize coefficients for one functional")
    p.add_argument("--kind", choices=kinds, default="ch")
    p.add_argument("--truncation", type=int, default=states.DEFAULT_TRUNCATION)
    add_optimizer_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("table1", help="optimal and circle columns vs published values")
    p.add_argument("--truncation", type=int, default=states.DEFAULT_TRUNCATION)
    add_optimizer_args(p)
    p.add_argument("--out", help="also write the full report as JSON")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("verify", help="check closed forms against quadrature")
    p.add_argument("--points", type=int, default=oracle.DEFAULT_POINTS)
    p.add_argument("--truncation", type=int, default=states.DEFAULT_TRUNCATION)
    p.add_argument("--corrupt-table", action="store_true",
                   help="debug: perturb G(1,0) by 1%% to exercise failure reporting")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProbabilityOutOfRange as exc:
        print(f"{parser.prog} {args.command}: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
