"""Command line entry point: ``laguerre-riesz run|list|verify``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .. import _accel
from ..special_fn import SPECIAL_FUNCTIONS
from .acceptance import criterion_11, results_csv, run_suite
from .experiments import EXPERIMENTS, run_experiment
from .report import atomic_write, write_run


def _scalar(text: str, like=None):
    t = text.strip()
    if isinstance(like, bool):
        return t.lower() in ("1", "true", "yes", "on")
    if isinstance(like, str):
        return t
    try:
        v = int(t)
        return float(v) if isinstance(like, float) else v
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def coerce(text: str, default=None):
    """Parse a config value using the default's type as a hint.

    Comma-separated text becomes a list; a bare number becomes int or float.
    """
    if "," in text or isinstance(default, (list, tuple)):
        like = default[0] if isinstance(default, (list, tuple)) and default else None
        return [_scalar(p, like) for p in text.split(",") if p.strip()]
    return _scalar(text, default)


def read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _params(name: str, config: dict, sets: list) -> dict:
    defaults = EXPERIMENTS[name].defaults
    raw = dict(config)
    for item in sets or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        raw[k.strip()] = v.strip()
    return {k: coerce(v, defaults.get(k)) for k, v in raw.items()}


def _config_text(name: str, params: dict, seed: int) -> str:
    full = dict(EXPERIMENTS[name].defaults)
    full.update(params)
    lines = [f"experiment = {name}", f"seed = {seed}", f"backend = {_accel.BACKEND}"]
    for k in sorted(full):
        v = full[k]
        v = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v) if isinstance(v, (list, tuple)) else v
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


def _run_dir(base: str, name: str) -> str:
    stamp = time.strftime("%Y%m%dT%H%M%S")
    path = os.path.join(base, f"{stamp}-{name}")
    k = 1
    while os.path.exists(path):
        path = os.path.join(base, f"{stamp}-{name}-{k}")
        k += 1
    return path


def _set_threads(n):
    if n is None:
        return
    if n < 1:
        raise ValueError("--threads must be >= 1")
    if _accel.HAVE_NUMBA:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def cmd_run(args) -> int:
    if args.name not in EXPERIMENTS:
        print(f"unknown experiment {args.name!r}; try 'laguerre-riesz list'", file=sys.stderr)
        return 2
    _set_threads(args.threads)
    config = read_config(args.config) if args.config else {}
    params = _params(args.name, config, args.set)
    report = run_experiment(args.name, seed=args.seed, **params)
    out = _run_dir(args.out, args.name)
    write_run(report, out, _config_text(args.name, params, args.seed), svg=args.svg)
    print(
        f"{report.name}: verdict={report.verdict} slope={report.fitted_slope:.4g} "
        f"(+-{report.slope_stderr:.2g}) expected={report.expected_slope:.4g} tol={report.tolerance:.3g} "
        f"runtime={report.runtime_seconds:.1f}s"
    )
    print(out)
    return 0 if report.verdict in ("pass", "report-only") else 1


def cmd_list(args) -> int:
    for name, exp in EXPERIMENTS.items():
        print(f"{name:26s} {exp.anchor}")
        if args.verbose:
            for k, v in exp.defaults.items():
                print(f"{'':28s}{k} = {v}")
    return 0


def cmd_verify(args) -> int:
    _set_threads(args.threads)
    results = run_suite(seed=args.seed, slow=args.slow)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "samples.csv")
    atomic_write(csv_path, results_csv(results))
    if args.compare:
        r11 = criterion_11(args.compare, csv_path)
        print(r11.line())
        results.append(r11)
    else:
        print("[SKIP] criterion 11 determinism: rerun with --compare <earlier samples.csv>")
    summary = [
        {"id": r.id, "name": r.name, "metric": r.metric, "threshold": r.threshold, "passed": r.passed,
         "runtime_seconds": r.runtime_seconds, "runtime_limit": r.runtime_limit, "details": r.details}
        for r in results
    ]
    atomic_write(os.path.join(args.out, "report.json"),
                 json.dumps({"seed": args.seed, "criteria": summary}, indent=2, default=str) + "\n")
    print(csv_path)
    return 0 if all(r.passed for r in results) else 1


def dump_special(tokens) -> int:
    kv = dict(t.split("=", 1) for t in tokens if "=" in t)
    name = kv.get("fn")
    if name not in SPECIAL_FUNCTIONS:
        print(f"fn must be one of {sorted(SPECIAL_FUNCTIONS)}", file=sys.stderr)
        return 2
    args = [coerce(a) for a in kv.get("args", "").split(",") if a.strip()]
    val = SPECIAL_FUNCTIONS[name](*args)
    print(repr(float(val)) if not hasattr(val, "__len__") else repr(val))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="laguerre-riesz", description="Laguerre expansion experiments")
    p.add_argument("--dump-special", nargs="+", metavar="KEY=VALUE",
                   help="print one special-function value: fn=<name> args=a,b,...")
    sub = p.add_subparsers(dest="command")

    r = sub.add_parser("run", help="run one named experiment")
    r.add_argument("name")
    r.add_argument("--config")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    r.add_argument("--out", default="runs")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--threads", type=int)
    r.add_argument("--svg", action="store_true", help="also write a log-log SVG of the samples")
    r.set_defaults(func=cmd_run)

    ls = sub.add_parser("list", help="list experiments with their anchors")
    ls.add_argument("-v", "--verbose", action="store_true")
    ls.set_defaults(func=cmd_list)

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default=os.path.join("runs", "verify"))
    v.add_argument("--slow", action="store_true", help="include the slow criteria")
    v.add_argument("--compare", help="earlier samples.csv to check determinism against")
    v.add_argument("--threads", type=int)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dump_special:
        return dump_special(args.dump_special)
    if not args.command:
        parser.print_help()
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
