"""Command-line entry point.

Exit codes: 0 on success, 1 on spec or usage errors, 2 when some grid
points were degenerate (every run truncated) or an oracle check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from . import presets
from .config import load_spec
from .errors import ConfigError
from .experiment import run_experiment, to_csv, to_json
from .validation import run_suite

EXIT_OK = 0
EXIT_SPEC = 1
EXIT_DEGENERATE = 2


def _common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--spec", type=Path, help="JSON experiment document")
    src.add_argument("--preset", help="bundled preset name (see `qtrel presets list`)")
    p.add_argument("--runs", type=int, help="runs per grid point")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--epsilon", type=float, help="tail mass tolerated by the composed estimator")
    p.add_argument("--out", type=Path, help="output file (default: stdout, or the spec's outputs)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--workers", type=int, default=1, help="worker processes; never changes results")
    p.add_argument("--quiet", action="store_true", help="suppress the progress counter")


def _point_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("inline scenario (used when no --spec/--preset is given)")
    g.add_argument("--medium", choices=("fiber", "fso"))
    g.add_argument("--d", type=float, help="Alice-Bob distance in metres")
    g.add_argument("--tau", type=float, help="memory coherence time in seconds")
    g.add_argument("--n-qubit", type=int)
    g.add_argument("--n-par", type=int)
    g.add_argument("--f-th", type=float)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qtrel", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    rel = sub.add_parser("reliability", help="evaluate a single scenario")
    _common(rel)
    _point_flags(rel)

    sw = sub.add_parser("sweep", help="evaluate every point of a grid")
    _common(sw)

    fe = sub.add_parser("feasibility", help="frontier search for each grid point")
    _common(fe)
    _point_flags(fe)
    fe.add_argument("--r-th", type=float, nargs="+", help="target reliabilities")
    fe.add_argument("--axis", choices=("max_distance", "max_qubits"))
    fe.add_argument("--resolution", type=float, help="distance resolution in metres")

    oc = sub.add_parser("oracle-check", help="compare the engine with the exact oracles")
    oc.add_argument("--runs", type=int, default=100_000)
    oc.add_argument("--seed", type=int, default=0)
    oc.add_argument("--z", type=float, default=4.0, help="allowed deviation in binomial sigmas")

    pr = sub.add_parser("presets", help="list or print bundled presets")
    pr_sub = pr.add_subparsers(dest="action", required=True)
    pr_sub.add_parser("list")
    show = pr_sub.add_parser("show")
    show.add_argument("name")
    return ap


def _document(args) -> dict[str, Any]:
    if args.spec is not None:
        try:
            doc = json.loads(args.spec.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read {args.spec}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.spec} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("document must be a JSON object")
        return doc
    if args.preset is not None:
        if args.preset in presets.REFERENCE_ONLY:
            raise ConfigError(f"preset {args.preset!r} is reference data, not an experiment spec")
        return presets.document(args.preset)
    return {}


def _overrides(doc: dict[str, Any], args) -> dict[str, Any]:
    flat = {
        "runs": args.runs,
        "seed": args.seed,
        "epsilon": args.epsilon,
        "medium": getattr(args, "medium", None),
        "d": getattr(args, "d", None),
        "tau": getattr(args, "tau", None),
        "n_qubit": getattr(args, "n_qubit", None),
        "n_par": getattr(args, "n_par", None),
        "f_th": getattr(args, "f_th", None),
    }
    doc.update({k: v for k, v in flat.items() if v is not None})
    if args.command == "feasibility":
        feas = dict(doc.get("feasibility", {}))
        if args.r_th:
            feas["r_th"] = args.r_th
        if args.axis:
            feas["axis"] = args.axis
        if args.resolution:
            feas["distance_resolution"] = args.resolution
        doc["feasibility"] = feas
    elif "feasibility" in doc:
        raise ConfigError(f"spec has a feasibility block; use `qtrel feasibility`, not `qtrel {args.command}`")
    return doc


def _run(args) -> int:
    spec = load_spec(_overrides(_document(args), args))
    n = spec.grid_size
    if args.command == "reliability" and n != 1:
        raise ConfigError(f"`reliability` takes a single point; this spec has {n} (use `sweep`)")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    log = sys.stderr
    if not args.quiet:
        print(f"{spec.name or 'spec'}: {n} grid point(s), {spec.runs_per_point} runs each, seed {spec.master_seed}", file=log)

    def progress(i: int, total: int) -> None:
        if not args.quiet:
            print(f"\r[{i}/{total}]", end="\n" if i == total else "", file=log, flush=True)

    result = run_experiment(spec, workers=args.workers, progress=progress)
    if args.out:
        targets = [(args.out, args.format or "csv")]
    elif args.format:
        targets = []  # explicit format without a path: stdout
    else:
        targets = [(Path(o.path), o.format) for o in spec.outputs]
    if not targets:
        sys.stdout.write(to_json(result) if args.format == "json" else to_csv(result))
    for path, fmt in targets:
        path.write_text(to_json(result) if fmt == "json" else to_csv(result))
        if not args.quiet:
            print(f"wrote {path}", file=log)
    if result.degenerate:
        bad = sum(1 for d in result.details if d.get("error"))
        print(f"warning: {bad} degenerate point(s); see the error field in JSON output", file=log)
        return EXIT_DEGENERATE
    return EXIT_OK


def _oracle_check(args) -> int:
    checks = run_suite(n_runs=args.runs, seed=args.seed, z_max=args.z)
    width = max(len(c.label) for c in checks)
    for c in checks:
        flag = "ok  " if c.passed else "FAIL"
        print(f"{flag} {c.label:<{width}}  oracle={c.oracle:.6f}  mc={c.estimate:.6f}  z={c.z:.2f}")
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks within {args.z} sigma")
    return EXIT_DEGENERATE if failed else EXIT_OK


def _presets(args) -> int:
    if args.action == "list":
        for name in presets.names():
            desc = presets.document(name).get("description", "")
            print(f"{name:<12} {desc}")
    else:
        sys.stdout.write(presets.text(args.name))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "oracle-check":
            return _oracle_check(args)
        if args.command == "presets":
            return _presets(args)
        return _run(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except BrokenPipeError:
        # downstream closed early (e.g. `| head`)
        sys.stdout = None
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
