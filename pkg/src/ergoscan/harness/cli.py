"""Command line entry point.

Exit codes: 0 success, 2 usage (argparse), 3 validation, 4 runtime.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .. import __version__
from ..asymptotics.scanner import ScanResult, find_hits, refine, scan_windows
from ..asymptotics.windows import WindowIntegrator, window_starts
from ..database.manager import RunRegistry
from ..errors import ErgoscanError, ValidationFailed
from ..models.schemas import Classification
from ..systems.transitivity import check_transitive, validate_adjacency
from . import specs
from .config import materialize, parse_config_text, validate_config
from .formatter import ReportFormatter
from .runner import run_experiment

logger = logging.getLogger(__name__)

DEFAULT_REGISTRY = "ergoscan.db"


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_json(data: object) -> None:
    _emit(json.dumps(data, indent=2, sort_keys=True))


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _read_config(path: str, args: argparse.Namespace) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationFailed(f"cannot read config: {exc.strerror}", "config") from exc
    data = parse_config_text(text)
    if args.seed is not None:
        data["master_seed"] = args.seed
    if args.out_dir is not None:
        data["output_dir"] = args.out_dir
    return data


def cmd_run(args: argparse.Namespace) -> int:
    config = validate_config(_read_config(args.config, args))
    report = run_experiment(config, threads=args.threads)
    if args.registry:
        run = RunRegistry(args.registry).record(report, config.output_dir)
        logger.info("run registered as %d", run.id)
    if args.format == "json":
        _emit_json(report.to_json(include_timings=config.record_timings))
    elif args.format == "csv":
        _emit("target,epsilon,hits,best")
        best = {t.target: t.best for t in report.targets}
        for hits in report.hitsets:
            value = best.get(hits.target)
            shown = repr(value.value) if value else ""
            _emit(f"{hits.target},{hits.epsilon!r},{hits.count},{shown}")
    else:
        _emit(ReportFormatter.format_report_detailed(report))
    return 0


def _scan_config(args: argparse.Namespace) -> dict:
    targets: List[dict] = []
    point = specs.point_spec(args.point, targets)
    for text in args.target or ():
        entry = specs.target_spec(text)
        if all(t["label"] != entry["label"] for t in targets):
            targets.append(entry)
    if not targets:
        raise ValidationFailed("name at least one target", "targets")
    epsilons = args.epsilon or [0.05]
    system: dict = {"kind": args.system}
    if args.alphabet_size is not None:
        system["alphabet_size"] = args.alphabet_size
    if args.adjacency is not None:
        system["adjacency"] = specs.matrix(args.adjacency, "system.adjacency")
    if args.matrix is not None:
        system["matrix"] = specs.matrix(args.matrix, "system.matrix")
    if args.angle is not None:
        system["angle"] = args.angle
    family = {
        key: value
        for key, value in (
            ("space", args.space),
            ("max_word_length", args.max_word_length),
            ("max_frequency", args.max_frequency),
        )
        if value is not None
    }
    return {
        "system": system,
        "point": point,
        "family": family,
        "targets": targets,
        "n_values": args.n,
        "m_horizon": args.m_horizon,
        "stride": args.stride,
        "epsilons": epsilons,
        # a plain scan does not classify
        "covering_k": max(50, int(2 / max(epsilons)) + 1),
        "master_seed": args.seed or 0,
    }


def cmd_scan(args: argparse.Namespace) -> int:
    config = validate_config(_scan_config(args))
    experiment = materialize(config)
    integrator = WindowIntegrator(experiment.system, experiment.state, experiment.family)
    ms = window_starts(config.m_horizon, config.stride)
    result: Optional[ScanResult] = None
    for n in config.n_values:
        part = scan_windows(integrator, experiment.targets, n, ms, threads=args.threads)
        result = part if result is None else result.merge(part)
    assert result is not None
    if config.stride > 1:
        result = refine(
            integrator, experiment.targets, result, max(config.epsilons), config.stride,
            config.m_horizon, threads=args.threads,
        )
    if args.out_dir is not None:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = result.write_csv(out / "scan.csv")
        logger.info("wrote %d rows to %s", len(result), path)

    hitsets = [find_hits(result, t.label, eps) for t in experiment.targets for eps in config.epsilons]
    if args.format == "csv":
        result.write_rows(sys.stdout)
    elif args.format == "json":
        _emit_json([h.model_dump(mode="json") for h in hitsets])
    else:
        for hits in hitsets:
            mark = "✅" if not hits.is_empty else "❌"
            _emit(f"{mark} {hits.target} ε={hits.epsilon:g}: {hits.count} of {len(result)} windows")
    return 0


def cmd_check_transitive(args: argparse.Namespace) -> int:
    adjacency = validate_adjacency(specs.matrix(args.matrix, "adjacency"))
    transitive = check_transitive(adjacency)
    if args.format == "json":
        _emit_json({"adjacency": adjacency.tolist(), "transitive": transitive})
    else:
        _emit("transitive" if transitive else "not transitive")
    return 0


def cmd_distance(args: argparse.Namespace) -> int:
    mu, nu, value = specs.measure_distance(
        args.mu,
        args.nu,
        alphabet_size=args.alphabet_size,
        space=args.space,
        max_word_length=args.max_word_length,
        max_frequency=args.max_frequency,
    )
    if args.format == "json":
        _emit_json({"mu": mu.label, "nu": nu.label, "value": value.value, "tail_bound": value.tail_bound})
    else:
        _emit(repr(value.value))
    return 0


def cmd_design_point(args: argparse.Namespace) -> int:
    designed = specs.design_point(
        args.spec,
        alphabet_size=args.alphabet_size,
        adjacency=specs.matrix(args.adjacency, "system.adjacency") if args.adjacency else None,
        max_word_length=args.max_word_length,
        master_seed=args.seed or 0,
    )
    if args.format == "json":
        _emit_json({"sequence": designed.sequence.describe(), "metadata": designed.metadata()})
    else:
        _emit(ReportFormatter.format_design(designed))
    return 0


def cmd_runs(args: argparse.Namespace) -> int:
    registry = RunRegistry(args.registry or DEFAULT_REGISTRY)
    if args.action == "list":
        classification = Classification(args.classification) if args.classification else None
        runs = registry.list(classification=classification, page=args.page, page_size=args.page_size)
        if args.format == "json":
            _emit_json([r.model_dump(mode="json") for r in runs])
        else:
            _emit(ReportFormatter.format_runs_list(runs))
        return 0
    if args.run_id is None:
        raise ValidationFailed(f"runs {args.action} needs a run id", "run_id")
    if args.action == "get":
        run = registry.get(args.run_id)
        if run is None:
            raise ErgoscanError(f"run {args.run_id} not found")
        if args.format == "json":
            _emit_json(run.model_dump(mode="json"))
        else:
            _emit(ReportFormatter.format_run(run))
        return 0
    if not registry.delete(args.run_id):
        raise ErgoscanError(f"run {args.run_id} not found")
    _emit(f"deleted run {args.run_id}")
    return 0


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _add_family_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--space", choices=["shift", "circle", "torus"])
    parser.add_argument("--max-word-length", type=int, help="cylinder words up to this length")
    parser.add_argument("--max-frequency", type=int, help="Fourier modes up to this frequency")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergoscan",
        description="Windowed empirical measures along orbits and their weak* distances to ergodic measures",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, help="master seed (overrides the config)")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out-dir", help="output directory (overrides the config)")
    parser.add_argument("--format", choices=["csv", "json"], help="machine readable output")
    parser.add_argument("--registry", help="sqlite file that records runs")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.set_defaults(handler=cmd_run)

    scan = sub.add_parser("scan", help="scan the windows of one orbit")
    scan.add_argument("--system", default="full-shift",
                      choices=["full-shift", "sft", "doubling-map", "cat-map", "rotation"])
    scan.add_argument("--alphabet-size", type=int)
    scan.add_argument("--adjacency", help="sft adjacency, e.g. 11/10")
    scan.add_argument("--matrix", help="cat map matrix, e.g. [[2,1],[1,1]]")
    scan.add_argument("--angle", help='rotation angle: "golden" or a fraction')
    scan.add_argument("--point", required=True, help="e.g. iid:0.5,0.5 or designed:delta:0@1000")
    scan.add_argument("--target", action="append", help="measure spec, repeatable")
    scan.add_argument("-n", type=_int_list, required=True, help="window lengths, comma separated")
    scan.add_argument("-M", "--m-horizon", type=int, required=True)
    scan.add_argument("--stride", type=int, default=1)
    scan.add_argument("--epsilon", type=float, action="append")
    _add_family_flags(scan)
    scan.set_defaults(handler=cmd_scan)

    check = sub.add_parser("check-transitive", help="is the sft of an adjacency matrix transitive")
    check.add_argument("matrix", help="e.g. [[1,1],[1,1]] or 11/11")
    check.set_defaults(handler=cmd_check_transitive)

    dist = sub.add_parser("distance", help="weak* distance between two measures")
    dist.add_argument("mu")
    dist.add_argument("nu")
    dist.add_argument("--alphabet-size", type=int, default=2)
    _add_family_flags(dist)
    dist.set_defaults(handler=cmd_distance)

    design = sub.add_parser("design-point", help="emit a transitive point with typical blocks")
    design.add_argument("spec", help="e.g. delta:0@10000;orbit:01@10000;bernoulli:0.5,0.5@10000")
    design.add_argument("--alphabet-size", type=int, default=2)
    design.add_argument("--adjacency")
    design.add_argument("--max-word-length", type=int, help="defaults to the longest listing the alphabet allows, at most 12")
    design.set_defaults(handler=cmd_design_point)

    runs = sub.add_parser("runs", help="list, show or delete registered runs")
    runs.add_argument("action", choices=["list", "get", "delete"])
    runs.add_argument("run_id", type=int, nargs="?")
    runs.add_argument("--classification", choices=[c.value for c in Classification])
    runs.add_argument("--page", type=int, default=1)
    runs.add_argument("--page-size", type=int, default=30)
    runs.set_defaults(handler=cmd_runs)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.handler(args)
    except ErgoscanError as exc:
        print(f"ergoscan: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"ergoscan: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
