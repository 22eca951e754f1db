from __future__ import annotations

import json
import logging
import time
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from .. import __version__
from ..asymptotics.classify import classify, forward_statistics, witness_table
from ..asymptotics.covering import build_covering
from ..asymptotics.hull import HullBuilder
from ..asymptotics.scanner import ScanResult, best_distance, find_hits, refine, scan_windows
from ..asymptotics.windows import WindowIntegrator, window_starts
from ..models.schemas import BlockPlacement, Classification, CoveringNet, DistanceValue, HitSet, Hull
from ..weakstar.metric import detect_convergence
from .config import SCHEMA_VERSION, ExperimentConfig, materialize

logger = logging.getLogger(__name__)

SCAN_FILE = "scan.csv"
HULL_FILE = "hull.json"
REPORT_FILE = "report.json"


class TargetSummary(BaseModel):
    target: str
    best: Optional[DistanceValue] = None
    forward: List[DistanceValue] = Field(default_factory=list)
    forward_converges: bool = False


class ExperimentReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    tool_version: str = __version__
    config: ExperimentConfig
    config_hash: str
    system_id: str
    point_id: str
    family: dict
    designed_blocks: List[BlockPlacement] = Field(default_factory=list)
    hitsets: List[HitSet]
    hulls: List[Hull]
    covering: CoveringNet
    classified_n: int
    classification: Classification
    targets: List[TargetSummary]
    witnesses: List[dict]
    timings: Dict[str, float] = Field(default_factory=dict)

    @property
    def hull(self) -> Hull:
        """The hull the classification was made from."""
        return next(h for h in self.hulls if h.n == self.classified_n)

    def hitset(self, target: str, epsilon: float) -> HitSet:
        for hits in self.hitsets:
            if hits.target == target and hits.epsilon == epsilon:
                return hits
        raise KeyError((target, epsilon))

    def to_json(self, include_timings: bool = False) -> dict:
        data = self.model_dump(mode="json")
        if not include_timings:
            data.pop("timings")
        return data


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def run_experiment(
    config: ExperimentConfig,
    *,
    threads: int = 1,
    output_dir: Optional[Path | str] = None,
) -> ExperimentReport:
    """Scan, build hulls, classify, and write scan.csv, hull.json and report.json."""
    timings: Dict[str, float] = {}
    started = time.perf_counter()
    out = Path(output_dir or config.output_dir)
    created_dir = not out.exists()
    written: List[Path] = []
    try:
        experiment = materialize(config)
        timings["setup"] = time.perf_counter() - started
        logger.info(
            "running %s on %s: n=%s, M=%d, stride=%d",
            experiment.point_id,
            experiment.system.system_id,
            config.n_values,
            config.m_horizon,
            config.stride,
        )

        integrator = WindowIntegrator(experiment.system, experiment.state, experiment.family)
        ms = window_starts(config.m_horizon, config.stride)
        scans: Optional[ScanResult] = None
        hulls: List[Hull] = []
        phase = time.perf_counter()
        for n in config.n_values:
            builder = HullBuilder(experiment.family, config.hull_radius, n, experiment.targets)
            result = scan_windows(
                integrator, experiment.targets, n, ms, threads=threads, observer=builder.observe
            )
            hulls.append(builder.finish(integrator))
            scans = result if scans is None else scans.merge(result)
            logger.info("n=%d: %d windows, %d hull centers", n, len(result), builder.center_count)
        assert scans is not None
        timings["scan"] = time.perf_counter() - phase

        if config.stride > 1 and config.refine:
            phase = time.perf_counter()
            scans = refine(
                integrator,
                experiment.targets,
                scans,
                max(config.epsilons),
                config.stride,
                config.m_horizon,
                threads=threads,
            )
            timings["refine"] = time.perf_counter() - phase

        hitsets = [
            find_hits(scans, t.label, eps) for t in experiment.targets for eps in config.epsilons
        ]
        covering = build_covering(experiment.targets, config.covering_k, experiment.family)
        classified = hulls[-1]
        assert config.classify_epsilon is not None
        classification = classify(classified, experiment.targets, covering, config.classify_epsilon)

        phase = time.perf_counter()
        forward = forward_statistics(
            experiment.system, experiment.state, experiment.targets, experiment.family, config.n_values
        )
        timings["forward"] = time.perf_counter() - phase
        tol = min(config.epsilons)
        summaries = [
            TargetSummary(
                target=t.label,
                best=best_distance(scans, t.label),
                forward=forward[t.label],
                forward_converges=detect_convergence(
                    forward[t.label], min(2, len(forward[t.label])), tol
                ),
            )
            for t in experiment.targets
        ]
        descriptor = experiment.family.descriptor()
        descriptor.pop("codes")
        report = ExperimentReport(
            config=config,
            config_hash=config.config_hash(),
            system_id=experiment.system.system_id,
            point_id=experiment.point_id,
            family=descriptor,
            designed_blocks=experiment.designed.blocks if experiment.designed else [],
            hitsets=hitsets,
            hulls=hulls,
            covering=covering,
            classified_n=classified.n,
            classification=classification,
            targets=summaries,
            witnesses=witness_table(hitsets),
        )

        out.mkdir(parents=True, exist_ok=True)
        scan_path = out / SCAN_FILE
        written.append(scan_path)
        scans.write_csv(scan_path)
        hull_path = out / HULL_FILE
        written.append(hull_path)
        _write_json(
            hull_path,
            {
                "schema_version": SCHEMA_VERSION,
                "hulls": [h.model_dump(mode="json") for h in hulls],
                "covering": covering.model_dump(mode="json"),
            },
        )
        timings["total"] = time.perf_counter() - started
        report.timings = timings
        report_path = out / REPORT_FILE
        written.append(report_path)
        _write_json(report_path, report.to_json(include_timings=config.record_timings))
        logger.info("classification at n=%d: %s", classified.n, classification.value)
        return report
    except Exception:
        _remove_partial(out, written, created_dir)
        raise


def _remove_partial(out: Path, written: List[Path], created_dir: bool) -> None:
    for path in written:
        path.unlink(missing_ok=True)
    if created_dir and out.exists() and not any(out.iterdir()):
        out.rmdir()
    logger.warning("run failed; removed partial outputs in %s", out)
