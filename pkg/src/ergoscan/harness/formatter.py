from typing import TYPE_CHECKING, List

from ..models.schemas import Classification, DistanceValue, Hull, RunRecord

if TYPE_CHECKING:
    from ..systems.design import DesignedPoint
    from .runner import ExperimentReport

CLASSIFICATION_EMOJI = {
    Classification.CONVERGENT: "🎯",
    Classification.OSCILLATING: "〰️",
    Classification.EXTREMELY_OSCILLATING: "🌀",
}


class ReportFormatter:
    @staticmethod
    def format_distance(value: DistanceValue) -> str:
        return f"{value.value!r} (tail ≤ {value.tail_bound:.3g})"

    @staticmethod
    def format_report_summary(report: "ExperimentReport") -> str:
        icon = CLASSIFICATION_EMOJI.get(report.classification, "📋")
        header = f"{icon} {report.classification.value}\n"
        header += f"System: {report.system_id} | Point: {report.point_id}\n"
        header += f"Windows: n ∈ {report.config.n_values}, m ≤ {report.config.m_horizon}, stride {report.config.stride}\n"
        header += f"Hull at n={report.classified_n}: {len(report.hull.centers)} center(s), extent {report.hull.extent:.4f}\n"
        return header

    @staticmethod
    def format_hull(hull: Hull) -> str:
        result = f"🔷 n={hull.n}: {len(hull.centers)} center(s) over {hull.windows} windows"
        result += f" | diameter {hull.diameter:.4f} | extent {hull.extent:.4f}\n"
        for center in hull.centers:
            nearest = center.nearest_target
            result += f"  m={center.m} ({center.window_count} windows)"
            if nearest is not None:
                result += f" nearest {nearest} at {center.distance_to(nearest).value:.4f}"
            if center.invariance_defect is not None:
                result += f" defect {center.invariance_defect:.2e}"
            result += "\n"
        return result

    @staticmethod
    def format_report_detailed(report: "ExperimentReport") -> str:
        result = ReportFormatter.format_report_summary(report)

        result += "\n🎯 Targets:\n"
        for summary in report.targets:
            best = ReportFormatter.format_distance(summary.best) if summary.best else "n/a"
            forward = "converges" if summary.forward_converges else "does not settle"
            result += f"\n• {summary.target}: best {best}; forward averages {forward}"
            for hits in report.hitsets:
                if hits.target != summary.target:
                    continue
                mark = "✅" if not hits.is_empty else "❌"
                result += f"\n   {mark} ε={hits.epsilon:g}: {hits.count} hit(s)"

        if report.designed_blocks:
            result += "\n\n🧱 Typical blocks:\n"
            for block in report.designed_blocks:
                result += f"  {block.target}: [{block.start}, {block.stop})\n"

        result += "\n\n📐 Hulls:\n"
        for hull in report.hulls:
            result += ReportFormatter.format_hull(hull)
        return result

    @staticmethod
    def format_design(designed: "DesignedPoint") -> str:
        result = f"🧬 Designed point over {designed.sequence.alphabet_size} symbols"
        result += f" ({designed.metadata()['program_length']} symbols before the periodic tail)\n"
        for block in designed.blocks:
            result += f"  🧱 {block.target}: [{block.start}, {block.stop})\n"
        for length, start, stop in designed.dense_lengths:
            result += f"  📚 words of length {length}: [{start}, {stop})\n"
        return result

    @staticmethod
    def format_runs_list(runs: List[RunRecord]) -> str:
        if not runs:
            return "No runs found."

        result = f"Found {len(runs)} run(s):\n\n"
        for run in runs:
            icon = CLASSIFICATION_EMOJI.get(run.classification, "📋")
            result += f"ID {run.id}: {icon} {run.classification.value}\n"
            result += f"  System: {run.system_kind.value} | Point: {run.point_kind} | n={run.classified_n}\n"
            hit = ", ".join(run.hit_targets) or "none"
            result += f"  Hit targets: {hit} | Output: {run.output_dir}\n\n"
        return result

    @staticmethod
    def format_run(run: RunRecord) -> str:
        icon = CLASSIFICATION_EMOJI.get(run.classification, "📋")
        result = f"{icon} Run {run.id}: {run.classification.value}\n"
        result += f"Config: {run.config_hash[:12]} | System: {run.system_kind.value} | Point: {run.point_kind}\n"
        if run.total_seconds is not None:
            result += f"Wall clock: {run.total_seconds:.2f}s\n"
        if run.results:
            result += "\n🎯 Results:\n"
            for r in run.results:
                best = f"{r.best_distance:.4f}" if r.best_distance is not None else "n/a"
                result += f"  {r.target} ε={r.epsilon:g}: {r.hit_count} hit(s), best {best}\n"
        return result
