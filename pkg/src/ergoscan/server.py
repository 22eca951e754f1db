from __future__ import annotations

import asyncio
import json
from typing import Any

from fastmcp import Context, FastMCP

from .database import RunRegistry
from .errors import ErgoscanError
from .harness import ReportFormatter, run_experiment as run_config, validate_config
from .harness import specs
from .models import Classification
from .systems.transitivity import check_transitive as is_transitive, validate_adjacency

mcp = FastMCP("Ergoscan")


def _get_registry() -> RunRegistry:
    if not hasattr(_get_registry, "_instance"):
        _get_registry._instance = RunRegistry("ergoscan.db")
    return _get_registry._instance


@mcp.tool()
def check_transitive(adjacency: list[list[int]]) -> str:
    """Decide whether the subshift of finite type of a 0/1 adjacency matrix is transitive.

    Args:
        adjacency: square 0/1 matrix, row a lists the symbols allowed after a
    """
    try:
        matrix = validate_adjacency(adjacency)
    except ErgoscanError as e:
        return f"Invalid adjacency matrix: {e}"
    return "transitive" if is_transitive(matrix) else "not transitive"


@mcp.tool()
def distance(
    mu: str,
    nu: str,
    alphabet_size: int = 2,
    space: str | None = None,
    max_word_length: int | None = None,
    max_frequency: int | None = None,
) -> str:
    """Weak* distance between two reference measures.

    Args:
        mu: measure spec, e.g. "delta:0", "orbit:01", "bernoulli:0.5,0.5", "lebesgue"
        nu: measure spec
        alphabet_size: shift alphabet for symbolic measures
        space: family space (shift, circle, torus); inferred when omitted
        max_word_length: cylinder words up to this length (shift families)
        max_frequency: Fourier modes up to this frequency (circle and torus families)
    """
    try:
        a, b, value = specs.measure_distance(
            mu,
            nu,
            alphabet_size=alphabet_size,
            space=space,
            max_word_length=max_word_length,
            max_frequency=max_frequency,
        )
    except ErgoscanError as e:
        return f"❌ {e}"
    return f"dist({a.label}, {b.label}) = {ReportFormatter.format_distance(value)}"


@mcp.tool()
def design_point(
    spec: str,
    alphabet_size: int = 2,
    adjacency: list[list[int]] | None = None,
    max_word_length: int | None = None,
    seed: int = 0,
) -> str:
    """Build a point with a dense orbit that also passes through long typical blocks.

    Args:
        spec: blocks as "measure@length[@seed]" joined by ";", e.g. "delta:0@10000;orbit:01@10000"
        alphabet_size: full shift alphabet (ignored when adjacency is given)
        adjacency: optional sft adjacency matrix
        max_word_length: longest word listed in the dense part (default scales with the alphabet)
        seed: master seed for unseeded iid blocks
    """
    try:
        designed = specs.design_point(
            spec,
            alphabet_size=alphabet_size,
            adjacency=adjacency,
            max_word_length=max_word_length,
            master_seed=seed,
        )
    except ErgoscanError as e:
        return f"❌ {e}"
    metadata = json.dumps(designed.metadata(), indent=2)
    return f"{ReportFormatter.format_design(designed)}\nMetadata:\n{metadata}"


@mcp.tool()
async def run_experiment(
    config: dict[str, Any] | str,
    threads: int = 1,
    ctx: Context = None,
) -> str:
    """Run an experiment config: scan windows, build hulls, classify, and record the run.

    Args:
        config: experiment config as a JSON object or JSON text
        threads: worker threads for window integration
        ctx: FastMCP context for progress messages
    """
    try:
        validated = validate_config(config)
    except ErgoscanError as e:
        if ctx:
            await ctx.error(f"Config rejected: {e}")
        return f"❌ Invalid config: {e}"

    if ctx:
        await ctx.info(
            f"Scanning n={validated.n_values} over m ≤ {validated.m_horizon} (stride {validated.stride})"
        )
    try:
        report = await asyncio.to_thread(run_config, validated, threads=threads)
    except ErgoscanError as e:
        if ctx:
            await ctx.error(f"Run failed: {e}")
        return f"❌ Run failed: {e}"

    run = _get_registry().record(report, validated.output_dir)
    if ctx:
        await ctx.info(f"Recorded run {run.id}: {report.classification.value}")
    return f"Run recorded (ID: {run.id})\n\n{ReportFormatter.format_report_detailed(report)}"


@mcp.tool()
def list_runs(classification: str | None = None, page: int = 1, page_size: int = 30) -> str:
    """List recorded runs, newest first.

    Args:
        classification: only runs with this classification
        page: page number (1-based)
        page_size: runs per page
    """
    wanted = None
    if classification is not None:
        try:
            wanted = Classification(classification)
        except ValueError:
            return (
                f"Invalid classification: {classification}. "
                f"Valid values: {', '.join(c.value for c in Classification)}"
            )
    runs = _get_registry().list(classification=wanted, page=page, page_size=page_size)
    return ReportFormatter.format_runs_list(runs)


@mcp.tool()
def get_run(run_id: int) -> str:
    """Show one recorded run with its per-target results.

    Args:
        run_id: ID of the run
    """
    run = _get_registry().get(run_id)
    if not run:
        return f"Run with ID {run_id} not found."
    return ReportFormatter.format_run(run)


@mcp.tool()
def delete_run(run_id: int) -> str:
    """Delete a recorded run. Output files on disk are left alone.

    Args:
        run_id: ID of the run to delete
    """
    registry = _get_registry()
    if not registry.get(run_id):
        return f"Run {run_id} not found."
    if registry.delete(run_id):
        return f"Run {run_id} has been deleted from the registry."
    return f"Failed to delete run {run_id}."


def main() -> None:
    mcp.run()


if __name__ == "__main__":
    main()
