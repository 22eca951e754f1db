"""Compact command-line spellings of measures, matrices, points and designs.

    delta:0            dirac mass at the fixed point 0^infinity
    orbit:01           uniform measure on the orbit of (01)^infinity
    bernoulli:0.5,0.5  product measure
    lebesgue[:2]       Lebesgue measure on the circle (or the 2-torus)

    [[1,1],[1,0]]  or  11/10                              adjacency matrices

    iid:0.5,0.5[@seed]   periodic:[preamble/]cycle   word:symbols[/tail]
    fixed:1/3[,2/5]      designed:<target>@<length>;...   (design strings)

Measure and point strings translate to the same dicts a config file holds, so the
command line goes through `validate_config` like every other entry point.
"""

from __future__ import annotations

import json
from typing import List, Optional, Tuple

from ..errors import ValidationFailed
from ..measures.reference import ReferenceMeasure
from ..models.schemas import DistanceValue, SpaceTag, parse_word
from ..systems.design import DesignedPoint, design_transitive_point
from ..weakstar.family import build_family
from ..weakstar.metric import distance
from .config import BlockSpec, derive_seed, typical_block


def _split(spec: str, field_path: str) -> Tuple[str, str]:
    head, _, rest = spec.strip().partition(":")
    if not head:
        raise ValidationFailed(f"empty spec {spec!r}", field_path)
    return head.lower(), rest


def _floats(text: str, field_path: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationFailed(f"expected comma separated numbers, got {text!r}", field_path) from exc


def _word(text: str, field_path: str) -> Tuple[int, ...]:
    try:
        return tuple(parse_word(text.strip()))  # type: ignore[arg-type]
    except (TypeError, ValueError) as exc:
        raise ValidationFailed(f"expected a word of digits, got {text!r}", field_path) from exc


def target_spec(spec: str, label: Optional[str] = None, field_path: str = "target") -> dict:
    """Config `targets` entry for a measure string."""
    head, rest = _split(spec, field_path)
    if head == "delta":
        cycle = _word(rest or "0", field_path)
        if len(cycle) != 1:
            raise ValidationFailed("delta takes a single symbol", field_path)
        return {"label": label or f"delta({cycle[0]})", "kind": "periodic-atomic", "cycle": list(cycle)}
    if head == "orbit":
        cycle = _word(rest, field_path)
        name = label or "orbit(" + "".join(map(str, cycle)) + ")"
        return {"label": name, "kind": "periodic-atomic", "cycle": list(cycle)}
    if head == "bernoulli":
        p = _floats(rest, field_path)
        name = label or "bernoulli(" + ",".join(f"{q:g}" for q in p) + ")"
        return {"label": name, "kind": "bernoulli", "p": p}
    if head == "lebesgue":
        if rest not in ("", "1", "2"):
            raise ValidationFailed("lebesgue takes dimension 1 or 2", field_path)
        return {"label": label or ("lebesgue2" if rest == "2" else "lebesgue"), "kind": "lebesgue"}
    raise ValidationFailed(f"unknown measure {head!r}", field_path)


def measure(spec: str, alphabet_size: int = 2) -> ReferenceMeasure:
    """Reference measure for a measure string, without a system to check it against."""
    head, rest = _split(spec, "measure")
    if head == "lebesgue":
        return ReferenceMeasure.lebesgue(2 if rest == "2" else 1)
    return reference(target_spec(spec, field_path="measure"), alphabet_size)


def reference(entry: dict, alphabet_size: int = 2) -> ReferenceMeasure:
    """Reference measure of a shift `targets` entry."""
    if entry["kind"] == "lebesgue":
        raise ValidationFailed("lebesgue measure has no typical shift block", "measure")
    if entry["kind"] == "bernoulli":
        return ReferenceMeasure.bernoulli(tuple(entry["p"]), label=entry["label"])
    cycle = tuple(entry["cycle"])
    if max(cycle) >= alphabet_size:
        raise ValidationFailed(f"{entry['label']} uses symbols outside the alphabet", "measure")
    return ReferenceMeasure.periodic_word(cycle, alphabet_size, label=entry["label"])


def measure_space(measures: List[ReferenceMeasure]) -> SpaceTag:
    """Family space that integrates every measure; binary shift and circle meet as the doubling map."""
    spaces = {mu.space for mu in measures}
    if len(spaces) == 1:
        return spaces.pop()
    if spaces == {SpaceTag.SHIFT, SpaceTag.CIRCLE}:
        return SpaceTag.SHIFT
    raise ValidationFailed("measures live on different spaces", "measure")


def matrix(spec: str, field_path: str = "matrix") -> List[List[int]]:
    text = spec.strip()
    try:
        if text.startswith("["):
            rows = json.loads(text)
        else:
            rows = [[int(c) for c in row.strip()] for row in text.split("/")]
    except ValueError as exc:
        raise ValidationFailed(f"cannot read matrix {spec!r}", field_path) from exc
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ValidationFailed(f"matrix {spec!r} must be a list of rows", field_path)
    for i, row in enumerate(rows):
        for j, value in enumerate(row):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValidationFailed(f"matrix entry {value!r} is not an integer", f"{field_path}.{i}.{j}")
    return rows


def point_spec(spec: str, targets: Optional[List[dict]] = None) -> dict:
    """Config `point` entry for a point string.

    `designed:` strings name their blocks by measure string; the matching target
    entries are appended to `targets` when missing."""
    head, rest = _split(spec, "point")
    if head == "iid":
        p_text, _, seed = rest.partition("@")
        out: dict = {"kind": "seeded-iid", "p": _floats(p_text, "point.p")}
        if seed:
            try:
                out["seed"] = int(seed)
            except ValueError as exc:
                raise ValidationFailed(f"seed {seed!r} is not an integer", "point.seed") from exc
        return out
    if head == "periodic":
        preamble, _, cycle = rest.rpartition("/")
        return {"kind": "periodic", "preamble": list(_word(preamble, "point.preamble")) if preamble else [],
                "cycle": list(_word(cycle, "point.cycle"))}
    if head == "word":
        symbols, _, tail = rest.partition("/")
        out = {"kind": "word", "symbols": list(_word(symbols, "point.symbols"))}
        if tail:
            out["tail"] = list(_word(tail, "point.tail"))
        return out
    if head == "fixed":
        return {"kind": "fixed-point", "values": [v.strip() for v in rest.split(",")]}
    if head == "designed":
        return {"kind": "designed", "blocks": design_blocks(rest, targets)}
    raise ValidationFailed(f"unknown point kind {head!r}", "point")


def design_blocks(text: str, targets: Optional[List[dict]] = None) -> List[dict]:
    """Blocks of a design string `measure@length[@seed];...`, registering their targets."""
    blocks = []
    for index, part in enumerate(p for p in text.split(";") if p.strip()):
        path = f"point.blocks.{index}"
        fields = part.strip().split("@")
        if len(fields) not in (2, 3):
            raise ValidationFailed(f"block {part!r} must read measure@length[@seed]", path)
        target = target_spec(fields[0], field_path=f"{path}.target")
        try:
            block: dict = {"target": target["label"], "length": int(fields[1])}
            if len(fields) == 3:
                block["seed"] = int(fields[2])
        except ValueError as exc:
            raise ValidationFailed(f"block {part!r} has a non-integer length or seed", path) from exc
        if targets is not None and all(t["label"] != target["label"] for t in targets):
            targets.append(target)
        blocks.append(block)
    return blocks


def measure_distance(
    mu_spec: str,
    nu_spec: str,
    *,
    alphabet_size: int = 2,
    space: Optional[str] = None,
    max_word_length: Optional[int] = None,
    max_frequency: Optional[int] = None,
) -> Tuple[ReferenceMeasure, ReferenceMeasure, DistanceValue]:
    mu = measure(mu_spec, alphabet_size)
    nu = measure(nu_spec, alphabet_size)
    family = build_family(
        space or measure_space([mu, nu]),
        max_word_length=max_word_length,
        max_frequency=max_frequency,
        alphabet_size=alphabet_size,
    )
    return mu, nu, distance(mu, nu, family)


def design_point(
    spec: str,
    *,
    alphabet_size: int = 2,
    adjacency: Optional[List[List[int]]] = None,
    max_word_length: Optional[int] = None,
    master_seed: int = 0,
) -> DesignedPoint:
    """Designed transitive point of a design string; unseeded iid blocks get stream seeds 1 + j."""
    targets: List[dict] = []
    raw_blocks = design_blocks(spec, targets)
    alphabet = len(adjacency) if adjacency else alphabet_size
    by_label = {t["label"]: t for t in targets}
    blocks = []
    for j, raw in enumerate(raw_blocks):
        block = BlockSpec(
            target=raw["target"],
            length=raw["length"],
            seed=raw.get("seed", derive_seed(master_seed, 1 + j)),
        )
        blocks.append(typical_block(block, reference(by_label[block.target], alphabet), j))
    return design_transitive_point(
        alphabet, blocks, max_word_length=max_word_length, adjacency=adjacency
    )
