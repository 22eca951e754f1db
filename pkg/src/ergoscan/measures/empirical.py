from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np

from ..errors import ValidationFailed
from ..models.schemas import Provenance
from ..systems.dynamics import DynamicalSystem, State
from ..systems.fixedpoint import TorusPoint
from ..systems.sequences import SymbolicState

EXPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EmpiricalMeasure:
    """sigma_{m,n}(x): the uniform probability on f^m(x), ..., f^(m+n-1)(x), duplicates kept."""

    atoms: Tuple[State, ...]
    provenance: Provenance

    @property
    def n(self) -> int:
        return len(self.atoms)

    @property
    def weight(self) -> float:
        return 1.0 / len(self.atoms)

    def encode_atoms(self, precision: int = 16) -> list:
        """Symbol words of `precision` symbols for shift atoms, fixed-point integers otherwise."""
        out: list = []
        for atom in self.atoms:
            if isinstance(atom, SymbolicState):
                out.append(list(atom.word(precision)))
            else:
                out.append(list(atom.coords))
        return out

    def to_json(self, precision: int = 16) -> dict:
        symbolic = isinstance(self.atoms[0], SymbolicState)
        return {
            "schema_version": EXPORT_SCHEMA_VERSION,
            "provenance": self.provenance.model_dump(),
            "n": self.n,
            "encoding": "symbols" if symbolic else "fixed-point-64",
            "precision": precision if symbolic else 64,
            "atoms": self.encode_atoms(precision),
        }

    def write_json(self, path: Path | str, precision: int = 16) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_json(precision), indent=2) + "\n")
        return path

    def histogram(self, bins: int = 16, word_length: int = 2) -> List[Tuple[int, float]]:
        """Binned view: equal-width bins on the circle, a row-major bins x bins grid on the
        torus, and cylinders of `word_length` (base-alphabet code) on shift spaces."""
        first = self.atoms[0]
        if isinstance(first, SymbolicState):
            base = first.sequence.alphabet_size
            size = base**word_length
            codes = np.array(
                [_word_code(a.word(word_length), base) for a in self.atoms], dtype=np.int64  # type: ignore[union-attr]
            )
        else:
            if bins < 1:
                raise ValidationFailed("bins must be positive", "bins")
            assert isinstance(first, TorusPoint)
            cells = [[(c * bins) >> 64 for c in a.coords] for a in self.atoms]  # type: ignore[union-attr]
            if first.dimension == 1:
                size = bins
                codes = np.array([cell[0] for cell in cells], dtype=np.int64)
            else:
                size = bins * bins
                codes = np.array([cell[0] * bins + cell[1] for cell in cells], dtype=np.int64)
        counts = np.bincount(codes, minlength=size)
        return [(i, int(c) / self.n) for i, c in enumerate(counts)]

    def write_histogram_csv(self, path: Path | str, bins: int = 16, word_length: int = 2) -> Path:
        path = Path(path)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["bin", "mass"])
            for index, mass in self.histogram(bins, word_length):
                writer.writerow([index, repr(mass)])
        return path


def _word_code(word: Tuple[int, ...], base: int) -> int:
    code = 0
    for s in word:
        code = code * base + s
    return code


def empirical(
    system: DynamicalSystem, x: State, m: int, n: int, point_id: str = "x"
) -> EmpiricalMeasure:
    if n < 1:
        raise ValidationFailed("window length n must be at least 1", "n")
    if m < 0:
        raise ValidationFailed("window start m must be non-negative", "m")
    atoms = tuple(system.orbit(x, m, n))
    return EmpiricalMeasure(
        atoms=atoms,
        provenance=Provenance(system_id=system.system_id, point_id=point_id, m=m, n=n),
    )
