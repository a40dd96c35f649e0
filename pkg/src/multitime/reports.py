"""Small result containers shared by the quantum, classical and HJ sectors."""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["DefectReport", "ResidualReport", "DivergenceReport"]


@dataclass
class DefectReport:
    """Pairwise consistency-defect norms plus their maximum.

    ``pairs`` maps ``"j,k"`` (1-based indices) to the defect norm of that
    pair; ``h`` is the finite-difference step that produced it.
    """

    pairs: dict[str, float]
    max_defect: float
    h: float

    def to_dict(self) -> dict:
        return {
            "pairs": dict(sorted(self.pairs.items())),
            "max_defect": self.max_defect,
            "h": self.h,
        }


@dataclass
class ResidualReport:
    """Per-sample validity residuals along an n-path."""

    rows: list[dict] = field(default_factory=list)
    max_residual: float = 0.0
    rejected: int = 0  # samples whose lift was not spacelike

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "max_residual": self.max_residual,
            "rejected": self.rejected,
        }


@dataclass
class DivergenceReport:
    """Pairwise sup-distances between trajectory families."""

    labels: list[str]
    distances: list[list[float]]
    foliation_independent: bool
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "labels": self.labels,
            "distances": self.distances,
            "foliation_independent": self.foliation_independent,
            "tolerance": self.tolerance,
        }
