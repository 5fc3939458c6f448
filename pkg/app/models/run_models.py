from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Tuple

import numpy as np

from app.models.spectral_models import Grid, ModelParams, SpectralField
from config.config import BOUNDARY_MASS_THRESHOLD


@dataclass(frozen=True)
class DealiasMode:
    kind: Literal["two_thirds", "pad"] = "two_thirds"
    factor: float = 1.0

    def __post_init__(self):
        if self.kind not in ("two_thirds", "pad"):
            raise ValueError(f"Unknown dealias mode {self.kind!r}")
        if self.kind == "pad" and self.factor < 1.0:
            raise ValueError(f"Padding factor must be >= 1, got {self.factor}")

    @classmethod
    def two_thirds(cls) -> "DealiasMode":
        return cls("two_thirds")

    @classmethod
    def pad(cls, factor: float) -> "DealiasMode":
        return cls("pad", float(factor))

    @classmethod
    def exact_for(cls, params: ModelParams) -> "DealiasMode":
        return cls.pad((params.M + 2) / 2)


@dataclass(frozen=True)
class EvolveConfig:
    dt: float
    t_end: float
    dealias: DealiasMode = field(default_factory=DealiasMode.two_thirds)
    output_every: int = 1
    boundary_mass_threshold: float = BOUNDARY_MASS_THRESHOLD
    boundary_action: Literal["error", "record"] = "error"

    def __post_init__(self):
        if not (self.dt > 0 and self.t_end > 0):
            raise ValueError(f"dt and t_end must be positive, got dt={self.dt}, t_end={self.t_end}")
        if self.dt > self.t_end:
            raise ValueError(f"dt={self.dt} exceeds t_end={self.t_end}")
        if self.output_every < 1:
            raise ValueError(f"output_every must be >= 1, got {self.output_every}")
        if not self.boundary_mass_threshold > 0:
            raise ValueError("boundary_mass_threshold must be positive")
        if self.boundary_action not in ("error", "record"):
            raise ValueError(f"Unknown boundary action {self.boundary_action!r}")


@dataclass
class Trajectory:
    times: np.ndarray
    snapshots: List[SpectralField]
    params: ModelParams
    info: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) == 0 or len(self.times) != len(self.snapshots):
            raise ValueError("Trajectory needs one snapshot per time and at least one snapshot")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("Trajectory times must be strictly increasing")
        grid = self.snapshots[0].grid
        if not all(snap.grid.matches(grid) for snap in self.snapshots):
            raise ValueError("All snapshots must share one grid")

    @property
    def grid(self) -> Grid:
        return self.snapshots[0].grid

    @property
    def final(self) -> SpectralField:
        return self.snapshots[-1]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return len(self.snapshots)


@dataclass
class DiagnosticSeries:
    times: np.ndarray
    columns: List[str]
    records: List[Dict[str, float]]
    meta: Dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([record[name] for record in self.records])

    def final(self) -> Dict[str, float]:
        return dict(self.records[-1]) if self.records else {}


@dataclass
class OrderReport:
    claimed_order: float
    measured_order: float
    samples: List[Tuple[float, float]]
    passed: bool
    tolerance: float
    note: str = ""
    exact: bool = False

    def __post_init__(self):
        if not self.samples:
            raise ValueError("OrderReport needs at least one sample")
        if not np.isfinite(self.measured_order):
            raise ValueError("measured_order must be finite")

    def as_dict(self) -> Dict[str, Any]:
        return {
            "claimed_order": self.claimed_order,
            "measured_order": self.measured_order,
            "samples": [list(pair) for pair in self.samples],
            "pass": self.passed,
            "tolerance": self.tolerance,
            "exact": self.exact,
            "note": self.note,
        }


@dataclass(frozen=True)
class FunctionalSpec:
    """A named diagnostic and its parameters, e.g. ("kato", {"r": 2.6, "R": 5, "kind": "J"})."""

    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def column(self) -> str:
        if not self.params:
            return self.kind
        inner = ",".join(
            f"{key}={value:g}" if isinstance(value, (int, float)) else f"{key}={value}"
            for key, value in self.params.items()
        )
        return f"{self.kind}[{inner}]"
