from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import pandas as pd

from .utils import to_jsonable

SCAN_COLUMNS = [
    "s", "a", "m", "F_id", "mc_base", "mc_extended", "gap", "omega_xy", "converged", "seed",
]


class RowStatus(Enum):
    """Outcome of one scan row"""
    OK = "ok"
    FAILED = "failed"


@dataclass
class MCReport:
    """Curvature quantities for one (X, a, Y, b) evaluation"""
    mc_base: float
    mc_extended: float
    omega_xy: float
    omega_bracket: float
    gap: float
    mc_nabla_crosscheck: float
    a: float
    residuals: Dict[str, float] = field(default_factory=dict)
    flags: Dict[str, bool] = field(default_factory=dict)
    grid: Dict[str, Any] = field(default_factory=dict)
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return to_jsonable({
            "mc_base": self.mc_base,
            "mc_extended": self.mc_extended,
            "omega_xy": self.omega_xy,
            "omega_bracket": self.omega_bracket,
            "gap": self.gap,
            "mc_nabla_crosscheck": self.mc_nabla_crosscheck,
            "a": self.a,
            "residuals": self.residuals,
            "flags": self.flags,
            "grid": self.grid,
            "params": self.params,
        })


@dataclass
class IdentityReport:
    """Named relative residuals of every identity checked for one (Z, a, Y)"""
    residuals: Dict[str, float]
    flags: Dict[str, bool] = field(default_factory=dict)
    grid: Dict[str, Any] = field(default_factory=dict)

    def failures(self, thresholds: Dict[str, float], default: float) -> Dict[str, float]:
        return {
            name: value
            for name, value in self.residuals.items()
            if not value <= thresholds.get(name, default)
        }

    def to_dict(self) -> Dict[str, Any]:
        return to_jsonable({"residuals": self.residuals, "flags": self.flags, "grid": self.grid})


@dataclass
class SearchResult:
    """Best perturbation found by the restarted simplex search"""
    best_coefficients: Optional[List[float]]
    best_mc_extended: Optional[float]
    best_mc_base: Optional[float]
    evaluations: int
    seed: int
    converged: bool
    restarts: List[Dict[str, Any]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return to_jsonable({
            "best_coefficients": self.best_coefficients,
            "best_mc_extended": self.best_mc_extended,
            "best_mc_base": self.best_mc_base,
            "evaluations": self.evaluations,
            "seed": self.seed,
            "converged": self.converged,
            "restarts": self.restarts,
            "metadata": self.metadata,
        })


@dataclass
class ScanRow:
    """One evaluated (s, a, template, m) tuple"""
    s: float
    a: float
    m: int
    F_id: str
    mc_base: float
    mc_extended: float
    gap: float
    omega_xy: float
    converged: bool
    seed: int

    def to_dict(self) -> Dict[str, Any]:
        return to_jsonable({name: getattr(self, name) for name in SCAN_COLUMNS})


@dataclass
class ScanResult:
    """Container for scan results"""
    rows: List[ScanRow]
    status: List[RowStatus]
    failed_rows: List[Dict[str, Any]]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_dict() for row in self.rows], columns=SCAN_COLUMNS)
