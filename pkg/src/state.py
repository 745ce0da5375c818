"""
State management for greedy band selection
"""
import hashlib
import json
from typing import List, Dict, Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .hypercube_io import RealImage


class SelectionConfig(BaseModel):
    """Parameters of the selection loop"""
    model_config = ConfigDict(frozen=True)

    threshold: float = 0.0
    max_bands: Optional[int] = Field(default=None, ge=1)  # None: no limit
    n_bins: int = Field(default=256, ge=2)
    labeled_only: bool = True
    candidate_bands: Optional[List[int]] = None
    n_jobs: int = 1

    @field_validator("candidate_bands")
    @classmethod
    def _check_candidates(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is None:
            return value
        if any(b < 0 for b in value):
            raise ValueError("candidate band indices must be non-negative")
        if len(set(value)) != len(value):
            raise ValueError("candidate band indices must be unique")
        return value

    def echo(self) -> Dict[str, Any]:
        """Config as written into result files; runtime-only knobs excluded"""
        return self.model_dump(exclude={"n_jobs"})


class BandScore(BaseModel):
    """Mutual information of one band with the reference"""
    model_config = ConfigDict(frozen=True)

    band: int = Field(ge=0)
    mi_with_gt: float = Field(ge=0.0)


class TrajectoryEntry(BaseModel):
    """One examined band: MI of the estimate it would produce, and the verdict"""
    model_config = ConfigDict(frozen=True)

    band: int
    mi: float
    accepted: bool


class SelectionResult(BaseModel):
    """Output of the selection loop"""
    model_config = ConfigDict(frozen=True)

    selected: List[int]
    mi_trajectory: List[TrajectoryEntry]
    final_mi: float
    config: Dict[str, Any]
    n_candidates: int = 0

    @model_validator(mode="after")
    def _check_consistency(self) -> "SelectionResult":
        if len(set(self.selected)) != len(self.selected):
            raise ValueError("selected bands must be unique")
        accepted = [e.band for e in self.mi_trajectory if e.accepted]
        if accepted != self.selected:
            raise ValueError("selected bands must match the accepted trajectory entries")
        return self

    @property
    def run_id(self) -> str:
        """Deterministic identifier of this result (config echo + selection)"""
        payload = json.dumps(
            {"config": self.config, "selected": self.selected},
            sort_keys=True
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:12]

    @property
    def rejected(self) -> List[int]:
        return [e.band for e in self.mi_trajectory if not e.accepted]

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "run_id": self.run_id,
            "config": self.config,
            "selected": list(self.selected),
            "trajectory": [
                {"band": e.band, "mi": e.mi, "accepted": e.accepted}
                for e in self.mi_trajectory
            ],
            "final_mi": self.final_mi,
            "n_candidates": self.n_candidates
        }

    @classmethod
    def from_json_dict(cls, payload: Dict[str, Any]) -> "SelectionResult":
        return cls(
            selected=payload["selected"],
            mi_trajectory=[TrajectoryEntry(**e) for e in payload["trajectory"]],
            final_mi=payload["final_mi"],
            config=payload.get("config", {}),
            n_candidates=payload.get("n_candidates", 0)
        )


class SelectionState(BaseModel):
    """Mutable state of the selection loop"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: SelectionConfig
    ranking: List[BandScore] = Field(default_factory=list)
    next_rank: int = 0

    # Current estimate and its score
    estimate: Optional[RealImage] = None
    mi_star: Optional[float] = None

    selected: List[int] = Field(default_factory=list)
    trajectory: List[TrajectoryEntry] = Field(default_factory=list)

    # Current iteration data
    current_band: Optional[int] = None
    current_estimate: Optional[RealImage] = None
    current_mi: Optional[float] = None

    def seed(self, band: int, estimate: RealImage, mi: float) -> None:
        """Initialise the estimate with the top-ranked band"""
        self.estimate = estimate
        self.mi_star = mi
        self.selected.append(band)
        self.trajectory.append(TrajectoryEntry(band=band, mi=mi, accepted=True))

    def add_decision(self, accepted: bool) -> None:
        """Record the verdict on the current candidate and update the estimate"""
        self.trajectory.append(
            TrajectoryEntry(band=self.current_band, mi=self.current_mi, accepted=accepted)
        )
        if accepted:
            self.mi_star = self.current_mi
            self.estimate = self.current_estimate
            self.selected.append(self.current_band)

        self.current_band = None
        self.current_estimate = None
        self.current_mi = None

    def should_continue(self) -> bool:
        """Check if the loop should examine another candidate"""
        limit_reached = (
            self.config.max_bands is not None
            and len(self.selected) >= self.config.max_bands
        )
        return not limit_reached and self.next_rank < len(self.ranking)

    def to_result(self) -> SelectionResult:
        return SelectionResult(
            selected=list(self.selected),
            mi_trajectory=list(self.trajectory),
            final_mi=self.mi_star,
            config=self.config.echo(),
            n_candidates=len(self.ranking)
        )
