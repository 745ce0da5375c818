"""
Greedy band selection by growth of an estimated reference map

Bands are ranked by mutual information with the reference. The top band seeds
the estimate; each next candidate is averaged into it and kept only if the
estimate's MI with the reference rises by more than the threshold.
"""
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed
from langchain_core.runnables import RunnableConfig
from langgraph.graph import END, StateGraph
from pydantic import BaseModel, ConfigDict

from .errors import DegenerateDataError, InputValidationError
from .hypercube_io import (
    GroundTruth,
    HyperCube,
    QuantizedImage,
    RealImage,
    average_images,
    band_image,
    check_same_shape,
    quantize,
)
from .infotheory import mutual_information
from .observability import ObservabilityManager
from .state import BandScore, SelectionConfig, SelectionResult, SelectionState


Reference = Union[GroundTruth, QuantizedImage]


class MICurvePoint(BaseModel):
    """Per-band MI with the ground truth and with an estimated reference"""
    model_config = ConfigDict(frozen=True)

    band: int
    mi_gt: float
    mi_approx: float


def _candidates(cube: HyperCube, cfg: SelectionConfig) -> List[int]:
    bands = cfg.candidate_bands if cfg.candidate_bands is not None else list(range(cube.n_bands))
    if not bands:
        raise InputValidationError("No candidate bands to rank", field="candidate_bands")
    out_of_range = [b for b in bands if b >= cube.n_bands]
    if out_of_range:
        raise InputValidationError(
            f"Candidate bands {out_of_range} out of range for a cube with {cube.n_bands} bands",
            field="candidate_bands"
        )
    return list(bands)


def _check_reference(reference: Reference) -> None:
    if isinstance(reference, GroundTruth):
        present = reference.classes_present()
        if len(present) < 2:
            raise DegenerateDataError(
                f"Ground truth needs at least 2 labeled classes, found {len(present)}"
            )
    elif np.unique(reference.bins).size < 2:
        raise DegenerateDataError("Estimated reference is constant; it carries no class signal")


def estimate_mi(
    reference: Reference,
    estimate: RealImage,
    n_bins: int,
    labeled_only: bool = True
) -> float:
    """MI between the reference and a real-valued image quantized with n_bins"""
    return mutual_information(reference, quantize(estimate, n_bins), labeled_only=labeled_only)


def _band_mi(cube: HyperCube, band: int, reference: Reference, cfg: SelectionConfig) -> float:
    return estimate_mi(reference, band_image(cube, band), cfg.n_bins, cfg.labeled_only)


def rank_bands(
    cube: HyperCube,
    reference: Reference,
    cfg: SelectionConfig,
    observability: Optional[ObservabilityManager] = None
) -> List[BandScore]:
    """
    Score every candidate band by MI with the reference, highest first

    Ties are broken by lower band index. Per-band work may run in parallel
    (cfg.n_jobs); the merge order is fixed, so the ranking is deterministic.

    Raises:
        InputValidationError: On size mismatch or an empty/out-of-range candidate set
    """
    check_same_shape(cube, reference, "cube and reference")
    bands = _candidates(cube, cfg)

    scores = Parallel(n_jobs=cfg.n_jobs, prefer="threads")(
        delayed(_band_mi)(cube, band, reference, cfg) for band in bands
    )
    ranking = sorted(
        (BandScore(band=band, mi_with_gt=mi) for band, mi in zip(bands, scores)),
        key=lambda s: (-s.mi_with_gt, s.band)
    )

    if observability:
        observability.log_event(
            "ranking_complete",
            f"Ranked {len(ranking)} bands",
            {
                "top_band": ranking[0].band,
                "top_mi": ranking[0].mi_with_gt,
                "n_bins": cfg.n_bins
            }
        )
    return ranking


def build_estimated_reference(
    prev: RealImage,
    band: RealImage,
    observability: Optional[ObservabilityManager] = None
) -> RealImage:
    """Average the running estimate with a candidate band"""
    estimate = average_images(prev, band)
    if observability:
        observability.log_event(
            "estimate_built",
            "Averaged candidate into the estimated reference",
            {"min": float(estimate.values.min()), "max": float(estimate.values.max())},
            level="debug"
        )
    return estimate


class BandSelector:
    """LangGraph state machine running the accept/reject loop over a precomputed ranking"""

    def __init__(
        self,
        cube: HyperCube,
        reference: Reference,
        config: SelectionConfig,
        observability: Optional[ObservabilityManager] = None
    ):
        """
        Initialize the selector

        Args:
            cube: Cube supplying the candidate bands
            reference: Ground truth, or a quantized estimate of it
            config: Threshold, band limit and quantization settings
            observability: Optional logging sink
        """
        self.cube = cube
        self.reference = reference
        self.config = config
        self.observability = observability

        self.graph = self._build_graph()

    def _build_graph(self):
        """seed, then propose -> score -> decide until the conditional edge ends the run"""
        workflow = StateGraph(SelectionState)

        workflow.add_node("seed", self._seed_node)
        workflow.add_node("propose", self._propose_node)
        workflow.add_node("score", self._score_node)
        workflow.add_node("decide", self._decide_node)

        workflow.set_entry_point("seed")
        workflow.add_edge("propose", "score")
        workflow.add_edge("score", "decide")

        for node in ("seed", "decide"):
            workflow.add_conditional_edges(
                node,
                self._should_continue,
                {
                    "continue": "propose",
                    "end": END
                }
            )

        return workflow.compile()

    def _score(self, estimate: RealImage) -> float:
        return estimate_mi(self.reference, estimate, self.config.n_bins, self.config.labeled_only)

    def _seed_node(self, state: SelectionState) -> Dict[str, Any]:
        """Initialise the estimate with the top-ranked band"""
        top = state.ranking[0].band
        estimate = band_image(self.cube, top)
        state.next_rank = 1
        state.seed(top, estimate, self._score(estimate))

        if self.observability:
            self.observability.log_decision(
                band=top, mi=state.mi_star, mi_before=None,
                threshold=self.config.threshold, accepted=True
            )

        return {
            "next_rank": state.next_rank,
            "estimate": state.estimate,
            "mi_star": state.mi_star,
            "selected": list(state.selected),
            "trajectory": list(state.trajectory)
        }

    def _propose_node(self, state: SelectionState) -> Dict[str, Any]:
        """Take the next band in rank order and build the candidate estimate"""
        band = state.ranking[state.next_rank].band
        estimate = build_estimated_reference(
            state.estimate, band_image(self.cube, band), self.observability
        )
        return {
            "next_rank": state.next_rank + 1,
            "current_band": band,
            "current_estimate": estimate
        }

    def _score_node(self, state: SelectionState) -> Dict[str, Any]:
        return {"current_mi": self._score(state.current_estimate)}

    def _decide_node(self, state: SelectionState) -> Dict[str, Any]:
        """Accept the candidate only if MI > MI* + threshold"""
        mi_before = state.mi_star
        accepted = state.current_mi > mi_before + self.config.threshold
        band, mi = state.current_band, state.current_mi
        state.add_decision(accepted)

        if self.observability:
            self.observability.log_decision(
                band=band, mi=mi, mi_before=mi_before,
                threshold=self.config.threshold, accepted=accepted
            )

        return {
            "estimate": state.estimate,
            "mi_star": state.mi_star,
            "selected": list(state.selected),
            "trajectory": list(state.trajectory),
            "current_band": None,
            "current_estimate": None,
            "current_mi": None
        }

    def _should_continue(self, state: SelectionState) -> str:
        if state.should_continue():
            return "continue"
        return "end"

    def run(self, ranking: List[BandScore]) -> SelectionResult:
        """Run the graph until the band limit is reached or candidates run out"""
        if not ranking:
            raise InputValidationError("No candidate bands to select from", field="candidate_bands")

        initial_state = SelectionState(config=self.config, ranking=ranking)

        # One seed step, then three steps per examined candidate
        config = RunnableConfig(recursion_limit=3 * len(ranking) + 5)
        final_state = SelectionState.model_validate(dict(self.graph.invoke(initial_state, config=config)))

        result = final_state.to_result()
        if self.observability:
            self.observability.log_event(
                "selection_complete",
                f"selected {len(result.selected)} of {self.cube.n_bands} bands, "
                f"final MI = {result.final_mi}",
                {"selected": result.selected, "final_mi": result.final_mi}
            )
        return result


def select_bands(
    cube: HyperCube,
    reference: Reference,
    cfg: SelectionConfig,
    observability: Optional[ObservabilityManager] = None
) -> SelectionResult:
    """
    Select informative, non-redundant bands

    Args:
        cube: Hyperspectral cube
        reference: Ground truth map (or a quantized estimate of it)
        cfg: Selection parameters
        observability: Optional logging sink

    Returns:
        SelectionResult with accepted bands in acceptance order and the full trajectory

    Raises:
        InputValidationError: On size mismatch or empty candidate set
        DegenerateDataError: If the reference has fewer than 2 classes
    """
    check_same_shape(cube, reference, "cube and reference")
    _check_reference(reference)
    ranking = rank_bands(cube, reference, cfg, observability)
    return BandSelector(cube, reference, cfg, observability).run(ranking)


def replay_estimate(cube: HyperCube, selected: Sequence[int]) -> RealImage:
    """Rebuild the estimated reference of an ordered selection"""
    if not selected:
        raise InputValidationError("Selection is empty", field="selection")
    estimate = band_image(cube, selected[0])
    for band in selected[1:]:
        estimate = build_estimated_reference(estimate, band_image(cube, band))
    return estimate


def mi_curve(
    cube: HyperCube,
    gt: GroundTruth,
    approx_reference: QuantizedImage,
    cfg: SelectionConfig
) -> List[MICurvePoint]:
    """Per-band MI with the ground truth and with the estimated reference, in band order"""
    check_same_shape(cube, gt, "cube and ground truth")
    check_same_shape(cube, approx_reference, "cube and estimated reference")
    bands = _candidates(cube, cfg)

    def point(band: int) -> MICurvePoint:
        return MICurvePoint(
            band=band,
            mi_gt=_band_mi(cube, band, gt, cfg),
            mi_approx=_band_mi(cube, band, approx_reference, cfg)
        )

    return Parallel(n_jobs=cfg.n_jobs, prefer="threads")(delayed(point)(band) for band in sorted(bands))
