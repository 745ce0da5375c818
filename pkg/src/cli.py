"""
Command-line front end: synth, rank, select, eval and fano commands

Exit codes: 0 success, 2 input or configuration error, 3 degenerate data.
"""
import argparse
import sys
from typing import Callable, Dict, List, Optional

from pydantic import ValidationError

from .errors import DegenerateDataError, InputValidationError
from .evaluator import evaluate_subset, prefix_accuracy
from .hypercube_io import (
    GroundTruth,
    HyperCube,
    QuantizedImage,
    approx_gt_band_average,
    band_image,
    load_cube,
    load_gt,
    quantize,
    write_cube,
    write_gt,
)
from .infotheory import fano_bounds
from .observability import ObservabilityManager
from .reports import (
    accepted_mi_by_count,
    fano_dict,
    load_selection,
    mi_curve_frame,
    ranking_frame,
    sweep_summary_frame,
    sweep_table_frame,
    threshold_label,
    write_csv,
    write_eval_report,
    write_json,
    write_selection,
)
from .run_config import RunConfig
from .selector import Reference, mi_curve, rank_bands, replay_estimate, select_bands
from .synthlab import SceneSpec, indicator_scenario, pipeline_scenario, table1_preset, table1_scenario


EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3


def _require_cube(cfg: RunConfig) -> HyperCube:
    if cfg.cube is None:
        raise InputValidationError("--cube is required", field="cube")
    return load_cube(cfg.cube)


def _require_gt(cfg: RunConfig) -> GroundTruth:
    if cfg.gt is None:
        raise InputValidationError("--gt is required", field="gt")
    return load_gt(cfg.gt)


def _approx_reference(cfg: RunConfig, cube: HyperCube) -> QuantizedImage:
    return quantize(approx_gt_band_average(cube, cfg.approx_gt), cfg.bins)


def _reference(cfg: RunConfig, cube: HyperCube) -> Reference:
    """Ground truth when given, otherwise the band-average estimate"""
    if cfg.gt is not None:
        return load_gt(cfg.gt)
    if cfg.approx_gt is not None:
        return _approx_reference(cfg, cube)
    raise InputValidationError("Either --gt or --approx-gt=LO:HI is required", field="gt")


def cmd_rank(cfg: RunConfig, observability: ObservabilityManager) -> int:
    """Write bands ordered by MI with the reference"""
    cube = _require_cube(cfg)
    reference = _reference(cfg, cube)
    out = cfg.ensure_out_dir()
    sel_cfg = cfg.selection_config()

    ranking = rank_bands(cube, reference, sel_cfg, observability)
    write_csv(out / "ranking.csv", ranking_frame(ranking))
    if cfg.write_json:
        write_json(out / "ranking.json", [s.model_dump() for s in ranking])

    if isinstance(reference, GroundTruth) and cfg.approx_gt is not None:
        curve = mi_curve(cube, reference, _approx_reference(cfg, cube), sel_cfg)
        write_csv(out / "mi_curve.csv", mi_curve_frame(curve))

    print(f"ranked {len(ranking)} bands, top band {ranking[0].band} (MI = {ranking[0].mi_with_gt})")
    return EXIT_OK


def _run_sweep(
    cfg: RunConfig,
    cube: HyperCube,
    reference: Reference,
    observability: ObservabilityManager
) -> int:
    out = cfg.ensure_out_dir()
    results = {}
    for threshold in cfg.thresholds:
        result = select_bands(cube, reference, cfg.selection_config(threshold), observability)
        write_selection(result, out, stem=f"selection_th{threshold_label(threshold)}")
        results[threshold] = result
        print(f"threshold {threshold}: selected {len(result.selected)} of {cube.n_bands} bands, "
              f"final MI = {result.final_mi}")

    write_csv(out / "sweep_summary.csv", sweep_summary_frame(results))
    write_csv(
        out / "sweep_mi_table.csv",
        sweep_table_frame({th: accepted_mi_by_count(r) for th, r in results.items()})
    )

    if cfg.evaluate and isinstance(reference, GroundTruth):
        spec = cfg.split_spec()
        accuracies = {
            th: prefix_accuracy(cube, reference, r.selected, spec)
            for th, r in results.items()
        }
        write_csv(out / "sweep_table.csv", sweep_table_frame(accuracies))
    return EXIT_OK


def cmd_select(cfg: RunConfig, observability: ObservabilityManager) -> int:
    """Run the selection loop once, or once per threshold in sweep mode"""
    cube = _require_cube(cfg)
    reference = _reference(cfg, cube)

    if cfg.thresholds:
        return _run_sweep(cfg, cube, reference, observability)

    out = cfg.ensure_out_dir()
    result = select_bands(cube, reference, cfg.selection_config(), observability)
    write_selection(result, out)
    print(f"selected {len(result.selected)} of {cube.n_bands} bands, final MI = {result.final_mi}")
    return EXIT_OK


def cmd_eval(cfg: RunConfig, observability: ObservabilityManager) -> int:
    """Classify test pixels with an explicit band list or a prior selection"""
    cube = _require_cube(cfg)
    gt = _require_gt(cfg)

    run_id = None
    if cfg.bands is not None:
        bands = cfg.bands
    elif cfg.selection is not None:
        selection = load_selection(cfg.selection)
        bands = selection.selected
        run_id = selection.run_id
    else:
        raise InputValidationError("Either --bands or --selection is required", field="bands")

    out = cfg.ensure_out_dir()
    report = evaluate_subset(cube, gt, bands, cfg.split_spec(), run_id=run_id, observability=observability)
    write_eval_report(report, out)
    print(f"accuracy {report.overall_accuracy}% with {len(report.bands_used)} bands "
          f"({report.n_train} train / {report.n_test} test pixels)")
    return EXIT_OK


def cmd_synth(cfg: RunConfig, observability: ObservabilityManager) -> int:
    """Write a synthetic cube and ground truth"""
    facts = None
    if cfg.scene is not None:
        try:
            spec = SceneSpec.model_validate_json(cfg.scene.read_text())
        except OSError as e:
            raise InputValidationError(f"Cannot read scene spec {cfg.scene}: {e}", field="scene")
        cube, gt = indicator_scenario(spec, observability)
    elif cfg.preset == "table1":
        spec = table1_preset(cfg.size).model_copy(
            update={"noise_amplitude": cfg.noise, "noise_seed": cfg.seed}
        )
        scenario = table1_scenario(spec, observability)
        cube, gt, facts = scenario.cube, scenario.gt, scenario.expected
    elif cfg.preset == "pipeline":
        scenario = pipeline_scenario(cfg.size, cfg.noise, cfg.seed)
        cube, gt = scenario.cube, scenario.gt
    else:
        raise InputValidationError("Either --preset or --scene is required", field="preset")

    out = cfg.ensure_out_dir()
    write_cube(cube, out / "cube.json")
    write_gt(gt, out / "gt.csv")
    if facts is not None:
        write_json(out / "scenario.json", facts.model_dump(mode="json"))

    observability.log_event(
        "synth_complete", "Synthetic scene written",
        {"bands": cube.n_bands, "width": cube.width, "height": cube.height}
    )
    print(f"wrote {cube.n_bands}-band {cube.width}x{cube.height} cube and ground truth to {out}")
    return EXIT_OK


def cmd_fano(cfg: RunConfig, observability: ObservabilityManager) -> int:
    """Bound the error probability of predicting the GT from one image"""
    gt = _require_gt(cfg)
    cube = _require_cube(cfg)

    sources = [s for s in (cfg.band is not None, cfg.approx_gt is not None, cfg.selection is not None) if s]
    if len(sources) != 1:
        raise InputValidationError(
            "Exactly one of --band, --approx-gt or --selection is required", field="band"
        )
    if cfg.band is not None:
        estimate = band_image(cube, cfg.band)
    elif cfg.approx_gt is not None:
        estimate = approx_gt_band_average(cube, cfg.approx_gt)
    else:
        estimate = replay_estimate(cube, load_selection(cfg.selection).selected)

    bounds = fano_bounds(gt, quantize(estimate, cfg.bins), labeled_only=cfg.labeled_only)
    out = cfg.ensure_out_dir()
    write_json(out / "fano.json", fano_dict(bounds))
    observability.log_event("fano_complete", "Fano bounds computed", fano_dict(bounds))
    print(f"H(C|X) = {bounds.h_c_given_x}, bounds [{bounds.lower}, {bounds.upper}]")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig, ObservabilityManager], int]] = {
    "rank": cmd_rank,
    "select": cmd_select,
    "eval": cmd_eval,
    "synth": cmd_synth,
    "fano": cmd_fano,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file mirroring these flags; flags take precedence")
    common.add_argument("--cube", help="cube header (JSON)")
    common.add_argument("--gt", help="ground truth CSV")
    common.add_argument("--approx-gt", dest="approx_gt", help="estimate the GT by averaging bands LO:HI")
    common.add_argument("--bins", type=int, help="quantization bins (default 256)")
    common.add_argument("--labeled-only", dest="labeled_only", action=argparse.BooleanOptionalAction,
                        help="exclude unlabeled pixels from MI (default on)")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--n-jobs", dest="n_jobs", type=int, help="parallel workers for band ranking")
    common.add_argument("--log-level", dest="log_level", help="log level (default info)")

    selection = argparse.ArgumentParser(add_help=False)
    selection.add_argument("--threshold", type=float, help="MI gain required to accept a band")
    selection.add_argument("--thresholds", help="comma-separated thresholds (sweep mode)")
    selection.add_argument("--max-bands", dest="max_bands", type=int, help="stop after this many bands")
    selection.add_argument("--candidate-bands", dest="candidate_bands", help="comma-separated band subset")

    split = argparse.ArgumentParser(add_help=False)
    split.add_argument("--train-fraction", dest="train_fraction", type=float, help="default 0.5")
    split.add_argument("--stratified", action=argparse.BooleanOptionalAction, help="per-class split (default on)")

    parser = argparse.ArgumentParser(
        prog="bandsel",
        description="Mutual-information band selection for hyperspectral cubes"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rank = sub.add_parser("rank", parents=[common, selection], help="rank bands by MI")
    rank.add_argument("--json", dest="write_json", action="store_true", default=None, help="also write JSON")

    select = sub.add_parser("select", parents=[common, selection, split], help="select bands")
    select.add_argument("--evaluate", action=argparse.BooleanOptionalAction,
                        help="in sweep mode, score each prefix of every selection (default on)")

    evaluate = sub.add_parser("eval", parents=[common, split], help="evaluate a band subset")
    evaluate.add_argument("--bands", help="comma-separated band indices")
    evaluate.add_argument("--selection", help="selection JSON from a previous run")

    synth = sub.add_parser("synth", parents=[common], help="write a synthetic scene")
    synth.add_argument("--preset", help="table1 or pipeline")
    synth.add_argument("--size", type=int, help="scene width and height")
    synth.add_argument("--noise", type=float, help="uniform noise amplitude")
    synth.add_argument("--scene", help="scene spec JSON")

    fano = sub.add_parser("fano", parents=[common], help="Fano error bounds")
    fano.add_argument("--band", type=int, help="band to use as the estimate")
    fano.add_argument("--selection", help="selection JSON whose estimate to use")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}

    try:
        cfg = RunConfig.load(args.config, overrides)
        observability = ObservabilityManager(cfg.log_file, cfg.log_level)
        observability.log_event("command_start", f"Running {args.command}", cfg.describe())
        return COMMANDS[args.command](cfg, observability)
    except DegenerateDataError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except InputValidationError as e:
        field = f" [{e.field}]" if e.field else ""
        print(f"error{field}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(p) for p in first["loc"])
        print(f"error [{field}]: {first['msg']}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
