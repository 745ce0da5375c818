"""
Simple smoke tests for the band selection toolkit
"""
import numpy as np
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def test_imports():
    """Test that all modules can be imported"""
    from src.cli import main  # noqa: F401
    from src.evaluator import evaluate_subset  # noqa: F401
    from src.hypercube_io import HyperCube, GroundTruth  # noqa: F401
    from src.infotheory import mutual_information  # noqa: F401
    from src.observability import ObservabilityManager  # noqa: F401
    from src.run_config import RunConfig  # noqa: F401
    from src.selector import BandSelector  # noqa: F401
    from src.state import SelectionState  # noqa: F401
    from src.synthlab import table1_scenario  # noqa: F401


def test_state_management():
    """Test the selection state transitions"""
    from src.hypercube_io import RealImage
    from src.state import BandScore, SelectionConfig, SelectionState

    ranking = [BandScore(band=b, mi_with_gt=1.0 - 0.1 * b) for b in range(3)]
    state = SelectionState(config=SelectionConfig(max_bands=2), ranking=ranking)
    image = RealImage(values=np.zeros((2, 2)))

    state.seed(0, image, 0.5)
    state.next_rank = 1
    assert state.should_continue()

    state.current_band, state.current_estimate, state.current_mi = 1, image, 0.4
    state.add_decision(False)
    state.next_rank = 2
    assert state.mi_star == 0.5
    assert state.current_band is None

    state.current_band, state.current_estimate, state.current_mi = 2, image, 0.9
    state.add_decision(True)
    state.next_rank = 3
    assert state.selected == [0, 2]
    assert not state.should_continue()

    result = state.to_result()
    assert result.final_mi == 0.9
    assert result.rejected == [1]
    assert "n_jobs" not in result.config


def test_observability(tmp_path):
    """Test observability system"""
    from src.observability import ObservabilityManager

    log_file = tmp_path / "logs" / "test.log"
    obs = ObservabilityManager(log_file=str(log_file))

    obs.log_event("test", "Test event")
    obs.log_decision(band=3, mi=1.25, mi_before=1.0, threshold=0.1, accepted=True)
    obs.log_decision(band=4, mi=1.3, mi_before=1.25, threshold=0.1, accepted=False)

    summary = obs.get_summary()
    assert summary["examined"] == 2
    assert summary["accepted"] == 1
    assert summary["acceptance_rate"] == 0.5
    assert summary["latest_decision"]["band"] == 4
    assert len(log_file.read_text().splitlines()) == 3

    obs.clear()
    assert obs.get_summary()["total_events"] == 0


def test_run_config_layers(tmp_path, monkeypatch):
    """Environment < config file < explicit flags"""
    import json
    from src.run_config import RunConfig

    monkeypatch.setenv("BANDSEL_BINS", "32")
    monkeypatch.setenv("BANDSEL_SEED", "9")
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"bins": 64, "approx-gt": "2:5"}))

    cfg = RunConfig.load(config, {"bins": 128, "threshold": None})
    assert cfg.bins == 128
    assert cfg.seed == 9
    assert cfg.approx_gt == (2, 5)
    assert cfg.threshold == 0.0
    assert cfg.out.is_absolute()
    assert cfg.selection_config().n_bins == 128
    assert cfg.split_spec().seed == 9


def main():
    """Run all tests"""
    import tempfile
    from pathlib import Path

    print("=" * 60)
    print("Band Selection Toolkit Tests")
    print("=" * 60)

    tests = [test_imports, test_state_management]
    passed = 0
    for test in tests:
        try:
            test()
            print(f"✓ {test.__name__}")
            passed += 1
        except Exception as e:
            print(f"✗ {test.__name__}: {e}")

    with tempfile.TemporaryDirectory() as tmp:
        try:
            test_observability(Path(tmp))
            print("✓ test_observability")
            passed += 1
        except Exception as e:
            print(f"✗ test_observability: {e}")

    print("\n" + "=" * 60)
    print(f"Tests passed: {passed}/{len(tests) + 1}")
    print("=" * 60)
    print("\nRun the full suite with:")
    print("  pytest")


if __name__ == "__main__":
    main()
