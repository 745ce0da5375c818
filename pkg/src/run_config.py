"""
Run configuration

Values are layered: built-in defaults, then environment variables (a .env
file is loaded by main.py), then a JSON config file, then command-line flags.
"""
import json
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import InputValidationError
from .evaluator import SplitSpec
from .state import SelectionConfig


# Environment variable -> config field
ENV_FIELDS = {
    "BANDSEL_BINS": "bins",
    "BANDSEL_SEED": "seed",
    "BANDSEL_OUT_DIR": "out",
    "BANDSEL_N_JOBS": "n_jobs",
    "BANDSEL_LOG_FILE": "log_file",
    "BANDSEL_LOG_LEVEL": "log_level",
}


def parse_band_range(value: Union[str, Tuple[int, int], List[int]]) -> Tuple[int, int]:
    """Parse "LO:HI" (inclusive) into a pair"""
    if isinstance(value, (tuple, list)):
        if len(value) != 2:
            raise ValueError(f"band range needs two bounds, got {value}")
        return int(value[0]), int(value[1])
    parts = str(value).split(":")
    if len(parts) != 2:
        raise ValueError(f"band range must look like LO:HI, got {value!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ValueError(f"band range bounds must be integers, got {value!r}")


def parse_int_list(value: Union[str, List[int], None]) -> Optional[List[int]]:
    """Parse "0,1,2" into [0, 1, 2]"""
    if value is None or isinstance(value, list):
        return value
    items = [item.strip() for item in str(value).split(",") if item.strip()]
    try:
        return [int(item) for item in items]
    except ValueError:
        raise ValueError(f"expected a comma-separated list of integers, got {value!r}")


def parse_float_list(value: Union[str, List[float], None]) -> Optional[List[float]]:
    if value is None or isinstance(value, list):
        return value
    items = [item.strip() for item in str(value).split(",") if item.strip()]
    try:
        return [float(item) for item in items]
    except ValueError:
        raise ValueError(f"expected a comma-separated list of numbers, got {value!r}")


class RunConfig(BaseModel):
    """Everything one CLI command needs"""
    model_config = ConfigDict(validate_default=True)

    # Paths
    cube: Optional[Path] = None
    gt: Optional[Path] = None
    out: Path = Path("out")
    selection: Optional[Path] = None
    scene: Optional[Path] = None

    # Reference estimate (inclusive band range)
    approx_gt: Optional[Tuple[int, int]] = None

    # Selection
    bins: int = Field(default=256, ge=2)
    threshold: float = 0.0
    thresholds: Optional[List[float]] = None
    max_bands: Optional[int] = Field(default=None, ge=1)
    labeled_only: bool = True
    candidate_bands: Optional[List[int]] = None

    # Evaluation
    train_fraction: float = Field(default=0.5, gt=0.0, lt=1.0)
    seed: int = 0
    stratified: bool = True
    bands: Optional[List[int]] = None
    evaluate: bool = True

    # Command options
    band: Optional[int] = Field(default=None, ge=0)
    preset: Optional[str] = None
    size: int = Field(default=64, ge=2)
    noise: float = Field(default=0.0, ge=0.0)
    write_json: bool = False
    n_jobs: int = 1
    log_file: Optional[str] = "logs/band_selection.log"
    log_level: str = "info"

    @field_validator("approx_gt", mode="before")
    @classmethod
    def _parse_range(cls, value: Any) -> Any:
        return None if value is None else parse_band_range(value)

    @field_validator("bands", "candidate_bands", mode="before")
    @classmethod
    def _parse_ints(cls, value: Any) -> Any:
        return parse_int_list(value)

    @field_validator("thresholds", mode="before")
    @classmethod
    def _parse_floats(cls, value: Any) -> Any:
        return parse_float_list(value)

    @field_validator("cube", "gt", "out", "selection", "scene")
    @classmethod
    def _absolute(cls, value: Optional[Path]) -> Optional[Path]:
        return None if value is None else value.expanduser().resolve()

    @field_validator("preset")
    @classmethod
    def _check_preset(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in ("table1", "pipeline"):
            raise ValueError(f"unknown preset {value!r}; expected 'table1' or 'pipeline'")
        return value

    @field_validator("log_level")
    @classmethod
    def _check_log_level(cls, value: str) -> str:
        if value.lower() not in ("debug", "info", "warning", "error", "critical"):
            raise ValueError(f"unknown log level {value!r}")
        return value.lower()

    @staticmethod
    def from_env() -> Dict[str, Any]:
        """Config values present in the environment; an empty BANDSEL_LOG_FILE disables the log file"""
        values: Dict[str, Any] = {}
        for name, field in ENV_FIELDS.items():
            value = os.getenv(name)
            if value:
                values[field] = value
            elif value is not None and field == "log_file":
                values[field] = None
        return values

    @staticmethod
    def load(
        config_file: Optional[Union[str, Path]] = None,
        overrides: Optional[Dict[str, Any]] = None
    ) -> "RunConfig":
        """
        Build a config from environment, optional JSON file and explicit overrides

        Args:
            config_file: JSON object whose keys mirror the command-line flags
            overrides: Flag values; None entries are ignored

        Raises:
            InputValidationError: If the file is unreadable or a value is invalid
        """
        values: Dict[str, Any] = RunConfig.from_env()

        if config_file is not None:
            try:
                with open(config_file) as f:
                    file_values = json.load(f)
            except FileNotFoundError:
                raise InputValidationError(f"Config file not found: {config_file}", field="config")
            except json.JSONDecodeError as e:
                raise InputValidationError(f"Config file {config_file} is not valid JSON: {e}", field="config")
            if not isinstance(file_values, dict):
                raise InputValidationError("Config file must contain a JSON object", field="config")
            values.update({k.replace("-", "_"): v for k, v in file_values.items()})

        values.update({k: v for k, v in (overrides or {}).items() if v is not None})

        unknown = sorted(set(values) - set(RunConfig.model_fields))
        if unknown:
            raise InputValidationError(f"Unknown config keys: {', '.join(unknown)}", field=unknown[0])

        try:
            return RunConfig(**values)
        except ValidationError as e:
            first = e.errors()[0]
            field = ".".join(str(p) for p in first["loc"]) or "config"
            raise InputValidationError(f"Invalid value for '{field}': {first['msg']}", field=field)

    def ensure_out_dir(self) -> Path:
        """Create the output directory and check it is writable"""
        try:
            self.out.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise InputValidationError(f"Cannot create output directory {self.out}: {e}", field="out")
        if not os.access(self.out, os.W_OK):
            raise InputValidationError(f"Output directory {self.out} is not writable", field="out")
        return self.out

    def selection_config(self, threshold: Optional[float] = None) -> SelectionConfig:
        return SelectionConfig(
            threshold=self.threshold if threshold is None else threshold,
            max_bands=self.max_bands,
            n_bins=self.bins,
            labeled_only=self.labeled_only,
            candidate_bands=self.candidate_bands,
            n_jobs=self.n_jobs
        )

    def split_spec(self) -> SplitSpec:
        return SplitSpec(
            train_fraction=self.train_fraction,
            seed=self.seed,
            stratified=self.stratified
        )

    def describe(self) -> Dict[str, Any]:
        """Flat view for logging"""
        return self.model_dump(mode="json", exclude_none=True)
