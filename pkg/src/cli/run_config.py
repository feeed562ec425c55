from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from loguru import logger

from src.errors import ConfigError
from src.experiment.calibration import calibrate
from src.experiment.config import ImperfectionConfig, StagePlan
from src.optics.network import SETUP1, SetupId, setup_from_name

PLAN_KEYS = ("first_setup", "stage_duration_s", "transition_gap_s", "target_epsilon")
NULLABLE_KEYS = {"phase_jitter_sigma", "signal_delay", "target_epsilon"}


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        if key in NULLABLE_KEYS:
            return None
        raise ConfigError(key, "may not be null")
    if key == "first_setup":
        if not isinstance(value, str):
            raise ConfigError(key, f"must be a setup name, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"must be a number, got {value!r}")
    if key == "rng_seed" and isinstance(value, int):
        return value
    try:
        number = float(value)
    except OverflowError:
        number = math.inf
    if not math.isfinite(number):
        raise ConfigError(key, f"must be finite, got {value!r}")
    if key == "rng_seed":
        if not number.is_integer():
            raise ConfigError(key, f"must be an integer, got {value!r}")
        return int(number)
    return number


@dataclass(frozen=True)
class RunConfigFile:
    """Flat run configuration: imperfections, stage plan and an optional epsilon target."""

    imperfections: ImperfectionConfig = field(default_factory=ImperfectionConfig)
    first_setup: SetupId = SETUP1
    stage_duration_s: float = 60.0
    transition_gap_s: float = 2.0
    target_epsilon: Optional[float] = None

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> RunConfigFile:
        known = set(ImperfectionConfig.field_names()) | set(PLAN_KEYS)
        for key in values:
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
        coerced = {key: _coerce(key, value) for key, value in values.items()}
        imperfections = ImperfectionConfig(
            **{k: v for k, v in coerced.items() if k in ImperfectionConfig.field_names()}
        )
        first_setup = SETUP1
        if "first_setup" in coerced:
            try:
                first_setup = setup_from_name(coerced["first_setup"])
            except ValueError as e:
                raise ConfigError("first_setup", str(e)) from None
        run_config = cls(
            imperfections,
            first_setup,
            coerced.get("stage_duration_s", 60.0),
            coerced.get("transition_gap_s", 2.0),
            coerced.get("target_epsilon"),
        )
        run_config.plan()
        return run_config

    @classmethod
    def load(cls, path: Union[str, Path]) -> RunConfigFile:
        path = Path(path)
        with open(path, "r", encoding="utf-8") as f:
            try:
                values = json.load(f)
            except (json.JSONDecodeError, UnicodeDecodeError) as e:
                raise ConfigError(str(path), f"not valid UTF-8 JSON ({e})") from None
        if not isinstance(values, dict):
            raise ConfigError(str(path), "a run configuration must be a JSON object")
        logger.info(f"📄Loaded run configuration from {path}")
        return cls.from_mapping(values)

    def plan(self) -> StagePlan:
        return StagePlan.default(self.first_setup, self.stage_duration_s, self.transition_gap_s)

    def with_seed(self, seed: Optional[int]) -> RunConfigFile:
        if seed is None:
            return self
        return RunConfigFile(
            self.imperfections.with_updates(rng_seed=seed),
            self.first_setup,
            self.stage_duration_s,
            self.transition_gap_s,
            self.target_epsilon,
        )

    def resolved(self) -> ImperfectionConfig:
        """Imperfections to simulate, calibrated first when a target epsilon is set."""
        if self.target_epsilon is None:
            return self.imperfections
        return calibrate(self.target_epsilon, self.imperfections)

    def echo(self) -> Dict[str, Any]:
        values = self.imperfections.echo()
        values.update(
            first_setup=self.first_setup.name,
            stage_duration_s=self.stage_duration_s,
            transition_gap_s=self.transition_gap_s,
            target_epsilon=self.target_epsilon,
        )
        return values
