from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from loguru import logger

from src.cli.run_config import RunConfigFile
from src.errors import ConfigError
from src.experiment.analysis import RunReport, analyze_trace
from src.experiment.calibration import expected_setup2_epsilon
from src.experiment.config import ImperfectionConfig
from src.experiment.export import TraceExporter
from src.experiment.protocol import run_experiment
from src.nchv.assignments import consistent_assignments, enumerate_assignments
from src.nchv.ks_set import (
    PATH_POLARIZATION_KS_SET,
    Verdict,
    epsilon_bound,
    nchv_allowed_detectors,
    qm_allowed_detectors,
    verdict,
)
from src.optics.network import (
    SETUP2,
    SIGNAL_DETECTORS,
    SetupId,
    build_setup,
    custom_setup,
    propagate,
    setup_from_name,
)
from src.optics.outcomes import outcome_map
from src.optics.tuning import interferometer_phases
from src.quantum.core import ObservableName, bell_state

EXIT_DISPROOF = 0
EXIT_INCONCLUSIVE = 1
EXIT_ERROR = 2

DEFAULT_TRACE_PATH = "data/runs/trace.csv"
DEFAULT_SWEEP_PATH = "data/runs/sweep.csv"


def resolve_setup(
    name: str = SETUP2.name, hwp1: Optional[float] = None, hwp2: Optional[float] = None
) -> SetupId:
    """A named setup, or a custom one when either waveplate angle is overridden."""
    setup = setup_from_name(name)
    if hwp1 is None and hwp2 is None:
        return setup
    return custom_setup(
        setup.hwp1_angle if hwp1 is None else hwp1,
        setup.hwp2_angle if hwp2 is None else hwp2,
    )


def cmd_predict(setup: SetupId) -> int:
    phase1, phase2 = interferometer_phases()
    distribution = propagate(build_setup(setup, phase1, phase2), bell_state())
    print(f"setup: {setup} (HWP1={setup.hwp1_angle:g} deg, HWP2={setup.hwp2_angle:g} deg)")
    print(f"phase1: {phase1:.9f}")
    print(f"phase2: {phase2:.9f}")

    if setup.is_custom:
        mapping = outcome_map(SETUP2)
        labels = {d: "" for d in SIGNAL_DETECTORS}
    else:
        mapping = outcome_map(setup)
        names = "/".join(name.value for name in mapping.observables)
        labels = {
            d: f"  {names}=({mapping[d][0]:+d},{mapping[d][1]:+d})"
            if d in mapping.active_detectors
            else "  inactive"
            for d in SIGNAL_DETECTORS
        }
    for detector in SIGNAL_DETECTORS:
        print(f"{detector.name}  {distribution[detector] + 0.0:.6f}{labels[detector]}")

    qm = qm_allowed_detectors(mapping)
    nchv = nchv_allowed_detectors(mapping.setup, mapping)
    qm_names = ",".join(d.name for d in sorted(qm))
    nchv_names = ",".join(d.name for d in sorted(nchv))
    print(f"mass on {qm_names}: {distribution.mass(qm) + 0.0:.6f}")
    if nchv != qm:
        print(f"mass on {nchv_names}: {distribution.mass(nchv) + 0.0:.6f}")
    return 0


def cmd_nchv_check() -> int:
    ks = PATH_POLARIZATION_KS_SET
    constraints = ks.constraints()
    assignments = enumerate_assignments()

    print(f"Kochen-Specker set ({len(ks)} measurements):")
    for context in ks.contexts:
        print(f"  {context}")
    print(f"\nall assignments: {len(assignments)}")
    for assignment in assignments:
        marks = "".join("+" if c.holds(assignment) else "." for c in constraints)
        print(f"  {assignment}  [{marks}]")

    survivors = consistent_assignments(constraints[:2], assignments)
    print(f"\nsatisfying {constraints[0]} and {constraints[1]}: {len(survivors)}")
    for assignment in survivors:
        z1x2 = assignment.value(ObservableName.Z1X2)
        x1z2 = assignment.value(ObservableName.X1Z2)
        relation = "=" if z1x2 == x1z2 else "!="
        print(f"  {assignment}  v(Z1X2)={z1x2:+d} {relation} v(X1Z2)={x1z2:+d}")

    consistent = consistent_assignments(constraints, assignments)
    print(f"\nconsistent assignments: {len(consistent)} of {len(assignments)}")
    print(f"epsilon bound: {epsilon_bound(ks).bound}")
    return 0 if not consistent else 1


def _run_once(run_config: RunConfigFile, imperfections: ImperfectionConfig):
    trace = run_experiment(run_config.plan(), imperfections)
    echo = run_config.echo()
    echo.update(imperfections.echo())
    report = analyze_trace(trace, seed=imperfections.rng_seed, config=echo)
    return trace, report


def _load(config_path: Optional[Union[str, Path]]) -> RunConfigFile:
    if config_path is None:
        logger.info("📄No --config given, using the built-in defaults")
        return RunConfigFile()
    return RunConfigFile.load(config_path)


def cmd_run(
    config_path: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    out: Union[str, Path] = DEFAULT_TRACE_PATH,
) -> int:
    run_config = _load(config_path).with_seed(seed)
    trace, report = _run_once(run_config, run_config.resolved())
    TraceExporter(out).write_run(trace, report)

    print(f"epsilon: {report.epsilon:.6f}")
    print(f"pooled_epsilon: {report.pooled_epsilon:.6f}")
    print(f"bound: {report.bound.bound}")
    print(f"verdict: {report.verdict.value}")
    return exit_code(report)


def exit_code(report: RunReport) -> int:
    return EXIT_DISPROOF if report.verdict is Verdict.DISPROOF_OF_NCHV else EXIT_INCONCLUSIVE


def sweep_values(start: float, stop: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise ConfigError("steps", f"must be at least 1, got {steps}")
    return np.linspace(start, stop, steps)


def cmd_sweep(
    param: str,
    start: float,
    stop: float,
    steps: int,
    config_path: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    out: Union[str, Path] = DEFAULT_SWEEP_PATH,
) -> int:
    """Re-run the protocol with one imperfection parameter stepped across a range."""
    if param not in ImperfectionConfig.field_names() or param == "rng_seed":
        raise ConfigError(param, "not a sweepable imperfection parameter")
    values = sweep_values(start, stop, steps)
    run_config = _load(config_path).with_seed(seed)
    base = run_config.resolved()
    bound = epsilon_bound(PATH_POLARIZATION_KS_SET)

    rows: List[Dict[str, Any]] = []
    for value in values:
        imperfections = base.with_updates(**{param: float(value)})
        logger.info(f"🔧{param} = {value:.6g}")
        _, report = _run_once(run_config, imperfections)
        rows.append(
            {
                "param_value": float(value),
                "epsilon": report.epsilon,
                "expected_epsilon": expected_setup2_epsilon(imperfections),
                "verdict": verdict(report.epsilon, bound).value,
                "nearest_bound": False,
            }
        )
    nearest = min(range(len(rows)), key=lambda i: abs(rows[i]["epsilon"] - float(bound)))
    rows[nearest]["nearest_bound"] = True

    TraceExporter(out).write_sweep(rows)
    for row in rows:
        flag = "  <- nearest 1/3" if row["nearest_bound"] else ""
        print(f"{row['param_value']:.6g}  epsilon={row['epsilon']:.6f}  {row['verdict']}{flag}")
    return 0
