import json
from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd
from loguru import logger

from src.experiment.analysis import RunReport
from src.experiment.protocol import ExperimentTrace
from src.optics.network import SIGNAL_DETECTORS


class TraceExporter:
    """Writes run traces, reports and parameter sweeps under one output path."""

    CSV_HEADERS = ["time_s", "stage"] + [d.name.lower() for d in SIGNAL_DETECTORS]
    SWEEP_HEADERS = ["param_value", "epsilon", "expected_epsilon", "verdict", "nearest_bound"]
    FLOAT_FORMAT = "%.6g"

    def __init__(self, output_csv: Union[str, Path] = "data/runs/trace.csv"):
        self.output_csv = Path(output_csv)
        self.output_csv.parent.mkdir(parents=True, exist_ok=True)

    @property
    def report_path(self) -> Path:
        return self.output_csv.with_suffix(".json")

    def trace_frame(self, trace: ExperimentTrace) -> pd.DataFrame:
        frame = pd.DataFrame(trace.rates, columns=self.CSV_HEADERS[2:])
        frame.insert(0, "stage", list(trace.stages))
        frame.insert(0, "time_s", trace.times)
        return frame

    def write_trace(self, trace: ExperimentTrace) -> Path:
        frame = self.trace_frame(trace)
        frame.to_csv(self.output_csv, index=False, float_format=self.FLOAT_FORMAT)
        logger.info(f"💾Wrote {len(frame)} bins to {self.output_csv}")
        return self.output_csv

    def write_report(self, report: RunReport) -> Path:
        with open(self.report_path, "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        logger.info(f"💾Wrote report to {self.report_path}")
        return self.report_path

    def write_run(self, trace: ExperimentTrace, report: RunReport) -> List[Path]:
        return [self.write_trace(trace), self.write_report(report)]

    def write_sweep(self, rows: List[Dict[str, Any]]) -> Path:
        if not rows:
            logger.warning("⚠️Sweep produced no rows")
        frame = pd.DataFrame(rows, columns=self.SWEEP_HEADERS)
        frame.to_csv(self.output_csv, index=False, float_format=self.FLOAT_FORMAT)
        logger.info(f"💾Wrote {len(frame)} sweep rows to {self.output_csv}")
        return self.output_csv
