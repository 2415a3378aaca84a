"""
The four pipelines behind the command line: analytic, simulate, calibrate, robustness.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from analysis.estimation import CalibrationResult, FidelityReport, calibrate, group_by_t, report
from analysis.robustness import robustness_sweep, taylor_form
from constants import BASIS_LABELS, ROLES, STATE_LABELS, TABLE_SCHEMAS
from errors import DataError
from handlers.record_handler import RecordHandler
from machine.cloner import (
    clone_fidelities,
    machine_triple,
    success_probability,
    tradeoff_curve,
    tradeoff_gap,
    tradeoff_residual,
)
from machine.detection import MeasurementRecord, run_experiment
from run_config import RunConfig
from telemetry import Telemetry

logger = logging.getLogger(__name__)


@dataclass
class CommandResult:
    tables: dict[str, list[tuple]] = field(default_factory=dict)
    paths: dict[str, Path] = field(default_factory=dict)
    summary: dict[str, object] = field(default_factory=dict)
    records: list[MeasurementRecord] = field(default_factory=list)
    calibrations: list[CalibrationResult] = field(default_factory=list)


def _report_rows(stage: str, fidelity_report: FidelityReport) -> list[tuple]:
    return [
        (stage, fidelity_report.t, STATE_LABELS[i], BASIS_LABELS[i // 2], ROLES[i % 2], f_a, f_b)
        for i, (f_a, f_b) in enumerate(fidelity_report.per_state)
    ]


def _summary_row(stage: str, fidelity_report: FidelityReport) -> tuple:
    return (
        stage,
        fidelity_report.t,
        fidelity_report.mean_a,
        fidelity_report.mean_b,
        fidelity_report.variance_a,
        fidelity_report.variance_b,
        tradeoff_gap(fidelity_report.mean_a, fidelity_report.mean_b),
    )


class ClonerApp:

    def __init__(self, config: RunConfig):
        self.config = config
        self.handler = RecordHandler(config.output_format)
        self.out = Path(config.output_path)

    def _sibling(self, tag: str) -> Path:
        suffix = f".{self.config.output_format}"
        return self.out.with_name(f"{self.out.stem}.{tag}{suffix}")

    def _finish(self, result: CommandResult, telemetry: Telemetry, main_schema: str) -> CommandResult:
        result.paths[main_schema] = self.handler.write_table(self.out, main_schema, result.tables[main_schema])
        result.summary = telemetry.telemeterize()
        sidecar = {
            "config": yaml.safe_load(self.config.to_yaml()),
            "summary": result.summary,
        }
        result.paths["config"] = self.handler.write_text(
            self.out.with_name(self.out.name + ".config.yaml"), yaml.safe_dump(sidecar, sort_keys=False)
        )
        return result

    # ---------- analytic

    def cmd_analytic(self) -> CommandResult:
        telemetry = Telemetry("analytic")
        rows = []
        for t in self.config.t_values:
            f_a, f_b = clone_fidelities(t)
            rows.append(("setting", t, f_a, f_b, machine_triple(t).p, success_probability(t), tradeoff_residual(f_a, f_b)))
        for t, f_a, f_b in tradeoff_curve(self.config.curve_points):
            rows.append(("curve", t, f_a, f_b, machine_triple(t).p, success_probability(t), tradeoff_residual(f_a, f_b)))

        telemetry.put("settings", len(self.config.t_values))
        telemetry.put("max_abs_residual", max(abs(row[-1]) for row in rows))
        return self._finish(CommandResult(tables={"analytic": rows}), telemetry, "analytic")

    # ---------- simulate

    def cmd_simulate(self) -> CommandResult:
        telemetry = Telemetry("simulate")
        config = self.config
        records, report_rows, summary_rows = [], [], []
        for t_index, t in enumerate(config.t_values):
            logger.info("##### SIMULATE t=%.6f (%d/%d)", t, t_index + 1, len(config.t_values))
            batch = run_experiment(t, config.eta_true, config.counts_per_setting, config.seed,
                                   noiseless=config.noiseless, t_index=t_index)
            records.extend(batch)
            uncalibrated = report(batch)
            report_rows.extend(_report_rows("uncalibrated", uncalibrated))
            summary_rows.append(_summary_row("uncalibrated", uncalibrated))

        result = CommandResult(tables={"report": report_rows, "summary": summary_rows}, records=records)
        result.paths["records"] = self.handler.write_records(self.out.with_name(f"{self.out.stem}.records.csv"), records)
        result.paths["summary"] = self.handler.write_table(self._sibling("summary"), "summary", summary_rows)
        telemetry.put("records", len(records))
        telemetry.put("noiseless", config.noiseless)
        telemetry.put("eta_true", [config.eta_a, config.eta_b])
        return self._finish(result, telemetry, "report")

    # ---------- calibrate

    def cmd_calibrate(self, records_path) -> CommandResult:
        telemetry = Telemetry("calibrate")
        records = self.handler.read_records(records_path)
        if not records:
            raise DataError(f"{records_path}: no records")
        groups = group_by_t(records)
        objective = self.config.calibration_objective

        if self.config.calibration_mode == "pooled":
            calibrations = [calibrate(records, objective, strict=self.config.strict)]
        else:
            calibrations = [calibrate(group, objective, strict=self.config.strict) for group in groups.values()]

        calibration_rows, report_rows, summary_rows = [], [], []
        for calibration in calibrations:
            for after in calibration.reports:
                before = report(groups[after.t])
                calibration_rows.append((
                    after.t, calibration.eta.eta_a, calibration.eta.eta_b, objective,
                    calibration.objective_value, calibration.boundary_hit, calibration.identifiable,
                    before.mean_a, before.mean_b, after.mean_a, after.mean_b,
                ))
                report_rows.extend(_report_rows("uncalibrated", before) + _report_rows("calibrated", after))
                summary_rows.extend([_summary_row("uncalibrated", before), _summary_row("calibrated", after)])
            telemetry.count("boundary_hits", int(calibration.boundary_hit))
            telemetry.count("unidentified", int(not calibration.identifiable))

        result = CommandResult(
            tables={"calibration": calibration_rows, "report": report_rows, "summary": summary_rows},
            records=records,
            calibrations=calibrations,
        )
        result.paths["report"] = self.handler.write_table(self._sibling("report"), "report", report_rows)
        result.paths["summary"] = self.handler.write_table(self._sibling("summary"), "summary", summary_rows)
        telemetry.put("records", len(records))
        telemetry.put("mode", self.config.calibration_mode)
        telemetry.put("objective", objective)
        telemetry.put("eta", [[c.eta.eta_a, c.eta.eta_b] for c in calibrations])
        return self._finish(result, telemetry, "calibration")

    # ---------- robustness

    def cmd_robustness(self) -> CommandResult:
        telemetry = Telemetry("robustness")
        machines = []
        if self.config.machine is not None:
            machines.append(("machine", self.config.machine_triple()))
        else:
            machines.extend((f"t={t:.6g}", machine_triple(t)) for t in self.config.t_values)

        coefficient_rows = []
        for name, machine in machines:
            for clone, subject in (("A", machine), ("B", machine.swapped())):
                form = taylor_form(subject)
                coefficient_rows.append((f"{name} {clone}", form.coeff_aa, form.coeff_ab, form.coeff_bb,
                                         form.bound_factor))
        # the grid is written for the first machine: the explicit triple or the first t value
        sweep_rows = robustness_sweep(machines[0][1], self.config.eps_max, self.config.eps_points)

        result = CommandResult(tables={"robustness": sweep_rows, "coefficients": coefficient_rows})
        result.paths["coefficients"] = self.handler.write_table(self._sibling("coefficients"), "coefficients",
                                                                coefficient_rows)
        telemetry.put("machine", machines[0][0])
        telemetry.put("grid_points", len(sweep_rows))
        return self._finish(result, telemetry, "robustness")


def schema_text() -> str:
    lines = ["# column orders of every file written by the cloner tools"]
    for name, columns in TABLE_SCHEMAS.items():
        lines.append(f"{name}: {', '.join(columns)}")
    lines.append("# records: one line per measurement; state in H,V,D,A,R,L; basis in HV,DA,RL; role in psi,perp;")
    lines.append("# eta_a/eta_b are the synthetic truth and stay empty for measured data")
    return "\n".join(lines) + "\n"
