"""
Clone fidelities from coincidence counts and the variance-minimizing
calibration of the relative detector efficiencies.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from constants import CON_CALIB, STATE_LABELS
from errors import CalibrationBoundaryError, DataError, NoDataError
from machine.detection import CoincidenceCounts, EfficiencyPair, MeasurementRecord, rescale_counts

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FidelityReport:
    per_state: tuple[tuple[float, float], ...]
    mean_a: float
    mean_b: float
    variance_a: float
    variance_b: float
    t: float | None = None
    eta_correction: EfficiencyPair | None = None

    @property
    def f_a(self) -> np.ndarray:
        return np.array([pair[0] for pair in self.per_state])

    @property
    def f_b(self) -> np.ndarray:
        return np.array([pair[1] for pair in self.per_state])


@dataclass(frozen=True)
class CalibrationResult:
    eta: EfficiencyPair
    reports: tuple[FidelityReport, ...]
    objective: str
    objective_value: float
    start: tuple[float, float]
    iterations: int
    boundary_hit: bool
    curvature_ratio: float = 1.0

    @property
    def identifiable(self) -> bool:
        """False when some direction of (eta_a, eta_b) leaves the objective flat."""
        return self.curvature_ratio > CON_CALIB["identifiability_ratio"]

    @property
    def report(self) -> FidelityReport:
        if len(self.reports) != 1:
            raise DataError(f"calibration covers {len(self.reports)} t values; use .reports")
        return self.reports[0]


def fidelities_from_counts(counts: CoincidenceCounts, role: str) -> tuple[float, float]:
    total = counts.total
    if total <= 0:
        raise NoDataError("coincidence record has zero total counts")
    c_pp, c_pm, c_mp, c_mm = counts.as_tuple()
    if role == "psi":
        return (c_pp + c_pm) / total, (c_pp + c_mp) / total
    if role == "perp":
        return (c_mm + c_mp) / total, (c_mm + c_pm) / total
    raise ValueError(f"role must be 'psi' or 'perp', got {role!r}")


def fidelity_variance(values) -> float:
    """(1/6) sum f^2 - (1/36) (sum f)^2, evaluated in the two-pass form."""
    return float(np.var(np.asarray(values, dtype=float)))


def _ordered(records) -> list[MeasurementRecord]:
    records = list(records)
    indices = sorted(r.state_index for r in records)
    if indices != list(range(len(STATE_LABELS))):
        labels = [STATE_LABELS[i] for i in indices]
        raise DataError(f"need exactly one record per state {STATE_LABELS}, got {labels}")
    ts = {r.t for r in records}
    if len(ts) != 1:
        raise DataError(f"records mix several t values: {sorted(ts)}")
    return sorted(records, key=lambda r: r.state_index)


def report(records, eta_correction: EfficiencyPair | None = None) -> FidelityReport:
    ordered = _ordered(records)
    per_state = []
    for record in ordered:
        counts = record.counts if eta_correction is None else rescale_counts(record.counts, eta_correction)
        try:
            per_state.append(fidelities_from_counts(counts, record.role))
        except NoDataError:
            raise NoDataError(f"record for state {record.state_label} at t={record.t} has zero total counts") from None

    f_a = [pair[0] for pair in per_state]
    f_b = [pair[1] for pair in per_state]
    return FidelityReport(
        per_state=tuple(per_state),
        mean_a=float(np.mean(f_a)),
        mean_b=float(np.mean(f_b)),
        variance_a=fidelity_variance(f_a),
        variance_b=fidelity_variance(f_b),
        t=ordered[0].t,
        eta_correction=eta_correction,
    )


def group_by_t(records) -> dict[float, list[MeasurementRecord]]:
    groups = defaultdict(list)
    for record in records:
        groups[record.t].append(record)
    return {t: _ordered(group) for t, group in sorted(groups.items())}


class _Objective:
    """Calibration objective vectorized over a batch of candidate efficiency pairs."""

    def __init__(self, groups: dict[float, list[MeasurementRecord]], objective: str):
        if objective not in CON_CALIB["objectives"]:
            raise ValueError(f"objective must be one of {CON_CALIB['objectives']}, got {objective!r}")
        self.objective = objective
        records = [r for group in groups.values() for r in group]
        self.counts = np.array([r.counts.as_tuple() for r in records], dtype=float)
        self.perp = np.array([r.role == "perp" for r in records])
        self.group = np.repeat(np.arange(len(groups)), [len(g) for g in groups.values()])
        self.n_groups = len(groups)
        for record, total in zip(records, self.counts.sum(axis=1)):
            if total <= 0:
                raise NoDataError(f"record for state {record.state_label} at t={record.t} has zero total counts")

    def __call__(self, etas) -> np.ndarray:
        etas = np.atleast_2d(np.asarray(etas, dtype=float))
        eta_a, eta_b = etas[:, 0:1], etas[:, 1:2]
        c_pp = self.counts[:, 0] * eta_a * eta_b
        c_pm = self.counts[:, 1] * eta_a
        c_mp = self.counts[:, 2] * eta_b
        c_mm = self.counts[:, 3] * np.ones_like(eta_a)
        total = c_pp + c_pm + c_mp + c_mm
        f_a = np.where(self.perp, c_mm + c_mp, c_pp + c_pm) / total
        f_b = np.where(self.perp, c_mm + c_pm, c_pp + c_mp) / total

        value = np.zeros(etas.shape[0])
        for g in range(self.n_groups):
            mask = self.group == g
            if self.objective in ("a", "sum"):
                value += np.var(f_a[:, mask], axis=1)
            if self.objective in ("b", "sum"):
                value += np.var(f_b[:, mask], axis=1)
        return value


def calibration_objective(records, eta: EfficiencyPair, objective: str = "sum") -> float:
    return float(_Objective(group_by_t(records), objective)([eta.eta_a, eta.eta_b])[0])


def _prescan(objective: _Objective) -> tuple[float, float]:
    const = CON_CALIB["prescan"]
    axis = np.linspace(const["min"], const["max"], const["points"])
    grid = np.array(np.meshgrid(axis, axis, indexing="ij")).reshape(2, -1).T
    values = objective(grid)
    best = grid[int(np.argmin(values))]
    start = np.array(CON_CALIB["start"])
    if objective(start)[0] <= values.min():
        return tuple(start)
    return float(best[0]), float(best[1])


def curvature_ratio(objective: _Objective, eta, step: float = CON_CALIB["curvature_step"]) -> float:
    """Smallest over largest |eigenvalue| of the objective's finite-difference Hessian at eta."""
    x = np.asarray(eta, dtype=float)
    e_a, e_b = np.array([step, 0.0]), np.array([0.0, step])
    f = objective(np.array([
        x, x + e_a, x - e_a, x + e_b, x - e_b,
        x + e_a + e_b, x + e_a - e_b, x - e_a + e_b, x - e_a - e_b,
    ]))
    h_aa = (f[1] - 2 * f[0] + f[2]) / step ** 2
    h_bb = (f[3] - 2 * f[0] + f[4]) / step ** 2
    h_ab = (f[5] - f[6] - f[7] + f[8]) / (4 * step ** 2)
    magnitudes = np.abs(np.linalg.eigvalsh(np.array([[h_aa, h_ab], [h_ab, h_bb]])))
    if magnitudes.max() == 0.0:
        return 0.0
    return float(magnitudes.min() / magnitudes.max())


def calibrate(records, objective: str = "sum", strict: bool = False) -> CalibrationResult:
    """
    Find (eta_a, eta_b) minimizing the fidelity variance of the rescaled records.

    Records may span several t values; the objective is then summed over t
    (one efficiency pair shared by every setting).
    """
    groups = group_by_t(records)
    if not groups:
        raise DataError("no records to calibrate")
    target = _Objective(groups, objective)

    start = _prescan(target)
    low, high = CON_CALIB["bounds"]
    result = minimize(
        lambda x: float(target(x)[0]),
        x0=np.array(start),
        method="Nelder-Mead",
        bounds=[(low, high)] * 2,
        options={
            "xatol": CON_CALIB["xatol"],
            "fatol": CON_CALIB["fatol"],
            "maxiter": CON_CALIB["maxiter"],
            "maxfev": 2 * CON_CALIB["maxiter"],
        },
    )
    eta_a, eta_b = (float(v) for v in result.x)
    tol = CON_CALIB["boundary_tolerance"]
    boundary_hit = any(min(v - low, high - v) <= tol for v in (eta_a, eta_b))
    if not result.success:
        logger.warning("##### CALIBRATE: optimizer stopped early: %s", result.message)
    if boundary_hit:
        logger.warning("##### CALIBRATE: eta=(%.6f, %.6f) on the search boundary; calibration suspect", eta_a, eta_b)
        if strict:
            raise CalibrationBoundaryError(
                f"calibrated efficiencies ({eta_a:.6f}, {eta_b:.6f}) hit the domain [{low}, {high}]"
            )

    ratio = curvature_ratio(target, (eta_a, eta_b))
    if ratio <= CON_CALIB["identifiability_ratio"]:
        logger.warning("##### CALIBRATE: objective flat along one direction at eta=(%.6f, %.6f) "
                       "(curvature ratio %.1e); the data do not fix both efficiencies", eta_a, eta_b, ratio)

    eta = EfficiencyPair(eta_a, eta_b)
    logger.info("##### CALIBRATE: eta=(%.9f, %.9f) objective=%.3e after %d iterations",
                eta_a, eta_b, result.fun, result.nit)
    return CalibrationResult(
        eta=eta,
        reports=tuple(report(group, eta) for group in groups.values()),
        objective=objective,
        objective_value=float(result.fun),
        start=start,
        iterations=int(result.nit),
        boundary_hit=boundary_hit,
        curvature_ratio=ratio,
    )
