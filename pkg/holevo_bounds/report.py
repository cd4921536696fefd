"""
Bound reports: every bound that applies at a model point, the Table of the
three qubit models against their Gaussian counterparts, and the curve data
comparing local and collective strategies on qubits.
"""

from dataclasses import dataclass, field
from typing import Optional
import numpy as np

from .bounds import (
    CompatibilityReport,
    compatibility_report,
    d_invariance_check,
    hgm_bound,
    rld_bound,
    sld_cr_bound,
    sld_set,
)
from .common import RadialEstimator
from .gaussian import (
    GaussianShiftModel,
    gaussian_hcr,
    gaussian_rld_bound,
    gaussian_sld_bound,
    optimal_linear_measurement,
    qubit_matched_models,
)
from .hcr import hcr_bound
from .holevo_exceptions import RldUndefinedError, TableMismatchError, UnsupportedError
from .model import (
    CostMatrix,
    ModelPoint,
    evaluate,
    pure_qubit,
    qubit_bloch_cartesian,
    qubit_bloch_spherical,
    qubit_phase,
    qubit_r_theta,
)
from .sim import collective_estimation_run
from .utils import get_logging

_logger = get_logging().getLogger(__name__)

_TABLE_TOL = 1e-6
_EQUATOR = np.pi / 2


@dataclass(frozen=True)
class BoundReport:
    model: str
    theta: Optional[np.ndarray]
    sld: float
    hcr: float
    rld: Optional[float]
    hgm: Optional[float]
    d_invariant: Optional[bool]
    compatibility: CompatibilityReport
    shortcut: Optional[str] = None
    sdp: Optional[dict] = None

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "theta": None if self.theta is None else [float(t) for t in self.theta],
            "sld": self.sld,
            "hcr": self.hcr,
            "hcr_minus_sld": self.hcr - self.sld,
            "rld": self.rld,
            "hgm": self.hgm,
            "d_invariant": self.d_invariant,
            "max_commutator": self.compatibility.max_commutator,
            "cost_rank": self.compatibility.cost_rank,
            "hcr_equals_sld_predicted": self.compatibility.predicts_hcr_equals_sld,
            "shortcut": self.shortcut,
            "sdp": self.sdp,
        }


@dataclass(frozen=True)
class GaussianReport:
    sld: float
    hcr: float
    rld: Optional[float]
    method: str
    measurement_cost: float
    ancilla_cov: np.ndarray
    regularized: bool

    def as_dict(self) -> dict:
        return {
            "sld": self.sld,
            "hcr": self.hcr,
            "hcr_minus_sld": self.hcr - self.sld,
            "rld": self.rld,
            "method": self.method,
            "measurement_cost": self.measurement_cost,
            "ancilla_cov": self.ancilla_cov.tolist(),
            "regularized": self.regularized,
        }


@dataclass(frozen=True)
class TableColumn:
    label: str
    family: str
    sld: float
    hcr: float
    expected_sld: float
    expected_hcr: float
    incompatible: bool
    collective_advantage: bool

    @property
    def gap(self) -> float:
        return self.hcr - self.sld


@dataclass(frozen=True)
class Table1:
    r: float
    c: float
    columns: list = field(default_factory=list)

    def rows(self) -> list:
        """One row per quantity with a value per column."""
        labels = [col.label for col in self.columns]
        return [
            {"row": "sld", **{lab: col.sld for lab, col in zip(labels, self.columns)}},
            {"row": "hcr_minus_sld", **{lab: col.gap for lab, col in zip(labels, self.columns)}},
            {"row": "incompatibility", **{lab: "+" if col.incompatible else "-" for lab, col in zip(labels, self.columns)}},
            {
                "row": "collective_advantage",
                **{lab: "+" if col.collective_advantage else "-" for lab, col in zip(labels, self.columns)},
            },
        ]


def bound_report(pt: ModelPoint, c: CostMatrix, model_name: str = "custom", shortcut: bool = False) -> BoundReport:
    """
    SLD, Holevo and, where they are defined, RLD and HGM bounds at one point.
    The RLD needs a full-rank state and the HGM a qubit; they are None otherwise.
    """
    s = sld_set(pt)
    solution = hcr_bound(pt, c, shortcut=shortcut)
    try:
        rld = rld_bound(pt, c)
    except RldUndefinedError:
        rld = None
    try:
        d_invariant = d_invariance_check(pt).invariant
    except UnsupportedError:
        d_invariant = None
    _logger.info(f"Bound report for {model_name}: hcr {solution.value:.10g}.")
    return BoundReport(
        model=model_name,
        theta=pt.theta,
        sld=sld_cr_bound(s, c),
        hcr=solution.value,
        rld=rld,
        hgm=hgm_bound(s, c) if pt.dim == 2 else None,
        d_invariant=d_invariant,
        compatibility=compatibility_report(s, c),
        shortcut=solution.shortcut,
        sdp=solution.sdp_diag,
    )


def gaussian_report(g: GaussianShiftModel, c: CostMatrix) -> GaussianReport:
    hcr = gaussian_hcr(g, c)
    try:
        rld = gaussian_rld_bound(g, c)
    except RldUndefinedError:
        rld = None
    measurement = optimal_linear_measurement(g, c)
    return GaussianReport(
        sld=gaussian_sld_bound(g, c),
        hcr=hcr.value,
        rld=rld,
        method=str(hcr.method),
        measurement_cost=measurement.cost,
        ancilla_cov=measurement.ancilla_cov,
        regularized=measurement.regularized,
    )


def _qubit_table_points(r: float, c: float):
    """(label, point, cost, closed-form sld, closed-form hcr) on the equator."""
    spread = c * (1 - r**2)
    return [
        ("theta_phi", evaluate(pure_qubit(), [_EQUATOR, 0.0]), CostMatrix.identity(2), 2.0, 4.0),
        ("r_theta", evaluate(qubit_r_theta(), [r, _EQUATOR]), CostMatrix.diag([c, r**2]), 1 + spread, 1 + spread),
        (
            "r_theta_phi",
            evaluate(qubit_bloch_spherical(), [r, _EQUATOR, 0.0]),
            CostMatrix.diag([c, r**2, r**2]),
            2 + spread,
            2 + spread + 2 * r,
        ),
    ]


def table1(r: float = 0.5, c: float = 1.0) -> Table1:
    """
    The three qubit models by SDP and their Gaussian counterparts in closed
    form. Qubit and Gaussian columns must agree with each other and with the
    closed forms.

    Raises:
        TableMismatchError: with the offending entries when any pair differs by
            more than 1e-6.
    """
    gaussians = qubit_matched_models(r)
    gaussian_costs = {
        "theta_phi": CostMatrix.identity(2),
        "r_theta": CostMatrix.diag([1.0, c]),
        "r_theta_phi": CostMatrix.diag([1.0, 1.0, c]),
    }
    gaussian_labels = {"theta_phi": "q_p", "r_theta": "q_z", "r_theta_phi": "q_p_z"}
    qubit_cols, gauss_cols = [], []
    for label, pt, cost, exp_sld, exp_hcr in _qubit_table_points(r, c):
        s = sld_set(pt)
        sld = sld_cr_bound(s, cost)
        hcr = hcr_bound(pt, cost).value
        qubit_cols.append(
            TableColumn(
                label=label,
                family="qubit",
                sld=sld,
                hcr=hcr,
                expected_sld=exp_sld,
                expected_hcr=exp_hcr,
                incompatible=hcr - sld > _TABLE_TOL,
                collective_advantage=hgm_bound(s, cost) - hcr > _TABLE_TOL,
            )
        )
        g, g_cost = gaussians[label], gaussian_costs[label]
        g_sld = gaussian_sld_bound(g, g_cost)
        g_hcr = gaussian_hcr(g, g_cost).value
        gauss_cols.append(
            TableColumn(
                label=gaussian_labels[label],
                family="gaussian",
                sld=g_sld,
                hcr=g_hcr,
                expected_sld=exp_sld,
                expected_hcr=exp_hcr,
                incompatible=g_hcr - g_sld > _TABLE_TOL,
                # the optimal linear measurement already acts on a single copy
                collective_advantage=False,
            )
        )

    mismatches = []
    for q_col, g_col in zip(qubit_cols, gauss_cols):
        for col in (q_col, g_col):
            if abs(col.sld - col.expected_sld) > _TABLE_TOL:
                mismatches.append(f"{col.label} sld {col.sld:.12g} != {col.expected_sld:.12g}")
            if abs(col.hcr - col.expected_hcr) > _TABLE_TOL:
                mismatches.append(f"{col.label} hcr {col.hcr:.12g} != {col.expected_hcr:.12g}")
        if abs(q_col.hcr - g_col.hcr) > _TABLE_TOL:
            mismatches.append(f"{q_col.label}/{g_col.label} hcr {q_col.hcr:.12g} vs {g_col.hcr:.12g}")
    if mismatches:
        _logger.error(f"Table mismatch at r={r}, c={c}: {mismatches}")
        raise TableMismatchError("Qubit and Gaussian columns disagree:\n" + "\n".join(mismatches))
    return Table1(r=r, c=c, columns=qubit_cols + gauss_cols)


def figure2_rows(radii, c: float = 1.0) -> list:
    """
    HGM, Holevo and SLD bounds of the Cartesian qubit model at (0, 0, r) with
    the cost diag(1, 1, c). At r = 0 they are 9, 3 and 3 for c = 1.
    """
    model = qubit_bloch_cartesian()
    cost = CostMatrix.diag([1.0, 1.0, c])
    rows = []
    for r in radii:
        pt = evaluate(model, [0.0, 0.0, float(r)])
        s = sld_set(pt)
        rows.append(
            {
                "r": float(r),
                "hgm": hgm_bound(s, cost),
                "hcr": hcr_bound(pt, cost).value,
                "sld": sld_cr_bound(s, cost),
            }
        )
    return rows


def figure1_rows(
    radii,
    copies=(2, 4, 8),
    trials: int = 100000,
    seed: Optional[int] = None,
    c: float = 1.0,
    estimator: RadialEstimator = RadialEstimator.one_step,
) -> list:
    """
    Long-format rows (n, r, bound_name, value, stderr) for the (r, theta)
    qubit model: the Holevo and HGM bounds, then n times the simulated cost of
    the collective strategy for each n in copies. Bound rows carry no n.

    At r = 1 the radius is known exactly and the bounds are those of the
    angle alone on a pure great circle; no collective rows are emitted there.
    """
    model = qubit_r_theta()
    rows = []
    for r in radii:
        r = min(float(r), 1.0)
        if pure := r == 1.0:
            pt, cost = evaluate(qubit_phase(1.0), [0.0]), CostMatrix.identity(1)
        else:
            pt, cost = evaluate(model, [r, _EQUATOR]), CostMatrix.diag([c, r**2])
        rows.append({"n": None, "r": r, "bound_name": "hcr", "value": hcr_bound(pt, cost).value, "stderr": 0.0})
        rows.append({"n": None, "r": r, "bound_name": "hgm", "value": hgm_bound(sld_set(pt), cost), "stderr": 0.0})
        for n in () if pure else copies:
            run = collective_estimation_run(n, r, _EQUATOR, c=c, trials=trials, seed=seed, estimator=estimator)
            rows.append(
                {"n": n, "r": r, "bound_name": "collective", "value": run.mean_cost, "stderr": run.stderr}
            )
    return rows
