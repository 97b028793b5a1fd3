"""
Closed-form weak-probe solutions (zeroth order in the probe, and first-order
rho13), transcribed term by term from the published coefficient block.

This module is a diagnostic. The numeric solver in physics.liouvillian is the
source of truth for chi''. The printed forms reference each other out of
order, so they are evaluated as:
    A-table -> C-table -> zeroth-order elements -> rho21(1) -> B-table -> rho13(1)
rho23(0) is never printed; it is taken as conj(rho32(0)).
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import InvalidParameters, SingularDenominator
from core.params import SystemParams, require_valid
from physics.liouvillian import SolverOptions, steady_state

logger = logging.getLogger(__name__)

DENOMINATOR_FLOOR = 1e-14


def _checked(name: str, value: complex) -> complex:
    if not abs(value) >= DENOMINATOR_FLOOR:
        raise SingularDenominator(
            f"closed-form denominator {name} vanishes (|{name}| = {abs(value):.3e})",
            {"denominator": name},
        )
    return value


@dataclass(frozen=True)
class ZerothOrder:
    """Probe-free matrix elements (rho13 = conj(rho31), rho23 = conj(rho32))."""

    rho21: complex
    rho31: complex
    rho32: complex
    inversion: complex  # rho11 - rho33

    @property
    def rho12(self) -> complex:
        return self.rho21.conjugate()

    @property
    def rho13(self) -> complex:
        return self.rho31.conjugate()

    @property
    def rho23(self) -> complex:
        return self.rho32.conjugate()


@dataclass(frozen=True)
class CoefficientTable:
    """A0..A9, B0..B5, C0..C9 evaluated for one (params, Omega_c)."""

    a: Tuple[complex, ...]
    b: Tuple[complex, ...]
    c: Tuple[complex, ...]

    def as_dict(self) -> Dict[str, complex]:
        table = {}
        for prefix, values in (("A", self.a), ("B", self.b), ("C", self.c)):
            for k, value in enumerate(values):
                table[f"{prefix}{k}"] = value
        return table


# ============= COEFFICIENTS =============

def _a_table(params: SystemParams, wc: float) -> List[complex]:
    g1, g2, G = params.gamma1, params.gamma2, params.pump
    dp, dc = params.delta_p, params.delta_c
    wc2 = wc * wc
    return [
        complex(g1 + g2),
        complex(2 * G * dc * g2),
        complex(2 * G * g1 * g2 + 2 * G * wc2 + 2 * G * g2 ** 2 + wc2 * g1),
        complex(2 * G * wc * g2),
        complex(-2 * G * wc2 - g1 * wc2),
        1j * g2 * dc + g2 ** 2,
        complex(dc ** 2 + g2 ** 2),
        dc + 1j * g1 + 1j * g2,
        G + 1j * dp + g1 + g2,
        dc - 1j * g1 - 1j * g2,
    ]


def _c_table(params: SystemParams, a: Sequence[complex]) -> List[complex]:
    g1, g2, G = params.gamma1, params.gamma2, params.pump
    dp, dc = params.delta_p, params.delta_c
    return [
        complex(g1 + 2 * g2),
        -a[8],
        -dc + 1j * g1 + 1j * g2,
        G - 1j * (dc - dp),
        complex(2 * G + g1),
        -G - 1j * dc + 1j * dp,
        -G - g1 - g2 + 1j * dp,
        1j * dc - g1 - g2,
        -1j * dc * g2 + g2 ** 2,
        g2 ** 2 + 1j * dc * g2,
    ]


def _zeroth(params: SystemParams, wc: float, a: Sequence[complex], c: Sequence[complex]) -> Tuple[ZerothOrder, complex, complex]:
    """Zeroth-order elements plus B2 and B3, which only they use."""
    g1, g2, G = params.gamma1, params.gamma2, params.pump
    sgc = params.p * math.sqrt(g1 * g2)
    wc2 = wc * wc

    d21 = _checked("A1^2 + A2^2 - A4^2", a[1] ** 2 + a[2] ** 2 - a[4] ** 2)
    rho21 = (a[1] - 1j * (a[2] + a[4])) * a[3] / d21

    d31 = _checked(
        "(Wc^2 + C5 C6)(Wc^2 C4 - 2 g2 G C7)",
        (wc2 + c[5] * c[6]) * (wc2 * c[4] - 2 * g2 * G * c[7]),
    )
    rho31 = 2 * G * wc2 * (-1j * wc + c[7] * rho21) * sgc / d31

    b2 = wc * d21 + a[3] * c[2] * (a[1] + 1j * (a[2] + a[4]))
    b3 = wc2 * c[4] + 2j * c[2] * G * g2
    d32 = _checked("(A1^2 + A2^2 - A4^2)(Wc^2 - C1 C3) B3", d21 * (wc2 - c[1] * c[3]) * b3)
    rho32 = -2 * sgc * G * wc * c[1] * b2 / d32

    dinv = _checked(
        "2G(Wc^2 + A5) + g1(Wc^2 + 2 G g2)",
        2 * G * (wc2 + a[5]) + g1 * (wc2 + 2 * G * g2),
    )
    inversion = wc * (wc + c[2] * rho21) * (G - g1) / dinv

    return ZerothOrder(rho21=rho21, rho31=rho31, rho32=rho32, inversion=inversion), b2, b3


def zeroth_order(params: SystemParams, omega_c: float) -> ZerothOrder:
    """
    Probe-free closed forms rho21(0), rho31(0), rho32(0), rho11(0) - rho33(0).

    Raises:
        SingularDenominator: a printed denominator is below 1e-14 in magnitude
    """
    require_valid(params)
    wc = float(omega_c)
    a = _a_table(params, wc)
    c = _c_table(params, a)
    zeroth, _, _ = _zeroth(params, wc, a, c)
    return zeroth


def _first_order(params: SystemParams, wc: float) -> Tuple[Tuple[complex, complex], complex, CoefficientTable, ZerothOrder]:
    g1, g2, G = params.gamma1, params.gamma2, params.pump
    wp = params.omega_p
    sgc = params.p * math.sqrt(g1 * g2)
    wc2 = wc * wc

    a = _a_table(params, wc)
    c = _c_table(params, a)
    z, b2, b3 = _zeroth(params, wc, a, c)

    b4 = 2j * G + wp * (z.rho13 - z.rho31)
    b5 = wc2 * wp * c[4] * (z.rho23 - z.rho32)
    d21 = _checked(
        "2 Wc^2 A0 C4 + 2 G (A6 + C0 g1) g2",
        2 * wc2 * a[0] * c[4] + 2 * G * (a[6] + c[0] * g1) * g2,
    )
    rho21_1 = -1j * (2 * G * wp * z.rho23 * (c[9] + g1 * g2) + wc * a[9] * g2 * b4 + b5) / d21

    b0 = wp * wc * (z.rho13 - z.rho31) + 2j * G * (wc + c[2] * rho21_1 + wp * z.rho32)
    b1 = _checked("B1", wc2 * c[4] - 2j * G * c[2] * g2)
    d13 = _checked("Wc^2 - C1 C3", wc2 - c[1] * c[3])

    direct = (wc * wp * z.rho21 - 1j * wp * c[3] * z.rho23) / d13
    sgc_branch = sgc * wc2 * b0 / (d13 * b1)

    table = CoefficientTable(a=tuple(a), b=(b0, b1, b2, b3, b4, b5), c=tuple(c))
    return (direct, sgc_branch), rho21_1, table, z


def coefficient_table(params: SystemParams, omega_c: float) -> CoefficientTable:
    """All printed coefficients, including the state-dependent B0, B2, B4, B5."""
    require_valid(params)
    _, _, table, _ = _first_order(params, float(omega_c))
    return table


def rho21_first_order(params: SystemParams, omega_c: float) -> complex:
    require_valid(params)
    _, rho21_1, _, _ = _first_order(params, float(omega_c))
    return rho21_1


def rho13_first_order(params: SystemParams, omega_c: float) -> complex:
    """
    First-order probe coherence rho13(1), evaluated verbatim.

    The second term carries the factor p sqrt(gamma1 gamma2) and vanishes at
    theta = pi/2; both terms vanish at Omega_c = 0.
    """
    direct, sgc_branch = rho13_first_order_terms(params, omega_c)
    return direct + sgc_branch


def rho13_first_order_terms(params: SystemParams, omega_c: float) -> Tuple[complex, complex]:
    """The two printed fractions of rho13(1): (direct term, SGC term)."""
    require_valid(params)
    terms, _, _, _ = _first_order(params, float(omega_c))
    return terms


# ============= DISCREPANCY HARNESS =============

@dataclass(frozen=True)
class DiscrepancyPoint:
    """Analytic vs numeric Im[rho13 / Omega_p] at one sample."""

    theta: float
    pump: float
    omega_p: float
    delta_c: float
    delta_p: float
    omega_c: float
    numeric_re: float
    numeric_im: float
    analytic_re: Optional[float] = None
    analytic_im: Optional[float] = None
    abs_difference: Optional[float] = None
    rel_difference: Optional[float] = None
    flag: Optional[str] = None

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


@dataclass(frozen=True)
class DiscrepancyReport:
    """Per-point comparison plus summary; deterministic and JSON-ready."""

    points: List[DiscrepancyPoint] = field(default_factory=list)

    @property
    def max_abs_difference(self) -> Optional[float]:
        diffs = [pt.abs_difference for pt in self.points if pt.abs_difference is not None]
        return max(diffs) if diffs else None

    @property
    def flagged_count(self) -> int:
        return sum(1 for pt in self.points if pt.flag is not None)

    def to_dict(self) -> Dict[str, object]:
        return {
            "max_abs_difference": self.max_abs_difference,
            "flagged_count": self.flagged_count,
            "point_count": len(self.points),
            "points": [pt.to_dict() for pt in self.points],
        }


def discrepancy_report(
    params_list: Sequence[SystemParams],
    omega_c_list: Sequence[float],
    opts: Optional[SolverOptions] = None,
) -> DiscrepancyReport:
    """
    Compare the printed rho13(1) against the numeric steady state, point by point.

    A vanishing closed-form denominator is recorded as a flagged entry rather
    than aborting the report; numeric solver errors propagate.
    """
    if len(params_list) == 0:
        raise InvalidParameters(["params_list must be nonempty"])
    if len(params_list) != len(omega_c_list):
        raise InvalidParameters(
            [f"params_list and omega_c_list must have equal length ({len(params_list)} != {len(omega_c_list)})"]
        )

    points = []
    for params, omega_c in zip(params_list, omega_c_list):
        state = steady_state(params, omega_c, opts)
        numeric = state.element(1, 3) / params.omega_p
        base = dict(
            theta=params.theta,
            pump=params.pump,
            omega_p=params.omega_p,
            delta_c=params.delta_c,
            delta_p=params.delta_p,
            omega_c=float(omega_c),
            numeric_re=float(numeric.real),
            numeric_im=float(numeric.imag),
        )
        try:
            analytic = rho13_first_order(params, omega_c) / params.omega_p
        except SingularDenominator as e:
            logger.warning("closed form undefined at omega_c=%.4g: %s", omega_c, e.message)
            points.append(DiscrepancyPoint(**base, flag=e.message))
            continue

        diff = abs(float(analytic.imag) - float(numeric.imag))
        rel = diff / abs(numeric.imag) if numeric.imag != 0 else None
        points.append(
            DiscrepancyPoint(
                **base,
                analytic_re=float(analytic.real),
                analytic_im=float(analytic.imag),
                abs_difference=diff,
                rel_difference=rel,
            )
        )

    report = DiscrepancyReport(points=points)
    logger.info(
        "analytic cross-check: %d points, max |difference| = %s",
        len(points), report.max_abs_difference,
    )
    return report


def zeroth_order_residuals(params: SystemParams, omega_c: float, opts: Optional[SolverOptions] = None) -> Dict[str, float]:
    """|closed form - numeric| for each zeroth-order element (numeric solve with the probe off)."""
    probe_off = params.model_copy(update={"omega_p": 0.0})
    state = steady_state(probe_off, omega_c, opts)
    z = zeroth_order(params, omega_c)
    numeric = {
        "rho21": state.element(2, 1),
        "rho31": state.element(3, 1),
        "rho32": state.element(3, 2),
        "inversion": state.element(1, 1) - state.element(3, 3),
    }
    analytic = {"rho21": z.rho21, "rho31": z.rho31, "rho32": z.rho32, "inversion": z.inversion}
    return {key: float(np.abs(analytic[key] - numeric[key])) for key in numeric}
