"""twist condition and the averaged form of the map near a circle"""
import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from src.core.maps import ReversibleSystem
from src.kam.charts import AnnulusChart
from src.kam.rotation import RotationNumberEstimate, rotation_profile
from src.utils.errors import LabError, ValidationError
from src.utils.helpers import loglog_slope

NOISE_CAP = 1e-3
EXACT_FLOOR = 1e-13
SLOPE_MIN = 2.5


@dataclass(frozen=True)
class TwistReport:
    slope: float
    uncertainty: float
    verdict: str
    rhos: List[float] = field(default_factory=list)
    estimates: List[RotationNumberEstimate] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> dict:
        return {"slope": self.slope, "uncertainty": self.uncertainty, "verdict": self.verdict,
                "rhos": list(self.rhos), "rotation": [e.as_dict() for e in self.estimates]}


def twist_check(sys: ReversibleSystem, chart: AnnulusChart, rho_window: Sequence[float], steps: int,
                offsets: int = 5, noise_cap: float = NOISE_CAP) -> TwistReport:
    """d psi / d rho across the window from rotation numbers of nearby orbits

    pass when |slope| > 3 uncertainty and the rotation number moves by more
    than rounding across the window; inconclusive when the uncertainty is
    above noise_cap; fail otherwise.
    """
    lo, hi = (float(v) for v in rho_window)
    if not lo < hi:
        raise ValidationError("rho window must be ordered")
    if offsets < 4:
        raise ValidationError("twist check needs at least 4 radii")
    rhos = np.linspace(lo, hi, offsets)
    estimates = rotation_profile(sys, chart, rhos, steps)
    values = np.array([e.value for e in estimates])
    coef, cov = np.polyfit(rhos, values, 1, cov=True)
    slope = float(coef[0])
    fit_unc = float(math.sqrt(max(cov[0, 0], 0.0)))
    # error bounds of the estimates spread over the window
    bound_unc = max(e.error for e in estimates) * 2.0 / (hi - lo)
    unc = max(fit_unc, bound_unc)
    # a change across the window at rounding level is no twist
    if abs(slope) > 3.0 * unc and abs(slope) * (hi - lo) > EXACT_FLOOR:
        verdict = "pass"
    elif unc > noise_cap:
        verdict = "inconclusive"
    else:
        verdict = "fail"
    return TwistReport(slope, unc, verdict, [float(r) for r in rhos], estimates)


@dataclass(frozen=True)
class AveragedFormReport:
    rhos: List[float]
    radial: List[float]
    angular: List[float]
    psi_coeffs: List[float]
    radial_slope: float
    angular_slope: float
    passed: bool
    exact: bool = False

    def as_dict(self) -> dict:
        return {"rhos": self.rhos, "radial_residual": self.radial, "angular_residual": self.angular,
                "psi_coeffs": self.psi_coeffs, "radial_slope": self.radial_slope,
                "angular_slope": self.angular_slope, "passed": self.passed, "exact": self.exact}


def averaged_form_fit(sys: ReversibleSystem, chart: AnnulusChart, rhos: Sequence[float], thetas: int = 32,
                      degree: int = 2) -> AveragedFormReport:
    """compare one step of f in the chart with rho -> rho, theta -> theta + Psi(rho)

    Psi is a least squares polynomial in rho of the given degree (with
    linear term, the twist lives there). residuals are the worst over theta
    at each rho; pass when both fall off like rho^3 or faster.
    """
    rhos = sorted(float(r) for r in rhos)
    if len(set(rhos)) < 2:
        raise ValidationError("averaged form fit needs samples at two or more radii")
    if any(r <= 0 for r in rhos):
        raise ValidationError("radii must be positive")
    radial = []
    advances = []
    for rho in rhos:
        rows = []
        for theta in np.linspace(0.0, 1.0, thetas, endpoint=False):
            p = chart.from_chart(rho, float(theta))
            try:
                rho1, theta1 = chart.to_chart(sys.f(p))
            except LabError as exc:
                raise LabError(f"image of chart point (rho={rho:.3g}, theta={theta:.3f}) left the chart: {exc}",
                               exc.diagnostics) from exc
            step = theta1 - theta
            if not chart.lifted:
                step = step % 1.0
            rows.append((rho1 - rho, step))
        rows = np.array(rows)
        radial.append(float(np.max(np.abs(rows[:, 0]))))
        advances.append(rows[:, 1])
    xs = np.repeat(rhos, thetas)
    ys = np.concatenate(advances)
    psi = np.polyfit(xs, ys, min(degree, len(rhos) - 1))
    angular = [float(np.max(np.abs(adv - np.polyval(psi, r)))) for r, adv in zip(rhos, advances)]
    exact = max(radial + angular) <= EXACT_FLOOR
    if exact:
        r_slope = a_slope = math.inf
        passed = True
    else:
        r_slope = _slope_or_inf(rhos, radial)
        a_slope = _slope_or_inf(rhos, angular)
        passed = r_slope >= SLOPE_MIN and a_slope >= SLOPE_MIN
    return AveragedFormReport(rhos, radial, angular, [float(c) for c in psi], r_slope, a_slope, passed, exact)


def _slope_or_inf(xs, ys) -> float:
    # residuals at the floating point floor carry no slope information
    if max(ys) <= EXACT_FLOOR:
        return math.inf
    return loglog_slope(xs, ys)
