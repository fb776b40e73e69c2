"""rotation numbers by weighted birkhoff averaging

the angular increments theta_{n+1} - theta_n on the lift are averaged with
the smooth bump w(t) = exp(-1 / (t (1 - t))), t = n / N, normalized to sum 1.
for orbits on diophantine circles this converges faster than any power of
1/N. the error bound is the step doubling difference |avg(N) - avg(N/2)|.
"""
import math
from dataclasses import dataclass

import numpy as np

from src.core.maps import ReversibleSystem
from src.kam.charts import AnnulusChart
from src.orbits.orbit import iterate
from src.utils.errors import ValidationError

METHOD = "weighted-birkhoff"
MIN_ITERATES = 16


@dataclass(frozen=True)
class RotationNumberEstimate:
    value: float
    error: float
    iterates: int
    method: str = METHOD

    def as_dict(self) -> dict:
        return {"psi0": self.value, "error": self.error, "N": self.iterates, "method": self.method}


def bump_weights(count: int) -> np.ndarray:
    t = (np.arange(count) + 0.5) / count
    w = np.exp(-1.0 / (t * (1.0 - t)))
    return w / w.sum()


def weighted_average(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.dot(bump_weights(len(values)), values))


def rotation_from_angles(angles) -> RotationNumberEstimate:
    """estimate from a lifted angle sequence theta_0 .. theta_N"""
    steps = np.diff(np.asarray(angles, dtype=float))
    if len(steps) < MIN_ITERATES:
        raise ValidationError(f"need at least {MIN_ITERATES} iterates, got {len(steps)}")
    full = weighted_average(steps)
    half = weighted_average(steps[: len(steps) // 2])
    return RotationNumberEstimate(full, abs(full - half), len(steps))


def rotation_number(sys: ReversibleSystem, chart: AnnulusChart, x0, count: int) -> RotationNumberEstimate:
    """rotation number of the orbit of x0, in turns per iterate"""
    points = iterate(sys, x0, count)
    return rotation_from_angles(chart.lift_angles(points))


def image_rotation_number(sys: ReversibleSystem, chart: AnnulusChart, x0, count: int) -> RotationNumberEstimate:
    """rotation number of the sequence g(x0), g(f x0), g(f^2 x0), ...

    that sequence is an orbit of f^{-1}; measured in the same lift it turns
    the other way, so the value is minus the one of the orbit itself.
    """
    points = [sys.g(p) for p in iterate(sys, x0, count)]
    return rotation_from_angles(chart.lift_angles(points))


def rotation_profile(sys: ReversibleSystem, chart: AnnulusChart, rhos, count: int):
    # one estimate per chart radius, orbits started at theta = 0
    return [rotation_number(sys, chart, chart.from_chart(float(r), 0.0), count) for r in rhos]


def find_circle(sys: ReversibleSystem, chart: AnnulusChart, target: float, rho_bracket, count: int = 2000,
                xtol: float = 1e-13) -> float:
    """chart radius on the theta = 0 line whose orbit turns at the target rate"""
    from scipy.optimize import brentq

    lo, hi = (float(v) for v in rho_bracket)

    def gap(rho):
        return rotation_number(sys, chart, chart.from_chart(rho, 0.0), count).value - target

    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo * g_hi > 0 or math.isnan(g_lo * g_hi):
        raise ValidationError(f"rotation {target} is not bracketed by rho in [{lo}, {hi}]",
                              {"at_lo": g_lo + target, "at_hi": g_hi + target})
    return float(brentq(gap, lo, hi, xtol=xtol))
