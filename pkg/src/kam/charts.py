"""annulus charts (rho, theta), theta measured in turns

PolarChart        rho = |p - c|, theta = arg(p - c) / 2 pi, unwrapped per orbit
CylinderChart     rho = y - y0, theta = x / 2 pi, x already is the lift
InvariantCurveChart
                  fitted from a family of invariant circles of a cylinder map,
                  p = K(theta, rho) with K(., rho) conjugating f to a rotation
"""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import root

from src.core.maps import ReversibleSystem
from src.utils import console
from src.utils.errors import NumericalError, ValidationError

AMBIGUOUS_STEP = 0.45


class AnnulusChart(ABC):
    # lifted charts skip unwrapping
    lifted = False
    deck: Optional[Tuple[float, float]] = None

    @abstractmethod
    def to_chart(self, p) -> Tuple[float, float]:
        """(rho, theta) of a plane point"""

    @abstractmethod
    def from_chart(self, rho: float, theta: float) -> np.ndarray:
        """plane point at (rho, theta)"""

    def radius(self, p) -> float:
        return self.to_chart(p)[0]

    def lift_angles(self, points: Sequence[np.ndarray]) -> np.ndarray:
        """theta along an orbit on the lift, starting from the chart value of the first point"""
        raw = np.array([self.to_chart(p)[1] for p in points])
        if self.lifted or len(raw) < 2:
            return raw
        steps = (np.diff(raw) + 0.5) % 1.0 - 0.5
        worst = float(np.max(np.abs(steps)))
        if worst >= AMBIGUOUS_STEP:
            raise NumericalError(
                f"angular step {worst:.3f} turns is too close to a half turn, winding is ambiguous; "
                "use a finer chart or an iterate of the map",
                {"max_step": worst},
            )
        return raw[0] + np.concatenate(([0.0], np.cumsum(steps)))


@dataclass(frozen=True)
class PolarChart(AnnulusChart):
    center: Tuple[float, float] = (0.0, 0.0)

    def to_chart(self, p) -> Tuple[float, float]:
        dx, dy = p[0] - self.center[0], p[1] - self.center[1]
        return math.hypot(dx, dy), math.atan2(dy, dx) / (2.0 * math.pi)

    def from_chart(self, rho: float, theta: float) -> np.ndarray:
        a = 2.0 * math.pi * theta
        return np.array([self.center[0] + rho * math.cos(a), self.center[1] + rho * math.sin(a)])


@dataclass(frozen=True)
class CylinderChart(AnnulusChart):
    y0: float = 0.0
    lifted = True
    deck = (2.0 * math.pi, 0.0)

    def to_chart(self, p) -> Tuple[float, float]:
        return float(p[1] - self.y0), float(p[0] / (2.0 * math.pi))

    def from_chart(self, rho: float, theta: float) -> np.ndarray:
        return np.array([2.0 * math.pi * theta, self.y0 + rho])


def _basis(theta, modes: int) -> np.ndarray:
    # columns 1, cos 2 pi j theta, sin 2 pi j theta for j = 1..modes
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    cols = [np.ones_like(theta)]
    for j in range(1, modes + 1):
        a = 2.0 * math.pi * j * theta
        cols.append(np.cos(a))
        cols.append(np.sin(a))
    return np.column_stack(cols)


def _basis_dtheta(theta: float, modes: int) -> np.ndarray:
    out = [0.0]
    for j in range(1, modes + 1):
        a = 2.0 * math.pi * j * theta
        w = 2.0 * math.pi * j
        out.append(-w * math.sin(a))
        out.append(w * math.cos(a))
    return np.array(out)


@dataclass(frozen=True)
class InvariantCurveChart(AnnulusChart):
    """p = (2 pi theta + X(theta, rho), Y(theta, rho))

    X and Y are trigonometric polynomials in theta whose coefficients are
    polynomials in rho. rho = 0 is the reference circle, rho labels the
    neighbouring circles by their offset along the symmetry line x = 0.
    """

    coeffs: Tuple[Tuple[Tuple[float, ...], ...], ...] = ()
    omega_coeffs: Tuple[float, ...] = ()
    modes: int = 0
    y0: float = 0.0
    lifted = True
    deck = (2.0 * math.pi, 0.0)

    def _stack(self, rho: float) -> np.ndarray:
        # (2, basis) coefficient block at this rho, coeffs[power][axis][basis]
        c = np.asarray(self.coeffs)
        powers = np.array([rho ** k for k in range(c.shape[0])])
        return np.tensordot(powers, c, axes=1)

    def _stack_drho(self, rho: float) -> np.ndarray:
        c = np.asarray(self.coeffs)
        powers = np.array([k * rho ** (k - 1) if k else 0.0 for k in range(c.shape[0])])
        return np.tensordot(powers, c, axes=1)

    def rotation(self, rho: float) -> float:
        return float(np.polyval(self.omega_coeffs, rho))

    def from_chart(self, rho: float, theta: float) -> np.ndarray:
        b = _basis(theta, self.modes)[0]
        x_part, y_part = self._stack(rho) @ b
        return np.array([2.0 * math.pi * theta + x_part, y_part])

    def _jac(self, rho: float, theta: float) -> np.ndarray:
        b = _basis(theta, self.modes)[0]
        db = _basis_dtheta(theta, self.modes)
        stack = self._stack(rho)
        d_theta = stack @ db + np.array([2.0 * math.pi, 0.0])
        d_rho = self._stack_drho(rho) @ b
        return np.column_stack((d_rho, d_theta))

    def to_chart(self, p) -> Tuple[float, float]:
        p = np.asarray(p, dtype=float)
        guess = np.array([p[1] - self.y0, p[0] / (2.0 * math.pi)])
        sol = root(lambda v: self.from_chart(v[0], v[1]) - p, guess, jac=lambda v: self._jac(v[0], v[1]),
                   method="hybr", options={"xtol": 1e-14})
        err = float(np.linalg.norm(self.from_chart(sol.x[0], sol.x[1]) - p))
        if err > 1e-10:
            raise NumericalError("point is outside the fitted chart", {"point": p.tolist(), "residual": err})
        return float(sol.x[0]), float(sol.x[1])


def fit_circle(sys: ReversibleSystem, x0, omega: float, count: int, modes: int) -> Tuple[np.ndarray, float]:
    """fourier coefficients of X, Y along one rotational invariant circle

    the orbit phase is theta_n = n * omega, so K(0) is the starting point.
    returns a (2, 2 modes + 1) block and the worst fit residual.
    """
    pts = np.empty((count, 2))
    x = np.asarray(x0, dtype=float)
    for n in range(count):
        pts[n] = x
        x = sys.f(x)
    theta = omega * np.arange(count)
    design = _basis(theta, modes)
    x_part = pts[:, 0] - 2.0 * math.pi * theta
    block, _, _, _ = np.linalg.lstsq(design, np.column_stack((x_part, pts[:, 1])), rcond=None)
    fitted = design @ block
    worst = float(np.max(np.abs(fitted - np.column_stack((x_part, pts[:, 1])))))
    return block.T, worst


def fit_invariant_chart(sys: ReversibleSystem, y0: float, offsets: Sequence[float], count: int = 4000,
                        modes: int = 24, degree: int = 2) -> InvariantCurveChart:
    """chart from circles started at (0, y0 + offset), offsets must include 0"""
    from src.kam.rotation import rotation_number

    offsets = sorted(float(o) for o in offsets)
    if len(offsets) < degree + 1:
        raise ValidationError(f"need at least {degree + 1} circle offsets for a degree {degree} chart")
    if 2 * modes + 1 >= count:
        raise ValidationError("more fourier modes than orbit samples")
    cylinder = CylinderChart(y0)
    blocks, omegas = [], []
    for off in offsets:
        start = np.array([0.0, y0 + off])
        est = rotation_number(sys, cylinder, start, count)
        block, worst = fit_circle(sys, start, est.value, count, modes)
        if worst > 1e-8:
            console.warn("KAM", f"circle at offset {off:.3g} fits to {worst:.2e} only, it may not be invariant")
        blocks.append(block)
        omegas.append(est.value)
    stacked = np.array(blocks)  # (offsets, 2, basis)
    flat = stacked.reshape(len(offsets), -1)
    fit = np.polyfit(offsets, flat, degree)  # (degree + 1, 2 * basis), highest power first
    coeffs = fit[::-1].reshape(degree + 1, 2, -1)
    omega_coeffs = np.polyfit(offsets, omegas, degree)
    return InvariantCurveChart(
        coeffs=tuple(tuple(tuple(float(v) for v in axis) for axis in power) for power in coeffs),
        omega_coeffs=tuple(float(c) for c in omega_coeffs),
        modes=modes, y0=y0,
    )


def curve_samples(points: Sequence[np.ndarray], deck: Optional[Tuple[float, float]]) -> np.ndarray:
    # points reduced into one fundamental domain of the deck translation
    pts = np.asarray(points, dtype=float).copy()
    if deck is not None:
        axis = int(np.argmax(np.abs(deck)))
        pts[:, axis] = pts[:, axis] % abs(deck[axis])
    return pts


def padded(points: np.ndarray, deck: Optional[Tuple[float, float]]) -> np.ndarray:
    # copies shifted by -deck, 0, +deck so distances across the seam are right
    if deck is None:
        return points
    shift = np.asarray(deck, dtype=float)
    return np.vstack((points - shift, points, points + shift))


def chart_for(sys: ReversibleSystem, y0: float = 0.0) -> AnnulusChart:
    """default chart of a built-in system"""
    if sys.name == "twist-std":
        return CylinderChart(y0)
    return PolarChart()
