"""orbit iteration, periodic orbits and their multipliers"""
import cmath
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.maps import ReversibleSystem, as_point, jacobian, polar_chart_jacobian
from src.utils import console
from src.utils.errors import EscapeError, NumericalError, ValidationError

CLASSIFY_TOL = 1e-6
TRIANGULAR_TOL = 1e-8
SYMMETRIES = ("g", "fg", "none")


def iterate(sys: ReversibleSystem, x0, n: int) -> List[np.ndarray]:
    """[x0, f(x0), ..., f^n(x0)]

    raises EscapeError carrying the partial orbit when a point leaves the
    domain of the system.
    """
    points, escaped = iterate_partial(sys, x0, n)
    if escaped is not None:
        raise EscapeError(f"orbit left the domain of '{sys.name}' at step {escaped}",
                          escape_index=escaped, partial=[p.tolist() for p in points])
    return points


def iterate_partial(sys: ReversibleSystem, x0, n: int) -> Tuple[List[np.ndarray], Optional[int]]:
    # same as iterate but returns (points so far, escape index or None)
    if n < 0:
        raise ValidationError(f"n must be >= 0, got {n}")
    x = as_point(x0)
    if not sys.in_domain(x):
        return [x], 0
    points = [x]
    for i in range(1, n + 1):
        try:
            x = sys.f(x)
        except EscapeError:
            return points, i
        if not sys.in_domain(x):
            return points, i
        points.append(x)
    return points, None


@dataclass(frozen=True)
class Classification:
    kind: str
    psi: Optional[float] = None
    moduli: Tuple[float, float] = (1.0, 1.0)

    def label(self) -> str:
        if self.kind == "elliptic":
            return f"elliptic({self.psi:.6g})"
        return self.kind


def classify(multipliers: Sequence[complex], tol: float = CLASSIFY_TOL) -> Classification:
    """stability type of a planar periodic orbit from its two multipliers"""
    if len(multipliers) != 2:
        raise ValidationError("need exactly two multipliers")
    lam, gam = (complex(m) for m in multipliers)
    moduli = tuple(sorted((abs(lam), abs(gam))))
    for unit in (1.0, -1.0):
        if abs(lam - unit) <= tol and abs(gam - unit) <= tol:
            return Classification("parabolic", moduli=moduli)
    below = moduli[1] < 1.0 - tol
    above = moduli[0] > 1.0 + tol
    if below:
        return Classification("sink", moduli=moduli)
    if above:
        return Classification("source", moduli=moduli)
    if abs(lam.imag) > tol:
        if abs(moduli[0] - 1.0) <= tol and abs(moduli[1] - 1.0) <= tol:
            return Classification("elliptic", psi=abs(cmath.phase(lam)), moduli=moduli)
        return Classification("borderline", moduli=moduli)
    if moduli[1] > 1.0 + tol and moduli[0] < 1.0 - tol:
        return Classification("saddle", moduli=moduli)
    return Classification("borderline", moduli=moduli)


@dataclass(frozen=True)
class PeriodicOrbit:
    points: Tuple[Tuple[float, float], ...]
    period: int
    monodromy: Tuple[Tuple[float, float], Tuple[float, float]]
    multipliers: Tuple[complex, complex]
    jacobian_product: float
    classification: Classification
    symmetry: str = "none"
    seed: Optional[float] = None
    residual: float = 0.0

    @property
    def kind(self) -> str:
        return self.classification.kind

    def as_dict(self) -> dict:
        return {
            "period": self.period,
            "symmetry": self.symmetry,
            "class": self.classification.kind,
            "psi": self.classification.psi,
            "moduli": list(self.classification.moduli),
            "multipliers": [[m.real, m.imag] for m in self.multipliers],
            "J": self.jacobian_product,
            "points": [list(p) for p in self.points],
            "seed": self.seed,
            "residual": self.residual,
        }


def monodromy(sys: ReversibleSystem, points: Sequence[np.ndarray]) -> np.ndarray:
    # product of jacobians along the orbit, last point on the left
    m = np.eye(2)
    for p in points:
        m = jacobian(sys.f, p) @ m
    return m


def multipliers_of(m: np.ndarray) -> Tuple[complex, complex]:
    ev = np.linalg.eigvals(np.asarray(m, dtype=float))
    lam, gam = sorted((complex(e) for e in ev), key=lambda e: (abs(e), e.imag))
    return lam, gam


@dataclass(frozen=True)
class MonodromyFrame:
    """coordinates in which a monodromy is known to be triangular

    a near-identity monodromy with a large shear has eigenvalues that are
    ill-conditioned: rounding in the small off-diagonal entry moves them by
    its square root times the shear. when the entry `zero` vanishes
    structurally in the chart given by `chart_jacobian`, the multipliers are
    the diagonal of the conjugated matrix.
    """

    chart_jacobian: Callable[[np.ndarray], np.ndarray]
    zero: Tuple[int, int] = (0, 1)
    name: str = "frame"

    def conjugate(self, m: np.ndarray, at) -> np.ndarray:
        # similarity at the base point keeps the spectrum
        c = np.asarray(self.chart_jacobian(as_point(at)), dtype=float)
        return c @ np.asarray(m, dtype=float) @ np.linalg.inv(c)

    def multipliers(self, m: np.ndarray, at) -> Tuple[complex, complex]:
        framed = self.conjugate(m, at)
        i, j = self.zero
        if abs(framed[i, j]) > TRIANGULAR_TOL * max(1.0, float(np.max(np.abs(framed)))):
            raise NumericalError(
                f"monodromy is not triangular in the {self.name} frame",
                {"entry": [i, j], "value": float(framed[i, j]), "monodromy": framed.tolist()},
            )
        lam, gam = sorted((complex(framed[0, 0]), complex(framed[1, 1])), key=abs)
        return lam, gam


POLAR_FRAME = MonodromyFrame(polar_chart_jacobian, (0, 1), "polar")


def build_orbit(sys: ReversibleSystem, x0, period: int, symmetry: str = "none", seed: Optional[float] = None,
                tol: float = CLASSIFY_TOL, frame: Optional[MonodromyFrame] = None) -> PeriodicOrbit:
    """periodic orbit record from one of its points

    with a frame the multipliers are read off its triangular form, otherwise
    they are the eigenvalues of the monodromy.
    """
    if period < 1:
        raise ValidationError("period must be positive")
    if symmetry not in SYMMETRIES:
        raise ValidationError(f"symmetry must be one of {SYMMETRIES}")
    points = iterate(sys, x0, period)
    closing = points.pop()
    m = monodromy(sys, points)
    lam, gam = multipliers_of(m) if frame is None else frame.multipliers(m, points[0])
    return PeriodicOrbit(
        points=tuple((float(p[0]), float(p[1])) for p in points),
        period=period,
        monodromy=tuple(tuple(float(v) for v in row) for row in m),
        multipliers=(lam, gam),
        jacobian_product=float(np.linalg.det(m)),
        classification=classify((lam, gam), tol),
        symmetry=symmetry,
        seed=seed,
        residual=sys.distance(closing, points[0]),
    )


def smallest_period(sys: ReversibleSystem, x0, bound: int, tol: float) -> Optional[int]:
    """smallest divisor d of bound with f^d(x0) = x0 within tol"""
    points, escaped = iterate_partial(sys, x0, bound)
    if escaped is not None:
        return None
    start = points[0]
    for d in range(1, bound + 1):
        if bound % d == 0 and sys.distance(points[d], start) <= tol:
            return d
    return None


def same_orbit(sys: ReversibleSystem, a: PeriodicOrbit, b: PeriodicOrbit, tol: float) -> bool:
    if a.period != b.period:
        return False
    return all(min(sys.distance(p, q) for q in b.points) <= tol for p in a.points)


def _match(expected: Sequence[complex], got: Sequence[complex], tol: float) -> float:
    # worst relative mismatch between two multiplier pairs, best of both orderings
    best = math.inf
    for order in (got, tuple(reversed(got))):
        worst = max(abs(e - o) / max(1.0, abs(e)) for e, o in zip(expected, order))
        best = min(best, worst)
    return best


def g_pair(sys: ReversibleSystem, orbit: PeriodicOrbit, tol: float = 1e-6,
           classify_tol: Optional[float] = None, frame: Optional[MonodromyFrame] = None) -> PeriodicOrbit:
    """image of the orbit under the reversor, with its own monodromy

    the image of a symmetric orbit is the orbit itself. classify_tol is the
    multiplier collar for the image (defaults to tol), frame is passed on to
    build_orbit.
    """
    n = orbit.period
    pts = [np.asarray(p) for p in orbit.points]
    image = [sys.g(pts[(-i) % n]) for i in range(n)]
    set_tol = 10.0 * max(tol, orbit.residual)
    invariant = all(min(sys.distance(p, q) for q in pts) <= set_tol for p in image)
    if orbit.symmetry != "none" or invariant:
        if not invariant:
            raise NumericalError("orbit tagged symmetric is not invariant under g",
                                 {"period": n, "symmetry": orbit.symmetry})
        return orbit
    paired = build_orbit(sys, image[0], n, "none", orbit.seed, tol if classify_tol is None else classify_tol, frame)
    expected = tuple(1.0 / m for m in orbit.multipliers)
    mismatch = _match(expected, paired.multipliers, tol)
    if mismatch > tol:
        raise NumericalError(
            "multipliers of the g-image are not inverse to the originals",
            {"original": [[m.real, m.imag] for m in orbit.multipliers],
             "image": [[m.real, m.imag] for m in paired.multipliers], "mismatch": mismatch},
        )
    console.debug("ORBITS", f"g-pair of a period-{n} {orbit.kind} is a {paired.kind}")
    return paired
