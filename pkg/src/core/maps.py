"""planar maps, involutions and reversible systems

points are numpy float arrays of shape (2,). complex numbers z = x + iy
only show up inside the normal form code.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.utils import console
from src.utils.errors import EscapeError, LabError, NumericalError, ValidationError
from src.utils.helpers import random_points

PointFn = Callable[[np.ndarray], np.ndarray]
MatrixFn = Callable[[np.ndarray], np.ndarray]

DEFAULT_ALGEBRAIC_TOL = 1e-12
DEFAULT_INTEGRATED_TOL = 1e-6


def as_point(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"point must be finite, got {arr.tolist()}")
    return arr


@dataclass(frozen=True)
class PlanarMap:
    # forward evaluation plus optional exact derivative and inverse
    forward: PointFn
    jacobian: Optional[MatrixFn] = None
    inverse: Optional[PointFn] = None
    name: str = "map"

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.forward(np.asarray(p, dtype=float)), dtype=float)


@dataclass(frozen=True)
class Involution:
    """an involution with its fixed set

    curve: s -> point lying in Fix, defined on curve_interval (may be missing)
    residual: signed scalar vanishing on Fix, used as the target of
    symmetry line searches. when no residual is given, the component of
    (p - h(p))/2 along `normal` is used, which is the signed distance
    for reflections.
    """

    map: PlanarMap
    curve: Optional[Callable[[float], np.ndarray]] = None
    curve_interval: Tuple[float, float] = (-math.pi, math.pi)
    residual: Optional[Callable[[np.ndarray], float]] = None
    normal: Tuple[float, float] = (0.0, 1.0)
    name: str = "g"

    def __call__(self, p) -> np.ndarray:
        return self.map(p)

    def signed_distance(self, p) -> float:
        p = np.asarray(p, dtype=float)
        if self.residual is not None:
            return float(self.residual(p))
        return float(0.5 * np.dot(p - self.map(p), np.asarray(self.normal)))

    def curve_point(self, s: float) -> np.ndarray:
        if self.curve is None:
            raise ValidationError(f"involution '{self.name}' has no fixed-set parametrization")
        return np.asarray(self.curve(float(s)), dtype=float)


@dataclass(frozen=True)
class ReversibleSystem:
    """f with its reversor g and the second involution h2 = f o g"""

    name: str
    f: PlanarMap
    g: Involution
    h2: Involution
    domain: Callable[[np.ndarray], bool] = field(default=lambda p: True)
    lattice: Tuple[Tuple[float, float], ...] = ()
    params: Dict[str, float] = field(default_factory=dict)
    tolerance: float = DEFAULT_ALGEBRAIC_TOL
    box: Tuple[Tuple[float, float], Tuple[float, float]] = ((-math.pi, math.pi), (-math.pi, math.pi))

    def in_domain(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(np.isfinite(p)) and self.domain(p))

    def involution(self, which: str) -> Involution:
        if which == "g":
            return self.g
        if which in ("fg", "h2", "f∘g"):
            return self.h2
        raise ValidationError(f"unknown involution '{which}', expected 'g' or 'fg'")

    def reduce(self, v) -> np.ndarray:
        # displacement modulo the deck lattice (only axis aligned lattices are used)
        v = np.array(v, dtype=float)
        for shift in self.lattice:
            axis = int(np.argmax(np.abs(shift)))
            period = abs(shift[axis])
            v[axis] = (v[axis] + 0.5 * period) % period - 0.5 * period
        return v

    def distance(self, a, b) -> float:
        return float(np.linalg.norm(self.reduce(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def compose_involution(f: PlanarMap, g: Involution, curve=None, curve_interval=(-math.pi, math.pi),
                       residual=None, normal=(0.0, 1.0)) -> Involution:
    # h2 = f o g, its inverse is itself when the pair is reversible
    def forward(p):
        return f(g(p))

    jac = None
    if f.jacobian is not None and g.map.jacobian is not None:
        def jac(p):
            q = g(p)
            return f.jacobian(q) @ g.map.jacobian(p)

    h_map = PlanarMap(forward=forward, jacobian=jac, inverse=forward, name=f"{f.name}∘{g.name}")
    return Involution(map=h_map, curve=curve, curve_interval=curve_interval, residual=residual,
                      normal=normal, name="fg")


@dataclass(frozen=True)
class CheckReport:
    max_residual: float
    passed: bool
    tol: float
    samples: int
    skipped: int = 0
    worst_sample: Optional[List[float]] = None

    def as_dict(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "passed": self.passed,
            "tol": self.tol,
            "samples": self.samples,
            "skipped": self.skipped,
            "worst_sample": self.worst_sample,
        }


def _check_samples(samples) -> np.ndarray:
    pts = np.asarray(samples, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValidationError("samples must be nonempty")
    if not np.all(np.isfinite(pts)):
        raise ValidationError("samples must be finite")
    return pts


def check_involution(g: Involution, samples, tol: float = DEFAULT_ALGEBRAIC_TOL) -> CheckReport:
    """max |g(g(x)) - x| over the samples"""
    pts = _check_samples(samples)
    worst, worst_at = 0.0, None
    for p in pts:
        once = g(p)
        twice = g(once)
        if not (np.all(np.isfinite(once)) and np.all(np.isfinite(twice))):
            raise NumericalError(f"involution '{g.name}' gave a non-finite value at {p.tolist()}",
                                 {"sample": p.tolist()})
        r = float(np.linalg.norm(twice - p))
        if r > worst or worst_at is None:
            worst, worst_at = r, p.tolist()
    return CheckReport(max_residual=worst, passed=worst <= tol, tol=tol, samples=len(pts),
                       worst_sample=worst_at)


def check_reversibility(sys: "ReversibleSystem", samples, tol: Optional[float] = None) -> CheckReport:
    """max |f(g(f(g(x)))) - x|, samples whose images escape are skipped"""
    tol = sys.tolerance if tol is None else tol
    pts = _check_samples(samples)
    worst, worst_at, skipped = 0.0, None, 0
    for p in pts:
        try:
            q = p
            for step in (sys.g, sys.f, sys.g, sys.f):
                q = step(q)
                if not sys.in_domain(q):
                    raise EscapeError("left the domain", escape_index=0)
        except LabError as exc:
            skipped += 1
            console.debug("CORE", f"sample {p.tolist()} skipped: {exc}")
            continue
        r = float(np.linalg.norm(q - p))
        if worst_at is None or r > worst:
            worst, worst_at = r, p.tolist()
    if skipped:
        console.warn("CORE", f"{skipped} of {len(pts)} samples escaped the domain of '{sys.name}'")
    if worst_at is None:
        raise NumericalError(f"every sample escaped the domain of '{sys.name}'", {"samples": len(pts)})
    return CheckReport(max_residual=worst, passed=worst <= tol, tol=tol, samples=len(pts),
                       skipped=skipped, worst_sample=worst_at)


def default_step(x) -> float:
    return 1e-6 * max(1.0, float(np.linalg.norm(x)))


def jacobian(fmap: PlanarMap, x, h: Optional[float] = None) -> np.ndarray:
    """exact jacobian when the map has one, central differences otherwise"""
    x = as_point(x)
    if fmap.jacobian is not None:
        jac = np.asarray(fmap.jacobian(x), dtype=float).reshape(2, 2)
        if not np.all(np.isfinite(jac)):
            raise NumericalError(f"exact jacobian of '{fmap.name}' is not finite at {x.tolist()}")
        return jac
    return finite_difference_jacobian(fmap, x, h)


def finite_difference_jacobian(fmap: PlanarMap, x, h: Optional[float] = None) -> np.ndarray:
    x = as_point(x)
    h = default_step(x) if h is None else float(h)
    if h <= 0:
        raise ValidationError("finite difference step must be positive")
    jac = np.empty((2, 2))
    for col in range(2):
        dx = np.zeros(2)
        dx[col] = h
        plus = fmap(x + dx)
        minus = fmap(x - dx)
        for label, value in (("+", plus), ("-", minus)):
            if not np.all(np.isfinite(value)):
                raise NumericalError(
                    f"stencil value {label}h along axis {col} of '{fmap.name}' is not finite",
                    {"point": x.tolist(), "axis": col, "side": label, "h": h},
                )
        jac[:, col] = (plus - minus) / (2.0 * h)
    return jac


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def polar_chart_jacobian(p) -> np.ndarray:
    """d(rho, theta) / d(x, y) at p"""
    x, y = float(p[0]), float(p[1])
    r2 = x * x + y * y
    if r2 == 0.0:
        raise ValidationError("polar chart is singular at the origin")
    r = math.sqrt(r2)
    return np.array([[x / r, y / r], [-y / r2, x / r2]])


def sample_box(sys: ReversibleSystem, rng: np.random.Generator, count: int) -> np.ndarray:
    return random_points(rng, sys.box, count)
