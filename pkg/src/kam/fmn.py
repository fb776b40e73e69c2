"""fixed points of F_{m/n} = f^n - (0, m) in an annulus between two circles

roots are periodic orbits of rotation m/n. next to a circle of diophantine
rotation psi0 and for convergents m/n they sit close to the circle, have
trace near 2, and spread over the whole circle.
"""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import root
from scipy.spatial.distance import directed_hausdorff

from src.core.maps import ReversibleSystem
from src.kam.charts import AnnulusChart, curve_samples, padded
from src.kam.diophantine import check_gate
from src.kam.rotation import RotationNumberEstimate, rotation_number
from src.orbits.orbit import PeriodicOrbit, build_orbit, iterate, iterate_partial
from src.utils import console
from src.utils.errors import LabError, ValidationError

MAX_N = 64
NEWTON_TOL = 1e-12
DEGENERATE_TOL = 1e-9


@dataclass(frozen=True)
class FmnSpec:
    m: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"n must be positive, got {self.n}")
        if self.n > MAX_N:
            raise ValidationError(f"n is capped at {MAX_N}, got {self.n}")

    @property
    def ratio(self) -> float:
        return self.m / self.n


@dataclass(frozen=True)
class CurveApprox:
    """long orbit closure standing in for an invariant circle"""

    rho: float
    rotation: RotationNumberEstimate
    points: np.ndarray = field(repr=False)


def curve_approx(sys: ReversibleSystem, chart: AnnulusChart, rho: float, count: int = 4000) -> CurveApprox:
    start = chart.from_chart(rho, 0.0)
    est = rotation_number(sys, chart, start, count)
    pts = curve_samples(iterate(sys, start, count), chart.deck)
    return CurveApprox(float(rho), est, pts)


@dataclass(frozen=True)
class Annulus:
    inner: CurveApprox
    outer: CurveApprox

    def contains(self, ratio: float) -> bool:
        a, b = sorted((self.inner.rotation.value, self.outer.rotation.value))
        return a < ratio < b


@dataclass(frozen=True)
class FmnReport:
    spec: FmnSpec
    orbits: List[PeriodicOrbit]
    seeds: int
    degenerate: bool = False
    gate_ok: bool = True
    radial_distance: Optional[float] = None
    hausdorff_gap: Optional[float] = None
    trace_deviation: Optional[float] = None
    traces: List[float] = field(default_factory=list)
    positive_saddles: int = 0
    others: int = 0

    @property
    def all_traces_positive(self) -> bool:
        return all(t > 0 for t in self.traces)

    def as_dict(self) -> dict:
        return {"m": self.spec.m, "n": self.spec.n, "roots": len(self.orbits), "seeds": self.seeds,
                "degenerate": self.degenerate, "gate_ok": self.gate_ok,
                "radial_distance": self.radial_distance, "hausdorff_gap": self.hausdorff_gap,
                "trace_deviation": self.trace_deviation, "traces": list(self.traces),
                "all_traces_positive": self.all_traces_positive,
                "positive_saddles": self.positive_saddles, "others": self.others,
                "orbits": [o.as_dict() for o in self.orbits]}


def fmn_residual(sys: ReversibleSystem, chart: AnnulusChart, fmn: FmnSpec, p) -> np.ndarray:
    """(rho(f^n p) - rho(p), lifted turns - m) in chart units"""
    points, escaped = iterate_partial(sys, p, fmn.n)
    if escaped is not None:
        return np.array([1e3, 1e3])
    angles = chart.lift_angles(points)
    return np.array([chart.radius(points[-1]) - chart.radius(points[0]), angles[-1] - angles[0] - fmn.m])


def _seeds(chart: AnnulusChart, annulus: Annulus, radial: int, angular: int) -> List[np.ndarray]:
    lo, hi = sorted((annulus.inner.rho, annulus.outer.rho))
    return [chart.from_chart(float(r), float(t)) for r in np.linspace(lo, hi, radial)
            for t in np.linspace(0.0, 1.0, angular, endpoint=False)]


def _orbit_set(sys: ReversibleSystem, p, n: int, deck) -> np.ndarray:
    return curve_samples(iterate(sys, p, n - 1), deck)


def find_fmn_fixed_points(sys: ReversibleSystem, chart: AnnulusChart, fmn: FmnSpec, annulus: Annulus,
                          radial_seeds: int = 6, angular_seeds: int = 8, gate_policy: str = "warn",
                          classify_tol: float = 1e-9) -> FmnReport:
    """grid seeded newton on F_{m/n}(p) = p, one orbit per root class"""
    seeds = _seeds(chart, annulus, radial_seeds, angular_seeds)
    at_seeds = [float(np.max(np.abs(fmn_residual(sys, chart, fmn, s)))) for s in seeds]
    if max(at_seeds) <= DEGENERATE_TOL:
        console.warn("KAM", f"F_{fmn.m}/{fmn.n} is the identity on every seed, no roots certified")
        return FmnReport(fmn, [], len(seeds), degenerate=True)
    if not annulus.contains(fmn.ratio):
        raise ValidationError(
            f"m/n = {fmn.m}/{fmn.n} is not strictly between the boundary rotation numbers "
            f"{annulus.inner.rotation.value:.12g} and {annulus.outer.rotation.value:.12g}")
    psi0 = annulus.inner.rotation.value
    gate_ok = check_gate(psi0, fmn.m, fmn.n, gate_policy)

    roots = []
    for seed in seeds:
        try:
            sol = root(lambda p: fmn_residual(sys, chart, fmn, p), seed, method="hybr",
                       options={"xtol": NEWTON_TOL})
        except LabError:
            continue
        if not np.all(np.isfinite(sol.x)):
            continue
        if float(np.max(np.abs(fmn_residual(sys, chart, fmn, sol.x)))) > 1e-9:
            continue
        roots.append(sol.x)

    deck = chart.deck
    orbits: List[PeriodicOrbit] = []
    sets: List[np.ndarray] = []
    for p in roots:
        pts = _orbit_set(sys, p, fmn.n, deck)
        if any(np.min(np.linalg.norm(padded(s, deck)[:, None, :] - pts[0][None, None, :], axis=2)) <= 1e-7
               for s in sets):
            continue
        try:
            orbit = build_orbit(sys, p, fmn.n, "none", tol=classify_tol)
        except LabError as exc:
            console.warn("KAM", f"root {p.tolist()} dropped: {exc}")
            continue
        sets.append(pts)
        orbits.append(orbit)
    order = sorted(range(len(orbits)), key=lambda i: (round(orbits[i].points[0][1], 9), orbits[i].points[0][0]))
    orbits = [orbits[i] for i in order]
    sets = [sets[i] for i in order]
    if not orbits:
        console.warn("KAM", f"no roots of F_{fmn.m}/{fmn.n} from {len(seeds)} seeds (not a disproof)")
        return FmnReport(fmn, [], len(seeds), gate_ok=gate_ok)

    reference = annulus.inner.points
    target = padded(reference, deck)
    radial = max(directed_hausdorff(s, target)[0] for s in sets)
    gap = max(directed_hausdorff(reference, padded(s, deck))[0] for s in sets)
    traces = [float(np.trace(np.asarray(o.monodromy))) for o in orbits]
    saddles = sum(1 for t in traces if t > 2.0)
    return FmnReport(
        spec=fmn, orbits=orbits, seeds=len(seeds), gate_ok=gate_ok,
        radial_distance=float(radial), hausdorff_gap=float(gap),
        trace_deviation=float(max(abs(t - 2.0) for t in traces)), traces=traces,
        positive_saddles=saddles, others=len(traces) - saddles,
    )


def convergent_study(sys: ReversibleSystem, chart: AnnulusChart, pairs: Sequence[tuple], psi0_rho: float,
                     below_rho: float, above_rho: float, count: int = 4000, **kw) -> List[FmnReport]:
    """F_{m/n} reports for several convergents, annulus picked on the side of psi0 where m/n lies"""
    inner = curve_approx(sys, chart, psi0_rho, count)
    below = curve_approx(sys, chart, below_rho, count)
    above = curve_approx(sys, chart, above_rho, count)
    reports = []
    for m, n in pairs:
        fmn = FmnSpec(int(m), int(n))
        outer = above if fmn.ratio > inner.rotation.value else below
        reports.append(find_fmn_fixed_points(sys, chart, fmn, Annulus(inner, outer), **kw))
    return reports
