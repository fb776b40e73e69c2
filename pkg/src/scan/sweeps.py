"""parameter sweeps over the normal form: mu sweeps and the pitchfork region"""
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect

from src.normal_form.equilibria import count_by_kind, find_equilibria, reduce_equilibria
from src.normal_form.params import ResonantParams
from src.scan.pool import GridFailure, GridPool
from src.utils import console
from src.utils.errors import NumericalError, ValidationError

AXES = ("mu", "A", "B", "C", "psi1", "s")
MU_FRAMES = ("absolute", "centered")


@dataclass(frozen=True)
class ScanGrid:
    axes: Tuple[str, ...]
    ranges: Tuple[Tuple[float, float], ...]
    resolutions: Tuple[int, ...]

    def __post_init__(self):
        if not (len(self.axes) == len(self.ranges) == len(self.resolutions)) or not self.axes:
            raise ValidationError("scan grid needs one range and one resolution per axis")
        for axis, (lo, hi), n in zip(self.axes, self.ranges, self.resolutions):
            if axis not in AXES:
                raise ValidationError(f"unknown scan axis '{axis}', expected one of {list(AXES)}")
            if n < 2:
                raise ValidationError(f"resolution of '{axis}' must be >= 2, got {n}")
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValidationError(f"range of '{axis}' must be finite and ordered, got [{lo}, {hi}]")

    def values(self, axis: str) -> np.ndarray:
        i = self.axes.index(axis)
        lo, hi = self.ranges[i]
        return np.linspace(lo, hi, self.resolutions[i])

    def points(self) -> List[Tuple[float, ...]]:
        # grid order: last axis varies fastest
        return [tuple(float(v) for v in combo) for combo in product(*(self.values(a) for a in self.axes))]


@dataclass(frozen=True)
class BifurcationEvent:
    kind: str
    location: Dict[str, Tuple[float, float]]
    before: Dict[str, Any]
    after: Dict[str, Any]
    estimate: Optional[Dict[str, float]] = None

    def as_dict(self) -> dict:
        return {"kind": self.kind, "location": {k: list(v) for k, v in self.location.items()},
                "before": self.before, "after": self.after, "estimate": self.estimate}


@dataclass
class SweepResult:
    rows: List[Dict[str, Any]]
    events: List[BifurcationEvent]
    failures: List[GridFailure] = field(default_factory=list)


def equilibrium_row(params: ResonantParams) -> Dict[str, Any]:
    """counts of the planar equilibrium set at one parameter point"""
    eqs = find_equilibria(params)
    reduced = reduce_equilibria(eqs)
    row = {"mu": params.mu, "A": params.A, "B": params.B, "C": params.C, "psi1": params.psi1,
           "count": len(eqs),
           "symmetric": sum(1 for e in eqs if e.symmetric),
           "asymmetric": sum(1 for e in eqs if not e.symmetric),
           "reduced_symmetric": sum(1 for e in reduced if e.symmetric),
           "reduced_asymmetric": sum(1 for e in reduced if not e.symmetric)}
    row.update(count_by_kind(eqs))
    return row


def _counts(row: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    if row is None:
        return {}
    return {k: row[k] for k in ("count", "symmetric", "asymmetric", "saddle", "center", "sink", "source")}


def mu_sweep(params: ResonantParams, mu_range: Tuple[float, float], resolution: int, threads: int = 1,
             refine: bool = True) -> SweepResult:
    """equilibrium tables along mu, with the saddle-center birth bracketed"""
    if params.psi1 == 0.0 or params.A == 0.0 or not params.conservative:
        raise ValidationError("mu sweep needs psi1 != 0, A != 0 and B = C = 0")
    grid = ScanGrid(("mu",), (tuple(mu_range),), (resolution,))
    mus = [p[0] for p in grid.points()]
    pool = GridPool(threads)
    rows = pool.map(lambda mu: equilibrium_row(params.with_mu(mu)), mus)
    events = []
    for i in range(len(mus) - 1):
        a, b = rows[i], rows[i + 1]
        if a is None or b is None or a["count"] == b["count"]:
            continue
        estimate = None
        if refine:
            estimate = {"mu": _locate(lambda mu: equilibrium_row(params.with_mu(mu))["count"] == a["count"],
                                      mus[i], mus[i + 1])}
        events.append(BifurcationEvent("saddle-center-birth", {"mu": (mus[i], mus[i + 1])},
                                       _counts(a), _counts(b), estimate))
    for row in rows:
        if row is not None and row["count"] and (row["saddle"] != row["center"]):
            console.warn("SCAN", f"mu={row['mu']:.6g}: {row['saddle']} saddles vs {row['center']} centers")
    return SweepResult([r for r in rows if r is not None], events, pool.failures)


def _locate(same_as_lo, lo: float, hi: float, xtol: Optional[float] = None) -> Optional[float]:
    # bisection on an integer valued detector
    xtol = 1e-12 * max(abs(hi - lo), abs(lo), abs(hi)) if xtol is None else xtol
    try:
        return float(bisect(lambda x: -1.0 if same_as_lo(x) else 1.0, lo, hi, xtol=xtol, maxiter=200))
    except (RuntimeError, ValueError) as exc:
        console.warn("SCAN", f"event refinement in [{lo:.6g}, {hi:.6g}] failed: {exc}")
        return None


@dataclass(frozen=True)
class PitchforkInterval:
    A: float
    lo: float
    hi: float
    rho: float
    predicted_center: float
    exact_center: float
    boundary_eigen: Tuple[float, float]

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def contains_prediction(self) -> bool:
        return self.lo <= self.predicted_center <= self.hi

    @property
    def center_offset(self) -> float:
        # relative distance between measured and leading order centers
        return abs(self.center - self.predicted_center) / abs(self.predicted_center)

    def as_dict(self) -> dict:
        return {"A": self.A, "mu_lo": self.lo, "mu_hi": self.hi, "width": self.width, "rho": self.rho,
                "center": self.center, "predicted_center": self.predicted_center,
                "contains_prediction": self.contains_prediction, "center_offset": self.center_offset,
                "boundary_eigen": list(self.boundary_eigen)}


def _check_pitchfork(params: ResonantParams) -> None:
    if params.B == params.C:
        raise ValidationError("pitchfork scan needs B != C")
    if params.psi1 == 0.0:
        raise ValidationError("pitchfork scan needs psi1 != 0")


def asym_count(params: ResonantParams) -> int:
    return sum(1 for e in reduce_equilibria(find_equilibria(params)) if not e.symmetric)


def predicted_center(params: ResonantParams) -> float:
    # A psi1 / (C - B)
    return params.A * params.psi1 / (params.C - params.B)


def centered_frame(params: ResonantParams) -> Tuple[float, float]:
    """(center, half width) used to lay a mu grid over the asymmetric window"""
    r2 = abs(params.A / (params.B - params.C))
    rho = math.sqrt(r2)
    half = 2.0 * abs(params.B) * rho ** params.q
    if half == 0.0:
        half = abs(predicted_center(params)) or 1.0
    return -params.Psi(rho), half


def _boundary_eigen(params: ResonantParams, rho: float) -> float:
    # smallest |eigenvalue| / largest |eigenvalue| over symmetric equilibria near the merge radius
    best = math.inf
    for eq in reduce_equilibria(find_equilibria(params)):
        if eq.symmetric and abs(eq.rho - rho) <= 0.05 * rho:
            sizes = sorted(abs(ev) for ev in eq.eigenvalues)
            best = min(best, sizes[0] / sizes[1] if sizes[1] else 0.0)
    return best


def pitchfork_interval(params: ResonantParams, max_doublings: int = 60) -> Optional[PitchforkInterval]:
    """mu window where the asymmetric pair exists at the given A, None when empty"""
    _check_pitchfork(params)
    r2 = params.A / (params.B - params.C)
    if r2 <= 0 or params.B == 0.0:
        return None
    rho = math.sqrt(r2)
    center, half = centered_frame(params)
    if asym_count(params.with_mu(center)) == 0:
        return None

    def inside(mu):
        return asym_count(params.with_mu(mu)) > 0

    edges = []
    for direction in (-1.0, 1.0):
        step = half
        outer = center + direction * step
        for _ in range(max_doublings):
            if not inside(outer):
                break
            step *= 2.0
            outer = center + direction * step
        else:
            raise NumericalError("asymmetric window does not close", {"A": params.A, "last": outer})
        edge = _locate(inside, center, outer, xtol=1e-9 * half)
        if edge is None:
            raise NumericalError("pitchfork boundary bisection failed", {"A": params.A, "bracket": [center, outer]})
        edges.append(edge)
    eigen = tuple(_boundary_eigen(params.with_mu(mu), rho) for mu in edges)
    return PitchforkInterval(A=params.A, lo=min(edges), hi=max(edges), rho=rho,
                             predicted_center=predicted_center(params), exact_center=center,
                             boundary_eigen=eigen)


@dataclass
class PitchforkResult:
    rows: List[Dict[str, Any]]
    events: List[BifurcationEvent]
    intervals: List[PitchforkInterval]
    failures: List[GridFailure] = field(default_factory=list)

    @property
    def region(self) -> List[Tuple[float, float]]:
        # (A, mu) grid points with an asymmetric pair
        return [(r["A"], r["mu"]) for r in self.rows if r["reduced_asymmetric"] > 0]


def pitchfork_scan(params: ResonantParams, A_range: Tuple[float, float], mu_range: Tuple[float, float],
                   resolution: Tuple[int, int] = (5, 41), mu_frame: str = "centered",
                   threads: int = 1) -> PitchforkResult:
    """count symmetric/asymmetric equilibria over an (A, mu) grid

    with mu_frame = "centered", mu_range is in units of the half width of the
    asymmetric window around its center, so tiny windows still get sampled.
    """
    _check_pitchfork(params)
    if mu_frame not in MU_FRAMES:
        raise ValidationError(f"mu_frame must be one of {list(MU_FRAMES)}")
    mu_axis = "s" if mu_frame == "centered" else "mu"
    grid = ScanGrid(("A", mu_axis), (tuple(A_range), tuple(mu_range)), tuple(resolution))

    def mu_at(a: float, t: float) -> float:
        if mu_frame == "absolute":
            return t
        center, half = centered_frame(params.with_changes(A=a))
        return center + t * half

    cells = [(a, mu_at(a, t), t) for a, t in grid.points()]
    pool = GridPool(threads)
    rows = pool.map(lambda cell: {**equilibrium_row(params.with_changes(A=cell[0], mu=cell[1])), "s": cell[2]}, cells)
    events = []
    n_mu = resolution[1]
    for i in range(len(cells) - 1):
        if (i + 1) % n_mu == 0:
            continue
        a, b = rows[i], rows[i + 1]
        if a is None or b is None or a["reduced_asymmetric"] == b["reduced_asymmetric"]:
            continue
        A = cells[i][0]
        events.append(BifurcationEvent("pitchfork", {"A": (A, A), "mu": (cells[i][1], cells[i + 1][1])},
                                       _counts(a), _counts(b)))
    intervals = []
    for A in grid.values("A"):
        try:
            found = pitchfork_interval(params.with_changes(A=float(A)))
        except NumericalError as exc:
            console.warn("SCAN", f"A={A:.6g}: {exc}")
            continue
        if found is not None:
            intervals.append(found)
    return PitchforkResult([r for r in rows if r is not None], events, intervals, pool.failures)


def interval_widths(params: ResonantParams, A_values: Sequence[float]) -> List[Optional[PitchforkInterval]]:
    """pitchfork window at each A, for the shrinking-width check"""
    return [pitchfork_interval(params.with_changes(A=float(a))) for a in A_values]
