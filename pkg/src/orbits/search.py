"""symmetric periodic orbits from symmetry line intersections

a point x on Fix(h1) whose k-th image lies on Fix(h2) is periodic:

    g  -> g   period divides 2k
    g  -> fg  period divides 2k - 1
    fg -> g   period divides 2k + 1
    fg -> fg  period divides 2k

the search scans the fixed-set curve of h1, brackets sign changes of the
signed distance of f^k(curve(s)) to Fix(h2) and bisects them.
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import bisect, root

from src.core.maps import ReversibleSystem
from src.orbits.orbit import CLASSIFY_TOL, PeriodicOrbit, build_orbit, iterate_partial, same_orbit, smallest_period
from src.scan.pool import GridPool
from src.utils import console
from src.utils.errors import LabError, ValidationError

DEFAULT_SAMPLES = 200


@dataclass(frozen=True)
class SymmetrySearchWindow:
    involution: str
    s_lo: float
    s_hi: float
    k: int
    tol: float = 1e-12
    target: Optional[str] = None
    samples: int = DEFAULT_SAMPLES
    polish: bool = False

    def __post_init__(self):
        if self.involution not in ("g", "fg"):
            raise ValidationError(f"involution must be 'g' or 'fg', got {self.involution!r}")
        if self.target not in (None, "g", "fg"):
            raise ValidationError(f"target must be 'g' or 'fg', got {self.target!r}")
        if not self.s_lo < self.s_hi:
            raise ValidationError(f"need s_lo < s_hi, got [{self.s_lo}, {self.s_hi}]")
        if self.k < 1:
            raise ValidationError(f"half-period k must be >= 1, got {self.k}")
        if self.tol <= 0 or self.samples < 2:
            raise ValidationError("tol must be positive and samples >= 2")

    @property
    def target_involution(self) -> str:
        return self.target or self.involution

    def period_bound(self) -> int:
        return implied_period(self.involution, self.target_involution, self.k)


def implied_period(source: str, target: str, k: int) -> int:
    if source == target:
        return 2 * k
    return 2 * k - 1 if source == "g" else 2 * k + 1


def _distance_after(sys: ReversibleSystem, window: SymmetrySearchWindow, s: float) -> float:
    source = sys.involution(window.involution)
    target = sys.involution(window.target_involution)
    try:
        points, escaped = iterate_partial(sys, source.curve_point(s), window.k)
        if escaped is not None:
            return math.nan
        return target.signed_distance(points[-1])
    except LabError:
        return math.nan


def _polish(sys: ReversibleSystem, x0: np.ndarray, period: int, tol: float) -> np.ndarray:
    def residual(x):
        pts, escaped = iterate_partial(sys, x, period)
        if escaped is not None:
            return [1e3, 1e3]
        return sys.reduce(pts[-1] - pts[0])

    sol = root(residual, x0, method="hybr", options={"xtol": tol})
    if sol.success and np.linalg.norm(residual(sol.x)) <= np.linalg.norm(residual(x0)):
        return sol.x
    return x0


def find_symmetric_periodic(sys: ReversibleSystem, window: SymmetrySearchWindow,
                            classify_tol: float = CLASSIFY_TOL,
                            diagnostics: Optional[list] = None) -> List[PeriodicOrbit]:
    """symmetric periodic orbits through the window, sorted by (period, seed)"""
    source = sys.involution(window.involution)
    if source.curve is None:
        raise ValidationError(f"involution '{window.involution}' of '{sys.name}' has no fixed-set curve")
    grid = np.linspace(window.s_lo, window.s_hi, window.samples)
    values = [_distance_after(sys, window, float(s)) for s in grid]
    roots = []
    for lo, hi, d_lo, d_hi in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if math.isnan(d_lo) or math.isnan(d_hi):
            continue
        if d_lo == 0.0:
            roots.append(float(lo))
            continue
        if d_lo * d_hi > 0:
            continue
        try:
            roots.append(float(bisect(lambda s: _distance_after(sys, window, s), float(lo), float(hi),
                                      xtol=window.tol, maxiter=200)))
        except (RuntimeError, ValueError) as exc:
            note = {"bracket": [float(lo), float(hi)], "reason": str(exc)}
            console.warn("ORBITS", f"bisection failed in [{lo:.6g}, {hi:.6g}]: {exc}")
            if diagnostics is not None:
                diagnostics.append(note)
    if values and values[-1] == 0.0:
        roots.append(float(grid[-1]))

    bound = window.period_bound()
    close_tol = 10.0 * max(window.tol, sys.tolerance)
    orbits: List[PeriodicOrbit] = []
    for s in roots:
        x0 = source.curve_point(s)
        if window.polish:
            x0 = _polish(sys, x0, bound, window.tol)
        period = smallest_period(sys, x0, bound, close_tol)
        if period is None:
            # f^k lands on the target line but the orbit does not close, a near-tangency or an escape
            note = {"seed": s, "bound": bound}
            console.debug("ORBITS", f"root s={s:.12g} does not close within {bound} steps")
            if diagnostics is not None:
                diagnostics.append(note)
            continue
        try:
            orbit = build_orbit(sys, x0, period, window.involution, s, classify_tol)
        except LabError as exc:
            console.warn("ORBITS", f"orbit from s={s:.12g} dropped: {exc}")
            continue
        orbits.append(orbit)
    return merge_orbits(sys, orbits, close_tol)


def merge_orbits(sys: ReversibleSystem, orbits: Sequence[PeriodicOrbit], tol: float) -> List[PeriodicOrbit]:
    out: List[PeriodicOrbit] = []
    for orbit in sorted(orbits, key=lambda o: (o.period, o.seed if o.seed is not None else 0.0)):
        merge_tol = max(tol, 10.0 * orbit.residual)
        if any(same_orbit(sys, orbit, kept, merge_tol) for kept in out):
            continue
        out.append(orbit)
    return out


def search_windows(sys: ReversibleSystem, windows: Sequence[SymmetrySearchWindow], threads: int = 1,
                   classify_tol: float = CLASSIFY_TOL, diagnostics: Optional[list] = None) -> List[PeriodicOrbit]:
    """run several windows, in parallel when threads > 1, merged deterministically

    a window that fails is skipped and noted in diagnostics.
    """
    pool = GridPool(threads)
    batches = pool.map(lambda w: find_symmetric_periodic(sys, w, classify_tol), list(windows))
    if diagnostics is not None:
        diagnostics.extend({"window": f.index, "error": f.error, **f.diagnostics} for f in pool.failures)
    found = [orbit for batch in batches if batch is not None for orbit in batch]
    if not found:
        return []
    tol = 10.0 * max(max(w.tol for w in windows), sys.tolerance)
    return merge_orbits(sys, found, tol)
