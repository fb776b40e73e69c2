"""equilibria of the resonant normal form away from the origin

symmetric ones sit on the 2q rays sin(q theta) = 0 and are found by a
bracketing scan plus brentq along each ray. asymmetric ones only exist
when B != C; they are seeded at rho^2 = A/(B - C) and polished with a
2x2 root solve of the polar system.
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, root

from src.normal_form.field import eval_field_polar, polar_jacobian, polar_rates
from src.normal_form.params import ResonantParams
from src.utils import console
from src.utils.errors import NumericalError, ValidationError

CLASS_COLLAR = 1e-9
SYMMETRY_TOL = 1e-9
RHO_MAX_FACTOR = 3.0
SCAN_POINTS = 400

KINDS = ("center", "saddle", "sink", "source", "degenerate")


@dataclass(frozen=True)
class Equilibrium:
    rho: float
    theta: float
    phi: float
    linearization: Tuple[Tuple[float, float], Tuple[float, float]]
    eigenvalues: Tuple[complex, complex]
    kind: str
    symmetric: bool
    residual: float = 0.0

    @property
    def z(self) -> complex:
        return self.rho * complex(math.cos(self.theta), math.sin(self.theta))

    @property
    def max_real_part(self) -> float:
        return max(ev.real for ev in self.eigenvalues)

    @property
    def min_real_part(self) -> float:
        return min(ev.real for ev in self.eigenvalues)

    def as_dict(self) -> dict:
        return {
            "rho": self.rho,
            "theta": self.theta,
            "phi": self.phi,
            "type": self.kind,
            "symmetric": self.symmetric,
            "eigenvalues": [[ev.real, ev.imag] for ev in self.eigenvalues],
            "linearization": [list(row) for row in self.linearization],
            "residual": self.residual,
        }


def classify_linearization(jac, collar: float = CLASS_COLLAR) -> Tuple[str, Tuple[complex, complex]]:
    """type of a planar equilibrium from its 2x2 linearization

    the collar is relative: real parts within collar * (spectral scale) count
    as zero. asymmetric equilibria have eigenvalues of size rho^q which would
    vanish inside any absolute collar.
    """
    jac = np.asarray(jac, dtype=float)
    ev = np.linalg.eigvals(jac)
    ev = tuple(sorted((complex(e) for e in ev), key=lambda e: (e.real, e.imag)))
    scale = max(abs(e) for e in ev)
    if scale == 0.0:
        return "degenerate", ev
    tol = collar * scale
    if min(abs(e) for e in ev) <= tol:
        return "degenerate", ev
    re = [e.real for e in ev]
    if abs(ev[0].imag) > tol:
        if all(abs(r) <= tol for r in re):
            return "center", ev
        return ("sink", ev) if re[0] < 0 else ("source", ev)
    if re[0] < -tol and re[1] > tol:
        return "saddle", ev
    if re[1] < -tol:
        return "sink", ev
    if re[0] > tol:
        return "source", ev
    return "degenerate", ev


def default_rho_max(params: ResonantParams) -> float:
    return RHO_MAX_FACTOR * math.sqrt(abs(params.mu) / abs(params.psi1))


def _make(params: ResonantParams, rho: float, theta: float, collar: float) -> Equilibrium:
    theta = theta % (2.0 * math.pi)
    jac = polar_jacobian(params, rho, theta)
    kind, ev = classify_linearization(jac, collar)
    rho_dot, theta_dot = polar_rates(params, rho, theta)
    phi = (params.q * theta) % (2.0 * math.pi)
    return Equilibrium(
        rho=float(rho), theta=float(theta), phi=float(phi),
        linearization=tuple(tuple(float(v) for v in row) for row in jac),
        eigenvalues=ev, kind=kind,
        symmetric=abs(math.sin(phi)) <= SYMMETRY_TOL,
        residual=float(math.hypot(rho_dot, theta_dot)),
    )


def ray_roots(params: ResonantParams, sign: int, rho_max: float, points: int = SCAN_POINTS) -> List[float]:
    """roots of mu + Psi(rho) + sign rho^{q-2}(A + (B+C) rho^2) on (0, rho_max]"""
    q = params.q
    s_coef = params.A
    b_coef = params.B + params.C

    def g(rho):
        return params.mu + params.Psi(rho) + sign * rho ** (q - 2) * (s_coef + b_coef * rho * rho)

    grid = np.linspace(rho_max / points, rho_max, points)
    values = [g(float(r)) for r in grid]
    roots = []
    for lo, hi, g_lo, g_hi in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if g_lo == 0.0:
            roots.append(float(lo))
            continue
        if g_lo * g_hi > 0:
            continue
        try:
            roots.append(float(brentq(g, float(lo), float(hi), xtol=1e-16, rtol=4 * np.finfo(float).eps)))
        except (RuntimeError, ValueError) as exc:
            console.warn("NF", f"ray root in [{lo:.6g}, {hi:.6g}] did not converge: {exc}")
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def asymmetric_seeds(params: ResonantParams) -> List[Tuple[float, float]]:
    """(rho, phi) of the asymmetric pair from rho^2 = A/(B - C), empty if none exist"""
    if params.B == params.C:
        return []
    r2 = params.A / (params.B - params.C)
    if r2 <= 0:
        return []
    rho = math.sqrt(r2)
    if params.B == 0.0:
        # phi' no longer depends on phi there: a continuum or nothing, never isolated points
        console.debug("NF", "B = 0, asymmetric equilibria are not isolated")
        return []
    cos_phi = -(params.mu + params.Psi(rho)) / (2.0 * params.B * rho ** params.q)
    if abs(cos_phi) >= 1.0 - SYMMETRY_TOL:
        return []
    phi = math.acos(cos_phi)
    return [(rho, phi), (rho, -phi)]


def _polish(params: ResonantParams, rho: float, phi: float) -> Tuple[float, float]:
    def residual(x):
        rd, pd = eval_field_polar(params, x[0], x[1])
        return [rd, pd / params.q]

    def jac(x):
        m = polar_jacobian(params, x[0], x[1] / params.q)
        # columns in theta, convert to phi = q theta
        return [[m[0, 0], m[0, 1] / params.q], [m[1, 0], m[1, 1] / params.q]]

    start = np.array([rho, phi])
    before = float(np.hypot(*residual(start)))
    if before == 0.0:
        return rho, phi
    sol = root(residual, start, jac=jac, method="hybr", options={"xtol": 1e-15})
    after = float(np.hypot(*residual(sol.x))) if np.all(np.isfinite(sol.x)) else math.inf
    if not sol.success and after > before:
        raise NumericalError("asymmetric equilibrium polish failed", {"seed": [rho, phi], "message": sol.message})
    if after <= before and sol.x[0] > 0:
        return float(sol.x[0]), float(sol.x[1])
    return rho, phi


def find_equilibria(params: ResonantParams, rho_max: Optional[float] = None,
                    collar: float = CLASS_COLLAR) -> List[Equilibrium]:
    """all equilibria with rho in (0, rho_max], listed in the plane (q copies of each)"""
    if params.psi1 == 0.0:
        raise ValidationError("find_equilibria needs psi1 != 0")
    rho_max = default_rho_max(params) if rho_max is None else float(rho_max)
    q = params.q
    found: List[Equilibrium] = []
    if rho_max > 0:
        for sign in (1, -1):
            for rho in ray_roots(params, sign, rho_max):
                first = 0 if sign == 1 else 1
                for j in range(first, 2 * q, 2):
                    found.append(_make(params, rho, j * math.pi / q, collar))
    for rho, phi in asymmetric_seeds(params):
        if rho > rho_max > 0:
            continue
        try:
            rho, phi = _polish(params, rho, phi)
        except NumericalError as exc:
            console.warn("NF", f"{exc} (seed rho={rho:.6g}, phi={phi:.6g})")
            continue
        for k in range(q):
            found.append(_make(params, rho, (phi + 2.0 * math.pi * k) / q, collar))
    return _merge(found)


def _merge(eqs: Sequence[Equilibrium]) -> List[Equilibrium]:
    out: List[Equilibrium] = []
    for eq in sorted(eqs, key=lambda e: (e.theta, e.rho)):
        if any(abs(eq.rho - o.rho) <= 1e-12 * max(1.0, eq.rho) and abs(eq.z - o.z) <= 1e-12 for o in out):
            continue
        out.append(eq)
    return out


def reduce_equilibria(eqs: Sequence[Equilibrium]) -> List[Equilibrium]:
    """one representative per rotation class (the planar set is q copies of the reduced one)"""
    out: List[Equilibrium] = []
    for eq in eqs:
        same = [o for o in out if abs(o.rho - eq.rho) <= 1e-10 * max(1.0, eq.rho)
                and abs(math.remainder(o.phi - eq.phi, 2.0 * math.pi)) <= 1e-7]
        if not same:
            out.append(eq)
    return out


def count_by_kind(eqs: Sequence[Equilibrium]) -> dict:
    counts = {kind: 0 for kind in KINDS}
    for eq in eqs:
        counts[eq.kind] += 1
    return counts


def split_counts(params: ResonantParams, rho_max: Optional[float] = None) -> Tuple[int, int]:
    """(symmetric, asymmetric) counts of the reduced equilibrium set"""
    reduced = reduce_equilibria(find_equilibria(params, rho_max))
    sym = sum(1 for e in reduced if e.symmetric)
    return sym, len(reduced) - sym
