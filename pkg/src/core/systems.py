"""built-in reversible systems

rigid-rotation  R_psi with the conjugation reversor
twist-std       split-step standard map on the cylinder/torus, reversor (x, y) -> (-x, y)
nf-map          R_{2 pi p/q} o (time-1 map of the resonant normal form), reversor z -> conj(z)
"""
import math
from dataclasses import replace
from typing import Any, Dict, Mapping, Tuple

import numpy as np
from scipy.optimize import brentq

from src.core.maps import (
    DEFAULT_ALGEBRAIC_TOL,
    DEFAULT_INTEGRATED_TOL,
    Involution,
    PlanarMap,
    ReversibleSystem,
    compose_involution,
    rotation_matrix,
)
from src.normal_form import flow
from src.normal_form.params import ResonantParams
from src.utils.errors import LabError, NumericalError, ValidationError

BUILTIN_NAMES = ("rigid-rotation", "twist-std", "nf-map")
TWO_PI = 2.0 * math.pi

_CONJ_JAC = np.array([[1.0, 0.0], [0.0, -1.0]])


def conjugation() -> Involution:
    # (x, y) -> (x, -y), fixed set is the x axis
    cmap = PlanarMap(forward=lambda p: np.array([p[0], -p[1]]), jacobian=lambda p: _CONJ_JAC,
                     inverse=lambda p: np.array([p[0], -p[1]]), name="conj")
    return Involution(map=cmap, curve=lambda s: np.array([s, 0.0]), residual=lambda p: float(p[1]),
                      normal=(0.0, 1.0), name="g")


def _take(params: Mapping[str, Any], allowed: Dict[str, Any], system: str) -> Dict[str, Any]:
    unknown = sorted(set(params) - set(allowed))
    if unknown:
        raise ValidationError(f"unknown parameter(s) {unknown} for '{system}', expected {sorted(allowed)}")
    merged = dict(allowed)
    merged.update(params)
    return merged


def rigid_rotation(params: Mapping[str, Any]) -> ReversibleSystem:
    values = _take(params, {"psi": 0.3}, "rigid-rotation")
    psi = float(values["psi"])
    if not math.isfinite(psi):
        raise ValidationError("psi must be finite")
    rot = rotation_matrix(psi)
    back = rotation_matrix(-psi)
    f = PlanarMap(forward=lambda p: rot @ p, jacobian=lambda p: rot, inverse=lambda p: back @ p,
                  name="rotation")
    g = conjugation()
    half = 0.5 * psi
    normal = (-math.sin(half), math.cos(half))
    h2 = compose_involution(
        f, g,
        curve=lambda s: np.array([s * math.cos(half), s * math.sin(half)]),
        curve_interval=(-1.0, 1.0),
        residual=lambda p: float(normal[0] * p[0] + normal[1] * p[1]),
        normal=normal,
    )
    return ReversibleSystem(
        name="rigid-rotation", f=f, g=g, h2=h2,
        domain=lambda p: float(np.hypot(p[0], p[1])) <= 10.0,
        params={"psi": psi}, tolerance=1e-9,
    )


def _twist_g_curve(s: float) -> np.ndarray:
    if s < math.pi:
        return np.array([0.0, s])
    return np.array([math.pi, s - TWO_PI])


def twist_std(params: Mapping[str, Any]) -> ReversibleSystem:
    values = _take(params, {"k": 0.5}, "twist-std")
    k = float(values["k"])
    if not 0.0 <= k <= 4.0:
        raise ValidationError(f"twist-std needs 0 <= k <= 4, got {k}")
    half_k = 0.5 * k

    def forward(p):
        y1 = p[1] + half_k * math.sin(p[0])
        x_new = p[0] + y1
        return np.array([x_new, y1 + half_k * math.sin(x_new)])

    def inverse(p):
        y1 = p[1] - half_k * math.sin(p[0])
        x_old = p[0] - y1
        return np.array([x_old, y1 - half_k * math.sin(x_old)])

    def jac(p):
        c1 = half_k * math.cos(p[0])
        x_new = p[0] + p[1] + half_k * math.sin(p[0])
        c2 = half_k * math.cos(x_new)
        kick1 = np.array([[1.0, 0.0], [c1, 1.0]])
        drift = np.array([[1.0, 1.0], [0.0, 1.0]])
        kick2 = np.array([[1.0, 0.0], [c2, 1.0]])
        return kick2 @ drift @ kick1

    f = PlanarMap(forward=forward, jacobian=jac, inverse=inverse, name="twist-std")
    flip = np.array([[-1.0, 0.0], [0.0, 1.0]])
    gmap = PlanarMap(forward=lambda p: np.array([-p[0], p[1]]), jacobian=lambda p: flip,
                     inverse=lambda p: np.array([-p[0], p[1]]), name="flip")
    # on the cylinder Fix(g) is sin x = 0: s < pi walks the x = 0 branch at y = s,
    # s >= pi the x = pi branch at y = s - 2 pi
    g = Involution(map=gmap, curve=_twist_g_curve, curve_interval=(-math.pi, 3.0 * math.pi),
                   residual=lambda p: math.sin(p[0]), normal=(-1.0, 0.0), name="g")
    # Fix(f o g): y - 2x - (k/2) sin x = 0 mod 2 pi
    h2 = compose_involution(
        f, g,
        curve=lambda s: np.array([s, 2.0 * s + half_k * math.sin(s)]),
        curve_interval=(-math.pi, math.pi),
        residual=lambda p: math.sin(0.5 * (p[1] - 2.0 * p[0] - half_k * math.sin(p[0]))),
        normal=(-1.0, 0.5),
    )
    return ReversibleSystem(
        name="twist-std", f=f, g=g, h2=h2,
        domain=lambda p: abs(p[1]) <= 20.0,
        lattice=((TWO_PI, 0.0), (0.0, TWO_PI)),
        params={"k": k}, tolerance=DEFAULT_ALGEBRAIC_TOL,
    )


def resonant_params_from(values: Mapping[str, Any]) -> ResonantParams:
    """collect p, q, mu, A, B, C and psi (list or psi1, psi2, ...)"""
    psi = values.get("psi")
    if psi is None:
        numbered = sorted((int(key[3:]), float(v)) for key, v in values.items()
                          if key.startswith("psi") and key[3:].isdigit())
        psi = [v for _, v in numbered]
    elif isinstance(psi, (int, float)):
        psi = [float(psi)]
    for key in ("p", "q"):
        if float(values[key]) != int(float(values[key])):
            raise ValidationError(f"{key} must be an integer")
    return ResonantParams(
        p=int(float(values["p"])), q=int(float(values["q"])), mu=float(values["mu"]),
        psi=tuple(float(c) for c in psi), A=float(values["A"]),
        B=float(values.get("B", 0.0)), C=float(values.get("C", 0.0)),
    )


def nf_map(params: Mapping[str, Any]) -> ReversibleSystem:
    rp, tol, guard = nf_params(params)
    return nf_system(rp, tol=tol, guard=guard)


def nf_params(params: Mapping[str, Any]) -> Tuple[ResonantParams, float, float]:
    """normal form coefficients plus integrator tol and guard radius, defaults filled"""
    base = {"p": 1, "q": 5, "mu": 0.0, "psi": None, "A": 1.0, "B": 0.0, "C": 0.0,
            "tol": flow.DEFAULT_TOL, "guard": flow.DEFAULT_GUARD}
    extra = {key: None for key in params if key.startswith("psi") and key[3:].isdigit()}
    values = _take(params, {**base, **extra}, "nf-map")
    if values["psi"] is None and not extra:
        values["psi"] = [1.0]
    if values["psi"] is None:
        del values["psi"]
    rp = resonant_params_from(values)
    tol = float(values["tol"])
    guard = float(values["guard"])
    if tol <= 0 or guard <= 0:
        raise ValidationError("tol and guard must be positive")
    return rp, tol, guard


def _fixed_line_curve(h2: Involution, beta: float):
    """s -> the point of Fix(h2) across from s e^{i beta}

    the ray point is pushed along the normal until the signed distance vanishes.
    """
    direction = np.array([math.cos(beta), math.sin(beta)])
    normal = np.asarray(h2.normal, dtype=float)

    def curve(s: float) -> np.ndarray:
        base = s * direction
        width = 0.1 * max(abs(s), 0.01)
        try:
            t = brentq(lambda t: h2.signed_distance(base + t * normal), -width, width, xtol=1e-15)
        except (ValueError, LabError) as exc:
            raise NumericalError(f"no point of Fix(fg) across from s = {s}: {exc}",
                                 {"s": s, "width": width}) from exc
        return base + t * normal

    return curve


def nf_system(rp: ResonantParams, tol: float = flow.DEFAULT_TOL, guard: float = flow.DEFAULT_GUARD) -> ReversibleSystem:
    def forward(p):
        z = flow.poincare_map(rp, complex(p[0], p[1]), tol, guard)
        return np.array([z.real, z.imag])

    def inverse(p):
        z = flow.poincare_inverse(rp, complex(p[0], p[1]), tol, guard)
        return np.array([z.real, z.imag])

    def jac(p):
        return flow.poincare_jacobian(rp, complex(p[0], p[1]), tol, guard)

    f = PlanarMap(forward=forward, jacobian=jac, inverse=inverse, name="nf-map")
    g = conjugation()
    g = Involution(map=g.map, curve=g.curve, curve_interval=(-guard, guard), residual=g.residual,
                   normal=g.normal, name="g")
    # Fix(T o conj) hugs the line at angle pi p / q near the origin
    beta = math.pi * rp.p / rp.q
    normal = (-math.sin(beta), math.cos(beta))
    h2 = compose_involution(f, g, normal=normal)
    box = 0.6 * guard
    h2 = replace(h2, curve=_fixed_line_curve(h2, beta), curve_interval=(-box, box))
    return ReversibleSystem(
        name="nf-map", f=f, g=g, h2=h2,
        domain=lambda p: float(np.hypot(p[0], p[1])) <= guard,
        params={**rp.as_dict(), "tol": tol, "guard": guard},
        tolerance=DEFAULT_INTEGRATED_TOL,
        box=((-box, box), (-box, box)),
    )


def builtin_system(name: str, params: Mapping[str, Any] = None) -> ReversibleSystem:
    params = dict(params or {})
    if name == "rigid-rotation":
        return rigid_rotation(params)
    if name == "twist-std":
        return twist_std(params)
    if name == "nf-map":
        return nf_map(params)
    raise ValidationError(f"unknown system '{name}', expected one of {list(BUILTIN_NAMES)}")
