"""time-t maps of the normal form flow and the truncated poincare map

integration is scipy's DOP853 (embedded 8(5,3) runge-kutta) with rtol = tol.
derivatives come from integrating the variational equations next to the
state, the same way a state transition matrix is propagated.
"""
import cmath
from typing import List, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from src.normal_form.field import cartesian_jacobian, eval_field_cartesian
from src.normal_form.params import ResonantParams
from src.utils.errors import EscapeError, NumericalError, ValidationError

DEFAULT_TOL = 1e-12
DEFAULT_GUARD = 0.5
METHOD = "DOP853"


def _guard_event(radius: float):
    def leave(t, y):
        return y[0] * y[0] + y[1] * y[1] - radius * radius

    leave.terminal = True
    leave.direction = 1
    return leave


def _check(params: ResonantParams, z0: complex, t: float, tol: float, guard: float) -> complex:
    z0 = complex(z0)
    if not (np.isfinite(z0.real) and np.isfinite(z0.imag)):
        raise ValidationError("initial point must be finite")
    if tol <= 0:
        raise ValidationError("integration tolerance must be positive")
    if abs(z0) > guard:
        raise EscapeError(f"start |z|={abs(z0):.3g} is outside the guard radius {guard}", escape_index=0)
    return z0


def _solve(rhs, y0: np.ndarray, t: float, tol: float, guard: float):
    if t == 0:
        return y0
    sol = solve_ivp(rhs, (0.0, t), y0, method=METHOD, rtol=tol, atol=tol * 1e-3,
                    events=_guard_event(guard))
    if sol.status == 1:
        raise EscapeError(f"trajectory crossed the guard radius {guard} at t={sol.t_events[0][0]:.6g}",
                          escape_index=0, partial=sol.y[:, -1].tolist())
    if sol.status != 0:
        # solve_ivp reports step size underflow and friends here
        raise NumericalError(f"integrator failed: {sol.message}", {"t_reached": float(sol.t[-1])})
    return sol.y[:, -1]


def integrate_flow(params: ResonantParams, z0, t: float = 1.0, tol: float = DEFAULT_TOL,
                   guard: float = DEFAULT_GUARD) -> complex:
    """flow of the normal form field for time t starting at z0"""
    z0 = _check(params, z0, t, tol, guard)

    def rhs(_, y):
        v = eval_field_cartesian(params, complex(y[0], y[1]))
        return [v.real, v.imag]

    y = _solve(rhs, np.array([z0.real, z0.imag]), t, tol, guard)
    return complex(y[0], y[1])


def flow_with_jacobian(params: ResonantParams, z0, t: float = 1.0, tol: float = DEFAULT_TOL,
                       guard: float = DEFAULT_GUARD) -> Tuple[complex, np.ndarray]:
    """flow and its 2x2 derivative (state transition matrix)"""
    z0 = _check(params, z0, t, tol, guard)

    def rhs(_, y):
        z = complex(y[0], y[1])
        v = eval_field_cartesian(params, z)
        phi = y[2:].reshape(2, 2)
        dphi = cartesian_jacobian(params, z) @ phi
        return np.concatenate(([v.real, v.imag], dphi.ravel()))

    y0 = np.concatenate(([z0.real, z0.imag], np.eye(2).ravel()))
    y = _solve(rhs, y0, t, tol, guard)
    return complex(y[0], y[1]), y[2:].reshape(2, 2)


def rotate(z: complex, angle: float) -> complex:
    return complex(z) * cmath.exp(1j * angle)


def poincare_map(params: ResonantParams, z, tol: float = DEFAULT_TOL, guard: float = DEFAULT_GUARD) -> complex:
    """T = R_{2 pi p/q} o F with F the time-1 map"""
    return rotate(integrate_flow(params, z, 1.0, tol, guard), params.angle)


def poincare_jacobian(params: ResonantParams, z, tol: float = DEFAULT_TOL,
                      guard: float = DEFAULT_GUARD) -> np.ndarray:
    _, dflow = flow_with_jacobian(params, z, 1.0, tol, guard)
    c, s = np.cos(params.angle), np.sin(params.angle)
    return np.array([[c, -s], [s, c]]) @ dflow


def poincare_inverse(params: ResonantParams, z, tol: float = DEFAULT_TOL, guard: float = DEFAULT_GUARD) -> complex:
    # conj o T o conj, which is T^{-1} for the reversible field
    return poincare_map(params, complex(z).conjugate(), tol, guard).conjugate()


def area_distortion(params: ResonantParams, z0, steps: int, tol: float = DEFAULT_TOL,
                    guard: float = DEFAULT_GUARD) -> List[float]:
    """det DT along the T-orbit of z0, one value per step"""
    if steps < 1:
        raise ValidationError("steps must be positive")
    dets = []
    z = complex(z0)
    for _ in range(steps):
        z_next, dflow = flow_with_jacobian(params, z, 1.0, tol, guard)
        dets.append(float(np.linalg.det(dflow)))
        z = rotate(z_next, params.angle)
    return dets
