"""the resonant vector field in cartesian (complex) and polar form

phi in the polar routines is the reduced angle phi = q * theta, theta being
the ordinary polar angle of z.
"""
import math
from typing import Tuple

import numpy as np

from src.normal_form.params import ResonantParams
from src.utils.errors import ValidationError


def eval_field_cartesian(params: ResonantParams, z):
    """complex velocity at z, works on scalars and arrays"""
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValidationError("z must be finite")
    q = params.q
    zc = np.conj(z)
    r2 = (z * zc).real
    out = 1j * params.mu * z
    power = r2
    for c in params.psi:
        out = out + 1j * c * power * z
        power = power * r2
    out = out + 1j * params.A * zc ** (q - 1)
    if params.B:
        out = out + 1j * params.B * z ** (q + 1)
    if params.C:
        out = out + 1j * params.C * z * zc ** q
    return out[()] if out.ndim == 0 else out


def wirtinger(params: ResonantParams, z) -> Tuple[complex, complex]:
    # (dV/dz, dV/dconj(z)) at a single point
    z = complex(z)
    q = params.q
    zc = z.conjugate()
    r2 = (z * zc).real
    v_z = 1j * params.mu
    v_zc = 0j
    for j, c in enumerate(params.psi, start=1):
        v_z += 1j * c * (j + 1) * r2 ** j
        v_zc += 1j * c * j * r2 ** (j - 1) * z * z
    v_zc += 1j * params.A * (q - 1) * zc ** (q - 2)
    v_z += 1j * params.B * (q + 1) * z ** q
    v_z += 1j * params.C * zc ** q
    v_zc += 1j * params.C * q * z * zc ** (q - 1)
    return v_z, v_zc


def cartesian_jacobian(params: ResonantParams, z) -> np.ndarray:
    """real 2x2 derivative of the field seen as a map of (x, y)"""
    v_z, v_zc = wirtinger(params, z)
    col_x = v_z + v_zc
    col_y = 1j * (v_z - v_zc)
    return np.array([[col_x.real, col_y.real], [col_x.imag, col_y.imag]])


def divergence_cartesian(params: ResonantParams, z) -> float:
    """closed form 2 Re(dV/dz) = 2 rho^q sin(q theta) (C - (q+1) B)"""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError("z must be finite")
    v_z, _ = wirtinger(params, z)
    return 2.0 * v_z.real


def divergence_fd(params: ResonantParams, z, h: float = 1e-6) -> float:
    # central differences, only used as an oracle
    z = complex(z)
    dvx = (eval_field_cartesian(params, z + h) - eval_field_cartesian(params, z - h)) / (2 * h)
    dvy = (eval_field_cartesian(params, z + 1j * h) - eval_field_cartesian(params, z - 1j * h)) / (2 * h)
    return float(dvx.real + dvy.imag)


def eval_field_polar(params: ResonantParams, rho: float, phi: float) -> Tuple[float, float]:
    """(rho', phi') of the reduced polar system, phi = q*theta"""
    if not rho > 0:
        raise ValidationError(f"rho must be positive, got {rho}")
    q = params.q
    r2 = rho * rho
    rho_dot = rho ** (q - 1) * (params.A + (params.C - params.B) * r2) * math.sin(phi)
    phi_dot = q * (params.mu + params.Psi(rho)) + q * rho ** (q - 2) * (
        params.A + (params.C + params.B) * r2) * math.cos(phi)
    return rho_dot, phi_dot


def polar_rates(params: ResonantParams, rho: float, theta: float) -> Tuple[float, float]:
    # (rho', theta') with the ordinary polar angle
    rho_dot, phi_dot = eval_field_polar(params, rho, params.q * theta)
    return rho_dot, phi_dot / params.q


def polar_jacobian(params: ResonantParams, rho: float, theta: float) -> np.ndarray:
    """derivative of (rho', theta') with respect to (rho, theta)"""
    q = params.q
    A, B, C = params.A, params.B, params.C
    s, c = math.sin(q * theta), math.cos(q * theta)
    r2 = rho * rho
    d_rho_rho = ((q - 1) * A * rho ** (q - 2) + (q + 1) * (C - B) * rho ** q) * s
    d_rho_theta = q * rho ** (q - 1) * (A + (C - B) * r2) * c
    d_theta_rho = params.dPsi(rho) + ((q - 2) * A * rho ** (q - 3) + q * (B + C) * rho ** (q - 1)) * c
    d_theta_theta = -q * rho ** (q - 2) * (A + (B + C) * r2) * s
    return np.array([[d_rho_rho, d_rho_theta], [d_theta_rho, d_theta_theta]])


def polar_to_cartesian_velocity(rho: float, theta: float, rho_dot: float, theta_dot: float) -> complex:
    # z' = (rho' + i rho theta') e^{i theta}
    return (rho_dot + 1j * rho * theta_dot) * complex(math.cos(theta), math.sin(theta))


def sample_portrait(params: ResonantParams, rho_range: Tuple[float, float], phi_range: Tuple[float, float],
                    resolution: Tuple[int, int]):
    """grid of (rho, phi, rho', phi') rows for phase portraits"""
    n_rho, n_phi = resolution
    if n_rho < 2 or n_phi < 2:
        raise ValidationError("portrait resolution must be at least 2 x 2")
    if not 0 < rho_range[0] < rho_range[1]:
        raise ValidationError("portrait rho range must be positive and ordered")
    rows = []
    for rho in np.linspace(rho_range[0], rho_range[1], n_rho):
        for phi in np.linspace(phi_range[0], phi_range[1], n_phi):
            rho_dot, phi_dot = eval_field_polar(params, float(rho), float(phi))
            rows.append((float(rho), float(phi), rho_dot, phi_dot))
    return rows
