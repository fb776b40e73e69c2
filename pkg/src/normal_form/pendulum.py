"""pendulum limit of the conservative resonant flow

near the resonant circle rho* (mu + Psi(rho*) = 0) put rho = rho* + eps u
and t = tau / omega with

    omega^2 = A rho*^{q-1} Psi'(rho*),    eps = omega / Psi'(rho*)

then d theta/d tau = u + ..., du/d tau = sin(q theta) + ... and the
leftover terms are of size |mu|^{(q-4)/4}.
"""
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from src.normal_form.params import ResonantParams, normalize_sign
from src.utils.errors import NumericalError, ValidationError
from src.utils.helpers import loglog_slope

DEFAULT_U_RANGE = (-2.0, 2.0)
DEFAULT_RESOLUTION = (41, 41)


@dataclass(frozen=True)
class PendulumRescaling:
    rho_star: float
    u_scale: float
    tau_scale: float
    mu: float

    def rho(self, u: float) -> float:
        return self.rho_star + self.u_scale * u


def _check(params: ResonantParams) -> None:
    problems = []
    if not params.conservative:
        problems.append("pendulum limit needs B = C = 0")
    if params.mu * params.psi1 >= 0:
        problems.append("pendulum limit needs mu * psi1 < 0")
    if params.A * params.psi1 == 0:
        problems.append("pendulum limit needs A * psi1 != 0")
    if problems:
        raise ValidationError("; ".join(problems), {"problems": problems})


def solve_rho_star(params: ResonantParams) -> float:
    """root of mu + Psi(rho) = 0 on the small-rho branch"""
    guess = math.sqrt(-params.mu / params.psi1)

    def g(rho):
        return params.mu + params.Psi(rho)

    lo, hi = 0.25 * guess, 4.0 * guess
    if g(lo) * g(hi) > 0:
        raise NumericalError("resonant circle not bracketed", {"bracket": [lo, hi], "guess": guess})
    try:
        return float(brentq(g, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps))
    except RuntimeError as exc:
        raise NumericalError(f"resonant circle solve failed: {exc}", {"bracket": [lo, hi]}) from exc


def rescaling(params: ResonantParams) -> PendulumRescaling:
    """scales for params with A psi1 > 0 (see oriented)"""
    _check(params)
    rho_star = solve_rho_star(params)
    slope = params.dPsi(rho_star)
    omega2 = params.A * rho_star ** (params.q - 1) * slope
    if omega2 <= 0 or slope == 0:
        raise ValidationError("rescaling scale is not positive", {"omega2": omega2, "dpsi": slope})
    omega = math.sqrt(omega2)
    eps = omega / slope
    if eps <= 0:
        raise ValidationError("rescaling scale is not positive", {"eps": eps})
    return PendulumRescaling(rho_star=rho_star, u_scale=eps, tau_scale=omega, mu=params.mu)


def rescaled_field(params: ResonantParams, scale: PendulumRescaling, theta: float, u: float) -> Tuple[float, float]:
    """(d theta/d tau, du/d tau) of the exact conservative flow in pendulum coordinates"""
    q = params.q
    rho = scale.rho(u)
    if rho <= 0:
        raise ValidationError(f"u={u} maps to rho={rho} <= 0, shrink the u range")
    omega, eps = scale.tau_scale, scale.u_scale
    theta_dot = (params.mu + params.Psi(rho) + params.A * rho ** (q - 2) * math.cos(q * theta)) / omega
    u_dot = params.A * rho ** (q - 1) * math.sin(q * theta) / (omega * eps)
    return theta_dot, u_dot


def pendulum_deviation(params: ResonantParams, mu: Optional[float] = None,
                       theta_range: Tuple[float, float] = (-math.pi, math.pi),
                       u_range: Tuple[float, float] = DEFAULT_U_RANGE,
                       resolution: Tuple[int, int] = DEFAULT_RESOLUTION) -> float:
    """sup over the box of |rescaled field - (u, sin q theta)|"""
    if mu is not None:
        params = params.with_mu(mu)
    params = oriented(params)
    scale = rescaling(params)
    worst = 0.0
    for theta in np.linspace(theta_range[0], theta_range[1], resolution[0]):
        for u in np.linspace(u_range[0], u_range[1], resolution[1]):
            td, ud = rescaled_field(params, scale, float(theta), float(u))
            dev = math.hypot(td - u, ud - math.sin(params.q * theta))
            worst = max(worst, dev)
    return worst


def pendulum_slope(params: ResonantParams, mus: Iterable[float], **box) -> Tuple[float, List[float]]:
    """log-log slope of the deviation against |mu|"""
    mus: Sequence[float] = list(mus)
    devs = [pendulum_deviation(params, m, **box) for m in mus]
    return loglog_slope([abs(m) for m in mus], devs), devs


def oriented(params: ResonantParams) -> ResonantParams:
    # turn the angle by pi/q when A psi1 < 0, the deviation does not change
    _check(params)
    return normalize_sign(params)[0]


def expected_exponent(q: int) -> float:
    return (q - 4) / 4.0
