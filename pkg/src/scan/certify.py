"""sink/source certificates for the asymmetric pair and their map-level check"""
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.core.systems import nf_system
from src.normal_form import flow
from src.normal_form.equilibria import Equilibrium, find_equilibria, reduce_equilibria
from src.normal_form.params import ResonantParams
from src.orbits.orbit import POLAR_FRAME, MonodromyFrame, PeriodicOrbit, build_orbit, iterate_partial, monodromy
from src.utils import console
from src.utils.errors import NumericalError, ValidationError

DELTA_FLOOR = 1e-10
FLOW_TO_MAP = {"center": "elliptic", "saddle": "saddle", "sink": "sink", "source": "source"}
MAP_TOL = 1e-13
SWAP = {"sink": "source", "source": "sink"}


@dataclass(frozen=True)
class SinkSourceCertificate:
    certified: bool
    criterion: float
    delta: float
    sink: Optional[Equilibrium] = None
    source: Optional[Equilibrium] = None
    reason: str = ""

    def as_dict(self) -> dict:
        return {
            "certified": self.certified,
            "criterion": self.criterion,
            "delta": self.delta,
            "sink": self.sink.as_dict() if self.sink else None,
            "source": self.source.as_dict() if self.source else None,
            "reason": self.reason,
        }


def field_scale(params: ResonantParams, rho: float) -> float:
    # size of the resonant terms at radius rho, the natural unit of the pair's eigenvalues
    return params.q * rho ** (params.q - 2) * (abs(params.A) + (abs(params.B) + abs(params.C)) * rho * rho)


def certify_sink_source(params: ResonantParams, delta_floor: float = DELTA_FLOOR) -> SinkSourceCertificate:
    """one asymmetric equilibrium contracts, its reversor image expands

    a certificate claimed while B(B - C) <= 0 is a counterexample and raises.
    """
    asym = [e for e in reduce_equilibria(find_equilibria(params)) if not e.symmetric]
    if not asym:
        raise ValidationError("no asymmetric equilibria at these parameters",
                              {"params": params.as_dict()})
    criterion = params.B * (params.B - params.C)
    delta = delta_floor * field_scale(params, asym[0].rho)
    sinks = [e for e in asym if e.max_real_part < -delta]
    sources = [e for e in asym if e.min_real_part > delta]
    if not sinks or not sources:
        kinds = sorted({e.kind for e in asym})
        return SinkSourceCertificate(False, criterion, delta, reason=f"asymmetric equilibria are {kinds}")
    sink = sinks[0]
    # the reversor maps phi to -phi
    source = min(sources, key=lambda e: abs(math.remainder(e.phi + sink.phi, 2.0 * math.pi)) + abs(e.rho - sink.rho))
    if criterion <= 0:
        raise NumericalError(
            "sink/source pair found although B(B - C) <= 0",
            {"criterion": criterion, "sink": sink.as_dict(), "source": source.as_dict()},
        )
    pairing = abs(sum(ev.real for ev in sink.eigenvalues) + sum(ev.real for ev in source.eigenvalues))
    console.debug("SCAN", f"sink/source certified, delta={delta:.3g}, trace mismatch={pairing:.3g}")
    return SinkSourceCertificate(True, criterion, delta, sink, source, "B(B - C) > 0")


@dataclass(frozen=True)
class MapConfirmation:
    orbit: PeriodicOrbit
    flow_kind: str
    map_kind: str
    matches: bool
    delta: float
    residual_history: List[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "flow_class": self.flow_kind,
            "map_class": self.map_kind,
            "matches": self.matches,
            "delta": self.delta,
            "residual_history": list(self.residual_history),
            "orbit": self.orbit.as_dict(),
        }


def map_collar(eq: Equilibrium, q: int) -> float:
    """classification collar on multiplier moduli for the period-q orbit

    T^q near the orbit is close to the time-q flow, so moduli differ from 1 by
    about q |Re lambda|; the collar stays below half of that.
    """
    if eq.kind in ("sink", "source"):
        smallest = min(abs(ev.real) for ev in eq.eigenvalues)
        return min(1e-6, 0.5 * q * smallest)
    return 1e-6


def map_frame(eq: Equilibrium) -> Optional[MonodromyFrame]:
    """polar frame for the asymmetric pair, None (plain eigenvalues) otherwise

    on the asymmetric branch A + (C - B) rho^2 = 0, so rho' does not depend on
    theta there and the period-q monodromy is lower triangular in (rho, theta).
    """
    return POLAR_FRAME if eq.kind in ("sink", "source") else None


def pair_swapped(kind: str, pair_kind: str) -> bool:
    # only a sink/source pair can swap, a saddle going to a saddle is no evidence
    return kind in SWAP and pair_kind == SWAP[kind]


def map_level_confirm(params: ResonantParams, eq: Equilibrium, tol: float = MAP_TOL,
                      guard: float = flow.DEFAULT_GUARD, newton_tol: float = 1e-12,
                      max_steps: int = 20) -> MapConfirmation:
    """period-q orbit of T seeded at a flow equilibrium, classified from its multipliers"""
    if eq.kind not in FLOW_TO_MAP:
        raise ValidationError(f"cannot confirm a {eq.kind} equilibrium")
    sys = nf_system(params, tol=tol, guard=guard)
    q = params.q
    x = np.array([eq.z.real, eq.z.imag])
    history: List[float] = []
    for _ in range(max_steps + 1):
        points, escaped = iterate_partial(sys, x, q)
        if escaped is not None:
            raise NumericalError("seed escaped the guard radius", {"residual_history": history})
        r = points[-1] - points[0]
        history.append(float(np.linalg.norm(r)))
        if history[-1] <= newton_tol:
            break
        if len(history) > 2 and history[-1] > 1e3 * min(history):
            raise NumericalError("newton on T^q - id diverged", {"residual_history": history})
        step = np.linalg.solve(monodromy(sys, points[:-1]) - np.eye(2), -r)
        x = x + step
    else:
        if history[-1] > 1e3 * newton_tol:
            raise NumericalError("newton on T^q - id did not converge", {"residual_history": history})
    collar = map_collar(eq, q)
    orbit = build_orbit(sys, x, q, "g" if eq.symmetric else "none", tol=collar, frame=map_frame(eq))
    moduli = orbit.classification.moduli
    if orbit.kind == "sink":
        delta = 1.0 - moduli[1]
    elif orbit.kind == "source":
        delta = moduli[0] - 1.0
    else:
        delta = abs(orbit.jacobian_product - 1.0)
    expected = FLOW_TO_MAP[eq.kind]
    if orbit.kind != expected:
        console.warn("SCAN", f"flow {eq.kind} became a map-level {orbit.kind}")
    return MapConfirmation(orbit, eq.kind, orbit.kind, orbit.kind == expected, float(delta), history)
