import math
from dataclasses import dataclass, replace
from typing import Sequence, Tuple

from src.utils.errors import ValidationError

MIN_Q = 5


@dataclass(frozen=True)
class ResonantParams:
    """coefficients of the truncated resonant normal form

    z' = i mu z + i sum_j psi_j |z|^{2j} z + i A conj(z)^{q-1}
         + i B z^{q+1} + i C z conj(z)^q

    B = C = 0 is the conservative form. psi is stored as given, its length
    is the caller's choice (see default_psi_length).
    """

    p: int
    q: int
    mu: float
    psi: Tuple[float, ...]
    A: float
    B: float = 0.0
    C: float = 0.0

    def __post_init__(self):
        # keep psi hashable whatever the caller handed us
        object.__setattr__(self, "psi", tuple(float(c) for c in self.psi))
        problems = []
        if self.q < MIN_Q:
            problems.append(f"q must be >= {MIN_Q}, got {self.q}")
        if self.q >= 1 and math.gcd(int(self.p), int(self.q)) != 1:
            problems.append(f"p and q must be coprime, got p={self.p}, q={self.q}")
        values = [self.mu, self.A, self.B, self.C, *self.psi]
        if not all(math.isfinite(v) for v in values):
            problems.append("all coefficients must be finite")
        if problems:
            raise ValidationError("; ".join(problems), {"problems": problems})

    @property
    def conservative(self) -> bool:
        return self.B == 0.0 and self.C == 0.0

    @property
    def psi1(self) -> float:
        return self.psi[0] if self.psi else 0.0

    @property
    def angle(self) -> float:
        # resonant rotation 2 pi p / q
        return 2.0 * math.pi * self.p / self.q

    def Psi(self, rho: float) -> float:
        r2 = rho * rho
        total, power = 0.0, r2
        for c in self.psi:
            total += c * power
            power *= r2
        return total

    def dPsi(self, rho: float) -> float:
        r2 = rho * rho
        total, power = 0.0, rho
        for j, c in enumerate(self.psi, start=1):
            total += 2.0 * j * c * power
            power *= r2
        return total

    def with_mu(self, mu: float) -> "ResonantParams":
        return replace(self, mu=float(mu))

    def with_changes(self, **changes) -> "ResonantParams":
        if "psi" in changes:
            changes["psi"] = tuple(changes["psi"])
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "mu": self.mu, "psi": list(self.psi),
                "A": self.A, "B": self.B, "C": self.C}


def default_psi_length(q: int, conservative: bool = True) -> int:
    """floor((q-1)/2) terms for the conservative form, floor(q/2) otherwise"""
    return (q - 1) // 2 if conservative else q // 2


def pad_psi(psi: Sequence[float], q: int, conservative: bool = True) -> Tuple[float, ...]:
    # fill missing higher coefficients with zeros up to the default length
    psi = tuple(float(c) for c in psi)
    length = max(len(psi), default_psi_length(q, conservative))
    return psi + (0.0,) * (length - len(psi))


def normalize_sign(params: ResonantParams) -> Tuple[ResonantParams, float]:
    """make A*psi1 > 0 by turning the polar angle by pi/q

    the shift multiplies conj(z)^{q-1}, z^{q+1} and z conj(z)^q by -1, so
    A, B, C all flip. returns the new params and the applied angle shift.
    """
    if params.A * params.psi1 >= 0:
        return params, 0.0
    flipped = replace(params, A=-params.A, B=-params.B, C=-params.C)
    return flipped, math.pi / params.q
