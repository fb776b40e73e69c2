"""diophantine certificates and continued fraction convergents"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple, Union

import numpy as np

from src.utils import console
from src.utils.errors import NumericalError, ValidationError

GATE_POLICIES = ("warn", "reject")


@dataclass(frozen=True)
class DiophantineCertificate:
    psi0: float
    alpha: float
    K: float
    k_max: int
    k_star: int

    def as_dict(self) -> dict:
        return {"certified": True, "psi0": self.psi0, "alpha": self.alpha, "K": self.K,
                "k_max": self.k_max, "k_star": self.k_star}


@dataclass(frozen=True)
class DiophantineRefusal:
    psi0: float
    alpha: float
    k: int
    k_max: int

    def as_dict(self) -> dict:
        return {"certified": False, "psi0": self.psi0, "alpha": self.alpha, "violating_k": self.k,
                "k_max": self.k_max}


def _distances(psi0: float, k_max: int) -> Tuple[np.ndarray, np.ndarray]:
    k = np.arange(1, k_max + 1, dtype=float)
    kp = k * psi0
    return k, np.abs(kp - np.rint(kp))


def diophantine_check(psi0: float, alpha: float, k_max: int) -> Union[DiophantineCertificate, DiophantineRefusal]:
    """K = min_k |k|^alpha dist(k psi0, Z) over 1 <= k <= k_max"""
    if k_max < 1:
        raise ValidationError("k_max must be >= 1")
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    if not math.isfinite(psi0):
        raise ValidationError("psi0 must be finite")
    k, dist = _distances(psi0, k_max)
    zero = np.nonzero(dist == 0.0)[0]
    if len(zero):
        return DiophantineRefusal(psi0, alpha, int(k[zero[0]]), k_max)
    scaled = k ** alpha * dist
    i = int(np.argmin(scaled))
    cert = DiophantineCertificate(psi0, alpha, float(scaled[i]), k_max, int(k[i]))
    verify_certificate(cert)
    return cert


def verify_certificate(cert: DiophantineCertificate) -> None:
    """second pass: |k psi0 + p| >= K / k^alpha with p the nearest integer to -k psi0"""
    for start in range(1, cert.k_max + 1, 65536):
        k = np.arange(start, min(start + 65536, cert.k_max + 1), dtype=np.int64)
        p = -np.rint(k * cert.psi0)
        lhs = np.abs(k * cert.psi0 + p)
        rhs = cert.K / k.astype(float) ** cert.alpha
        bad = np.nonzero(lhs < rhs * (1.0 - 1e-12))[0]
        if len(bad):
            raise NumericalError("diophantine certificate failed its re-check",
                                 {"k": int(k[bad[0]]), "lhs": float(lhs[bad[0]]), "rhs": float(rhs[bad[0]])})


def continued_fraction(x: float, terms: int) -> List[int]:
    out = []
    frac = Fraction(x)
    for _ in range(terms):
        a = math.floor(frac)
        out.append(int(a))
        frac -= a
        if frac == 0:
            break
        frac = 1 / frac
    return out


def convergents(x: float, terms: int = 12) -> List[Tuple[int, int]]:
    """(m, n) of the continued fraction convergents m/n of x"""
    out = []
    h_prev, h = 1, 0
    k_prev, k = 0, 1
    for a in continued_fraction(x, terms):
        h_prev, h = a * h_prev + h, h_prev
        k_prev, k = a * k_prev + k, k_prev
        out.append((h_prev, k_prev))
    return out


def golden_mean() -> float:
    return (math.sqrt(5.0) - 1.0) / 2.0


def check_gate(psi0: float, m: int, n: int, policy: str = "warn") -> bool:
    """|n psi0 - m| <= 1, the regime where negative multipliers are excluded"""
    if policy not in GATE_POLICIES:
        raise ValidationError(f"gate policy must be one of {list(GATE_POLICIES)}")
    ok = abs(n * psi0 - m) <= 1.0
    if not ok:
        message = f"m/n = {m}/{n} is outside the gate |n psi0 - m| <= 1 for psi0 = {psi0:.12g}"
        if policy == "reject":
            raise ValidationError(message, {"m": m, "n": n, "psi0": psi0})
        console.warn("KAM", message)
    return ok
