from typing import Iterable, Sequence, Tuple

import numpy as np

from src.utils.errors import ValidationError


def make_rng(seed: int) -> np.random.Generator:
    """seeded generator, every sample set in the lab comes from one of these"""
    return np.random.default_rng(seed)


def random_points(rng: np.random.Generator, box: Sequence[Tuple[float, float]], count: int) -> np.ndarray:
    # uniform samples in an axis aligned box, shape (count, 2)
    if count <= 0:
        raise ValidationError("need at least one sample")
    (x_lo, x_hi), (y_lo, y_hi) = box
    xs = rng.uniform(x_lo, x_hi, count)
    ys = rng.uniform(y_lo, y_hi, count)
    return np.column_stack((xs, ys))


def loglog_slope(xs: Iterable[float], ys: Iterable[float]) -> float:
    """least squares slope of log y against log x"""
    x = np.asarray(list(xs), dtype=float)
    y = np.asarray(list(ys), dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        raise ValidationError("log-log fit needs two positive points")
    slope, _ = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(slope)


def geometric_sequence(lo: float, hi: float, count: int) -> np.ndarray:
    if lo <= 0 or hi <= 0 or count < 2:
        raise ValidationError("geometric sequence needs positive ends and two points")
    return np.geomspace(lo, hi, count)
