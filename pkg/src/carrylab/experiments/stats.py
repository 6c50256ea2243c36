"""Sigmoid curve fitting and Spearman rank correlation."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import t as t_dist

_EXACT_PERMUTATION_MAX_N = 9
_QUANTILE_STARTS = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass(frozen=True)
class SigmoidFit:
    """Parameters of a / (1 + exp(-g (x - c0))); nan fields when failed."""

    a: float
    g: float
    c0: float
    r_squared: float
    status: str  # "ok" | "failed"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


_FAILED_FIT = SigmoidFit(math.nan, math.nan, math.nan, math.nan, "failed")


def sigmoid_model(a: float, g: float, c0: float, x: np.ndarray) -> np.ndarray:
    expo = np.clip(-g * (np.asarray(x, dtype=float) - c0), -60.0, 60.0)
    return a / (1.0 + np.exp(expo))


def _slope_start(xs: np.ndarray, ys: np.ndarray, a: float) -> float:
    """Growth-rate guess from the slope of logit(y/a) against x."""
    frac = np.clip(ys / a, 1e-6, 1.0 - 1e-6)
    z = np.log(frac / (1.0 - frac))
    x_c = xs - xs.mean()
    denom = float((x_c * x_c).sum())
    if denom == 0.0:
        return 1.0
    slope = float((x_c * (z - z.mean())).sum()) / denom
    if not math.isfinite(slope) or slope == 0.0:
        return 1.0
    return slope


def fit_sigmoid(points) -> SigmoidFit:
    """Least-squares sigmoid fit of an (epoch, accuracy) curve.

    The curve is truncated at its first maximum before fitting. Five
    deterministic starts (asymptote at the max accuracy, c0 at quantiles of
    the epoch range, growth rate from a logit-slope heuristic) feed
    Levenberg-Marquardt; a fit is accepted when the solver converges with
    finite parameters and asymptote in [0, 1.05]. No start converging, a
    flat curve, or fewer than 4 points after truncation all yield status
    "failed".
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 4:
        raise ValueError(f"need at least 4 points, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])

    cut = int(np.argmax(ys))  # first occurrence of the maximum
    xs, ys = xs[:cut + 1], ys[:cut + 1]
    if len(xs) < 4 or np.ptp(ys) == 0.0 or np.ptp(xs) == 0.0:
        return _FAILED_FIT

    a0 = float(ys.max())
    g0 = _slope_start(xs, ys, a0)
    lo, hi = float(xs.min()), float(xs.max())

    def residuals(theta):
        return sigmoid_model(theta[0], theta[1], theta[2], xs) - ys

    best = None
    for q in _QUANTILE_STARTS:
        start = np.array([a0, g0, lo + q * (hi - lo)])
        try:
            res = least_squares(residuals, start, method="lm", max_nfev=2000)
        except Exception:
            continue
        a, g, c0 = (float(v) for v in res.x)
        if res.status <= 0 or not all(map(math.isfinite, (a, g, c0))):
            continue
        if not 0.0 <= a <= 1.05:
            continue
        if best is None or res.cost < best[0]:
            best = (float(res.cost), a, g, c0)
    if best is None:
        return _FAILED_FIT

    _, a, g, c0 = best
    ss_res = float(((sigmoid_model(a, g, c0, xs) - ys) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot
    return SigmoidFit(a, g, c0, r2, "ok")


def average_ranks(values) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v))
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _rank_corr(rx: np.ndarray, ry: np.ndarray) -> float:
    x = rx - rx.mean()
    y = ry - ry.mean()
    denom = math.sqrt(float((x * x).sum()) * float((y * y).sum()))
    if denom == 0.0:
        raise ValueError("correlation undefined for a constant series")
    return float((x * y).sum()) / denom


def spearman(xs, ys) -> tuple[float, float]:
    """Rank correlation with average ranks for ties.

    Two-sided p-value: exact over all rank permutations for n <= 9, the
    usual t approximation above that.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("series must be equal-length 1-d")
    n = len(xs)
    if n < 3:
        raise ValueError(f"need at least 3 observations, got {n}")
    rx = average_ranks(xs)
    ry = average_ranks(ys)
    rho = _rank_corr(rx, ry)

    if n <= _EXACT_PERMUTATION_MAX_N:
        perms = np.array(list(itertools.permutations(range(n))))
        px = rx[perms] - rx.mean()
        y_c = ry - ry.mean()
        denom = math.sqrt(float((px[0] * px[0]).sum()) * float((y_c * y_c).sum()))
        stats = np.abs(px @ y_c) / denom
        p = float((stats >= abs(rho) - 1e-12).sum()) / len(perms)
        return rho, p

    if abs(rho) >= 1.0:
        return rho, 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = 2.0 * float(t_dist.sf(abs(t), n - 2))
    return rho, p
