"""Best-approximation surrogates and the exponential-mean upper bound.

True sup-norm best approximation by Vilenkin polynomials is a convex
problem that the estimates only ever use through factor-2 truncation
surrogates, so the canonical computable quantity here is the residual of
the scale-ladder partial sum: it brackets the true best approximation
between itself and half of itself.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .summability import (
    CylinderGrid2D,
    StrongMeanResult,
    marginal_sum_1,
    marginal_sum_2,
    rect_partial_sum,
    strong_mean_2d,
    sqrt_gauge,
)


@dataclass(frozen=True)
class ApproxReport:
    """Per-scale approximation surrogates for one 2D grid.

    e1[L], e2[L] are the marginal surrogates at scale L; eblock[L] is the
    block surrogate at (L, L).  Each sequence tracks a non-increasing best
    approximation within a factor of 2 (so successive values can grow, but
    never by more than that factor) and is exactly 0 at full depth.
    """

    scales: tuple[int, ...]
    e1: tuple[float, ...]
    e2: tuple[float, ...]
    eblock: tuple[float, ...]

    def rows(self) -> list[tuple[int, float, float, float]]:
        return list(zip(self.scales, self.e1, self.e2, self.eblock))


def block_approx_surrogate(f: CylinderGrid2D, L: int, R: int) -> float:
    """||f - S_{M_L, M_R} f||_C, within a factor 2 of the true E_{M_L,M_R}."""
    scales = f.ms.number_system.scales
    if L > f.depth or R > f.depth:
        raise ValueError("block scales exceed the grid depth")
    resid = f.values - rect_partial_sum(f, scales[L], scales[R]).values
    return float(np.max(np.abs(resid)))


def marginal_approx_surrogate_1(f: CylinderGrid2D, L: int) -> float:
    """||f - S^(1)_{M_L} f||_C, within a factor 2 of E^(1)_{M_L}."""
    if L > f.depth:
        raise ValueError("scale exceeds the grid depth")
    resid = f.values - marginal_sum_1(f, f.ms.number_system.scales[L]).values
    return float(np.max(np.abs(resid)))


def marginal_approx_surrogate_2(f: CylinderGrid2D, R: int) -> float:
    """||f - S^(2)_{M_R} f||_C, within a factor 2 of E^(2)_{M_R}."""
    if R > f.depth:
        raise ValueError("scale exceeds the grid depth")
    resid = f.values - marginal_sum_2(f, f.ms.number_system.scales[R]).values
    return float(np.max(np.abs(resid)))


def approx_report(f: CylinderGrid2D) -> ApproxReport:
    scales = tuple(range(f.depth + 1))
    return ApproxReport(
        scales,
        tuple(marginal_approx_surrogate_1(f, L) for L in scales),
        tuple(marginal_approx_surrogate_2(f, R) for R in scales),
        tuple(block_approx_surrogate(f, L, L) for L in scales),
    )


def degree_staircase(ladder_values, ms, n: int) -> np.ndarray:
    """Extend ladder-scale surrogates to per-degree values E_l, l = 1..n.

    Right-continuous staircase: E_l takes the scale-L value for
    M_L <= l < M_{L+1}, and the full-depth value (zero) at l = M_d.
    """
    scales = ms.number_system.scales
    out = np.empty(n, dtype=np.float64)
    L = 0
    for l in range(1, n + 1):
        while L + 1 < len(ladder_values) and l >= scales[L + 1]:
            L += 1
        out[l - 1] = ladder_values[L]
    return out


def theorem1_rhs(
    f: CylinderGrid2D, n: int, m: int, A: float, C_fit: float = 1.0
) -> float:
    """The fitted upper bound for the exponential strong mean.

    (C_fit/n) sum_{l<=n} sqrt(E_l^(1)) + (C_fit/m) sum_{r<=m} sqrt(E_r^(2)),
    with the per-degree surrogates extended from the scale ladder.  A is
    recorded for the pairing with the left side's gauge A*sqrt(u); the
    dependence on it is absorbed by the fitted constant.
    """
    del A
    report = approx_report(f)
    e1 = degree_staircase(report.e1, f.ms, n)
    e2 = degree_staircase(report.e2, f.ms, m)
    return float(C_fit * (np.sqrt(e1).sum() / n + np.sqrt(e2).sum() / m))


def theorem1_lhs(f: CylinderGrid2D, n: int, m: int, A: float) -> StrongMeanResult:
    """The exponential strong mean with gauge A*sqrt(u)."""
    return strong_mean_2d(f, n, m, sqrt_gauge(A))


def fit_theorem1_constant(
    grids: list[CylinderGrid2D], pairs: list[tuple[int, int]], A: float
) -> float:
    """Smallest single constant making LHS <= C * RHS across the sweep.

    Returns inf if some pair has positive mean but vanishing bound.
    """
    worst = 0.0
    for f in grids:
        for n, m in pairs:
            lhs = theorem1_lhs(f, n, m, A)
            rhs = theorem1_rhs(f, n, m, A)
            if lhs.value <= 1e-14:
                continue
            if rhs <= 0.0:
                return float("inf")
            worst = max(worst, lhs.value / rhs)
    return worst


def lemma4_constant(f: CylinderGrid2D, n: int, k: int, p: float) -> float:
    """Fitted constant of the power-mean error bound.

    Smallest C with
      sup_{x,y} (1/nk) sum_{l<=n} sum_{r<=k} |S_lr f - f|^p
        <= C^p (p+1)^{2p} {(1/n) sum (E_l^(1))^p + (1/k) sum (E_r^(2))^p},
    using the staircase surrogates on the right.
    """
    from .summability import _cell_prefix_iter

    if p <= 0:
        raise ValueError("exponent must be positive")
    lhs = 0.0
    for xi, yi, P in _cell_prefix_iter(f):
        err = np.abs(P[:n, :k] - f.values[xi, yi])
        lhs = max(lhs, float((err**p).sum() / (n * k)))
    report = approx_report(f)
    e1 = degree_staircase(report.e1, f.ms, n)
    e2 = degree_staircase(report.e2, f.ms, k)
    brace = float((e1**p).sum() / n + (e2**p).sum() / k)
    if lhs <= 1e-14:
        return 0.0
    if brace <= 0.0:
        return float("inf")
    return (lhs / brace) ** (1.0 / p) / (p + 1) ** 2
