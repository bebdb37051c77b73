"""Two-dimensional rectangular partial sums and strong summability means.

Grids on the product group are M_d x M_d matrices (axis 0 = first variable).
Rectangular partial sums are 2D spectral truncations; the strong means
average an exponential gauge of the pointwise error over all partial-sum
indices up to (n, m), with the sup taken exactly over cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .basis import (
    CylinderGrid1D,
    _freeze,
    apply_character_kernels,
    character_matrix,
    dirichlet_grid,
    forward_transform,
)
from .group import ModulusSequence

# Exponents beyond this are reported as the +inf sentinel instead of
# overflowing silently inside exp.
EXP_OVERFLOW = 700.0


class BudgetExceededError(ValueError):
    """A requested exact sum would exceed the cell budget."""


@dataclass(frozen=True)
class CylinderGrid2D:
    """A function on G_m x G_m, constant on products of depth-d cylinders."""

    ms: ModulusSequence
    depth: int
    values: np.ndarray

    def __post_init__(self):
        size = self.ms.number_system.scales[self.depth]
        vals = np.asarray(self.values)
        if vals.shape != (size, size):
            raise ValueError(f"expected a {size}x{size} grid, got {vals.shape}")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def size(self) -> int:
        return self.ms.number_system.scales[self.depth]

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def refine(self, depth: int) -> "CylinderGrid2D":
        if depth < self.depth:
            raise ValueError("refine target must not be coarser")
        reps = self.ms.number_system.scales[depth] // self.size
        vals = np.tile(self.values, (reps, reps))
        return CylinderGrid2D(self.ms, depth, vals)


@dataclass(frozen=True)
class Spectrum2D:
    """2D Vilenkin-Fourier coefficients hat f(i, j), i, j < M_d."""

    ms: ModulusSequence
    depth: int
    coeffs: np.ndarray

    def __post_init__(self):
        size = self.ms.number_system.scales[self.depth]
        co = np.asarray(self.coeffs)
        if co.shape != (size, size):
            raise ValueError(f"expected {size}x{size} coefficients, got {co.shape}")
        object.__setattr__(self, "coeffs", _freeze(co))

    @property
    def size(self) -> int:
        return self.ms.number_system.scales[self.depth]


@dataclass(frozen=True)
class GaugeFunction:
    """A monotone gauge on [0, inf) with psi(0) = 0 (the class Psi)."""

    tag: str
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, u):
        return self.fn(np.asarray(u, dtype=np.float64))

    def is_class_psi(self, u_max: float = 1e6, points: int = 200) -> bool:
        """Numerical membership check: vanishes at 0, monotone on a lattice."""
        lattice = np.concatenate(([0.0], np.geomspace(1e-12, u_max, points)))
        vals = self(lattice)
        return bool(abs(vals[0]) < 1e-12 and np.all(np.diff(vals) >= -1e-12))


def power_gauge(scale: float, exponent: float) -> GaugeFunction:
    """u |-> scale * u**exponent."""
    if scale <= 0 or exponent <= 0:
        raise ValueError("gauge scale and exponent must be positive")
    return GaugeFunction(
        f"pow:{exponent:g},A={scale:g}", lambda u: scale * np.power(u, exponent)
    )


def sqrt_gauge(scale: float) -> GaugeFunction:
    """u |-> scale * sqrt(u): the exponent-1/2 gauge from the main estimate."""
    return power_gauge(scale, 0.5)


def zero_gauge() -> GaugeFunction:
    return GaugeFunction("zero", lambda u: np.zeros_like(u))


def parse_gauge(spec: str) -> GaugeFunction:
    """Parse CLI gauge specs: "zero", "pow:1.5", "pow:1.5,A=2", "exp-sqrt:A=1"."""
    spec = spec.strip()
    if spec == "zero":
        return zero_gauge()
    if ":" not in spec:
        raise ValueError(f"cannot parse gauge spec {spec!r}")
    head, _, rest = spec.partition(":")
    params = {}
    parts = rest.split(",")
    if head in ("sqrt", "exp-sqrt"):
        for part in parts:
            key, _, val = part.partition("=")
            params[key] = float(val)
        return sqrt_gauge(params.get("A", 1.0))
    if head == "pow":
        exponent = float(parts[0])
        for part in parts[1:]:
            key, _, val = part.partition("=")
            params[key] = float(val)
        return power_gauge(params.get("A", 1.0), exponent)
    raise ValueError(f"unknown gauge family {head!r}")


class StrongMeanResult(NamedTuple):
    value: float
    overflowed: bool


class PowerMeanResult(NamedTuple):
    values: np.ndarray  # pointwise mean^(1/p) per cell
    sup: float


class GaugeDominationReport(NamedTuple):
    dominated: bool
    limsup_estimate: float
    top_decade_growth: float


def forward_transform_2d(f: CylinderGrid2D) -> Spectrum2D:
    co = apply_character_kernels(f.values, f.ms, f.depth, conjugate=True, axis=0)
    co = apply_character_kernels(co, f.ms, f.depth, conjugate=True, axis=1)
    return Spectrum2D(f.ms, f.depth, co / f.size**2)


def inverse_transform_2d(s: Spectrum2D) -> CylinderGrid2D:
    vals = apply_character_kernels(s.coeffs, s.ms, s.depth, conjugate=False, axis=0)
    vals = apply_character_kernels(vals, s.ms, s.depth, conjugate=False, axis=1)
    return CylinderGrid2D(s.ms, s.depth, vals)


def rect_partial_sum(f: CylinderGrid2D, M: int, N: int) -> CylinderGrid2D:
    """S_{M,N} f: truncation to frequencies i < M, j < N."""
    if not (0 <= M <= f.size and 0 <= N <= f.size):
        raise ValueError("rectangular indices out of range")
    spec = forward_transform_2d(f)
    co = spec.coeffs.copy()
    co[M:, :] = 0.0
    co[:, N:] = 0.0
    return inverse_transform_2d(Spectrum2D(f.ms, f.depth, co))


def marginal_sum_1(f: CylinderGrid2D, n: int) -> CylinderGrid2D:
    """Partial sum along the first variable only."""
    if not 0 <= n <= f.size:
        raise ValueError("marginal index out of range")
    co = apply_character_kernels(f.values, f.ms, f.depth, conjugate=True, axis=0) / f.size
    co[n:, :] = 0.0
    vals = apply_character_kernels(co, f.ms, f.depth, conjugate=False, axis=0)
    return CylinderGrid2D(f.ms, f.depth, vals)


def marginal_sum_2(f: CylinderGrid2D, n: int) -> CylinderGrid2D:
    """Partial sum along the second variable only."""
    if not 0 <= n <= f.size:
        raise ValueError("marginal index out of range")
    co = apply_character_kernels(f.values, f.ms, f.depth, conjugate=True, axis=1) / f.size
    co[:, n:] = 0.0
    vals = apply_character_kernels(co, f.ms, f.depth, conjugate=False, axis=1)
    return CylinderGrid2D(f.ms, f.depth, vals)


def _cell_prefix_iter(f: CylinderGrid2D):
    """Yield (xi, yi, P) with P[l-1, r-1] = S_{l,r}(f; cell xi, cell yi).

    For a fixed cell the rectangular sums are the 2D prefix sums of the
    coefficient matrix modulated by the two character columns, so the whole
    l, r table costs O(M_d^2) per cell.
    """
    spec = forward_transform_2d(f)
    psi = character_matrix(f.ms, f.depth)
    for xi in range(f.size):
        row_mod = (spec.coeffs * psi[:, xi][:, None]).cumsum(axis=0)
        for yi in range(f.size):
            yield xi, yi, (row_mod * psi[:, yi][None, :]).cumsum(axis=1)


def strong_mean_table(
    f: CylinderGrid2D, pairs: list[tuple[int, int]], gauge: GaugeFunction
) -> dict[tuple[int, int], StrongMeanResult]:
    """Sup over cells of (1/nm) sum_{l<=n} sum_{r<=m} (e^{g(|S_lr f - f|)} - 1).

    Evaluates every requested (n, m) pair in one pass over cells; any cell
    whose exponent exceeds the overflow guard marks the mean +inf.
    """
    for n, m in pairs:
        if not (1 <= n <= f.size and 1 <= m <= f.size):
            raise ValueError(f"mean indices ({n}, {m}) out of range")
    best = {pair: 0.0 for pair in pairs}
    overflow = {pair: False for pair in pairs}
    with np.errstate(over="ignore"):
        for xi, yi, P in _cell_prefix_iter(f):
            t = gauge(np.abs(P - f.values[xi, yi]))
            blown = t > EXP_OVERFLOW
            w = np.expm1(np.where(blown, 0.0, t))
            acc = w.cumsum(axis=0).cumsum(axis=1)
            hot = blown.cumsum(axis=0).cumsum(axis=1) > 0
            for pair in pairs:
                n, m = pair
                if hot[n - 1, m - 1]:
                    overflow[pair] = True
                    best[pair] = math.inf
                else:
                    best[pair] = max(best[pair], acc[n - 1, m - 1] / (n * m))
    return {pair: StrongMeanResult(best[pair], overflow[pair]) for pair in pairs}


def strong_mean_2d(
    f: CylinderGrid2D, n: int, m: int, gauge: GaugeFunction
) -> StrongMeanResult:
    return strong_mean_table(f, [(n, m)], gauge)[(n, m)]


def fridli_schipp_mean_1d(
    f: CylinderGrid1D, n: int, gauge: GaugeFunction
) -> StrongMeanResult:
    """Sup over x of (1/n) sum_{k<=n} g(|S_k f(x) - f(x)|)."""
    if not 1 <= n <= f.size:
        raise ValueError(f"mean order {n} out of range")
    spec = forward_transform(f)
    psi = character_matrix(f.ms, f.depth)
    partials = (spec.coeffs[:, None] * psi).cumsum(axis=0)  # row k-1 = S_k
    t = gauge(np.abs(partials[:n] - f.values[None, :]))
    if np.any(t > EXP_OVERFLOW) or not np.all(np.isfinite(t)):
        return StrongMeanResult(math.inf, True)
    return StrongMeanResult(float(np.max(t.sum(axis=0) / n)), False)


def power_mean_block(f: CylinderGrid2D, A: int, B: int, p: float) -> PowerMeanResult:
    """Block power mean over one scale-ladder rectangle of indices.

    {(1/(M_A M_B)) sum_{n=M_A}^{M_{A+1}-1} sum_{l=M_B}^{M_{B+1}-1}
     |S_{nl}(f;x,y)|^p}^{1/p} at every cell, plus its sup.
    """
    if p <= 0:
        raise ValueError("power-mean exponent must be positive")
    scales = f.ms.number_system.scales
    if A + 1 > f.depth or B + 1 > f.depth:
        raise ValueError("block scales exceed the grid depth")
    rows = slice(scales[A] - 1, scales[A + 1] - 1)
    cols = slice(scales[B] - 1, scales[B + 1] - 1)
    weight = 1.0 / (scales[A] * scales[B])
    out = np.empty((f.size, f.size), dtype=np.float64)
    for xi, yi, P in _cell_prefix_iter(f):
        block = np.abs(P[rows, cols])
        out[xi, yi] = (weight * np.sum(block**p)) ** (1.0 / p)
    return PowerMeanResult(out, float(np.max(out)))


def glukhov_integral(
    p: int, n: int, ms: ModulusSequence, cell_budget: int = 10**7
) -> float:
    """Exact value of the p-fold kernel-block integral.

    Integral over G_m^p of (1/M_n) |sum_{l=M_n}^{M_{n+1}-1} prod_k D_l(s_k)|,
    evaluated as a finite sum over M_K^p product cells.
    """
    if p < 1:
        raise ValueError("p must be a positive integer")
    scales = ms.number_system.scales
    if n + 1 > ms.depth:
        raise ValueError("block scale exceeds the depth")
    size = ms.order
    if size**p > cell_budget:
        raise BudgetExceededError(
            f"integral needs {size}**{p} = {size**p} cells, budget is {cell_budget}"
        )
    rows = [dirichlet_grid(ms, ms.depth, l) for l in range(scales[n], scales[n + 1])]
    tensor = np.zeros((size,) * p, dtype=np.complex128)
    for row in rows:
        term = row
        for _ in range(p - 1):
            term = np.multiply.outer(term, row)
        tensor += term
    return float(np.abs(tensor).sum() / scales[n] / size**p)


def glukhov_ratio(p: int, n: int, ms: ModulusSequence, cell_budget: int = 10**7) -> float:
    """value^(1/p) / p, the quantity bounded by the absolute constant."""
    return glukhov_integral(p, n, ms, cell_budget) ** (1.0 / p) / p


def gauge_dominates(
    phi: GaugeFunction, psi: GaugeFunction, u_max: float, points: int = 400
) -> GaugeDominationReport:
    """Numerical limsup estimate of phi/psi on a log-spaced lattice.

    Dominated means the ratio stays finite and does not keep growing over
    the top decade of the lattice (growth factor below 1.5).
    """
    lattice = np.geomspace(u_max * 1e-8, u_max, points)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.asarray(phi(lattice)) / np.asarray(psi(lattice))
    top = ratio[lattice >= u_max / 10.0]
    limsup = float(np.nanmax(top))
    growth = float(top[-1] / top[0]) if top[0] > 0 else math.inf
    dominated = bool(np.isfinite(limsup) and growth < 1.5)
    return GaugeDominationReport(dominated, limsup, growth)


def random_grid_2d(ms: ModulusSequence, depth: int, rng: np.random.Generator) -> CylinderGrid2D:
    """Random cell values, re/im uniform in [-1, 1], unit sup norm."""
    size = ms.number_system.scales[depth]
    vals = rng.uniform(-1.0, 1.0, (size, size)) + 1j * rng.uniform(-1.0, 1.0, (size, size))
    return CylinderGrid2D(ms, depth, vals / np.max(np.abs(vals)))
