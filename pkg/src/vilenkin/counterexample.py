"""The explicit divergence construction for superlinear gauges.

Given a gauge psi growing faster than linearly, parameter sequences B_j,
A_j, N_{A_j} are chosen so that phase-aligned indicator blocks f_j force
|S_{N_{A_k}}(f; 0)| to grow like A_k / k.  The tensor square F(x, y) =
f(x) f(y) then defeats any exponential strong mean whose gauge beats the
square-root power.

Parameter arithmetic is exact (Python integers, no 64-bit cap) so the
defining constraints can be checked even for configurations far too deep
to grid; the grid-level diagnostics require an actual ModulusSequence
within the usual cell budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .basis import CylinderGrid1D, dirichlet_grid
from .group import ModulusSequence
from .summability import CylinderGrid2D, GaugeFunction


class GaugePreconditionError(ValueError):
    """The gauge is not superlinear on the probe lattice."""


class DepthBudgetError(ValueError):
    """A block needs more depth than the configured budget."""


@dataclass(frozen=True)
class CounterexampleParams:
    """Sequences B_j, A_j, N_{A_j} for J blocks over a repeating modulus pattern."""

    pattern: tuple[int, ...]
    c_prime: float
    gauge: GaugeFunction
    B: tuple[int, ...]
    A: tuple[int, ...]
    N: tuple[int, ...]

    @property
    def blocks(self) -> int:
        return len(self.B)

    @property
    def bound_a(self) -> int:
        return max(self.pattern)

    @property
    def depth_required(self) -> int:
        return 2 * self.A[-1] if self.B else 0

    def a_lo(self, j: int) -> int:
        """A_{j-1} with the convention A_0 = 0."""
        return self.A[j - 2] if j >= 2 else 0

    def modulus(self, k: int) -> int:
        return self.pattern[k % len(self.pattern)]

    def scale(self, k: int) -> int:
        """M_k as an exact integer (no 64-bit cap)."""
        out = 1
        for i in range(k):
            out *= self.modulus(i)
        return out

    def modulus_sequence(self, depth: int | None = None) -> ModulusSequence:
        depth = self.depth_required if depth is None else depth
        reps = -(-depth // len(self.pattern)) if depth else 1
        return ModulusSequence((self.pattern * reps)[:depth] or self.pattern[:1])

    def constraints_hold(self) -> bool:
        """Exact check of the defining inequalities for every block."""
        log_a = math.log(self.bound_a)
        prev_b, prev_a = 0, 0
        for j in range(1, self.blocks + 1):
            b, a_j, n_j = self.B[j - 1], self.A[j - 1], self.N[j - 1]
            if b <= 2 * prev_b:
                return False
            if not float(self.gauge(b)) / b > 5 * j * log_a / self.c_prime:
                return False
            if a_j != math.floor(j * b / self.c_prime) + 1 or a_j <= prev_a:
                return False
            if n_j > self.bound_a ** (2 * a_j):
                return False
            prev_b, prev_a = b, a_j
        return True


@dataclass(frozen=True)
class BlockFunction:
    """One phase-aligned block f_j, a cylinder grid at depth 2*A_j."""

    j: int
    grid: CylinderGrid1D


class JDecomposition(NamedTuple):
    J1: float
    J2: float
    J3: float


def _check_superlinear(gauge: GaugeFunction) -> None:
    lattice = np.geomspace(1.0, 1e6, 60)
    ratio = np.asarray(gauge(lattice)) / lattice
    if not (np.all(np.diff(ratio) > -1e-12) and ratio[-1] > 10.0 * max(ratio[0], 1e-300)):
        raise GaugePreconditionError("gauge(u)/u does not grow on the probe lattice")


def _block_count(pattern: tuple[int, ...], a_lo: int, a_hi: int) -> int:
    """N contribution sum_{k=a_lo}^{a_hi-1} floor(m_{2k}/2) * M_{2k}, exact."""
    total = 0
    scale = 1
    for i in range(2 * a_hi):
        if i % 2 == 0 and i // 2 >= a_lo:
            m = pattern[i % len(pattern)]
            total += (m // 2) * scale
        scale *= pattern[i % len(pattern)]
    return total


def choose_params(
    gauge: GaugeFunction,
    c_prime: float,
    blocks: int,
    pattern: tuple[int, ...],
    depth_budget: int | None = None,
    b_limit: int = 10**9,
) -> CounterexampleParams:
    """Smallest B_j (scanning upward) meeting every defining constraint.

    Each B_j must exceed twice its predecessor, push gauge(B_j)/B_j above
    5*j*ln(a)/c_prime, and make A_j = floor(j*B_j/c_prime) + 1 strictly
    increase.  Fails if the final block needs more depth than the budget.
    """
    if c_prime <= 0:
        raise ValueError("c_prime must be positive")
    if any(m < 2 for m in pattern) or not pattern:
        raise ValueError("modulus pattern entries must be >= 2")
    _check_superlinear(gauge)
    a = max(pattern)
    log_a = math.log(a)
    B: list[int] = []
    A: list[int] = []
    N: list[int] = []
    prev_b, prev_a = 0, 0
    for j in range(1, blocks + 1):
        b = max(2 * prev_b + 1, 1)
        while True:
            if b > b_limit:
                raise ValueError(f"no B_{j} below {b_limit} satisfies the constraints")
            a_j = math.floor(j * b / c_prime) + 1
            if float(gauge(b)) / b > 5 * j * log_a / c_prime and a_j > prev_a:
                break
            b += 1
        n_j = _block_count(pattern, prev_a, a_j)
        assert n_j <= a ** (2 * a_j)
        B.append(b)
        A.append(a_j)
        N.append(n_j)
        prev_b, prev_a = b, a_j
        if depth_budget is not None and 2 * a_j > depth_budget:
            raise DepthBudgetError(
                f"block {j} needs depth {2 * a_j}, budget is {depth_budget}"
            )
    return CounterexampleParams(tuple(pattern), c_prime, gauge, tuple(B), tuple(A), tuple(N))


def desk_params(
    gauge: GaugeFunction,
    pattern: tuple[int, ...],
    A: tuple[int, ...],
    c_prime: float = 1.0,
) -> CounterexampleParams:
    """Params with directly chosen block depths A_j, for grid-scale runs.

    The constraint-driven scan forces depths far beyond any cell budget, so
    grid diagnostics run on a reduced configuration; B_j is back-filled as
    the largest value consistent with A_j.  constraints_hold() will report
    whether the reduced set still meets the defining inequalities.
    """
    if any(a2 <= a1 for a1, a2 in zip((0,) + A, A)):
        raise ValueError("block depths must be strictly increasing")
    B = []
    prev_a = 0
    N = []
    for j, a_j in enumerate(A, start=1):
        B.append(max(math.ceil((a_j - 1) * c_prime / j), 1))
        N.append(_block_count(pattern, prev_a, a_j))
        prev_a = a_j
    return CounterexampleParams(tuple(pattern), c_prime, gauge, tuple(B), tuple(A), tuple(N))


def _support_masks(params: CounterexampleParams, ms: ModulusSequence, depth: int, j: int):
    """Per-shell masks: cells whose first nonzero digit sits at 2s with the
    top digit value, s in [A_{j-1}, A_j)."""
    scales = ms.number_system.scales
    idx = np.arange(scales[depth])
    masks = []
    for s in range(params.a_lo(j), params.A[j - 1]):
        m = ms.moduli[2 * s]
        digit = (idx // scales[2 * s]) % m
        masks.append((idx % scales[2 * s] == 0) & (digit == m - 1))
    return masks


def build_block(params: CounterexampleParams, j: int) -> BlockFunction:
    """The block f_j on its depth-2*A_j grid.

    On each support cylinder the value is 1/(j+1) times the unit phase that
    aligns f_j with conj(D_{N_{A_j}}); where the kernel vanishes the phase
    is set to 1 (the cell contributes nothing to the aligned integral).
    """
    if not 1 <= j <= params.blocks:
        raise ValueError(f"block index {j} out of range")
    depth = 2 * params.A[j - 1]
    ms = params.modulus_sequence(depth)
    kernel = dirichlet_grid(ms, depth, params.N[j - 1])
    mag = np.abs(kernel)
    phase = np.where(mag > 1e-9, kernel / np.where(mag > 1e-9, mag, 1.0), 1.0)
    support = np.zeros(ms.number_system.scales[depth], dtype=bool)
    for mask in _support_masks(params, ms, depth, j):
        support |= mask
    values = np.where(support, phase / (j + 1), 0.0)
    return BlockFunction(j, CylinderGrid1D(ms, depth, values))


def build_f(params: CounterexampleParams, ms: ModulusSequence | None = None) -> CylinderGrid1D:
    """Superposition of all blocks at the common depth 2*A_J; f(0) = 0."""
    if params.blocks == 0:
        ms = ms or params.modulus_sequence(1)
        return CylinderGrid1D(ms, 0, np.zeros(1, dtype=np.complex128))
    depth = params.depth_required
    ms = ms or params.modulus_sequence(depth)
    total = np.zeros(ms.number_system.scales[depth], dtype=np.complex128)
    for j in range(1, params.blocks + 1):
        block = build_block(params, j)
        total += CylinderGrid1D(ms, block.grid.depth, block.grid.values).refine(depth).values
    assert total[0] == 0
    return CylinderGrid1D(ms, depth, total)


def build_F(params: CounterexampleParams) -> CylinderGrid2D:
    """Tensor square F(x, y) = f(x) f(y)."""
    f = build_f(params)
    return CylinderGrid2D(f.ms, f.depth, np.outer(f.values, f.values))


def _aligned_integral(params: CounterexampleParams, depth: int, ms, kernel, j: int) -> float:
    block = build_block(params, j)
    vals = CylinderGrid1D(ms, block.grid.depth, block.grid.values).refine(depth).values
    return float(np.abs(np.mean(vals * np.conj(kernel))))


def j_decomposition(params: CounterexampleParams, k: int) -> JDecomposition:
    """The three aligned kernel integrals at block k.

    J1 pairs f_k with conj(D_{N_{A_k}}); J2 collects the built tail blocks
    j > k; J3 collects j < k and vanishes exactly by support disjointness.
    """
    if not 1 <= k <= params.blocks:
        raise ValueError(f"block index {k} out of range")
    depth = params.depth_required
    ms = params.modulus_sequence(depth)
    kernel = dirichlet_grid(ms, depth, params.N[k - 1])
    j1 = _aligned_integral(params, depth, ms, kernel, k)
    j2 = sum(
        _aligned_integral(params, depth, ms, kernel, j)
        for j in range(k + 1, params.blocks + 1)
    )
    j3 = sum(_aligned_integral(params, depth, ms, kernel, j) for j in range(1, k))
    return JDecomposition(j1, float(j2), float(j3))


def partial_sum_at_zero(params: CounterexampleParams, k: int) -> complex:
    """S_{N_{A_k}}(f; 0) as the exact aligned integral of f against the kernel."""
    depth = params.depth_required
    ms = params.modulus_sequence(depth)
    f = build_f(params, ms)
    kernel = dirichlet_grid(ms, depth, params.N[k - 1])
    return complex(np.mean(f.values * np.conj(kernel)))


def divergence_diagnostic(params: CounterexampleParams, k: int) -> float:
    """Log-domain single-term lower bound on the exponential mean at (0, 0).

    log[(1/N^2) e^{phi(|S_{N,N}(F;0,0)|)}] = psi(|S_N(f;0)|) - 2 ln N via the
    tensor identity; returned in log domain so divergence shows as growth
    instead of overflow.
    """
    s = abs(partial_sum_at_zero(params, k))
    return float(params.gauge(s)) - 2.0 * math.log(params.N[k - 1])


def kernel_lower_bound(params: CounterexampleParams, k: int) -> float:
    """Observed constant in |D_{N_{A_k}}| >= c * M_{2s} on the support shells."""
    depth = params.depth_required
    ms = params.modulus_sequence(depth)
    scales = ms.number_system.scales
    kernel = dirichlet_grid(ms, depth, params.N[k - 1])
    best = math.inf
    for s, mask in zip(range(params.a_lo(k), params.A[k - 1]),
                       _support_masks(params, ms, depth, k)):
        best = min(best, float(np.min(np.abs(kernel[mask])) / scales[2 * s]))
    return best
