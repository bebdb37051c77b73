"""Vilenkin characters, Dirichlet kernels, and spectral transforms.

Functions on the truncated group are stored as cylinder grids: one complex
value per depth-d cylinder, indexed by the mixed-radix rank (digit 0
fastest).  All integrals over the group are finite sums weighted by 1/M_d,
so every quantity below is exact up to floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .group import GroupPoint, ModulusSequence, decompose_index


@lru_cache(maxsize=None)
def unit_roots(m: int) -> np.ndarray:
    """The m-th roots of unity exp(2*pi*i*q/m), q < m, as a frozen table.

    Powers are taken by indexing this table mod m, never by repeated
    multiplication, so kernel cancellations stay clean.
    """
    roots = np.exp(2j * np.pi * np.arange(m) / m)
    roots.flags.writeable = False
    return roots


def _freeze(values: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(values, dtype=np.complex128)
    if out is values:
        out = out.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class CylinderGrid1D:
    """A function constant on depth-d cylinders: M_d complex cell values."""

    ms: ModulusSequence
    depth: int
    values: np.ndarray

    def __post_init__(self):
        if not 0 <= self.depth <= self.ms.depth:
            raise ValueError(f"depth {self.depth} out of range")
        vals = np.asarray(self.values)
        if vals.shape != (self.size,):
            raise ValueError(f"expected {self.size} cell values, got {vals.shape}")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def size(self) -> int:
        return self.ms.number_system.scales[self.depth]

    @property
    def sup_norm(self) -> float:
        """Exact sup norm: the max cell modulus."""
        return float(np.max(np.abs(self.values))) if self.size else 0.0

    def refine(self, depth: int) -> "CylinderGrid1D":
        """Re-express at a finer depth (cell values repeat over subcells)."""
        if depth < self.depth:
            raise ValueError("refine target must not be coarser")
        reps = self.ms.number_system.scales[depth] // self.size
        return CylinderGrid1D(self.ms, depth, np.tile(self.values, reps))


@dataclass(frozen=True)
class Spectrum1D:
    """Vilenkin-Fourier coefficients indexed 0..M_d-1."""

    ms: ModulusSequence
    depth: int
    coeffs: np.ndarray

    def __post_init__(self):
        size = self.ms.number_system.scales[self.depth]
        co = np.asarray(self.coeffs)
        if co.shape != (size,):
            raise ValueError(f"expected {size} coefficients, got {co.shape}")
        object.__setattr__(self, "coeffs", _freeze(co))

    @property
    def size(self) -> int:
        return self.ms.number_system.scales[self.depth]


def rademacher(k: int, x: GroupPoint) -> complex:
    """Generalized Rademacher function r_k(x) = exp(2*pi*i*x_k/m_k)."""
    if not 0 <= k < x.ms.depth:
        raise ValueError(f"Rademacher index {k} out of range")
    return complex(unit_roots(x.ms.moduli[k])[x.digits[k]])


def vilenkin(n: int, x: GroupPoint) -> complex:
    """Character value psi_n(x): the product of digit powers of r_k."""
    digits = decompose_index(n, x.ms.number_system).digits
    out = complex(1.0)
    for k, (nk, m) in enumerate(zip(digits, x.ms.moduli)):
        if nk:
            out *= complex(unit_roots(m)[(nk * x.digits[k]) % m])
    return out


def digit_table(ms: ModulusSequence, depth: int, j: int) -> np.ndarray:
    """Digit j of every cell index at the given depth."""
    scales = ms.number_system.scales
    idx = np.arange(scales[depth])
    return (idx // scales[j]) % ms.moduli[j]


def character_row(ms: ModulusSequence, depth: int, n: int) -> np.ndarray:
    """psi_n sampled on all M_d cells."""
    digits = decompose_index(n, ms.number_system).digits
    out = np.ones(ms.number_system.scales[depth], dtype=np.complex128)
    for j in range(depth):
        if digits[j]:
            m = ms.moduli[j]
            out *= unit_roots(m)[(digits[j] * digit_table(ms, depth, j)) % m]
    return out


def character_matrix(ms: ModulusSequence, depth: int) -> np.ndarray:
    """Full character table Psi[n, cell] = psi_n(cell), M_d x M_d.

    Built as a Kronecker chain over the digit axes, highest digit outermost.
    """
    out = np.ones((1, 1), dtype=np.complex128)
    for m in reversed(ms.moduli[:depth]):
        roots = unit_roots(m)
        small = roots[np.outer(np.arange(m), np.arange(m)) % m]
        out = np.kron(out, small)
    return out


def _digit_kernels(ms: ModulusSequence, depth: int, conjugate: bool) -> list[np.ndarray]:
    mats = []
    for m in ms.moduli[:depth]:
        roots = unit_roots(m)
        mat = roots[np.outer(np.arange(m), np.arange(m)) % m]
        mats.append(mat.conj() if conjugate else mat)
    return mats


def apply_character_kernels(
    arr: np.ndarray, ms: ModulusSequence, depth: int, conjugate: bool, axis: int = 0
) -> np.ndarray:
    """Contract one length-M_d axis with the character tensor, digit by digit.

    This is the mixed-radix butterfly: the axis is reshaped into its digit
    factors and each factor is hit with the small m_j x m_j root-of-unity
    matrix, costing O(M_d * sum m_j) instead of O(M_d^2).
    """
    kernels = _digit_kernels(ms, depth, conjugate)
    arr = np.moveaxis(np.asarray(arr, dtype=np.complex128), axis, 0)
    lead, rest = arr.shape[0], arr.shape[1:]
    shape = tuple(reversed(ms.moduli[:depth]))
    t = arr.reshape(shape + (-1,))
    for ax, digit in enumerate(range(depth - 1, -1, -1)):
        t = np.moveaxis(np.tensordot(kernels[digit], t, axes=([1], [ax])), 0, ax)
    out = t.reshape((lead,) + rest)
    return np.moveaxis(out, 0, axis)


def forward_transform(f: CylinderGrid1D) -> Spectrum1D:
    """Fourier coefficients hat f(k) = (1/M_d) sum_cells f * conj(psi_k)."""
    coeffs = apply_character_kernels(f.values, f.ms, f.depth, conjugate=True) / f.size
    return Spectrum1D(f.ms, f.depth, coeffs)


def inverse_transform(s: Spectrum1D) -> CylinderGrid1D:
    """Reconstruct the grid: f = sum_k hat f(k) * psi_k."""
    values = apply_character_kernels(s.coeffs, s.ms, s.depth, conjugate=False)
    return CylinderGrid1D(s.ms, s.depth, values)


def dirichlet_direct(n: int, x: GroupPoint) -> complex:
    """D_n(x) as the literal sum of the first n character values."""
    if not 0 <= n <= x.ms.order:
        raise ValueError(f"kernel index {n} out of range")
    return sum((vilenkin(k, x) for k in range(n)), complex(0.0))


def dirichlet_closed(n: int, x: GroupPoint) -> complex:
    """Closed-form Dirichlet kernel.

    D_n(x) = psi_n(x) * sum_j D_{M_j}(x) * sum_{q=m_j-n_j}^{m_j-1} r_j^q(x),
    with the outer sum truncated at j = |n| (the inner sum is empty for
    every digit n_j = 0, so higher j contribute nothing).
    """
    ms = x.ms
    if not 0 <= n <= ms.order:
        raise ValueError(f"kernel index {n} out of range")
    if n == ms.order:
        # D_{M_K}: block form, M_K on the zero point's full-depth cylinder
        return complex(ms.order) if all(d == 0 for d in x.digits) else complex(0.0)
    digits = decompose_index(n, ms.number_system).digits
    scales = ms.number_system.scales
    psi_n = vilenkin(n, x)
    total = complex(0.0)
    for j, nj in enumerate(digits):
        if nj == 0:
            continue
        if any(x.digits[k] != 0 for k in range(j)):
            continue  # D_{M_j}(x) = 0 off I_j
        m = ms.moduli[j]
        roots = unit_roots(m)
        inner = sum(complex(roots[(q * x.digits[j]) % m]) for q in range(m - nj, m))
        total += scales[j] * inner
    return psi_n * total


def dirichlet_grid(ms: ModulusSequence, depth: int, n: int) -> np.ndarray:
    """Closed-form D_n on every depth-d cell; needs n <= M_depth."""
    scales = ms.number_system.scales
    size = scales[depth]
    if not 0 <= n <= size:
        raise ValueError(f"kernel index {n} out of range for depth {depth}")
    if n == size:
        out = np.zeros(size, dtype=np.complex128)
        out[0] = size
        return out
    digits = decompose_index(n, ms.number_system).digits
    idx = np.arange(size)
    total = np.zeros(size, dtype=np.complex128)
    for j in range(depth):
        nj = digits[j]
        if nj == 0:
            continue
        m = ms.moduli[j]
        roots = unit_roots(m)
        dj = digit_table(ms, depth, j)
        inner = np.zeros(size, dtype=np.complex128)
        for q in range(m - nj, m):
            inner += roots[(q * dj) % m]
        total += scales[j] * (idx % scales[j] == 0) * inner
    return character_row(ms, depth, n) * total


def partial_sum_1d(f: CylinderGrid1D, n: int) -> CylinderGrid1D:
    """Spectral truncation S_n f = sum_{k<n} hat f(k) psi_k  (S_0 f := 0)."""
    if not 0 <= n <= f.size:
        raise ValueError(f"partial-sum order {n} exceeds the grid band {f.size}")
    spec = forward_transform(f)
    coeffs = spec.coeffs.copy()
    coeffs[n:] = 0.0
    return inverse_transform(Spectrum1D(f.ms, f.depth, coeffs))


def random_grid_1d(ms: ModulusSequence, depth: int, rng: np.random.Generator) -> CylinderGrid1D:
    """Random cell values, re/im uniform in [-1, 1], unit sup norm."""
    size = ms.number_system.scales[depth]
    vals = rng.uniform(-1.0, 1.0, size) + 1j * rng.uniform(-1.0, 1.0, size)
    return CylinderGrid1D(ms, depth, vals / np.max(np.abs(vals)))
