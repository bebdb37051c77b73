"""Acceptance gate: one test per release criterion, one printed verdict each.

Run with `pytest -v -s tests/test_acceptance.py` to see the per-criterion
PASS/FAIL lines.  Tolerances are pinned here and must not be loosened.
"""
import math

import numpy as np
import pytest

from vilenkin.approximation import (
    block_approx_surrogate,
    lemma4_constant,
    theorem1_lhs,
    theorem1_rhs,
)
from vilenkin.basis import (
    CylinderGrid1D,
    character_matrix,
    dirichlet_direct,
    dirichlet_grid,
    forward_transform,
    inverse_transform,
    random_grid_1d,
)
from vilenkin.cli import main as cli_main
from vilenkin.counterexample import (
    build_block,
    choose_params,
    desk_params,
    divergence_diagnostic,
    j_decomposition,
    partial_sum_at_zero,
)
from vilenkin.group import GroupPoint, ModulusSequence
from vilenkin.summability import (
    CylinderGrid2D,
    forward_transform_2d,
    glukhov_integral,
    marginal_sum_1,
    marginal_sum_2,
    power_gauge,
    power_mean_block,
    random_grid_2d,
    rect_partial_sum,
    strong_mean_2d,
    sqrt_gauge,
)

TOL = 1e-10


def verdict(name: str, ok: bool) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {name}")
    assert ok, name


def test_criterion_1_orthonormality():
    worst = 0.0
    for spec in ("2,3,2,3", "2^8"):
        ms = ModulusSequence.parse(spec)
        psi = character_matrix(ms, ms.depth)
        gram = psi.conj() @ psi.T / ms.order
        worst = max(worst, float(np.max(np.abs(gram - np.eye(ms.order)))))
    verdict(f"criterion-1 orthonormality (max gram error {worst:.3g} < 1e-10)",
            worst < TOL)


def test_criterion_2_kernel_identities():
    ms = ModulusSequence.parse("2,2,2,2,2,2,2,2")  # M_8 = 256
    size = ms.order
    worst = 0.0
    grids = [dirichlet_grid(ms, ms.depth, n) for n in range(size + 1)]
    # exhaustive n on the 256-point group against a running-sum direct oracle
    psi = character_matrix(ms, ms.depth)
    direct = np.zeros(size, dtype=np.complex128)
    for n in range(size + 1):
        worst = max(worst, float(np.max(np.abs(grids[n] - direct))))
        if n < size:
            direct = direct + psi[n]
    # exhaustive n on the mixed-radix group, where the closed form branches most
    ms2 = ModulusSequence((2, 3, 2, 3))
    for n in range(ms2.order + 1):
        g = dirichlet_grid(ms2, 4, n)
        for idx in range(ms2.order):
            worst = max(
                worst, abs(g[idx] - dirichlet_direct(n, GroupPoint.from_index(ms2, idx)))
            )
    block_worst = 0.0
    idx = np.arange(size)
    for j, Mj in enumerate(ms.number_system.scales):
        block = np.where(idx % Mj == 0, float(Mj), 0.0)
        block_worst = max(block_worst, float(np.max(np.abs(grids[Mj] - block))))
    ok = worst < TOL and block_worst < TOL
    verdict(
        f"criterion-2 kernel identities (closed-vs-direct {worst:.3g}, "
        f"block form {block_worst:.3g}, both < 1e-10)", ok,
    )


def test_criterion_3_transform_oracle():
    ms = ModulusSequence((2, 3, 2, 3))
    rng = np.random.default_rng(2024)
    psi = character_matrix(ms, 4)
    worst_rel, worst_rt = 0.0, 0.0
    for _ in range(100):
        f = random_grid_1d(ms, 4, rng)
        spec = forward_transform(f)
        naive = psi.conj() @ f.values / f.size
        worst_rel = max(
            worst_rel, float(np.max(np.abs(spec.coeffs - naive)) / np.max(np.abs(naive)))
        )
        back = inverse_transform(spec)
        worst_rt = max(worst_rt, float(np.max(np.abs(back.values - f.values))))
    ok = worst_rel < TOL and worst_rt < TOL
    verdict(
        f"criterion-3 transform oracle (rel {worst_rel:.3g}, "
        f"round-trip {worst_rt:.3g}, 100 grids, both < 1e-10)", ok,
    )


def test_criterion_4_2d_structure():
    ms = ModulusSequence((2, 3, 2, 3))
    rng = np.random.default_rng(4)
    scales = ms.number_system.scales
    comp_worst, contraction_ok = 0.0, True
    for _ in range(5):
        f = random_grid_2d(ms, 4, rng)
        for L in range(5):
            for R in range(5):
                lhs = marginal_sum_1(marginal_sum_2(f, scales[R]), scales[L])
                rhs = rect_partial_sum(f, scales[L], scales[R])
                comp_worst = max(comp_worst, float(np.max(np.abs(lhs.values - rhs.values))))
                contraction_ok = contraction_ok and rhs.sup_norm <= f.sup_norm + TOL
    ok = comp_worst < TOL and contraction_ok
    verdict(
        f"criterion-4 2D structure (composition {comp_worst:.3g} < 1e-10, "
        f"contraction holds over all ladder scales)", ok,
    )


def test_criterion_5_glukhov_sweep():
    ms = ModulusSequence.parse("2^5")
    worst = 0.0
    for p in (1, 2):
        for n in range(4):
            ratio = glukhov_integral(p, n, ms) ** (1.0 / p) / p
            assert math.isfinite(ratio)
            worst = max(worst, ratio)
    verdict(f"criterion-5 kernel-block integral sweep (max ratio {worst:.4g} <= 10)",
            worst <= 10.0)


def test_criterion_6_block_power_means():
    ms = ModulusSequence((2, 3, 2, 3))
    rng = np.random.default_rng(6)
    fits = {2.0: [], 4.0: []}
    for _ in range(20):
        f = random_grid_2d(ms, 4, rng)
        for p in fits:
            worst = 0.0
            for A in range(4):
                for B in range(4):
                    res = power_mean_block(f, A, B, p)
                    worst = max(worst, res.sup / ((p + 1) ** 2 * f.sup_norm))
            fits[p].append(worst)
    cmax = max(max(cs) for cs in fits.values())
    spread = max(max(cs) / min(cs) for cs in fits.values())
    ok = cmax <= 10.0 and spread < 4.0
    verdict(
        f"criterion-6 block power means (fitted C {cmax:.4g} <= 10, "
        f"trial spread {spread:.3g} < 4)", ok,
    )


def _est_chain_cellwise(f: CylinderGrid2D) -> bool:
    scales = f.ms.number_system.scales
    psi = character_matrix(f.ms, f.depth)
    cf = forward_transform_2d(f).coeffs
    for L in range(f.depth):
        for R in range(f.depth):
            etilde = block_approx_surrogate(f, L, R)
            g_vals = f.values - rect_partial_sum(f, scales[L], scales[R]).values
            cg = forward_transform_2d(CylinderGrid2D(f.ms, f.depth, g_vals)).coeffs
            for l in {scales[L], scales[L + 1] - 1}:
                for r in {scales[R], scales[R + 1] - 1}:
                    Sf = psi[:l].T @ cf[:l, :r] @ psi[:r]
                    Sg = psi[:l].T @ cg[:l, :r] @ psi[:r]
                    if np.any(np.abs(Sf - f.values) > np.abs(Sg) + 2 * etilde + TOL):
                        return False
    return True


def test_criterion_7_chain_and_convergence():
    ms = ModulusSequence((2, 3, 2, 3))
    scales = ms.number_system.scales
    rng = np.random.default_rng(7)
    A = 1.0
    chain_ok, ratios, trend_ok = True, [], True
    for _ in range(10):
        f = random_grid_2d(ms, 4, rng)
        chain_ok = chain_ok and _est_chain_cellwise(f)
        for d in range(1, 5):
            n = scales[d]
            lhs = theorem1_lhs(f, n, n, A)
            rhs = theorem1_rhs(f, n, n, A)
            if lhs.value > 1e-12:
                ratios.append(lhs.value / rhs if rhs > 0 else math.inf)
        smooth = random_grid_2d(ms, 2, rng).refine(4)
        fine = strong_mean_2d(smooth, 36, 36, sqrt_gauge(A)).value
        coarse = strong_mean_2d(smooth, 2, 2, sqrt_gauge(A)).value
        trend_ok = trend_ok and fine < coarse
    c_fit = max(ratios)
    lemma4_ok = all(
        math.isfinite(lemma4_constant(random_grid_2d(ms, 4, rng), 36, 36, p))
        for p in (1.0, 2.0)
    )
    ok = chain_ok and math.isfinite(c_fit) and trend_ok and lemma4_ok
    verdict(
        f"criterion-7 error chain + exponential bound (cellwise chain holds, "
        f"single fitted constant {c_fit:.4g} finite, convergence trend holds)", ok,
    )


def test_criterion_8_counterexample_suite():
    gauge = power_gauge(1.0, 1.5)  # u^(3/2)
    pattern = (2, 3)
    # exact-arithmetic stage at c' = 1: constraints hold for J = 2, but the
    # scan forces depth 2*A_2 = 486 (grids of 6^243 cells), far beyond any
    # budget, so the grid stage runs on a recorded reduced configuration as
    # the criterion's degradation clause allows.
    exact = choose_params(gauge, 1.0, 2, pattern)
    constraints_ok = exact.constraints_hold() and exact.A == (32, 243)
    reduced = desk_params(gauge, pattern, A=(3, 6))
    j3_ok, phase_ok, triangle_ok = True, True, True
    diags = []
    for k in (1, 2):
        jd = j_decomposition(reduced, k)
        j3_ok = j3_ok and jd.J3 == 0.0
        s_abs = abs(partial_sum_at_zero(reduced, k))
        triangle_ok = triangle_ok and (jd.J1 - jd.J2 - jd.J3 <= s_abs + TOL)
        block = build_block(reduced, k)
        kernel = dirichlet_grid(block.grid.ms, block.grid.depth, reduced.N[k - 1])
        on = np.abs(block.grid.values) > 0
        aligned = block.grid.values[on] * np.conj(kernel[on])
        phase_ok = phase_ok and bool(
            np.max(np.abs(aligned - np.abs(kernel[on]) / (k + 1)), initial=0.0) < TOL
        )
        diags.append(divergence_diagnostic(reduced, k))
    # The diagnostic-growth comparison diag(2) > diag(1) needs the exact
    # depths (A_2 - A_1 in the thousands); at any griddable reduction the
    # 2 ln N term still dominates, so per the degradation clause the suite
    # records the diagnostics without asserting growth.
    print(f"  reduced run A={reduced.A}, diagnostics {diags[0]:.4g}, {diags[1]:.4g} "
          f"(growth not asserted at reduced depth)")
    ok = constraints_ok and j3_ok and phase_ok and triangle_ok
    verdict(
        "criterion-8 counterexample suite (exact constraints at c'=1, J3 = 0, "
        "phase alignment < 1e-10, block inequality checks on recorded reduction)",
        ok,
    )


def test_criterion_9_determinism(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for cmd in (["kernels", "--m", "2,3,2"],
                ["transform", "--m", "2,3", "--seed", "3", "--trials", "5"],
                ["lemma3", "--m", "2,3", "--seed", "3", "--trials", "2"]):
        for p in paths:
            assert cli_main(cmd + ["--out", str(p)]) == 0
        identical = paths[0].read_bytes() == paths[1].read_bytes()
        assert identical, cmd[0]
    capsys.readouterr()
    verdict("criterion-9 determinism (same seed, byte-identical CSV)", True)
