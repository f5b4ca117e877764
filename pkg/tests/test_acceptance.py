"""End-to-end acceptance checks with hard tolerances; each criterion
reports one pass/fail line (echoed in the terminal summary)."""

import math
import time

import numpy as np

from nlkit import autodiff, linalg, problems, quasinewton, sensitivity, \
    solvers, sparsity
from nlkit.cli import run_scaling_cell
from nlkit.core import Problem, RetCode, SolveOptions
from nlkit.sparsity import COLUMNS, ROWS, SparsityPattern, color_greedy, \
    compressed_jacobian

import conftest
from conftest import mask_of_pattern


def report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {number:2d}. {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _suite_count(algorithm, options=None):
    solved = 0
    for i in range(1, 24):
        d = problems.test23(i)
        res = solvers.run_preset(algorithm, d.problem, options)
        if res.success:
            solved += 1
    return solved


def test_criterion_01_newton_raphson_suite():
    t0 = time.time()
    solved = _suite_count("newton-raphson",
                          SolveOptions(abstol=1e-8, maxiters=1000))
    elapsed = time.time() - t0
    report(1, solved == 23 and elapsed < 10.0,
           f"Newton-Raphson solves {solved}/23 (need 23) in {elapsed:.2f}s (<10s)")


def test_criterion_02_trust_region_suite():
    t0 = time.time()
    solved = _suite_count("trust-region",
                          SolveOptions(abstol=1e-8, maxiters=1000))
    elapsed = time.time() - t0
    report(2, solved >= 21 and elapsed < 10.0,
           f"Trust-region (simple) solves {solved}/23 (need >=21) in {elapsed:.2f}s (<10s)")


def test_criterion_03_levenberg_marquardt_suite():
    t0 = time.time()
    plain = _suite_count("levenberg-marquardt",
                         SolveOptions(abstol=1e-8, maxiters=1000))
    geo = _suite_count("lm-geodesic", SolveOptions(abstol=1e-8, maxiters=1000))
    elapsed = time.time() - t0
    report(3, plain == 23 and geo >= 20 and elapsed < 30.0,
           f"LM without geodesic {plain}/23 (need 23), with geodesic {geo}/23 "
           f"(need >=20), {elapsed:.1f}s (<30s)")


def test_criterion_04_polyalgorithm_robustness():
    t0 = time.time()
    solved = 0
    total = 0
    for i in range(1, 24):
        total += 1
        if solvers.run_polyalgorithm(problems.test23(i).problem).success:
            solved += 1
    for desc in (problems.brusselator_2d(16), problems.quadratic()):
        total += 1
        if solvers.run_polyalgorithm(desc.problem).success:
            solved += 1
    elapsed = time.time() - t0
    report(4, solved == total and elapsed < 60.0,
           f"Poly-algorithm solves {solved}/{total} (23 suite + Brusselator "
           f"N=16 + quadratic) in {elapsed:.1f}s (<60s)")


def test_criterion_05_line_search_rescue():
    t0 = time.time()
    d = problems.generalized_rosenbrock(10)
    opts = SolveOptions(abstol=1e-8, maxiters=1000)
    plain = solvers.run_preset("newton-raphson", d.problem, opts)
    rescued = solvers.run_preset("newton-backtracking", d.problem, opts)
    at_ones = float(np.max(np.abs(rescued.u_star - 1.0)))
    resid = float(np.max(np.abs(d.problem.f(rescued.u_star))))
    elapsed = time.time() - t0
    ok = (plain.retcode is not RetCode.SUCCESS and rescued.success
          and resid <= 1e-8 and at_ones < 1e-6 and elapsed < 5.0)
    report(5, ok,
           f"Backtracking rescues generalized Rosenbrock N=10 (plain NR: "
           f"{plain.retcode.value}, rescued |f|={resid:.1e}, "
           f"|u-1|={at_ones:.1e}) in {elapsed:.2f}s (<5s)")


def test_criterion_06_coloring_example():
    pat = SparsityPattern(5, 5, ((0, 0), (1, 1), (1, 2), (2, 3), (3, 0),
                                 (3, 1), (3, 4), (4, 4)))
    cols = color_greedy(pat, COLUMNS)
    rows = color_greedy(pat, ROWS)
    col_classes = {c: tuple(int(j) for j in np.flatnonzero(cols.color_of == c) + 1)
                   for c in (1, 2, 3)}
    row_classes = {c: tuple(int(j) for j in np.flatnonzero(rows.color_of == c) + 1)
                   for c in (1, 2)}
    ok = (cols.num_colors == 3 and rows.num_colors == 2
          and col_classes == {1: (1, 3, 4), 2: (2,), 3: (5,)}
          and row_classes == {1: (1, 2, 3, 5), 2: (4,)})
    report(6, ok,
           f"5x5 example: column classes {col_classes} (3 colors), "
           f"row classes {row_classes} (2 colors)")


def test_criterion_07_sparse_jacobian_oracle():
    t0 = time.time()
    worst = 0.0
    ok = True
    details = []
    for N in (4, 8, 16):
        d = problems.brusselator_2d(N)
        pat = d.problem.known_pattern
        coloring = color_greedy(pat, COLUMNS)
        u = d.problem.u0
        Jc = compressed_jacobian(d.problem.residual, u, d.problem.params,
                                 pat, coloring)
        Jd = autodiff.dense_jacobian(d.problem.residual, u, d.problem.params)
        diff = float(np.max(np.abs(Jc.to_dense() - Jd * mask_of_pattern(pat))))
        worst = max(worst, diff)
        sweeps = sparsity.seed_matrix(pat, coloring).shape[1]
        ok = ok and diff <= 1e-10 and sweeps == coloring.num_colors \
            and sweeps < 2 * N * N
        details.append(f"N={N}: diff={diff:.1e}, sweeps={sweeps}")
    elapsed = time.time() - t0
    report(7, ok and elapsed < 10.0,
           f"Colored sparse == dense dual masked (max {worst:.1e} <= 1e-10); "
           + "; ".join(details) + f"; {elapsed:.1f}s (<10s)")


def test_criterion_08_krylov_equivalence():
    t0 = time.time()
    d32 = problems.brusselator_2d(32)
    r32 = solvers.run_preset("newton-krylov-ilu0", d32.problem,
                             SolveOptions(abstol=1e-6))
    resid32 = float(np.max(np.abs(d32.problem.f(r32.u_star))))
    d8 = problems.brusselator_2d(8)
    opts8 = SolveOptions(abstol=1e-8)
    rk8 = solvers.run_preset("newton-krylov-ilu0", d8.problem, opts8)
    rd8 = solvers.run_preset("newton-raphson", d8.problem, opts8)
    diff8 = float(np.max(np.abs(rk8.u_star - rd8.u_star)))
    elapsed = time.time() - t0
    ok = (r32.success and resid32 <= 1e-6 and rk8.success and rd8.success
          and diff8 <= 1e-6 and elapsed < 120.0)
    report(8, ok,
           f"Newton-Krylov+ILU0: N=32 |f|={resid32:.1e} (<=1e-6); N=8 iterate "
           f"matches dense Newton to {diff8:.1e} (<=1e-6); {elapsed:.1f}s (<120s)")


def test_criterion_09_sensitivity():
    t0 = time.time()
    dq = problems.quadratic((2.0, 5.0))
    sol = solvers.run_preset("newton-raphson", dq.problem,
                             SolveOptions(abstol=1e-12))
    gbar = 2.0 * sol.u_star
    grad_adj = sensitivity.ift_adjoint(dq.problem, sol.u_star, dq.problem.params,
                                       gbar)
    S = sensitivity.ift_forward(dq.problem, sol.u_star, dq.problem.params)
    grad_fwd = S.T @ gbar
    worked_ok = (np.max(np.abs(grad_adj - 1.0)) <= 1e-8
                 and np.max(np.abs(grad_fwd - 1.0)) <= 1e-8)

    # random 6-dim problem vs central FD of the full re-solve
    rng = np.random.default_rng(10)
    A = rng.standard_normal((6, 6)) + 6 * np.eye(6)
    B = rng.standard_normal((6, 3))
    f = lambda u, p: A @ u + 0.1 * np.sin(u) + B @ p - 1.0
    theta = np.array([0.3, -0.7, 1.1])
    prob = Problem(f, np.zeros(6), params=theta)
    opts = SolveOptions(abstol=1e-12)

    def solve_at(t):
        return solvers.run_preset("newton-raphson",
                                  Problem(f, np.zeros(6), params=t), opts).u_star

    u_star = solve_at(theta)
    S6 = sensitivity.ift_forward(prob, u_star, theta)
    fd = np.zeros_like(S6)
    for j in range(3):
        h = 1e-5 * max(1.0, abs(theta[j]))
        tp, tm = theta.copy(), theta.copy()
        tp[j] += h
        tm[j] -= h
        fd[:, j] = (solve_at(tp) - solve_at(tm)) / (2.0 * h)
    rel = float(np.max(np.abs(S6 - fd)) / max(np.max(np.abs(fd)), 1.0))
    elapsed = time.time() - t0
    ok = worked_ok and rel <= 1e-4 and elapsed < 5.0
    report(9, ok,
           f"IFT worked example gradient == (1,1) to 1e-8 both modes; 6-dim "
           f"FD agreement {rel:.1e} (<=1e-4); {elapsed:.2f}s (<5s)")


def _tail_order(trace, floor=1e-14):
    rs = [r for _, r in trace if r > floor][-4:]
    orders = []
    for k in range(2, len(rs)):
        den = math.log(rs[k - 1] / rs[k - 2])
        if den != 0:
            orders.append(math.log(rs[k] / rs[k - 1]) / den)
    return max(orders) if orders else 0.0


def test_criterion_10_convergence_orders():
    t0 = time.time()
    opts = SolveOptions(abstol=1e-14, maxiters=100, store_trace=True)
    cubic = Problem(lambda u, _p: u ** 3 - 8.0, [3.0])
    expo = Problem(lambda u, _p: np.exp(u) - 2.0, [3.0])
    p_newton = _tail_order(solvers.run_preset("newton-raphson", cubic,
                                              opts).trace)
    p_halley = _tail_order(solvers.run_preset("halley", cubic, opts).trace)
    p_pp = _tail_order(solvers.run_preset("potra-ptak", expo, opts).trace)
    elapsed = time.time() - t0
    ok = (p_newton >= 1.8 and p_halley >= 2.5 and p_pp >= 2.0
          and elapsed < 5.0)
    report(10, ok,
           f"Empirical orders: Newton {p_newton:.2f} (>=1.8), Halley "
           f"{p_halley:.2f} (>=2.5), Potra-Ptak {p_pp:.2f} (>=2.0); "
           f"{elapsed:.2f}s (<5s)")


def test_criterion_11_secant_invariants():
    t0 = time.time()
    rng = np.random.default_rng(6)
    n = 6
    dense = quasinewton.QuasiNewtonState(quasinewton.DENSE_INVERSE, H=np.eye(n))
    low = quasinewton.QuasiNewtonState(quasinewton.LOW_RANK, pairs=[])
    diag = quasinewton.QuasiNewtonState(quasinewton.DIAGONAL, diag=np.ones(n))
    checked = 0
    worst = 0.0
    for _ in range(334):
        s = rng.standard_normal(n)
        t = rng.standard_normal(n)
        new = quasinewton.broyden_update(dense, s, t)
        if new is not dense:
            worst = max(worst, float(np.linalg.norm(new.H @ t - s)
                                     / np.linalg.norm(s)))
            checked += 1
        dense = new
        new = quasinewton.lbroyden_update(low, s, t, capacity=10)
        if new is not low:
            worst = max(worst, float(
                np.linalg.norm(quasinewton.lbroyden_apply(new, t) - s)
                / np.linalg.norm(s)))
            checked += 1
        low = new
        new = quasinewton.klement_update(diag, s, t)
        live = np.abs(s) > 1e-9 * np.max(np.abs(s))
        worst = max(worst, float(np.max(np.abs((new.diag * s - t)[live]))
                                 / max(1.0, np.max(np.abs(t)))))
        checked += 1
        diag = new
    elapsed = time.time() - t0
    ok = checked >= 1000 and worst <= 1e-10 and elapsed < 5.0
    report(11, ok,
           f"{checked} randomized secant updates, worst relative violation "
           f"{worst:.1e} (<=1e-10); {elapsed:.2f}s (<5s)")


def test_criterion_12_scaling_ordering():
    t0 = time.time()
    abstol = 1e-6
    opts = SolveOptions(abstol=abstol)

    def timed(preset, N):
        d = problems.brusselator_2d(N)
        start = time.time()
        res = solvers.run_preset(preset, d.problem, opts)
        return time.time() - start, res

    t_dense16, r_dense16 = timed("newton-fd", 16)
    t_sparse = {}
    for N in (16, 32, 64):
        t_sparse[N], r = timed("newton-sparse", N)
        assert r.success, f"sparse Newton failed at N={N}"
    t_nk64, r_nk64 = timed("newton-krylov-ilu0", 64)

    timeout_s = 120.0
    dense64 = run_scaling_cell("brusselator2d", 64, "newton-fd", abstol,
                               1000, timeout_s)
    dense64_time = dense64["runtime_ns"] / 1e9
    dense_exceeded = (dense64["retcode"] == "Timeout"
                      or dense64_time > 10.0 * t_dense16)
    sparse_faster = t_sparse[64] < dense64_time
    elapsed = time.time() - t0
    ok = (r_dense16.success and sparse_faster and dense_exceeded
          and r_nk64.success and elapsed < 600.0)
    report(12, ok,
           f"Brusselator scaling: sparse N=64 {t_sparse[64]:.1f}s < dense "
           f"N=64 {dense64_time:.1f}s ({dense64['retcode']}); Newton-Krylov "
           f"N=64 completes ({t_nk64:.1f}s, {r_nk64.retcode.value}); dense "
           f"N=16 baseline {t_dense16:.2f}s; total {elapsed:.0f}s (<600s)")
