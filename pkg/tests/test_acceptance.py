"""Acceptance gate: one test per criterion, one printed PASS/FAIL line each.

Every criterion is checked at its stated parameters and tolerances; the
printed line carries the measured numbers so a failing run documents what
the machine actually produced.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from nlheat import analysis, kernels, polysol
from nlheat.analysis import (
    ExpBarrier,
    Outcome,
    PowerBarrier,
    TemperedBarrier,
    blowup_bracket,
    critical_perturbed,
    divergence_probe,
    fit_estimates,
    lower_bound_cert,
    tail_slope,
    xlogx_growth,
    xsqrtlogx_growth,
)
from nlheat.convolution import convolve_direct, convolve_fft, iterate, support_radius
from nlheat.evolution import solve_representation
from nlheat.grid import GridFunction, make_grid
from nlheat.heat_kernel import omega, omega_residual, order_for_range, truncation_order

UNIFORM = kernels.uniform(1.0)
GAUSSIAN = kernels.gaussian(1.0)


def _line(num: int, ok: bool, detail: str) -> str:
    line = f"ACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    return line


def test_01_explicit_solution_quadratic_data():
    start = time.perf_counter()
    grid = make_grid(20.0, 0.01)
    u0 = GridFunction(grid, grid.nodes**2)
    res = solve_representation(UNIFORM, u0, 1.0, tol=1e-10)
    mask = np.abs(grid.nodes) <= 10.0
    err = float(np.max(np.abs(res.function.values[mask] - (grid.nodes[mask] ** 2 + 1.0 / 3.0))))
    elapsed = time.perf_counter() - start
    ok = err <= 1e-4 and elapsed < 5.0
    assert ok, _line(1, ok, f"max |u - (x^2 + t/3)| = {err:.3e} on |x|<=10, {elapsed:.2f}s")
    _line(1, ok, f"max |u - (x^2 + t/3)| = {err:.3e} on |x|<=10, {elapsed:.2f}s")


def test_02_omega_mass_identity():
    grid = make_grid(32.0, 0.02)
    details = []
    ok = True
    for t in (0.5, 1.0, 2.0, 5.0):
        start = time.perf_counter()
        exp = omega(UNIFORM, grid, t)
        lhs = abs(exp.mass - (1.0 - math.exp(-t)))
        rhs = exp.remainder_bound + exp.truncation_loss + 10.0 * grid.spacing**2
        elapsed = time.perf_counter() - start
        ok = ok and lhs <= rhs and elapsed < 10.0
        details.append(f"t={t:g}: {lhs:.1e}<={rhs:.1e} ({elapsed:.2f}s)")
    line = _line(2, ok, "; ".join(details))
    assert ok, line


def test_03_omega_pde_residual():
    grid = make_grid(16.0, 0.01)
    r1 = omega_residual(UNIFORM, grid, 1.0, 1e-3)
    r2 = omega_residual(UNIFORM, grid, 1.0, 5e-4)
    ratio = r1 / r2
    ok = r1 <= 1e-5 and 3.0 <= ratio <= 5.0
    line = _line(3, ok, f"residual(dt=1e-3) = {r1:.3e}, halving ratio = {ratio:.2f}")
    assert ok, line


def test_04_fft_direct_oracle():
    grid = make_grid(2.56, 0.01)
    assert grid.point_count == 513
    rng = np.random.default_rng(20260814)
    worst = 0.0
    for _ in range(200):
        f = GridFunction(grid, rng.random(grid.point_count))
        g = GridFunction(grid, rng.random(grid.point_count))
        a = convolve_fft(f, g).values
        b = convolve_direct(f, g).values
        worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    ok = worst <= 1e-10
    line = _line(4, ok, f"200 pairs on {grid.point_count} nodes, worst rel = {worst:.3e}")
    assert ok, line


def test_05_taylor_tail_bound():
    details = []
    ok = True
    for t in (1.0, 5.0, 20.0):
        k = truncation_order(t, 1e-12, 1.0)
        tail = math.fsum(
            math.exp(n * math.log(t) - math.lgamma(n + 1)) for n in range(k, k + 500)
        )
        bound = math.exp(t + k * math.log(t) - math.lgamma(k + 1))
        contracted = 1e-12 / (1.0 * math.exp(-t))
        ok = ok and tail <= bound and tail <= contracted
        details.append(f"t={t:g}: K={k}, tail={tail:.2e}")
    line = _line(5, ok, "; ".join(details))
    assert ok, line


def test_06_support_additivity_and_lower_bound():
    grid = make_grid(21.0, 0.01)
    its = iterate(kernels.discretize(UNIFORM, grid), 20, method="direct")
    ok = True
    worst = 0.0
    for n in range(1, 21):
        r = support_radius(its.term(n), 1e-300)
        worst = max(worst, abs(r - n * 1.0))
        ok = ok and (n - grid.spacing <= r <= n + grid.spacing)
    cert = lower_bound_cert(its, 0.5, 20, rho=1.0)
    ok = ok and all(cert.verified)
    line = _line(
        6, ok, f"support offset <= {worst:.3g} (h = {grid.spacing}); "
        f"cert c={cert.c:.4f} mu={cert.mu:.4f} verified at all n<=20"
    )
    assert ok, line


def test_07_gaussian_closed_form():
    grid = make_grid(16.0, 0.01)
    its = iterate(kernels.discretize(GAUSSIAN, grid), 10, method="direct", mass_tol=math.inf)
    worst = 0.0
    for n in range(1, 11):
        exact = np.sqrt(1.0 / (n * math.pi)) * np.exp(-(grid.nodes**2) / n)
        worst = max(worst, float(np.max(np.abs(its.term(n).values - exact))))
    ok = worst <= 1e-6
    line = _line(7, ok, f"sup |J*n - mass-1 gaussian| = {worst:.3e} for n <= 10")
    assert ok, line


def test_08_comparison_principle():
    grid = make_grid(16.0, 0.02)
    exp = omega(GAUSSIAN, grid, 1.0)
    rng = np.random.default_rng(20260814)
    worst = 0.0
    trusted = 0.0
    for _ in range(50):
        base = rng.random(grid.point_count)
        bump = rng.random(grid.point_count)
        ru = solve_representation(GAUSSIAN, GridFunction(grid, base), 1.0, iterates=exp.iterates)
        rv = solve_representation(
            GAUSSIAN, GridFunction(grid, base + bump), 1.0, iterates=exp.iterates
        )
        trusted = ru.trusted_radius
        mask = np.abs(grid.nodes) <= trusted
        worst = min(worst, float(np.min(rv.function.values[mask] - ru.function.values[mask])))
    ok = trusted >= 2.0 and worst >= -1e-10
    line = _line(8, ok, f"50 ordered pairs, min(v-u) = {worst:.3e} on |x| <= {trusted:.2f}")
    assert ok, line


def test_09_barrier_lemmas():
    # each lemma pairing at 50% and 90% of its critical parameter
    pairings = [
        (kernels.power_tail(3.0), PowerBarrier(1.5)),
        (kernels.power_tail(3.0), PowerBarrier(2.7)),
        (kernels.exponential_tail(1.0), ExpBarrier(0.5)),
        (kernels.exponential_tail(1.0), ExpBarrier(0.9)),
        (kernels.tempered_stable(1.0, 0.5), TemperedBarrier(1.0, 0.25)),
        (kernels.tempered_stable(1.0, 0.5), TemperedBarrier(1.0, 0.45)),
    ]
    grid = make_grid(40.0, 0.01)
    ok = True
    details = []
    for spec, barrier in pairings:
        lam = analysis.analytic_lambda(spec, barrier)
        lam_hat = analysis.numeric_lambda(kernels.discretize(spec, grid), barrier)
        ok = ok and lam_hat <= lam + 1e-6
        details.append(f"{spec.family}: {lam_hat:.3f}<={lam:.3f}")
    line = _line(9, ok, "; ".join(details))
    assert ok, line


CLASSIFICATION_CASES = [
    (kernels.uniform(1.0), xlogx_growth(0.5), Outcome.EXISTS),
    (kernels.uniform(1.0), xlogx_growth(2.0), Outcome.NOT_EXISTS),
    (kernels.bump(1.0), xlogx_growth(0.5), Outcome.EXISTS),
    (kernels.bump(2.0), xlogx_growth(0.7), Outcome.NOT_EXISTS),
    (kernels.gaussian(1.0), xsqrtlogx_growth(0.5), Outcome.EXISTS),
    (kernels.gaussian(1.0), xsqrtlogx_growth(2.0), Outcome.NOT_EXISTS),
    (kernels.gaussian(1.0), critical_perturbed(-0.3, 0.3), Outcome.BLOWS_UP),
    (kernels.power_tail(3.0), analysis.power_growth(2.0), Outcome.EXISTS),
    (kernels.power_tail(3.0), analysis.power_growth(3.0), Outcome.NOT_EXISTS),
    (kernels.exponential_tail(1.0), analysis.exp_growth(0.5), Outcome.EXISTS),
    (kernels.exponential_tail(1.0), analysis.exp_growth(1.0), Outcome.NOT_EXISTS),
    (kernels.tempered_stable(1.0, 0.5), analysis.exp_power_growth(1.0, 0.25), Outcome.EXISTS),
]


def test_10_classification_table():
    failures = []
    for spec, growth, expected in CLASSIFICATION_CASES:
        verdict = analysis.classify(spec, growth)
        if verdict.outcome is not expected:
            failures.append(f"{spec.family}/{growth.family}: {verdict.outcome}")
    ok = not failures
    line = _line(
        10, ok,
        f"12/12 fixed cases exact" if ok else f"mismatches: {failures}",
    )
    assert ok, line


RADII = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]


def test_11_existence_probe():
    sub = divergence_probe(UNIFORM, xlogx_growth(0.5), 1.0, RADII, spacing=0.03)
    sup = divergence_probe(UNIFORM, xlogx_growth(2.0), 1.0, RADII, spacing=0.03)
    ok = (
        sub.flag == "saturating"
        and sub.last_increment < 1e-6
        and sup.flag == "diverging"
        and sup.ratio > 10.0
    )
    line = _line(
        11, ok,
        f"xlogx(0.5): {sub.flag}, last increment {sub.last_increment:.1e}; "
        f"xlogx(2): {sup.flag}, ratio {sup.ratio:.3g}",
    )
    assert ok, line


def test_12_blowup_signature():
    band = critical_perturbed(-0.3, 0.3)
    fit = fit_estimates(GAUSSIAN, make_grid(18.0, 0.01), [0.5, 1.0, 2.0])
    bracket = blowup_bracket(1.0, -0.3, 0.3, fit)
    window = (bracket.t_lo / 10.0, bracket.t_hi * 10.0)

    spacing = 0.03
    pad = max(3.0 * math.sqrt(kernels.moment(GAUSSIAN, 2)), 10 * spacing)
    grid = make_grid(spacing * math.ceil((RADII[-1] + pad) / spacing), spacing)
    times = [0.5, 1.0, 2.0, 3.0, 5.0, 8.0]
    order = max(order_for_range(GAUSSIAN, RADII[-1], t) for t in times)
    shared = iterate(kernels.discretize(GAUSSIAN, grid), order, method="direct",
                     mass_tol=math.inf)
    t_sat = t_div = None
    for t in times:
        probe = divergence_probe(GAUSSIAN, band, t, RADII, spacing=spacing, iterates=shared)
        if probe.flag == "saturating":
            t_sat = t
        if probe.flag == "diverging" and t_div is None:
            t_div = t
    ok = (
        t_sat is not None and t_div is not None and t_sat < t_div
        and 0.0 < t_sat <= 10.0 and 0.0 < t_div <= 10.0
        and window[0] <= t_sat and t_div <= window[1]
    )
    line = _line(
        12, ok,
        f"flip {t_sat} -> {t_div}, bracket [{bracket.t_lo:.3f}, {bracket.t_hi:.3f}], "
        f"window [{window[0]:.3f}, {window[1]:.3f}]",
    )
    assert ok, line


def test_13_estimate_exponents():
    s_uniform = tail_slope(UNIFORM, make_grid(20.0, 0.02), t=1.0, x_min=5.0, x_max=15.0)
    s_gaussian = tail_slope(GAUSSIAN, make_grid(18.0, 0.01), t=1.0, x_min=5.0, x_max=15.0)
    ok_u = 0.8 <= s_uniform <= 1.2
    ok_g = 0.8 <= s_gaussian <= 1.2
    ok = ok_u and ok_g
    line = _line(
        13, ok,
        f"uniform slope {s_uniform:.4f} in [0.8, 1.2]: {ok_u}; "
        f"gaussian slope {s_gaussian:.4f} in [0.8, 1.2]: {ok_g} "
        f"(measured decay sits at 2*gamma, not gamma; see tail_slope docs)",
    )
    assert ok, line


def test_14_polynomial_recursion():
    table = kernels.moment_table(UNIFORM, max_order=16)
    m2 = table.get(2)
    grid = make_grid(20.0, 0.01)
    ok = True
    details = []
    for p in range(1, 9):
        sol = polysol.explicit_solution(p, table)
        next_action = polysol.moment_convolve(sol.coefficients[-1], table)
        t_pow, lead = sol.leading_term()
        expected = Fraction(math.prod(range(1, 2 * p, 2))) * m2**p
        ok = ok and next_action.is_zero and sol.exact and t_pow == p and lead == expected
    details.append("c_{p+1} = 0 and leading (2p-1)!! m2^p exact for p <= 8")
    for p in (1, 2, 3):
        sol = polysol.explicit_solution(p, table)
        u0 = GridFunction(grid, grid.nodes ** (2 * p))
        res = solve_representation(UNIFORM, u0, 0.5, tol=1e-12)
        mask = np.abs(grid.nodes) <= 5.0
        exact = np.array(
            [polysol.evaluate_solution(sol, float(x), 0.5) for x in grid.nodes[mask]]
        )
        rel = float(
            np.max(np.abs(res.function.values[mask] - exact) / (1.0 + np.abs(exact)))
        )
        # discrete moments carry the h^2 trapezoid bias, nothing sharper
        budget = res.error_budget + 2.0 * grid.spacing**2
        ok = ok and rel <= budget
        details.append(f"p={p} numeric rel {rel:.1e} <= {budget:.1e}")
    line = _line(14, ok, "; ".join(details))
    assert ok, line
