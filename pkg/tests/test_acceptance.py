"""Acceptance criteria, one test per criterion.

Each test logs a single PASS/FAIL line (printed again in the terminal
summary) and then asserts.  Runtime budgets are part of each criterion.
"""

import json
import time

import numpy as np
import pytest

from kirchsolve import (
    ExponentField,
    Grid,
    RenormTestFunction,
    check_order,
    comparison_experiment,
    default_spec,
    energy_decay,
    fit_rate,
    renormalized_residual,
    solve_truncated,
    stability_experiment,
    theoretical_exponents,
)
from kirchsolve.cli import EXIT_OK, main
from kirchsolve.properties import manufactured_errors, symmetry_defect

pytestmark = pytest.mark.acceptance

SCHEDULE = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]
REFERENCE_ERRORS = [(1e-1, 0.0152), (1e-2, 0.0098), (1e-3, 0.0062), (1e-4, 0.0039), (1e-5, 0.0025)]


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def test_exponent_formulas(tmp_path, acceptance_log):
    with _Timer() as t:
        code = main(["exponents", "--out", str(tmp_path), "--quiet"])
        rep = json.loads((tmp_path / "exponents.json").read_text())
    ok = (code == EXIT_OK
          and abs(rep["mu1"] - 0.5714285714) <= 1e-9
          and abs(rep["gamma_rate"] - 1 / 6) <= 1e-12
          and rep["blow_up"] is True and rep["mu2"] is None
          and t.seconds < 1.0)
    acceptance_log(1, ok, f"mu1={rep['mu1']:.12f} gamma_rate={rep['gamma_rate']:.15f} "
                          f"blow_up={rep['blow_up']} ({t.seconds:.2f}s < 1s)")
    assert ok


def test_reference_rate_regression(acceptance_log):
    with _Timer() as t:
        fit = fit_rate(REFERENCE_ERRORS)
    ok = abs(fit.slope - 0.196) <= 0.005 and fit.r_squared >= 0.99 and t.seconds < 1.0
    acceptance_log(2, ok, f"slope={fit.slope:.6f} (0.196 +- 0.005) r2={fit.r_squared:.6f} "
                          f"({t.seconds:.3f}s < 1s)")
    assert ok


def test_manufactured_second_order(acceptance_log):
    with _Timer() as t:
        e100, e200 = manufactured_errors((100, 200), eps=0.01)
    ratio = e100 / e200
    ok = 3.2 <= ratio <= 4.8 and t.seconds < 5.0
    acceptance_log(3, ok, f"Linf ratio N=100/N=200 = {ratio:.4f} in [3.2, 4.8] "
                          f"({e100:.3e}, {e200:.3e}; {t.seconds:.2f}s < 5s)")
    assert ok


@pytest.fixture(scope="module")
def timed_sweep():
    from kirchsolve import continuation_sweep
    with _Timer() as t:
        result = continuation_sweep(default_spec(), SCHEDULE, Grid(400))
    return result, t.seconds


def test_epsilon_monotonicity_and_convergence(timed_sweep, acceptance_log):
    result, seconds = timed_sweep
    worst = 0.0
    for lo, hi in zip(result.profiles, result.profiles[1:]):
        worst = max(worst, check_order(lo.u, hi.u, 1e-8).max_violation)
    l2 = [e[1] for e in result.errors_to_reference]
    decreasing = all(a > b for a, b in zip(l2, l2[1:]))
    fit = fit_rate([(e, err) for e, err, _ in result.errors_to_reference])
    gamma = theoretical_exponents(default_spec()).gamma_rate
    ok = (result.complete and len(l2) == 4 and worst <= 1e-8 and decreasing
          and fit.slope > 0 and seconds < 60.0)
    acceptance_log(4, ok, f"max violation {worst:.2e} <= 1e-8, L2 errors "
                          + ", ".join(f"{v:.3e}" for v in l2)
                          + f", slope {fit.slope:.3f} > 0 (theory {gamma:.4f}; {seconds:.2f}s < 60s)")
    assert ok


def test_energy_decay(timed_sweep, acceptance_log):
    result, _ = timed_sweep
    gaps = [g for _, _, g in energy_decay(result, default_spec())][:-1]
    ok = all(a > b for a, b in zip(gaps, gaps[1:]))
    acceptance_log(5, ok, "energy gaps " + ", ".join(f"{g:.4f}" for g in gaps)
                          + " strictly decreasing")
    assert ok


def test_comparison_principle(acceptance_log):
    rng = np.random.default_rng(20240611)
    base = default_spec()
    grid = Grid(200)
    worst = 0.0
    with _Timer() as t:
        for _ in range(20):
            lam1, lam2 = np.sort(rng.uniform(0.0, 0.2, size=2))
            shift = float(rng.uniform(0.0, 1.0))
            f1 = base.f
            f2 = ExponentField.polynomial([1.0 + shift, 1.0, -1.0])
            rep = comparison_experiment(base.replace(lam=float(lam1), f=f1),
                                        base.replace(lam=float(lam2), f=f2), 1e-2, grid)
            worst = max(worst, rep.max_violation)
    ok = worst <= 1e-8 and t.seconds < 60.0
    acceptance_log(6, ok, f"20 random ordered pairs, worst violation {worst:.2e} <= 1e-8 "
                          f"({t.seconds:.2f}s < 60s)")
    assert ok


def test_symmetry(acceptance_log):
    spec = default_spec().replace(p=ExponentField.constant(2.0))
    with _Timer() as t:
        defect = symmetry_defect(spec, 1e-3, Grid(400))
    ok = defect <= 1e-8 and t.seconds < 5.0
    acceptance_log(7, ok, f"max |u(x) - u(1-x)| = {defect:.2e} <= 1e-8 ({t.seconds:.2f}s < 5s)")
    assert ok


def test_renormalized_residual(acceptance_log):
    spec = default_spec()
    with _Timer() as t:
        prof = solve_truncated(spec, 1e-3, Grid(400))
        chk = renormalized_residual(prof, spec, RenormTestFunction.bump(0.05, 0.15))
    bound = 1e-6 * (1 + abs(chk.rhs))
    ok = prof.converged and chk.residual <= bound and t.seconds < 5.0
    acceptance_log(8, ok, f"residual {chk.residual:.2e} <= {bound:.2e} (RHS {chk.rhs:.5f}; "
                          f"{t.seconds:.2f}s < 5s)")
    assert ok


def test_stability_ratios(acceptance_log):
    spec = default_spec()
    grid = Grid(400)
    ratios = []
    with _Timer() as t:
        for c in (1e-1, 1e-2, 1e-3):
            shifted = spec.replace(f=ExponentField.polynomial([1.0 + c, 1.0, -1.0]))
            ratios.append(stability_experiment(spec, shifted, 1e-2, grid).ratio)
    spread = max(ratios) / min(ratios)
    ok = spread <= 3.0 and t.seconds < 30.0
    acceptance_log(9, ok, "ratios " + ", ".join(f"{r:.4f}" for r in ratios)
                          + f", spread {spread:.3f} <= 3 ({t.seconds:.2f}s < 30s)")
    assert ok


def test_alpha_ordering(acceptance_log):
    spec = default_spec()
    grid = Grid(400)
    alphas = [0.5, 1.0, 1.5, 2.0]
    with _Timer() as t:
        profiles = [solve_truncated(spec.replace(alpha=a), 1e-3, grid) for a in alphas]
    worst = 0.0
    for lo_alpha, hi_alpha in zip(profiles, profiles[1:]):
        # decreasing in alpha: u_{alpha_{k+1}} <= u_{alpha_k}
        worst = max(worst, check_order(hi_alpha.u, lo_alpha.u, 1e-8).max_violation)
    peaks = ", ".join(f"{a}:{p.u.values.max():.4f}" for a, p in zip(alphas, profiles))
    ok = worst <= 1e-8 and t.seconds < 60.0
    acceptance_log(10, ok, f"max violation {worst:.3e} <= 1e-8; peak u by alpha {peaks} "
                           f"({t.seconds:.2f}s < 60s)")
    assert ok
