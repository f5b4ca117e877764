import json

import numpy as np
import pytest

from nlkit import solvers
from nlkit.core import (Problem, RetCode, SolveOptions, assert_pure,
                        check_convergence, resid_max_norm, result_to_json,
                        solve)

NR = solvers.ALGORITHM_PRESETS["newton-raphson"]


def test_check_convergence_examples():
    assert check_convergence([1e-9, -5e-10], 1e-8)
    assert not check_convergence([1e-9, 2e-8], 1e-8)
    assert check_convergence([0.0, 0.0, 0.0], 1e-8)


def test_check_convergence_nan_fails():
    assert not check_convergence([np.nan, 0.0], 1e-8)
    assert not check_convergence([np.inf], 1e-8)


def test_solve_quadratic_newton():
    prob = Problem(lambda u, p: u * u - p, [1.0, 2.0], params=[2.0, 5.0])
    res = solve(prob, NR)
    assert res.retcode is RetCode.SUCCESS
    np.testing.assert_allclose(res.u_star, np.sqrt([2.0, 5.0]), atol=1e-8)
    # success contract: re-evaluated residual obeys the tolerance
    assert resid_max_norm(prob.f(res.u_star)) <= 1e-8


def test_solve_already_converged():
    prob = Problem(lambda u, _p: u, np.zeros(2))
    res = solve(prob, NR)
    assert res.retcode is RetCode.SUCCESS
    assert res.stats.nsteps == 0
    np.testing.assert_array_equal(res.u_star, np.zeros(2))


def test_solve_no_real_root_never_succeeds():
    prob = Problem(lambda u, _p: u * u + 1.0, [0.5])
    res = solve(prob, NR)
    assert res.retcode in (RetCode.MAXITERS, RetCode.STALLED)


def test_solve_determinism():
    prob = Problem(lambda u, p: u * u - p, [1.0, 2.0], params=[2.0, 5.0])
    a = solve(prob, NR)
    b = solve(prob, NR)
    assert np.array_equal(a.u_star, b.u_star)
    assert a.resid_norm == b.resid_norm
    assert a.retcode == b.retcode
    for f in ("nf", "njac", "njvp", "nlinsolve", "nsteps"):
        assert getattr(a.stats, f) == getattr(b.stats, f)


def test_counter_soundness():
    prob = Problem(lambda u, p: u * u - p, [1.0, 2.0], params=[2.0, 5.0])
    res = solve(prob, NR)
    assert res.stats.nf >= res.stats.nsteps
    assert res.stats.nlinsolve >= res.stats.nsteps


def test_problem_coerces_scalar_inputs():
    prob = Problem(lambda u, p: u * u - p, 1.0, params=4.0)
    assert prob.u0.shape == (1,)
    assert prob.params.shape == (1,)
    res = solve(prob, NR)
    np.testing.assert_allclose(res.u_star, [2.0], atol=1e-8)


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(abstol=0.0)
    with pytest.raises(ValueError):
        SolveOptions(maxiters=0)


def test_trace_storage():
    prob = Problem(lambda u, p: u * u - p, [1.0, 2.0], params=[2.0, 5.0])
    res = solve(prob, NR, SolveOptions(store_trace=True))
    assert res.trace is not None
    assert res.trace[0][0] == 0
    norms = [r for _, r in res.trace]
    assert norms[-1] <= 1e-8
    res2 = solve(prob, NR)
    assert res2.trace is None


def test_purity_hook():
    prob = Problem(lambda u, _p: u * 2.0, np.ones(3))
    assert assert_pure(prob)
    state = {"n": 0}

    def impure(u, _p):
        state["n"] += 1
        return u + state["n"]

    with pytest.raises(AssertionError):
        assert_pure(Problem(impure, np.ones(2)))


def test_result_json_round_trip():
    prob = Problem(lambda u, p: u * u - p, [1.0, 2.0], params=[2.0, 5.0])
    res = solve(prob, NR)
    payload = json.loads(result_to_json(res))
    assert payload["retcode"] == "Success"
    # shortest round-trip floats: parsing back reproduces bit-identical values
    np.testing.assert_array_equal(np.array(payload["u_star"]), res.u_star)
    assert payload["stats"]["nf"] == res.stats.nf


def test_default_algorithm_is_polyalgorithm():
    prob = Problem(lambda u, p: u * u - p, [1.0, 2.0], params=[2.0, 5.0])
    res = solve(prob)
    assert res.retcode is RetCode.SUCCESS
    assert res.stage_retcodes is not None


def test_nonfinite_iterate_aborts():
    # residual finite at start, Newton step leads to overflow immediately
    def f(u, _p):
        out = np.zeros(1, dtype=u.dtype if u.dtype == object else float)
        out[0] = np.exp(u[0]) - 1e300
        return out

    res = solve(Problem(f, [0.0]), NR)
    assert res.retcode is RetCode.NONFINITE
