"""Benchmark data and formulas, checked against a second scalar implementation."""

import math

import numpy as np
import pytest

from rbdo import problems, rds
from rbdo.stats import Family


# -- independent scalar oracles (plain floats, no shared helpers) ---------------


def oracle_side_impact(x, p):
    x1, x2, x3, x4, x5, x6, x7 = x
    p1, p2, p3, p4 = p
    f = 1.98 + 4.9 * x1 + 6.67 * x2 + 6.98 * x3 + 4.01 * x4 + 1.78 * x5 + 0.0 * x6 + 2.73 * x7
    F_AL = 1.16 - 0.3717 * x2 * x4 - 0.00931 * x2 * p3 - 0.484 * x3 * p2 + 0.01343 * x6 * p4
    VC_low = 0.74 - 0.61 * x2 - 0.163 * x3 * p1 + 0.001232 * x3 * p3 - 0.166 * x7 * p2 + 0.227 * x2 * x2
    V_door = 16.45 - 0.489 * x3 * x7 - 0.843 * x5 * x6 + 0.0432 * p2 * p3 - 0.0556 * p2 * p4 - 0.000786 * p4 * p4
    return f, {"F_AL": 1.01 - F_AL, "VC_low": 0.32 - VC_low, "V_door": 15.69 - V_door}


def oracle_speed_reducer(d, x, p):
    d1, d2 = d
    x1, x2, x3, x4, x5 = x
    f = (0.7854 * x1 * d1**2 * (3.3333 * d2**2 + 14.9334 * d2 - 43.0934)
         - 1.5079 * x1 * (x4**2 + x5**2) + 7.477 * (x4**3 + x5**3) + 0.7854 * (x2 * x4**2 + x3 * x5**2))
    g1 = 1 - p[0] / (x1 * d1 * d1 * d2)
    g5 = 1 - math.sqrt((p[5] * x2 / (d1 * d2)) ** 2 + p[6]) / (2 * p[4] * p[7] * x4**3)
    g9 = 1 - (p[12] * x4 + p[14]) / (2 * x2)
    return f, {"g1": g1, "g5": g5, "g9": g9}


def oracle_welded(x, p, c1, c2, length):
    x1, x2, x3, x4 = x
    P, L, E, G, dmax, tmax, smax = p
    f = c1 * x1 * x1 * x2 + c2 * x3 * x4 * (length + x2)
    tp = P / (math.sqrt(2) * x1 * x2)
    M = P * (L + x2 / 2)
    R = math.sqrt(x2 * x2 / 4 + ((x1 + x3) / 2) ** 2)
    J = math.sqrt(2) * x1 * x2 * (x2 * x2 / 12 + ((x1 + x3) / 2) ** 2)  # as printed, no factor 2
    tpp = M * R / J
    tau = math.sqrt(tp * tp + 2 * tp * tpp * x2 / (2 * R) + tpp * tpp)
    Pc = 4.013 * x3 * x4**3 * math.sqrt(E * G) / (6 * L * L) * (1 - x3 / (4 * L) * math.sqrt(E / G))
    return f, {
        "g1": 1 - tau / tmax,
        "g2": 1 - 6 * P * L / (x4 * x3 * x3) / smax,
        "g4": 1 - 4 * P * L**3 / (E * x3**3 * x4) / dmax,
        "g5": Pc / P - 1,
    }


def _states(problem, d, x, p):
    vals = problem.limit_state_values(np.atleast_2d(d), np.atleast_2d(x), np.atleast_2d(p))[0]
    return {ls.name: v for ls, v in zip(problem.limit_states, vals)}


def _random_points(problem, n, seed):
    rng = np.random.default_rng(seed)
    return problem.lower + (problem.upper - problem.lower) * rng.random((n, problem.dim))


def test_side_impact_against_oracle():
    prob = problems.vehicle_side_impact()
    for y in _random_points(prob, 5, 1):
        f, g = oracle_side_impact(y, prob.param_means)
        assert prob.objective_values(y[None])[0] == pytest.approx(f, rel=1e-13)
        got = _states(prob, y[:0], y, prob.param_means)
        for k, v in g.items():
            assert got[k] == pytest.approx(v, rel=1e-12, abs=1e-12)


def test_side_impact_reference_values():
    prob = problems.vehicle_side_impact()
    y = np.array([0.800849, 1.35, 0.7133922, 1.5, 0.875, 1.2, 0.4])
    assert prob.objective_values(y[None])[0] == pytest.approx(28.5526, abs=1e-4)
    assert prob.objective_values(prob.lower[None])[0] == pytest.approx(15.576, abs=1e-9)
    x = y.reshape(7, 1)
    p = prob.param_means.reshape(4, 1)
    assert float(problems.f_al(x, p)[0]) == pytest.approx(0.34101, abs=1e-5)
    # zero coefficient on x6
    e6 = np.zeros(7)
    e6[5] = 0.1
    assert prob.objective_values((y + e6)[None])[0] == prob.objective_values(y[None])[0]


def test_side_impact_roster():
    prob = problems.vehicle_side_impact()
    assert (prob.nd, prob.nx, prob.np_, len(prob.limit_states)) == (0, 7, 4, 10)
    assert [v.std for v in prob.random_vars] == [0.03, 0.03, 0.03, 0.03, 0.05, 0.03, 0.03]
    assert [q.dist.std for q in prob.params] == [0.006, 0.006, 10.0, 10.0]
    assert prob.lower.tolist() == [0.5, 0.45, 0.5, 0.5, 0.875, 0.4, 0.4]
    assert prob.upper.tolist() == [1.5, 1.35, 1.5, 1.5, 2.625, 1.2, 1.2]
    assert prob.betas == pytest.approx([3.0] * 10)


def test_math_2d():
    prob = problems.math_2d()
    x = np.array([[3.4405576, 3.2799744]])
    g = prob.limit_state_values(x[:, :0], x, np.zeros((1, 0)))[0]
    assert g[0] == pytest.approx(0.94132, abs=1e-5)
    x1 = 2.5
    assert float(problems.math_g1(None, np.array([x1, 20 / x1**2]), None)) == pytest.approx(0.0, abs=1e-12)
    assert prob.objective_values(x)[0] == pytest.approx(6.720532, abs=1e-6)
    fams = {k: tuple(v.family for v in problems.math_2d(k).random_vars) for k in problems.MATH_2D_VARIANTS}
    assert fams["gumbel"] == (Family.GUMBEL, Family.GUMBEL)
    assert fams["lognormal"] == (Family.LOGNORMAL, Family.NORMAL)
    assert problems.math_2d(beta=2.0).betas == pytest.approx([2.0] * 3)
    with pytest.raises(ValueError):
        problems.math_2d("weibull")
    with pytest.raises(ValueError):
        problems.math_2d(beta=2.0, pf=0.01)


def test_speed_reducer_against_oracle():
    prob = problems.speed_reducer()
    for y in _random_points(prob, 5, 2):
        d, x = y[:2], y[2:]
        f, g = oracle_speed_reducer(d, x, prob.param_means)
        assert prob.objective_values(y[None])[0] == pytest.approx(f, rel=1e-12)
        got = _states(prob, d, x, prob.param_means)
        for k, v in g.items():
            assert got[k] == pytest.approx(v, rel=1e-12, abs=1e-12)


def test_speed_reducer_reference_values():
    prob = problems.speed_reducer()
    y = np.array([0.7, 17.0, 3.860190, 7.0, 7.0, 2.932511, 5.0])
    assert prob.objective_values(y[None])[0] == pytest.approx(2856.55, abs=0.02)
    g = _states(prob, y[:2], y[2:], prob.param_means)
    # 1 - 27 / (3.86019 * 0.7**2 * 17) = 0.160327; the reference value rounds to 0.1603
    assert g["g1"] == pytest.approx(0.160327, abs=1e-6)
    assert g["g1"] == pytest.approx(0.1603, abs=1e-4)
    assert g["g9"] == pytest.approx(0.5501, abs=1e-4)
    h = prob.constraint_values(y[None, :2], y[None, 2:], prob.param_means[None])[0]
    assert -h[0] == pytest.approx(0.85125, abs=1e-12)
    assert (prob.nd, prob.nx, prob.np_, len(prob.limit_states), len(prob.constraints)) == (2, 5, 15, 10, 1)
    assert [v.cov for v in prob.random_vars] == [0.05, 0.05, 0.05, 0.02, 0.02]
    assert prob.limit_states[0].pf == 0.05


def test_welded_beam_against_oracle():
    for preset in problems.WELDED_BEAM_PRESETS:
        prob = problems.welded_beam(preset=preset)
        c = problems.WELDED_BEAM_PRESETS[preset]
        pts = _random_points(prob, 5, 3)
        pts[:, 1:] = np.maximum(pts[:, 1:], 1.0)
        for y in pts:
            f, g = oracle_welded(y, prob.param_means, c["c1"], c["c2"], c["length"])
            assert prob.objective_values(y[None])[0] == pytest.approx(f, rel=1e-12)
            got = _states(prob, y[:0], y, prob.param_means)
            for k, v in g.items():
                assert got[k] == pytest.approx(v, rel=1e-10, abs=1e-10)


def test_welded_beam_reference_values():
    disc = problems.welded_beam(discrete=True)
    y = np.array([6.0, 233.0, 232.0, 7.0])
    assert disc.objective_values(y[None])[0] == pytest.approx(3.27997, abs=1e-5)
    g = _states(disc, y[:0], y, disc.param_means)
    assert g["g3"] == pytest.approx(1 - 6 / 7, abs=1e-12)
    cont = problems.welded_beam(preset="table12-compatible")
    yc = np.array([5.730402, 200.8925, 210.59, 6.239425])
    assert cont.objective_values(yc[None])[0] == pytest.approx(2.5915, abs=1e-3)


def test_welded_beam_modes():
    cont = problems.welded_beam()
    assert not any(q.dist.is_random for q in cont.params)
    assert not cont.has_discrete
    disc = problems.welded_beam(discrete=True)
    random = [q.name for q in disc.params if q.dist.is_random]
    assert random == ["load", "young", "shear", "deflection", "tau_adm", "sigma_adm"]
    assert disc.value_sets[3].tolist() == [2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 15, 16, 18, 20, 22, 25]
    assert [v.std for v in disc.random_vars] == [0.1693, 0.1693, 0.0107, 0.0107]
    with_length = problems.welded_beam(discrete=True, length_random=True)
    assert with_length.params[1].dist.is_random
    assert with_length.params[1].dist.std == pytest.approx(0.05 * 335.56)
    fams = [q.dist.family for q in with_length.params]
    assert fams == [Family.LOGNORMAL, Family.NORMAL, Family.LOGNORMAL, Family.LOGNORMAL,
                    Family.NORMAL, Family.LOGNORMAL, Family.LOGNORMAL]
    with pytest.raises(ValueError):
        problems.welded_beam(preset="nope")


def test_registry():
    assert set(problems.BENCHMARKS) == {
        "vehicle_side_impact", "math_2d", "speed_reducer", "welded_beam", "welded_beam_discrete"
    }
    assert problems.get_benchmark("welded_beam_discrete").has_discrete
    with pytest.raises(ValueError):
        problems.get_benchmark("truss")


def test_limit_states_accept_batches():
    for name in problems.BENCHMARKS:
        prob = problems.get_benchmark(name)
        Y = _random_points(prob, 4, 7)
        f, nu = rds.evaluate(prob, Y)
        assert f.shape == nu.shape == (4,)
