"""Benchmark RBDO problems.

Limit states follow the convention ``g > 0`` safe.  Every function takes
``d``, ``x``, ``p`` arrays whose LEADING axis indexes the variables
(``x1, x2 = x``), so the same code serves single candidates,
finite-difference stencils and sample batches.
"""

from __future__ import annotations

import numpy as np

from .rds import LimitState, Parameter, ProblemDefinition, Variable
from .stats import Distribution, Family, std_normal_cdf

N = Family.NORMAL


def _pf(beta):
    return float(std_normal_cdf(-beta))


def _resolve_pf(beta, pf, default_beta=3.0):
    if pf is not None and beta is not None:
        raise ValueError("give beta or pf, not both")
    if pf is not None:
        return float(pf)
    return _pf(default_beta if beta is None else beta)


def _check_counts(problem, nd, nx, np_, m, n_det=0):
    got = (problem.nd, problem.nx, problem.np_, len(problem.limit_states), len(problem.constraints))
    want = (nd, nx, np_, m, n_det)
    if got != want:
        raise AssertionError(f"{problem.name}: roster {got} does not match {want}")
    return problem


# ---------------------------------------------------------------------------
# vehicle side impact
# ---------------------------------------------------------------------------

SIDE_IMPACT_STD = (0.03, 0.03, 0.03, 0.03, 0.05, 0.03, 0.03)
SIDE_IMPACT_BOUNDS = (
    (0.5, 1.5),
    (0.45, 1.35),
    (0.5, 1.5),
    (0.5, 1.5),
    (0.875, 2.625),
    (0.4, 1.2),
    (0.4, 1.2),
)
SIDE_IMPACT_PARAMS = ((0.345, 0.006), (0.192, 0.006), (0.0, 10.0), (0.0, 10.0))


def side_impact_objective(d, x):
    x1, x2, x3, x4, x5, _, x7 = x
    return 1.98 + 4.90 * x1 + 6.67 * x2 + 6.98 * x3 + 4.01 * x4 + 1.78 * x5 + 2.73 * x7


def f_al(x, p):
    _, x2, x3, x4, _, x6, _ = x
    _, p2, p3, p4 = p
    return 1.16 - 0.3717 * x2 * x4 - 0.00931 * x2 * p3 - 0.484 * x3 * p2 + 0.01343 * x6 * p4


def d_low(x, p):
    x1, x2, x3, *_ = x
    p1, _, p3, _ = p
    return 46.36 - 9.9 * x2 - 12.9 * x1 * p1 + 0.1107 * x3 * p3


def d_middle(x, p):
    x1, x2, x3, _, x5, _, x7 = x
    p1, p2, p3, _ = p
    return (
        33.86 + 2.95 * x3 + 0.1792 * p3 - 5.057 * x1 * x2 - 11.0 * x2 * p1
        - 0.0215 * x5 * p3 - 9.98 * x7 * p1 + 22.0 * p1 * p2
    )


def d_up(x, p):
    x1, x2, x3, _, x5, x6, x7 = x
    p1, p2, p3, _ = p
    return (
        28.98 + 3.818 * x3 - 4.2 * x1 * x2 + 0.0207 * x5 * p3 + 6.63 * x6 * p2
        - 7.7 * x7 * p1 + 0.32 * p2 * p3
    )


def vc_low(x, p):
    _, x2, x3, *_, x7 = x
    p1, p2, p3, _ = p
    return 0.74 - 0.61 * x2 - 0.163 * x3 * p1 + 0.001232 * x3 * p3 - 0.166 * x7 * p2 + 0.227 * x2**2


def vc_middle(x, p):
    x1, x2, x3, _, x5, x6, x7 = x
    p1, p2, p3, p4 = p
    return (
        0.214 + 0.00817 * x5 - 0.131 * x1 * p1 - 0.0704 * x1 * p2 + 0.03099 * x2 * x6
        - 0.018 * x2 * x7 + 0.0208 * x3 * p1 + 0.121 * x3 * p2 - 0.00364 * x5 * x6
        + 0.0007715 * x5 * p3 - 0.0005354 * x6 * p3 + 0.00121 * p1 * p4
    )


def vc_up(x, p):
    x1, x2, x3, _, x5, x6, x7 = x
    p1, p2, p3, p4 = p
    return (
        0.261 - 0.0159 * x1 * x2 - 0.188 * x1 * p1 - 0.019 * x2 * x7 + 0.0144 * x3 * x5
        + 0.0008757 * x5 * p3 + 0.08045 * x6 * p2 + 0.00139 * p1 * p4 + 0.00001575 * p3 * p4
    )


def f_ps(x, p):
    _, x2, x3, x4, _, x6, _ = x
    _, _, p3, p4 = p
    return 4.72 - 0.5 * x4 - 0.19 * x2 * x3 - 0.0122 * x4 * p3 + 0.009325 * x6 * p3 + 0.000191 * p4**2


def v_b_pillar(x, p):
    x1, x2, x3, x4, _, x6, _ = x
    p1, _, p3, _ = p
    return (
        10.58 - 0.674 * x1 * x2 - 1.95 * x2 * p1 + 0.02054 * x3 * p3 - 0.0198 * x4 * p3
        + 0.028 * x6 * p3
    )


def v_door(x, p):
    _, _, x3, _, x5, x6, x7 = x
    _, p2, p3, p4 = p
    return (
        16.45 - 0.489 * x3 * x7 - 0.843 * x5 * x6 + 0.0432 * p2 * p3 - 0.0556 * p2 * p4
        - 0.000786 * p4**2
    )


# response, admissible upper limit
SIDE_IMPACT_RESPONSES = {
    "F_AL": (f_al, 1.01),
    "D_low": (d_low, 32.0),
    "D_middle": (d_middle, 32.0),
    "D_up": (d_up, 32.0),
    "VC_low": (vc_low, 0.32),
    "VC_middle": (vc_middle, 0.32),
    "VC_up": (vc_up, 0.32),
    "F_PS": (f_ps, 4.0),
    "V_B_pillar": (v_b_pillar, 9.9),
    "V_door": (v_door, 15.69),
}


def _side_impact_state(key):
    response, limit = SIDE_IMPACT_RESPONSES[key]

    def g(d, x, p):
        return limit - response(x, p)

    g.__name__ = f"g_{key}"
    return g


def vehicle_side_impact(beta=None, pf=None):
    """Crashworthiness of a vehicle in side impact: 7 thicknesses, 4 noise factors."""
    pf = _resolve_pf(beta, pf, 3.0)
    xs = [
        Variable(f"x{j + 1}", lo, hi, N, std=s)
        for j, ((lo, hi), s) in enumerate(zip(SIDE_IMPACT_BOUNDS, SIDE_IMPACT_STD))
    ]
    params = [Parameter(f"p{j + 1}", Distribution.normal(m, s)) for j, (m, s) in enumerate(SIDE_IMPACT_PARAMS)]
    states = [LimitState(_side_impact_state(k), pf, k) for k in SIDE_IMPACT_RESPONSES]
    problem = ProblemDefinition("vehicle_side_impact", [], xs, params, side_impact_objective, states)
    return _check_counts(problem, 0, 7, 4, 10)


# ---------------------------------------------------------------------------
# two-variable mathematical problem
# ---------------------------------------------------------------------------

MATH_2D_VARIANTS = {
    "normal": (Family.NORMAL, Family.NORMAL),
    "gumbel": (Family.GUMBEL, Family.GUMBEL),
    "lognormal": (Family.LOGNORMAL, Family.NORMAL),
}


def math_g1(d, x, p):
    x1, x2 = x
    return x1**2 * x2 / 20.0 - 1.0


def math_g2(d, x, p):
    x1, x2 = x
    return (x1 + x2 - 5.0) ** 2 / 30.0 + (x1 - x2 - 12.0) ** 2 / 120.0 - 1.0


def math_g3(d, x, p):
    x1, x2 = x
    return 80.0 / (x1**2 + 8.0 * x2 + 5.0) - 1.0


def math_objective(d, x):
    x1, x2 = x
    return x1 + x2


def math_2d(pdf="normal", beta=None, pf=None, std=0.3):
    """``min x1 + x2`` under three nonlinear probabilistic constraints.

    ``pdf`` picks the marginals: ``normal`` (both normal), ``gumbel`` (both
    Gumbel) or ``lognormal`` (lognormal x1, normal x2).
    """
    try:
        fam1, fam2 = MATH_2D_VARIANTS[pdf]
    except KeyError:
        raise ValueError(f"unknown pdf variant {pdf!r}; choose from {sorted(MATH_2D_VARIANTS)}") from None
    pf = _resolve_pf(beta, pf, 3.0)
    xs = [Variable("x1", 0.1, 10.0, fam1, std=std), Variable("x2", 0.1, 10.0, fam2, std=std)]
    states = [LimitState(g, pf, f"g{i + 1}") for i, g in enumerate((math_g1, math_g2, math_g3))]
    problem = ProblemDefinition(f"math_2d[{pdf}]", [], xs, [], math_objective, states)
    return _check_counts(problem, 0, 2, 0, 3)


# ---------------------------------------------------------------------------
# speed reducer (varying-variance formulation)
# ---------------------------------------------------------------------------

SPEED_REDUCER_D = (("d1", 0.7, 0.8), ("d2", 17.0, 28.0))
SPEED_REDUCER_X = (
    ("x1", 2.6, 4.2, 0.05),
    ("x2", 7.0, 8.3, 0.05),
    ("x3", 7.0, 9.3, 0.05),
    ("x4", 2.9, 3.95, 0.02),
    ("x5", 5.0, 6.0, 0.02),
)
SPEED_REDUCER_P = (
    (27.0, 2.7),
    (397.5, 39.8),
    (1.93, 0.0965),
    (1.93, 0.0965),
    (1100.0, 110.0),
    (745.0, 74.5),
    (1.69e7, 1.69e6),
    (0.1, 0.005),
    (1.58e8, 1.58e7),
    (850.0, 34.0),
    (5.0, 0.25),
    (12.0, 0.6),
    (1.5, 0.75),
    (1.1, 0.11),
    (1.9, 0.19),
)


def speed_reducer_objective(d, x):
    d1, d2 = d
    x1, x2, x3, x4, x5 = x
    return (
        0.7854 * x1 * d1**2 * (3.3333 * d2**2 + 14.9334 * d2 - 43.0934)
        - 1.5079 * x1 * (x4**2 + x5**2)
        + 7.477 * (x4**3 + x5**3)
        + 0.7854 * (x2 * x4**2 + x3 * x5**2)
    )


def sr_g1(d, x, p):
    d1, d2 = d
    x1, *_ = x
    return 1.0 - p[0] / (x1 * d1**2 * d2)


def sr_g2(d, x, p):
    d1, d2 = d
    x1, *_ = x
    return 1.0 - p[1] / (x1 * d1**2 * d2**2)


def sr_g3(d, x, p):
    d1, d2 = d
    _, x2, _, x4, _ = x
    return 1.0 - p[2] * x2**3 / (x4**4 * d1 * d2)


def sr_g4(d, x, p):
    d1, d2 = d
    _, _, x3, _, x5 = x
    return 1.0 - p[3] * x3**3 / (x5**4 * d1 * d2)


def sr_g5(d, x, p):
    d1, d2 = d
    _, x2, _, x4, _ = x
    return 1.0 - 0.5 * np.sqrt((p[5] * x2 / (d1 * d2)) ** 2 + p[6]) / (x4**3 * p[4] * p[7])


def sr_g6(d, x, p):
    d1, d2 = d
    _, _, x3, _, x5 = x
    return 1.0 - 0.5 * np.sqrt((p[5] * x3 / (d1 * d2)) ** 2 + p[8]) / (x5**3 * p[9] * p[7])


def sr_g7(d, x, p):
    d1, _ = d
    x1, *_ = x
    return 1.0 - 0.5 * p[10] * d1 / x1


def sr_g8(d, x, p):
    d1, _ = d
    x1, *_ = x
    return 1.0 - x1 / (p[11] * d1)


def sr_g9(d, x, p):
    _, x2, _, x4, _ = x
    return 1.0 - (p[12] * x4 + p[14]) / (2.0 * x2)


def sr_g10(d, x, p):
    _, _, x3, _, x5 = x
    return 1.0 - (p[13] * x5 + p[14]) / (2.0 * x3)


def sr_g11(d, x, p):
    d1, d2 = d
    return 1.0 - d1 * d2 / 80.0


def _sr_h11(d, x, p):
    return -sr_g11(d, x, p)


SPEED_REDUCER_STATES = (sr_g1, sr_g2, sr_g3, sr_g4, sr_g5, sr_g6, sr_g7, sr_g8, sr_g9, sr_g10)


def speed_reducer(pf=None, beta=None):
    """Golinski speed reducer with two deterministic and five C.O.V.-scaled random variables."""
    if pf is None and beta is None:
        pf = 0.05
    pf = _resolve_pf(beta, pf, None)
    ds = [Variable(n, lo, hi) for n, lo, hi in SPEED_REDUCER_D]
    xs = [Variable(n, lo, hi, N, cov=c) for n, lo, hi, c in SPEED_REDUCER_X]
    params = [Parameter(f"p{j + 1}", Distribution.normal(m, s)) for j, (m, s) in enumerate(SPEED_REDUCER_P)]
    states = [LimitState(g, pf, f"g{i + 1}") for i, g in enumerate(SPEED_REDUCER_STATES)]
    problem = ProblemDefinition(
        "speed_reducer", ds, xs, params, speed_reducer_objective, states, [_sr_h11], ["g11"]
    )
    return _check_counts(problem, 2, 5, 15, 10, 1)


# ---------------------------------------------------------------------------
# welded beam
# ---------------------------------------------------------------------------

WELDED_BEAM_PRESETS = {
    # constants as printed in the parameter table
    "table11": {"length": 335.56, "c1": 6.74e-5, "c2": 2.94e-6},
    # 14 in beam and full-precision costs, which reproduce the continuous results
    "table12-compatible": {"length": 355.6, "c1": 1.10471 / 25.4**3, "c2": 0.04811 / 25.4**3},
}

WELDED_BEAM_PARAMS = (
    ("load", Family.LOGNORMAL, 26680.0, 0.10),
    ("length", Family.NORMAL, None, 0.05),
    ("young", Family.LOGNORMAL, 206850.0, 0.03),
    ("shear", Family.LOGNORMAL, 82740.0, 0.03),
    ("deflection", Family.NORMAL, 6.35, 0.05),
    ("tau_adm", Family.LOGNORMAL, 93.77, 0.07),
    ("sigma_adm", Family.LOGNORMAL, 206.85, 0.07),
)

WELDED_BEAM_BOUNDS = ((3.175, 50.8), (0.0, 254.0), (0.0, 254.0), (0.0, 50.8))
WELDED_BEAM_STD = (0.1693, 0.1693, 0.0107, 0.0107)
WELDED_BEAM_SETS = (
    tuple(range(3, 51)),
    tuple(range(1, 255)),
    tuple(range(1, 255)),
    (2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 15, 16, 18, 20, 22, 25),
)


def weld_shear_stress(x, p):
    x1, x2, x3, _ = x
    p1, p2, *_ = p
    t1 = p1 / (np.sqrt(2.0) * x1 * x2)
    m = p1 * (p2 + 0.5 * x2)
    r = 0.5 * np.sqrt(x2**2 + (x1 + x3) ** 2)
    j = np.sqrt(2.0) * x1 * x2 * (x2**2 / 12.0 + (x1 + x3) ** 2 / 4.0)
    t2 = m * r / j
    return np.sqrt(t1**2 + 2.0 * t1 * t2 * x2 / (2.0 * r) + t2**2)


def bar_bending_stress(x, p):
    _, _, x3, x4 = x
    p1, p2, *_ = p
    return 6.0 * p1 * p2 / (x3**2 * x4)


def bar_deflection(x, p):
    _, _, x3, x4 = x
    p1, p2, p3, *_ = p
    return 4.0 * p1 * p2**3 / (p3 * x3**3 * x4)


def buckling_load(x, p):
    _, _, x3, x4 = x
    _, p2, p3, p4, *_ = p
    return (
        4.013 * x3 * x4**3 * np.sqrt(p3 * p4) / (6.0 * p2**2)
        * (1.0 - x3 / (4.0 * p2) * np.sqrt(p3 / p4))
    )


def wb_g1(d, x, p):
    return 1.0 - weld_shear_stress(x, p) / p[5]


def wb_g2(d, x, p):
    return 1.0 - bar_bending_stress(x, p) / p[6]


def wb_g3(d, x, p):
    return 1.0 - x[0] / x[3]


def wb_g4(d, x, p):
    return 1.0 - bar_deflection(x, p) / p[4]


def wb_g5(d, x, p):
    return buckling_load(x, p) / p[0] - 1.0


WELDED_BEAM_STATES = (wb_g1, wb_g2, wb_g3, wb_g4, wb_g5)


def welded_beam(discrete=False, params_random=None, preset="table11", beta=3.0, length_random=False):
    """Welded beam cost minimisation.

    Continuous mode keeps the seven physical parameters at their means; the
    discrete mode snaps the design to commercial sizes and makes the
    parameters random.  ``params_random`` overrides that coupling.  The beam
    length stays at its nominal value unless ``length_random`` is set: the
    reference reliability indices of the discrete optimum are only reproduced
    with a fixed length.
    """
    try:
        consts = WELDED_BEAM_PRESETS[preset]
    except KeyError:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(WELDED_BEAM_PRESETS)}") from None
    if params_random is None:
        params_random = discrete
    c1, c2, length = consts["c1"], consts["c2"], consts["length"]

    params = []
    for name, fam, mean, cov in WELDED_BEAM_PARAMS:
        random = params_random and (name != "length" or length_random)
        mean = length if mean is None else mean
        dist = Distribution(fam, mean, cov * mean) if random else Distribution.deterministic(mean)
        params.append(Parameter(name, dist))

    xs = []
    for j, ((lo, hi), s) in enumerate(zip(WELDED_BEAM_BOUNDS, WELDED_BEAM_STD)):
        values = None
        if discrete:
            values = WELDED_BEAM_SETS[j]
            lo = min(lo, values[0])
        xs.append(Variable(f"x{j + 1}", lo, hi, N, std=s, values=values))

    def objective(d, x):
        x1, x2, x3, x4 = x
        return c1 * x1**2 * x2 + c2 * x3 * x4 * (length + x2)

    pf = _pf(beta)
    states = [LimitState(g, pf, f"g{i + 1}") for i, g in enumerate(WELDED_BEAM_STATES)]
    name = "welded_beam_discrete" if discrete else "welded_beam"
    problem = ProblemDefinition(f"{name}[{preset}]", [], xs, params, objective, states)
    return _check_counts(problem, 0, 4, 7, 5)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


def _welded_continuous(**kw):
    return welded_beam(discrete=False, **kw)


def _welded_discrete(**kw):
    return welded_beam(discrete=True, **kw)


BENCHMARKS = {
    "vehicle_side_impact": vehicle_side_impact,
    "math_2d": math_2d,
    "speed_reducer": speed_reducer,
    "welded_beam": _welded_continuous,
    "welded_beam_discrete": _welded_discrete,
}


def get_benchmark(name, **options):
    try:
        builder = BENCHMARKS[name]
    except KeyError:
        raise ValueError(f"unknown benchmark {name!r}; available: {', '.join(BENCHMARKS)}") from None
    return builder(**options)
