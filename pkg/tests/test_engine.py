import json
import math
from pathlib import Path

import numpy as np
import pytest

from staircase.sc import kernels
from staircase.sc.engine import (
    AccessoryConfig,
    InfeasibleTarget,
    InvalidConfig,
    QuadratureSettings,
    SideLengths,
    check_phase,
    constants_PQ,
    forward,
    side_integrals,
    solve_accessory,
)

GOLDEN = json.loads((Path(__file__).parent / "oracles" / "golden_sc.json").read_text())
compiled = pytest.mark.skipif(not kernels.has_extended(), reason="compiled kernels not built")


@pytest.mark.parametrize("case", sorted(GOLDEN))
def test_integrals_match_oracle(case):
    g = GOLDEN[case]
    b = side_integrals(AccessoryConfig(*g["config"]))
    for key, ref in g["integrals"].items():
        got = float(getattr(b, key))
        # QUADPACK in double is good to ~1e-10 on the narrow intervals
        assert abs(got - ref) <= 1e-9 * abs(ref) + 1e-13, key


@pytest.mark.parametrize("case", sorted(GOLDEN))
def test_lengths_match_oracle(case):
    g = GOLDEN[case]
    L = forward(AccessoryConfig(*g["config"]))
    for key, ref in g["lengths"].items():
        assert abs(float(getattr(L, key)) - ref) <= 1e-9 * abs(ref) + 1e-13, key


def _mp_integral(pts, lo, hi):
    """Integral of prod |x - z|^e over (lo, hi) with the endpoint distance kept exact as u^2."""
    import mpmath as mp

    def g(x, end, dist):
        v = dist ** dict(pts).get(end, 0)
        for z, e in pts:
            if z != end:
                v *= abs(x - z) ** e
        return v

    if hi == mp.inf or lo == -mp.inf:
        end, sign = (lo, 1) if hi == mp.inf else (hi, -1)
        # x = end + sign (1 - w) / w; near w = 0 the integrand behaves like w^-1/2
        def h(w):
            return g(end + sign * (1 - w) / w, end, (1 - w) / w) / w**2

        # tanh-sinh copes with the remaining (1 - u)^-1/2 at the finite end
        return mp.quad(lambda u: 2 * u * h(u * u), [0, 1])
    m = (lo + hi) / 2
    left = mp.quad(lambda u: 2 * u * g(lo + u * u, lo, u * u), [0, mp.sqrt(m - lo)])
    right = mp.quad(lambda u: 2 * u * g(hi - u * u, hi, u * u), [0, mp.sqrt(hi - m)])
    return left + right


def test_integrals_match_mpmath():
    import mpmath as mp

    mp.mp.dps = 30
    x1, x2, x3, s, t = (mp.mpf(v) for v in (-0.5, 0.0, 0.5, 1e-3, 1e-3))
    e1, e2 = x1 - s, x2 - t
    pts = [(-1, -0.5), (1, -0.5), (x1, -0.5), (x2, -0.5), (x3, -0.5), (e1, 0.5), (e2, 0.5)]
    intervals = {"A": (-mp.inf, -1), "H": (-1, e1), "B": (e1, x1), "Q": (x1, e2), "C": (e2, x2), "P": (x2, x3),
                 "V": (x3, 1), "Jinv": (1, mp.inf)}
    b = side_integrals(AccessoryConfig(-0.5, 0.0, 0.5, 1e-3, 1e-3))
    for key, (lo, hi) in intervals.items():
        ref = _mp_integral(pts, mp.mpf(lo), mp.mpf(hi))
        assert abs(float(getattr(b, key)) - ref) <= 1e-12 * ref, key


def test_degenerate_widths_are_exact_zero():
    L = forward(AccessoryConfig(-0.5, 0.0, 0.5, 0.0, 0.0))
    assert L.b == 0.0 and L.c == 0.0 and L.p + L.q < 1
    L = forward(AccessoryConfig(-0.5, 0.0, 0.5, 0.0, 1e-3))
    assert L.b == 0.0 and L.c > 0
    L = forward(AccessoryConfig(-0.5, 0.0, 0.5, 1e-3, 0.0))
    assert L.c == 0.0 and L.b > 0


def test_closures():
    for s, t in [(0.0, 0.0), (1e-2, 3e-2), (1e-9, 1e-9)]:
        L = forward(AccessoryConfig(-0.4, 0.1, 0.6, s, t))
        assert abs(L.closure_vertical) < 1e-10 and abs(L.closure_horizontal) < 1e-10


def test_tiny_s_keeps_relative_accuracy():
    small = side_integrals(AccessoryConfig(-0.5, 0.0, 0.5, 1e-9, 0.0))
    K_B = math.pi / (2 * math.sqrt(1.5 * 0.5 * 1.0))
    assert abs(float(small.B) / 1e-9 - K_B) / K_B < 1e-6
    assert small.errors["B"] < 1e-11 * float(small.B)


def test_phase_is_constant_power_of_i():
    powers = check_phase(AccessoryConfig(-0.5, 0.0, 0.5, 0.1, 0.1))
    assert set(powers) == {"A", "H", "B", "Q", "C", "P", "V", "Jinv"}


def test_invalid_configs():
    with pytest.raises(InvalidConfig):
        forward(AccessoryConfig(0.5, 0.0, 0.7))
    with pytest.raises(InvalidConfig):
        forward(AccessoryConfig(-0.5, 0.0, 0.5, 0.6, 0.0))
    with pytest.raises(InvalidConfig):
        forward(AccessoryConfig(-0.5, 0.0, 0.5, -1e-3, 0.0))


def test_refinement_moves_values_within_error():
    cfg = AccessoryConfig(-0.5, 0.0, 0.5, 1e-3, 2e-3)
    coarse = side_integrals(cfg, QuadratureSettings(rel=1e-8, abs=1e-10))
    fine = side_integrals(cfg, QuadratureSettings(rel=5e-9, abs=5e-11))
    for key in ("A", "B", "C", "P", "Q", "Jinv"):
        assert abs(float(getattr(coarse, key)) - float(getattr(fine, key))) <= coarse.errors[key] + 1e-15


def test_determinism():
    cfg = AccessoryConfig(-0.3, 0.2, 0.6, 1e-4, 1e-5)
    assert forward(cfg).values() == forward(cfg).values()


def test_round_trip():
    cfg = AccessoryConfig(-0.5, 0.0, 0.5, 1e-2, 1e-2)
    res = solve_accessory(forward(cfg))
    got = res.config
    for k in ("xi1", "xi2", "xi3", "s", "t"):
        assert abs(float(getattr(got, k)) - float(getattr(cfg, k))) < 1e-6
    # accepted Newton steps decrease the residual
    assert all(b < a for a, b in zip(res.history, res.history[1:]))


def test_reduced_problem_reproduces_base():
    base = AccessoryConfig(-0.35, 0.15, 0.55)
    L = forward(base)
    res = solve_accessory(SideLengths(L.a, 0.0, 0.0, L.p, L.q))
    assert res.config.s == 0.0 and res.config.t == 0.0
    for k in ("xi1", "xi2", "xi3"):
        assert abs(float(getattr(res.config, k)) - float(getattr(base, k))) < 1e-7


@pytest.mark.parametrize("target", [(1, 0, 0, 0.9, 0.2), (1, 0, 0, 0.0, 0.2), (-1, 0, 0, 0.3, 0.2), (1, -0.1, 0, 0.3, 0.2)])
def test_infeasible_targets(target):
    with pytest.raises(InfeasibleTarget):
        solve_accessory(SideLengths(*target))


def test_constants_pq():
    base = AccessoryConfig(-0.5, 0.0, 0.5)
    P, Q = constants_PQ(base)
    J = 1 / float(side_integrals(base).Jinv)
    assert P > 0 and Q > 0
    assert abs(P - J / (2 * math.sqrt(1 * 1 * 0.5))) < 1e-14
    assert abs(Q - J / (2 * math.sqrt(1.5 * 0.5 * 1.0))) < 1e-14
    with pytest.raises(InvalidConfig):
        constants_PQ(AccessoryConfig(-0.5, 0.0, 0.5, 1e-3, 0.0))


@pytest.mark.parametrize("xi", [0.2, 0.5, 0.8])
def test_constants_pq_symmetric_ratio(xi):
    P, Q = constants_PQ(AccessoryConfig(-xi, 0.0, xi))
    # closed forms evaluated independently: (1-0)(1+0)(xi-0) against (1+xi)(1-xi)(2 xi)
    assert abs(Q / P - math.sqrt(xi / ((1 - xi * xi) * 2 * xi))) < 1e-13


def test_constants_pq_stable_under_tightening():
    base = AccessoryConfig(-0.5, 0.0, 0.5)
    P1, Q1 = constants_PQ(base, QuadratureSettings(rel=1e-9, abs=1e-11))
    P2, Q2 = constants_PQ(base)
    assert abs(P1 - P2) < 1e-9 * P1 and abs(Q1 - Q2) < 1e-9 * Q1


@compiled
def test_extended_agrees_with_standard():
    cfg = AccessoryConfig(-0.5, 0.0, 0.5, 1e-3, 1e-3)
    std = forward(cfg)
    ext = forward(cfg, QuadratureSettings.extended())
    for a, b in zip(std.values(), ext.values()):
        assert abs(a - float(b)) < 1e-12
    assert abs(ext.closure_vertical) < 1e-24 and abs(ext.closure_horizontal) < 1e-24


@compiled
def test_extended_solve():
    target = SideLengths(0.8, 0.0, 0.0, 0.3, 0.3)
    res = solve_accessory(target, QuadratureSettings.extended(), tol=1e-24)
    assert res.residual < 1e-24


def test_random_round_trips_small():
    rng = np.random.default_rng(3)
    for _ in range(3):
        xi = np.sort(rng.uniform(-0.8, 0.8, 3))
        cfg = AccessoryConfig(*xi, *rng.uniform(1e-3, 3e-2, 2))
        res = solve_accessory(forward(cfg))
        assert abs(float(res.config.xi2) - xi[1]) < 1e-6
