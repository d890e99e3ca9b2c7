import math
from fractions import Fraction

import mpmath as mp
import pytest

from staircase.sc import _kernels_py, kernels
from staircase.sc.dd import DD, split
from staircase.sc.gk_constants import WG, WGK, XGK
from staircase.sc.gk_generate import generate

compiled = pytest.mark.skipif(kernels.BACKEND_NAME != "cython", reason="compiled kernels not built")

ARGS = (1e-11, 1e-13, 2000, 60)


def reference(eL, eR, A, B, S, dps=40, breaks=()):
    """mpmath value of the kernel integral with v = u^2 and 1 - v = u^2 on the two halves."""
    mp.mp.dps = dps
    A = [mp.mpf(a) for a in A]
    B = [mp.mpf(b) for b in B]

    def g(v, w):  # w = 1 - v, passed separately to keep it exact near 1
        val = v**eL * w**eR
        for a, b, sg in zip(A, B, S):
            val *= (a * w + b * v) ** (mp.mpf(sg) / 2)
        return val

    half = mp.sqrt(mp.mpf(1) / 2)
    left = mp.quad(lambda u: 2 * u * g(u * u, 1 - u * u), [0, *[mp.sqrt(x) for x in breaks], half])
    right = mp.quad(lambda u: 2 * u * g(1 - u * u, u * u), [0, *[mp.sqrt(x) for x in breaks], half])
    return left + right


def test_gk_constants_regenerate():
    xgk, wgk, wg = generate(dps=60)
    for frozen, fresh in ((XGK, xgk), (WGK, wgk), (WG, wg)):
        for a, b in zip(frozen, fresh):
            assert abs(mp.mpf(a) - mp.mpf(b)) < mp.mpf("1e-38")


def test_gk_constants_match_quadpack():
    # leading digits of the QUADPACK qk15 tables
    assert XGK[0].startswith("9.91455371120812639206854697526")
    assert WGK[7].startswith("2.09482141084727828012999174891")
    assert WG[3].startswith("4.17959183673469387755102040816")


@pytest.mark.parametrize("backend", [_kernels_py, kernels.backend])
@pytest.mark.parametrize("eL,eR,exact", [(-0.5, 0.0, 2.0), (0.5, 0.0, 2 / 3), (-0.5, -0.5, math.pi), (0.5, 0.5, math.pi / 8)])
def test_calibration(backend, eL, eR, exact):
    val, err, _, ok = backend.integrate(eL, eR, [], [], [], *ARGS)
    assert ok and abs(val - exact) <= 1e-12


@pytest.mark.parametrize("backend", [_kernels_py, kernels.backend])
def test_factor_with_nearby_root(backend):
    # root of (1 - v) + 1e-6 v just beyond v = 1
    A, B = [1.0], [1e-6]
    val, _, _, ok = backend.integrate(-0.5, -0.5, A, B, [-1], *ARGS)
    ref = reference(-0.5, -0.5, A, B, [-1], dps=30, breaks=(1e-6, 1e-4, 1e-2))
    assert ok and abs(val - float(ref)) <= 1e-10 * float(ref)


def test_backends_agree():
    A, B, S = [0.3, 1.2, 0.05], [0.9, 0.2, 0.5], [1, -1, -1]
    a = _kernels_py.integrate(0.5, -0.5, A, B, S, *ARGS)[0]
    b = kernels.integrate(0.5, -0.5, A, B, S, *ARGS)[0]
    assert abs(a - b) <= 1e-12 * abs(a)


def test_tolerance_failure_is_flagged():
    val, err, _, ok = _kernels_py.integrate(-0.5, -0.5, [1.0], [1e-14], [-1], 1e-15, 1e-30, 20, 60)
    assert not ok and math.isfinite(val) and err > 0


@compiled
def test_extended_calibration():
    (hi, lo), err, _, ok = kernels.integrate_dd(0.5, 0.0, [], [], [], [], [], 1e-28, 1e-30, 4000, 90)
    exact = Fraction(2, 3)
    assert ok and abs(DD(hi, lo).to_fraction() - exact) < Fraction(1, 10**29)


@compiled
def test_extended_against_mpmath():
    A, B, S = [0.3, 1.2], [0.9, 0.2], [1, -1]
    Ah, Al = zip(*(split(x) for x in A))
    Bh, Bl = zip(*(split(x) for x in B))
    (hi, lo), _, _, ok = kernels.integrate_dd(-0.5, 0.5, list(Ah), list(Al), list(Bh), list(Bl), S,
                                              1e-27, 1e-29, 4000, 90)
    ref = reference(-0.5, 0.5, A, B, S)
    got = mp.mpf(hi) + mp.mpf(lo)
    assert ok and abs(got - ref) < mp.mpf("1e-26") * ref


def test_extended_unavailable_in_fallback(monkeypatch):
    monkeypatch.setattr(kernels, "backend", _kernels_py)
    with pytest.raises(kernels.ExtendedPrecisionUnavailable):
        kernels.integrate_dd(0.5, 0.0, [], [], [], [], [], 1e-28, 1e-30, 4000, 90)


def test_dd_arithmetic():
    third = DD.of(1) / 3
    assert abs((third * 3 - 1).to_fraction()) < Fraction(1, 10**31)
    r = DD.of(2).sqrt()
    assert abs((r * r - 2).to_fraction()) < Fraction(1, 10**30)
    assert DD.of("0.1").to_fraction() - Fraction(1, 10) < Fraction(1, 10**32)
    assert float(DD.of(1.5) - 0.5) == 1.0
    assert DD.of(1) < DD.of(1) + 1e-30
