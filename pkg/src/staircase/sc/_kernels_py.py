"""Pure-Python (numpy) quadrature kernel; same contract as the compiled ``_ckernels``.

The integral computed is

    I = int_0^1 v^eL (1-v)^eR prod_k (A_k (1-v) + B_k v)^(s_k / 2) dv

with endpoint exponents ``eL, eR`` in {-1/2, 0, 1/2}, non-negative factor
weights ``A_k, B_k`` and signs ``s_k`` in {+1, -1}.  The interval is split at
v = 1/2 and each half is mapped by v = u^2 (left) or 1 - v = u^2 (right), which
removes the endpoint singularities; the halves are then integrated by global
adaptive Gauss-Kronrod (7/15) bisection.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from staircase.sc.gk_constants import WG, WGK, XGK, as_double

_XGK = np.array(as_double(XGK))
_WGK = np.array(as_double(WGK))
_WG = np.array(as_double(WG))
# full 15-point abscissae on [-1, 1]: -x1..-x7, 0, x7..x1
_X15 = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
_W15 = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
# Gauss 7-point weights placed on the 15-point grid
_G15 = np.zeros(15)
for _k, _w in zip((1, 3, 5), _WG[:3]):
    _G15[_k] = _w
    _G15[14 - _k] = _w
_G15[7] = _WG[3]

EPS = np.finfo(float).eps
UHALF = math.sqrt(0.5)

has_extended = False


class _Problem:
    def __init__(self, eL, eR, A, B, sgn):
        self.eL = float(eL)
        self.eR = float(eR)
        self.A = np.asarray(A, dtype=float)
        self.B = np.asarray(B, dtype=float)
        sgn = np.asarray(sgn)
        self.num = sgn > 0
        self.den = ~self.num

    def f(self, u: np.ndarray, right: bool) -> np.ndarray:
        u2 = u * u
        if right:
            vc, v = u2, 1.0 - u2
            e_near, e_far, far = self.eR, self.eL, v
        else:
            v, vc = u2, 1.0 - u2
            e_near, e_far, far = self.eL, self.eR, vc
        fac = self.A[:, None] * vc[None, :] + self.B[:, None] * v[None, :]
        num = np.prod(fac[self.num], axis=0) if self.num.any() else np.ones_like(u)
        den = np.prod(fac[self.den], axis=0) if self.den.any() else np.ones_like(u)
        if e_far > 0:
            num = num * far
        elif e_far < 0:
            den = den * far
        if e_near > 0:
            pre = 2.0 * u2
        elif e_near < 0:
            pre = 2.0
        else:
            pre = 2.0 * u
        return pre * np.sqrt(num / den)

    def breaks(self) -> tuple[list[float], list[float]]:
        left, right = [], []
        for a, b in zip(self.A, self.B):
            if a < b:
                d = a / (b - a)
                target = left
            elif a > b:
                d = b / (a - b)
                target = right
            else:
                continue
            for scale in (1.0, 8.0):
                u = scale * math.sqrt(d)
                if 1e-300 < u < 0.9 * UHALF:
                    target.append(u)
        return sorted(set(left)), sorted(set(right))


def _gk15(prob: _Problem, a: float, b: float, right: bool):
    c = 0.5 * (a + b)
    hl = 0.5 * (b - a)
    fv = prob.f(c + hl * _X15, right)
    resk = float(np.dot(_W15, fv))
    resg = float(np.dot(_G15, fv))
    resabs = float(np.dot(_W15, np.abs(fv)))
    reskh = 0.5 * resk
    resasc = float(np.dot(_W15, np.abs(fv - reskh)))
    result = resk * hl
    resabs *= abs(hl)
    resasc *= abs(hl)
    err = abs((resk - resg) * hl)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > 2.2250738585072014e-308 / (50.0 * EPS):
        err = max(50.0 * EPS * resabs, err)
    return result, err


def integrate(eL, eR, A, B, sgn, rel=1e-11, abs_tol=1e-13, max_intervals=2000, max_depth=60):
    """Return ``(value, error_estimate, n_evaluations, converged)``."""
    prob = _Problem(eL, eR, A, B, sgn)
    lb, rb = prob.breaks()
    heap = []
    total = 0.0
    total_err = 0.0
    nevals = 0
    seq = 0
    for right, br in ((False, lb), (True, rb)):
        pts = [0.0] + br + [UHALF]
        for a, b in zip(pts, pts[1:]):
            r, e = _gk15(prob, a, b, right)
            nevals += 15
            total += r
            total_err += e
            heapq.heappush(heap, (-e, seq, a, b, right, r, 0))
            seq += 1
    ok = True
    while total_err > max(abs_tol, rel * abs(total)):
        if len(heap) >= max_intervals:
            ok = False
            break
        negerr, _, a, b, right, r, depth = heapq.heappop(heap)
        if depth >= max_depth:
            heapq.heappush(heap, (negerr, seq, a, b, right, r, depth))
            ok = False
            break
        m = 0.5 * (a + b)
        r1, e1 = _gk15(prob, a, m, right)
        r2, e2 = _gk15(prob, m, b, right)
        nevals += 30
        total += r1 + r2 - r
        total_err += e1 + e2 + negerr
        for aa, bb, rr, ee in ((a, m, r1, e1), (m, b, r2, e2)):
            heapq.heappush(heap, (-ee, seq, aa, bb, right, rr, depth + 1))
            seq += 1
    # resum to avoid drift from the running updates
    total = math.fsum(item[5] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    return total, total_err, nevals, ok


def integrate_dd(*args, **kwargs):
    raise RuntimeError("extended precision requires the compiled kernels")
