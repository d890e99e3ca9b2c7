"""Regenerate the 7/15-point Gauss-Kronrod constants in ``gk_constants.py`` with mpmath.

The Kronrod abscissae are the zeros of the Stieltjes polynomial E8, fixed by
orthogonality of P7 * E8 against x, x^3, x^5, x^7; the weights follow from
exactness on even monomials up to degree 22.
"""

from __future__ import annotations

DIGITS = 40


def generate(dps: int = 60) -> tuple[list[str], list[str], list[str]]:
    import mpmath as mp

    mp.mp.dps = dps
    p7 = mp.taylor(lambda x: mp.legendre(7, x), 0, 7)

    def moment(coeffs, k):
        # integral over [-1, 1] of x^k * sum(coeffs[j] x^j)
        total = mp.mpf(0)
        for j, c in enumerate(coeffs):
            if c and (j + k) % 2 == 0:
                total += c * 2 / (j + k + 1)
        return total

    # E8 = x^8 + c6 x^6 + c4 x^4 + c2 x^2 + c0
    rows, rhs = [], []
    for k in (1, 3, 5, 7):
        row = []
        for d in (6, 4, 2, 0):
            mono = [0] * (d + 1)
            mono[d] = 1
            row.append(moment(_mul(p7, mono), k))
        rows.append(row)
        mono = [0] * 9
        mono[8] = 1
        rhs.append(-moment(_mul(p7, mono), k))
    c6, c4, c2, c0 = mp.lu_solve(mp.matrix(rows), mp.matrix(rhs))
    # roots in y = x^2
    ys = mp.polyroots([1, c6, c4, c2, c0], maxsteps=200, extraprec=200)
    kron = sorted(mp.sqrt(mp.re(y)) for y in ys)
    gauss = sorted(x for x in mp.polyroots(list(reversed(p7)), maxsteps=200, extraprec=200) if mp.re(x) > 0)
    gauss = [mp.re(x) for x in gauss]
    nodes = sorted(kron + gauss, reverse=True) + [mp.mpf(0)]  # x1 > ... > x7, 0
    # Kronrod weights for nodes (symmetric): exactness on x^0, x^2, ..., x^14
    A = [[(2 if x else 1) * x ** (2 * m) if (x or m == 0) else 0 for x in nodes] for m in range(8)]
    b = [mp.mpf(2) / (2 * m + 1) for m in range(8)]
    wk = mp.lu_solve(mp.matrix(A), mp.matrix(b))
    gnodes = sorted(gauss, reverse=True) + [mp.mpf(0)]
    A = [[(2 if x else 1) * x ** (2 * m) if (x or m == 0) else 0 for x in gnodes] for m in range(4)]
    b = [mp.mpf(2) / (2 * m + 1) for m in range(4)]
    wg = mp.lu_solve(mp.matrix(A), mp.matrix(b))
    fmt = lambda v: mp.nstr(v, DIGITS, min_fixed=-1, max_fixed=1, strip_zeros=False)
    return [fmt(x) if x else "0" for x in nodes], [fmt(w) for w in wk], [fmt(w) for w in wg]


def _mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


if __name__ == "__main__":
    xk, wk, wg = generate()
    print("XGK =", xk)
    print("WGK =", wk)
    print("WG =", wg)
