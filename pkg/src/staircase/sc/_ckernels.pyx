# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled quadrature kernels (double and double-double).

Same integral and algorithm as ``_kernels_py``; see that module for the
formulation.  The double-double path keeps every node, integrand value and
partial sum as an unevaluated pair ``hi + lo`` (Dekker/Knuth error-free
transformations, no FMA), giving roughly 32 significant digits.
"""

from libc.math cimport sqrt, fabs, pow
from libc.stdlib cimport malloc, free

from staircase.sc.gk_constants import WG, WGK, XGK, as_double, as_double_double

has_extended = True

cdef double EPS = 2.220446049250313e-16
cdef double EPS_DD = 4.930380657631324e-32
cdef double UFLOW = 2.2250738585072014e-308
cdef double UHALF = 0.7071067811865476
cdef int MAXF = 16

ctypedef struct dd:
    double hi
    double lo

cdef double X15[15]
cdef double W15[15]
cdef double G15[15]
cdef dd X15D[15]
cdef dd W15D[15]
cdef dd G15D[15]


def _init_nodes():
    xs = as_double(XGK)
    wk = as_double(WGK)
    wg = as_double(WG)
    xsd = as_double_double(XGK)
    wkd = as_double_double(WGK)
    wgd = as_double_double(WG)
    cdef int i
    for i in range(15):
        G15[i] = 0.0
        G15D[i].hi = 0.0
        G15D[i].lo = 0.0
    for i in range(7):
        X15[i] = -xs[i]
        X15[14 - i] = xs[i]
        W15[i] = wk[i]
        W15[14 - i] = wk[i]
        X15D[i].hi = -xsd[i][0]
        X15D[i].lo = -xsd[i][1]
        X15D[14 - i].hi = xsd[i][0]
        X15D[14 - i].lo = xsd[i][1]
        W15D[i].hi = wkd[i][0]
        W15D[i].lo = wkd[i][1]
        W15D[14 - i] = W15D[i]
    X15[7] = 0.0
    W15[7] = wk[7]
    X15D[7].hi = 0.0
    X15D[7].lo = 0.0
    W15D[7].hi = wkd[7][0]
    W15D[7].lo = wkd[7][1]
    for i, k in enumerate((1, 3, 5)):
        G15[k] = wg[i]
        G15[14 - k] = wg[i]
        G15D[k].hi = wgd[i][0]
        G15D[k].lo = wgd[i][1]
        G15D[14 - k] = G15D[k]
    G15[7] = wg[3]
    G15D[7].hi = wgd[3][0]
    G15D[7].lo = wgd[3][1]


_init_nodes()


# ---------------------------------------------------------------------------
# double-double primitives

cdef inline dd two_sum(double a, double b) nogil:
    cdef dd r
    cdef double bb
    r.hi = a + b
    bb = r.hi - a
    r.lo = (a - (r.hi - bb)) + (b - bb)
    return r

cdef inline dd quick_two_sum(double a, double b) nogil:
    cdef dd r
    r.hi = a + b
    r.lo = b - (r.hi - a)
    return r

cdef inline void split(double a, double *hi, double *lo) nogil:
    cdef double t = 134217729.0 * a
    hi[0] = t - (t - a)
    lo[0] = a - hi[0]

cdef inline dd two_prod(double a, double b) nogil:
    cdef dd r
    cdef double ah, al, bh, bl
    r.hi = a * b
    split(a, &ah, &al)
    split(b, &bh, &bl)
    r.lo = ((ah * bh - r.hi) + ah * bl + al * bh) + al * bl
    return r

cdef inline dd dd_make(double hi, double lo) nogil:
    cdef dd r
    r.hi = hi
    r.lo = lo
    return r

cdef inline dd dd_add(dd x, dd y) nogil:
    cdef dd s = two_sum(x.hi, y.hi)
    cdef dd t = two_sum(x.lo, y.lo)
    s.lo += t.hi
    s = quick_two_sum(s.hi, s.lo)
    s.lo += t.lo
    return quick_two_sum(s.hi, s.lo)

cdef inline dd dd_neg(dd x) nogil:
    return dd_make(-x.hi, -x.lo)

cdef inline dd dd_sub(dd x, dd y) nogil:
    return dd_add(x, dd_neg(y))

cdef inline dd dd_mul(dd x, dd y) nogil:
    cdef dd p = two_prod(x.hi, y.hi)
    p.lo += x.hi * y.lo + x.lo * y.hi
    return quick_two_sum(p.hi, p.lo)

cdef inline dd dd_mul_d(dd x, double d) nogil:
    cdef dd p = two_prod(x.hi, d)
    p.lo += x.lo * d
    return quick_two_sum(p.hi, p.lo)

cdef inline dd dd_div(dd x, dd y) nogil:
    cdef double q1, q2, q3
    cdef dd r
    q1 = x.hi / y.hi
    r = dd_sub(x, dd_mul_d(y, q1))
    q2 = r.hi / y.hi
    r = dd_sub(r, dd_mul_d(y, q2))
    q3 = r.hi / y.hi
    r = quick_two_sum(q1, q2)
    return dd_add(r, dd_make(q3, 0.0))

cdef inline dd dd_sqrt(dd x) nogil:
    cdef double s
    cdef dd r
    if x.hi <= 0.0:
        return dd_make(0.0, 0.0)
    s = sqrt(x.hi)
    r = dd_sub(x, two_prod(s, s))
    return quick_two_sum(s, r.hi / (2.0 * s))


# ---------------------------------------------------------------------------
# problem description

cdef struct problem:
    double eL
    double eR
    int n
    double A[16]
    double B[16]
    double Alo[16]
    double Blo[16]
    int sgn[16]


cdef inline double f_double(problem *p, double u, int right) nogil:
    cdef double u2 = u * u
    cdef double v, vc, num = 1.0, den = 1.0, fac, e_near, e_far, far, pre
    cdef int k
    if right:
        vc = u2
        v = 1.0 - u2
        e_near = p.eR
        e_far = p.eL
        far = v
    else:
        v = u2
        vc = 1.0 - u2
        e_near = p.eL
        e_far = p.eR
        far = vc
    for k in range(p.n):
        fac = p.A[k] * vc + p.B[k] * v
        if p.sgn[k] > 0:
            num *= fac
        else:
            den *= fac
    if e_far > 0:
        num *= far
    elif e_far < 0:
        den *= far
    if e_near > 0:
        pre = 2.0 * u2
    elif e_near < 0:
        pre = 2.0
    else:
        pre = 2.0 * u
    return pre * sqrt(num / den)


cdef inline dd f_dd(problem *p, dd u, int right) nogil:
    cdef dd u2 = dd_mul(u, u)
    cdef dd v, vc, num, den, fac, far, pre
    cdef double e_near, e_far
    cdef int k
    num = dd_make(1.0, 0.0)
    den = dd_make(1.0, 0.0)
    if right:
        vc = u2
        v = dd_sub(dd_make(1.0, 0.0), u2)
        e_near = p.eR
        e_far = p.eL
        far = v
    else:
        v = u2
        vc = dd_sub(dd_make(1.0, 0.0), u2)
        e_near = p.eL
        e_far = p.eR
        far = vc
    for k in range(p.n):
        fac = dd_add(dd_mul(dd_make(p.A[k], p.Alo[k]), vc), dd_mul(dd_make(p.B[k], p.Blo[k]), v))
        if p.sgn[k] > 0:
            num = dd_mul(num, fac)
        else:
            den = dd_mul(den, fac)
    if e_far > 0:
        num = dd_mul(num, far)
    elif e_far < 0:
        den = dd_mul(den, far)
    if e_near > 0:
        pre = dd_mul_d(u2, 2.0)
    elif e_near < 0:
        pre = dd_make(2.0, 0.0)
    else:
        pre = dd_mul_d(u, 2.0)
    return dd_mul(pre, dd_sqrt(dd_div(num, den)))


cdef void gk15_double(problem *p, double a, double b, int right, double *result, double *err) nogil:
    cdef double c = 0.5 * (a + b), hl = 0.5 * (b - a)
    cdef double fv[15]
    cdef double resk = 0.0, resg = 0.0, resabs = 0.0, resasc = 0.0, reskh, e
    cdef int i
    for i in range(15):
        fv[i] = f_double(p, c + hl * X15[i], right)
        resk += W15[i] * fv[i]
        resg += G15[i] * fv[i]
        resabs += W15[i] * fabs(fv[i])
    reskh = 0.5 * resk
    for i in range(15):
        resasc += W15[i] * fabs(fv[i] - reskh)
    result[0] = resk * hl
    resabs *= fabs(hl)
    resasc *= fabs(hl)
    e = fabs((resk - resg) * hl)
    if resasc != 0.0 and e != 0.0:
        e = resasc * min(1.0, pow(200.0 * e / resasc, 1.5))
    if resabs > UFLOW / (50.0 * EPS):
        e = max(50.0 * EPS * resabs, e)
    err[0] = e


cdef void gk15_dd(problem *p, dd a, dd b, int right, dd *result, double *err) nogil:
    cdef dd c = dd_mul_d(dd_add(a, b), 0.5)
    cdef dd hl = dd_mul_d(dd_sub(b, a), 0.5)
    cdef dd fv[15]
    cdef dd resk = dd_make(0.0, 0.0), resg = dd_make(0.0, 0.0)
    cdef double resabs = 0.0, resasc = 0.0, reskh, e
    cdef int i
    for i in range(15):
        fv[i] = f_dd(p, dd_add(c, dd_mul(hl, X15D[i])), right)
        resk = dd_add(resk, dd_mul(W15D[i], fv[i]))
        resg = dd_add(resg, dd_mul(G15D[i], fv[i]))
        resabs += W15[i] * fabs(fv[i].hi)
    reskh = 0.5 * resk.hi
    for i in range(15):
        resasc += W15[i] * fabs(fv[i].hi - reskh)
    result[0] = dd_mul(resk, hl)
    resabs *= fabs(hl.hi)
    resasc *= fabs(hl.hi)
    e = fabs(dd_mul(dd_sub(resk, resg), hl).hi)
    if resasc != 0.0 and e != 0.0:
        e = resasc * min(1.0, pow(200.0 * e / resasc, 1.5))
    if resabs > UFLOW / (50.0 * EPS_DD):
        e = max(50.0 * EPS_DD * resabs, e)
    err[0] = e


cdef int _fill(problem *p, double eL, double eR, A, B, sgn, Alo, Blo) except -1:
    cdef int n = len(A), k
    if n > MAXF:
        raise ValueError("too many factors")
    p.eL = eL
    p.eR = eR
    p.n = n
    for k in range(n):
        p.A[k] = A[k]
        p.B[k] = B[k]
        p.Alo[k] = Alo[k] if Alo is not None else 0.0
        p.Blo[k] = Blo[k] if Blo is not None else 0.0
        p.sgn[k] = 1 if sgn[k] > 0 else -1
    return 0


def _breaks(A, B):
    left, right = [], []
    for a, b in zip(A, B):
        if a < b:
            d = a / (b - a)
            target = left
        elif a > b:
            d = b / (a - b)
            target = right
        else:
            continue
        for scale in (1.0, 8.0):
            u = scale * sqrt(d)
            if 1e-300 < u < 0.9 * UHALF:
                target.append(u)
    return sorted(set(left)), sorted(set(right))


cdef struct interval:
    dd a
    dd b
    int right
    int depth
    double err
    double r_hi
    double r_lo


cdef void _eval(problem *p, interval *it, bint extended) nogil:
    cdef double r, e
    cdef dd rd
    if extended:
        gk15_dd(p, it.a, it.b, it.right, &rd, &e)
        it.r_hi = rd.hi
        it.r_lo = rd.lo
    else:
        gk15_double(p, it.a.hi, it.b.hi, it.right, &r, &e)
        it.r_hi = r
        it.r_lo = 0.0
    it.err = e


cdef object _run(problem *p, A, B, double rel, double abs_tol, int max_intervals, int max_depth, bint extended):
    lb, rb = _breaks(A, B)
    cdef interval *iv = <interval *> malloc(max_intervals * sizeof(interval))
    if iv == NULL:
        raise MemoryError()
    cdef int n = 0, nevals = 0, i, k, worst
    cdef double total_err, total
    cdef dd tot, u_end
    cdef bint ok = True
    # the halves meet at v = UHALF**2 on the left and 1 - v = 1 - UHALF**2 on the right
    cdef dd v_split = two_prod(UHALF, UHALF)
    cdef dd u_right = dd_sqrt(dd_sub(dd_make(1.0, 0.0), v_split))
    try:
        for right, br in ((0, lb), (1, rb)):
            u_end = u_right if right else dd_make(UHALF, 0.0)
            pts = [0.0] + br
            for k in range(len(pts)):
                iv[n].a = dd_make(pts[k], 0.0)
                iv[n].b = dd_make(pts[k + 1], 0.0) if k + 1 < len(pts) else u_end
                iv[n].right = right
                iv[n].depth = 0
                _eval(p, &iv[n], extended)
                nevals += 15
                n += 1
        while True:
            tot = dd_make(0.0, 0.0)
            total_err = 0.0
            worst = 0
            for i in range(n):
                tot = dd_add(tot, dd_make(iv[i].r_hi, iv[i].r_lo))
                total_err += iv[i].err
                if iv[i].err > iv[worst].err:
                    worst = i
            total = tot.hi
            if total_err <= max(abs_tol, rel * fabs(total)):
                break
            if n >= max_intervals or iv[worst].depth >= max_depth:
                ok = False
                break
            iv[n] = iv[worst]
            iv[worst].b = dd_mul_d(dd_add(iv[worst].a, iv[worst].b), 0.5)
            iv[n].a = iv[worst].b
            iv[worst].depth += 1
            iv[n].depth += 1
            _eval(p, &iv[worst], extended)
            _eval(p, &iv[n], extended)
            nevals += 30
            n += 1
        return tot.hi, tot.lo, total_err, nevals, ok
    finally:
        free(iv)


def integrate(double eL, double eR, A, B, sgn, double rel=1e-11, double abs_tol=1e-13,
              int max_intervals=2000, int max_depth=60):
    """Return ``(value, error_estimate, n_evaluations, converged)``."""
    cdef problem p
    _fill(&p, eL, eR, A, B, sgn, None, None)
    hi, lo, err, nevals, ok = _run(&p, A, B, rel, abs_tol, max_intervals, max_depth, False)
    return hi, err, nevals, ok


def integrate_dd(double eL, double eR, A, Alo, B, Blo, sgn, double rel=1e-25, double abs_tol=1e-27,
                 int max_intervals=4000, int max_depth=90):
    """Double-double version; returns ``((hi, lo), error_estimate, n_evaluations, converged)``."""
    cdef problem p
    _fill(&p, eL, eR, A, B, sgn, Alo, Blo)
    hi, lo, err, nevals, ok = _run(&p, A, B, rel, abs_tol, max_intervals, max_depth, True)
    return (hi, lo), err, nevals, ok
