"""Area function along the rectangle family R(x, y) and its second differences.

For a base rectangle (a0, p0, q0) the family member R(x, y) is the staircase
of dimensions (a0, 0, 0, p0 - x, q0 - y).  Keeping its prevertices xi fixed
and opening s, t > 0 until the widths return to (p0, q0) gives a staircase
whose area

    F(x, y) = a(s, t) + b(s, t) (p0 + q0) + c(s, t) p0

would be smooth if a holomorphic retraction existed.  :func:`nonsmooth_scan`
samples F along the x axis and tabulates ``D(h) = F(2h, 0) - 2 F(h, 0) + F(0, 0)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from staircase.asymptotics import FitError, fit_model
from staircase.sc.dd import DD
from staircase.sc.engine import (
    AccessoryConfig,
    InvalidConfig,
    NoConvergence,
    QuadratureSettings,
    SCError,
    SideLengths,
    alpha_coefficients,
    forward,
    side_integrals,
    solve_accessory,
)

# probe defaults: tighter than the engine's so that F is good to ~1e-12 in standard precision
PROBE_STANDARD = QuadratureSettings(rel=1e-13, abs=1e-15)
PROBE_EXTENDED = QuadratureSettings.extended()


class ProbeError(SCError):
    pass


class OutOfRange(ProbeError):
    pass


class PrecisionInsufficient(ProbeError):
    pass


def default_tol(settings: QuadratureSettings) -> float:
    return 10 * settings.rel


def family_target(a0, p0, q0, x, y) -> SideLengths:
    """``R(x, y)``: the rectangle ``(a0, 0, 0, p0 - x, q0 - y)``."""
    p, q = p0 - x, q0 - y
    if x < 0 or y < 0 or a0 <= 0:
        raise OutOfRange(f"need a0 > 0 and x, y >= 0; got a0={a0!r}, x={x!r}, y={y!r}")
    if p <= 0 or q <= 0 or p + q >= 1:
        raise OutOfRange(f"(p0 - x, q0 - y) = ({p!r}, {q!r}) leaves the rectangle family")
    return SideLengths(a0, 0.0, 0.0, p, q)


def _num(x, settings):
    return DD.of(x) if settings.is_extended else float(x)


def solve_base(a0, p0, q0, x, y, settings: QuadratureSettings = PROBE_STANDARD, guess=None, tol=None):
    target = family_target(*(_num(v, settings) for v in (a0, p0, q0, x, y)))
    tol = default_tol(settings) if tol is None else tol
    res = solve_accessory(target, settings, tol=tol, guess=guess)
    return res


def leading_guess(base_rect: AccessoryConfig, x: float, y: float, settings=PROBE_STANDARD) -> tuple[float, float]:
    """Leading-order inversion ``s = (x+y)/(Q ln(1/(x+y)))``, ``t = x/(P ln(1/x))``."""
    alpha, alpha_p = (float(v) for v in alpha_coefficients(base_rect))
    J0 = 1 / float(side_integrals(base_rect.with_precision(False), settings.standard_counterpart(), phase_check=False).Jinv)
    P, Q = J0 * alpha, J0 * alpha_p
    s0 = (x + y) / (Q * math.log(1 / (x + y))) if x + y > 0 else 0.0
    t0 = x / (P * math.log(1 / x)) if x > 0 else 0.0
    return s0, t0


@dataclass(frozen=True)
class Located:
    s: object
    t: object
    residual: float
    iterations: int
    guess: tuple
    lengths: SideLengths | None = None


def _with_st(base: AccessoryConfig, s, t) -> AccessoryConfig:
    g0, _, g2, _, g4, g5 = base.gaps()
    return AccessoryConfig.from_gaps(g0 - s, s, g2 - t, t, g4, g5)


def locate_st(base_rect: AccessoryConfig, p0, q0, settings: QuadratureSettings = PROBE_STANDARD, *,
              tol: float | None = None, max_iter: int = 40) -> Located:
    """Open ``s, t`` at fixed xi until ``p(s, t) = p0`` and ``q(s, t) = q0``.

    The offsets ``x = p0 - p(0, 0)`` and ``y = q0 - q(0, 0)`` are read off the
    base.  Newton in ``(ln s, ln t)`` with a central-difference Jacobian in
    standard precision; residuals in the precision of ``settings``.
    """
    tol = default_tol(settings) if tol is None else tol
    base_rect = base_rect.with_precision(settings.is_extended)
    if float(base_rect.s) != 0.0 or float(base_rect.t) != 0.0:
        raise InvalidConfig("locate_st needs a rectangle base (s = t = 0)")
    p0, q0 = _num(p0, settings), _num(q0, settings)
    L0 = forward(base_rect, settings, phase_check=False)
    x, y = float(p0 - L0.p), float(q0 - L0.q)
    if abs(x) <= tol * float(p0) and abs(y) <= tol * float(q0):
        return Located(0.0, 0.0, 0.0, 0, (0.0, 0.0), L0)
    floor = 1e3 * settings.rel
    if -floor * float(q0) <= y < 0:
        y = 0.0  # quadrature noise of an exact y = 0
    if x <= 0 or y < 0:
        raise ProbeError(f"locate_st needs x > 0 and y >= 0 (got x={x!r}, y={y!r})")
    guess = leading_guess(base_rect, x, y, settings)
    std = settings.standard_counterpart()

    def resid(s, t, st):
        L = forward(_with_st(base_rect if st is settings else base_rect.with_precision(False), s, t), st,
                    phase_check=False)
        pt, qt = (p0, q0) if st is settings else (float(p0), float(q0))
        return np.array([float((L.p - pt) / pt), float((L.q - qt) / qt)]), L

    s, t = _num(guess[0], settings), _num(guess[1], settings)
    try:
        r, L = resid(s, t, settings)
    except InvalidConfig as exc:
        raise NoConvergence(f"leading-order guess infeasible: {exc}") from exc
    norm = float(np.max(np.abs(r)))
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise NoConvergence(f"locate_st: no convergence (residual {norm:.3e})", (s, t), norm)
        it += 1
        h = 1e-6
        fs, ft = float(s), float(t)
        Jm = np.zeros((2, 2))
        for j in range(2):
            e = [0.0, 0.0]
            e[j] = h
            rp, _ = resid(fs * math.exp(e[0]), ft * math.exp(e[1]), std)
            rm, _ = resid(fs * math.exp(-e[0]), ft * math.exp(-e[1]), std)
            Jm[:, j] = (rp - rm) / (2 * h)
        try:
            delta = -np.linalg.solve(Jm, r)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("locate_st: singular Jacobian", (s, t), norm) from exc
        big = float(np.max(np.abs(delta)))
        if big > 1.0:
            delta /= big
        lam = 1.0
        while True:
            s1 = s + s * math.expm1(lam * delta[0])
            t1 = t + t * math.expm1(lam * delta[1])
            try:
                r1, L1 = resid(s1, t1, settings)
                n1 = float(np.max(np.abs(r1)))
            except InvalidConfig:
                n1 = math.inf
            if n1 < norm:
                s, t, r, L, norm = s1, t1, r1, L1, n1
                break
            lam *= 0.5
            if lam < 1e-4:
                if norm <= max(tol, 1e3 * settings.rel):
                    return Located(s, t, norm, it, guess, L)
                raise NoConvergence(f"locate_st: line search failed (residual {norm:.3e})", (s, t), norm)
    return Located(s, t, norm, it, guess, L)


@dataclass(frozen=True)
class FValue:
    x: float
    y: float
    F: object
    error: float
    s: float
    t: float
    locate_residual: float
    base_residual: float
    guess: tuple

    def as_dict(self) -> dict:
        return {
            "x": self.x, "y": self.y, "F": float(self.F), "F_error": self.error, "s": self.s, "t": self.t,
            "s_guess": self.guess[0], "t_guess": self.guess[1],
            "locate_residual": self.locate_residual, "base_residual": self.base_residual,
        }


def eval_F(a0, p0, q0, x, y, settings: QuadratureSettings = PROBE_STANDARD, *, base_guess=None,
           tol: float | None = None) -> FValue:
    """``F(x, y)``; the value keeps the precision of ``settings`` (``DD`` in extended mode)."""
    base = solve_base(a0, p0, q0, x, y, settings, guess=base_guess, tol=tol)
    loc = locate_st(base.config, p0, q0, settings, tol=tol)
    L = loc.lengths
    P0, Q0 = _num(p0, settings), _num(q0, settings)
    F = L.a + L.b * (P0 + Q0) + L.c * P0
    e = L.errors
    err = e.get("a", 0.0) + e.get("b", 0.0) * float(P0 + Q0) + e.get("c", 0.0) * float(P0)
    err += float(a0) * (loc.residual + base.residual)
    return FValue(float(x), float(y), F, err, float(loc.s), float(loc.t), loc.residual, base.residual, loc.guess)


def _eval_job(job):
    a0, p0, q0, x, y, settings, guess, tol = job
    try:
        return eval_F(a0, p0, q0, x, y, settings, base_guess=guess, tol=tol)
    except SCError as exc:
        return exc


def _control_job(job):
    a, p0, q0, settings, guess, tol = job
    res = solve_base(a, p0, q0, 0.0, 0.0, settings, guess=guess, tol=tol)
    return res.lengths.a, float(a) * res.residual + res.lengths.errors.get("a", 0.0)


def _map(fn, jobs, n_jobs):
    if n_jobs and n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


@dataclass
class ProbeScan:
    base: tuple
    kmin: int
    kmax: int
    precision: str
    samples: list
    excluded: list
    table: list  # rows: k, h, D, D/h^2, error bar
    increasing: bool
    ratio: float
    D_fit: dict
    c2_fit: dict
    control: list
    control_flat: bool
    delta_fit: dict
    precision_ok: bool
    warnings: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "base": {"a0": self.base[0], "p0": self.base[1], "q0": self.base[2]},
            "kmin": self.kmin,
            "kmax": self.kmax,
            "precision": self.precision,
            "samples": [s.as_dict() for s in self.samples],
            "excluded": self.excluded,
            "second_differences": self.table,
            "D_over_h2_increasing": self.increasing,
            "D_over_h2_max_over_min": self.ratio,
            "D_fit": self.D_fit,
            "c2_fit": self.c2_fit,
            "control": self.control,
            "control_flat": self.control_flat,
            "delta_fit": self.delta_fit,
            "precision_ok": self.precision_ok,
            "warnings": self.warnings,
        }

    def csv_rows(self):
        for row in self.table:
            yield (row["h"], row["F_h"], row["D"], row["D_over_h2"], row["model"])


def _fit_dict(fit, extra=None) -> dict:
    d = fit.as_dict()
    if extra:
        d.update(extra)
    return d


def nonsmooth_scan(a0: float = 1.0, p0: float = 1 / 3, q0: float = 1 / 3, kmin: int = 8, kmax: int = 16,
                   settings: QuadratureSettings = PROBE_STANDARD, *, n_jobs: int = 1, tol: float | None = None,
                   with_delta: bool = True, strict: bool = False) -> ProbeScan:
    lo, hi = (6, 24) if settings.is_extended else (6, 16)
    if not (lo <= kmin < kmax <= hi):
        raise OutOfRange(f"k range must lie within [{lo}, {hi}] in {settings.precision} precision")
    tol = default_tol(settings) if tol is None else tol
    warnings = []
    base0 = solve_base(a0, p0, q0, 0.0, 0.0, settings, tol=tol)
    guess = base0.config
    F0_val = eval_F(a0, p0, q0, 0.0, 0.0, settings, base_guess=guess, tol=tol)

    # F(2^-j, 0) for j = kmin - 1 .. kmax covers every h and 2h
    js = list(range(kmin - 1, kmax + 1))
    jobs = [(a0, p0, q0, 2.0**-j, 0.0, settings, guess, tol) for j in js]
    out = _map(_eval_job, jobs, n_jobs)
    Fx, samples, excluded = {}, [F0_val], []
    for j, r in zip(js, out):
        if isinstance(r, Exception):
            excluded.append({"x": 2.0**-j, "y": 0.0, "reason": str(r)})
            continue
        if r.locate_residual > tol or r.base_residual > tol:
            excluded.append({"x": 2.0**-j, "y": 0.0, "reason": "residual above tolerance"})
            continue
        Fx[j] = r
        samples.append(r)
    F0 = F0_val.F

    table = []
    for k in range(kmin, kmax + 1):
        if k not in Fx or k - 1 not in Fx:
            continue
        h = 2.0**-k
        D = Fx[k - 1].F - 2 * Fx[k].F + F0
        err = Fx[k - 1].error + 2 * Fx[k].error + F0_val.error
        table.append({"k": k, "h": h, "F_h": float(Fx[k].F), "F_2h": float(Fx[k - 1].F), "D": float(D),
                      "D_over_h2": float(D) / h**2, "error_bar": err / h**2})
    precision_ok = True
    if table and table[-1]["error_bar"] * table[-1]["h"] ** 2 > abs(table[-1]["D"]) / 10:
        precision_ok = False
        msg = "F error estimate exceeds D(h)/10 at the smallest h"
        if strict:
            raise PrecisionInsufficient(msg)
        warnings.append(msg)

    q = [row["D_over_h2"] for row in table]
    increasing = len(q) >= 2 and all(b > a for a, b in zip(q, q[1:]))
    ratio = (max(q) / min(q)) if q and min(q) > 0 else math.nan

    # D(h)/h^2 ~ c / (h ln^2(1/h)): one-parameter least squares
    D_fit = {}
    if table:
        hs = np.array([row["h"] for row in table])
        qs = np.array(q)
        basis = 1 / (hs * np.log(1 / hs) ** 2)
        w = 1 / basis
        c = float(np.sum(w * w * basis * qs) / np.sum(w * w * basis * basis))
        for row, m in zip(table, c * basis):
            row["model"] = float(m)
        resid = (qs - c * basis) / (c * basis)
        D_fit = {"model": "c / (h ln^2(1/h))", "c": c, "relative_residual_norm": float(np.linalg.norm(resid))}

    # F(x, 0) = c0 + c1 x/ln(1/x) + c2 x^2/ln(1/x) + c3 x
    c2_fit = {}
    xs = np.array([0.0] + [2.0**-j for j in js if j in Fx])
    Fs = [F0] + [Fx[j].F for j in js if j in Fx]
    ys = np.array([float(f - F0) for f in Fs])  # shift by F(0,0) before rounding
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_log = np.where(xs > 0, 1 / np.log(1 / np.where(xs > 0, xs, 0.5)), 0.0)
    basis = (
        lambda x: np.ones_like(x),
        lambda x: x * _inv_log(x),
        lambda x: x * x * _inv_log(x),
        lambda x: x,
    )
    scale = np.where(xs > 0, xs * xs * inv_log, 1.0)
    scale[0] = scale[1] if len(scale) > 1 else 1.0
    try:
        fit = fit_model(xs, ys, basis, weights=1 / scale, names=("c0", "c1", "c2", "c3"))
        c2 = fit.coefficients[2]
        c2_fit = _fit_dict(fit, {"c2": c2, "prediction": 2 * math.pi,
                                 "relative_error": abs(c2 - 2 * math.pi) / (2 * math.pi)})
    except FitError as exc:
        warnings.append(f"c2 fit: {exc}")

    # control family: a0 + j h, x = y = 0
    control = []
    flat = True
    for k in range(kmin, kmax + 1):
        h = 2.0**-k
        vals = _map(_control_job, [(_num(a0, settings) + j * _num(h, settings), p0, q0, settings, guess, tol)
                                   for j in range(3)], n_jobs)
        D = vals[2][0] - 2 * vals[1][0] + vals[0][0]
        err = (vals[2][1] + 2 * vals[1][1] + vals[0][1]) / h**2
        dq = float(D) / h**2
        ok = abs(dq) <= max(3 * err, 1e-300)
        flat = flat and ok
        control.append({"k": k, "h": h, "D_over_h2": dq, "error_bar": err, "within": ok})

    delta_fit = _delta_fit(a0, p0, q0, kmin, kmax, settings, guess, tol, n_jobs, F0, warnings) if with_delta else {}
    return ProbeScan((a0, p0, q0), kmin, kmax, settings.precision, samples, excluded, table, increasing, ratio,
                     D_fit, c2_fit, control, flat, delta_fit, precision_ok, warnings)


def _inv_log(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0, x, 0.5)
    return np.where(x > 0, 1 / np.log(1 / safe), 0.0)


def _delta_fit(a0, p0, q0, kmin, kmax, settings, guess, tol, n_jobs, F0, warnings) -> dict:
    """Quadratic Taylor model of F against the logarithmic model on (h,0), (h,h), (2h,h)."""
    pts = []
    for k in range(kmin, kmax + 1):
        h = 2.0**-k
        pts += [(h, 0.0), (h, h), (2 * h, h)]
    out = _map(_eval_job, [(a0, p0, q0, x, y, settings, guess, tol) for x, y in pts], n_jobs)
    xs, ys, vals = [], [], []
    for (x, y), r in zip(pts, out):
        if isinstance(r, Exception):
            continue
        xs.append(x)
        ys.append(y)
        vals.append(float(r.F - F0))
    X, Y, V = np.array(xs), np.array(ys), np.array(vals)
    idx = np.arange(len(X))
    w = 1 / (X + Y) ** 2

    def col(f):
        return lambda i: f(X[i.astype(int)], Y[i.astype(int)])

    poly = [col(lambda x, y: x), col(lambda x, y: y), col(lambda x, y: x * x), col(lambda x, y: x * y),
            col(lambda x, y: y * y)]
    logm = [col(lambda x, y: x), col(lambda x, y: y), col(lambda x, y: x * x * _inv_log(x)),
            col(lambda x, y: (x + y) ** 2 * _inv_log(x + y))]
    result = {}
    try:
        pf = fit_model(idx, V, poly, weights=w, names=("delta1", "delta2", "delta11", "delta12", "delta22"))
        result["polynomial"] = pf.as_dict()
        result.update(dict(zip(pf.names, pf.coefficients)))
    except FitError as exc:
        warnings.append(f"delta fit: {exc}")
    try:
        lf = fit_model(idx, V, logm, weights=w, names=("l1", "l2", "pi_x", "pi_xy"))
        result["logarithmic"] = lf.as_dict()
    except FitError as exc:
        warnings.append(f"log-model fit: {exc}")
    return result
