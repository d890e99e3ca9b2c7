"""Schwarz-Christoffel side lengths of the staircase polygon.

The prevertices on the real line are, in order,

    -1 < eta1 = xi1 - s <= xi1 < eta2 = xi2 - t <= xi2 < xi3 < 1,

and the map has derivative proportional to

    g(x) = sqrt(x - eta1) sqrt(x - eta2) / (sqrt(x - 1) sqrt(x + 1) sqrt(x - xi1) sqrt(x - xi2) sqrt(x - xi3)).

Each side length is ``J`` times the integral of ``|g|`` over the matching
real interval, with ``1/J`` the integral over ``(1, inf)`` (the bottom edge
has length 1):

    (-inf, -1) -> a      (-1, eta1) -> 1 - p - q    (eta1, xi1) -> b
    (xi1, eta2) -> q     (eta2, xi2) -> c           (xi2, xi3) -> p
    (xi3, 1) -> a + b + c                           (1, inf) -> 1

The two intervals not tied to an unknown give the closure residuals.

Configurations are handled through their six gaps between consecutive
prevertices, so that tiny ``s`` or ``t`` never lose relative accuracy.  Each
finite interval is rescaled to ``[0, 1]`` before integration.  Numbers are
floats in standard precision and :class:`~staircase.sc.dd.DD` in extended
precision.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from staircase.sc import kernels
from staircase.sc.dd import DD, split
from staircase.sc.dd import sqrt as nsqrt

Num = Union[float, DD]

HALF = 0.5
# prevertex exponents of g: +1/2 at the etas, -1/2 elsewhere
_EXPONENTS = (-HALF, HALF, -HALF, HALF, -HALF, -HALF, -HALF)
_NAMES = ("-1", "eta1", "xi1", "eta2", "xi2", "xi3", "1")


class SCError(ValueError):
    """Base class for domain errors of the Schwarz-Christoffel engine."""


class InvalidConfig(SCError):
    pass


class InfeasibleTarget(SCError):
    pass


class NoConvergence(SCError):
    def __init__(self, message: str, best=None, residual: float = math.inf):
        super().__init__(message)
        self.best = best
        self.residual = residual


class PhaseError(SCError):
    pass


@dataclass(frozen=True)
class QuadratureSettings:
    rel: float = 1e-11
    abs: float = 1e-13
    max_depth: int = 60
    max_intervals: int = 2000
    precision: str = "standard"

    def __post_init__(self):
        if not (self.rel > 0 and self.abs > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.precision not in ("standard", "extended"):
            raise ValueError(f"unknown precision mode {self.precision!r}")

    @classmethod
    def extended(cls, rel: float = 1e-26, abs: float = 1e-28) -> "QuadratureSettings":
        return cls(rel=rel, abs=abs, max_depth=100, max_intervals=4000, precision="extended")

    def standard_counterpart(self) -> "QuadratureSettings":
        """Double-precision settings with tolerances a double can meet."""
        if not self.is_extended and self.rel >= 1e-13:
            return self
        return QuadratureSettings(rel=max(self.rel, 1e-13), abs=max(self.abs, 1e-15),
                                  max_depth=min(self.max_depth, 60), max_intervals=min(self.max_intervals, 2000))

    @property
    def is_extended(self) -> bool:
        return self.precision == "extended"

    def as_dict(self) -> dict:
        return {
            "rel": self.rel,
            "abs": self.abs,
            "max_depth": self.max_depth,
            "max_intervals": self.max_intervals,
            "precision": self.precision,
        }


STANDARD = QuadratureSettings()


def _num(x, extended: bool) -> Num:
    if extended:
        return DD.of(x)
    return float(x)


@dataclass(frozen=True)
class AccessoryConfig:
    xi1: Num
    xi2: Num
    xi3: Num
    s: Num = 0.0
    t: Num = 0.0
    # gaps between consecutive prevertices when known more accurately than the differences
    _gaps: tuple | None = field(default=None, compare=False, repr=False)

    @classmethod
    def from_gaps(cls, g0, s, g2, t, g4, g5=None) -> "AccessoryConfig":
        xi1 = -1 + g0 + s
        xi2 = xi1 + g2 + t
        xi3 = xi2 + g4
        if g5 is None:
            g5 = 1 - xi3
        return cls(xi1, xi2, xi3, s, t, (g0, s, g2, t, g4, g5))

    def gaps(self) -> tuple:
        """``(eta1 + 1, s, eta2 - xi1, t, xi3 - xi2, 1 - xi3)``."""
        if self._gaps is not None:
            return self._gaps
        return (
            (self.xi1 - self.s) + 1,
            self.s,
            (self.xi2 - self.t) - self.xi1,
            self.t,
            self.xi3 - self.xi2,
            1 - self.xi3,
        )

    def validate(self, eps_sep: float = 1e-12) -> "AccessoryConfig":
        s, t = float(self.s), float(self.t)
        if s < 0 or t < 0:
            raise InvalidConfig(f"s and t must be non-negative, got s={s!r}, t={t!r}")
        g = [float(x) for x in self.gaps()]
        for name, value in zip(("eta1 + 1", "eta2 - xi1", "xi3 - xi2", "1 - xi3"), (g[0], g[2], g[4], g[5])):
            if not value >= eps_sep:
                raise InvalidConfig(f"prevertex ordering violated: {name} = {value!r} < {eps_sep!r}")
        return self

    def with_precision(self, extended: bool) -> "AccessoryConfig":
        conv = lambda x: _num(x, extended)
        gaps = tuple(conv(x) for x in self._gaps) if self._gaps is not None else None
        return AccessoryConfig(conv(self.xi1), conv(self.xi2), conv(self.xi3), conv(self.s), conv(self.t), gaps)

    def as_floats(self) -> dict:
        return {k: float(getattr(self, k)) for k in ("xi1", "xi2", "xi3", "s", "t")}


@dataclass(frozen=True)
class IntegralBundle:
    A: Num
    B: Num
    C: Num
    P: Num
    Q: Num
    Jinv: Num
    H: Num  # integral over (-1, eta1)
    V: Num  # integral over (xi3, 1)
    closure_vertical: float
    closure_horizontal: float
    errors: dict
    nevals: int
    converged: bool


@dataclass(frozen=True)
class SideLengths:
    a: Num
    b: Num
    c: Num
    p: Num
    q: Num
    closure_vertical: float = 0.0
    closure_horizontal: float = 0.0
    errors: dict = field(default_factory=dict, compare=False)
    converged: bool = True

    def values(self) -> tuple:
        return (self.a, self.b, self.c, self.p, self.q)

    def as_floats(self) -> dict:
        return {k: float(getattr(self, k)) for k in "abcpq"}

    def area(self) -> Num:
        """Polygon area ``a + b (p + q) + c p``."""
        return self.a + self.b * (self.p + self.q) + self.c * self.p


# ---------------------------------------------------------------------------
# integrals


def _points(cfg: AccessoryConfig):
    """Prevertices as (name, exponent) with the gaps between consecutive ones.

    A zero ``s`` (or ``t``) merges ``eta`` with ``xi``: their factors cancel
    and the merged point keeps exponent 0 so it still splits the intervals.
    """
    gaps = list(cfg.gaps())
    pts = [[_NAMES[0], _EXPONENTS[0]]]
    out_gaps = []
    for k in range(6):
        if k in (1, 3) and float(gaps[k]) == 0.0:
            pts[-1][1] = 0.0
            pts[-1][0] = _NAMES[k] + "=" + _NAMES[k + 1]
            continue
        out_gaps.append(gaps[k])
        pts.append([_NAMES[k + 1], _EXPONENTS[k + 1]])
    return pts, out_gaps


def _dist(gaps, i: int, j: int):
    if i > j:
        i, j = j, i
    total = gaps[i]
    for k in range(i + 1, j):
        total = total + gaps[k]
    return total


def _power(d, power: float):
    """``d**power`` for power in {0, 1/2, 1, 3/2}; None stands for 1."""
    if power == 0.0:
        return None
    if power == 1.0:
        return d
    root = nsqrt(d)
    return root if power == 0.5 else d * root


def _integral(pts, gaps, lo: int, hi: int | None, settings: QuadratureSettings, infinite: int = 0):
    """Integral of |g| over the interval between points ``lo`` and ``hi``.

    ``infinite = -1`` integrates over ``(-inf, point lo)`` and ``+1`` over
    ``(point lo, inf)``.
    """
    A, B, S = [], [], []
    if infinite:
        end = lo
        eL, eR = -HALF, pts[end][1]
        for k, (_, e) in enumerate(pts):
            if k == end or e == 0.0:
                continue
            A.append(1.0 if not settings.is_extended else DD(1.0))
            B.append(_dist(gaps, k, end))
            S.append(1 if e > 0 else -1)
        scale = None
    else:
        eL, eR = pts[lo][1], pts[hi][1]
        for k, (_, e) in enumerate(pts):
            if k in (lo, hi) or e == 0.0:
                continue
            A.append(_dist(gaps, k, lo))
            B.append(_dist(gaps, k, hi))
            S.append(1 if e > 0 else -1)
        d = gaps[lo]
        for k in range(lo + 1, hi):
            d = d + gaps[k]
        power = 1.0 + eL + eR
        scale = _power(d, power)
    if settings.is_extended:
        Ah, Al = zip(*(split(x) for x in A)) if A else ((), ())
        Bh, Bl = zip(*(split(x) for x in B)) if B else ((), ())
        (vh, vl), err, nev, ok = kernels.integrate_dd(
            eL, eR, list(Ah), list(Al), list(Bh), list(Bl), S,
            settings.rel, settings.abs, settings.max_intervals, settings.max_depth,
        )
        value = DD(vh, vl)
    else:
        value, err, nev, ok = kernels.integrate(
            eL, eR, [float(x) for x in A], [float(x) for x in B], S,
            settings.rel, settings.abs, settings.max_intervals, settings.max_depth,
        )
    if scale is not None:
        value = value * scale
        err = err * abs(float(scale))
    return value, err, nev, ok


def _zero(settings: QuadratureSettings) -> Num:
    return DD(0.0) if settings.is_extended else 0.0


def check_phase(cfg: AccessoryConfig) -> dict:
    """Sample g at three interior points of every interval; its phase must be a constant power of i.

    Returns the power of ``i`` per interval; raises :class:`PhaseError` otherwise.
    """
    xi1, xi2, xi3 = float(cfg.xi1), float(cfg.xi2), float(cfg.xi3)
    eta1, eta2 = xi1 - float(cfg.s), xi2 - float(cfg.t)

    def g(x: float) -> complex:
        x = complex(x)
        num = cmath.sqrt(x - eta1) * cmath.sqrt(x - eta2)
        den = cmath.sqrt(x - 1) * cmath.sqrt(x + 1) * cmath.sqrt(x - xi1) * cmath.sqrt(x - xi2) * cmath.sqrt(x - xi3)
        return num / den

    bounds = [-math.inf, -1.0, eta1, xi1, eta2, xi2, xi3, 1.0, math.inf]
    labels = ["A", "H", "B", "Q", "C", "P", "V", "Jinv"]
    powers = {}
    for lab, lo, hi in zip(labels, bounds, bounds[1:]):
        if math.isinf(lo):
            xs = [hi - 0.5, hi - 3.0, hi - 40.0]
        elif math.isinf(hi):
            xs = [lo + 0.5, lo + 3.0, lo + 40.0]
        else:
            xs = [lo + (hi - lo) * f for f in (0.25, 0.5, 0.75)]
            if not all(lo < x < hi for x in xs):
                continue  # empty or unresolvable interval
        seen = set()
        for x in xs:
            val = g(x)
            k = cmath.phase(val) / (math.pi / 2)
            kr = round(k)
            if abs(k - kr) > 1e-9 or val == 0:
                raise PhaseError(f"phase of g on interval {lab} is not a power of i at x={x!r}")
            seen.add(kr % 4)
        if len(seen) != 1:
            raise PhaseError(f"phase of g changes inside interval {lab}")
        powers[lab] = seen.pop()
    return powers


def side_integrals(cfg: AccessoryConfig, settings: QuadratureSettings = STANDARD, eps_sep: float = 1e-12,
                   phase_check: bool = True) -> IntegralBundle:
    """The eight interval integrals of |g| and the two closure residuals."""
    cfg = cfg.with_precision(settings.is_extended).validate(eps_sep)
    if phase_check:
        check_phase(cfg)
    pts, gaps = _points(cfg)
    index = {name: k for k, (name, _) in enumerate(pts)}

    def pos(name: str) -> int:
        for key, k in index.items():
            if name in key.split("="):
                return k
        raise KeyError(name)

    errors = {}
    nevals = 0
    converged = True
    values = {}

    def run(label, lo, hi=None, infinite=0):
        nonlocal nevals, converged
        v, e, n, ok = _integral(pts, gaps, lo, hi, settings, infinite)
        values[label] = v
        errors[label] = float(e)
        nevals += n
        converged = converged and ok

    run("A", pos("-1"), infinite=-1)
    run("Jinv", pos("1"), infinite=1)
    run("H", pos("-1"), pos("eta1"))
    run("Q", pos("xi1"), pos("eta2"))
    run("P", pos("xi2"), pos("xi3"))
    run("V", pos("xi3"), pos("1"))
    zero = _zero(settings)
    if float(cfg.s) > 0:
        run("B", pos("eta1"), pos("xi1"))
    else:
        values["B"], errors["B"] = zero, 0.0
    if float(cfg.t) > 0:
        run("C", pos("eta2"), pos("xi2"))
    else:
        values["C"], errors["C"] = zero, 0.0
    J = 1 / values["Jinv"]
    cv = float(J * values["V"] - J * (values["A"] + values["B"] + values["C"]))
    ch = float(J * values["H"] - (1 - J * (values["P"] + values["Q"])))
    return IntegralBundle(
        A=values["A"], B=values["B"], C=values["C"], P=values["P"], Q=values["Q"], Jinv=values["Jinv"],
        H=values["H"], V=values["V"], closure_vertical=cv, closure_horizontal=ch,
        errors=errors, nevals=nevals, converged=converged,
    )


def forward(cfg: AccessoryConfig, settings: QuadratureSettings = STANDARD, eps_sep: float = 1e-12,
            phase_check: bool = True) -> SideLengths:
    """Staircase dimensions ``(a, b, c, p, q)`` for the prevertex configuration."""
    bundle = side_integrals(cfg, settings, eps_sep, phase_check)
    J = 1 / bundle.Jinv
    rel_j = bundle.errors["Jinv"] / float(bundle.Jinv)
    out = {}
    errs = {}
    for key, name in zip("abcpq", "ABCPQ"):
        v = getattr(bundle, name)
        out[key] = J * v
        errs[key] = abs(float(out[key])) * rel_j + float(J) * bundle.errors[name]
    return SideLengths(
        **out,
        closure_vertical=bundle.closure_vertical,
        closure_horizontal=bundle.closure_horizontal,
        errors=errs,
        converged=bundle.converged,
    )


# ---------------------------------------------------------------------------
# closed-form constants


def alpha_coefficients(cfg: AccessoryConfig) -> tuple[Num, Num]:
    """``(alpha, alpha')`` with alpha = 1/(2 sqrt(1-xi2) sqrt(1+xi2) sqrt(xi3-xi2)) and alpha' the same at xi1."""
    g0, s, g2, t, g4, g5 = cfg.gaps()
    one_m_xi2 = g4 + g5
    one_p_xi2 = g0 + s + g2 + t
    one_m_xi1 = g2 + t + g4 + g5
    one_p_xi1 = g0 + s
    alpha = 1 / (2 * nsqrt(one_m_xi2 * one_p_xi2 * g4))
    alpha_p = 1 / (2 * nsqrt(one_m_xi1 * one_p_xi1 * (g2 + t + g4)))
    return alpha, alpha_p


def constants_PQ(base: AccessoryConfig, settings: QuadratureSettings = STANDARD) -> tuple[Num, Num]:
    """``(P_const, Q_const) = (J alpha, J alpha')`` at a base with ``s = t = 0``."""
    if float(base.s) != 0.0 or float(base.t) != 0.0:
        raise InvalidConfig("constants_PQ needs a base configuration with s = t = 0")
    base = base.with_precision(settings.is_extended)
    bundle = side_integrals(base, settings)
    J = 1 / bundle.Jinv
    alpha, alpha_p = alpha_coefficients(base)
    return J * alpha, J * alpha_p


# ---------------------------------------------------------------------------
# inverse problem


@dataclass
class SolveResult:
    config: AccessoryConfig
    lengths: SideLengths
    residual: float
    iterations: int
    history: list = field(default_factory=list)


class _State:
    """Positive unknowns: gap weights w0, w2, w4 (w5 = 1) and, when active, s and t."""

    def __init__(self, w, s, t, fixed_s: bool, fixed_t: bool):
        self.w = list(w)
        self.s = s
        self.t = t
        self.fixed_s = fixed_s
        self.fixed_t = fixed_t

    def free(self) -> list:
        vals = list(self.w)
        if not self.fixed_s:
            vals.append(self.s)
        if not self.fixed_t:
            vals.append(self.t)
        return vals

    def moved(self, delta) -> "_State":
        vals = [v + v * math.expm1(d) for v, d in zip(self.free(), delta)]
        w = vals[:3]
        k = 3
        s, t = self.s, self.t
        if not self.fixed_s:
            s = vals[k]
            k += 1
        if not self.fixed_t:
            t = vals[k]
        return _State(w, s, t, self.fixed_s, self.fixed_t)

    def config(self) -> AccessoryConfig:
        total = 2 - self.s - self.t
        wsum = self.w[0] + self.w[1] + self.w[2] + 1
        g0, g2, g4 = (total * w / wsum for w in self.w)
        g5 = total / wsum
        return AccessoryConfig.from_gaps(g0, self.s, g2, self.t, g4, g5)

    def to_float(self) -> "_State":
        return _State([float(x) for x in self.w], float(self.s), float(self.t), self.fixed_s, self.fixed_t)

    @classmethod
    def from_config(cls, cfg: AccessoryConfig, fixed_s: bool, fixed_t: bool, extended: bool) -> "_State":
        g0, s, g2, t, g4, g5 = (_num(x, extended) for x in cfg.gaps())
        return cls([g0 / g5, g2 / g5, g4 / g5], s, t, fixed_s, fixed_t)


def _check_target(target: SideLengths) -> None:
    a, b, c, p, q = (float(x) for x in target.values())
    if not all(math.isfinite(x) for x in (a, b, c, p, q)):
        raise InfeasibleTarget("target lengths must be finite")
    if a <= 0 or p <= 0 or q <= 0 or b < 0 or c < 0:
        raise InfeasibleTarget(f"need a, p, q > 0 and b, c >= 0; got {(a, b, c, p, q)}")
    if p + q >= 1:
        raise InfeasibleTarget(f"need p + q < 1 (bottom edge has length 1); got p + q = {p + q!r}")


def _residual(state: _State, target_vals, active, settings, eps_sep):
    cfg = state.config()
    L = forward(cfg, settings, eps_sep, phase_check=False)
    vals = L.values()
    r = np.array([float((vals[k] - target_vals[k]) / target_vals[k]) for k in active])
    return r, cfg, L


def _jacobian(state: _State, target_vals, active, eps_sep, base_settings: QuadratureSettings):
    # always standard precision; the step follows the square root of the quadrature tolerance
    settings = base_settings.standard_counterpart()
    fstate = state.to_float()
    tv = [float(x) for x in target_vals]
    h = max(math.sqrt(settings.rel), 1e-6)
    n = len(fstate.free())
    J = np.zeros((len(active), n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        rp, _, _ = _residual(fstate.moved(e), tv, active, settings, eps_sep)
        rm, _, _ = _residual(fstate.moved(-e), tv, active, settings, eps_sep)
        J[:, j] = (rp - rm) / (2 * h)
    return J


def _newton(state, target_vals, active, settings, eps_sep, tol, max_iter, history):
    try:
        r, cfg, L = _residual(state, target_vals, active, settings, eps_sep)
    except InvalidConfig as exc:
        raise NoConvergence(f"starting point infeasible: {exc}") from exc
    norm = float(np.max(np.abs(r)))
    history.append(norm)
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise NoConvergence(f"no convergence in {max_iter} iterations (residual {norm:.3e})", cfg, norm)
        it += 1
        J = _jacobian(state, target_vals, active, eps_sep, settings)
        try:
            delta = -np.linalg.solve(J, r)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular Jacobian", cfg, norm) from exc
        big = float(np.max(np.abs(delta)))
        if big > 1.0:
            delta = delta / big
        lam = 1.0
        accepted = False
        while lam > 1e-4:
            trial = state.moved(lam * delta)
            try:
                rt, cfg_t, L_t = _residual(trial, target_vals, active, settings, eps_sep)
            except InvalidConfig:
                lam *= 0.5
                continue
            nt = float(np.max(np.abs(rt)))
            if nt < norm:
                state, r, cfg, L, norm = trial, rt, cfg_t, L_t, nt
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            if norm <= max(tol, 1e3 * settings.rel):
                break  # at the noise floor of the quadrature
            raise NoConvergence(f"line search failed (residual {norm:.3e})", cfg, norm)
        history.append(norm)
    return state, cfg, L, norm, it


DEFAULT_GUESS = AccessoryConfig(-0.5, 0.0, 0.5, 0.0, 0.0)


def solve_accessory(target: SideLengths, settings: QuadratureSettings = STANDARD, *, tol: float = 1e-8,
                    eps_sep: float = 1e-12, max_iter: int = 40, guess: AccessoryConfig | None = None,
                    max_continuation: int = 40) -> SolveResult:
    """Prevertices whose forward map reproduces ``target``.

    Damped Newton in logarithmic gap coordinates with a finite-difference
    Jacobian; when Newton fails from the guess, the target is approached by
    geometric continuation from the lengths of the guess.
    """
    _check_target(target)
    ext = settings.is_extended
    tv = [_num(x, ext) for x in target.values()]
    fixed_s = float(target.b) == 0.0
    fixed_t = float(target.c) == 0.0
    active = [k for k in range(5) if not ((k == 1 and fixed_s) or (k == 2 and fixed_t))]
    history: list = []

    if guess is None:
        guess = DEFAULT_GUESS
        if not (fixed_s and fixed_t):
            # reduced problem first, then the leading-order s and t
            reduced = SideLengths(target.a, 0.0, 0.0, target.p, target.q)
            base = solve_accessory(reduced, settings.standard_counterpart(),
                                   tol=max(tol, 1e-10), eps_sep=eps_sep, max_iter=max_iter).config
            alpha, alpha_p = alpha_coefficients(base)
            J0 = float(1 / side_integrals(base, STANDARD, eps_sep, phase_check=False).Jinv)
            s0 = 0.0 if fixed_s else float(target.b) / (J0 * math.pi * float(alpha_p))
            t0 = 0.0 if fixed_t else float(target.c) / (J0 * math.pi * float(alpha))
            g = [float(x) for x in base.gaps()]
            room = min(g[0], g[2], g[4]) * 0.5
            s0, t0 = min(s0, room), min(t0, room)
            guess = AccessoryConfig.from_gaps(g[0] - s0 / 2, s0, g[2] - s0 / 2 - t0 / 2, t0, g[4] - t0 / 2, g[5])
    if not fixed_s and float(guess.s) <= 0:
        guess = replace(guess, s=1e-3, _gaps=None)
    if not fixed_t and float(guess.t) <= 0:
        guess = replace(guess, t=1e-3, _gaps=None)
    if fixed_s:
        guess = AccessoryConfig.from_gaps(*_merged_gaps(guess, "s"))
    if fixed_t:
        guess = AccessoryConfig.from_gaps(*_merged_gaps(guess, "t"))
    state = _State.from_config(guess, fixed_s, fixed_t, ext)

    try:
        state, cfg, L, norm, it = _newton(state, tv, active, settings, eps_sep, tol, max_iter, history)
        return SolveResult(cfg, L, norm, it, history)
    except NoConvergence:
        pass

    # continuation from the lengths of the guess
    start = forward(state.config(), settings.standard_counterpart(), eps_sep, phase_check=False)
    L0 = [float(x) for x in start.values()]
    lam, step = 0.0, 0.25
    total_it = 0
    attempts = 0
    while lam < 1.0:
        attempts += 1
        if attempts > max_continuation:
            raise NoConvergence("continuation budget exhausted", state.config(), math.inf)
        nxt = min(1.0, lam + step)
        if nxt < 1.0:
            mid = [_num(L0[k] ** (1 - nxt) * float(tv[k]) ** nxt if k in active else 0.0, ext) for k in range(5)]
            sub_tol = max(tol, 1e-6)
        else:
            mid, sub_tol = tv, tol
        try:
            state, cfg, L, norm, it = _newton(state, mid, active, settings, eps_sep, sub_tol, max_iter, history)
            total_it += it
            lam = nxt
            step = min(step * 2, 0.5)
        except NoConvergence:
            step *= 0.5
            if step < 1e-4:
                raise
    return SolveResult(cfg, L, norm, total_it, history)


def _merged_gaps(cfg: AccessoryConfig, which: str):
    g0, s, g2, t, g4, g5 = cfg.gaps()
    if which == "s":
        return g0 + s / 2, 0.0 * s, g2 + s / 2, t, g4, g5
    return g0, s, g2 + t / 2, 0.0 * t, g4 + t / 2, g5
