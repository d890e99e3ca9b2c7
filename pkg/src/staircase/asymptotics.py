"""Leading coefficients of the side integrals near the rectangle s = t = 0.

Each check samples one axis (``t = 0`` or ``s = 0``) on a geometric grid
``2^-k``, fits a small asymptotic model by weighted least squares and
compares the leading coefficient with its closed form:

    B(s, 0)            = K_B s + K2 s^2,                 K_B = pi alpha'
    C(0, t)            = K_C t + K2 t^2,                 K_C = pi alpha
    P(0, t) - P(0, 0)  = alpha t ln(1/t) + beta t
    Q(s, 0) - Q(0, 0)  = alpha' s ln(1/s) + beta' s
    Q(0, t) - Q(0, 0)  = -alpha t ln(1/t) + beta'' t
    area(0, t) - area0 = beta1 t + beta11 t^2 ln(1/t) + gamma t^2,   beta11 = pi P_const^2
    area(s, 0) - area0 = beta2 s + beta22 s^2 ln(1/s) + gamma' s^2,  beta22 = pi Q_const^2

B, C, P, Q are the raw integrals; the area is built from the side lengths.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from staircase.sc.engine import (
    STANDARD,
    AccessoryConfig,
    QuadratureSettings,
    alpha_coefficients,
    forward,
    side_integrals,
)

PROPS = ("B", "C", "P", "Q", "AREA")


class FitError(ValueError):
    pass


class RankDeficient(FitError):
    pass


class FitIllConditioned(FitError):
    pass


@dataclass(frozen=True)
class FitResult:
    coefficients: tuple
    stderr: tuple
    residual_norm: float
    condition: float
    names: tuple = ()

    def as_dict(self) -> dict:
        return {
            "names": list(self.names),
            "coefficients": list(self.coefficients),
            "stderr": list(self.stderr),
            "residual_norm": self.residual_norm,
            "condition": self.condition,
        }


def fit_model(x: Sequence[float], y: Sequence[float], basis: Sequence[Callable], weights=None,
              names: Sequence[str] = (), max_condition: float = 1e14) -> FitResult:
    """Weighted least squares ``y ~ sum c_j basis_j(x)``.

    ``condition`` is the condition number of the normal equations after the
    columns are scaled to unit norm.  ``stderr`` comes from the residual
    variance.  The residual norm is that of the weighted residuals.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = len(x), len(basis)
    if n < 2 * m:
        raise RankDeficient(f"need at least {2 * m} samples for {m} basis functions, got {n}")
    M = np.column_stack([np.asarray(f(x), dtype=float) for f in basis])
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    Mw = M * w[:, None]
    yw = y * w
    norms = np.linalg.norm(Mw, axis=0)
    if not np.all(norms > 0) or not np.all(np.isfinite(Mw)):
        raise RankDeficient("a basis function vanishes (or is not finite) on the samples")
    Ms = Mw / norms
    sv = np.linalg.svd(Ms, compute_uv=False)
    if sv[-1] <= sv[0] * 1e-15:
        raise RankDeficient("basis functions are linearly dependent on the samples")
    cond = float((sv[0] / sv[-1]) ** 2)
    if cond > max_condition:
        raise FitIllConditioned(f"normal-equation condition {cond:.3e} exceeds {max_condition:.1e}")
    cs, *_ = np.linalg.lstsq(Ms, yw, rcond=None)
    coef = cs / norms
    resid = yw - Mw @ coef
    rss = float(resid @ resid)
    dof = max(n - m, 1)
    cov_s = np.linalg.inv(Ms.T @ Ms) * (rss / dof)
    stderr = np.sqrt(np.maximum(np.diag(cov_s), 0.0)) / norms
    return FitResult(tuple(float(c) for c in coef), tuple(float(e) for e in stderr), math.sqrt(rss), cond,
                     tuple(names))


def _lin(x):
    return x


def _sq(x):
    return x * x


def _xlog(x):
    return x * np.log(1 / x)


def _x2log(x):
    return x * x * np.log(1 / x)


@dataclass
class AxisFit:
    axis: str  # "s" or "t"
    quantity: str
    grid: list
    values: list
    model: list
    fit: FitResult

    def as_dict(self) -> dict:
        return {
            "axis": self.axis,
            "quantity": self.quantity,
            "grid": self.grid,
            "values": self.values,
            "model": self.model,
            "fit": self.fit.as_dict(),
        }


@dataclass
class ExpansionReport:
    prop: str
    base: dict
    kmin: int
    kmax: int
    fits: list
    coefficients: dict
    predictions: dict
    relative_errors: dict
    residual_norm: float
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "prop": self.prop,
            "base": self.base,
            "grid": {"kmin": self.kmin, "kmax": self.kmax, "values": [2.0**-k for k in range(self.kmin, self.kmax + 1)]},
            "coefficients": self.coefficients,
            "predictions": self.predictions,
            "relative_errors": self.relative_errors,
            "residual_norm": self.residual_norm,
            "fits": [f.as_dict() for f in self.fits],
            "extras": self.extras,
        }

    def csv_rows(self):
        for f in self.fits:
            for g, v, m in zip(f.grid, f.values, f.model):
                yield (f.quantity, f.axis, g, v, m)


def _eval_point(job):
    kind, cfg, settings = job
    if kind == "integrals":
        b = side_integrals(cfg, settings, phase_check=False)
        return {k: getattr(b, k) for k in ("A", "B", "C", "P", "Q", "Jinv")}
    L = forward(cfg, settings, phase_check=False)
    # differences are taken before rounding to float
    return {"area": L.area(), "a": L.a}


def _evaluate(jobs, n_jobs: int):
    if n_jobs and n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            return list(ex.map(_eval_point, jobs))
    return [_eval_point(j) for j in jobs]


def _axis_config(base: AccessoryConfig, axis: str, h: float) -> AccessoryConfig:
    """Move ``eta1`` (axis s) or ``eta2`` (axis t) left by ``h`` keeping the xi fixed."""
    xi1, xi2, xi3 = float(base.xi1), float(base.xi2), float(base.xi3)
    if axis == "s":
        return AccessoryConfig(xi1, xi2, xi3, h, 0.0)
    return AccessoryConfig(xi1, xi2, xi3, 0.0, h)


def _fit_axis(base, axis, quantity, kmin, kmax, settings, n_jobs, basis, names, weight, key, subtract=True):
    grid = [2.0**-k for k in range(kmin, kmax + 1)]
    kind = "area" if quantity == "area" else "integrals"
    results = _evaluate([(kind, base, settings)] + [(kind, _axis_config(base, axis, h), settings) for h in grid], n_jobs)
    y0 = results[0][key]
    ys = np.array([float(r[key] - y0) if subtract else float(r[key]) for r in results[1:]])
    x = np.array(grid)
    fit = fit_model(x, ys, basis, weights=1 / weight(x), names=names)
    model = sum(c * f(x) for c, f in zip(fit.coefficients, basis))
    return AxisFit(axis, quantity, grid, ys.tolist(), np.asarray(model).tolist(), fit), float(y0)


def linear_coefficients(base: AccessoryConfig, settings: QuadratureSettings = STANDARD, h: float = 1e-5) -> dict:
    """``A1 = da/ds`` and ``A2 = da/dt`` at s = t = 0 by second-order one-sided differences.

    s and t cannot go negative, so the symmetric stencil is replaced by
    ``(-3 a(0) + 4 a(h) - a(2h)) / 2h``.
    """
    a0 = float(forward(base, settings, phase_check=False).a)
    out = {}
    for name, axis in (("A1", "s"), ("A2", "t")):
        a1 = float(forward(_axis_config(base, axis, h), settings, phase_check=False).a)
        a2 = float(forward(_axis_config(base, axis, 2 * h), settings, phase_check=False).a)
        out[name] = (-3 * a0 + 4 * a1 - a2) / (2 * h)
    return out


def _rel(fitted: float, predicted: float) -> float:
    return abs(fitted - predicted) / abs(predicted)


def run_expansion_check(which: str, base: AccessoryConfig, kmin: int = 10, kmax: int = 30,
                        settings: QuadratureSettings = STANDARD, n_jobs: int = 1) -> ExpansionReport:
    which = which.upper()
    if which not in PROPS:
        raise ValueError(f"unknown proposition {which!r}; expected one of {', '.join(PROPS)}")
    if float(base.s) != 0.0 or float(base.t) != 0.0:
        raise ValueError("the base configuration must have s = t = 0")
    if not kmin < kmax or 2.0**-kmin > 1e-2:
        raise ValueError("grid must lie in (0, 1e-2]: need 7 <= kmin < kmax")
    base = AccessoryConfig(float(base.xi1), float(base.xi2), float(base.xi3)).validate()
    alpha, alpha_p = (float(v) for v in alpha_coefficients(base))
    bdict = base.as_floats()
    fits, coef, pred, rel = [], {}, {}, {}
    extras = {}

    if which in ("B", "C"):
        axis, key = ("s", "B") if which == "B" else ("t", "C")
        f, _ = _fit_axis(base, axis, key, kmin, kmax, settings, n_jobs, (_lin, _sq), ("K", "K2"), _lin, key,
                         subtract=False)
        fits.append(f)
        name = "K_" + which
        coef[name] = f.fit.coefficients[0]
        pred[name] = math.pi * (alpha_p if which == "B" else alpha)
        rel[name] = _rel(coef[name], pred[name])
    elif which == "P":
        f, _ = _fit_axis(base, "t", "P", kmin, kmax, settings, n_jobs, (_xlog, _lin), ("alpha", "beta"), _xlog, "P")
        fits.append(f)
        coef["alpha"] = f.fit.coefficients[0]
        pred["alpha"] = alpha
        rel["alpha"] = _rel(coef["alpha"], alpha)
    elif which == "Q":
        fs, _ = _fit_axis(base, "s", "Q", kmin, kmax, settings, n_jobs, (_xlog, _lin), ("alpha_p", "beta_p"), _xlog, "Q")
        ft, _ = _fit_axis(base, "t", "Q", kmin, kmax, settings, n_jobs, (_xlog, _lin), ("minus_alpha", "beta_pp"), _xlog, "Q")
        fits += [fs, ft]
        coef["alpha_p"] = fs.fit.coefficients[0]
        coef["minus_alpha"] = ft.fit.coefficients[0]
        pred["alpha_p"] = alpha_p
        pred["minus_alpha"] = -alpha
        rel["alpha_p"] = _rel(coef["alpha_p"], alpha_p)
        rel["minus_alpha"] = _rel(coef["minus_alpha"], -alpha)
    else:
        J0 = 1 / float(side_integrals(base, settings, phase_check=False).Jinv)
        P_const, Q_const = J0 * alpha, J0 * alpha_p
        basis = (_lin, _x2log, _sq)
        ft, area0 = _fit_axis(base, "t", "area", kmin, kmax, settings, n_jobs, basis, ("beta1", "beta11", "gamma"),
                              _sq, "area")
        fs, _ = _fit_axis(base, "s", "area", kmin, kmax, settings, n_jobs, basis, ("beta2", "beta22", "gamma_p"),
                          _sq, "area")
        fits += [ft, fs]
        coef.update(beta1=ft.fit.coefficients[0], beta11=ft.fit.coefficients[1],
                    beta2=fs.fit.coefficients[0], beta22=fs.fit.coefficients[1])
        pred["beta11"] = math.pi * P_const**2
        pred["beta22"] = math.pi * Q_const**2
        rel["beta11"] = _rel(coef["beta11"], pred["beta11"])
        rel["beta22"] = _rel(coef["beta22"], pred["beta22"])
        lin = linear_coefficients(base, settings)
        L0 = forward(base, settings, phase_check=False)
        p0, q0 = float(L0.p), float(L0.q)
        # linear terms implied by the expansions of a, b, c (reported, not asserted)
        extras = {
            "area0": area0,
            "P_const": P_const,
            "Q_const": Q_const,
            **lin,
            "beta1_from_A2": lin["A2"] + math.pi * P_const * p0,
            "beta2_from_A1": lin["A1"] + math.pi * Q_const * (p0 + q0),
        }
    for v in rel.values():
        if not math.isfinite(v):
            raise FitIllConditioned("relative error is not finite")
    resid = math.sqrt(sum(f.fit.residual_norm**2 for f in fits))
    return ExpansionReport(which, bdict, kmin, kmax, fits, coef, pred, rel, resid, extras)
