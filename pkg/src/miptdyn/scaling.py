"""
Finite-size and short-time scaling analysis of ensemble-averaged S(t).

Relaxation scaling form::

    S(t, g, L) = alpha * ln L + G(t L^-z, g L^(1/nu)),   g = p - p_c

Short-time asymptotics checked here: ``S ~ A t^-1`` with ``A ~ L`` from a
volume-law start, ``S = delta ln t + c`` with ``delta = alpha / z`` from a
product start, and the size-free form ``S = delta ln t + G4(g t^(1/(nu z)))``.

All entropies are in bits; ``ln`` is the natural logarithm, so ``alpha`` and
``delta`` are bits per e-fold of L or t.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .ensemble import EnsembleSeries

P_C = 0.15995
ALPHA = 1.57
NU = 1.260
Z = 1.0


@dataclass(frozen=True)
class ScalingParams:
    p_c: float = P_C
    alpha: float = ALPHA
    nu: float = NU
    z: float = Z

    def __post_init__(self):
        if not 0 < self.p_c < 1:
            raise ValueError("p_c must lie in (0, 1)")
        if self.nu <= 0 or self.z <= 0:
            raise ValueError("nu and z must be positive")

    @property
    def delta(self) -> float:
        return self.alpha / self.z

    def g(self, p: float) -> float:
        return p - self.p_c

    def w(self, p: float, L: int) -> float:
        return self.g(p) * L ** (1.0 / self.nu)

    def perturbed(self, factor: float, names=("alpha", "nu", "z")) -> "ScalingParams":
        return replace(self, **{k: getattr(self, k) * factor for k in names})


@dataclass
class RescaledCurve:
    x: np.ndarray
    y: np.ndarray
    yerr: np.ndarray
    L: int
    p: float
    w: float
    t: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not (len(self.x) == len(self.y) == len(self.yerr)):
            raise ValueError("x, y, yerr must share length")


@dataclass
class FitResult:
    model: str
    coefficients: dict
    window: tuple
    chi2_red: float
    n_points: int

    def __post_init__(self):
        lo, hi = self.window
        if not lo < hi:
            raise ValueError(f"fit window must satisfy lo < hi, got {self.window}")

    def value(self, name: str) -> float:
        return self.coefficients[name][0]

    def error(self, name: str) -> float:
        return self.coefficients[name][1]

    def to_dict(self) -> dict:
        return {"model": self.model,
                "coefficients": {k: {"value": v, "error": e} for k, (v, e) in self.coefficients.items()},
                "window": list(self.window), "chi2_red": self.chi2_red, "n_points": self.n_points}


class FitError(ValueError):
    pass


# ---------------------------------------------------------------- rescaling

def rescale(series: EnsembleSeries, params: ScalingParams, include_t0: bool = False) -> RescaledCurve:
    """``x = t L^-z``, ``y = S - alpha ln L``."""
    keep = series.t > 0 if not include_t0 else np.ones_like(series.t, dtype=bool)
    t = series.t[keep].astype(float)
    L = series.L
    return RescaledCurve(x=t * L ** (-params.z), y=series.S_mean[keep] - params.alpha * np.log(L),
                         yerr=series.S_stderr[keep].copy(), L=L, p=series.p,
                         w=params.w(series.p, L), t=t)


def unrescale(curve: RescaledCurve, params: ScalingParams) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`rescale`: returns ``(t, S_mean)``."""
    L = curve.L
    return curve.x * L ** params.z, curve.y + params.alpha * np.log(L)


def collapse_score(curves: list[RescaledCurve]) -> float:
    """Mean squared mismatch between curves, in units of the combined variance.

    Every point of every curve is compared with each other curve linearly
    interpolated at the same ``x`` (only where ``x`` lies inside that
    curve's range).  A zero combined variance counts as unit variance.
    Returns 0 for a perfect collapse.
    """
    if len(curves) < 2:
        raise ValueError("need at least two curves")
    prepared = []
    for c in curves:
        order = np.argsort(c.x, kind="stable")
        x = np.asarray(c.x, dtype=float)[order]
        if np.any(np.diff(x) <= 0):
            raise ValueError(f"curve L={c.L} p={c.p} has repeated x values")
        prepared.append((x, np.asarray(c.y, float)[order], np.asarray(c.yerr, float)[order]))
    total = 0.0
    count = 0
    for i, (xi, yi, ei) in enumerate(prepared):
        for j, (xj, yj, ej) in enumerate(prepared):
            if i == j:
                continue
            inside = (xi >= xj[0]) & (xi <= xj[-1])
            if not np.any(inside):
                continue
            xs = xi[inside]
            yj_at = np.interp(xs, xj, yj)
            ej_at = np.interp(xs, xj, ej)
            var = ei[inside] ** 2 + ej_at ** 2
            var = np.where(var > 0, var, 1.0)
            total += float(np.sum((yi[inside] - yj_at) ** 2 / var))
            count += int(inside.sum())
    if count == 0:
        raise ValueError("curves have no overlapping x range")
    return total / count


# ---------------------------------------------------------------- fits

def _wls(design: np.ndarray, y: np.ndarray, sigma: np.ndarray | None):
    """Weighted linear least squares; returns (coef, cov, chi2_red).

    With ``sigma`` the covariance is the inverse Fisher matrix, inflated by
    ``chi2_red`` when that exceeds one.  Without it the fit is unweighted
    and the covariance uses the residual variance.
    """
    m, k = design.shape
    if m <= k:
        raise FitError(f"need more than {k} points, got {m}")
    if sigma is not None:
        wts = 1.0 / sigma
        A = design * wts[:, None]
        b = y * wts
    else:
        A, b = design, y
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = b - A @ coef
    chi2_red = float(resid @ resid) / (m - k)
    cov = np.linalg.inv(A.T @ A)
    if sigma is None:
        cov = cov * chi2_red
    elif chi2_red > 1:
        cov = cov * chi2_red
    return coef, cov, chi2_red


def _sigma_or_none(err: np.ndarray) -> np.ndarray | None:
    err = np.asarray(err, dtype=float)
    if err.size == 0 or np.any(err <= 0) or not np.all(np.isfinite(err)):
        return None
    return err


def default_window(L: int) -> tuple[float, float]:
    return 4.0, float(min(L / 8, 100))


def _select(series: EnsembleSeries, window) -> tuple[np.ndarray, np.ndarray, np.ndarray, tuple]:
    if window is None:
        window = default_window(series.L)
    lo, hi = window
    keep = (series.t >= lo) & (series.t <= hi)
    return series.t[keep].astype(float), series.S_mean[keep], series.S_stderr[keep], (float(lo), float(hi))


def fit_power_decay(series: EnsembleSeries, window=None) -> FitResult:
    """Fit ``S = A t^b`` by weighted least squares of ``ln S`` on ``ln t``."""
    t, S, e, window = _select(series, window)
    return fit_power_law(t, S, e, window)


def fit_power_law(t, S, err=None, window=None) -> FitResult:
    t = np.asarray(t, float)
    S = np.asarray(S, float)
    if len(t) < 3:
        raise FitError(f"power-law fit needs at least 3 points, got {len(t)}")
    if np.any(S <= 0) or np.any(t <= 0):
        raise FitError("power-law fit needs positive t and S")
    sigma = None if err is None else _sigma_or_none(np.asarray(err, float) / S)
    design = np.column_stack([np.ones_like(t), np.log(t)])
    coef, cov, chi2 = _wls(design, np.log(S), sigma)
    amp = float(np.exp(coef[0]))
    if window is None:
        window = (float(t.min()), float(t.max()))
    return FitResult("power", {"exponent": (float(coef[1]), float(np.sqrt(cov[1, 1]))),
                               "amplitude": (amp, amp * float(np.sqrt(cov[0, 0])))},
                     window, chi2, len(t))


def fit_log_growth(series: EnsembleSeries, window=None) -> FitResult:
    """Fit ``S = delta ln t + c``."""
    t, S, e, window = _select(series, window)
    if window[0] <= 0:
        raise FitError("log-growth window must exclude t = 0")
    return fit_log_linear(t, S, e, window)


def fit_log_linear(u, y, err=None, window=None) -> FitResult:
    """Fit ``y = delta ln u + c`` for positive ``u``."""
    u = np.asarray(u, float)
    y = np.asarray(y, float)
    if len(u) < 3 or np.ptp(u) == 0:
        raise FitError("degenerate log-growth window")
    if np.any(u <= 0):
        raise FitError("log-growth fit needs positive abscissae")
    sigma = None if err is None else _sigma_or_none(err)
    design = np.column_stack([np.log(u), np.ones_like(u)])
    coef, cov, chi2 = _wls(design, y, sigma)
    if window is None:
        window = (float(u.min()), float(u.max()))
    return FitResult("log-linear", {"delta": (float(coef[0]), float(np.sqrt(cov[0, 0]))),
                                    "c": (float(coef[1]), float(np.sqrt(cov[1, 1])))},
                     window, chi2, len(u))


def fit_log_growth_rescaled(curve: RescaledCurve, x_window=None) -> FitResult:
    """Same log fit on a rescaled curve: ``y`` against ``ln(t L^-z)``."""
    x, y, e = curve.x, curve.y, curve.yerr
    if x_window is not None:
        keep = (x >= x_window[0]) & (x <= x_window[1])
        x, y, e = x[keep], y[keep], e[keep]
    return fit_log_linear(x, y, e, x_window)


def fit_steady_alpha(Ls, S, S_err=None) -> FitResult:
    """Slope of the steady-state ``S`` against ``ln L`` (the ``alpha`` estimate)."""
    Ls = np.asarray(Ls, float)
    S = np.asarray(S, float)
    if len(Ls) < 4:
        raise FitError(f"need at least 4 sizes, got {len(Ls)}")
    sigma = None if S_err is None else _sigma_or_none(S_err)
    design = np.column_stack([np.log(Ls), np.ones_like(Ls)])
    coef, cov, chi2 = _wls(design, S, sigma)
    return FitResult("linear", {"alpha": (float(coef[0]), float(np.sqrt(cov[0, 0]))),
                                "intercept": (float(coef[1]), float(np.sqrt(cov[1, 1])))},
                     (float(Ls.min()), float(Ls.max())), chi2, len(Ls))


def fit_linear(x, y, err=None) -> tuple[FitResult, float]:
    """Straight-line fit ``y = slope x + intercept``; also returns the R^2 of the fit."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    sigma = None if err is None else _sigma_or_none(err)
    design = np.column_stack([x, np.ones_like(x)])
    coef, cov, chi2 = _wls(design, y, sigma)
    pred = design @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    fit = FitResult("linear", {"slope": (float(coef[0]), float(np.sqrt(cov[0, 0]))),
                               "intercept": (float(coef[1]), float(np.sqrt(cov[1, 1])))},
                    (float(x.min()), float(x.max())), chi2, len(x))
    return fit, r2


def fit_volume_law_slope(Ls, S, S_err=None) -> FitResult:
    """Steady-state ``S`` against ``L`` at fixed ``g < 0`` (volume-law coefficient)."""
    return fit_linear(Ls, S, S_err)[0]


# ---------------------------------------------------------------- short-time off-critical form

def short_time_curves(series_list, params: ScalingParams, t_lo: float = 4, t_cut: float | None = None,
                      delta: float | None = None) -> list[RescaledCurve]:
    """Curves of ``S - delta ln t`` against ``g t^(1/(nu z))`` over ``t_lo <= t <= t_cut``."""
    if delta is None:
        delta = params.delta
    out = []
    for s in series_list:
        hi = t_cut if t_cut is not None else default_window(s.L)[1]
        keep = (s.t >= t_lo) & (s.t <= hi) & (s.t > 0)
        t = s.t[keep].astype(float)
        g = params.g(s.p)
        out.append(RescaledCurve(x=g * t ** (1.0 / (params.nu * params.z)),
                                 y=s.S_mean[keep] - delta * np.log(t), yerr=s.S_stderr[keep].copy(),
                                 L=s.L, p=s.p, w=params.w(s.p, s.L), t=t))
    return out


def short_time_offcritical_collapse(series_list, params: ScalingParams, t_lo: float = 4,
                                    t_cut: float | None = None, delta: float | None = None):
    """Return the short-time curves and their :func:`collapse_score`."""
    curves = short_time_curves(series_list, params, t_lo, t_cut, delta)
    return curves, collapse_score(curves)


def max_pointwise_deviation(a: RescaledCurve, b: RescaledCurve) -> float:
    """Largest ``|y_a - y_b| / sqrt(e_a^2 + e_b^2)`` over points of ``a`` inside ``b``'s range."""
    ob = np.argsort(b.x)
    xb, yb, eb = b.x[ob], b.y[ob], b.yerr[ob]
    inside = (a.x >= xb[0]) & (a.x <= xb[-1])
    if not np.any(inside):
        raise ValueError("curves have no overlapping x range")
    yb_at = np.interp(a.x[inside], xb, yb)
    eb_at = np.interp(a.x[inside], xb, eb)
    z = np.abs(a.y[inside] - yb_at) / np.sqrt(a.yerr[inside] ** 2 + eb_at ** 2)
    return float(z.max())


def refine_pc_nu(series_list, params: ScalingParams, pc_grid, nu_grid, t_lo=4, t_cut=None):
    """Grid search of ``(p_c, nu)`` minimizing the short-time collapse score."""
    best = None
    scores = np.full((len(pc_grid), len(nu_grid)), np.nan)
    for i, pc in enumerate(pc_grid):
        for j, nu in enumerate(nu_grid):
            trial = replace(params, p_c=float(pc), nu=float(nu))
            try:
                _, sc = short_time_offcritical_collapse(series_list, trial, t_lo, t_cut)
            except ValueError:
                continue
            scores[i, j] = sc
            if best is None or sc < best[0]:
                best = (sc, trial)
    if best is None:
        raise ValueError("no grid point produced overlapping curves")
    return best[1], scores


# ---------------------------------------------------------------- critical scan

@dataclass
class Curvature:
    p: float
    classification: str
    curvature: float
    error: float

    @property
    def significance(self) -> float:
        return abs(self.curvature) / self.error if self.error > 0 else float("inf")


@dataclass
class ScanResult:
    entries: list
    bracket: tuple | None
    message: str

    def to_dict(self) -> dict:
        return {"entries": [vars(e) for e in self.entries],
                "bracket": list(self.bracket) if self.bracket else None, "message": self.message}


def curvature_in_log_time(series: EnsembleSeries, window, threshold: float = 2.0) -> Curvature:
    """Fit ``S = a + b u + c u^2`` with ``u = ln t`` and classify the sign of ``c``."""
    t, S, e, _ = _select(series, window)
    if len(t) < 4 or t.min() <= 0:
        raise FitError("curvature fit needs at least 4 points with t > 0")
    u = np.log(t)
    design = np.column_stack([np.ones_like(u), u, u ** 2])
    coef, cov, _ = _wls(design, S, _sigma_or_none(e))
    c, err = float(coef[2]), float(np.sqrt(cov[2, 2]))
    if abs(c) <= threshold * err:
        label = "flat"
    else:
        label = "upward" if c > 0 else "downward"
    return Curvature(float(series.p), label, c, err)


def critical_scan(series_list, window=None, threshold: float = 2.0) -> ScanResult:
    """Classify semi-log curvature per ``p`` and bracket the critical point.

    The bracket runs from the largest ``p`` curving upward to the smallest
    ``p`` curving downward.
    """
    entries = []
    for s in sorted(series_list, key=lambda s: s.p):
        win = window if window is not None else default_window(s.L)
        entries.append(curvature_in_log_time(s, win, threshold))
    up = [e.p for e in entries if e.classification == "upward"]
    down = [e.p for e in entries if e.classification == "downward"]
    if not up or not down:
        side = "above" if not up else "below"
        return ScanResult(entries, None, f"p_c outside grid (all points {side} or flat)")
    lo, hi = max(up), min(down)
    if lo > hi:
        lo, hi = min(lo, hi), max(lo, hi)
        return ScanResult(entries, (lo, hi), "non-monotone classification; bracket widened")
    return ScanResult(entries, (lo, hi), "ok")
