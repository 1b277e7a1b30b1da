"""Modified Bessel ``K`` on the positive axis and the Hamburger weight of ``gamma_{n,alpha}``.

For ``-1 < alpha < -1/2`` the Dunkl factorials are the moments
``gamma_{n,alpha} = int t^n w_alpha(t) dt`` of

    w_alpha(t) = |t|^(alpha+1) (K_alpha(|t|) + sgn(t) K_{alpha+1}(|t|)) / (2^(alpha+1) Gamma(alpha+1)).

Everything here is quadrature: ``K`` from ``int_0^inf exp(-t cosh u) cosh(alpha u) du``
(already doubly exponentially decaying, so the plain trapezoid rule converges
geometrically), the moments from an exp-sinh substitution on ``(0, inf)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, QuadratureError
from .sequences import dunkl_factorial

_LOG_FLOOR = math.log(1e-18)
_K_RTOL = 1e-14
_K_MAX_LEVELS = 14


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def _k_log_integrand(u, t, a):
    # -t (cosh u - 1) + log cosh(a u), overflow-free for large u
    return t - np.exp(math.log(t) + _log_cosh(u)) + _log_cosh(a * u)


def _k_integrand(u, t, a):
    return np.exp(_k_log_integrand(u, t, a))


def _k_cutoff(t, a):
    """Point beyond which ``exp(-t(cosh u - 1)) cosh(a u)`` stays below 1e-18 of its peak."""
    upper = 4.0
    while True:
        u = np.linspace(0.0, upper, 400)
        g = _k_log_integrand(u, t, a)
        peak = g.max()
        if g[-1] < peak + _LOG_FLOOR and g[-1] < g[-2]:
            above = np.nonzero(g >= peak + _LOG_FLOOR)[0]
            return float(u[min(above[-1] + 1, u.size - 1)])
        upper *= 1.5


def bessel_K_scaled(alpha, t):
    """``(exp(t) K_alpha(t), error estimate)`` for real ``alpha`` and ``t > 0``."""
    t = float(t)
    if not t > 0 or not math.isfinite(t):
        raise DomainError("K is evaluated on the positive real axis only")
    a = abs(float(alpha))
    cutoff = _k_cutoff(t, a)
    h = cutoff / 8.0
    u = np.arange(0.0, cutoff + 0.5 * h, h)
    f = _k_integrand(u, t, a)
    total = h * (math.fsum(f.tolist()) - 0.5 * f[0])
    for _ in range(_K_MAX_LEVELS):
        mids = np.arange(h / 2, cutoff, h)
        fm = _k_integrand(mids, t, a)
        refined = 0.5 * total + 0.5 * h * math.fsum(fm.tolist())
        err = abs(refined - total)
        total, h = refined, h / 2
        if err <= _K_RTOL * abs(total):
            return total, max(err, 4 * np.finfo(float).eps * total)
    raise QuadratureError("K quadrature did not converge", total, err)


def bessel_K(alpha, t):
    """``K_alpha(t)`` for ``t > 0``."""
    value, _ = bessel_K_scaled(alpha, t)
    return value * math.exp(-float(t))


# -- weights ---------------------------------------------------------------

def _check_alpha(alpha):
    if not -1.0 < alpha < -0.5:
        raise DomainError("the moment representation is available for -1 < alpha < -1/2")


def _norm(alpha):
    # Gamma(alpha + 1) > 0 on (0, 1/2)
    return (alpha + 1.0) * math.log(2.0) + math.lgamma(alpha + 1.0)


@dataclass(frozen=True)
class WeightEval:
    t: float
    value: float
    quadrature_error_estimate: float


def _weight_parts(alpha, s):
    """Scaled ``(K_alpha(s), K_{alpha+1}(s))`` with errors, times ``s^(alpha+1) e^(-s)`` / norm."""
    ka, ea = bessel_K_scaled(alpha, s)
    kb, eb = bessel_K_scaled(alpha + 1.0, s)
    logpre = (alpha + 1.0) * math.log(s) - s - _norm(alpha)
    pre = math.exp(logpre)
    return pre * ka, pre * kb, pre * (ea + eb)


def weight(alpha, t, split=None):
    """``w_alpha(t)``; with ``split`` in ``{"+", "-"}`` the half-line weight ``w_{alpha,+-}(t)``, ``t > 0``."""
    alpha = float(alpha)
    t = float(t)
    _check_alpha(alpha)
    if t == 0 or not math.isfinite(t):
        raise DomainError("t must be finite and nonzero")
    if split is None:
        sign = 1.0 if t > 0 else -1.0
    elif split in ("+", "-"):
        if t < 0:
            raise DomainError("split weights are defined for t > 0")
        sign = 1.0 if split == "+" else -1.0
    else:
        raise DomainError("split must be None, '+' or '-'")
    a, b, err = _weight_parts(alpha, abs(t))
    return WeightEval(t, a + sign * b, err)


# -- moments ---------------------------------------------------------------

_DE_LEVELS = 7
_DE_RIGHT = 3.6  # t = exp(pi/2 sinh 3.6) ~ 7e12; the integrand is long gone


@lru_cache(maxsize=64)
def _weight_nodes(alpha, level, left):
    """exp-sinh nodes and the split weights there (cached across ``n``)."""
    h = 2.0 ** -level
    x = np.arange(math.floor(-left / h) * h, _DE_RIGHT + h / 2, h)
    s = np.exp(0.5 * math.pi * np.sinh(x))
    jac = s * 0.5 * math.pi * np.cosh(x)
    keep = (s > 0) & (s < 700.0)
    wp = np.zeros_like(s)
    wm = np.zeros_like(s)
    for i in np.nonzero(keep)[0]:
        a, b, _ = _weight_parts(alpha, float(s[i]))
        wp[i] = a + b
        wm[i] = a - b
    return s, jac * h, wp, wm


def _left_extent(n, alpha):
    # near 0 the integrand behaves like s^(n + 2 + 2 alpha) in s d(log s)
    power = n + 2.0 + 2.0 * alpha
    log_s = _LOG_FLOOR * 2.5 / power
    return math.asinh(-log_s / (0.5 * math.pi))


def _moment_sum(n, alpha, level):
    s, w, wp, wm = _weight_nodes(alpha, level, round(_left_extent(n, alpha), 1))
    with np.errstate(under="ignore"):
        powers = s**n
    plus = math.fsum((powers * wp * w).tolist())
    minus = math.fsum((powers * wm * w).tolist())
    return plus, minus


@dataclass(frozen=True)
class MomentResult:
    n: int
    alpha: float
    value: float
    error_estimate: float
    plus: float
    minus: float

    @property
    def closed_form(self):
        return dunkl_factorial(self.n, self.alpha)

    @property
    def rel_error(self):
        exact = self.closed_form
        return abs(self.value - exact) / exact


def moment_quadrature(n, alpha, rtol=1e-10):
    """``int t^n w_alpha(t) dt`` as ``gamma^+ + (-1)^n gamma^-`` with an error estimate."""
    alpha = float(alpha)
    _check_alpha(alpha)
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= 12):
        raise DomainError("n must be an integer in [0, 12]")
    sign = -1.0 if n % 2 else 1.0
    prev = None
    for level in range(3, _DE_LEVELS + 1):
        plus, minus = _moment_sum(int(n), alpha, level)
        value = plus + sign * minus
        if prev is not None:
            err = abs(value - prev)
            if err <= rtol * abs(value):
                return MomentResult(int(n), alpha, value, err, plus, minus)
        prev = value
    raise QuadratureError("moment quadrature did not converge", value, err)


def moment_table(alphas, nmax):
    rows = []
    for alpha in alphas:
        for n in range(nmax + 1):
            r = moment_quadrature(n, alpha)
            rows.append({"n": n, "alpha": alpha, "gamma_closed_form": r.closed_form,
                         "gamma_quadrature": r.value, "rel_error": r.rel_error})
    return rows


def moment_table_csv(rows):
    buf = io.StringIO()
    fields = ["n", "alpha", "gamma_closed_form", "gamma_quadrature", "rel_error"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(float(row[k])) if k != "n" else row[k]) for k in fields})
    return buf.getvalue()


# -- complete monotonicity -------------------------------------------------

@dataclass
class MonotonicityVerdict:
    orders: list  # {"order", "ok", "worst"}

    @property
    def ok(self):
        return all(o["ok"] for o in self.orders)

    def first_failure(self):
        for o in self.orders:
            if not o["ok"]:
                return o["order"]
        return None


def complete_monotonicity_spot(fn, grid, k=4):
    """Sign pattern ``(-1)^j Delta^j fn >= -eps_j`` of forward differences, ``j = 1..k``."""
    grid = np.asarray(grid, dtype=float)
    if not 1 <= k <= 6:
        raise DomainError("order must be in 1..6")
    if grid.size < k + 2 or np.any(grid <= 0):
        raise DomainError("grid must be positive with at least k + 2 points")
    steps = np.diff(grid)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps.mean():
        raise DomainError("grid must be strictly increasing and uniform")
    vals = np.array([float(fn(t)) for t in grid])
    scale = np.abs(vals).max()
    orders = []
    for j in range(1, k + 1):
        signed = (-1) ** j * np.diff(vals, j)
        eps = 1e-7 * scale * 2.0**j
        orders.append({"order": j, "ok": bool(np.all(signed >= -eps)), "worst": float(signed.min())})
    return MonotonicityVerdict(orders)
