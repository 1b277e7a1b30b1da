"""Generalised exponentials and growth diagnostics for entire functions.

All series here have the shape

    S_h(x) = sum_{q >= 0} binom(q + h, h) x^q / m(q + h)

for a sequence of quotients ``theta_p = m(p)/m(p-1)``.  ``h = 0`` gives the
exponential ``E_m``, ``h = 1`` its classical derivative, and
``z^h S_h(lambda z)`` the chain function ``E_{alpha,h}(lambda z)``.

Summation stops once the quotient dominates (``|x|/theta < 1/2``) so the
remaining tail is bounded by twice the first omitted term.  Where the partial
sums cancel heavily (left half-plane) the sum is redone in extended precision
with mpmath, which is why evaluation stays accurate for values such as
``E_{-1/2}(-60) = e^{-60}``.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from ._numerics import csum_rows, least_squares_line
from .errors import ConvergenceError, DomainError
from .sequences import Family, log_dunkl_factorial

DEFAULT_CAP = 10_000
_EPS = np.finfo(float).eps
# re-sum in extended precision when sum|t_p| / |sum t_p| exceeds this
MAX_CANCELLATION = 1e3
_cancellation_limit = contextvars.ContextVar("cancellation_limit", default=MAX_CANCELLATION)


@contextlib.contextmanager
def relaxed_cancellation():
    """Skip extended-precision re-summation inside the block.

    Values then carry an absolute error of order ``eps * sum |t_p|``, which is
    harmless when only the maximum modulus on a circle is wanted.
    """
    token = _cancellation_limit.set(math.inf)
    try:
        yield
    finally:
        _cancellation_limit.reset(token)


# -- quotient providers ---------------------------------------------------

class _Quotients:
    """Quotient sequence with float and mpmath evaluators.

    ``log_m(p)`` is only needed for the leading term of ``S_h``.
    """

    def __init__(self, fn, fn_mp, log_m):
        self.fn = fn
        self.fn_mp = fn_mp
        self.log_m = log_m


def _dunkl_quotients(alpha):
    if not alpha > -1:
        raise DomainError("alpha must exceed -1")
    shift = 2.0 * alpha + 1.0

    def fn(p):
        return p + shift if p % 2 else float(p)

    def fn_mp(p):
        return mpmath.mpf(p) + (2 * mpmath.mpf(alpha) + 1 if p % 2 else 0)

    return _Quotients(fn, fn_mp, lambda p: log_dunkl_factorial(p, alpha))


def _sequence_quotients(seq):
    if seq.family is Family.DUNKL:
        return _dunkl_quotients(seq.alpha)
    if seq.family is Family.FACTORIAL:
        return _Quotients(float, mpmath.mpf, lambda p: math.lgamma(p + 1.0))
    return _Quotients(
        seq.quotient, lambda p: mpmath.mpf(seq.quotient(p)), lambda p: seq.log(p)
    )


def _paired_quotients(alpha, offset):
    """Quotients of the even (``offset=0``) or odd (``offset=1``) Dunkl subsequence in ``z^2``."""
    base = _dunkl_quotients(alpha)

    def fn(k):
        return base.fn(2 * k - 1 + offset) * base.fn(2 * k + offset)

    def fn_mp(k):
        return base.fn_mp(2 * k - 1 + offset) * base.fn_mp(2 * k + offset)

    def log_m(k):
        return log_dunkl_factorial(2 * k + offset, alpha) - log_dunkl_factorial(offset, alpha)

    return _Quotients(fn, fn_mp, log_m)


# -- core summation -------------------------------------------------------

@dataclass(frozen=True)
class EvalResult:
    """Value of a series together with its truncation diagnostics.

    ``bound_on_tail`` is twice the first omitted term plus the rounding of
    the final correctly rounded sum.
    """

    value: complex
    terms_used: int
    bound_on_tail: float
    extended_precision: bool = False

    def __complex__(self):
        return complex(self.value)


def _sum_mp(x, h, quots, tol, cap, cancellation):
    """Re-sum ``S_h(x)`` with mpmath using enough digits to absorb the cancellation.

    Runs its own stopping rule relative to the (small) exact sum, so it may
    need many more terms than the double-precision pass.
    Returns ``(value, terms_used, tail_bound)``.
    """
    dps = 25 + int(math.ceil(math.log10(max(cancellation, 1.0))))
    ax = abs(x)
    for _ in range(6):
        with mpmath.workdps(min(dps, 4000)):
            xm = mpmath.mpc(x)
            # leading term 1/m(h) = 1/(m(0) theta_1 ... theta_h)
            t = mpmath.exp(-mpmath.mpf(quots.log_m(0)))
            for p in range(1, h + 1):
                t /= quots.fn_mp(p)
            total = t
            absolute = abs(t)
            k = 0
            while True:
                ratio = (k + h + 1.0) / (k + 1.0) * ax / quots.fn(k + h + 1)
                if ratio < 0.5 and abs(t) < tol * 1e-3 * abs(total):
                    break
                k += 1
                if k > cap:
                    raise ConvergenceError(f"extended-precision series exceeded {cap} terms")
                t = t * xm * (k + h) / k / quots.fn_mp(k + h)
                total += t
                absolute += abs(t)
            digits_lost = mpmath.log10(absolute / abs(total)) if total != 0 else dps
            if digits_lost < dps - 20:
                tail = float(2 * abs(t) * ratio)
                return complex(total), k + 1, tail
        dps *= 2
    raise ConvergenceError("extended-precision re-summation did not settle")


def _adaptive_sum(x, h, quots, tol, cap=DEFAULT_CAP, max_cancellation=None):
    """Vectorised evaluation of ``S_h`` at every entry of ``x``.

    Returns ``(values, terms_used, tail_bound, extended)`` arrays.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if max_cancellation is None:
        max_cancellation = _cancellation_limit.get()
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    ax = np.abs(x)
    first = math.exp(-quots.log_m(h))
    t = np.full(x.shape, first, dtype=complex)
    columns = [t]
    partial = t.copy()
    absolute = np.abs(t)
    active = np.ones(x.shape, dtype=bool)
    streak = np.zeros(x.shape, dtype=int)
    need = 8 if h else 0
    prev = np.abs(t)
    used = np.zeros(x.shape, dtype=int)
    tail = np.zeros(x.shape)
    k = 0
    while True:
        ratio = (k + h + 1.0) / (k + 1.0) * ax / quots.fn(k + h + 1)
        at = np.abs(t)
        done = active & (ratio < 0.5) & (at < tol * np.maximum(1.0, np.abs(partial))) & (
            streak >= need
        )
        tail[done] = 2.0 * at[done] * ratio[done]
        used[done] = k + 1
        active &= ~done
        if not active.any():
            break
        k += 1
        if k > cap:
            raise ConvergenceError(
                f"series did not converge within {cap} terms (|x| up to {ax.max():.3g})"
            )
        with np.errstate(over="ignore", invalid="ignore"):
            t = np.where(active, t * x * ((k + h) / k / quots.fn(k + h)), 0.0)
        at = np.abs(t)
        if not np.all(np.isfinite(at)):
            raise ConvergenceError(f"series terms overflowed (|x| up to {ax.max():.3g})")
        streak = np.where((at < prev) | (at == 0), streak + 1, 0)
        prev = at
        columns.append(t)
        partial = partial + t
        absolute += at
    values = csum_rows(np.array(columns)) if len(columns) > 1 else columns[0].copy()
    extended = np.zeros(x.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.where(np.abs(values) > 0, absolute / np.abs(values), np.inf)
    for i in np.nonzero(kappa > max_cancellation)[0]:
        values[i], used[i], tail[i] = _sum_mp(complex(x[i]), h, quots, tol, cap, float(kappa[i]))
        extended[i] = True
    tail = tail + 2.0 * _EPS * np.abs(values)
    return values, used, tail, extended


def _scalar(x, h, quots, tol, cap):
    values, used, tail, ext = _adaptive_sum([x], h, quots, tol, cap)
    return EvalResult(complex(values[0]), int(used[0]), float(tail[0]), bool(ext[0]))


# -- public evaluators ----------------------------------------------------

def E_m(z, seq, tol=1e-15, cap=DEFAULT_CAP):
    """Generalised exponential ``sum_p z^p / m(p)``."""
    return _scalar(complex(z), 0, _sequence_quotients(seq), tol, cap)


def E_m_array(z, seq, tol=1e-15, cap=DEFAULT_CAP):
    """Vectorised :func:`E_m` returning plain values."""
    z = np.asarray(z, dtype=complex)
    values, *_ = _adaptive_sum(z.ravel(), 0, _sequence_quotients(seq), tol, cap)
    return values.reshape(z.shape)


def E_m_prime(z, seq, tol=1e-15, cap=DEFAULT_CAP):
    """Classical derivative ``sum_p p z^(p-1) / m(p)`` (termwise differentiation)."""
    return _scalar(complex(z), 1, _sequence_quotients(seq), tol, cap)


def E_m_prime_array(z, seq, tol=1e-15, cap=DEFAULT_CAP):
    z = np.asarray(z, dtype=complex)
    values, *_ = _adaptive_sum(z.ravel(), 1, _sequence_quotients(seq), tol, cap)
    return values.reshape(z.shape)


def E_alpha(z, alpha, tol=1e-15, cap=DEFAULT_CAP):
    """Dunkl exponential ``sum_p z^p / gamma_{p,alpha}``."""
    return _scalar(complex(z), 0, _dunkl_quotients(alpha), tol, cap)


def E_alpha_array(z, alpha, tol=1e-15, cap=DEFAULT_CAP):
    z = np.asarray(z, dtype=complex)
    values, *_ = _adaptive_sum(z.ravel(), 0, _dunkl_quotients(alpha), tol, cap)
    return values.reshape(z.shape)


def I_alpha(z, alpha, tol=1e-15, cap=DEFAULT_CAP):
    """Even part ``sum_p z^(2p) / gamma_{2p,alpha}`` (normalised Bessel function)."""
    z = complex(z)
    r = _scalar(z * z, 0, _paired_quotients(alpha, 0), tol, cap)
    return EvalResult(r.value, 2 * r.terms_used, r.bound_on_tail, r.extended_precision)


def G_alpha(z, alpha, tol=1e-15, cap=DEFAULT_CAP):
    """Odd companion ``G_alpha(z) = z I_{alpha+1}(z)``."""
    z = complex(z)
    r = I_alpha(z, alpha + 1.0, tol, cap)
    return EvalResult(z * r.value, r.terms_used, abs(z) * r.bound_on_tail, r.extended_precision)


def G_alpha_odd_sum(z, alpha, tol=1e-15, cap=DEFAULT_CAP):
    """Cross-check form ``2(alpha+1) sum_p z^(2p+1) / gamma_{2p+1,alpha}``."""
    z = complex(z)
    r = _scalar(z * z, 0, _paired_quotients(alpha, 1), tol, cap)
    # 2(alpha+1)/gamma_{1,alpha} = 1
    return EvalResult(z * r.value, 2 * r.terms_used + 1, abs(z) * r.bound_on_tail,
                      r.extended_precision)


def E_alpha_h(lam, z, h, alpha, tol=1e-15, cap=DEFAULT_CAP):
    """Chain function ``sum_{p>=h} binom(p,h) lam^(p-h) z^p / gamma_{p,alpha}``."""
    if h < 0:
        raise DomainError("h must be nonnegative")
    lam = complex(lam)
    z = complex(z)
    r = _scalar(lam * z, h, _dunkl_quotients(alpha), tol, cap)
    zh = z**h
    return EvalResult(zh * r.value, r.terms_used + h, abs(zh) * r.bound_on_tail,
                      r.extended_precision)


def E_alpha_h_array(lam, z, h, alpha, tol=1e-15, cap=DEFAULT_CAP):
    z = np.asarray(z, dtype=complex)
    values, *_ = _adaptive_sum((complex(lam) * z).ravel(), h, _dunkl_quotients(alpha), tol, cap)
    return (z.ravel() ** h * values).reshape(z.shape)


# -- growth diagnostics ---------------------------------------------------

def _evaluate(f, points):
    points = np.asarray(points, dtype=complex)
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.asarray(f(points), dtype=complex)
        if out.shape == points.shape:
            return out
    except (TypeError, ValueError, ArithmeticError):
        pass
    out = np.empty(points.shape, dtype=complex)
    for i, p in enumerate(points.ravel()):
        try:
            out.flat[i] = complex(f(complex(p)))
        except ArithmeticError:
            # overflow or a non-terminating series: saturated sample
            out.flat[i] = complex(np.inf)
    return out


@dataclass
class GrowthReport:
    radii: np.ndarray
    log_max_modulus: np.ndarray
    rho: float
    sigma: float
    indicator: list
    saturated: list = field(default_factory=list)

    @property
    def max_modulus(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_max_modulus)

    def to_dict(self):
        return {
            "radii": [float(r) for r in self.radii],
            "log_max_modulus": [float(v) for v in self.log_max_modulus],
            "rho": self.rho,
            "sigma": self.sigma,
            "indicator": [dict(d) for d in self.indicator],
            "saturated": [float(r) for r in self.saturated],
        }


def growth_scan(f, radii, directions=(), samples=256):
    """Estimate order, type and indicator of an entire function from samples.

    ``f`` should accept numpy arrays; scalar-only callables are looped over.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 2 or np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise DomainError("radii must be positive, increasing, with at least two values")
    if samples < 256:
        raise DomainError("use at least 256 samples per circle")
    directions = np.asarray(directions, dtype=float)
    if directions.size and np.any(np.abs(directions) > math.pi + 1e-12):
        raise DomainError("directions must lie in [-pi, pi]")
    phases = np.exp(2j * math.pi * np.arange(samples) / samples)
    logmax = np.full(radii.size, np.nan)
    saturated = []
    for i, r in enumerate(radii):
        with relaxed_cancellation():
            vals = _evaluate(f, r * phases)
        mags = np.abs(vals)
        if not np.all(np.isfinite(mags)):
            saturated.append(float(r))
            continue
        peak = mags.max()
        logmax[i] = math.log(peak) if peak > 0 else -np.inf
    ok = np.isfinite(logmax)
    usable = np.nonzero(ok)[0]
    if usable.size < 2:
        raise ConvergenceError("fewer than two unsaturated radii")
    top = usable[usable >= radii.size // 2]
    if top.size < 2:
        top = usable[-2:]
    lnr = np.log(radii[top])
    # ln+(ln+ M) formed from log M to avoid overflow
    y = np.log(np.maximum(np.maximum(logmax[top], 0.0), 1.0))
    rho, _, _ = least_squares_line(lnr, y)
    rho = max(rho, 0.0)
    r_big = radii[usable[-1]]
    sigma = max(logmax[usable[-1]], 0.0) / r_big**rho
    indicator = []
    if directions.size:
        last_two = radii[usable[-2:]]
        for theta in directions:
            hs = []
            for r in last_two:
                val = _evaluate(f, np.array([r * np.exp(1j * theta)]))[0]
                mag = abs(val)
                hs.append(math.log(mag) / r**rho if mag > 0 else -math.inf)
            indicator.append({"theta": float(theta), "h": float(max(hs)),
                              "h_by_radius": [float(v) for v in hs]})
    return GrowthReport(radii, logmax, float(rho), float(sigma), indicator, saturated)


@dataclass
class DecayReport:
    theta: float
    radii: np.ndarray
    log_abs: np.ndarray
    beta: float
    k5: float
    residual: float
    decaying: bool

    def to_dict(self):
        return {
            "theta": self.theta,
            "radii": self.radii.tolist(),
            "log_abs": self.log_abs.tolist(),
            "beta": self.beta,
            "k5": self.k5,
            "residual": self.residual,
            "decaying": self.decaying,
        }


def decay_scan(f, theta, radii):
    """Fit ``log|f(r e^{i theta})| ~ log k5 - beta log r`` along one ray."""
    radii = np.asarray(radii, dtype=float)
    if radii.size < 2 or np.any(np.diff(radii) <= 0):
        raise DomainError("radii must be increasing with at least two values")
    vals = _evaluate(f, radii * np.exp(1j * theta))
    mags = np.abs(vals)
    keep = mags > 0
    r = radii[keep]
    la = np.log(mags[keep])
    slope, intercept, resid = least_squares_line(np.log(r), la)
    top = la[r.size // 2:]
    decaying = bool(top.size >= 2 and np.all(np.diff(top) < 0))
    return DecayReport(float(theta), r, la, -slope, math.exp(intercept), resid, decaying)
