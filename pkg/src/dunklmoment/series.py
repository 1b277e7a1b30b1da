"""Truncated power series and the moment-derivative family of operators.

Series are stored by plain Taylor coefficients ``c_p`` of ``z^p``.  The
moment coefficients ``a_p = c_p m(p)`` would overflow long before the
truncation orders used here, so they are never formed.

Operators never raise the truncation order: an order-``N`` input produces an
order-``N`` (translations) or order-``N-1`` (derivatives) output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ._numerics import csum_rows
from .errors import DomainError


class TruncatedSeries:
    """Immutable degree-``N`` complex polynomial ``sum c_p z^p``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(c)):
            raise DomainError("series coefficients must be finite")
        c.setflags(write=False)
        self._c = c

    @classmethod
    def zero(cls, order=0):
        return cls(np.zeros(order + 1))

    @classmethod
    def monomial(cls, p, order=None, coeff=1.0):
        order = p if order is None else order
        c = np.zeros(order + 1, dtype=complex)
        c[p] = coeff
        return cls(c)

    @classmethod
    def exponential(cls, seq, order, scale=1.0):
        """Truncation of ``E_m(scale * z)``: ``c_p = scale^p / m(p)``."""
        p = np.arange(order + 1)
        if scale == 0:
            return cls.monomial(0, order)
        logs = np.asarray(seq.log_values[: order + 1])
        if logs.size < order + 1:
            seq.log(order)  # raises CapacityError
        mag = np.exp(p * math.log(abs(scale)) - logs)
        return cls(mag * np.exp(1j * p * np.angle(scale)))

    @property
    def coeffs(self):
        return self._c

    @property
    def order(self):
        return self._c.size - 1

    @property
    def degree(self):
        nz = np.nonzero(np.abs(self._c) > 0)[0]
        return int(nz[-1]) if nz.size else -1

    def __len__(self):
        return self._c.size

    def __call__(self, z):
        return self.evaluate(z)

    def evaluate(self, z):
        """Horner evaluation; accepts scalars or numpy arrays."""
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in self._c[::-1]:
            acc = acc * z + c
        return complex(acc) if acc.ndim == 0 else acc

    def truncate(self, order):
        if order >= self.order:
            return self.pad(order)
        return TruncatedSeries(self._c[: order + 1])

    def pad(self, order):
        if order <= self.order:
            return self
        c = np.zeros(order + 1, dtype=complex)
        c[: self._c.size] = self._c
        return TruncatedSeries(c)

    def _aligned(self, other):
        n = max(self.order, other.order)
        return self.pad(n)._c, other.pad(n)._c

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        a, b = self._aligned(other)
        return TruncatedSeries(a + b)

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        a, b = self._aligned(other)
        return TruncatedSeries(a - b)

    def __neg__(self):
        return TruncatedSeries(-self._c)

    def __mul__(self, scalar):
        if isinstance(scalar, TruncatedSeries):
            return NotImplemented
        return TruncatedSeries(self._c * complex(scalar))

    __rmul__ = __mul__

    def allclose(self, other, rtol=1e-12, atol=0.0):
        a, b = self._aligned(other)
        return bool(np.allclose(a, b, rtol=rtol, atol=atol))

    def __repr__(self):
        return f"TruncatedSeries(order={self.order}, degree={self.degree})"

    # -- interchange ------------------------------------------------------
    def to_json(self):
        return json.dumps([[c.real, c.imag] for c in self._c.tolist()])

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else text
        def entry(x):
            if isinstance(x, (int, float)) and not isinstance(x, bool):
                return complex(x)
            re, im = x
            return complex(re, im)

        try:
            return cls([entry(x) for x in data])
        except (TypeError, ValueError) as exc:
            raise DomainError(f"series JSON must be a list of numbers or [re, im] pairs: {exc}") from None

    def pretty(self, digits=6, var="z"):
        parts = []
        for p, c in enumerate(self._c.tolist()):
            if c == 0:
                continue
            if c.imag == 0:
                num = f"{c.real:.{digits}g}"
            else:
                num = f"({c.real:.{digits}g}{c.imag:+.{digits}g}j)"
            mono = "" if p == 0 else (var if p == 1 else f"{var}^{p}")
            parts.append(num if not mono else f"{num}*{mono}")
        return " + ".join(parts) if parts else "0"


# -- derivatives ----------------------------------------------------------

def moment_derivative(f, seq):
    """``d_m f``: Taylor coefficient ``c_{p+1} m(p+1)/m(p)`` at degree ``p``."""
    if f.order == 0:
        return TruncatedSeries.zero(0)
    theta = seq.quotients(f.order)[1:]
    return TruncatedSeries(f.coeffs[1:] * theta)


def dunkl_apply_direct(f, alpha):
    """Dunkl operator ``f' + (2 alpha + 1)/2 (f(z) - f(-z))/z`` acting on coefficients.

    The difference quotient is formed coefficient-wise: ``(f(z)-f(-z))/z``
    keeps only the odd powers, each doubled and lowered by one degree.
    """
    if not alpha > -1:
        raise DomainError("alpha must exceed -1")
    if f.order == 0:
        return TruncatedSeries.zero(0)
    c = f.coeffs
    p = np.arange(1, f.order + 1)
    derivative = p * c[1:]
    odd = (p % 2 == 1)
    reflection = np.where(odd, 2.0 * c[1:], 0.0)
    return TruncatedSeries(derivative + (2.0 * alpha + 1.0) / 2.0 * reflection)


def iterated_moment_derivative(f, seq, times):
    """``d_m^times f`` by direct coefficient shift with a product of quotients."""
    if times > f.order:
        return TruncatedSeries.zero(0)
    if times == 0:
        return f
    n = f.order
    theta = seq.quotients(n)
    out = np.array(f.coeffs[times:], dtype=complex)
    for k in range(1, times + 1):
        # factor m(j+k)/m(j+k-1) for every output degree j
        out *= theta[k : k + out.size]
    return TruncatedSeries(out)


# -- translations ---------------------------------------------------------

def _scaled_derivative_table(f, y, seq):
    """Rows ``(y^p / m(p)) d_m^p f`` padded to order ``N``, one per ``p = 0..N``.

    Each row is obtained from the previous one by moment-differentiation and
    multiplication by ``y / theta_p``, so no factorials are ever formed.
    """
    n = f.order
    theta = seq.quotients(n)
    rows = []
    cur = np.array(f.coeffs, dtype=complex)
    for p in range(n + 1):
        row = np.zeros(n + 1, dtype=complex)
        row[: cur.size] = cur
        rows.append(row)
        if p == n:
            break
        # cur holds y^p/m(p) d^p f; advance to p+1
        cur = cur[1:] * theta[1 : cur.size] * (y / theta[p + 1])
    return np.array(rows)


def m_translate(f, y, seq):
    """Generalised translation ``sum_p y^p/m(p) d_m^p f``, truncated at the input order.

    When ``f`` approximates a function holomorphic on ``D(0, R)`` the result is
    meaningful for ``|y| < R / A1`` with ``A1`` the moderate-growth constant of
    ``seq``; choosing ``y`` inside that disc is the caller's responsibility.
    """
    if y == 0:
        return f
    table = _scaled_derivative_table(f, complex(y), seq)
    return TruncatedSeries(csum_rows(table))


def even_translate(f, y, seq):
    """Even translation ``sum_k y^{2k}/m(2k) d_m^{2k} f``."""
    if y == 0:
        return f
    table = _scaled_derivative_table(f, complex(y), seq)
    return TruncatedSeries(csum_rows(table[0::2]))


def even_translate_averaged(f, y, seq):
    """Reference form ``(tau_y f + tau_{-y} f) / 2``."""
    a = m_translate(f, y, seq)
    b = m_translate(f, -y, seq)
    return TruncatedSeries((a.coeffs + b.coeffs) / 2.0)


# -- divergence witness ---------------------------------------------------

@dataclass
class DivergenceWitness:
    """Log-magnitudes of ``t_p = (n+p)! m(n+p)/m(p) |y|^p`` and their ratios."""

    y: complex
    n: int
    log_terms: np.ndarray
    log_ratios: np.ndarray
    increasing_from: int | None
    diverges: bool

    def to_dict(self):
        return {
            "y": [self.y.real, self.y.imag],
            "n": self.n,
            "log_terms": self.log_terms.tolist(),
            "log_ratios": self.log_ratios.tolist(),
            "increasing_from": self.increasing_from,
            "diverges": self.diverges,
        }


def euler_divergence_witness(y, n, seq, terms):
    """Witness the null radius of convergence of ``sum_p (n+p)! m(n+p)/m(p) (-y)^p``."""
    y = complex(y)
    if y == 0:
        raise DomainError("the witness needs y != 0")
    if n < 0 or terms < 2:
        raise DomainError("need n >= 0 and at least two terms")
    p = np.arange(terms + 1)
    logs = np.asarray(seq.log_values)
    seq.log(n + terms)  # capacity check
    log_terms = gammaln(n + p + 1.0) + logs[n + p] - logs[p] + p * math.log(abs(y))
    log_ratios = np.diff(log_terms)
    steps = np.diff(log_ratios)
    increasing_from = None
    for start in range(steps.size):
        if np.all(steps[start:] > 0):
            increasing_from = start
            break
    # strictly increasing ratio with the last ratio above 1 means the terms blow up
    diverges = increasing_from is not None and log_ratios[-1] > 0
    return DivergenceWitness(y, n, log_terms, log_ratios, increasing_from, bool(diverges))


def series_max_abs(f):
    return float(np.max(np.abs(f.coeffs))) if f.order >= 0 else 0.0


def sum_series(series):
    series = list(series)
    n = max(s.order for s in series)
    return TruncatedSeries(csum_rows(np.array([s.pad(n).coeffs for s in series])))


__all__ = [
    "TruncatedSeries",
    "moment_derivative",
    "dunkl_apply_direct",
    "iterated_moment_derivative",
    "m_translate",
    "even_translate",
    "even_translate_averaged",
    "euler_divergence_witness",
    "DivergenceWitness",
    "sum_series",
]
