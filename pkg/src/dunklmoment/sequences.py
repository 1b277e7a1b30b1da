"""Moment sequences, Dunkl factorials and strong-regularity certificates.

A :class:`MomentSequence` stores ``log m(p)`` for ``p = 0..p_max``.  Linear
values overflow double precision near ``p = 170`` so every consumer works
with logarithms or with the quotients ``m(p)/m(p-1)``, which stay moderate.

Dunkl factorials::

    gamma_{2k}   = 2^{2k}   k! (alpha+1)_k
    gamma_{2k+1} = 2^{2k+1} k! (alpha+1)_{k+1}

with quotients ``theta_p = p + (2 alpha + 1)/2 * (1 - (-1)^p)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .errors import CapacityError, DomainError

DEFAULT_P_MAX = 4096

_LOG2 = math.log(2.0)


class Family(enum.Enum):
    FACTORIAL = "factorial"
    DUNKL = "dunkl"
    CUSTOM = "custom"


def _check_alpha(alpha):
    if not alpha > -1.0:
        raise DomainError(f"Dunkl parameter must satisfy alpha > -1, got {alpha!r}")


def log_dunkl_factorial(p, alpha):
    """``log gamma_{p,alpha}`` as a compensated sum of the logs of its factors."""
    _check_alpha(alpha)
    if p < 0:
        raise DomainError("p must be nonnegative")
    k, odd = divmod(p, 2)
    parts = [p * _LOG2]
    parts += [math.log(j) for j in range(2, k + 1)]
    parts += [math.log(alpha + 1.0 + j) for j in range(k + odd)]
    return math.fsum(parts)


def dunkl_factorial(p, alpha):
    """Linear-domain Dunkl factorial; raises ``OverflowError`` past ~1e308."""
    return math.exp(log_dunkl_factorial(p, alpha))


def quotient(p, alpha):
    """Closed-form quotient ``theta_{p,alpha} = gamma_p / gamma_{p-1}``."""
    _check_alpha(alpha)
    if p < 1:
        raise DomainError("quotient is defined for p >= 1")
    if p % 2:
        return p + (2.0 * alpha + 1.0)
    return float(p)


class MomentSequence:
    """Positive sequence ``m(p)`` held in log form.

    Use the constructors :meth:`factorial`, :meth:`dunkl`, :meth:`from_values`
    or :meth:`from_file` rather than calling ``__init__`` directly.
    """

    def __init__(self, family, log_values, alpha=None, quotients=None):
        log_values = np.array(log_values, dtype=float)
        if log_values.ndim != 1 or log_values.size < 1:
            raise DomainError("log_values must be a nonempty 1-D array")
        if not np.all(np.isfinite(log_values)):
            raise DomainError("all m(p) must be finite and strictly positive")
        log_values.setflags(write=False)
        if quotients is None:
            quotients = np.concatenate([[np.nan], np.exp(np.diff(log_values))])
        quotients = np.array(quotients, dtype=float)
        quotients.setflags(write=False)
        self.family = Family(family)
        self.alpha = alpha
        self._log = log_values
        self._quot = quotients

    # -- constructors -----------------------------------------------------
    @classmethod
    def factorial(cls, p_max=DEFAULT_P_MAX):
        p = np.arange(p_max + 1, dtype=float)
        quot = p.copy()
        quot[0] = np.nan
        return cls(Family.FACTORIAL, gammaln(p + 1.0), quotients=quot)

    @classmethod
    def dunkl(cls, alpha, p_max=DEFAULT_P_MAX):
        _check_alpha(alpha)
        alpha = float(alpha)
        p = np.arange(p_max + 1)
        k = p // 2
        odd = p % 2
        logs = (
            p * _LOG2
            + gammaln(k + 1.0)
            + gammaln(alpha + 1.0 + k + odd)
            - gammaln(alpha + 1.0)
        )
        quot = p + (2.0 * alpha + 1.0) * odd
        quot = quot.astype(float)
        quot[0] = np.nan
        return cls(Family.DUNKL, logs, alpha=alpha, quotients=quot)

    @classmethod
    def from_values(cls, values):
        vals = [Decimal(str(v)) if not isinstance(v, Decimal) else v for v in values]
        if any(v <= 0 for v in vals):
            raise DomainError("moment sequence entries must be strictly positive")
        logs = [float(v.ln()) for v in vals]
        return cls(Family.CUSTOM, logs)

    @classmethod
    def from_log_values(cls, log_values):
        return cls(Family.CUSTOM, log_values)

    @classmethod
    def from_file(cls, path):
        """Read ``p, m(p)`` pairs, one per line; ``#`` starts a comment."""
        entries = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [s for s in line.replace(",", " ").split() if s]
            if len(parts) != 2:
                raise DomainError(f"{path}:{lineno}: expected two columns")
            try:
                p = int(parts[0])
                value = Decimal(parts[1])
            except (ValueError, InvalidOperation) as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from None
            entries[p] = value
        if sorted(entries) != list(range(len(entries))):
            raise DomainError(f"{path}: indices must run contiguously from 0")
        return cls.from_values([entries[p] for p in range(len(entries))])

    @classmethod
    def from_spec(cls, family, alpha=None, p_max=DEFAULT_P_MAX):
        family = Family(family)
        if family is Family.FACTORIAL:
            return cls.factorial(p_max)
        if family is Family.DUNKL:
            if alpha is None:
                raise DomainError("the dunkl family needs alpha")
            return cls.dunkl(alpha, p_max)
        raise DomainError("custom sequences are loaded from a file")

    # -- access -----------------------------------------------------------
    @property
    def p_max(self):
        return self._log.size - 1

    @property
    def log_values(self):
        return self._log

    def _check_index(self, p):
        if p < 0:
            raise DomainError("index must be nonnegative")
        if p > self.p_max:
            raise CapacityError(f"index {p} exceeds p_max = {self.p_max}")

    def log(self, p):
        self._check_index(p)
        return float(self._log[p])

    def value(self, p):
        return math.exp(self.log(p))

    def quotient(self, p):
        """``m(p)/m(p-1)``; closed form (any ``p``) for parametric families."""
        if p < 1:
            raise DomainError("quotient is defined for p >= 1")
        if self.family is Family.FACTORIAL:
            return float(p)
        if self.family is Family.DUNKL:
            return quotient(p, self.alpha)
        self._check_index(p)
        return float(self._quot[p])

    def quotients(self, upto):
        """Array ``q`` with ``q[p] = m(p)/m(p-1)`` for ``1 <= p <= upto``; ``q[0]`` is nan."""
        if self.family is Family.CUSTOM:
            self._check_index(upto)
            return self._quot[: upto + 1]
        p = np.arange(upto + 1, dtype=float)
        if self.family is Family.DUNKL:
            p = p + (2.0 * self.alpha + 1.0) * (np.arange(upto + 1) % 2)
        p[0] = np.nan
        return p

    def describe(self):
        out = {"family": self.family.value, "p_max": self.p_max}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out

    def __repr__(self):
        extra = f", alpha={self.alpha}" if self.alpha is not None else ""
        return f"MomentSequence({self.family.value}{extra}, p_max={self.p_max})"


# -- strong regularity ----------------------------------------------------

@dataclass
class SRCheckReport:
    lc_ok: bool
    lc_violation: int | None
    mg_ok: bool
    a1: float
    snq_ok: bool
    a2: float
    range: int
    snq_tail_remainder: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def all_ok(self):
        return self.lc_ok and self.mg_ok and self.snq_ok

    def to_dict(self):
        return {
            "lc_ok": self.lc_ok,
            "lc_violation": self.lc_violation,
            "mg_ok": self.mg_ok,
            "a1": self.a1,
            "snq_ok": self.snq_ok,
            "a2": self.a2,
            "range": self.range,
            "snq_tail_remainder": self.snq_tail_remainder,
            "notes": list(self.notes),
        }


# relative slack when comparing quotients that may coincide exactly
_LC_RTOL = 1e-12
# witness growth allowed between the half range and the full range
_STABLE_RATIO = 1.1


def _mg_witness(logs, n):
    p = np.arange(n + 1)
    pq = p[:, None] + p[None, :]
    excess = logs[pq] - logs[p][:, None] - logs[p][None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        per = np.where(pq > 0, excess / np.maximum(pq, 1), -np.inf)
    return max(1.0, math.exp(float(per.max())))


def check_strong_regularity(seq, n):
    """Certify (lc), (mg) and (snq) on a finite index range.

    The verdicts are statements about ``0 <= p, q <= n`` only.  (mg) and (snq)
    are declared to hold when the witness constant is finite and barely moves
    between the ranges ``n // 2`` and ``n``.
    """
    if n < 4:
        raise DomainError("range bound must be at least 4")
    notes = ["witnesses are computed on the tested range only"]
    need = 2 * n
    if seq.p_max < need:
        raise CapacityError(f"need p_max >= {need} for the (mg) square, have {seq.p_max}")
    logs = np.asarray(seq.log_values[: need + 1]) - seq.log(0)
    if seq.log(0) != 0.0:
        notes.append("sequence normalised by m(0)")

    # (lc) <=> quotients nondecreasing
    theta = seq.quotients(n + 1)
    lc_violation = None
    for p in range(1, n + 1):
        if theta[p] > theta[p + 1] * (1.0 + _LC_RTOL):
            lc_violation = p
            break

    a1 = _mg_witness(logs, n)
    a1_half = _mg_witness(logs, n // 2)
    mg_ok = math.isfinite(a1) and a1 <= a1_half * _STABLE_RATIO

    # (snq): sum_{q>=p} 1/((q+1) theta_{q+1}) <= A2 / theta_{p+1}
    q_top = 4 * n
    if seq.family is Family.CUSTOM:
        q_top = min(q_top, seq.p_max - 1)
        if q_top < 4 * n:
            notes.append(f"snq sum truncated at {q_top} by table length")
    th = seq.quotients(q_top + 1)
    q = np.arange(q_top + 1)
    terms = 1.0 / ((q + 1.0) * th[1:])
    half = q_top // 2
    half -= (q_top - half) % 2  # compare indices of equal parity
    decay = math.log(terms[half] / terms[q_top]) / math.log((q_top + 1.0) / (half + 1.0))
    if decay > 1.0:
        tail = float(terms[q_top] * (q_top + 1.0) / (decay - 1.0))
    else:
        tail = math.inf
        notes.append(f"snq summand decays like q^-{decay:.3g}; tail diverges")
    suffix = np.cumsum(terms[::-1])[::-1] + tail
    ratio = th[1 : n + 2] * suffix[: n + 1]
    a2 = float(ratio.max())
    a2_half = float(ratio[: n // 2 + 1].max())
    snq_ok = math.isfinite(a2) and a2 <= a2_half * _STABLE_RATIO
    return SRCheckReport(
        lc_ok=lc_violation is None,
        lc_violation=lc_violation,
        mg_ok=bool(mg_ok),
        a1=a1,
        snq_ok=bool(snq_ok),
        a2=a2,
        range=n,
        snq_tail_remainder=tail,
        notes=notes,
    )


def equivalence_constants(seq, n):
    """Fitted constants for ``C1 p <= theta_p <= C2 p`` and ``C1^p p! <= m(p) <= C2^p p!``."""
    p = np.arange(1, n + 1)
    theta = seq.quotients(n)[1:]
    ratio = theta / p
    logs = np.asarray(seq.log_values[1 : n + 1]) - seq.log(0)
    root = np.exp((logs - gammaln(p + 1.0)) / p)
    return {
        "quotient_c1": float(ratio.min()),
        "quotient_c2": float(ratio.max()),
        "sequence_c1": float(root.min()),
        "sequence_c2": float(root.max()),
    }


# -- growth functions -----------------------------------------------------

_M_PATIENCE = 8


def assoc_M(seq, t):
    """``M(t) = sup_p log(t^p / m(p))`` (with ``m`` normalised so that ``m(0) = 1``)."""
    if t < 0:
        raise DomainError("M(t) is defined for t >= 0")
    if t == 0:
        return 0.0
    lt = math.log(t)
    base = seq.log(0)
    best = 0.0
    running = -math.inf
    since = 0
    p = 0
    while since < _M_PATIENCE:
        term = p * lt - (seq.log(p) - base)
        if term > running:
            running = term
            since = 0
        else:
            since += 1
        best = max(best, term)
        p += 1
    return best


def proximate_order_d(seq, t):
    if t <= 1:
        raise DomainError("d(t) needs t > 1")
    return math.log(assoc_M(seq, t)) / math.log(t)


@dataclass(frozen=True)
class OmegaEstimate:
    probe: int
    value: float
    value_at_10x: float

    @property
    def trend(self):
        return self.value_at_10x - self.value


def omega_estimate(seq, probe):
    """Single-probe estimate of ``lim log theta_p / log p``."""
    if probe < 1000:
        raise DomainError("probe index must be at least 1000")

    def est(p):
        return math.log(seq.quotient(p)) / math.log(p)

    return OmegaEstimate(probe, est(probe), est(10 * probe))


@dataclass
class GrowthFunctions:
    """Bundle of ``M``, ``d`` and ``omega`` for one sequence."""

    seq: MomentSequence
    probe: int = 10**5

    def M(self, t):
        return assoc_M(self.seq, t)

    def d(self, t):
        return proximate_order_d(self.seq, t)

    @property
    def omega(self):
        return omega_estimate(self.seq, self.probe).value
