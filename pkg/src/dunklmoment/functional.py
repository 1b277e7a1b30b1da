"""Translation functional equations ``sum_l c_l tau_{omega_l, m} y = 0``.

Every zero ``z0`` of ``f(z) = sum_l c_l E_m(omega_l z)`` gives the solution
``y(z) = E_m(z0 z)``, because translating ``E_m(z0 .)`` by ``omega`` multiplies
it by ``E_m(z0 omega)``.  Zeros are located with the argument principle on
rectangles and polished by Newton's method.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import csum, csum_rows
from .entire import E_m_array, E_m_prime_array
from .errors import BoundaryDegeneracyError, DegeneracyError, DomainError
from .series import TruncatedSeries, m_translate

EVAL_TOL = 1e-14


class ExpPolynomial:
    """``f(z) = sum_l c_l E_m(omega_l z)``."""

    def __init__(self, coeffs, freqs, seq):
        c = np.array(coeffs, dtype=complex).ravel()
        w = np.array(freqs, dtype=complex).ravel()
        if c.size == 0 or c.size != w.size:
            raise DomainError("coefficients and frequencies must be nonempty and of equal length")
        if not np.any(c != 0):
            raise DomainError("at least one coefficient must be nonzero")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(w))):
            raise DomainError("coefficients and frequencies must be finite")
        self.coeffs = c
        self.freqs = w
        self.seq = seq

    def _combine(self, z, fn, weights):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        rows = np.array([wt * fn(om * flat, self.seq, EVAL_TOL) for wt, om in zip(weights, self.freqs)])
        out = csum_rows(rows) if flat.size else np.zeros(0, dtype=complex)
        return complex(out[0]) if z.ndim == 0 else out.reshape(z.shape)

    def __call__(self, z):
        return self._combine(z, E_m_array, self.coeffs)

    def derivative(self, z):
        """Classical derivative ``sum_l c_l omega_l E_m'(omega_l z)``."""
        return self._combine(z, E_m_prime_array, self.coeffs * self.freqs)

    def to_dict(self):
        return {
            "c": [[x.real, x.imag] for x in self.coeffs.tolist()],
            "omega": [[x.real, x.imag] for x in self.freqs.tolist()],
            "sequence": self.seq.describe(),
        }


def eval_exp_polynomial(F, z):
    return F(z)


# -- root finding ----------------------------------------------------------

@dataclass(frozen=True)
class Box:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    @property
    def width(self):
        return self.re_max - self.re_min

    @property
    def height(self):
        return self.im_max - self.im_min

    @property
    def diagonal(self):
        return math.hypot(self.width, self.height)

    @property
    def center(self):
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, z, margin=0.0):
        return (self.re_min - margin <= z.real <= self.re_max + margin
                and self.im_min - margin <= z.imag <= self.im_max + margin)

    def expanded(self, d):
        return Box(self.re_min - d, self.re_max + d, self.im_min - d, self.im_max + d)

    def corners(self):
        return [complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max)]

    def to_dict(self):
        return {"re_min": self.re_min, "re_max": self.re_max,
                "im_min": self.im_min, "im_max": self.im_max}

    @classmethod
    def from_any(cls, box):
        if isinstance(box, Box):
            return box
        if isinstance(box, dict):
            return cls(float(box["re_min"]), float(box["re_max"]),
                       float(box["im_min"]), float(box["im_max"]))
        return cls(*map(float, box))


@dataclass
class RootRecord:
    z0: complex
    residual: float
    newton_steps: int
    box: Box
    cluster: int = 1  # winding count of the enclosing box; > 1 means unresolved cluster

    def to_dict(self):
        return {"z0": [self.z0.real, self.z0.imag], "residual": self.residual,
                "newton_steps": self.newton_steps, "box": self.box.to_dict(),
                "cluster": self.cluster}


@dataclass
class RootSearch:
    roots: list
    failures: list = field(default_factory=list)  # (Box, message) for degenerate sub-boxes
    box: Box | None = None

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)


_MAX_PHASE_STEP = math.pi / 2
_INITIAL_SAMPLES = 32
_MAX_REFINE = 40
_SPLIT_OFFSETS = (0.0371, -0.0613, 0.1127, -0.1459, 0.0089, 0.1931)


class _Winding:
    """Winding numbers of ``f`` around rectangles, with cached edge sweeps."""

    def __init__(self, f, tol):
        self.f = f
        self.tol = tol
        self._edges = {}

    def edge(self, a, b):
        """Total phase change of ``f`` along the segment ``a -> b``."""
        key = (a, b)
        if key in self._edges:
            return self._edges[key]
        if (b, a) in self._edges:
            return -self._edges[(b, a)]
        t = np.linspace(0.0, 1.0, _INITIAL_SAMPLES + 1)
        vals = self.f(a + (b - a) * t)
        for _ in range(_MAX_REFINE):
            if np.any(np.abs(vals) < self.tol) or not np.all(np.isfinite(vals)):
                raise BoundaryDegeneracyError(f"f nearly vanishes on the segment {a} -> {b}")
            steps = np.angle(vals[1:] / vals[:-1])
            bad = np.nonzero(np.abs(steps) >= _MAX_PHASE_STEP)[0]
            if bad.size == 0:
                break
            mids = 0.5 * (t[bad] + t[bad + 1])
            if np.min(np.diff(t)[bad]) < 2.0**-52:
                break
            new_vals = self.f(a + (b - a) * mids)
            t = np.insert(t, bad + 1, mids)
            vals = np.insert(vals, bad + 1, new_vals)
        else:
            raise BoundaryDegeneracyError(f"phase could not be resolved on {a} -> {b}")
        steps = np.angle(vals[1:] / vals[:-1])
        if np.any(np.abs(steps) >= _MAX_PHASE_STEP):
            raise BoundaryDegeneracyError(f"phase could not be resolved on {a} -> {b}")
        total = float(math.fsum(steps.tolist()))
        self._edges[key] = total
        return total

    def count(self, box):
        c = box.corners()
        total = sum(self.edge(c[i], c[(i + 1) % 4]) for i in range(4))
        w = total / (2 * math.pi)
        n = round(w)
        if abs(w - n) > 0.1 or n < 0:
            raise BoundaryDegeneracyError(f"unstable winding {w:.3f} on {box}")
        return int(n)


def _split(box, k):
    dx, dy = _SPLIT_OFFSETS[k % len(_SPLIT_OFFSETS)], _SPLIT_OFFSETS[(k + 3) % len(_SPLIT_OFFSETS)]
    xs = box.re_min + box.width * (0.5 + dx)
    ys = box.im_min + box.height * (0.5 + dy)
    return [Box(box.re_min, xs, box.im_min, ys), Box(xs, box.re_max, box.im_min, ys),
            Box(xs, box.re_max, ys, box.im_max), Box(box.re_min, xs, ys, box.im_max)]


def _newton(F, z, region, max_steps=60):
    steps = 0
    for steps in range(1, max_steps + 1):
        if not region.contains(z):
            return z, steps, False
        fz = F(z)
        dz = F.derivative(z)
        if dz == 0 or not cmath.isfinite(fz):
            return z, steps, False
        step = fz / dz
        z = z - step
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(z)):
            return z, steps, True
    return z, steps, abs(F(z)) < abs(step) * 1e3


def find_roots(F, box, tol=1e-10, max_depth=48):
    """Zeros of ``F`` inside ``box`` by recursive winding counts plus Newton.

    Returns a :class:`RootSearch`; sub-boxes whose winding number could not be
    stabilised are listed in ``failures`` instead of aborting the search.
    """
    box = Box.from_any(box)
    if not (box.width > 0 and box.height > 0):
        raise DomainError("box sides must be positive")
    if tol <= 0:
        raise DomainError("tol must be positive")
    winding = _Winding(F, tol)
    start = box
    for attempt in range(6):
        try:
            n = winding.count(start)
            break
        except BoundaryDegeneracyError:
            start = box.expanded(tol * box.diagonal * 10.0**attempt)
    else:
        raise BoundaryDegeneracyError(f"f vanishes on the boundary of {box}")

    roots, failures = [], []
    queue = [(start, n, 0)]
    while queue:
        current, count, depth = queue.pop()
        if count == 0:
            continue
        if count == 1:
            z, steps, ok = _newton(F, current.center, current.expanded(current.diagonal))
            res = abs(F(z))
            if ok and current.contains(z, margin=tol) and res <= tol:
                roots.append(RootRecord(complex(z), float(res), steps, current))
                continue
        if max(current.width, current.height) < tol or depth >= max_depth:
            z = current.center
            res = abs(F(z))
            if count > 1 and res <= tol:
                roots.append(RootRecord(complex(z), float(res), 0, current, count))
            else:
                failures.append((current, f"unresolved: winding {count}, |f| = {res:.3g}"))
            continue
        for k in range(len(_SPLIT_OFFSETS)):
            children = _split(current, k)
            try:
                counts = [winding.count(c) for c in children]
            except BoundaryDegeneracyError:
                continue
            if sum(counts) == count:
                queue.extend((c, m, depth + 1) for c, m in zip(children, counts))
                break
        else:
            failures.append((current, "no split conserved the winding count"))
    roots.sort(key=lambda r: (round(r.z0.real, 9), round(r.z0.imag, 9)))
    return RootSearch(roots, failures, start)


# -- solutions -------------------------------------------------------------

class ExpSolution:
    """Finite combination ``sum_i a_i E_m(z_i z)``."""

    def __init__(self, terms, seq):
        self.terms = [(complex(a), complex(z0)) for a, z0 in terms]
        self.seq = seq

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = sum(a * E_m_array(z0 * z, self.seq) for a, z0 in self.terms)
        return complex(out) if np.ndim(out) == 0 else out

    def series(self, order):
        acc = TruncatedSeries.zero(order)
        for a, z0 in self.terms:
            acc = acc + a * TruncatedSeries.exponential(self.seq, order, z0)
        return acc

    def __add__(self, other):
        if not isinstance(other, ExpSolution):
            return NotImplemented
        return ExpSolution(self.terms + other.terms, self.seq)

    def __mul__(self, scalar):
        return ExpSolution([(a * scalar, z0) for a, z0 in self.terms], self.seq)

    __rmul__ = __mul__


def build_solution(z0, seq):
    return ExpSolution([(1.0, z0)], seq)


def _accurate_order(seq, radius, floor=1e-18, cap=600):
    """Smallest order past which ``radius^p / m(p)`` stays below ``floor``."""
    if radius == 0:
        return 8
    logs = np.asarray(seq.log_values)
    lr = math.log(radius)
    for p in range(8, min(cap, seq.p_max) + 1):
        if p * lr - logs[p] < math.log(floor) and (p + 1) * lr - logs[p + 1] < p * lr - logs[p]:
            return p
    return min(cap, seq.p_max)


def _residual_fast(y, c, omega, seq, z):
    vals = []
    for a, z0 in y.terms:
        factor = csum([cl * complex(E_m_array(z0 * w, seq, EVAL_TOL)) for cl, w in zip(c, omega)])
        vals.append(a * factor * E_m_array(z0 * z, seq))
    return np.abs(csum_rows(np.array(vals))) if vals else np.zeros(z.shape)


def _residual_slow(series, c, omega, seq, z):
    total = None
    for cl, w in zip(c, omega):
        part = cl * m_translate(series, w, seq)
        total = part if total is None else total + part
    return np.abs(total.evaluate(z))


def _prepare(c, omega, samples):
    c = np.array(c, dtype=complex).ravel()
    omega = np.array(omega, dtype=complex).ravel()
    if c.size != omega.size or c.size == 0:
        raise DomainError("c and omega must be nonempty and of equal length")
    z = np.asarray(samples, dtype=complex).ravel()
    return c, omega, z


def equation_residual(y, c, omega, seq, samples, path="auto", order=None):
    """``max_z |sum_l c_l (tau_{omega_l} y)(z)|`` over the sample set.

    ``path`` is ``"fast"`` (product law, needs an :class:`ExpSolution`),
    ``"slow"`` (series translation) or ``"auto"``.
    """
    c, omega, z = _prepare(c, omega, samples)
    if path not in ("auto", "fast", "slow"):
        raise DomainError(f"unknown path {path!r}")
    if path != "slow" and isinstance(y, ExpSolution):
        return float(np.max(_residual_fast(y, c, omega, seq, z)))
    if path == "fast":
        raise DomainError("the fast path needs an exponential solution")
    if isinstance(y, TruncatedSeries):
        series = y
    elif isinstance(y, ExpSolution):
        reach = max(abs(z0) for _, z0 in y.terms) * (np.max(np.abs(z)) + 2 * np.max(np.abs(omega)))
        series = y.series(order or _accurate_order(seq, reach))
    else:
        raise DomainError("y must be an ExpSolution or a TruncatedSeries")
    return float(np.max(_residual_slow(series, c, omega, seq, z)))


def compare_residual_paths(y, c, omega, seq, samples, order=None):
    """Both residual paths and the max pointwise disagreement of the translated sums."""
    fast = equation_residual(y, c, omega, seq, samples, "fast")
    slow = equation_residual(y, c, omega, seq, samples, "slow", order)
    return {"fast": fast, "slow": slow, "difference": abs(fast - slow)}


# -- independence ----------------------------------------------------------

@dataclass
class IndependenceVerdict:
    independent: bool
    log_abs_det: float
    min_distance: float

    @property
    def abs_det(self):
        return math.exp(self.log_abs_det)

    def to_dict(self):
        return {"independent": self.independent, "log_abs_det": self.log_abs_det,
                "min_distance": self.min_distance}


def independence_check(roots):
    """Vandermonde test for ``E_m(z_i .)``: distinct roots give independent solutions."""
    zs = [complex(getattr(r, "z0", r)) for r in roots]
    if not zs:
        raise DomainError("need at least one root")
    threshold = 1e-10 * max(abs(z) for z in zs)
    logs, dmin = [], math.inf
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            d = abs(zs[i] - zs[j])
            dmin = min(dmin, d)
            if d <= threshold:
                raise DegeneracyError(f"roots {zs[i]} and {zs[j]} are not distinct")
            logs.append(math.log(d))
    return IndependenceVerdict(True, math.fsum(logs), dmin)
