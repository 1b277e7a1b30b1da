"""Fundamental systems for ``Lambda_alpha y = A y``.

For a Jordan chain ``A v_1 = lambda v_1``, ``A v_k = v_{k-1} + lambda v_k`` the
vector functions

    y_k(z) = v_k E_{alpha,0}(lambda z) + v_{k-1} E_{alpha,1}(lambda z) + ... + v_1 E_{alpha,k-1}(lambda z)

solve the system; one per chain vector gives ``n`` solutions in total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .entire import E_alpha_h_array, decay_scan, growth_scan
from .errors import DefectiveExtractionError, DomainError
from .sequences import MomentSequence
from .series import TruncatedSeries, moment_derivative

_EPS = np.finfo(float).eps
# eigenvalue splitting of a k-fold defective eigenvalue is ~ (c eps)^(1/k)
_SPLIT_CONSTANT = 1e4


def matrix_norm(A):
    """Max-row-sum norm."""
    return float(np.abs(A).sum(axis=1).max())


@dataclass
class JordanChain:
    eigenvalue: complex
    vectors: list  # v_1 (eigenvector) ... v_l (top of chain)

    @property
    def length(self):
        return len(self.vectors)


@dataclass
class JordanChainSet:
    chains: list
    tol: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def eigenvalues(self):
        return [c.eigenvalue for c in self.chains]

    @property
    def lengths(self):
        return [c.length for c in self.chains]

    @property
    def n(self):
        return sum(self.lengths)

    @property
    def diagonalizable(self):
        return all(length == 1 for length in self.lengths)

    def basis(self):
        return np.column_stack([v for c in self.chains for v in c.vectors])

    def to_dict(self):
        return [
            {
                "eigenvalue": [c.eigenvalue.real, c.eigenvalue.imag],
                "vectors": [[[x.real, x.imag] for x in v.tolist()] for v in c.vectors],
            }
            for c in self.chains
        ]


def _cluster_radius(k, n, scale, tol):
    return scale * max(tol, (_SPLIT_CONSTANT * n * _EPS) ** (1.0 / k))


def _components(values, threshold):
    """Single-linkage groups of complex numbers closer than ``threshold``."""
    values = list(values)
    groups = []
    unassigned = list(range(len(values)))
    while unassigned:
        stack = [unassigned.pop(0)]
        group = []
        while stack:
            i = stack.pop()
            group.append(i)
            near = [j for j in unassigned if abs(values[i] - values[j]) <= threshold]
            for j in near:
                unassigned.remove(j)
            stack.extend(near)
        groups.append([values[i] for i in sorted(group)])
    return groups


def _null_basis(M, dim):
    """Orthonormal basis of the ``dim`` least significant right singular vectors."""
    _, s, vh = np.linalg.svd(M)
    return vh[M.shape[1] - dim:].conj().T, s


def _nullity(M, threshold):
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s <= threshold))


def _normalise_top(x):
    mags = np.abs(x)
    peak = mags.max()
    i = int(np.nonzero(mags >= peak * (1 - 1e-9))[0][0])
    return x / x[i]


def _chains_for_cluster(A, mu, k, scale, tol):
    n = A.shape[0]
    B = A - mu * np.eye(n)
    W, s = _null_basis(np.linalg.matrix_power(B, k), k)
    N = W.conj().T @ B @ W
    rank_tol = math.sqrt(tol) * max(scale, 1.0)
    nullity = [0]
    for i in range(1, k + 1):
        nullity.append(_nullity(np.linalg.matrix_power(N, i), rank_tol ** i))
        if nullity[-1] == k:
            break
    if nullity[-1] != k:
        raise DefectiveExtractionError(
            f"restriction to the generalised eigenspace of {mu:.6g} is not nilpotent",
            {"eigenvalue": mu, "nullities": nullity},
        )
    index = len(nullity) - 1
    blocks_at_least = [nullity[i] - nullity[i - 1] for i in range(1, index + 1)] + [0]
    kernels = [np.zeros((k, 0), dtype=complex)]
    for i in range(1, index + 1):
        basis, _ = _null_basis(np.linalg.matrix_power(N, i), nullity[i])
        kernels.append(basis)

    chosen = []  # (length, top vector in eigenspace coordinates)
    for length in range(index, 0, -1):
        exact = blocks_at_least[length - 1] - blocks_at_least[length]
        if exact == 0:
            continue
        span = [kernels[length - 1]]
        for big, y in chosen:
            span.append((np.linalg.matrix_power(N, big - length) @ y)[:, None])
        Q = np.column_stack(span) if span else np.zeros((k, 0))
        if Q.shape[1]:
            Q, _ = np.linalg.qr(Q)
        P = kernels[length] - Q @ (Q.conj().T @ kernels[length])
        u, sv, _ = np.linalg.svd(P)
        if sv.size < exact or sv[exact - 1] < rank_tol:
            raise DefectiveExtractionError(
                f"could not complete chains of length {length} for eigenvalue {mu:.6g}",
                {"eigenvalue": mu, "singular_values": sv.tolist()},
            )
        for c in range(exact):
            chosen.append((length, u[:, c]))

    chains = []
    for length, y in chosen:
        top = _normalise_top(W @ y)
        vecs = [top]
        for _ in range(length - 1):
            vecs.append(B @ vecs[-1])
        chains.append(JordanChain(complex(mu), vecs[::-1]))
    return chains, s


def _check_residuals(A, chains, limit, gaps):
    for c in chains:
        lam = c.eigenvalue
        for idx, v in enumerate(c.vectors):
            prev = c.vectors[idx - 1] if idx else 0.0
            res = np.abs(A @ v - prev - lam * v).max()
            if res > limit * max(1.0, np.abs(v).max()):
                raise DefectiveExtractionError(
                    f"chain residual {res:.3g} exceeds {limit:.3g} for eigenvalue {lam:.6g}",
                    {"eigenvalue": lam, "residual": float(res), "singular_values": gaps},
                )


def _resolve(A, values, n, scale, tol, gaps):
    """Chains for a group of computed eigenvalues, split further when the group fails."""
    k = len(values)
    mu = complex(np.mean(values))
    if k == 1 or max(abs(v - mu) for v in values) <= _cluster_radius(k, n, scale, tol):
        try:
            cs, sv = _chains_for_cluster(A, mu, k, scale, tol)
            _check_residuals(A, cs, tol * scale, gaps)
            gaps[str(mu)] = sv.tolist()
            return [(values, cs)]
        except DefectiveExtractionError:
            if k == 1:
                raise
    for j in range(k - 1, 0, -1):
        parts = _components(values, 2.0 * _cluster_radius(j, n, scale, tol))
        if len(parts) > 1:
            return [r for part in parts for r in _resolve(A, part, n, scale, tol, gaps)]
    return [r for v in values for r in _resolve(A, [v], n, scale, tol, gaps)]


def jordan_chains(A, tol=1e-8):
    """Numerical Jordan chains of ``A``.

    Eigenvalues are grouped when they lie within ``tol * ||A||`` or within the
    splitting radius a defective eigenvalue of that multiplicity suffers from
    rounding.  Invariants are verified before returning; failures raise
    :class:`DefectiveExtractionError` rather than producing doubtful chains.
    """
    A = np.array(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DomainError("A must be a nonempty square matrix")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if not np.all(np.isfinite(A)):
        raise DomainError("A must have finite entries")
    n = A.shape[0]
    norm = matrix_norm(A)
    scale = norm if norm > 0 else 1.0
    eigs = scipy.linalg.eigvals(A)
    gaps = {}
    chains = []
    groups = 0
    for comp in _components(eigs, 2.0 * _cluster_radius(n, n, scale, tol)):
        for _, cs in _resolve(A, comp, n, scale, tol, gaps):
            groups += 1
            chains.extend(cs)
    chains.sort(key=lambda c: (round(c.eigenvalue.real, 12), round(c.eigenvalue.imag, 12), -c.length))
    V = np.column_stack([v / np.linalg.norm(v) for c in chains for v in c.vectors])
    smin = float(np.linalg.svd(V, compute_uv=False).min())
    if smin <= tol:
        raise DefectiveExtractionError(
            f"chain vectors nearly dependent (smallest singular value {smin:.3g})",
            {"smallest_singular_value": smin},
        )
    return JordanChainSet(chains, tol, {"smallest_singular_value": smin, "clusters": groups})


# -- solutions -------------------------------------------------------------

_SEQ_CACHE = {}


def _dunkl_sequence(alpha, order):
    key = float(alpha)
    seq = _SEQ_CACHE.get(key)
    if seq is None or seq.p_max < order:
        seq = MomentSequence.dunkl(alpha, max(order, 256))
        _SEQ_CACHE[key] = seq
    return seq


def chain_series(lam, h, alpha, order):
    """Taylor coefficients of ``E_{alpha,h}(lam z)`` up to ``z^order``."""
    seq = _dunkl_sequence(alpha, order)
    c = np.zeros(order + 1, dtype=complex)
    if h > order:
        return TruncatedSeries(c)
    lam = complex(lam)
    logs = np.asarray(seq.log_values[: order + 1])
    if lam == 0:
        c[h] = math.exp(-logs[h])
        return TruncatedSeries(c)
    p = np.arange(h, order + 1)
    log_binom = gammaln(p + 1.0) - gammaln(h + 1.0) - gammaln(p - h + 1.0)
    mag = np.exp(log_binom + (p - h) * math.log(abs(lam)) - logs[h:])
    c[h:] = mag * np.exp(1j * (p - h) * np.angle(lam))
    return TruncatedSeries(c)


@dataclass
class FundamentalSolution:
    """``y(z) = sum_i v_{k-i} E_{alpha,i}(lambda z)`` for one chain position ``k``."""

    eigenvalue: complex
    chain_index: int
    terms: list  # (vector, h) pairs
    alpha: float

    @property
    def dim(self):
        return self.terms[0][0].size

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros((self.dim,) + z.shape, dtype=complex)
        for vec, h in self.terms:
            vals = E_alpha_h_array(self.eigenvalue, z, h, self.alpha)
            out += np.multiply.outer(vec, vals)
        return out

    def component(self, j):
        """Scalar callable for component ``j`` (vectorised over ``z``)."""
        return lambda z: self(z)[j]

    def series(self, order):
        comps = np.zeros((self.dim, order + 1), dtype=complex)
        for vec, h in self.terms:
            comps += np.outer(vec, chain_series(self.eigenvalue, h, self.alpha, order).coeffs)
        return [TruncatedSeries(row) for row in comps]

    def scaled(self, factor, term_index):
        """Copy with one chain vector multiplied by ``factor`` (for sensitivity tests)."""
        terms = [(v * factor if i == term_index else v, h) for i, (v, h) in enumerate(self.terms)]
        return FundamentalSolution(self.eigenvalue, self.chain_index, terms, self.alpha)

    def to_dict(self):
        return {
            "eigenvalue": [self.eigenvalue.real, self.eigenvalue.imag],
            "chain_index": self.chain_index,
            "vectors": [
                {"h": h, "vector": [[x.real, x.imag] for x in v.tolist()]} for v, h in self.terms
            ],
        }


@dataclass
class SolutionCombination:
    """Linear combination ``sum_i c_i y_i`` of fundamental solutions."""

    parts: list  # (coefficient, FundamentalSolution)

    @property
    def dim(self):
        return self.parts[0][1].dim

    def __call__(self, z):
        return sum(c * y(z) for c, y in self.parts)

    def series(self, order):
        rows = None
        for c, y in self.parts:
            coeffs = np.array([s.coeffs for s in y.series(order)]) * c
            rows = coeffs if rows is None else rows + coeffs
        return [TruncatedSeries(r) for r in rows]


def fundamental_solutions(A, alpha, tol=1e-8, chains=None):
    if not alpha > -1:
        raise DomainError("alpha must exceed -1")
    chains = chains or jordan_chains(A, tol)
    out = []
    for chain in chains.chains:
        v = chain.vectors
        for k in range(1, chain.length + 1):
            terms = [(v[k - 1 - i], i) for i in range(k)]
            out.append(FundamentalSolution(chain.eigenvalue, k, terms, float(alpha)))
    return out


def residual_check(y, A, alpha, order=60):
    """Normalised coefficient residual of ``Lambda_alpha y - A y`` up to degree ``order-1``."""
    if order < 8:
        raise DomainError("order must be at least 8")
    A = np.asarray(A, dtype=complex)
    seq = _dunkl_sequence(alpha, order)
    comps = y.series(order)
    Y = np.array([c.coeffs for c in comps])
    dY = np.array([moment_derivative(c, seq).coeffs for c in comps])
    AY = A @ Y[:, :order]
    scale = np.abs(Y).max()
    if scale == 0:
        return 0.0
    return float(np.abs(dY - AY).max() / scale)


def fundamental_matrix_smin(solutions, alpha):
    """Smallest singular value of the stacked ``d^i y(0)``, ``i < n`` (columns normalised)."""
    n = solutions[0].dim
    seq = _dunkl_sequence(alpha, n)
    cols = []
    for y in solutions:
        comps = y.series(max(n - 1, 1))
        moments = np.array(
            [[c.coeffs[i] * math.exp(seq.log(i)) for i in range(n)] for c in comps]
        ).ravel()
        cols.append(moments / np.linalg.norm(moments))
    return float(np.linalg.svd(np.column_stack(cols), compute_uv=False).min())


# -- asymptotics -----------------------------------------------------------

def _wrap(theta):
    return (theta + math.pi) % (2 * math.pi) - math.pi


def decay_sector(eigenvalues):
    """Intersection of the arcs ``(pi/2 - arg lam, 3pi/2 - arg lam)``.

    Returns ``(lo, hi)`` in radians (``hi - lo <= pi``) or ``None`` when empty.
    """
    eigenvalues = [complex(e) for e in eigenvalues]
    if not eigenvalues or any(e == 0 for e in eigenvalues):
        return None
    starts = [math.pi / 2 - math.atan2(e.imag, e.real) for e in eigenvalues]
    ref = starts[0]
    lo, hi = 0.0, math.pi
    for s in starts[1:]:
        d = _wrap(s - ref)
        if d == -math.pi:
            d = math.pi
        lo = max(lo, d)
        hi = min(hi, d + math.pi)
    if lo >= hi:
        return None
    return ref + lo, ref + hi


def h_exponential(theta):
    """Indicator of the exponential: ``cos theta`` on the right half-plane, 0 elsewhere."""
    t = _wrap(theta)
    return math.cos(t) if abs(t) <= math.pi / 2 else 0.0


def indicator_bound(theta, eigenvalues):
    return max(abs(lam) * h_exponential(theta + math.atan2(lam.imag, lam.real))
               for lam in map(complex, eigenvalues))


@dataclass
class AsymptoticsReport:
    growth: list  # (solution index, component, GrowthReport)
    order_ok: bool
    type_ok: bool
    sector: tuple | None
    decay: list  # (solution index, component, DecayReport)
    decay_ok: bool | None
    indicator_ok: bool | None
    indicator_violations: list
    notices: list

    def to_dict(self):
        return {
            "growth": [
                {"solution": i, "component": j, **g.to_dict()} for i, j, g in self.growth
            ],
            "order_ok": self.order_ok,
            "type_ok": self.type_ok,
            "sector": list(self.sector) if self.sector else None,
            "decay": [{"solution": i, "component": j, **d.to_dict()} for i, j, d in self.decay],
            "decay_ok": self.decay_ok,
            "indicator_ok": self.indicator_ok,
            "indicator_violations": self.indicator_violations,
            "notices": self.notices,
        }


def solution_asymptotics(solutions, radii, directions, decay_radii=None,
                         diagonalizable=None, slack=0.15):
    """Growth, sector decay and indicator checks for a fundamental system."""
    eigs = sorted({complex(y.eigenvalue) for y in solutions}, key=lambda e: (e.real, e.imag))
    sigma_bound = max(abs(e) for e in eigs)
    if diagonalizable is None:
        diagonalizable = all(len(y.terms) == 1 for y in solutions) and all(
            y.chain_index == 1 for y in solutions
        )
    notices = []
    growth = []
    order_ok = type_ok = True
    for i, y in enumerate(solutions):
        for j in range(y.dim):
            if all(v[j] == 0 for v, _ in y.terms):
                continue
            rep = growth_scan(y.component(j), radii, directions)
            growth.append((i, j, rep))
            order_ok &= rep.rho <= 1.1
            type_ok &= rep.sigma <= 1.15 * sigma_bound
    sector = None
    decay = []
    decay_ok = indicator_ok = None
    violations = []
    if not diagonalizable:
        notices.append("A is not diagonalizable: sector and indicator checks skipped")
    else:
        sector = decay_sector(eigs)
        if sector is None:
            notices.append("decay sector is empty: decay check skipped")
        else:
            mid = _wrap(0.5 * (sector[0] + sector[1]))
            dr = decay_radii if decay_radii is not None else np.linspace(5.0, 60.0, 12)
            decay_ok = True
            for i, y in enumerate(solutions):
                for j in range(y.dim):
                    if all(v[j] == 0 for v, _ in y.terms):
                        continue
                    rep = decay_scan(y.component(j), mid, dr)
                    decay.append((i, j, rep))
                    decay_ok &= rep.decaying
        indicator_ok = True
        tol = slack * sigma_bound
        for i, j, rep in growth:
            for sample in rep.indicator:
                bound = indicator_bound(sample["theta"], eigs)
                if sample["h"] > bound + tol:
                    indicator_ok = False
                    violations.append({"solution": i, "component": j, "theta": sample["theta"],
                                       "h": sample["h"], "bound": bound})
    return AsymptoticsReport(growth, bool(order_ok), bool(type_ok), sector, decay,
                             decay_ok, indicator_ok, violations, notices)
