import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dunklmoment.entire import E_alpha, I_alpha
from dunklmoment.errors import DomainError
from dunklmoment.sequences import MomentSequence
from dunklmoment.series import (
    TruncatedSeries,
    dunkl_apply_direct,
    euler_divergence_witness,
    even_translate,
    even_translate_averaged,
    iterated_moment_derivative,
    m_translate,
    moment_derivative,
)

FAC = MomentSequence.factorial()
GAMMA = {a: MomentSequence.dunkl(a) for a in (-0.9, -0.5, -0.25, 0.0, 0.3)}

finite = st.floats(-10, 10, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def poly(degree):
    return st.lists(cplx, min_size=degree + 1, max_size=degree + 1).map(TruncatedSeries)


def random_poly(rng, degree):
    return TruncatedSeries(rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1))


def test_moment_derivative_examples():
    assert moment_derivative(TruncatedSeries.monomial(2), FAC).allclose(TruncatedSeries([0, 2]))
    assert moment_derivative(TruncatedSeries.monomial(3), GAMMA[0.0]).allclose(
        TruncatedSeries([0, 0, 4]))
    const = moment_derivative(TruncatedSeries([7]), GAMMA[0.3])
    assert const.order == 0 and const.coeffs[0] == 0


def test_dunkl_direct_examples():
    assert dunkl_apply_direct(TruncatedSeries.monomial(2), 0.3).allclose(TruncatedSeries([0, 2]))
    assert dunkl_apply_direct(TruncatedSeries.monomial(3), 0.0).allclose(TruncatedSeries([0, 0, 4]))
    assert dunkl_apply_direct(TruncatedSeries.monomial(1), -0.5).allclose(TruncatedSeries([1]))
    with pytest.raises(DomainError):
        dunkl_apply_direct(TruncatedSeries.monomial(1), -1.0)


def test_evaluate_examples():
    assert TruncatedSeries([1, 1]).evaluate(1j) == 1 + 1j
    assert TruncatedSeries.monomial(2).evaluate(2) == 4
    e = TruncatedSeries([1 / math.factorial(p) for p in range(31)])
    assert abs(e(1.0) - math.e) < 1e-12
    z = np.array([0.5, 1j])
    assert np.allclose(e(z), np.exp(z), rtol=1e-12)


@settings(max_examples=60)
@given(poly(64), st.sampled_from([-0.9, -0.5, -0.25, 0.0]))
def test_operator_equivalence(f, alpha):
    direct = dunkl_apply_direct(f, alpha).coeffs
    moment = moment_derivative(f, GAMMA[alpha]).coeffs
    scale = max(1.0, np.abs(direct).max())
    assert np.all(np.abs(direct - moment) <= 1e-12 * scale)


def test_m_translate_examples():
    out = m_translate(TruncatedSeries.monomial(2), 1.0, FAC)
    assert out.allclose(TruncatedSeries([1, 2, 1]), rtol=1e-14)
    f = TruncatedSeries([1, 2j, 3])
    assert m_translate(f, 0, GAMMA[0.0]) is f
    g = TruncatedSeries.exponential(GAMMA[0.0], 60)
    lhs = m_translate(g, 0.3, GAMMA[0.0])(0.5)
    rhs = E_alpha(0.3, 0.0).value * E_alpha(0.5, 0.0).value
    assert abs(lhs - rhs) < 1e-9


@settings(max_examples=40)
@given(poly(40), cplx, cplx)
def test_classical_translation_is_shift(f, y, z):
    y, z = y / 10, z / 10
    lhs = m_translate(f, y, FAC)(z)
    # oracle: direct evaluation at the shifted point
    rhs = f(z + y)
    r = abs(z) + abs(y)
    scale = max(1.0, float(np.sum(np.abs(f.coeffs) * r ** np.arange(f.order + 1))))
    assert abs(lhs - rhs) <= 1e-12 * scale


@settings(max_examples=30)
@given(poly(20), poly(20), cplx, cplx, cplx, st.sampled_from([-0.9, 0.0]))
def test_translation_linearity(f1, f2, c1, c2, y, alpha):
    seq = GAMMA[alpha]
    y = y / 10
    lhs = m_translate(c1 * f1 + c2 * f2, y, seq).coeffs
    rhs = (c1 * m_translate(f1, y, seq) + c2 * m_translate(f2, y, seq)).coeffs
    scale = max(1.0, np.abs(lhs).max())
    assert np.all(np.abs(lhs - rhs) <= 1e-12 * scale)


def test_even_translate_examples():
    out = even_translate(TruncatedSeries.monomial(2), 1.0, FAC)
    assert out.allclose(TruncatedSeries([1, 0, 1]), rtol=1e-14)
    f = TruncatedSeries([1, 2, 3])
    assert even_translate(f, 0, FAC) is f
    g = TruncatedSeries.exponential(GAMMA[0.0], 60)
    lhs = even_translate(g, 0.4, GAMMA[0.0])(0.7)
    rhs = I_alpha(0.4, 0.0).value * E_alpha(0.7, 0.0).value
    assert abs(lhs - rhs) < 1e-9


@settings(max_examples=40)
@given(poly(30), cplx, st.sampled_from([-0.9, -0.25, 0.0, 0.3]))
def test_even_translation_symmetry(f, y, alpha):
    seq = GAMMA[alpha]
    y = y / 10
    a = even_translate(f, y, seq).coeffs
    b = even_translate(f, -y, seq).coeffs
    c = even_translate_averaged(f, y, seq).coeffs
    scale = max(1.0, np.abs(a).max())
    assert np.all(np.abs(a - b) <= 1e-13 * scale)
    assert np.all(np.abs(a - c) <= 1e-13 * scale)


@settings(max_examples=40)
@given(poly(30), st.integers(0, 32), st.sampled_from([-0.9, 0.0, 0.3]))
def test_iterated_derivative_matches_direct_shift(f, times, alpha):
    seq = GAMMA[alpha]
    g = f
    for _ in range(times):
        g = moment_derivative(g, seq)
    direct = iterated_moment_derivative(f, seq, times)
    if times > f.order:
        assert np.all(g.coeffs == 0) and np.all(direct.coeffs == 0)
        return
    scale = max(1.0, np.abs(direct.coeffs).max())
    assert np.all(np.abs(g.coeffs - direct.coeffs) <= 1e-12 * scale)


def test_json_roundtrip_and_pretty():
    f = TruncatedSeries([1, 0, 2.5 - 1j])
    assert TruncatedSeries.from_json(f.to_json()).allclose(f, rtol=0)
    assert f.pretty(3) == "1 + (2.5-1j)*z^2"
    with pytest.raises(DomainError):
        TruncatedSeries.from_json("[[1, 2, 3]]")


def test_rejects_non_finite_coefficients():
    with pytest.raises(DomainError):
        TruncatedSeries([1, math.inf])


def test_degree_and_order():
    f = TruncatedSeries([1, 2, 0, 0])
    assert f.order == 3 and f.degree == 1
    assert TruncatedSeries.zero(4).degree == -1


@pytest.mark.parametrize(
    "y,n,seq,terms",
    [(0.1, 0, FAC, 100), (1.0, 2, GAMMA[-0.25], 100), (0.01, 0, FAC, 200)],
    ids=["y=0.1", "dunkl-y=1", "y=0.01"],
)
def test_divergence_witness(y, n, seq, terms):
    w = euler_divergence_witness(y, n, seq, terms)
    assert w.increasing_from is not None and w.increasing_from <= 20
    assert np.all(np.diff(w.log_ratios[20:]) > 0)
    assert w.diverges


def test_divergence_witness_terms_grow_for_dunkl_case():
    w = euler_divergence_witness(1.0, 2, GAMMA[-0.25], 100)
    assert np.all(np.diff(w.log_terms[5:]) > 0)


def test_divergence_witness_log_terms_oracle():
    w = euler_divergence_witness(0.1, 0, FAC, 30)
    p = np.arange(31)
    exact = np.array([2 * math.lgamma(k + 1) - math.lgamma(k + 1) for k in p]) + p * math.log(0.1)
    assert np.allclose(w.log_terms, exact, rtol=1e-13, atol=1e-12)


def test_divergence_witness_needs_nonzero_y():
    with pytest.raises(DomainError):
        euler_divergence_witness(0, 0, FAC, 10)
