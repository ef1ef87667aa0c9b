import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sesqui import (
    CoherentUndefinedError,
    build_quon,
    coherent_form,
    coherent_lowering_defect,
    diagonal_similarity,
    empirical_radius,
    evaluate_coherent,
    ladder_forms,
    majorant_tail,
    radius,
    rho_prime_limit,
    vacuum_form,
)
from sesqui.coherent import coherent_terms, full_depth_value
from sesqui.quon import beta_factorial


def series_oracle(m, z, a, b, L):
    # direct sum of z^l / (beta_l!)^2 phi_l(a, b)
    forms = ladder_forms(m, min(L, m.valid_depth))
    return sum(z ** l / beta_factorial(m.q, l) ** 2 * f(a, b) for l, f in enumerate(forms))


def test_radius_examples():
    assert rho_prime_limit(1) == math.inf
    assert rho_prime_limit(0.5) == pytest.approx(4.0)
    assert empirical_radius(0.5, l=200) == pytest.approx(4.0, rel=0.01)
    m = build_quon(0, 8)
    r = radius(m)
    assert r.rho_prime == 1 and r.rho == pytest.approx(1 / r.norm_y0_sq)
    assert r.rho_prime_printed == 1
    assert radius(build_quon(0.5, 8)).rho_prime_printed == pytest.approx(2.0)
    with pytest.raises(CoherentUndefinedError):
        radius(build_quon(-1, 8))
    with pytest.raises(CoherentUndefinedError):
        coherent_form(build_quon(-1, 8), 0.1)


@pytest.mark.parametrize("q", [-0.5, 0.0, 0.5, 0.9])
def test_ratio_test_matches_limit(q):
    assert empirical_radius(q) == pytest.approx(rho_prime_limit(q), rel=0.01)
    assert rho_prime_limit(q) == pytest.approx(1 / (1 - q) ** 2, rel=1e-12)


def test_z_zero_is_vacuum():
    m = build_quon(0.5, 8)
    cf = coherent_form(m, 0)
    assert np.allclose(cf.kernel, vacuum_form(m).weight)
    assert cf.truncation_order == 0
    assert coherent_lowering_defect(m, 0) <= 1e-12


def test_z_outside_disc_rejected():
    m = build_quon(0.5, 8)
    with pytest.raises(CoherentUndefinedError):
        coherent_form(m, radius(m).rho)


@pytest.mark.parametrize("q,N,z", [(0.5, 12, None), (0.0, 12, None), (0.9, 12, None), (1.0, 12, 2.0),
                                   (1.0, 16, 2.0)])
def test_lowering_identity(q, N, z):
    for S in (None, diagonal_similarity(N)):
        m = build_quon(q, N, S)
        zz = z if z is not None else 0.3 * radius(m).rho
        assert coherent_lowering_defect(m, zz) <= 1e-8


def test_complex_z_matches_series():
    m = build_quon(0.5, 10)
    z = 0.2 * radius(m).rho * np.exp(0.7j)
    rng = np.random.default_rng(1)
    a = m.context.element(rng.normal(size=(11, 11)) + 1j * rng.normal(size=(11, 11)))
    b = m.context.element(rng.normal(size=(11, 11)))
    cv = evaluate_coherent(m, z, a, b)
    assert cv.value == pytest.approx(series_oracle(m, z, a, b, cv.order), rel=1e-12)


@pytest.mark.parametrize("q", [0.0, 0.5, 0.9, 1.0])
def test_tail_bound_dominates_remainder(q):
    m = build_quon(q, 12)
    z = 2.0 if q == 1 else 0.3 * radius(m).rho
    rng = np.random.default_rng(7)
    for _ in range(100):
        a = m.context.element(rng.normal(size=(13, 13)) + 1j * rng.normal(size=(13, 13)))
        b = m.context.element(rng.normal(size=(13, 13)) + 1j * rng.normal(size=(13, 13)))
        cv = evaluate_coherent(m, z, a, b, eps=1e-6)
        dropped = abs(full_depth_value(m, z, a, b) - cv.value)
        assert dropped <= cv.tail + 1e-13 * abs(cv.value)


def test_majorant_tail_against_direct_sum():
    for q, t in [(0.5, 1.0), (0.0, 0.3), (1.0, 3.0), (-0.5, 0.2)]:
        terms = []
        term, b = 1.0, 0.0
        for l in range(1, 400):
            b = 1 + q * b
            term *= t / b ** 2
            terms.append(term)
        for L in (0, 2, 5):
            direct = sum(terms[L:])
            assert direct <= majorant_tail(q, t, L) <= direct * (1 + 1e-9)


def test_coherent_terms_shape():
    m = build_quon(0.5, 6)
    terms = coherent_terms(m, 0.1, 3)
    assert len(terms) == 4
    assert np.allclose(terms[0], vacuum_form(m).weight)


@given(st.floats(0.0, 0.95), st.floats(0.0, 0.9))
def test_lowering_identity_property(q, frac):
    m = build_quon(q, 8)
    assert coherent_lowering_defect(m, frac * radius(m).rho) <= 1e-8
