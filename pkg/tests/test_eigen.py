import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rand_matrix, rand_psd, seeds
from sesqui import (
    DegenerateFormError,
    NoEigenstateError,
    ValidationError,
    build_quon,
    dual,
    eigen_residual,
    eigenstate_construct,
    eigenvalue_extract,
    independence_rank,
    is_eigenstate,
    ladder_forms,
    make_context,
    make_trace_form,
    polynomial_eigen_check,
    vacuum_form,
)

CTX2 = make_context(2)
W20 = make_trace_form(np.diag([2.0, 0.0]), ctx=CTX2)


def residual_oracle(W, a, lam):
    # sum over matrix units of |phi(E_ij, a - lam e)|^2 vanishes iff phi is an eigenstate
    d = W.shape[0]
    m = a - lam * np.eye(d)
    return np.trace(W @ m.conj().T @ m).real / d


def test_residual_examples():
    a = CTX2.element(np.diag([2.0, 3.0]))
    assert eigen_residual(W20, CTX2.scalar(5), 5) == 0
    assert eigen_residual(W20, a, 2) == pytest.approx(0, abs=1e-15)
    assert eigen_residual(W20, a, 3) == pytest.approx(1.0)


def test_extract_examples():
    assert eigenvalue_extract(W20, CTX2.scalar(3)) == pytest.approx(3)
    assert eigenvalue_extract(W20, CTX2.element(np.diag([2.0, 3.0]))) == pytest.approx(2)
    with pytest.raises(DegenerateFormError):
        eigenvalue_extract(make_trace_form(np.zeros((2, 2)), ctx=CTX2), CTX2.identity())


def test_projection_example():
    # W a projection weight, a = alpha times that projection: eigenvalue alpha
    ctx = make_context(3)
    P = np.diag([1.0, 1.0, 0.0])
    f = make_trace_form(P, ctx=ctx)
    rep = is_eigenstate(f, ctx.element(2.5 * P))
    assert rep.lam == pytest.approx(2.5) and rep.is_eigenstate


def test_is_eigenstate_examples():
    rep = is_eigenstate(W20, CTX2.scalar(1.5))
    assert rep.is_eigenstate and max(rep.dual_defects) == 0 and rep.residual == 0
    rep = is_eigenstate(W20, CTX2.element([[2, 1], [0, 3]]))
    assert rep.is_eigenstate and rep.lam == pytest.approx(2)
    m = build_quon(0.5, 6)
    rep = is_eigenstate(vacuum_form(m), m.x0)
    assert abs(rep.lam) <= 1e-12 and rep.residual <= 1e-12
    with pytest.raises(ValidationError):
        is_eigenstate(dual(W20), CTX2.identity())


def test_construct_examples():
    f = eigenstate_construct(CTX2.element(np.diag([2.0, 3.0])), 2)
    assert np.allclose(f.weight, np.diag([2.0, 0]))
    f = eigenstate_construct(CTX2.element([[0, 1], [0, 0]]), 0)
    assert np.allclose(f.weight, np.diag([2.0, 0]))
    with pytest.raises(NoEigenstateError):
        eigenstate_construct(CTX2.element(np.diag([2.0, 3.0])), 5)


def test_independence_examples():
    assert independence_rank([W20, W20]) == 1
    ctx = make_context(3)
    a = ctx.element(np.diag([1.0, 2.0, 3.0]))
    assert independence_rank([eigenstate_construct(a, lam) for lam in (1, 2, 3)]) == 3
    assert independence_rank(ladder_forms(build_quon(0.5, 8), 3)) == 4
    with pytest.raises(ValidationError):
        independence_rank([])


def test_polynomial_examples():
    a0 = CTX2.element(np.diag([2.0, 3.0]))
    rep = is_eigenstate(W20, a0)
    assert polynomial_eigen_check(W20, a0, [0, 1]).defect == pytest.approx(rep.dual_defects[0], abs=1e-15)
    sq = polynomial_eigen_check(W20, a0, [0, 0, 1])
    assert sq.defect == 0 and sq.value == pytest.approx(4)
    cubic = polynomial_eigen_check(W20, a0, [1, 1, 0, 1])
    assert cubic.defect <= 1e-10 and cubic.value == pytest.approx(11)
    with pytest.raises(NoEigenstateError):
        polynomial_eigen_check(W20, CTX2.element([[0, 1], [1, 0]]), [0, 1])


@given(st.integers(2, 4), seeds)
def test_constructed_eigenstates(d, seed):
    rng = np.random.default_rng(seed)
    ctx = make_context(d)
    a = ctx.element(rand_matrix(rng, d))
    lam = np.linalg.eigvals(a.matrix)[rng.integers(d)]
    f = eigenstate_construct(a, lam)
    rep = is_eigenstate(f, a)
    assert rep.residual <= 1e-10
    assert rep.factorization_defect <= 1e-8
    assert all(rep.statements)
    assert rep.modulus_check <= 1e-10
    assert rep.lam == pytest.approx(lam, abs=1e-8)


@given(st.integers(2, 4), seeds)
def test_criterion_and_dual_equivalence(d, seed):
    rng = np.random.default_rng(seed)
    ctx = make_context(d)
    a = ctx.element(rand_matrix(rng, d))
    f = make_trace_form(rand_psd(rng, d, rank=int(rng.integers(1, d + 1))), ctx=ctx, normalize=True)
    rep = is_eigenstate(f, a)
    assert rep.residual == pytest.approx(residual_oracle(f.weight, a.matrix, rep.lam), abs=1e-12)
    assert rep.is_eigenstate == (rep.factorization_defect <= rep.defect_tol)
    assert len(set(rep.statements)) == 1


@given(st.integers(2, 4), seeds)
def test_hermitian_eigenvalues_are_real(d, seed):
    rng = np.random.default_rng(seed)
    ctx = make_context(d)
    m = rand_matrix(rng, d)
    h = ctx.element(m + m.conj().T)
    lam = np.linalg.eigvalsh(h.matrix)[0]
    rep = is_eigenstate(eigenstate_construct(h, lam), h)
    assert rep.hermitian_imag is not None and rep.hermitian_imag <= 1e-10
