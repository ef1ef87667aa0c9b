"""Eigenstates of an element in the sense of sesquilinear forms.

``phi`` is an eigenstate of ``a`` with eigenvalue ``lam`` when
``phi(b, a) = lam * phi(b, e)`` for every ``b``.  Quantified statements are
checked over the d^2 matrix units, which is exhaustive by linearity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import AlgebraContext, Element, operator_norm
from .errors import DegenerateFormError, NoEigenstateError, ValidationError
from .forms import Flavor, TraceForm, _form, against_basis, dual, normalize

__all__ = [
    "EigenReport",
    "PolynomialCheck",
    "eigen_residual",
    "eigenvalue_extract",
    "is_eigenstate",
    "eigenstate_construct",
    "independence_rank",
    "polynomial_eigen_check",
    "kernel_basis",
]

EPS = np.finfo(float).eps


def _against_basis_first(f: TraceForm, x: np.ndarray) -> np.ndarray:
    """``M[i, j] = f(x, E_ij)``, computed directly rather than by conjugation."""
    xh = x.conj().T
    if f.flavor is Flavor.RIGHT:
        return (f.weight @ xh).T / f.context.dim
    return (xh @ f.weight).T / f.context.dim


def _require_right(f: TraceForm, what: str) -> None:
    if f.flavor is not Flavor.RIGHT:
        raise ValidationError(f"{what} expects a RIGHT form")


def eigen_residual(f: TraceForm, a: Element, lam: complex) -> float:
    """``phi(a - lam e, a - lam e)``; zero exactly for eigenstates."""
    _require_right(f, "eigen_residual")
    m = a.matrix - lam * np.eye(a.context.dim)
    val = np.trace(f.weight @ m.conj().T @ m).real / a.context.dim
    return max(float(val), 0.0)


def eigenvalue_extract(f: TraceForm, a: Element) -> complex:
    """Candidate eigenvalue ``phi(e, a) / phi(e, e)``."""
    e = a.context.identity()
    norm = f(e, e)
    if abs(norm) <= 1e-300:
        raise DegenerateFormError("phi(e, e) = 0; no eigenvalue can be extracted")
    return f(e, a) / norm


@dataclass(frozen=True)
class EigenReport:
    lam: complex
    residual: float
    factorization_defect: float
    dual_defects: tuple[float, float, float, float]
    modulus_check: float
    is_eigenstate: bool
    tol: float
    defect_tol: float
    cs_amplification: float
    hermitian_imag: float | None = None

    @property
    def statements(self) -> tuple[bool, bool, bool, bool]:
        """Status of the four equivalent statements at ``defect_tol``."""
        return tuple(d <= self.defect_tol for d in self.dual_defects)


def is_eigenstate(f: TraceForm, a: Element, tol: float = 1e-10,
                  defect_tol: float = 1e-8) -> EigenReport:
    """Full eigenstate diagnosis of ``f`` against ``a``.

    The form is normalized to ``phi(e, e) = 1`` first.  ``dual_defects`` are
    the worst-case violations, over the matrix-unit basis, of

    (i)   phi(b, a)  = lam      phi(b, e)
    (ii)  psi(b, a*) = conj(lam) psi(b, e)
    (iii) phi(a, b)  = conj(lam) phi(e, b)
    (iv)  psi(a*, b) = lam      psi(e, b)

    with ``psi`` the dual form.
    """
    _require_right(f, "is_eigenstate")
    f = normalize(f)
    psi = dual(f)
    d = a.context.dim
    eye = np.eye(d)
    A = a.matrix
    Ah = A.conj().T
    lam = eigenvalue_extract(f, a)

    m_a = against_basis(f, A)
    m_e = against_basis(f, eye)
    fact = float(np.abs(m_a - m_e * (f(a.context.identity(), a))).max())
    d1 = float(np.abs(m_a - lam * m_e).max())
    d2 = float(np.abs(against_basis(psi, Ah) - np.conj(lam) * against_basis(psi, eye)).max())
    d3 = float(np.abs(_against_basis_first(f, A) - np.conj(lam) * _against_basis_first(f, eye)).max())
    d4 = float(np.abs(_against_basis_first(psi, Ah) - lam * _against_basis_first(psi, eye)).max())
    phi_aa = np.trace(f.weight @ Ah @ A).real / d
    residual = eigen_residual(f, a, lam)
    # |phi(b, a - lam e)| <= sqrt(phi(b, b)) sqrt(residual); phi(E_ij, E_ij) = W_jj / d
    kappa = float(np.sqrt(max(np.diag(f.weight).real.max() / d, 0.0)))
    herm = None
    if np.abs(A - Ah).max() <= 1e-14 * max(np.abs(A).max(), 1.0):
        herm = abs(lam.imag)
    return EigenReport(
        lam=complex(lam),
        residual=residual,
        factorization_defect=fact,
        dual_defects=(d1, d2, d3, d4),
        modulus_check=float(abs(phi_aa - abs(lam) ** 2)),
        is_eigenstate=residual <= tol,
        tol=tol,
        defect_tol=defect_tol,
        cs_amplification=kappa,
        hermitian_imag=herm,
    )


def kernel_basis(m: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal columns spanning the singular vectors with singular value <= tol."""
    _, s, vh = np.linalg.svd(m)
    return vh[s <= tol].conj().T


def eigenstate_construct(a: Element, lam: complex, ctx: AlgebraContext | None = None,
                         rtol: float | None = None) -> TraceForm:
    """RIGHT form with weight ``d * P / Tr(P)``, P the projector onto ker(a - lam e).

    ``tau(W M) = 0`` for PSD ``W`` and ``M = (a - lam e)*(a - lam e)`` exactly
    when range(W) lies in ker(a - lam e), so this weight is an eigenstate.
    Singular values up to ``rtol * (||a||_0 + |lam|)`` count as zero;
    ``rtol`` defaults to ``10 * d * eps``.
    """
    ctx = ctx or a.context
    d = ctx.dim
    if rtol is None:
        rtol = 10 * d * EPS
    m = a.matrix - lam * np.eye(d)
    tol = rtol * (operator_norm(a) + abs(lam))
    k = kernel_basis(m, tol)
    if k.shape[1] == 0:
        raise NoEigenstateError(f"{lam} is not an eigenvalue of the given element")
    P = k @ k.conj().T
    return _form(d * P / np.trace(P).real, Flavor.RIGHT, ctx)


def independence_rank(forms: Sequence[TraceForm]) -> int:
    """Numerical rank of the flattened weights (trace forms are equal iff weights are)."""
    if not forms:
        raise ValidationError("independence_rank needs at least one form")
    f0 = forms[0]
    for f in forms[1:]:
        if f.flavor is not f0.flavor or f.context != f0.context:
            raise ValidationError("forms must share flavor and context")
    rows = np.array([f.weight.ravel() for f in forms])
    s = np.linalg.svd(rows, compute_uv=False)
    if s[0] == 0.0:
        return 0
    d = f0.context.dim
    return int(np.sum(s > d * d * EPS * s[0]))


@dataclass(frozen=True)
class PolynomialCheck:
    defect: float
    value: complex
    growth: float


def _matrix_poly(coeffs: Sequence[complex], m: np.ndarray) -> np.ndarray:
    out = np.zeros_like(m, dtype=complex)
    eye = np.eye(m.shape[0])
    for c in reversed(list(coeffs)):
        out = out @ m + c * eye
    return out


def polynomial_eigen_check(f: TraceForm, a0: Element, coeffs: Sequence[complex],
                           tol: float = 1e-10) -> PolynomialCheck:
    """Defect of ``phi(b, p(a0)) = p(lam) phi(b, e)`` over the matrix units.

    ``coeffs`` lists the polynomial from the constant term upward.
    ``growth`` is ``sum_k |c_k| max(1, ||a0||_0)^k``, the factor by which
    rounding in ``p(a0)`` can amplify.
    """
    rep = is_eigenstate(f, a0, tol)
    if not rep.is_eigenstate:
        raise NoEigenstateError(f"form is not an eigenstate (residual {rep.residual:.3e})")
    f = normalize(f)
    lam = rep.lam
    p_lam = complex(np.polyval(list(reversed(list(coeffs))), lam))
    lhs = against_basis(f, _matrix_poly(coeffs, a0.matrix))
    rhs = p_lam * against_basis(f, np.eye(a0.context.dim))
    r = max(1.0, operator_norm(a0))
    growth = float(sum(abs(c) * r ** k for k, c in enumerate(coeffs)))
    return PolynomialCheck(float(np.abs(lhs - rhs).max()), p_lam, growth)
