"""Weighted trace forms and the operations performed on them.

A RIGHT form is ``phi(a, b) = tau(W a* b)``; it satisfies the module
identity ``phi(a x, y) = phi(x, a* y)``.  A LEFT form is
``psi(a, b) = tau(a* W b)`` and satisfies ``psi(x a, y) = psi(x, y a*)``.
Every operation on forms is realized as an explicit transformation of the
weight, so two forms are equal exactly when their weights are.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import AlgebraContext, Element, matrix_schatten
from .errors import DegenerateFormError, UnsupportedFlavorError, ValidationError

__all__ = [
    "Flavor",
    "TraceForm",
    "FormNorm",
    "make_trace_form",
    "evaluate",
    "against_basis",
    "continuity_constant",
    "pullback",
    "dual",
    "convex_combine",
    "form_norm",
    "normalize",
]

HERMITIAN_RTOL = 1e-10
PSD_RTOL = 1e-12


class Flavor(enum.Enum):
    RIGHT = "right"
    LEFT = "left"


@dataclass(frozen=True, eq=False)
class TraceForm:
    weight: np.ndarray
    flavor: Flavor
    context: AlgebraContext

    def __call__(self, a: Element, b: Element) -> complex:
        return evaluate(self, a, b)

    def __repr__(self):
        return f"TraceForm(flavor={self.flavor.value}, dim={self.context.dim}, tau(W)={self.tau_weight():.6g})"

    def tau_weight(self) -> float:
        """phi(e, e) = tau(W)."""
        return float(np.trace(self.weight).real) / self.context.dim

    def same_as(self, other: "TraceForm", atol: float = 1e-12) -> bool:
        return (
            self.flavor is other.flavor
            and self.context == other.context
            and bool(np.allclose(self.weight, other.weight, rtol=0.0, atol=atol))
        )


def _freeze(w: np.ndarray) -> np.ndarray:
    w = np.array(0.5 * (w + w.conj().T), dtype=complex)
    w.flags.writeable = False
    return w


def _form(weight: np.ndarray, flavor: Flavor, ctx: AlgebraContext) -> TraceForm:
    return TraceForm(_freeze(weight), flavor, ctx)


def make_trace_form(W, flavor: Flavor = Flavor.RIGHT, ctx: AlgebraContext | None = None,
                    normalize: bool = False) -> TraceForm:
    """Validate a PSD weight and wrap it as a trace form.

    Eigenvalues in ``[-1e-12 * lambda_max, 0)`` are treated as rounding noise
    and clipped to zero; anything more negative is rejected.
    """
    if ctx is None:
        if not isinstance(W, Element):
            raise ValidationError("an algebra context is required")
        ctx = W.context
    W = np.array(W.matrix if isinstance(W, Element) else W, dtype=complex)
    if W.shape != (ctx.dim, ctx.dim):
        raise ValidationError(f"weight shape {W.shape} does not match dimension {ctx.dim}")
    flavor = Flavor(flavor)
    scale = np.abs(W).max(initial=0.0)
    if np.abs(W - W.conj().T).max(initial=0.0) > HERMITIAN_RTOL * max(scale, 1e-300):
        raise ValidationError("weight is not Hermitian")
    W = 0.5 * (W + W.conj().T)
    evals, evecs = np.linalg.eigh(W)
    top = max(evals.max(initial=0.0), 0.0)
    if evals.min(initial=0.0) < -PSD_RTOL * top or (top == 0.0 and evals.min(initial=0.0) < 0):
        raise ValidationError(f"weight has a negative eigenvalue {evals.min():.3e}")
    if evals.min(initial=0.0) < 0:
        W = (evecs * np.clip(evals, 0.0, None)) @ evecs.conj().T
    if normalize:
        t = np.trace(W).real / ctx.dim
        if t == 0.0:
            raise DegenerateFormError("cannot normalize: phi(e, e) = 0")
        W = W / t
    return _form(W, flavor, ctx)


def _check_ctx(f: TraceForm, *elements: Element) -> None:
    for x in elements:
        if x.context != f.context:
            raise ValidationError("element and form belong to different algebra contexts")


def evaluate(f: TraceForm, a: Element, b: Element) -> complex:
    """phi(a, b): conjugate-linear in ``a``, linear in ``b``."""
    _check_ctx(f, a, b)
    ah = a.matrix.conj().T
    if f.flavor is Flavor.RIGHT:
        m = f.weight @ ah @ b.matrix
    else:
        m = ah @ f.weight @ b.matrix
    return complex(np.trace(m)) / f.context.dim


def against_basis(f: TraceForm, x: Element | np.ndarray) -> np.ndarray:
    """Matrix ``M`` with ``M[i, j] = f(E_ij, x)`` for every matrix unit E_ij."""
    m = x.matrix if isinstance(x, Element) else np.asarray(x)
    if f.flavor is Flavor.RIGHT:
        return m @ f.weight / f.context.dim
    return f.weight @ m / f.context.dim


def _weight_exponent(p: float) -> float:
    return math.inf if p == 2 else p / (p - 2)


def continuity_constant(f: TraceForm) -> float:
    """Hoelder constant ``||W||_{p/(p-2)}`` (operator norm at p = 2).

    ``|f(a, b)| <= gamma * ||a||_p * ||b||_p``; gamma <= 1 places the form in
    the unit-continuity class.
    """
    return matrix_schatten(f.weight, _weight_exponent(f.context.p))


def pullback(f: TraceForm, x: Element) -> TraceForm:
    """The form ``a, b -> f(a x, b x)``, with weight ``x W x*``."""
    if f.flavor is not Flavor.RIGHT:
        raise UnsupportedFlavorError("pullback is defined for RIGHT forms only")
    _check_ctx(f, x)
    return _form(x.matrix @ f.weight @ x.matrix.conj().T, Flavor.RIGHT, f.context)


def dual(f: TraceForm) -> TraceForm:
    """``psi(a, b) = f(b*, a*)``: same weight, opposite flavor."""
    other = Flavor.LEFT if f.flavor is Flavor.RIGHT else Flavor.RIGHT
    return TraceForm(f.weight, other, f.context)


def normalize(f: TraceForm) -> TraceForm:
    """Rescale so that phi(e, e) = 1."""
    t = f.tau_weight()
    if abs(t) == 0.0:
        raise DegenerateFormError("phi(e, e) = 0")
    return TraceForm(_freeze(f.weight / t), f.flavor, f.context)


def convex_combine(weights: Sequence[float], forms: Sequence[TraceForm]) -> TraceForm:
    if len(weights) != len(forms) or not forms:
        raise ValidationError("need one coefficient per form and at least one form")
    qs = np.asarray(weights, dtype=float)
    if np.any(qs < 0) or np.any(qs > 1) or abs(qs.sum() - 1.0) > 1e-12:
        raise ValidationError("coefficients must lie in [0, 1] and sum to 1")
    f0 = forms[0]
    for f in forms[1:]:
        if f.flavor is not f0.flavor:
            raise ValidationError("cannot mix RIGHT and LEFT forms")
        if f.context != f0.context:
            raise ValidationError("forms live on different algebra contexts")
    W = sum(q * f.weight for q, f in zip(qs, forms))
    return _form(W, f0.flavor, f0.context)


@dataclass(frozen=True)
class FormNorm:
    """``sup_{||a||_p = 1} phi(a, a)``.

    ``exact`` is False when ``value`` is an ascent estimate (a lower bound);
    ``upper`` is the continuity constant, which always bounds the supremum.
    """

    value: float
    exact: bool
    upper: float

    @property
    def marker(self) -> str:
        return "exact" if self.exact else "lower-bound estimate"


def form_norm(f: TraceForm, starts: int = 32, seed: int = 0, max_iter: int = 1000) -> FormNorm:
    """Norm of a form over the unit Schatten-p sphere.

    At p = 2 the supremum of ``tau(W a* a) / tau(a* a)`` is lambda_max(W).
    For p > 2 the sphere has no closed form maximizer in general, so the
    value is the best of ``starts`` Riemannian gradient ascents.
    """
    W = f.weight
    upper = continuity_constant(f)
    if f.context.p == 2:
        return FormNorm(float(np.linalg.eigvalsh(W).max()), True, upper)
    # psi(a, a) = tau(W a a*) has the same supremum as tau(W a* a) (swap a and a*)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(starts):
        a0 = rng.normal(size=W.shape) + 1j * rng.normal(size=W.shape)
        best = max(best, _sphere_ascent(W, f.context.p, a0, max_iter))
    return FormNorm(best, False, upper)


def _sphere_ascent(W: np.ndarray, p: float, a: np.ndarray, max_iter: int) -> float:
    d = W.shape[0]

    def objective(m):
        return float(np.real(np.trace(W @ m.conj().T @ m))) / d

    def project(m):
        return m / matrix_schatten(m, p)

    a = project(a)
    val = objective(a)
    step = 1.0 / max(np.abs(W).max(), 1e-300)
    for _ in range(max_iter):
        grad = a @ W
        u, s, vh = np.linalg.svd(a)
        normal = (u * s ** (p - 1)) @ vh
        nn = np.vdot(normal, normal).real
        tangent = grad - (np.vdot(normal, grad).real / nn) * normal
        if np.linalg.norm(tangent) <= 1e-14 * max(np.linalg.norm(grad), 1e-300):
            break
        while True:
            cand = project(a + step * tangent)
            cval = objective(cand)
            if cval > val or step < 1e-16:
                break
            step *= 0.5
        if cval <= val:
            break
        gain = cval - val
        a, val = cand, cval
        step *= 2.0
        if gain <= 1e-13 * abs(val):
            break
    return val
