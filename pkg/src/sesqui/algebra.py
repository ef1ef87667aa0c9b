"""Finite-dimensional model of the Banach quasi *-algebra (L^p(tau), L^inf(tau)).

Elements are complex d x d matrices.  The trace is normalized,
``tau(X) = Tr(X) / d``, so that the identity has unit norm for every
Schatten index.  The "big" norm is the normalized Schatten-p norm and the
"small" norm is the operator norm; as sets the two algebras coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ValidationError

__all__ = [
    "AlgebraContext",
    "Element",
    "make_context",
    "multiply",
    "adjoint",
    "schatten_norm",
    "matrix_schatten",
    "operator_norm",
    "trace",
]


@dataclass(frozen=True)
class AlgebraContext:
    """Dimension ``dim`` and Schatten exponent ``p`` of the model algebra."""

    dim: int
    p: float
    trace_convention: str = "normalized"

    def element(self, matrix) -> "Element":
        return Element(matrix, self)

    def identity(self) -> "Element":
        return Element(np.eye(self.dim), self)

    def unit(self, i: int, j: int) -> "Element":
        """Matrix unit E_ij."""
        m = np.zeros((self.dim, self.dim), dtype=complex)
        m[i, j] = 1.0
        return Element(m, self)

    def basis(self) -> Iterator["Element"]:
        """Matrix units in row-major order."""
        for i in range(self.dim):
            for j in range(self.dim):
                yield self.unit(i, j)

    def scalar(self, c: complex) -> "Element":
        return Element(c * np.eye(self.dim), self)


class Element:
    """An element of the algebra: an immutable d x d complex matrix."""

    __slots__ = ("matrix", "context")

    def __init__(self, matrix, context: AlgebraContext):
        m = np.array(matrix, dtype=complex, copy=True)
        if m.shape != (context.dim, context.dim):
            raise ValidationError(
                f"matrix shape {m.shape} does not match context dimension {context.dim}"
            )
        m.flags.writeable = False
        self.matrix = m
        self.context = context

    def __repr__(self):
        return f"Element(dim={self.context.dim}, p={self.context.p})"

    def __matmul__(self, other: "Element") -> "Element":
        return multiply(self, other)

    def __add__(self, other: "Element") -> "Element":
        _check_same(self, other)
        return Element(self.matrix + other.matrix, self.context)

    def __sub__(self, other: "Element") -> "Element":
        _check_same(self, other)
        return Element(self.matrix - other.matrix, self.context)

    def __mul__(self, c) -> "Element":
        return Element(c * self.matrix, self.context)

    __rmul__ = __mul__

    def __neg__(self) -> "Element":
        return Element(-self.matrix, self.context)

    @property
    def H(self) -> "Element":
        return adjoint(self)

    def allclose(self, other: "Element", atol: float = 1e-12) -> bool:
        _check_same(self, other)
        return bool(np.allclose(self.matrix, other.matrix, rtol=0.0, atol=atol))


def make_context(d: int, p: float = 2.0) -> AlgebraContext:
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValidationError(f"dimension must be a positive integer, got {d!r}")
    p = float(p)
    if math.isnan(p) or p < 2:
        raise ValidationError(f"p below 2 (got {p}); the weight exponent p/(p-2) needs p >= 2")
    return AlgebraContext(int(d), p)


def _check_same(a: Element, b: Element) -> None:
    if a.context != b.context:
        raise ValidationError("elements belong to different algebra contexts")


def multiply(a: Element, b: Element) -> Element:
    _check_same(a, b)
    return Element(a.matrix @ b.matrix, a.context)


def adjoint(a: Element) -> Element:
    return Element(a.matrix.conj().T, a.context)


def trace(a: Element) -> complex:
    """Normalized trace tau(a) = Tr(a) / d."""
    return complex(np.trace(a.matrix)) / a.context.dim


def matrix_schatten(m: np.ndarray, r: float) -> float:
    """Normalized Schatten-r norm of a raw square matrix (``r = inf`` is the operator norm)."""
    s = np.linalg.svd(m, compute_uv=False)
    if math.isinf(r):
        return float(s.max(initial=0.0))
    d = m.shape[0]
    top = s.max(initial=0.0)
    if top == 0.0:
        return 0.0
    # factor out the largest singular value so large r does not overflow
    return float(top * (np.sum((s / top) ** r) / d) ** (1.0 / r))


def schatten_norm(a: Element, r: float | None = None) -> float:
    """Normalized Schatten norm ``(sum_i s_i^r / d)^(1/r)``.

    ``r`` defaults to the context exponent ``p``; ``r = inf`` gives the
    operator norm (the norm of the distinguished *-algebra).
    """
    if r is None:
        r = a.context.p
    r = float(r)
    if math.isnan(r) or r < 1:
        raise ValidationError(f"Schatten index must be >= 1, got {r}")
    return matrix_schatten(a.matrix, r)


def operator_norm(a: Element) -> float:
    return matrix_schatten(a.matrix, math.inf)
