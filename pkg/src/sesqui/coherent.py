"""Almost-coherent forms ``Phi_z = sum_l z^l / (beta_l!)^2 phi_l``.

The series is dominated by ``gamma_0 ||a|| ||b|| sum_l t^l / (beta_l!)^2``
with ``t = |z| ||y0||_0^2``; its radius in ``t`` is ``lim beta_{l+1}^2``.
For complex ``z`` the partial sums are not positive forms, so they are kept
as a plain kernel matrix ``K`` with ``Phi_z(a, b) = tau(K a* b)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import Element, operator_norm, schatten_norm
from .errors import CoherentUndefinedError
from .forms import continuity_constant
from .quon import QuonModel, beta, vacuum_form

__all__ = [
    "Radius",
    "CoherentForm",
    "CoherentValue",
    "radius",
    "rho_prime_limit",
    "majorant_tail",
    "coherent_form",
    "evaluate_coherent",
    "full_depth_value",
    "coherent_terms",
    "coherent_lowering_defect",
    "empirical_radius",
    "SAFETY",
]

SAFETY = 0.95


def rho_prime_limit(q: float) -> float:
    """``lim_l beta_{l+1}^2`` iterated from the recursion (inf at q = 1)."""
    if q == -1:
        raise CoherentUndefinedError("coherent forms are undefined at q = -1 (beta_l! = 0)")
    if q == 1:
        return math.inf
    b = 0.0
    for _ in range(100000):
        nb = 1.0 + q * b
        if nb == b:
            break
        b = nb
    return b * b


@dataclass(frozen=True)
class Radius:
    rho_prime: float
    rho: float
    rho_prime_printed: float
    norm_y0_sq: float


def radius(m: QuonModel) -> Radius:
    """Convergence radius in ``z``: ``rho = rho' / ||y0||_0^2``.

    ``rho_prime_printed`` is ``1 / (1 - q)``, which disagrees with the
    defining limit ``1 / (1 - q)^2``; it is carried for the erratum report.
    """
    rp = rho_prime_limit(m.q)
    ny = operator_norm(m.y0) ** 2
    printed = math.inf if m.q == 1 else 1.0 / (1.0 - m.q)
    return Radius(rp, rp / ny, printed, ny)


def _check_z(m: QuonModel, z: complex) -> Radius:
    r = radius(m)
    if abs(z) > SAFETY * r.rho:
        raise CoherentUndefinedError(
            f"|z| = {abs(z):.6g} exceeds {SAFETY} * rho = {SAFETY * r.rho:.6g}"
        )
    return r


def majorant_tail(q: float, t: float, L: int) -> float:
    """Upper bound on ``sum_{l > L} t^l / (beta_l!)^2``.

    Terms are summed explicitly until they are negligible, then the rest is
    closed by a geometric series whose ratio ``t / inf_{k > M} beta_k^2`` is
    rigorous: for q >= 0 the beta's increase, for q < 0 the even and odd
    subsequences bracket the limit, so the infimum is min(beta_{M+1}, beta_{M+2}).
    """
    if t == 0.0:
        return 0.0
    term = 1.0  # l = 0
    b = 0.0
    total = 0.0
    l = 0
    while True:
        l += 1
        b = 1.0 + q * b
        term *= t / (b * b)
        if l > L:
            total += term
        if l > L and l > 5:
            b1 = 1.0 + q * b
            b2 = 1.0 + q * b1
            r = t / min(b1, b2) ** 2
            if r < 1.0 and term * r / (1.0 - r) <= 1e-30 * max(total, 1e-300):
                total += term * r / (1.0 - r)
                break
        if l > 200000:
            raise CoherentUndefinedError("majorant series does not converge at this |z|")
    return total * (1.0 + 1e-12)


def _ladder_weights(m: QuonModel, L: int) -> list[np.ndarray]:
    # no depth cap: beyond the valid depth these are still the truncated model's exact terms
    ws = [vacuum_form(m).weight]
    y = m.y0.matrix
    for _ in range(L):
        ws.append(y @ ws[-1] @ y.conj().T)
    return ws


def coherent_terms(m: QuonModel, z: complex, L: int) -> list[np.ndarray]:
    """Kernel matrices ``z^l / (beta_l!)^2 W_l`` for l = 0..L."""
    ws = _ladder_weights(m, L)
    out = []
    fact = 1.0
    for l, w in enumerate(ws):
        if l:
            fact *= beta(m.q, l)
        out.append((z ** l / fact ** 2) * w)
    return out


@dataclass(frozen=True, eq=False)
class CoherentForm:
    model: QuonModel
    z: complex
    truncation_order: int
    tail_bound: float
    capped: bool
    kernel: np.ndarray

    def __call__(self, a: Element, b: Element) -> complex:
        d = self.model.dim
        return complex(np.trace(self.kernel @ a.matrix.conj().T @ b.matrix)) / d


def coherent_form(m: QuonModel, z: complex, eps: float = 1e-12, scale: float = 1.0) -> CoherentForm:
    """Partial sum of the coherent series.

    The order is the smallest ``L`` whose majorant tail (times
    ``gamma_0 * scale``) falls below ``eps``, capped at the model's valid
    depth.  ``tail_bound`` is the per-unit-norm tail ``gamma_0 * tail(L)``.
    """
    if m.q == -1:
        raise CoherentUndefinedError("coherent forms are undefined at q = -1 (beta_l! = 0)")
    r = _check_z(m, z)
    gamma0 = continuity_constant(vacuum_form(m))
    t = abs(z) * r.norm_y0_sq
    L = 0
    while gamma0 * scale * majorant_tail(m.q, t, L) > eps and L < m.valid_depth:
        L += 1
    tail = gamma0 * majorant_tail(m.q, t, L)
    capped = tail * scale > eps
    K = sum(coherent_terms(m, z, L))
    return CoherentForm(m, complex(z), L, tail, capped, K)


@dataclass(frozen=True)
class CoherentValue:
    value: complex
    order: int
    tail: float
    capped: bool


def evaluate_coherent(m: QuonModel, z: complex, a: Element, b: Element,
                      eps: float = 1e-12) -> CoherentValue:
    """``Phi_z(a, b)`` with its order and a rigorous bound on the dropped tail.

    When the valid depth caps the order before the tail drops below ``eps``,
    ``capped`` is set and ``tail`` is the truncation residue.
    """
    scale = schatten_norm(a) * schatten_norm(b)
    cf = coherent_form(m, z, eps, scale)
    return CoherentValue(cf(a, b), cf.truncation_order, cf.tail_bound * scale, cf.capped)


def full_depth_value(m: QuonModel, z: complex, a: Element, b: Element) -> complex:
    """The series summed through l = N, where the truncated model's terms stop (y0^{N+1} = 0)."""
    K = sum(coherent_terms(m, z, m.levels))
    return complex(np.trace(K @ a.matrix.conj().T @ b.matrix)) / m.dim


def coherent_lowering_defect(m: QuonModel, z: complex, eps: float = 1e-12) -> float:
    """max over basis pairs of ``|Phi_z(a x0, b x0) - z Phi_z(a, b)|``.

    The left side is summed through order L and the right through L - 1,
    which is the matched truncation: term l on the left equals z times
    term l - 1 on the right.
    """
    d = m.dim
    # every matrix unit has ||E_ij||_p = d^(-1/p)
    scale = d ** (-2.0 / m.context.p)
    cf = coherent_form(m, z, eps, scale)
    L = cf.truncation_order
    terms = coherent_terms(m, z, L)
    x = m.x0.matrix
    lhs = x @ sum(terms) @ x.conj().T
    rhs = z * sum(terms[:L]) if L > 0 else np.zeros_like(lhs)
    # Phi_K(E_ij, E_kl) = delta_ik K_lj / d
    return float(np.abs(lhs - rhs).max()) / d


def empirical_radius(q: float, l: int = 100, t: float = 1.0) -> float:
    """Ratio-test estimate ``t * term_l / term_{l+1}`` of the majorant's radius in t."""
    log_terms = []
    lt = 0.0
    b = 0.0
    for k in range(1, l + 2):
        b = 1.0 + q * b
        lt += math.log(t) - 2.0 * math.log(b)
        log_terms.append(lt)
    ratio = math.exp(log_terms[l] - log_terms[l - 1])
    return t / ratio
