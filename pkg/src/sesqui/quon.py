"""Truncated quon ladder pair, vacuum and ladder forms, and the eta family.

The single-mode quon on levels ``0..N`` has ``a Phi_n = gamma_{n-1} Phi_{n-1}``
with ``gamma_n^2 = (1 - q^{n+1}) / (1 - q)``.  A pseudo model conjugates the
Hermitian pair by an invertible ``S``: ``x0 = S a S^-1``, ``y0 = S a^dag S^-1``,
which preserves ``x0 y0 - q y0 x0 = e`` below the top level.

Ladder defects are reported relative to the size of the compared
quantities (``max|W_l| ||x||_0^k / d`` for a product against ``x``); the
forms grow like ``beta_l!`` and absolute rounding with them.  Where
``beta_l! = 0`` the weight vanishes exactly and is sized by the uncancelled
product ``||y0||_0^{2l} max|W_0|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraContext, Element, make_context, operator_norm
from .eigen import kernel_basis
from .errors import DepthError, NumericalError, ValidationError
from .forms import Flavor, TraceForm, _form, against_basis

__all__ = [
    "QuonModel",
    "BetaSequence",
    "EtaLadder",
    "QuonNorms",
    "beta",
    "beta_factorial",
    "beta_sequence",
    "beta_closed_form",
    "gamma_sq",
    "annihilator",
    "build_quon",
    "diagonal_similarity",
    "random_similarity",
    "qmutator_defect",
    "vacuum_vector",
    "vacuum_form",
    "vacuum_kernel_dim",
    "eta_kernel_dim",
    "eta_forms",
    "ladder_form",
    "ladder_forms",
    "number_eigen_defect",
    "lowering_defect",
    "eta_vacuum_vector",
    "eta_ladder",
    "quon_norm_report",
    "relative_defect",
]

EPS = np.finfo(float).eps


def beta(q: float, l: int) -> float:
    """beta_0 = 0, beta_l = 1 + q beta_{l-1}."""
    if l < 0:
        raise ValidationError("ladder index must be non-negative")
    b = 0.0
    for _ in range(l):
        b = 1.0 + q * b
    return b


def beta_factorial(q: float, l: int) -> float:
    out = 1.0
    b = 0.0
    for _ in range(l):
        b = 1.0 + q * b
        out *= b
    return out


def beta_closed_form(q: float, l: int) -> float:
    """(1 - q^l) / (1 - q) for |q| < 1, l for q = 1 (cross-check only)."""
    if q == 1:
        return float(l)
    return (1.0 - q ** l) / (1.0 - q)


@dataclass(frozen=True)
class BetaSequence:
    q: float
    values: tuple[float, ...]
    factorials: tuple[float, ...]


def beta_sequence(q: float, L: int) -> BetaSequence:
    vals = [0.0]
    facts = [1.0]
    for _ in range(L):
        vals.append(1.0 + q * vals[-1])
        facts.append(facts[-1] * vals[-1])
    return BetaSequence(q, tuple(vals), tuple(facts))


def gamma_sq(q: float, n: int) -> float:
    if q == 1:
        return float(n + 1)
    return (1.0 - q ** (n + 1)) / (1.0 - q)


def annihilator(q: float, N: int) -> np.ndarray:
    a = np.zeros((N + 1, N + 1), dtype=complex)
    for n in range(1, N + 1):
        a[n - 1, n] = math.sqrt(max(gamma_sq(q, n - 1), 0.0))
    return a


@dataclass(frozen=True, eq=False)
class QuonModel:
    q: float
    levels: int
    context: AlgebraContext
    a_q: np.ndarray
    x0: Element
    y0: Element
    similarity: np.ndarray | None
    similarity_cond: float = 1.0
    hermitian: bool = field(init=False)
    valid_depth: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "hermitian", self.similarity is None)
        object.__setattr__(self, "valid_depth", self.levels - 2)

    @property
    def n0(self) -> Element:
        return self.y0 @ self.x0

    @property
    def dim(self) -> int:
        return self.levels + 1


def diagonal_similarity(N: int, entries=None) -> np.ndarray:
    if entries is None:
        entries = np.arange(1, N + 2, dtype=float)
    entries = np.asarray(entries, dtype=complex)
    if entries.shape != (N + 1,):
        raise ValidationError(f"need {N + 1} diagonal entries, got {entries.shape}")
    return np.diag(entries)


def random_similarity(N: int, rng: np.random.Generator, strength: float = 0.3) -> np.ndarray:
    d = N + 1
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return np.eye(d) + strength * z / math.sqrt(2 * d)


def build_quon(q: float, N: int, S=None, p: float = 2.0) -> QuonModel:
    q = float(q)
    if not -1.0 <= q <= 1.0:
        raise ValidationError(f"q must lie in [-1, 1], got {q}")
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise ValidationError(f"need at least N = 2 levels above the vacuum, got {N!r}")
    N = int(N)
    ctx = make_context(N + 1, p)
    a = annihilator(q, N)
    if S is None:
        return QuonModel(q, N, ctx, a, Element(a, ctx), Element(a.conj().T, ctx), None)
    S = np.array(S, dtype=complex)
    if S.shape != (N + 1, N + 1):
        raise ValidationError(f"similarity must be {(N + 1, N + 1)}, got {S.shape}")
    s = np.linalg.svd(S, compute_uv=False)
    if s[-1] <= (N + 1) * EPS * s[0]:
        raise ValidationError("similarity matrix is singular")
    Si = np.linalg.inv(S)
    S.flags.writeable = False
    return QuonModel(q, N, ctx, a, Element(S @ a @ Si, ctx), Element(S @ a.conj().T @ Si, ctx),
                     S, float(s[0] / s[-1]))


def relative_defect(diff: np.ndarray, *terms: np.ndarray) -> float:
    """max|diff| divided by the largest entry among the compared terms (0/0 -> 0)."""
    num = float(np.abs(diff).max(initial=0.0))
    scale = max((float(np.abs(t).max(initial=0.0)) for t in terms), default=0.0)
    if scale == 0.0:
        return num
    return num / scale


def qmutator_defect(m: QuonModel) -> np.ndarray:
    """Per-level diagonal of ``x0 y0 - q y0 x0 - e`` in the quon basis.

    Levels ``0..N-1`` vanish; level N carries the truncation artifact
    ``-(1 + q gamma_{N-1}^2)``.
    """
    D = (m.x0 @ m.y0).matrix - m.q * (m.y0 @ m.x0).matrix - np.eye(m.dim)
    if m.similarity is not None:
        D = np.linalg.solve(m.similarity, D @ m.similarity)
    return np.diag(D).copy()


def _check_depth(m: QuonModel, l: int, lo: int = 0) -> None:
    if not lo <= l <= m.valid_depth:
        raise DepthError(f"ladder index {l} outside [{lo}, {m.valid_depth}] for N = {m.levels}")


def _unit_kernel_vector(mat: np.ndarray, fallback: np.ndarray) -> tuple[np.ndarray, int]:
    d = mat.shape[0]
    s = np.linalg.svd(mat, compute_uv=False)
    k = kernel_basis(mat, d * EPS * s[0])
    if k.shape[1] == 1:
        v = k[:, 0]
    else:
        # q = -1 leaves several zero gamma's, so the kernel is not a ray; use the Fock vacuum
        v = fallback
        if np.linalg.norm(mat @ v) > 1e-12 * max(s[0], 1.0) * np.linalg.norm(v):
            raise NumericalError("Fock vacuum is not annihilated by the lowering element")
    v = v / np.linalg.norm(v)
    # fix the phase so the largest component is real positive
    i = int(np.argmax(np.abs(v)))
    v = v * (abs(v[i]) / v[i])
    return v, k.shape[1]


def _e0(m: QuonModel) -> np.ndarray:
    e0 = np.zeros(m.dim, dtype=complex)
    e0[0] = 1.0
    return e0


def vacuum_kernel_dim(m: QuonModel) -> int:
    """Dimension of ker(x0); 1 except at q = -1."""
    e0 = _e0(m)
    return _unit_kernel_vector(m.x0.matrix, e0 if m.similarity is None else m.similarity @ e0)[1]


def eta_kernel_dim(m: QuonModel) -> int:
    e0 = _e0(m)
    fb = e0 if m.similarity is None else np.linalg.solve(m.similarity.conj().T, e0)
    return _unit_kernel_vector(m.y0.matrix.conj().T, fb)[1]


def vacuum_vector(m: QuonModel) -> np.ndarray:
    """Unit vector spanning ker(x0) (the direction of S Phi_0)."""
    e0 = np.zeros(m.dim, dtype=complex)
    e0[0] = 1.0
    fallback = e0 if m.similarity is None else m.similarity @ e0
    return _unit_kernel_vector(m.x0.matrix, fallback)[0]


def eta_vacuum_vector(m: QuonModel) -> np.ndarray:
    """Unit vector spanning ker(y0*) (the direction of S^-* Phi_0)."""
    e0 = np.zeros(m.dim, dtype=complex)
    e0[0] = 1.0
    fallback = e0 if m.similarity is None else np.linalg.solve(m.similarity.conj().T, e0)
    return _unit_kernel_vector(m.y0.matrix.conj().T, fallback)[0]


def vacuum_form(m: QuonModel) -> TraceForm:
    """RIGHT form with weight ``(N+1) |v><v|``, v spanning ker(x0); phi_0(e, e) = 1."""
    v = vacuum_vector(m)
    return _form(m.dim * np.outer(v, v.conj()), Flavor.RIGHT, m.context)


def ladder_forms(m: QuonModel, L: int | None = None) -> list[TraceForm]:
    """phi_0 .. phi_L, each the pullback of the previous one by y0."""
    L = m.valid_depth if L is None else L
    _check_depth(m, L)
    out = [vacuum_form(m)]
    y = m.y0.matrix
    for _ in range(L):
        out.append(_form(y @ out[-1].weight @ y.conj().T, Flavor.RIGHT, m.context))
    return out


def ladder_form(m: QuonModel, l: int) -> TraceForm:
    _check_depth(m, l)
    return ladder_forms(m, l)[l]


def number_eigen_defect(m: QuonModel, l: int, relative: bool = True) -> float:
    """max_b |phi_l(b, n0) - beta_l phi_l(b, e)| over matrix units b."""
    _check_depth(m, l)
    forms = ladder_forms(m, l)
    f = forms[l]
    lhs = against_basis(f, m.n0)
    rhs = beta(m.q, l) * against_basis(f, np.eye(m.dim))
    if relative:
        scale = _magnitude(forms, l, m.y0.matrix, m.n0.matrix, 1, _collapsed(m, l))
        return relative_defect(lhs - rhs, scale, rhs)
    return float(np.abs(lhs - rhs).max())


def _collapsed(m: QuonModel, l: int) -> bool:
    return beta_factorial(m.q, l) == 0.0


def _magnitude(forms: list[TraceForm], l: int, gen: np.ndarray, x: np.ndarray,
               power: int, collapsed: bool) -> np.ndarray:
    # size the products against x would have without cancellation; a collapsed
    # weight (beta_l! = 0) is exactly zero, so it is sized by the uncancelled
    # product gen^l W_0 gen*^l instead of by its own rounding noise
    d = forms[0].context.dim
    w = float(np.abs(forms[l].weight).max())
    if collapsed:
        w = max(w, np.linalg.norm(gen, 2) ** (2 * l) * float(np.abs(forms[0].weight).max()))
    return np.array(w * np.linalg.norm(x, 2) ** power / d)


def _pair_max(K: np.ndarray, d: int) -> np.ndarray:
    # phi_K(E_ij, E_kl) = delta_ik K_lj / d, so the basis-pair extremes are the entries of K / d
    return K / d


def lowering_defect(m: QuonModel, l: int, relative: bool = True) -> float:
    """max over basis pairs of |phi_l(a x0, b x0) - beta_l^2 phi_{l-1}(a, b)|."""
    _check_depth(m, l, lo=1)
    forms = ladder_forms(m, l)
    x = m.x0.matrix
    lhs = _pair_max(x @ forms[l].weight @ x.conj().T, m.dim)
    rhs = beta(m.q, l) ** 2 * _pair_max(forms[l - 1].weight, m.dim)
    if relative:
        scale = _magnitude(forms, l, m.y0.matrix, x, 2, _collapsed(m, l))
        return relative_defect(lhs - rhs, scale, rhs)
    return float(np.abs(lhs - rhs).max())


@dataclass(frozen=True)
class EtaLadder:
    form: TraceForm
    number_defect: float
    lowering_defect: float | None


def eta_forms(m: QuonModel, L: int) -> list[TraceForm]:
    _check_depth(m, L)
    v = eta_vacuum_vector(m)
    out = [_form(m.dim * np.outer(v, v.conj()), Flavor.RIGHT, m.context)]
    xs = m.x0.matrix.conj().T
    for _ in range(L):
        out.append(_form(xs @ out[-1].weight @ xs.conj().T, Flavor.RIGHT, m.context))
    return out


def eta_ladder(m: QuonModel, l: int, relative: bool = True) -> EtaLadder:
    """eta_l with the checks ``eta_l(b, n0*) = beta_l eta_l(b, e)`` and
    ``eta_l(a y0*, b y0*) = beta_l^2 eta_{l-1}(a, b)``."""
    forms = eta_forms(m, l)
    f = forms[l]
    xs0 = m.x0.matrix.conj().T
    n0s = m.n0.matrix.conj().T
    lhs = against_basis(f, n0s)
    rhs = beta(m.q, l) * against_basis(f, np.eye(m.dim))
    if relative:
        num = relative_defect(lhs - rhs, _magnitude(forms, l, xs0, n0s, 1, _collapsed(m, l)), rhs)
    else:
        num = float(np.abs(lhs - rhs).max())
    low = None
    if l >= 1:
        ys = m.y0.matrix.conj().T
        lhs2 = _pair_max(ys @ f.weight @ ys.conj().T, m.dim)
        rhs2 = beta(m.q, l) ** 2 * _pair_max(forms[l - 1].weight, m.dim)
        if relative:
            low = relative_defect(lhs2 - rhs2, _magnitude(forms, l, xs0, ys, 2, _collapsed(m, l)), rhs2)
        else:
            low = float(np.abs(lhs2 - rhs2).max())
    return EtaLadder(f, num, low)


@dataclass(frozen=True)
class QuonNorms:
    q: float
    levels: int
    norm_aq: float
    norm_aq_from_gamma: float
    bound_sq: float
    printed_bound: float
    fermion_exact: float | None
    boson_growth: float | None
    norm_y0: float

    @property
    def norm_aq_sq(self) -> float:
        return self.norm_aq ** 2


def quon_norm_report(m: QuonModel) -> QuonNorms:
    """Operator norm of the truncated a_q against the bounds for |q| < 1.

    ``bound_sq`` is 2 / (1 - q) applied to ||a_q||^2; ``printed_bound`` is the
    same number read as a bound on ||a_q|| itself.  At q = 1 the squared norm
    equals N and grows without bound with the truncation.
    """
    q, N = m.q, m.levels
    gam = max(math.sqrt(max(gamma_sq(q, k - 1), 0.0)) for k in range(1, N + 1))
    bound = math.inf if q == 1 else 2.0 / (1.0 - q)
    return QuonNorms(
        q=q,
        levels=N,
        norm_aq=operator_norm(Element(m.a_q, m.context)),
        norm_aq_from_gamma=gam,
        bound_sq=bound,
        printed_bound=bound,
        fermion_exact=1.0 if q == -1 else None,
        boson_growth=float(N) if q == 1 else None,
        norm_y0=operator_norm(m.y0),
    )
