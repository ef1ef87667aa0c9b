"""Numerical GNS construction for trace forms.

The algebra is coordinatized by matrix units in row-major order, so an
element ``x`` is the vector ``x.ravel()`` and left multiplication by ``a``
is ``kron(a, I)``.  The Gram matrix ``G[(ij), (kl)] = phi(E_ij, E_kl)`` is
eigendecomposed; eigenvalues at or below ``rank_tol * lambda_max`` span the
null space, and the quotient is coordinatized isometrically by
``lambda(x) = Lambda^{1/2} U^H vec(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .algebra import Element
from .eigen import eigen_residual, eigenvalue_extract
from .errors import DegenerateFormError, DepthError, ValidationError
from .forms import Flavor, TraceForm
from .quon import (
    QuonModel,
    beta_factorial,
    eta_forms,
    eta_kernel_dim,
    ladder_forms,
    relative_defect,
    vacuum_form,
    vacuum_kernel_dim,
    vacuum_vector,
    eta_vacuum_vector,
)

__all__ = [
    "GnsModel",
    "TransportReport",
    "XiFamily",
    "OverlapReport",
    "BiorthogonalityReport",
    "gram_matrix",
    "build_gns",
    "reconstruction_defect",
    "star_defect",
    "homomorphism_defect",
    "cyclic_rank",
    "rank_one_intertwiner",
    "gns_eigen_transport",
    "xi_vectors",
    "overlap_matrix",
    "overlap_form_defect",
    "biorthogonality_check",
]

EPS = np.finfo(float).eps


def gram_matrix(f: TraceForm) -> np.ndarray:
    """``G[(ij), (kl)] = phi(E_ij, E_kl)``.

    For a RIGHT form ``tau(W E_ji E_kl) = delta_ik W_lj / d``, i.e.
    ``kron(I, W^T) / d`` in row-major order.
    """
    if f.flavor is not Flavor.RIGHT:
        raise ValidationError("the GNS builder expects a RIGHT form")
    d = f.context.dim
    return np.kron(np.eye(d), f.weight.T) / d


@dataclass(frozen=True, eq=False)
class GnsModel:
    source_form: TraceForm
    gram: np.ndarray
    quotient_basis: np.ndarray
    eigenvalues: np.ndarray
    rank_tol: float
    min_eig_ratio: float
    cyclic_vector: np.ndarray = field(init=False)

    def __post_init__(self):
        e = np.eye(self.source_form.context.dim)
        object.__setattr__(self, "cyclic_vector", self.embed(e))

    @property
    def dim(self) -> int:
        return self.quotient_basis.shape[1]

    def embed(self, x) -> np.ndarray:
        """Quotient coordinates of lambda_phi(x)."""
        m = x.matrix if isinstance(x, Element) else np.asarray(x)
        return np.sqrt(self.eigenvalues) * (self.quotient_basis.conj().T @ m.ravel())

    def rep(self, a) -> np.ndarray:
        """Matrix of pi_phi(a) on the quotient: lambda(x) -> lambda(a x)."""
        m = a.matrix if isinstance(a, Element) else np.asarray(a)
        d = m.shape[0]
        U = self.quotient_basis
        sq = np.sqrt(self.eigenvalues)
        left = np.kron(m, np.eye(d))
        return (sq[:, None] * (U.conj().T @ left @ U)) / sq[None, :]

    @cached_property
    def basis_reps(self) -> list[np.ndarray]:
        """pi(E_ij) for every matrix unit, row-major."""
        d = self.source_form.context.dim
        out = []
        for i in range(d):
            for j in range(d):
                E = np.zeros((d, d))
                E[i, j] = 1.0
                out.append(self.rep(E))
        return out


def build_gns(f: TraceForm, rank_tol: float | None = None) -> GnsModel:
    """GNS triple of ``f``; ``rank_tol`` is relative to the top Gram eigenvalue (default d^2 eps)."""
    d = f.context.dim
    if rank_tol is None:
        rank_tol = d * d * EPS
    G = gram_matrix(f)
    evals, evecs = np.linalg.eigh(G)
    top = evals.max()
    if top <= 0.0:
        raise DegenerateFormError("zero form: the GNS space is trivial")
    keep = evals > rank_tol * top
    if not keep.any():
        raise DegenerateFormError("no Gram eigenvalue above the rank tolerance")
    G.flags.writeable = False
    return GnsModel(f, G, evecs[:, keep], evals[keep], rank_tol, float(evals.min() / top))


def _basis_vectors(g: GnsModel, xi: np.ndarray) -> np.ndarray:
    """Columns pi(E_ij) xi for every matrix unit, row-major."""
    return np.array([r @ xi for r in g.basis_reps]).T


def reconstruction_defect(g: GnsModel) -> float:
    """max over basis pairs of |<pi(a) xi, pi(b) xi> - phi(a, b)|."""
    V = _basis_vectors(g, g.cyclic_vector)
    return float(np.abs(V.conj().T @ V - g.gram).max())


def star_defect(g: GnsModel, elements) -> float:
    """max ||pi(a*) - pi(a)^H|| over the given elements."""
    worst = 0.0
    for a in elements:
        m = a.matrix if isinstance(a, Element) else np.asarray(a)
        worst = max(worst, float(np.abs(g.rep(m.conj().T) - g.rep(m).conj().T).max()))
    return worst


def homomorphism_defect(g: GnsModel, pairs) -> float:
    worst = 0.0
    for a, b in pairs:
        am = a.matrix if isinstance(a, Element) else np.asarray(a)
        bm = b.matrix if isinstance(b, Element) else np.asarray(b)
        diff = g.rep(am @ bm) - g.rep(am) @ g.rep(bm)
        worst = max(worst, float(np.abs(diff).max()))
    return worst


def cyclic_rank(g: GnsModel) -> int:
    """Rank of {pi(E_ij) xi}; equals the quotient dimension when xi is cyclic."""
    V = _basis_vectors(g, g.cyclic_vector)
    s = np.linalg.svd(V, compute_uv=False)
    return int(np.sum(s > V.shape[1] * EPS * s[0]))


def rank_one_intertwiner(g: GnsModel, v: np.ndarray, elements=()) -> tuple[np.ndarray, float, float]:
    """Map ``T: lambda(x) -> x v`` from the quotient of ``d |v><v|`` into C^d.

    Returns ``(T, unitarity defect, intertwining defect)``; the second and
    third vanish when the GNS space is the defining representation.
    """
    d = g.source_form.context.dim
    v = np.asarray(v, dtype=complex)
    # (x v)_i = sum_j x_ij v_j
    M = np.kron(np.eye(d), v[None, :])
    T = (M @ g.quotient_basis) / np.sqrt(g.eigenvalues)[None, :]
    unit = float(np.abs(T.conj().T @ T - np.eye(g.dim)).max())
    inter = 0.0
    for a in elements:
        m = a.matrix if isinstance(a, Element) else np.asarray(a)
        inter = max(inter, float(np.abs(T @ g.rep(m) - m @ T).max()))
    return T, unit, inter


@dataclass(frozen=True)
class TransportReport:
    lam: complex
    form_residual: float
    vector_residual: float
    identity_defect: float
    form_status: bool
    vector_status: bool

    @property
    def agree(self) -> bool:
        return self.form_status == self.vector_status


def gns_eigen_transport(g: GnsModel, a: Element, tol: float = 1e-10) -> TransportReport:
    """Compare ``phi(a - lam e, a - lam e)`` with ``||pi(a) xi - lam xi||^2``."""
    f = g.source_form
    lam = eigenvalue_extract(f, a)
    r1 = eigen_residual(f, a, lam)
    w = g.rep(a) @ g.cyclic_vector - lam * g.cyclic_vector
    r2 = float(np.vdot(w, w).real)
    return TransportReport(complex(lam), r1, r2, abs(r1 - r2), r1 <= tol, r2 <= tol)


@dataclass(frozen=True, eq=False)
class XiFamily:
    gns: GnsModel
    vectors: list[np.ndarray]
    defects: list[float]


def xi_vectors(m: QuonModel, L: int, gns: GnsModel | None = None) -> XiFamily:
    """``xi_l = pi_0(y0)^l xi_0`` in the GNS space of the vacuum form.

    ``defects[l]`` is the relative worst-case violation of
    ``phi_l(a, b) = <pi_0(a) xi_l, pi_0(b) xi_l>`` over basis pairs.
    """
    if not 0 <= L <= m.valid_depth:
        raise DepthError(f"L = {L} outside [0, {m.valid_depth}]")
    g = gns or build_gns(vacuum_form(m))
    P = g.rep(m.y0)
    forms = ladder_forms(m, L)
    vecs = [g.cyclic_vector]
    for _ in range(L):
        vecs.append(P @ vecs[-1])
    defects = []
    for l in range(L + 1):
        V = _basis_vectors(g, vecs[l])
        lhs = V.conj().T @ V
        rhs = gram_matrix(forms[l])
        defects.append(relative_defect(lhs - rhs, lhs, rhs))
    return XiFamily(g, vecs, defects)


@dataclass(frozen=True)
class OverlapReport:
    matrix: np.ndarray
    max_offdiag: float
    diagonal: np.ndarray


def overlap_matrix(vectors) -> OverlapReport:
    """``<xi_k, xi_l>`` with the largest off-diagonal normalized by ``||xi_k|| ||xi_l||``.

    Zero vectors (the q = -1 collapse) are left out of the normalization.
    """
    V = np.array(vectors).T
    O = V.conj().T @ V
    norms = np.sqrt(np.abs(np.diag(O)))
    worst = 0.0
    n = O.shape[0]
    for k in range(n):
        for l in range(n):
            if k != l and norms[k] > 0 and norms[l] > 0:
                worst = max(worst, abs(O[k, l]) / (norms[k] * norms[l]))
    return OverlapReport(O, worst, np.diag(O).real.copy())


def overlap_form_defect(m: QuonModel, report: OverlapReport) -> float:
    """Relative gap between ``<xi_k, xi_l>`` and the direct value ``phi_0(y0^k, y0^l)``."""
    f0 = vacuum_form(m)
    n = report.matrix.shape[0]
    powers = [m.context.identity()]
    for _ in range(n - 1):
        powers.append(powers[-1] @ m.y0)
    direct = np.array([[f0(powers[k], powers[l]) for l in range(n)] for k in range(n)])
    return relative_defect(report.matrix - direct, report.matrix, direct)


@dataclass(frozen=True)
class BiorthogonalityReport:
    matrix: np.ndarray
    max_offdiag: float
    diagonal: np.ndarray
    beta_factorials: np.ndarray
    vacuum_overlap: complex
    intertwiner_defect: float
    label: str = "same ambient space and representation, distinct cyclic vectors"


def biorthogonality_check(m: QuonModel, L: int) -> BiorthogonalityReport:
    """``<xi_k, nu_l>`` for a pseudo model.

    Both vacuum forms have rank-one weights, so each GNS space is carried
    unitarily onto C^{N+1} with pi = identity; ``xi_k`` and ``nu_l`` are then
    compared in that common space.  The maps are checked, not assumed.
    """
    if m.hermitian:
        raise ValidationError("Hermitian model: biorthogonality reduces to overlap_matrix")
    if not 0 <= L <= m.valid_depth:
        raise DepthError(f"L = {L} outside [0, {m.valid_depth}]")
    if vacuum_kernel_dim(m) != 1 or eta_kernel_dim(m) != 1:
        raise ValidationError("vacuum kernels are not one-dimensional")
    u = vacuum_vector(m)
    chi = eta_vacuum_vector(m)
    g_phi = build_gns(vacuum_form(m))
    g_eta = build_gns(eta_forms(m, 0)[0])
    probes = [m.x0, m.y0, m.x0.H, m.y0.H]
    T1, u1, i1 = rank_one_intertwiner(g_phi, u, probes)
    T2, u2, i2 = rank_one_intertwiner(g_eta, chi, probes)
    P = g_phi.rep(m.y0)
    Q = g_eta.rep(m.x0.H)
    xis = [g_phi.cyclic_vector]
    nus = [g_eta.cyclic_vector]
    for _ in range(L):
        xis.append(P @ xis[-1])
        nus.append(Q @ nus[-1])
    X = T1 @ np.array(xis).T
    Y = T2 @ np.array(nus).T
    B = X.conj().T @ Y
    nx = np.linalg.norm(X, axis=0)
    ny = np.linalg.norm(Y, axis=0)
    worst = 0.0
    for k in range(L + 1):
        for l in range(L + 1):
            if k != l and nx[k] > 0 and ny[l] > 0:
                worst = max(worst, abs(B[k, l]) / (nx[k] * ny[l]))
    bf = np.array([beta_factorial(m.q, l) for l in range(L + 1)])
    return BiorthogonalityReport(B, worst, np.diag(B).copy(), bf, complex(np.vdot(u, chi)),
                                 max(u1, i1, u2, i2))
