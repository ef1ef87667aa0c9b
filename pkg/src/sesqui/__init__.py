"""Eigenstates of weighted trace forms on matrix algebras, quon ladders and their GNS spaces."""

from .algebra import (
    AlgebraContext,
    Element,
    adjoint,
    make_context,
    matrix_schatten,
    multiply,
    operator_norm,
    schatten_norm,
    trace,
)
from .coherent import (
    CoherentForm,
    CoherentValue,
    Radius,
    coherent_form,
    coherent_lowering_defect,
    empirical_radius,
    evaluate_coherent,
    majorant_tail,
    radius,
    rho_prime_limit,
)
from .eigen import (
    EigenReport,
    eigen_residual,
    eigenstate_construct,
    eigenvalue_extract,
    independence_rank,
    is_eigenstate,
    polynomial_eigen_check,
)
from .errors import (
    CoherentUndefinedError,
    DegenerateFormError,
    DepthError,
    NoEigenstateError,
    NumericalError,
    SesquiError,
    UnsupportedFlavorError,
    ValidationError,
)
from .forms import (
    Flavor,
    FormNorm,
    TraceForm,
    against_basis,
    continuity_constant,
    convex_combine,
    dual,
    evaluate,
    form_norm,
    make_trace_form,
    normalize,
    pullback,
)
from .gns import (
    GnsModel,
    biorthogonality_check,
    build_gns,
    gns_eigen_transport,
    overlap_matrix,
    rank_one_intertwiner,
    reconstruction_defect,
    xi_vectors,
)
from .quon import (
    QuonModel,
    beta,
    beta_closed_form,
    beta_factorial,
    beta_sequence,
    build_quon,
    diagonal_similarity,
    eta_ladder,
    gamma_sq,
    ladder_form,
    ladder_forms,
    lowering_defect,
    number_eigen_defect,
    quon_norm_report,
    random_similarity,
    vacuum_form,
)

__version__ = "0.1.0"
