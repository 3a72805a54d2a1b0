"""Linear filtering of edge flows on simplicial complexes.

FIR filters in the Hodge 1-Laplacian, subspace-varying filters with separate
weights on its lower and upper parts, least-squares design, and the
Hodge-decomposition tools they rely on.
"""

from .complex import (
    DanglingSimplex,
    DuplicateSimplex,
    HodgeLaplacians,
    IncidencePair,
    SimplicialComplex,
    build_complex,
    edge_degrees,
    fill_triangles,
    incidence,
    integer_rank,
    laplacians,
    load_complex,
    load_flow,
    max_edge_degree,
    neighborhoods,
    random_complex,
    save_complex,
    save_flow,
)
from .design import (
    ConflictWarning,
    DesignReport,
    DesignSpec,
    RankDeficientData,
    SingularDesign,
    design_fir,
    design_sv,
    fit_fir_from_data,
    fit_sv_from_data,
)
from .experiments import (
    DENOISING_METHODS,
    ArModel,
    ExperimentReport,
    ZeroReference,
    ar_step,
    ar_trajectory,
    nrmse,
    run_denoising,
    run_extraction,
    run_prediction,
    sioux_falls,
    toy_complex,
)
from .filtering import (
    FirFilter,
    FrequencyResponse,
    SvFilter,
    apply_filter,
    apply_fir,
    apply_regularized_inverse,
    apply_sv,
    diagnostics,
    response,
    response_fir,
    response_sv,
    shift,
)
from .spectral import (
    AmbiguousEigenvector,
    EigensolverFailure,
    HodgeEmbedding,
    Label,
    Spectrum,
    classify,
    eigendecompose,
    embed,
    isft,
    project,
    sft,
)

__version__ = "0.1.0"
