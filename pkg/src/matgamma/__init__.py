"""Matrix-argument special functions and quadratic forms of matrix-normal variables.

Submodules
----------
partitions
    Integer partitions and generalized Pochhammer symbols.
zonal
    Exact zonal polynomial coefficient tables.
specfun
    Multivariate gamma and hypergeometric functions of matrix argument.
models
    The nested matrix-normal families T1, T15, T2 and T3.
quadform
    Density, MGF and latent-root density of ``S = (X + M)'(X + M)``.
manifolds
    Haar sampling on orthogonal groups and Stiefel manifolds.
verify
    Registered verification experiments and reports.
"""
from .errors import (DimensionError, DivergenceError, DomainError, InvalidModelError,
                     MatGammaError, PoleError, TableExhaustedError)
from .linalg import SymMatrix, etr
from .manifolds import (gindikin_contains, haar_average, polar_decompose, sample_orthogonal,
                        sample_stiefel)
from .models import (T1Spec, T3Spec, T15Spec, T2Spec, build_precision, degrees_of_freedom,
                     load_model, log_density, sample, save_model, to_family)
from .partitions import gen_pochhammer, partitions_of
from .quadform import (QFModel, density_S, james_roots_density, mgf, mgf_wishart,
                       roots_density, wishart1928_density_k3, wishart_density)
from .specfun import (HypergeomConfig, SeriesResult, haar_average_oracle, hypergeom_one,
                      hypergeom_two, mv_gamma, mv_gamma_ln)
from .zonal import ZonalTable, zonal_C, zonal_two_arg

__version__ = "0.1.0"

__all__ = [
    "DimensionError", "DivergenceError", "DomainError", "HypergeomConfig", "InvalidModelError",
    "MatGammaError", "PoleError", "QFModel", "SeriesResult", "SymMatrix", "T1Spec", "T15Spec",
    "T2Spec", "T3Spec", "TableExhaustedError", "ZonalTable", "build_precision",
    "degrees_of_freedom", "density_S", "etr", "gen_pochhammer", "gindikin_contains",
    "haar_average", "haar_average_oracle", "hypergeom_one", "hypergeom_two",
    "james_roots_density", "load_model", "log_density", "mgf", "mgf_wishart", "mv_gamma",
    "mv_gamma_ln", "partitions_of", "polar_decompose", "roots_density", "sample",
    "sample_orthogonal", "sample_stiefel", "save_model", "to_family", "wishart1928_density_k3",
    "wishart_density", "zonal_C", "zonal_two_arg",
]
