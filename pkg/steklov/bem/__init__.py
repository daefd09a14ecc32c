from .assembly import assemble_cauchy, assemble_lambda, assemble_single_layer
from .io import dump_operator, load_operator
from .operators import (BoundaryOperator, identity_operator, invert_dense, nodewise_operator, resolved_norm,
                        sigma_min)
from .potentials import boundary_limit, potential_eval, potential_matrix
from .spectral_ps import SpectralPoincareSteklov, channel_vectors, spectral_ps
from .steklov import (calderon_projector, ps_exterior, ps_interior, sobolev_norm, sobolev_operator_norm,
                      sobolev_weight)
from .identities import (cauchy_adjoint_residual, cauchy_square_residual, jump_residuals, lambda_sigma_min,
                         lambda_square_residual, single_layer_min_eigenvalue, smooth_densities)
