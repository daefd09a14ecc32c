from .decay import decay_trends, extension_decay, nystrom_extension, shell_source_decay
from .krein import (KreinBlocks, block_structure_residual, inverse_identity_residual, krein_blocks, ps_pair,
                    psi_operator, range_projector)
from .oracle import MITEigenfunction, oracle_eigenfunction, oracle_spectrum, radial_oracle
from .rates import MkjResult, exterior_ps_norm, expansion_slopes, mkj_matrix, rate_fit
from .resolvent import (GaussianSource, LiftedField, ResolventResult, VolumeSource, energy_identity,
                        lifted_resolvent, mit_boundary_data, resolvent_apply, transmission_solve)
from .scan import (BirmanSchwinger, CalderonMIT, bs_scan, mit_scan, refine_eigenvalue, refine_mit_eigenvalue,
                   scan_minima, scan_roots)
