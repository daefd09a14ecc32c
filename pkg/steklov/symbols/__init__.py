from .eigen import L0Eigen, eigen_residuals, ellipticity_constant, l0_eigendecomp, reconstruct
from .parametrix import (ParametrixTerm, SymbolField, boundary_residual, parametrix_term, term_coefficients,
                         transport_residual)
from .principal import (cauchy_principal_symbol, exterior_semiclassical_symbol, ps_classical_symbol,
                        ps_semiclassical_symbol, xi_symbol)
from .quantize import flat_quantize, halfspace_multiplier, surface_spin_operator, wavepacket_compare
