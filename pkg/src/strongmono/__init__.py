"""Tangles, three-tangle convex roofs and strong-monogamy residuals of four-qubit states."""
from .convex_roof import (FAST_OPTIONS, RoofOptions, RoofValue, is_one_root, range_basis, roof,
                          roof_exact_one_root, roof_upper_bound, tangle_quartic, tangle_zeros)
from .families import (A0, ClassSpec, family_rho1, family_rho2, generalized_w, generator_g2,
                       generator_g4, ghz4, haar_ket, load_generator_definitions,
                       random_class_state, random_sl2c, slocc_ax, stream, w4)
from .monogamy import NATURAL, ResidualReport, VariantSpec, residual, residual_all_foci, threshold_scan
from .qstate import (DensityOp, Ket, LocalOp, apply_local, basis_ket, density, ket_from_amplitudes,
                     partial_trace, read_state, reduced, write_state)
from .tangles import concurrence, one_tangle, three_tangle_pure, two_tangle

__version__ = "0.1.0"
