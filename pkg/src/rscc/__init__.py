"""Julia sets and kernel Julia sets of random dynamical systems with complete connections."""

from .errors import (ConfigurationError, DomainError, InvalidArgument, ResourceError, RsccError,
                     UnsupportedMap)
from .maps import INF, AffineInterval, Constant, Monomial, PolynomialC, chordal_distance, compose_monomials
from .scenario import (PathSample, ScenarioSpec, admissible_words, cylinder_prob, embed_gdms, forced_path,
                       sample_chain, sample_path_with_maps, transition_probs, update_state)
from .builtins import get_builtin
from .config import dump_scenario, load_scenario, parse_scenario
from .radial import (KernelCertificate, RadialSet, kernel_julia_depth, path_julia_radius, radial_hausdorff,
                     radial_preimage, semigroup_julia_radial, statewise_julia_radial)
from .operator import (ProductPoint, apply_M, equicontinuity_diagnostic, iterate_M, mc_estimate_M,
                       word_sum_oracle)
from .analysis import (Drive, check_irreducible, detect_jump, fattening_experiment, propagation_check,
                       skew_step)
from .grid import (GridWindow, MembershipGrid, estimate_julia_grid, estimate_path_julia_grid, pixel_measure,
                   render_ppm)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_") and name not in ("errors", "maps", "scenario",
           "builtins", "config", "radial", "operator", "analysis", "grid", "states", "rules", "rng")]
