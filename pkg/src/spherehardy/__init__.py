"""Numerical verification of sharp Hardy inequalities on the unit sphere S^n."""

from .functionals import (InequalityKind, InequalityReport, evaluate, ibp_identity_I,
                          ibp_identity_J, pointwise_gradient_bound_check)
from .functions import (RadialProfile, SmoothTestFunction, compose_radial, critical_family,
                        radial_corpus, random_smooth, sin_power, smooth_corpus,
                        subcritical_family)
from .geometry import AngularPoint, embed, geodesic_distance
from .quadrature import (capped_grid, integrate_radial, integrate_sphere, radial_grid,
                         sphere_area, sphere_grid)
from .sharpness import SearchResult, SweepResult, counterexample_search, minimize_quotient, sweep

__version__ = "0.1.0"
