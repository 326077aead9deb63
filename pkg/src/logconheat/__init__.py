"""Logarithmic-power concavity of heat flow, checked numerically on grids."""

from .transforms import (ConcavityTransform, DomainError, ExtReal, LogPower, NEG_INF, Power,
                         evaluate, evaluate_inverse, power_mean, psi, psi_prime)
from .grid import (Ball, Box, ConvexDomain, Grid, HalfSpace, SampledFunction, gauss_kernel,
                   indicator, sample)
from .heatflow import HeatFlowConfig, dirichlet_evolve, eigen_solve, free_evolve, torsion_solve
from .certify import (CERTIFIED, VIOLATED, ConcavityReport, KappaInfeasibleError, TripleSet,
                      alpha_logconcave, check_F_concave, find_violation, inclusion_suite,
                      kappa_threshold, p_concave, quasiconcave)

__version__ = "0.1.0"
