"""dnnproj: Euclidean projection onto the doubly nonnegative cone.

The primary solver is an augmented Lagrangian method whose subproblems are
minimized by a semismooth Newton-CG iteration; accelerated proximal
gradient, ADMM and Dykstra baselines share the same termination metric.
Instance generators, a constraint-degeneracy checker and a benchmark CLI
round out the toolbox.
"""

__version__ = "0.1.0"

from .alm import AlmConfig, InsufficientData, RateSummary, alm_solve, check_criteria, rate_monitor
from .baselines import AdmmConfig, admm_solve, apg_solve, dykstra_solve
from .datagen import (Instance, QopData, QopLift, build_lift, default_shift,
                      gen_hankel, gen_lowrank_sparse, gen_toeplitz,
                      gen_zero_proj, generate, lift_biq, lift_instance,
                      lift_qap, parse_biqmac, parse_qaplib, ParseError)
from .degeneracy import (DegeneracyVerdict, SupportData, necessary_condition,
                         nondegeneracy_check, support)
from .linalg import (EigFailure, InvalidMatrix, SpectralDecomp, proj_nonneg,
                     proj_psd, read_matrix, sym, sym_eig, write_matrix)
from .reporting import IterationRecord, SolveReport
from .residuals import (DegenerateRatio, Diagnostics, InvalidInput, KktPoint,
                        diagnostics, kkt_parts, kkt_residual, relative_kkt,
                        strict_complementarity)
from .sncg import (CgBreakdown, JacobianData, LineSearchFailure, SncgConfig,
                   SncgStats, Subproblem, apply_newton_operator,
                   apply_nonneg_jacobian, apply_precond_inverse,
                   apply_psd_jacobian, build_jacobian, cg_solve,
                   eval_subproblem, grad_subproblem, line_search, sncg_solve)
