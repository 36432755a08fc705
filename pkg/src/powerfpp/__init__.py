"""First-passage percolation on Cartesian power graphs.

Analytic core: path-generating functions with certified error bounds,
critical times, the sharpness criterion and its margin certificates.
Stochastic core: exact conditioned-walk sampling and reproducible
Monte Carlo first-passage simulation on implicit power graphs.
"""

__version__ = "0.1.0"

from .critical import (CriticalTime, critical_time, diagonal_time_constant,
                       directed_chain_ratio, solve_alpha_star, solve_theta)
from .criterion import (NONPOSITIVE, POSITIVE, UNDECIDED, CriterionReport,
                        MarginCertificate, f_eval, not_sharp_margin,
                        sup_f_classify, symmetry_condition, tilted_sum)
from .genfun import CertifiedValue, bessel_i, closed_form_m, m_eval, m_row
from .graphs import (BaseGraph, Edge, ball, build_graph, calibrated_chain,
                     cartesian_product, chain_graph, complete_graph,
                     cycle_graph, directed_chain_graph, directed_edge_graph,
                     load_graph, path_graph, paw_graph)
from .simulate import (SimulationSummary, WeightModel, first_passage_time,
                       make_weight_model, run_ensemble)
from .walk import (ConditionedWalkSampler, JumpLengthLaw, MCEstimate,
                   WalkSample, mc_f_estimate, sample_conditioned_walk,
                   sample_power_walk, sample_unconditioned_walk,
                   success_lower_bound)

__all__ = [name for name in dir() if not name.startswith("_")]
