"""Finite-class learning theory toolkit: dimensions, sequential complexities,
process kernels, learners and regret estimators."""
from .classes import (Domain, FiniteFunctionClass, IntegerThresholdClass, LabelSpace, Loss, LossTable,
                      OffsetClass, OutcomeSpace, class_from_spec, loss_class, make_bit_threshold_class,
                      make_bounded_variation_class, make_full_binary_class, make_threshold_class)
from .complexity import (ComplexityValue, ResourceBudgetError, SignTree, rademacher_fixed_sample,
                         rademacher_worst_case, seq_rademacher_fixed_tree, seq_rademacher_loss_class,
                         seq_rademacher_sup, sign_bijection_check)
from .dims import (DimensionReport, dimension, fat_shattering, littlestone_dimension, seq_fat_shattering,
                   vc_dimension)
from .learners import BatchRule, FollowTheLeader, Hedge, erm, erm_offset, hedge, run_prequential
from .processes import (Path, ProcessKernel, adversarial_threshold, conditional_average, drifting_process,
                        mixture_iid, point_mass_process, product_iid, random_level,
                        random_level_conditional_risk, regression_transform, total_variation)
from .regret import (DecompositionReport, RegretEstimate, decomposition_report, gen_value_estimate,
                     iid_value_estimate, martingale_deviation, online_worst_case, p_regret,
                     preq_value_estimate, process_regret, stationary_gap, ulln_deviation)

__version__ = "0.1.0"
