"""crpmap: collapsed Dirichlet-process mixture clustering.

Engines: MAP-DPM (iterated conditional modes), collapsed CRP Gibbs sampling
and DP-means, over a shared normal-Gamma/Student-T collapsed model, with
synthetic CRP data generation, concentration-parameter learning,
out-of-sample prediction and clustering metrics.
"""

__version__ = "0.1.0"

from ._kernels import backend_name
from .alpha import AlphaGrid, alpha_map_newton, select_alpha_by_cv, select_alpha_by_nll
from .core import (Dataset, FitResult, NGPosterior, NGPrior, Partition,
                   SufficientStats, ng_posterior, stats_add, stats_remove)
from .crp import (ClusterParams, CrpConfig, GeneratorConfig, continue_crp_mixture,
                  crp_conditional, crp_log_joint, generate_dataset, sample_partition)
from .dpmeans import DpMeansConfig, dpmeans_objective, fit_dpmeans, lambda_scan
from .errors import (ConvergenceError, CrpmapError, EmptyClusterError, InputError,
                     InsufficientChain, NumericalIntegrityError)
from .evaluation import (CollapsedModel, MetricReport, ami, loo_nll, metric_report,
                         nmi, predict_marginal, predict_modal)
from .experiment import CrpExperimentConfig, ExperimentResult, run_crp_experiment
from .gibbs import (GibbsConfig, GibbsTrace, RafteryConfig, RafteryResult,
                    raftery_lewis, run_gibbs, summarize_trace)
from .mapdp import MapDpConfig, fit_mapdp, restart_initializer
from .predictive import (AssignmentScores, StudentTParams, assignment_probabilities,
                         assignment_scores, complete_data_nll,
                         complete_data_pseudo_nll, log_marginal, log_student_t,
                         student_t_params_existing, student_t_params_prior)

__all__ = [
    "__version__", "backend_name",
    "Dataset", "NGPrior", "NGPosterior", "SufficientStats", "Partition", "FitResult",
    "stats_add", "stats_remove", "ng_posterior",
    "CrpConfig", "GeneratorConfig", "ClusterParams", "crp_log_joint",
    "crp_conditional", "sample_partition", "generate_dataset", "continue_crp_mixture",
    "StudentTParams", "AssignmentScores", "student_t_params_existing",
    "student_t_params_prior", "log_student_t", "log_marginal", "assignment_scores",
    "assignment_probabilities", "complete_data_nll", "complete_data_pseudo_nll",
    "MapDpConfig", "fit_mapdp", "restart_initializer",
    "GibbsConfig", "GibbsTrace", "RafteryConfig", "RafteryResult", "raftery_lewis",
    "run_gibbs", "summarize_trace",
    "DpMeansConfig", "fit_dpmeans", "dpmeans_objective", "lambda_scan",
    "AlphaGrid", "select_alpha_by_nll", "select_alpha_by_cv", "alpha_map_newton",
    "MetricReport", "CollapsedModel", "nmi", "ami", "metric_report",
    "predict_marginal", "predict_modal", "loo_nll",
    "CrpExperimentConfig", "ExperimentResult", "run_crp_experiment",
    "CrpmapError", "InputError", "NumericalIntegrityError", "EmptyClusterError",
    "ConvergenceError", "InsufficientChain",
]
