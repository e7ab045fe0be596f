"""Bayesian multinomial regression by permuted stick-breaking.

S categories are mapped one-to-one onto S stick positions, each stick
carries a binary regression link (logistic, robit, support vector
machine, or softplus mixture), and the category-stick mapping itself
is sampled so poor mappings do not restrict the decision geometry.
"""

from .benchmark import SuiteSettings, run_suite, suite_table
from .data import (Dataset, Pipeline, RbfExpansion, Standardizer,
                   TransformRecord, from_arrays, load_csv, load_dataset,
                   load_libsvm, rbf_width_grid, write_csv)
from .diagnostics import (EssReport, effective_sample_size, error_rate,
                          ess_batch_means, ess_report, log_pointwise,
                          probability_chains)
from .errors import DataError, NumericError
from .links import (LogisticLink, PriorSpec, RobitLink, SvmLink,
                    logistic_pi, robit_pi, student_t_cdf, svm_pi)
from .model import (CONSTRUCTIONS, LinkSpec, McmcConfig, StickModel,
                    TraceStore, assemble_probs, collect_transform,
                    data_log_likelihood, generative_draw, mh_mapping_step,
                    predict_probs, run_mcmc, sample_stick_outcomes,
                    sequential_utility_draw)
from .modelfile import ModelFile, load_model, save_model
from .rng import RngStream
from .samplers import (crt, inverse_gaussian, mvn_draw, pg_mean, pg_var,
                       polya_gamma, truncated_normal, truncated_poisson)
from .softplus import MsrLink, stack_softplus
from .synth import contaminate, square101, square_grid, swiss_roll

__version__ = "0.1.0"

__all__ = [
    "CONSTRUCTIONS", "DataError", "Dataset", "EssReport", "LinkSpec",
    "LogisticLink", "McmcConfig", "ModelFile", "MsrLink", "NumericError",
    "Pipeline", "PriorSpec", "RbfExpansion", "RngStream", "RobitLink",
    "Standardizer", "StickModel", "SuiteSettings", "SvmLink", "TraceStore",
    "TransformRecord", "assemble_probs", "collect_transform", "contaminate",
    "crt", "data_log_likelihood", "effective_sample_size", "error_rate",
    "ess_batch_means", "ess_report", "from_arrays", "generative_draw",
    "inverse_gaussian", "load_csv", "load_dataset", "load_libsvm",
    "load_model", "log_pointwise", "logistic_pi", "mh_mapping_step",
    "mvn_draw", "pg_mean", "pg_var", "polya_gamma", "predict_probs",
    "probability_chains", "rbf_width_grid", "robit_pi", "run_mcmc",
    "run_suite", "sample_stick_outcomes", "save_model",
    "sequential_utility_draw", "square101", "square_grid", "stack_softplus",
    "student_t_cdf", "suite_table", "swiss_roll", "truncated_normal",
    "truncated_poisson", "write_csv",
]
