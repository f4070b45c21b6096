"""Lasso homotopy paths, correlation factors of a design, prediction bounds
and a Monte-Carlo harness for studying the optimal tuning parameter."""

__version__ = "0.1.0"

from .design import (
    DesignMatrix,
    RegressionInstance,
    expand_design,
    gen_clustered,
    gen_equicorrelated,
    gen_instance,
    make_beta0,
)
from .lasso import (
    LassoPath,
    coordinate_descent_solve,
    kkt_check,
    lars_lasso_path,
    optimal_lambda,
    prediction_error,
    solve_at,
)
from .correlation import (
    CorrelationProfile,
    correlation_profile,
    dual_norm_sup,
    event_T_holds,
    sconv_membership,
    tuning_lambda_kappa,
)
from .experiments import ExperimentConfig, LambdaGrid, run_replicates, summarize, table1
