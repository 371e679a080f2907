"""Adjusted plus/minus player ratings from match appearance data.

The design matrix marks the five players on each side of every map with
+1 and -1; regression coefficients on the score difference (or the win
indicator) are the adjusted ratings. Estimators follow the usual
fit/predict shape and expose coefficients as ``coef_``.
"""

from .bayes import (
    BayesianRating,
    DiagnosticReport,
    PosteriorSummary,
    conjugate_posterior,
    diagnostics,
    effective_sample_size,
    split_rhat,
)
from .dataset import (
    Dataset,
    MatchRecord,
    PlusMinusTable,
    RatingPrior,
    binarize_for_logistic,
    build_dataset,
    filter_min_matches,
    load_matches,
    load_rating_prior,
    plus_minus,
    signed_average,
    standardize,
    train_test_split,
)
from .errors import (
    DataValidationError,
    DuplicateMapId,
    EmptyModel,
    MissingPrior,
    NeedTwoChains,
    NumericalError,
    PlayerOnBothTeams,
    RatingError,
    RosterSizeViolation,
    ScorelineWarning,
    TooFewPoints,
    ZeroVariance,
)
from .evaluate import (
    PearsonTest,
    RatingReport,
    build_report,
    comparison_table,
    pearson_test,
    plus_minus_scatter,
    rank_players,
    win_rate_scatter,
)
from .linear import (
    ElasticNetRating,
    OLSRating,
    elastic_net_objective,
    enet_path,
    kkt_residual,
)
from .logistic import (
    LogisticRating,
    logistic_gradient,
    logistic_loss,
    logistic_objective,
    predict_prob,
)
from .seeding import substream
from .selection import CvGrid, CvResult, cross_validate, kfold_indices, lambda_path
from .synthetic import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "BayesianRating",
    "CvGrid",
    "CvResult",
    "Dataset",
    "DataValidationError",
    "DiagnosticReport",
    "DuplicateMapId",
    "ElasticNetRating",
    "EmptyModel",
    "LogisticRating",
    "MatchRecord",
    "MissingPrior",
    "NeedTwoChains",
    "NumericalError",
    "OLSRating",
    "PearsonTest",
    "PlayerOnBothTeams",
    "PlusMinusTable",
    "PosteriorSummary",
    "RatingError",
    "RatingPrior",
    "RatingReport",
    "RosterSizeViolation",
    "ScorelineWarning",
    "SynthConfig",
    "TooFewPoints",
    "ZeroVariance",
    "binarize_for_logistic",
    "build_dataset",
    "build_report",
    "comparison_table",
    "conjugate_posterior",
    "cross_validate",
    "diagnostics",
    "effective_sample_size",
    "elastic_net_objective",
    "enet_path",
    "filter_min_matches",
    "generate",
    "kfold_indices",
    "kkt_residual",
    "lambda_path",
    "load_matches",
    "load_rating_prior",
    "logistic_gradient",
    "logistic_loss",
    "logistic_objective",
    "pearson_test",
    "plus_minus",
    "plus_minus_scatter",
    "predict_prob",
    "rank_players",
    "signed_average",
    "split_rhat",
    "standardize",
    "substream",
    "train_test_split",
    "win_rate_scatter",
]
