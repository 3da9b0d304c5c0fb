"""ctxmine: context-driven data-mining lifecycle toolkit.

Python surface over the C++ core: CSV tables with missingness analysis,
MICE/PMM imputation, LOF outlier scores, weighted least squares, random
forests, confusion-matrix metrics, lexicon sentiment coefficients, and the
config-driven pipeline runner.
"""

from importlib import resources

from ._core import (
    Table,
    confusion,
    forest_predict,
    impute,
    lof,
    missingness,
    ols,
    run_pipeline,
    score_text,
    team_coefficients,
    train_forest,
    wls,
)

__version__ = "0.1.0"

__all__ = [
    "Table",
    "confusion",
    "default_lexicon_path",
    "forest_predict",
    "impute",
    "lof",
    "missingness",
    "ols",
    "run_pipeline",
    "score_text",
    "team_coefficients",
    "train_forest",
    "wls",
]


def default_lexicon_path() -> str:
    """Path of the bundled default sentiment lexicon (token<TAB>weight TSV)."""
    return str(resources.files(__package__) / "data" / "lexicon_default.tsv")
