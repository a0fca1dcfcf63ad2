"""Python bindings for the ipd_decision library."""

from ._core import (
    DecisionSolution,
    FitResult,
    InputError,
    IpdError,
    PpiFit,
    PredictiveDistribution,
    Preferences,
    Strategy,
    StrategyEstimate,
    TrendModel,
    __version__,
    cli_main,
    decide,
    decide_csv,
    fit_linear,
    fit_trend,
    forecast,
    load_calibration_csv,
    ppi_fit,
    select_gamma,
    simulate,
    solve_weights,
    utility,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
