"""Python bindings for the smalldev C++ library."""

from ._smalldev import (
    Model,
    SmalldevError,
    __version__,
    c_gh,
    couple_median,
    exponent,
    gamma,
    load_model,
    mc,
    model_from_json,
    mogulskii_rate,
    quenched_moments,
    run_cli,
    rwre_rate,
    shao_rate,
    sigma,
    tube_survival_fixed,
)

__all__ = [
    "Model",
    "SmalldevError",
    "__version__",
    "c_gh",
    "couple_median",
    "exponent",
    "gamma",
    "load_model",
    "mc",
    "model_from_json",
    "mogulskii_rate",
    "quenched_moments",
    "run_cli",
    "rwre_rate",
    "shao_rate",
    "sigma",
    "tube_survival_fixed",
]
