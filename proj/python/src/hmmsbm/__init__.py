"""Hidden Markov stochastic blockmodels for weekly trading networks."""

from ._core import (
    ChainTrace,
    InputError,
    NetworkSeries,
    NumericalError,
    __version__,
    adjusted_rand_index,
    change_points,
    eppf_log_prob,
    fit,
    fit_baseline,
    link_probabilities,
    load_series,
    point_partition,
    simulate,
    state_coclustering,
    summary,
    write_series,
)

__all__ = [
    "ChainTrace",
    "InputError",
    "NetworkSeries",
    "NumericalError",
    "adjusted_rand_index",
    "change_points",
    "eppf_log_prob",
    "fit",
    "fit_baseline",
    "link_probabilities",
    "load_series",
    "point_partition",
    "simulate",
    "state_coclustering",
    "summary",
    "write_series",
]
