"""Seeded herding-dynamics laboratory.

Reinforcement urns, a cultural market with graded social influence,
dual-view predictability metrics, and fake-user injection/detection.
All randomness flows from explicit master seeds, so every result here
is reproducible bit for bit.
"""

from ._core import (
    ConfigError,
    Rng,
    __version__,
    choice_probabilities,
    derive_seed,
    detect_bursts,
    download_decision,
    final_share_ensemble,
    gini,
    initial_display_order,
    ks_uniform_statistic,
    martingale_residual,
    quantile_bins,
    run_config,
    run_realization,
    simulate_listen,
    social_signal,
    spearman,
    unpredictability,
    urn_trajectory,
    win_probability_shift,
)

__all__ = [
    "ConfigError",
    "Rng",
    "__version__",
    "choice_probabilities",
    "derive_seed",
    "detect_bursts",
    "download_decision",
    "final_share_ensemble",
    "gini",
    "initial_display_order",
    "ks_uniform_statistic",
    "martingale_residual",
    "quantile_bins",
    "run_config",
    "run_realization",
    "simulate_listen",
    "social_signal",
    "spearman",
    "unpredictability",
    "urn_trajectory",
    "win_probability_shift",
]
