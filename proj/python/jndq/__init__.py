"""Python access to the jndq core: simulation, statistics and the CLI."""

from ._core import (
    JndqError,
    __version__,
    binomial_tail,
    convergence_point,
    fisher_z_test,
    measure_snr,
    mix_at_snr,
    p_correct,
    pcc,
    rmse,
    rmse_f_test,
    run_cli,
    sha256_hex,
    simulate_screening,
    simulate_staircase,
    srcc,
    threshold_from_reversals,
    wilson_interval,
)

__all__ = [
    "JndqError",
    "__version__",
    "binomial_tail",
    "convergence_point",
    "fisher_z_test",
    "measure_snr",
    "mix_at_snr",
    "p_correct",
    "pcc",
    "rmse",
    "rmse_f_test",
    "run_cli",
    "sha256_hex",
    "simulate_screening",
    "simulate_staircase",
    "srcc",
    "threshold_from_reversals",
    "wilson_interval",
]
