"""Space-only, spectral and space-time POD.

Series are passed as N x L float arrays (one column per snapshot) together
with the time step dt.
"""

from ._core import (
    FrequencyBin,
    FrequencyModeSet,
    ModeSet,
    assemble_block_toeplitz,
    build_embedded,
    captured_energy,
    cumulative_energy,
    decorrelation_time,
    generate_lorenz63,
    generate_narrowband,
    generate_ou,
    lag_correlations,
    load_modes,
    load_series,
    mode_psd,
    mode_similarity,
    peak_bin_fraction,
    philox_block,
    reshape_mode,
    save_modes,
    save_series,
    space_only_pod,
    spacetime_pod,
    spacetime_pod_toeplitz,
    spod,
    subtract_temporal_mean,
    weighted_svd_modes,
    __version__,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
