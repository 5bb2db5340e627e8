"""Post-equalizer SNR prediction for PM-QAM coherent links.

Computes the output SNR of an adaptive MMSE equalizer analytically from any
2x2 frequency-dependent channel matrix and noise PSD (channel inversion,
noise-enhancement spectral SNR, symbol-rate folding, MMSE integral), and
validates it against a built-in time-domain Monte Carlo simulator.
"""

__version__ = "0.1.0"

from .analytic import (
    NoiseModel,
    SnrPair,
    SnrSpectrum,
    TxSpec,
    ber_from_snr_qam,
    equalizer_output_snr,
    noise_for_target_snr,
    output_snr_pair,
    snr_from_ber_qam,
    spectral_snr_dual_pol,
    spectral_snr_single_pol,
)
from .channel import (
    ChannelSpectrum,
    ModalChannelSpec,
    ModeCoupling,
    build_mmf_channel,
    flat_channel,
    identity_channel,
    invert_channel,
    load_channel,
    sample_haar_jones,
    save_channel,
)
from .errors import (
    AlignmentFailedError,
    ConfigError,
    GridMismatchError,
    IllConditionedError,
    MalformedFileError,
    NonFiniteResultError,
    NonPositiveResultError,
    NonPowerOfTwoError,
    UndersampledPulseError,
)
from .experiment import (
    ExperimentConfig,
    RunReport,
    emit_csv,
    emit_plot_data,
    load_config,
    run_comparison,
    run_single,
    summarize,
)
from .profiles import get_profile
from .seeding import derive_seed
from .simulator import (
    EqualizerConfig,
    SimConfig,
    SimResult,
    WaveformPair,
    measure,
    mmse_butterfly_equalize,
    propagate,
    simulate_link,
    synthesize_tx,
)
from .spectral import (
    FoldedSpectrum,
    FrequencyGrid,
    PulseShape,
    ScalarSpectrum,
    build_grid,
    fold_spectrum,
    pulse_power_spectrum,
    rrc_amplitude,
)
