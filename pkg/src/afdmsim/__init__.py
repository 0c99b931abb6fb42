"""AFDM waveform simulation with delay-Doppler channels and security experiments."""

from .channel import (
    ChannelPath,
    ChannelRealization,
    NoiseSpec,
    apply_channel,
    awgn,
    build_effective_channel,
    generate_channel,
    geometric_sum_kernel,
    path_offset,
)
from .core import (
    AfdmConfig,
    DaftSymbols,
    TimeSignal,
    add_cpp,
    daft_demodulate,
    idaft_modulate,
    make_config,
    remove_cpp,
)
from .design import (
    AdmissibleC1Set,
    Classification,
    SecurityRiskRange,
    admissible_c1,
    canonicalize_c2,
    classify_receiver,
    security_risk_range,
)
from .detection import (
    BerRecord,
    BitBlock,
    count_errors,
    mmse_equalize,
    qam_demap,
    qam_map,
)
from .errors import (
    AfdmError,
    ConfigError,
    EqualizerConditioningWarning,
    ShapeError,
    SpecFileError,
    StateError,
)
from .experiment import (
    ExperimentSpec,
    parse_spec_file,
    preset_specs,
    run_experiment,
    run_trial,
    write_csv,
)
from .framing import (
    FrameLayout,
    PathEstimate,
    ReceiverParams,
    build_frame_layout,
    estimate_channel,
    extract_data,
    place_frame,
    reconstruct_heff,
)

__version__ = "0.1.0"
