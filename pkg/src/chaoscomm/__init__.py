"""Deterministic simulator and attack bench for continuous-chaos secure
communication on the Chua oscillator: chaotic masking, CSK and
time-scaling CSK, memristor key locking, and the adversary suite."""

from ._kernels import USING_NUMBA
from .attacks import (
    AttackReport,
    Extrema,
    JamConfig,
    JamReport,
    KpaConfig,
    KpaReport,
    PowerTrace,
    ReturnMapPoints,
    build_return_map,
    extract_extrema,
    jam_and_retreat,
    kpa_harness,
    power_proxy,
    rm_attack,
    sidechannel_correlation,
)
from .comms import (
    AnalogMessage,
    BitMessage,
    ChannelModel,
    Jammer,
    channel_apply,
    csk_modulate,
    equalize_recovered,
    lock_check,
    nmse,
    pulse_message,
    receive_masked,
    receive_masked_cascade,
    retune_frequency,
    sync_error,
    transmit_masked,
    tscsk_receive,
    tscsk_transmit,
)
from .config import ConfigError, ExperimentConfig, format_config, parse_config
from .dynamics import (
    CANONICAL,
    ChuaParams,
    DivergenceError,
    ScalingBoundError,
    Trajectory,
    chua_deriv,
    dominant_frequency,
    equilibria,
    integrate,
    integrate_scaled,
    jacobian,
    lyapunov_max,
    max_real_eig,
    nonlinearity,
)
from .engines import (
    EightSection,
    EvenOdd,
    TimeScaling,
    TwoRegion,
    delta_eight_section,
    delta_even_odd,
    delta_two_region,
    lambda_select,
)
from .memristor import (
    MemristorKey,
    MemristorParams,
    MemristorState,
    apply_key,
    effective_params,
    integrate_memristor,
    key_space_size,
    memristance,
    memristor_chua_deriv,
    memristor_step,
    nominal_key,
    read_key_file,
    write_key_file,
)

__version__ = "0.1.0"
