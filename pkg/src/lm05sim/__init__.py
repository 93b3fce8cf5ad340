"""Two-way (LM05) free-space QKD: polarization chain model, analytic
detection and security rates, and a seeded Monte Carlo pulse simulator."""

from .link_budget import (
    ChannelSpec,
    REFERENCE_SETUP,
    REFERENCE_SETUP_LB3781,
    SystemParams,
    channel_transmission,
    eta_bob,
    eta_overall,
    transmission_from_db,
)
from .polarization import (
    Detector,
    JonesVector,
    NamedState,
    PockelsCell,
    Source,
    apply,
    equal_up_to_phase,
    flipper_matrix,
    hwp_matrix,
    measurement_probs,
    pockels_matrix,
    trace_state,
)
from .rate_model import (
    BracketError,
    OperatingPoint,
    RatePrediction,
    UndefinedQberError,
    binary_entropy,
    discard_fraction,
    max_secure_loss_db,
    optimal_mu,
    p_all,
    p_dark,
    p_signal,
    pns_exposure,
    poisson_p,
    predict_rates,
    qber_all,
    security_parameter,
)
from .simulator import (
    DoubleClickPolicy,
    SimConfig,
    SimResult,
    TrialRecord,
    ZeroDetectionError,
    extract_raw_key,
    iter_records,
    run_simulation,
    run_trial,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec",
    "REFERENCE_SETUP",
    "REFERENCE_SETUP_LB3781",
    "SystemParams",
    "channel_transmission",
    "eta_bob",
    "eta_overall",
    "transmission_from_db",
    "Detector",
    "JonesVector",
    "NamedState",
    "PockelsCell",
    "Source",
    "apply",
    "equal_up_to_phase",
    "flipper_matrix",
    "hwp_matrix",
    "measurement_probs",
    "pockels_matrix",
    "trace_state",
    "BracketError",
    "OperatingPoint",
    "RatePrediction",
    "UndefinedQberError",
    "binary_entropy",
    "discard_fraction",
    "max_secure_loss_db",
    "optimal_mu",
    "p_all",
    "p_dark",
    "p_signal",
    "pns_exposure",
    "poisson_p",
    "predict_rates",
    "qber_all",
    "security_parameter",
    "DoubleClickPolicy",
    "SimConfig",
    "SimResult",
    "TrialRecord",
    "ZeroDetectionError",
    "extract_raw_key",
    "iter_records",
    "run_simulation",
    "run_trial",
]
