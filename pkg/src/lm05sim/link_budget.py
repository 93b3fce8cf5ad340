"""Device constants and dB-to-transmission arithmetic for the optical link."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class SystemParams:
    """Fixed hardware constants of the transceiver pair.

    Losses are one-way dB figures internal to each station.  ``dark_prob``
    is the dark-count probability per detector per detection window; the
    model charges it twice, once per detector.
    """

    l_a_db: float  # encoder-side internal loss (flipper cells + control-mode splitter)
    l_b_db: float  # receiver-side internal loss (basis-switch cell + fiber coupling)
    eta_det: float  # detector quantum efficiency
    dark_prob: float  # dark-count probability per detector per window
    e_detector: float  # wrong-detector probability for a signal photon
    f_casc: float  # error-correction cost factor relative to the Shannon limit
    rep_rate_hz: float  # pulse repetition rate
    window_ns: float = 25.0  # detection window width, informational

    def __post_init__(self) -> None:
        if self.l_a_db < 0 or self.l_b_db < 0:
            raise ValueError("internal losses must be >= 0 dB")
        if not 0.0 < self.eta_det <= 1.0:
            raise ValueError(f"eta_det must be in (0, 1], got {self.eta_det}")
        if not 0.0 <= self.dark_prob < 1.0:
            raise ValueError(f"dark_prob must be in [0, 1), got {self.dark_prob}")
        if not 0.0 <= self.e_detector <= 0.5:
            raise ValueError(f"e_detector must be in [0, 0.5], got {self.e_detector}")
        if self.f_casc < 1.0:
            raise ValueError(f"f_casc must be >= 1, got {self.f_casc}")
        if self.rep_rate_hz <= 0:
            raise ValueError(f"rep_rate_hz must be positive, got {self.rep_rate_hz}")


@dataclass(frozen=True)
class ChannelSpec:
    """One-way loss of the free-space quantum channel."""

    l_c_db: float

    def __post_init__(self) -> None:
        if self.l_c_db < 0:
            raise ValueError(f"channel loss must be >= 0 dB, got {self.l_c_db}")


# Measured constants of the reference free-space setup.  The receiver-side
# loss is the itemized total 1.06 + 3.219 dB, consistent with the quoted
# 10.705 dB for the whole system; an alternative calibration of 3.781 dB
# ships as the second preset.
REFERENCE_SETUP = SystemParams(
    l_a_db=6.426,
    l_b_db=4.279,
    eta_det=0.55,
    dark_prob=4.276e-6,
    e_detector=0.033,
    f_casc=1.22,
    rep_rate_hz=0.725e6,
    window_ns=25.0,
)

REFERENCE_SETUP_LB3781 = replace(REFERENCE_SETUP, l_b_db=3.781)


def transmission_from_db(loss_db: float) -> float:
    """Convert an attenuation in dB to a transmission probability."""
    if loss_db < 0:
        raise ValueError(f"loss must be >= 0 dB, got {loss_db}")
    return 10.0 ** (-loss_db / 10.0)


def eta_bob(params: SystemParams) -> float:
    """Internal transmission of the system including detection efficiency."""
    return (
        transmission_from_db(params.l_a_db)
        * transmission_from_db(params.l_b_db)
        * params.eta_det
    )


def channel_transmission(channel: ChannelSpec) -> float:
    """Round-trip channel transmission; every photon crosses the link twice."""
    return 10.0 ** (-2.0 * channel.l_c_db / 10.0)


def eta_overall(params: SystemParams, channel: ChannelSpec) -> float:
    """End-to-end probability that a launched photon produces a detection."""
    return channel_transmission(channel) * eta_bob(params)
