"""Analytic detection and security model for the two-way link.

A weak coherent pulse with Poissonian photon number makes the round trip
through a lossy channel.  Click statistics follow from the end-to-end
transmission; the secret fraction applies a photon-number-splitting bound
where the multi-photon pulse mass (``pns_exposure``) is conceded to an
eavesdropper, the matching key fraction is discarded during privacy
amplification, and error correction is charged at ``f_casc`` times the
Shannon limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .link_budget import ChannelSpec, SystemParams, eta_overall

#: Error probability of a dark count: uncorrelated with the key bit.
E0_BACKGROUND = 0.5

#: ``half_tail`` counts three-photon pulses at half weight,
#: 1 - (1 + mu + mu^2/2 + mu^3/12) e^-mu.  ``full_tail`` keeps the full
#: three-photon term, which leaves the Poisson mass of four or more photons.
PNS_VARIANTS = ("half_tail", "full_tail")


class UndefinedQberError(ValueError):
    """QBER requested at an operating point with zero detection probability."""


class BracketError(ValueError):
    """Zero-crossing search called with an invalid secure/insecure bracket."""


@dataclass(frozen=True)
class OperatingPoint:
    """Mean photon number plus the hardware and channel it runs on."""

    mu: float
    params: SystemParams
    channel: ChannelSpec
    pns_variant: str = "half_tail"

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise ValueError(f"mean photon number must be positive, got {self.mu}")
        if self.pns_variant not in PNS_VARIANTS:
            raise ValueError(f"unknown pns_variant {self.pns_variant!r}")


@dataclass(frozen=True)
class RatePrediction:
    """Full analytic evaluation at one operating point.

    ``bracket`` is the raw per-detection secret fraction,
    beta*(1 - tau(e/beta)) - f_casc*H(e), kept unclamped so insecure regions
    can still be plotted; ``r_pns_per_pulse`` clamps it at zero.
    """

    p_signal: float
    p_dark: float
    p_all: float
    e_all: float
    beta: float
    discard_fraction: float
    bracket: float
    r_pns_per_pulse: float
    r_per_second: float
    secure: bool


def poisson_p(i: int, mu: float) -> float:
    """Probability of finding ``i`` photons in a pulse with mean ``mu``."""
    if i < 0:
        raise ValueError(f"photon number must be >= 0, got {i}")
    if mu < 0:
        raise ValueError(f"mean photon number must be >= 0, got {mu}")
    if mu == 0.0:
        return 1.0 if i == 0 else 0.0
    if i > 20:
        # log space: the factorial overflows long before the ratio underflows
        return math.exp(i * math.log(mu) - mu - math.lgamma(i + 1))
    return mu**i * math.exp(-mu) / math.factorial(i)


def p_signal(op: OperatingPoint) -> float:
    """Probability that at least one photon of a pulse reaches a detector."""
    return -math.expm1(-eta_overall(op.params, op.channel) * op.mu)


def p_dark(params: SystemParams) -> float:
    """Dark-count probability per pulse, one contribution per detector."""
    return 2.0 * params.dark_prob


def p_all(op: OperatingPoint) -> float:
    """Probability of any click per pulse, counting coincidences once.

    The signal-dark cross term is retained even though it is negligible at
    realistic operating points.
    """
    ps = p_signal(op)
    pd = p_dark(op.params)
    return ps + pd - ps * pd


def qber_all(op: OperatingPoint) -> float:
    """Expected error fraction among detected bits.

    Dark counts contribute errors at 1/2, signal photons at ``e_detector``.
    """
    ps = p_signal(op)
    pd = p_dark(op.params)
    total = ps + pd - ps * pd
    if total <= 0.0:
        raise UndefinedQberError("no detections at this operating point")
    return (E0_BACKGROUND * pd + op.params.e_detector * ps) / total


def pns_exposure(mu: float, variant: str = "half_tail") -> float:
    """Pulse fraction conceded to photon-number splitting, clamped to [0, 1]."""
    if mu < 0:
        raise ValueError(f"mean photon number must be >= 0, got {mu}")
    if variant == "half_tail":
        series = 1.0 + mu + mu * mu / 2.0 + 0.5 * mu**3 / 6.0
    elif variant == "full_tail":
        series = 1.0 + mu + mu * mu / 2.0 + mu**3 / 6.0
    else:
        raise ValueError(f"unknown pns_variant {variant!r}")
    return min(1.0, max(0.0, 1.0 - series * math.exp(-mu)))


def security_parameter(op: OperatingPoint) -> float:
    """Fraction of detections that cannot stem from split multi-photon pulses.

    Negative values mean the multi-photon exposure exceeds the click rate,
    at which point no secret key can be distilled.
    """
    total = p_all(op)
    if total <= 0.0:
        raise UndefinedQberError("security parameter undefined without detections")
    return (total - pns_exposure(op.mu, op.pns_variant)) / total


def discard_fraction(e: float) -> float:
    """Key fraction discarded during privacy amplification at error rate ``e``.

    log2(1 + 4e - 4e^2) below one half, 1 from there on; the two branches
    meet continuously at e = 1/2.
    """
    if e < 0:
        raise ValueError(f"error rate must be >= 0, got {e}")
    if e >= 0.5:
        return 1.0
    return math.log2(1.0 + 4.0 * e - 4.0 * e * e)


def binary_entropy(e: float) -> float:
    """Binary Shannon entropy in bits, with H(0) = H(1) = 0."""
    if not 0.0 <= e <= 1.0:
        raise ValueError(f"entropy argument must be in [0, 1], got {e}")
    if e == 0.0 or e == 1.0:
        return 0.0
    return -e * math.log2(e) - (1.0 - e) * math.log2(1.0 - e)


def predict_rates(op: OperatingPoint) -> RatePrediction:
    """Evaluate the whole chain at one operating point.

    Per-pulse secret rate: P_all * [beta*(1 - tau(e/beta)) - f_casc*H(e)],
    clamped to zero and flagged insecure when beta <= 0 or the bracket goes
    negative.  With beta <= 0 the discard fraction saturates at 1, the value
    it approaches as beta tends to zero from above.
    """
    ps = p_signal(op)
    pd = p_dark(op.params)
    total = ps + pd - ps * pd
    e = qber_all(op)
    beta = (total - pns_exposure(op.mu, op.pns_variant)) / total
    tau_prime = discard_fraction(e / beta) if beta > 0.0 else 1.0
    bracket = beta * (1.0 - tau_prime) - op.params.f_casc * binary_entropy(e)
    secure = beta > 0.0 and bracket > 0.0
    per_pulse = total * bracket if secure else 0.0
    return RatePrediction(
        p_signal=ps,
        p_dark=pd,
        p_all=total,
        e_all=e,
        beta=beta,
        discard_fraction=tau_prime,
        bracket=bracket,
        r_pns_per_pulse=per_pulse,
        r_per_second=per_pulse * op.params.rep_rate_hz,
        secure=secure,
    )


def max_secure_loss_db(
    params: SystemParams,
    mu: float,
    lo_db: float = 0.0,
    hi_db: float = 20.0,
    resolution_db: float = 0.01,
    pns_variant: str = "half_tail",
) -> float:
    """Largest one-way channel loss that still yields a positive secret rate.

    Requires a valid bracket (positive rate at ``lo_db``, zero at ``hi_db``)
    and bisects it down to ``resolution_db``, returning the secure end of the
    final interval.
    """

    def rate(l_c: float) -> float:
        op = OperatingPoint(mu, params, ChannelSpec(l_c), pns_variant)
        return predict_rates(op).r_pns_per_pulse

    if rate(lo_db) <= 0.0:
        raise BracketError(f"secret rate is not positive at {lo_db} dB")
    if rate(hi_db) > 0.0:
        raise BracketError(f"secret rate is still positive at {hi_db} dB")
    lo, hi = lo_db, hi_db
    while hi - lo > resolution_db:
        mid = 0.5 * (lo + hi)
        if rate(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def optimal_mu(
    params: SystemParams,
    channel: ChannelSpec,
    mu_min: float = 0.001,
    mu_max: float = 1.7,
    step: float = 0.001,
    pns_variant: str = "half_tail",
) -> tuple[float, float]:
    """Mean photon number maximizing the per-pulse secret rate.

    Grid search over [mu_min, mu_max] followed by a golden-section polish
    around the best grid point.  Returns (0.0, 0.0) when no value of mu is
    secure on this channel.
    """

    def rate(mu: float) -> float:
        op = OperatingPoint(mu, params, channel, pns_variant)
        return predict_rates(op).r_pns_per_pulse

    n = int(math.floor((mu_max - mu_min) / step + 1e-9)) + 1
    best_mu, best_rate = 0.0, 0.0
    for i in range(n):
        mu = mu_min + i * step
        r = rate(mu)
        if r > best_rate:
            best_mu, best_rate = mu, r
    if best_rate <= 0.0:
        return 0.0, 0.0

    lo = max(mu_min, best_mu - step)
    hi = min(mu_max, best_mu + step)
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = rate(c), rate(d)
    for _ in range(60):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = rate(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = rate(d)
    mu_star = 0.5 * (a + b)
    return mu_star, rate(mu_star)
