"""Pulse-by-pulse Monte Carlo of the encoding mode over the lossy link.

Each trial draws the receiver's basis and state choice, a Poissonian photon
number, per-photon survival over the lumped end-to-end transmission (all
losses collapse into one Bernoulli because every element in the chain is
polarization-preserving), the encoder's bit (identity or orthogonal flip),
detector routing with misalignment, dark counts, and the click-resolution
logic.

Randomness is counter-based: block ``b`` of a run draws from an independent
Philox stream keyed by ``(seed, b)``, with a fixed draw order inside the
block.  Results are therefore bit-identical no matter how blocks are
scheduled over workers.
"""

from __future__ import annotations

import enum
import json
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

import numpy as np

from .link_budget import ChannelSpec, SystemParams, eta_overall
from .polarization import (
    BASIS_SWITCH_ANGLE,
    NamedState,
    PockelsCell,
    apply,
    classify,
    flipper_matrix,
    measurement_probs,
    pockels_matrix,
)

__all__ = [
    "BLOCK_SIZE",
    "RECORD_TRIAL_CAP",
    "DoubleClickPolicy",
    "ZeroDetectionError",
    "SimConfig",
    "TrialRecord",
    "SimResult",
    "run_trial",
    "run_simulation",
    "iter_records",
    "extract_raw_key",
]

#: Trials per scheduling unit; every block gets its own random stream.
BLOCK_SIZE = 1 << 16

#: Per-trial record dumps are refused above this many trials unless forced.
RECORD_TRIAL_CAP = 100_000


class DoubleClickPolicy(enum.Enum):
    """What to do when both detectors fire in the same window."""

    DISCARD = "discard"
    RANDOM_BIT = "random_bit"


class ZeroDetectionError(RuntimeError):
    """No trial produced a decoded bit, so the empirical QBER is undefined."""


@dataclass(frozen=True)
class SimConfig:
    """One Monte Carlo run: operating point, size and seeding."""

    mu: float
    trials: int
    seed: int
    params: SystemParams
    channel: ChannelSpec
    double_click_policy: DoubleClickPolicy = DoubleClickPolicy.DISCARD

    def __post_init__(self) -> None:
        if self.trials <= 0:
            raise ValueError(f"trials must be positive, got {self.trials}")
        # mu = 0 is allowed so the no-light limit can be simulated directly
        if self.mu < 0:
            raise ValueError(f"mean photon number must be >= 0, got {self.mu}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class TrialRecord:
    """Complete fate of one pulse slot."""

    bob_basis: str  # "Z" or "X"
    bob_bit: int  # 0 selects SRC1, 1 selects SRC2
    prepared: NamedState
    alice_bit: int
    n_photons: int
    n_surviving: int
    click_spcm1: bool
    click_spcm2: bool
    dark1: bool
    dark2: bool
    outcome: str  # "no_detection" | "decoded" | "double_click"
    decoded_bit: int | None


@dataclass(frozen=True)
class SimResult:
    """Aggregate counts and empirical statistics of a run."""

    sent: int
    detected: int
    errors: int
    double_clicks: int
    no_clicks: int
    empirical_qber: float
    qber_stderr: float
    empirical_p_all: float
    p_all_stderr: float
    raw_rate_per_second: float


# State index convention used throughout: index = 2*basis + source with
# basis 0 = Z (rectilinear), 1 = X (diagonal) and source 0 = SRC1, 1 = SRC2.


def _chain_tables(params: SystemParams):
    """Precompute the optical chain for all (state, encoder bit) pairs.

    Returns the probability that a signal photon is routed to SPCM1 after
    misalignment, whether SPCM1 is the bit-0 detector for each prepared
    state, and the prepared state names.
    """
    route_p1 = np.empty((4, 2), dtype=float)
    base_is_spcm1 = np.empty(4, dtype=bool)
    prepared: list[NamedState] = []
    e = params.e_detector
    for basis in (0, 1):
        cell = pockels_matrix(PockelsCell(BASIS_SWITCH_ANGLE, triggered=basis == 1))
        for source in (0, 1):
            idx = 2 * basis + source
            emitted = NamedState.H if source == 0 else NamedState.V
            prep = apply(cell, emitted.vector)
            prepared.append(classify(prep))
            for bit in (0, 1):
                returned = apply(flipper_matrix(bit == 1), prep)
                born_p1 = measurement_probs(apply(cell, returned))[0]
                route_p1[idx, bit] = born_p1 * (1.0 - e) + (1.0 - born_p1) * e
            # the detector that answers an unflipped pulse decodes bit 0
            born_unflipped = measurement_probs(apply(cell, prep))[0]
            base_is_spcm1[idx] = born_unflipped >= 0.5
    return route_p1, base_is_spcm1, prepared


def _draw_block(cfg: SimConfig, block: int, n: int, eta: float, route_p1: np.ndarray):
    """Draw all randomness for one block in the frozen order."""
    rng = np.random.Generator(np.random.Philox(key=[cfg.seed, block]))
    basis = rng.integers(0, 2, n)
    source = rng.integers(0, 2, n)
    n_photons = rng.poisson(cfg.mu, n)
    alice = rng.integers(0, 2, n)
    n_surviving = rng.binomial(n_photons, eta)
    state = 2 * basis + source
    n_to_1 = rng.binomial(n_surviving, route_p1[state, alice])
    dark1 = rng.random(n) < cfg.params.dark_prob
    dark2 = rng.random(n) < cfg.params.dark_prob
    tiebreak = rng.integers(0, 2, n)
    return state, n_photons, alice, n_surviving, n_to_1, dark1, dark2, tiebreak


def _resolve_block(cfg: SimConfig, arrays, base_is_spcm1: np.ndarray):
    """Turn raw draws into click patterns and decoded bits."""
    state, _, alice, n_surviving, n_to_1, dark1, dark2, tiebreak = arrays
    click1 = (n_to_1 > 0) | dark1
    click2 = ((n_surviving - n_to_1) > 0) | dark2
    double = click1 & click2
    single = click1 ^ click2
    bit = np.where(click1 == base_is_spcm1[state], 0, 1)
    if cfg.double_click_policy is DoubleClickPolicy.RANDOM_BIT:
        decoded_mask = single | double
        bit = np.where(double, tiebreak, bit)
    else:
        decoded_mask = single
    errors = decoded_mask & (bit != alice)
    return click1, click2, double, decoded_mask, bit, errors


def _block_counts(cfg: SimConfig, block: int, n: int, eta: float, route_p1, base_is_spcm1):
    arrays = _draw_block(cfg, block, n, eta, route_p1)
    click1, click2, double, decoded_mask, _, errors = _resolve_block(cfg, arrays, base_is_spcm1)
    no_click = n - int((click1 | click2).sum())
    return int(decoded_mask.sum()), int(errors.sum()), int(double.sum()), no_click


def _blocks(trials: int) -> list[tuple[int, int]]:
    return [
        (b, min(BLOCK_SIZE, trials - b * BLOCK_SIZE))
        for b in range((trials + BLOCK_SIZE - 1) // BLOCK_SIZE)
    ]


def run_trial(cfg: SimConfig, rng: np.random.Generator) -> TrialRecord:
    """Simulate a single pulse slot, drawing from ``rng``.

    The draw order matches the block engine, so a block of size one keyed the
    same way reproduces this function exactly.
    """
    route_p1, base_is_spcm1, prepared = _chain_tables(cfg.params)
    eta = eta_overall(cfg.params, cfg.channel)
    basis = int(rng.integers(0, 2))
    source = int(rng.integers(0, 2))
    n_photons = int(rng.poisson(cfg.mu))
    alice = int(rng.integers(0, 2))
    n_surviving = int(rng.binomial(n_photons, eta))
    state = 2 * basis + source
    n_to_1 = int(rng.binomial(n_surviving, route_p1[state, alice]))
    dark1 = bool(rng.random() < cfg.params.dark_prob)
    dark2 = bool(rng.random() < cfg.params.dark_prob)
    tiebreak = int(rng.integers(0, 2))

    click1 = n_to_1 > 0 or dark1
    click2 = (n_surviving - n_to_1) > 0 or dark2
    if click1 and click2:
        if cfg.double_click_policy is DoubleClickPolicy.RANDOM_BIT:
            outcome, decoded = "decoded", tiebreak
        else:
            outcome, decoded = "double_click", None
    elif click1 or click2:
        outcome = "decoded"
        decoded = 0 if click1 == bool(base_is_spcm1[state]) else 1
    else:
        outcome, decoded = "no_detection", None
    return TrialRecord(
        bob_basis="X" if basis else "Z",
        bob_bit=source,
        prepared=prepared[state],
        alice_bit=alice,
        n_photons=n_photons,
        n_surviving=n_surviving,
        click_spcm1=click1,
        click_spcm2=click2,
        dark1=dark1,
        dark2=dark2,
        outcome=outcome,
        decoded_bit=decoded,
    )


def iter_records(cfg: SimConfig) -> Iterator[TrialRecord]:
    """Yield per-trial records in trial order.

    Materialized from the block engine, so the records aggregate to exactly
    the counts ``run_simulation`` reports for the same configuration.
    """
    route_p1, base_is_spcm1, prepared = _chain_tables(cfg.params)
    eta = eta_overall(cfg.params, cfg.channel)
    for block, n in _blocks(cfg.trials):
        arrays = _draw_block(cfg, block, n, eta, route_p1)
        state, n_photons, alice, n_surviving, n_to_1, dark1, dark2, _ = arrays
        click1, click2, double, decoded_mask, bit, _ = _resolve_block(
            cfg, arrays, base_is_spcm1
        )
        for i in range(n):
            if decoded_mask[i]:
                outcome, decoded = "decoded", int(bit[i])
            elif double[i]:
                outcome, decoded = "double_click", None
            else:
                outcome, decoded = "no_detection", None
            yield TrialRecord(
                bob_basis="X" if state[i] >= 2 else "Z",
                bob_bit=int(state[i]) % 2,
                prepared=prepared[int(state[i])],
                alice_bit=int(alice[i]),
                n_photons=int(n_photons[i]),
                n_surviving=int(n_surviving[i]),
                click_spcm1=bool(click1[i]),
                click_spcm2=bool(click2[i]),
                dark1=bool(dark1[i]),
                dark2=bool(dark2[i]),
                outcome=outcome,
                decoded_bit=decoded,
            )


def _record_line(index: int, rec: TrialRecord) -> str:
    payload = {
        "trial": index,
        "bob_basis": rec.bob_basis,
        "bob_bit": rec.bob_bit,
        "prepared": rec.prepared.value,
        "alice_bit": rec.alice_bit,
        "n_photons": rec.n_photons,
        "n_surviving": rec.n_surviving,
        "click_spcm1": rec.click_spcm1,
        "click_spcm2": rec.click_spcm2,
        "dark1": rec.dark1,
        "dark2": rec.dark2,
        "outcome": rec.outcome,
        "decoded_bit": rec.decoded_bit,
    }
    return json.dumps(payload)


def run_simulation(
    cfg: SimConfig,
    workers: int = 1,
    record_stream: IO[str] | None = None,
    force_records: bool = False,
) -> SimResult:
    """Run ``cfg.trials`` pulse slots and aggregate the outcome counts.

    ``workers`` > 1 distributes blocks over processes; aggregation is
    commutative, so the result is bit-identical for any worker count.
    ``record_stream`` receives one JSON line per trial and forces sequential
    execution; dumps above ``RECORD_TRIAL_CAP`` trials are refused unless
    ``force_records`` is set.

    Raises ``ZeroDetectionError`` when not a single bit was decoded.
    """
    if record_stream is not None and cfg.trials > RECORD_TRIAL_CAP and not force_records:
        raise ValueError(
            f"refusing to dump {cfg.trials} per-trial records "
            f"(cap {RECORD_TRIAL_CAP}); pass force_records=True to override"
        )

    detected = errors = double_clicks = no_clicks = 0
    if record_stream is not None:
        index = 0
        for rec in iter_records(cfg):
            record_stream.write(_record_line(index, rec) + "\n")
            index += 1
            if rec.outcome == "decoded":
                detected += 1
                if rec.decoded_bit != rec.alice_bit:
                    errors += 1
            if rec.click_spcm1 and rec.click_spcm2:
                double_clicks += 1
            if not (rec.click_spcm1 or rec.click_spcm2):
                no_clicks += 1
    else:
        route_p1, base_is_spcm1, _ = _chain_tables(cfg.params)
        eta = eta_overall(cfg.params, cfg.channel)
        blocks = _blocks(cfg.trials)
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(_block_counts, cfg, b, n, eta, route_p1, base_is_spcm1)
                    for b, n in blocks
                ]
                for fut in as_completed(futures):
                    det, err, dbl, none = fut.result()
                    detected += det
                    errors += err
                    double_clicks += dbl
                    no_clicks += none
        else:
            for b, n in blocks:
                det, err, dbl, none = _block_counts(
                    cfg, b, n, eta, route_p1, base_is_spcm1
                )
                detected += det
                errors += err
                double_clicks += dbl
                no_clicks += none

    if detected == 0:
        raise ZeroDetectionError(
            f"no decoded bits in {cfg.trials} trials; QBER is undefined"
        )
    qber = errors / detected
    p_emp = (cfg.trials - no_clicks) / cfg.trials
    return SimResult(
        sent=cfg.trials,
        detected=detected,
        errors=errors,
        double_clicks=double_clicks,
        no_clicks=no_clicks,
        empirical_qber=qber,
        qber_stderr=math.sqrt(qber * (1.0 - qber) / detected),
        empirical_p_all=p_emp,
        p_all_stderr=math.sqrt(p_emp * (1.0 - p_emp) / cfg.trials),
        raw_rate_per_second=detected / cfg.trials * cfg.params.rep_rate_hz,
    )


def extract_raw_key(records: Iterable[TrialRecord]) -> tuple[str, str]:
    """Sifted keys from a record stream, one bit per decoded trial.

    No basis reconciliation is needed: the protocol is deterministic, so
    every decoded trial contributes.  Returns (receiver key, encoder key) as
    equal-length bit strings.
    """
    bob_bits: list[str] = []
    alice_bits: list[str] = []
    for rec in records:
        if rec.outcome == "decoded":
            bob_bits.append(str(rec.decoded_bit))
            alice_bits.append(str(rec.alice_bit))
    return "".join(bob_bits), "".join(alice_bits)
