"""Scan harness for the reference experiments.

Sweeps the error rate against the mean photon number, the raw and secret
rates against channel loss, locates the maximum secure loss and the optimal
mean photon number, and writes scan results as CSV.  Points are independent
evaluations; output is always ordered by ascending x.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .link_budget import ChannelSpec, SystemParams
from .rate_model import (
    OperatingPoint,
    max_secure_loss_db,
    optimal_mu,
    predict_rates,
)
from .simulator import DoubleClickPolicy, SimConfig, ZeroDetectionError, run_simulation

CSV_COLUMNS = [
    "x",
    "x_unit",
    "p_all",
    "e_all",
    "empirical_qber",
    "qber_stderr",
    "beta",
    "r_raw_per_s",
    "r_pns_per_s",
    "secure",
]


@dataclass(frozen=True)
class RateCurvePoint:
    """One scan row; empirical fields are None for analytic-only points."""

    x: float
    x_unit: str  # "mu" or "dB"
    p_all: float
    e_all: float
    empirical_qber: float | None
    qber_stderr: float | None
    beta: float
    r_raw_per_s: float
    r_pns_per_s: float
    secure: bool


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a scan needs: hardware, fixed point, grids and run size.

    A grid whose minimum exceeds its maximum is empty rather than an error,
    so degenerate scans produce empty output.
    """

    params: SystemParams
    mu: float = 0.15
    l_c_db: float = 1.14
    mu_min: float = 0.01
    mu_max: float = 1.7
    mu_step: float = 0.01
    lc_min: float = 0.0
    lc_max: float = 8.0
    lc_step: float = 0.1
    trials: int = 0
    seed: int = 1
    out: str | None = None
    pns_variant: str = "half_tail"
    double_click_policy: DoubleClickPolicy = DoubleClickPolicy.DISCARD
    workers: int = 1

    def __post_init__(self) -> None:
        if self.mu_step <= 0 or self.lc_step <= 0:
            raise ValueError("scan steps must be positive")
        if self.trials < 0:
            raise ValueError(f"trials must be >= 0, got {self.trials}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class MaxLossReport:
    """Result of the secure-loss search."""

    mu: float
    crossing_db: float
    r_pns_per_s_at_crossing: float
    e_all_at_crossing: float


def _grid(lo: float, hi: float, step: float) -> list[float]:
    if hi < lo:
        return []
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(n)]


def _evaluate(cfg: ExperimentConfig, index: int, x: float, x_unit: str,
              mu: float, channel: ChannelSpec) -> RateCurvePoint:
    pred = predict_rates(OperatingPoint(mu, cfg.params, channel, cfg.pns_variant))
    empirical_qber = qber_stderr = None
    if cfg.trials > 0:
        sim = SimConfig(
            mu=mu,
            trials=cfg.trials,
            seed=cfg.seed + index,  # stable per-point stream, any eval order
            params=cfg.params,
            channel=channel,
            double_click_policy=cfg.double_click_policy,
        )
        try:
            res = run_simulation(sim, workers=cfg.workers)
        except ZeroDetectionError:
            pass  # reported as absent, not fatal
        else:
            empirical_qber = res.empirical_qber
            qber_stderr = res.qber_stderr
    return RateCurvePoint(
        x=x,
        x_unit=x_unit,
        p_all=pred.p_all,
        e_all=pred.e_all,
        empirical_qber=empirical_qber,
        qber_stderr=qber_stderr,
        beta=pred.beta,
        r_raw_per_s=pred.p_all * cfg.params.rep_rate_hz,
        r_pns_per_s=pred.r_per_second,
        secure=pred.secure,
    )


def scan_mu(cfg: ExperimentConfig) -> list[RateCurvePoint]:
    """Error rate and rates across the mean-photon-number grid at fixed loss."""
    channel = ChannelSpec(cfg.l_c_db)
    return [
        _evaluate(cfg, i, mu, "mu", mu, channel)
        for i, mu in enumerate(_grid(cfg.mu_min, cfg.mu_max, cfg.mu_step))
    ]


def scan_loss(cfg: ExperimentConfig) -> list[RateCurvePoint]:
    """Rates across the channel-loss grid at fixed mean photon number."""
    return [
        _evaluate(cfg, i, l_c, "dB", cfg.mu, ChannelSpec(l_c))
        for i, l_c in enumerate(_grid(cfg.lc_min, cfg.lc_max, cfg.lc_step))
    ]


def report_max_secure_loss(
    cfg: ExperimentConfig, lo_db: float = 0.0, hi_db: float = 20.0
) -> MaxLossReport:
    """Locate the largest secure channel loss for the configured mu."""
    crossing = max_secure_loss_db(
        cfg.params, cfg.mu, lo_db, hi_db, pns_variant=cfg.pns_variant
    )
    pred = predict_rates(
        OperatingPoint(cfg.mu, cfg.params, ChannelSpec(crossing), cfg.pns_variant)
    )
    return MaxLossReport(
        mu=cfg.mu,
        crossing_db=crossing,
        r_pns_per_s_at_crossing=pred.r_per_second,
        e_all_at_crossing=pred.e_all,
    )


def report_optimal_mu(cfg: ExperimentConfig) -> tuple[float, float]:
    """Best mean photon number and its per-pulse rate on the configured channel."""
    return optimal_mu(cfg.params, ChannelSpec(cfg.l_c_db), pns_variant=cfg.pns_variant)


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return format(float(value), ".9g")


def point_as_row(point: RateCurvePoint) -> list[str]:
    return [
        _format_cell(point.x),
        point.x_unit,
        _format_cell(point.p_all),
        _format_cell(point.e_all),
        _format_cell(point.empirical_qber),
        _format_cell(point.qber_stderr),
        _format_cell(point.beta),
        _format_cell(point.r_raw_per_s),
        _format_cell(point.r_pns_per_s),
        _format_cell(point.secure),
    ]


def emit_csv(points: list[RateCurvePoint], path: str) -> None:
    """Write scan points to ``path``, one row per point, 9 significant digits."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for point in points:
                writer.writerow(point_as_row(point))
    except OSError as exc:
        raise OSError(f"cannot write scan output to {path!r}: {exc}") from exc


def load_csv(path: str) -> list[RateCurvePoint]:
    """Parse a file produced by ``emit_csv`` back into points."""
    points: list[RateCurvePoint] = []
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != CSV_COLUMNS:
                raise ValueError(f"unexpected CSV header in {path!r}: {reader.fieldnames}")
            for row in reader:
                points.append(
                    RateCurvePoint(
                        x=float(row["x"]),
                        x_unit=row["x_unit"],
                        p_all=float(row["p_all"]),
                        e_all=float(row["e_all"]),
                        empirical_qber=(
                            float(row["empirical_qber"]) if row["empirical_qber"] else None
                        ),
                        qber_stderr=(
                            float(row["qber_stderr"]) if row["qber_stderr"] else None
                        ),
                        beta=float(row["beta"]),
                        r_raw_per_s=float(row["r_raw_per_s"]),
                        r_pns_per_s=float(row["r_pns_per_s"]),
                        secure=row["secure"] == "true",
                    )
                )
    except OSError as exc:
        raise OSError(f"cannot read scan output from {path!r}: {exc}") from exc
    return points
