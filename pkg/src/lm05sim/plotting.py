"""Render scan results to figure files next to the CSV report."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiments import RateCurvePoint


def plot_mu_scan(points: list[RateCurvePoint], path: str,
                 e_detector: float | None = None) -> str:
    """QBER against mean photon number, with Monte Carlo error bars if present."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    xs = [p.x for p in points]
    ax.plot(xs, [100.0 * p.e_all for p in points], color="tab:blue", label="model")
    emp = [(p.x, p.empirical_qber, p.qber_stderr) for p in points
           if p.empirical_qber is not None]
    if emp:
        ax.errorbar(
            [x for x, _, _ in emp],
            [100.0 * q for _, q, _ in emp],
            yerr=[100.0 * (se or 0.0) for _, _, se in emp],
            fmt="o", markersize=3, color="tab:red", label="Monte Carlo",
        )
    if e_detector is not None:
        ax.axhline(100.0 * e_detector, color="gray", linestyle=":",
                   label="detector error floor")
    ax.set_xlabel("mean photon number")
    ax.set_ylabel("QBER [%]")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_loss_scan(points: list[RateCurvePoint], path: str) -> str:
    """Raw and secret key rates against one-way channel loss, log rate axis."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    xs = [p.x for p in points]
    ax.semilogy(xs, [p.r_raw_per_s for p in points], color="tab:blue",
                label="raw key rate")
    secure = [(p.x, p.r_pns_per_s) for p in points if p.r_pns_per_s > 0]
    if secure:
        ax.semilogy([x for x, _ in secure], [r for _, r in secure],
                    color="tab:green", label="secret key rate")
        ax.axvline(max(x for x, _ in secure), color="gray", linestyle=":",
                   label="last secure point")
    ax.set_xlabel("one-way channel loss [dB]")
    ax.set_ylabel("rate [bit/s]")
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
