"""Command-line harness for the scans and the Monte Carlo runs.

Subcommands mirror the reference experiments: ``scan-mu`` (QBER against mean
photon number), ``scan-loss`` (rates against channel loss), ``max-loss``
(largest secure loss), ``optimal-mu`` and ``simulate``.  Scan output goes to
CSV; ``--plot`` renders a figure next to it; ``--json`` switches the stdout
summary to a single JSON document.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import config as config_mod
from .experiments import (
    CSV_COLUMNS,
    ExperimentConfig,
    RateCurvePoint,
    emit_csv,
    report_max_secure_loss,
    report_optimal_mu,
    scan_loss,
    scan_mu,
)
from .link_budget import ChannelSpec
from .rate_model import BracketError
from .simulator import (
    DoubleClickPolicy,
    SimConfig,
    ZeroDetectionError,
    run_simulation,
)

_SIMULATE_DEFAULT_TRIALS = 1_000_000


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lm05sim",
        description="Two-way free-space QKD: analytic rates and Monte Carlo runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def shared(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", metavar="PATH|PRESET",
                        help="preset name or key=value config file")
        sp.add_argument("--seed", type=int, help="base random seed")
        sp.add_argument("--trials", type=int,
                        help="Monte Carlo trials per point (0 = analytic only)")
        sp.add_argument("--out", metavar="PATH", help="CSV output path")
        sp.add_argument("--workers", type=int, help="worker processes")
        sp.add_argument("--json", action="store_true",
                        help="print a JSON summary instead of text")

    sp = sub.add_parser("scan-mu", help="QBER and rates across a mu grid")
    shared(sp)
    sp.add_argument("--mu-min", type=float)
    sp.add_argument("--mu-max", type=float)
    sp.add_argument("--mu-step", type=float)
    sp.add_argument("--lc", type=float, help="fixed one-way channel loss [dB]")
    sp.add_argument("--plot", action="store_true",
                    help="render a PNG figure next to the CSV")

    sp = sub.add_parser("scan-loss", help="rates across a channel-loss grid")
    shared(sp)
    sp.add_argument("--lc-min", type=float)
    sp.add_argument("--lc-max", type=float)
    sp.add_argument("--lc-step", type=float)
    sp.add_argument("--mu", type=float, help="fixed mean photon number")
    sp.add_argument("--plot", action="store_true",
                    help="render a PNG figure next to the CSV")

    sp = sub.add_parser("max-loss", help="largest channel loss with a secret key")
    shared(sp)
    sp.add_argument("--mu", type=float, help="fixed mean photon number")
    sp.add_argument("--lo-db", type=float, default=0.0,
                    help="secure end of the search bracket [dB]")
    sp.add_argument("--hi-db", type=float, default=20.0,
                    help="insecure end of the search bracket [dB]")

    sp = sub.add_parser("optimal-mu", help="mean photon number maximizing the rate")
    shared(sp)
    sp.add_argument("--lc", type=float, help="one-way channel loss [dB]")

    sp = sub.add_parser("simulate", help="one Monte Carlo run at a fixed point")
    shared(sp)
    sp.add_argument("--mu", type=float, help="mean photon number")
    sp.add_argument("--lc", type=float, help="one-way channel loss [dB]")
    sp.add_argument("--records", metavar="PATH",
                    help="dump per-trial records as JSON lines")
    sp.add_argument("--force-records", action="store_true",
                    help="allow record dumps above the trial cap")
    sp.add_argument("--double-click-policy",
                    choices=[p.value for p in DoubleClickPolicy])
    return parser


def _resolve(args: argparse.Namespace) -> ExperimentConfig:
    settings = config_mod.load_settings(args.config)
    overrides = {
        "seed": args.seed,
        "trials": args.trials,
        "out": args.out,
        "workers": args.workers,
        "mu": getattr(args, "mu", None),
        "l_C": getattr(args, "lc", None),
        "mu_min": getattr(args, "mu_min", None),
        "mu_max": getattr(args, "mu_max", None),
        "mu_step": getattr(args, "mu_step", None),
        "lc_min": getattr(args, "lc_min", None),
        "lc_max": getattr(args, "lc_max", None),
        "lc_step": getattr(args, "lc_step", None),
        "double_click_policy": getattr(args, "double_click_policy", None),
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    return config_mod.experiment_config(settings)


def _announce_dark_convention(cfg: ExperimentConfig) -> None:
    # db is stored per detector; the model's total dark probability doubles it
    print(
        f"dark-count convention: db = {cfg.params.dark_prob:g} per detector per "
        f"{cfg.params.window_ns:g} ns window; total P_Dark = 2*db = "
        f"{2 * cfg.params.dark_prob:g}",
        file=sys.stderr,
    )


def _point_dict(point: RateCurvePoint) -> dict:
    return {
        "x": point.x,
        "x_unit": point.x_unit,
        "p_all": point.p_all,
        "e_all": point.e_all,
        "empirical_qber": point.empirical_qber,
        "qber_stderr": point.qber_stderr,
        "beta": point.beta,
        "r_raw_per_s": point.r_raw_per_s,
        "r_pns_per_s": point.r_pns_per_s,
        "secure": point.secure,
    }


def _finish_scan(command: str, cfg: ExperimentConfig, points: list[RateCurvePoint],
                 args: argparse.Namespace) -> None:
    plot_path = None
    if cfg.out:
        emit_csv(points, cfg.out)
    if getattr(args, "plot", False):
        if not cfg.out:
            raise ValueError("--plot needs --out to know where to place the figure")
        from . import plotting  # deferred; pulls in matplotlib

        figure = str(Path(cfg.out).with_suffix(".png"))
        if command == "scan-mu":
            plot_path = plotting.plot_mu_scan(points, figure, cfg.params.e_detector)
        else:
            plot_path = plotting.plot_loss_scan(points, figure)
    if args.json:
        doc = {
            "command": command,
            "points": [_point_dict(p) for p in points],
            "out": cfg.out,
            "plot": plot_path,
        }
        print(json.dumps(doc, indent=2))
        return
    print(f"{command}: {len(points)} points")
    if points:
        if command == "scan-mu":
            lo = min(p.e_all for p in points)
            hi = max(p.e_all for p in points)
            print(f"  model QBER range: {100 * lo:.3f}% .. {100 * hi:.3f}%")
        else:
            secure = [p.x for p in points if p.secure]
            if secure:
                print(f"  last secure grid point: {max(secure):g} dB")
            else:
                print("  no secure point on the grid")
    if cfg.out:
        print(f"  csv: {cfg.out}")
    if plot_path:
        print(f"  figure: {plot_path}")


def _run_scan_mu(args: argparse.Namespace) -> None:
    cfg = _resolve(args)
    _announce_dark_convention(cfg)
    _finish_scan("scan-mu", cfg, scan_mu(cfg), args)


def _run_scan_loss(args: argparse.Namespace) -> None:
    cfg = _resolve(args)
    _announce_dark_convention(cfg)
    _finish_scan("scan-loss", cfg, scan_loss(cfg), args)


def _run_max_loss(args: argparse.Namespace) -> None:
    cfg = _resolve(args)
    _announce_dark_convention(cfg)
    report = report_max_secure_loss(cfg, args.lo_db, args.hi_db)
    if args.json:
        print(json.dumps({
            "command": "max-loss",
            "mu": report.mu,
            "lo_db": args.lo_db,
            "hi_db": args.hi_db,
            "crossing_db": report.crossing_db,
            "r_pns_per_s_at_crossing": report.r_pns_per_s_at_crossing,
            "e_all_at_crossing": report.e_all_at_crossing,
        }, indent=2))
        return
    print(f"max-loss: mu = {report.mu:g}")
    print(f"  last secure one-way loss: {report.crossing_db:.2f} dB "
          f"(resolution 0.01 dB)")
    print(f"  secret rate at that point: {report.r_pns_per_s_at_crossing:.4g} bit/s")
    print(f"  model QBER there: {100 * report.e_all_at_crossing:.3f}%")


def _run_optimal_mu(args: argparse.Namespace) -> None:
    cfg = _resolve(args)
    _announce_dark_convention(cfg)
    mu_star, rate = report_optimal_mu(cfg)
    if args.json:
        print(json.dumps({
            "command": "optimal-mu",
            "l_c_db": cfg.l_c_db,
            "optimal_mu": mu_star,
            "r_pns_per_pulse": rate,
            "r_pns_per_s": rate * cfg.params.rep_rate_hz,
        }, indent=2))
        return
    if rate <= 0:
        print(f"optimal-mu: no secure mu at {cfg.l_c_db:g} dB")
        return
    print(f"optimal-mu: l_C = {cfg.l_c_db:g} dB")
    print(f"  best mu: {mu_star:.4f}")
    print(f"  secret rate: {rate:.6g} bit/pulse = "
          f"{rate * cfg.params.rep_rate_hz:.4g} bit/s")


def _run_simulate(args: argparse.Namespace) -> None:
    cfg = _resolve(args)
    _announce_dark_convention(cfg)
    trials = cfg.trials if cfg.trials > 0 else _SIMULATE_DEFAULT_TRIALS
    sim = SimConfig(
        mu=cfg.mu,
        trials=trials,
        seed=cfg.seed,
        params=cfg.params,
        channel=ChannelSpec(cfg.l_c_db),
        double_click_policy=cfg.double_click_policy,
    )
    if args.records:
        with open(args.records, "w") as fh:
            result = run_simulation(sim, record_stream=fh,
                                    force_records=args.force_records)
    else:
        result = run_simulation(sim, workers=cfg.workers)
    if args.json:
        print(json.dumps({
            "command": "simulate",
            "mu": cfg.mu,
            "l_c_db": cfg.l_c_db,
            "seed": cfg.seed,
            "sent": result.sent,
            "detected": result.detected,
            "errors": result.errors,
            "double_clicks": result.double_clicks,
            "no_clicks": result.no_clicks,
            "empirical_qber": result.empirical_qber,
            "qber_stderr": result.qber_stderr,
            "empirical_p_all": result.empirical_p_all,
            "p_all_stderr": result.p_all_stderr,
            "raw_rate_per_second": result.raw_rate_per_second,
        }, indent=2))
        return
    print(f"simulate: mu = {cfg.mu:g}, l_C = {cfg.l_c_db:g} dB, "
          f"{result.sent} trials, seed {cfg.seed}")
    print(f"  detected {result.detected} (p_all = {result.empirical_p_all:.4g} "
          f"+- {result.p_all_stderr:.2g})")
    print(f"  QBER = {100 * result.empirical_qber:.3f}% "
          f"+- {100 * result.qber_stderr:.3f}%")
    print(f"  double clicks: {result.double_clicks}, "
          f"raw rate {result.raw_rate_per_second:.4g} bit/s")
    if args.records:
        print(f"  records: {args.records}")


_RUNNERS = {
    "scan-mu": _run_scan_mu,
    "scan-loss": _run_scan_loss,
    "max-loss": _run_max_loss,
    "optimal-mu": _run_optimal_mu,
    "simulate": _run_simulate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _RUNNERS[args.command](args)
    except (ValueError, OSError, BracketError, ZeroDetectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
