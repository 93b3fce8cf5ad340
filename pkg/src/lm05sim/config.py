"""Flat key=value run configuration with named presets.

File syntax: one ``key = value`` pair per line, ``#`` starts a comment,
blank lines are ignored.  Unknown keys are rejected.  The documented keys:

hardware        l_A, l_B, eta_det, db, e_detector, f_casc, rep_rate, window_ns
operating point mu, l_C
scan grids      mu_min, mu_max, mu_step, lc_min, lc_max, lc_step
run control     trials, seed, out, workers, pns_exposure_variant,
                double_click_policy

``db`` is the dark-count probability per detector per detection window; the
model's total dark probability is 2*db.  ``--config`` accepts a preset name
(``reference_setup`` or ``reference_setup_lb3781``) or a path to a file whose
keys override the ``reference_setup`` baseline.
"""

from __future__ import annotations

import os

from .experiments import ExperimentConfig
from .link_budget import SystemParams
from .simulator import DoubleClickPolicy

_FLOAT_KEYS = {
    "l_A", "l_B", "eta_det", "db", "e_detector", "f_casc", "rep_rate",
    "window_ns", "mu", "l_C", "mu_min", "mu_max", "mu_step",
    "lc_min", "lc_max", "lc_step",
}
_INT_KEYS = {"trials", "seed", "workers"}
_STR_KEYS = {"out", "pns_exposure_variant", "double_click_policy"}

KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS

PRESETS: dict[str, dict] = {
    "reference_setup": {
        "l_A": 6.426,
        "l_B": 4.279,
        "eta_det": 0.55,
        "db": 4.276e-6,
        "e_detector": 0.033,
        "f_casc": 1.22,
        "rep_rate": 725000.0,
        "window_ns": 25.0,
        "mu": 0.15,
        "l_C": 1.14,
    },
    "reference_setup_lb3781": {
        "l_A": 6.426,
        "l_B": 3.781,
        "eta_det": 0.55,
        "db": 4.276e-6,
        "e_detector": 0.033,
        "f_casc": 1.22,
        "rep_rate": 725000.0,
        "window_ns": 25.0,
        "mu": 0.15,
        "l_C": 1.14,
    },
}

_DEFAULTS = {
    "mu_min": 0.01,
    "mu_max": 1.7,
    "mu_step": 0.01,
    "lc_min": 0.0,
    "lc_max": 8.0,
    "lc_step": 0.1,
    "trials": 0,
    "seed": 1,
    "out": None,
    "workers": 1,
    "pns_exposure_variant": "half_tail",
    "double_click_policy": "discard",
}


def parse_config_file(path: str) -> dict:
    """Read one key=value file, validating keys and value types."""
    settings: dict = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise OSError(f"cannot read config file {path!r}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            if key in _FLOAT_KEYS:
                settings[key] = float(value)
            elif key in _INT_KEYS:
                settings[key] = int(value)
            else:
                settings[key] = value
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return settings


def load_settings(source: str | None) -> dict:
    """Resolve a preset name or config file path into a full settings dict."""
    settings = dict(_DEFAULTS)
    settings.update(PRESETS["reference_setup"])
    if source is None:
        return settings
    if source in PRESETS:
        settings.update(PRESETS[source])
        return settings
    if not os.path.exists(source):
        raise ValueError(
            f"config {source!r} is neither a preset ({', '.join(sorted(PRESETS))}) "
            "nor an existing file"
        )
    settings.update(parse_config_file(source))
    return settings


def system_params(settings: dict) -> SystemParams:
    return SystemParams(
        l_a_db=settings["l_A"],
        l_b_db=settings["l_B"],
        eta_det=settings["eta_det"],
        dark_prob=settings["db"],
        e_detector=settings["e_detector"],
        f_casc=settings["f_casc"],
        rep_rate_hz=settings["rep_rate"],
        window_ns=settings["window_ns"],
    )


def experiment_config(settings: dict) -> ExperimentConfig:
    return ExperimentConfig(
        params=system_params(settings),
        mu=settings["mu"],
        l_c_db=settings["l_C"],
        mu_min=settings["mu_min"],
        mu_max=settings["mu_max"],
        mu_step=settings["mu_step"],
        lc_min=settings["lc_min"],
        lc_max=settings["lc_max"],
        lc_step=settings["lc_step"],
        trials=settings["trials"],
        seed=settings["seed"],
        out=settings["out"],
        pns_variant=settings["pns_exposure_variant"],
        double_click_policy=DoubleClickPolicy(settings["double_click_policy"]),
        workers=settings["workers"],
    )
