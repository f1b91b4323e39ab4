"""Command-line interface: ``trawlex {simulate,fit,acf,taildep,extremal-index}``.

Every option can also be given in a JSON file passed with ``--config`` (keys
use underscores); explicit flags take precedence.  Outputs embed the fully
resolved configuration.  Failures exit non-zero with an error JSON object on
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .extremes import cond_tail_dep_curve, empirical_chi, extremal_index_curve
from .inference import PLConfig, fit
from .io import dump_json, ingest_csv, to_exceedances, write_series_csv, write_table_csv
from .model import ModelParams, acov_exceedance, mean_exceedance, simulate_exceedances

DEFAULTS = {
    "common": {"time_column": "time", "value_column": "value", "out": None, "plot": None},
    "simulate": {"variant": "original", "length": 1_000_000, "seed": None},
    "fit": {"variant": "original", "delta": 4, "input": None, "threshold": None, "percentile": None},
    "acf": {"max_lag": 10, "input": None, "threshold": None, "percentile": None, "variant": "original"},
    "taildep": {
        "lags": [1, 2, 5],
        "u_grid": [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 0.995, 0.999],
        "input": None,
        "threshold": None,
        "percentile": None,
        "variant": "original",
    },
    "extremal-index": {
        "input": None,
        "run_length": 3,
        "percentiles": [0.9, 0.925, 0.95, 0.96, 0.97, 0.98, 0.99, 0.995],
        "length": 1_000_000,
        "seed": None,
        "variant": "original",
    },
}

PARAM_KEYS = ("alpha", "beta", "xi", "sigma", "rho", "kappa", "params")


class CLIError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("UsageError", message, code=2)


def _fail(kind, message, code=1):
    sys.stderr.write(json.dumps({"error": kind, "message": str(message)}) + "\n")
    sys.exit(code)


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _add_common(p):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON file with option values")
    p.add_argument("--out", default=S, help="output path (CSV or JSON)")
    p.add_argument("--plot", default=S, help="optional SVG plot path")
    p.add_argument("--time-column", dest="time_column", default=S)
    p.add_argument("--value-column", dest="value_column", default=S)


def _add_data(p):
    S = argparse.SUPPRESS
    p.add_argument("--input", default=S, help="CSV file with time and value columns")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--threshold", type=float, default=S)
    g.add_argument("--percentile", type=float, default=S)


def _add_model(p):
    S = argparse.SUPPRESS
    p.add_argument("--variant", choices=["original", "mt"], default=S)
    p.add_argument("--params", default=S, help="fit JSON whose estimates define the model")
    for name in ("alpha", "beta", "xi", "sigma", "rho", "kappa"):
        p.add_argument(f"--{name}", type=float, default=S)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="trawlex", description="Latent trawl models for threshold exceedances")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="simulate an exceedance series")
    _add_common(p)
    _add_model(p)
    p.add_argument("--length", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)

    p = sub.add_parser("fit", help="maximum pairwise likelihood fit")
    _add_common(p)
    _add_data(p)
    p.add_argument("--variant", choices=["original", "mt"], default=S)
    p.add_argument("--delta", type=int, default=S)

    p = sub.add_parser("acf", help="model and/or empirical autocovariance")
    _add_common(p)
    _add_data(p)
    _add_model(p)
    p.add_argument("--max-lag", dest="max_lag", type=int, default=S)

    p = sub.add_parser("taildep", help="conditional tail dependence curves")
    _add_common(p)
    _add_data(p)
    _add_model(p)
    p.add_argument("--lags", type=_floats, default=S)
    p.add_argument("--u-grid", dest="u_grid", type=_floats, default=S)

    p = sub.add_parser("extremal-index", help="runs extremal index against threshold")
    _add_common(p)
    _add_model(p)
    p.add_argument("--input", default=S)
    p.add_argument("--run-length", dest="run_length", type=int, default=S)
    p.add_argument("--percentiles", type=_floats, default=S)
    p.add_argument("--length", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    given = vars(args).copy()
    command = given.pop("command")
    cfg = {"command": command, **DEFAULTS["common"], **DEFAULTS[command]}
    if "config" in given:
        path = given.pop("config")
        try:
            from_file = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CLIError(f"cannot read config {path}: {exc}") from None
        cfg.update({k.replace("-", "_"): v for k, v in from_file.items() if k != "command"})
    cfg.update(given)
    if cfg.get("threshold") is not None and cfg.get("percentile") is not None:
        raise CLIError("give either threshold or percentile, not both")
    if cfg.get("percentile") is not None and not 0 < cfg["percentile"] < 1:
        raise CLIError("percentile must lie in (0, 1)")
    if "length" in cfg and cfg["length"] is not None and cfg["length"] < 2:
        raise CLIError("length must be at least 2")
    return cfg


def _model(cfg) -> ModelParams:
    if cfg.get("params"):
        data = json.loads(Path(cfg["params"]).read_text())
        est = dict(data.get("estimates", data))
        variant = data.get("variant", est.get("variant", cfg.get("variant", "original")))
        return ModelParams.from_vector(
            variant, [est[n] for n in (("alpha", "beta") if variant == "original" else ("xi", "sigma"))] + [est["rho"], est["kappa"]]
        )
    variant = cfg.get("variant", "original")
    names = ("alpha", "beta", "rho", "kappa") if variant == "original" else ("xi", "sigma", "rho", "kappa")
    missing = [n for n in names if cfg.get(n) is None]
    if missing:
        raise CLIError(f"model parameters missing: {', '.join(missing)}")
    return ModelParams.from_vector(variant, [cfg[n] for n in names])


def _has_model(cfg) -> bool:
    return bool(cfg.get("params")) or any(cfg.get(n) is not None for n in ("alpha", "xi", "rho", "kappa"))


def _exceedances(cfg):
    raw = ingest_csv(cfg["input"], cfg["time_column"], cfg["value_column"])
    if cfg.get("threshold") is None and cfg.get("percentile") is None:
        raise CLIError("give --threshold or --percentile")
    return raw, to_exceedances(raw, cfg.get("threshold"), cfg.get("percentile"))


def _require_out(cfg):
    if not cfg.get("out"):
        raise CLIError("--out is required")
    return cfg["out"]


def _plot(path, series: dict, xlabel, ylabel, title):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "trawlex"
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (x, y) in series.items():
        ax.plot(x, y, label=label, marker="." if len(x) < 50 else None)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# --- subcommands ------------------------------------------------------------------------


def cmd_simulate(cfg):
    out = _require_out(cfg)
    if cfg.get("seed") is None:
        raise CLIError("--seed is required for simulate")
    params = _model(cfg)
    cfg["model"] = params.as_dict()
    series = simulate_exceedances(params, np.arange(cfg["length"], dtype=float), cfg["seed"])
    write_series_csv(out, series, cfg)
    if cfg.get("plot"):
        _plot(cfg["plot"], {"exceedances": (series.times, series.values)}, "time", "exceedance", "Simulated exceedances")


def cmd_fit(cfg):
    out = _require_out(cfg)
    if not cfg.get("input"):
        raise CLIError("--input is required for fit")
    _, series = _exceedances(cfg)
    cfg["threshold_value"] = series.threshold
    res = fit(series, cfg["variant"], PLConfig(delta=cfg["delta"]))
    doc = res.to_dict()
    doc["threshold"] = series.threshold
    doc["data"] = series.metadata
    doc["config"] = cfg
    dump_json(doc, out)


def cmd_acf(cfg):
    out = _require_out(cfg)
    lags = np.arange(1, cfg["max_lag"] + 1, dtype=float)
    cols = {"lag": lags}
    if cfg.get("input"):
        _, series = _exceedances(cfg)
        x = series.values
        xc = x - x.mean()
        cols["empirical_acov"] = np.array([np.dot(xc[: -int(h)], xc[int(h) :]) / len(x) for h in lags])
    if _has_model(cfg):
        params = _model(cfg)
        cfg["model"] = params.as_dict()
        cols["model_acov"] = acov_exceedance(params, lags)
    if len(cols) == 1:
        raise CLIError("acf needs --input and/or model parameters")
    write_table_csv(out, cols, cfg)
    if cfg.get("plot"):
        _plot(cfg["plot"], {k: (lags, v) for k, v in cols.items() if k != "lag"}, "lag", "autocovariance", "Exceedance autocovariance")


def cmd_taildep(cfg):
    out = _require_out(cfg)
    u = np.asarray(cfg["u_grid"], dtype=float)
    cols = {"u": u}
    curves = {}
    if _has_model(cfg):
        params = _model(cfg)
        cfg["model"] = params.as_dict()
        for h in cfg["lags"]:
            cols[f"phi_lag{h:g}"] = cond_tail_dep_curve(params, h, u).values
            curves[f"model lag {h:g}"] = (u, cols[f"phi_lag{h:g}"])
    if cfg.get("input"):
        _, series = _exceedances(cfg)
        for h in cfg["lags"]:
            c = empirical_chi(series.values, u, int(h), conditional=True)
            cols[f"empirical_phi_lag{h:g}"] = c.chi
            cols[f"empirical_se_lag{h:g}"] = c.se
            curves[f"data lag {h:g}"] = (u, c.chi)
    if len(cols) == 1:
        raise CLIError("taildep needs model parameters and/or --input")
    write_table_csv(out, cols, cfg)
    if cfg.get("plot"):
        _plot(cfg["plot"], curves, "u", "phi(h,u,u)", "Conditional tail dependence")


def cmd_extremal_index(cfg):
    out = _require_out(cfg)
    probs = np.asarray(cfg["percentiles"], dtype=float)
    cols = {"percentile": probs}
    curves = {}
    if cfg.get("input"):
        raw = ingest_csv(cfg["input"], cfg["time_column"], cfg["value_column"])
        y = raw.values[~raw.missing]
        thr = np.quantile(y, probs, method="linear")
        cols["data_threshold"] = thr
        cols["data_theta"] = extremal_index_curve(raw.values, thr, cfg["run_length"])
        curves["data"] = (probs, cols["data_theta"])
    if _has_model(cfg):
        if cfg.get("seed") is None:
            raise CLIError("--seed is required to simulate the fitted model")
        params = _model(cfg)
        cfg["model"] = params.as_dict()
        sim = simulate_exceedances(params, np.arange(cfg["length"], dtype=float), cfg["seed"]).values
        thr = np.quantile(sim, probs, method="linear")
        cols["model_threshold"] = thr
        cols["model_theta"] = extremal_index_curve(sim, thr, cfg["run_length"])
        curves["model"] = (probs, cols["model_theta"])
    if len(cols) == 1:
        raise CLIError("extremal-index needs --input and/or model parameters")
    write_table_csv(out, cols, cfg)
    if cfg.get("plot"):
        _plot(cfg["plot"], curves, "threshold percentile", "extremal index", "Runs extremal index")


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "acf": cmd_acf,
    "taildep": cmd_taildep,
    "extremal-index": cmd_extremal_index,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        COMMANDS[cfg["command"]](cfg)
    except CLIError as exc:
        _fail("ConfigError", exc)
    except (OSError, ValueError, ArithmeticError, KeyError, RuntimeError) as exc:
        _fail(type(exc).__name__, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
