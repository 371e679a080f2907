"""Command-line pipeline: plus/minus tables, model fits, synthetic data.

Three subcommands share one configuration story: every value can come
from a flag or from a flat key=value config file, with flags winning,
and every run writes the resolved configuration next to its outputs so
it can be replayed byte for byte with --config.

Exit codes: 0 success, 1 usage error, 2 data validation error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .bayes import BayesianRating, write_chain_csv
from .dataset import (
    binarize_for_logistic,
    build_dataset,
    filter_min_matches,
    load_matches,
    load_rating_prior,
    plus_minus,
    train_test_split,
    write_matches_csv,
)
from .errors import (
    DataValidationError,
    MissingPrior,
    NumericalError,
    RatingError,
    TooFewPoints,
    ZeroVariance,
)
from .evaluate import (
    build_report,
    pearson_test,
    plus_minus_scatter,
    win_rate_scatter,
    write_plus_minus_csv,
    write_ratings_csv,
    write_scatter_csv,
    write_test_report_csv,
)
from .linear import ElasticNetRating, OLSRating
from .logistic import LogisticRating
from .seeding import substream
from .selection import CvGrid, cross_validate, write_cv_csv
from .synthetic import SynthConfig, generate, write_truth_csv

LINEAR_MODELS = ("ols", "ridge", "enet")
LOGISTIC_MODELS = ("logit", "logit-ridge", "logit-enet")
BAYES_MODELS = ("bayes", "bayes-hier")
MODELS = LINEAR_MODELS + LOGISTIC_MODELS + BAYES_MODELS


class UsageError(Exception):
    """Bad flags or config values; maps to exit code 1."""


def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


# key -> (parser, formatter); "none" round-trips optional values.
_CONFIG_SCHEMA = {
    "command": (str, str),
    "matches": (str, str),
    "rosters": (str, str),
    "ratings": (str, str),
    "out": (str, str),
    "model": (str, str),
    "seed": (int, str),
    "min_matches": (int, str),
    "train_fraction": (float, repr),
    "alpha": (float, repr),
    "lambda": (float, repr),
    "cv": (_parse_bool, lambda v: "true" if v else "false"),
    "folds": (int, str),
    "sigma2": (float, repr),
    "tau2": (float, repr),
    "chains": (int, str),
    "warmup": (int, str),
    "samples": (int, str),
    "dump_chains": (_parse_bool, lambda v: "true" if v else "false"),
    "n_players": (int, str),
    "n_matches": (int, str),
    "strength_sd": (float, repr),
    "noise_sd": (float, repr),
    "allow_draws": (_parse_bool, lambda v: "true" if v else "false"),
}


def load_config_file(path) -> dict:
    """Parse a flat key=value file; blank lines and # comments skipped."""
    values = {}
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path} line {lineno}: expected key=value")
        key, _, text = line.partition("=")
        key = key.strip()
        text = text.strip()
        if key not in _CONFIG_SCHEMA:
            raise UsageError(f"{path} line {lineno}: unknown key {key!r}")
        if text.lower() == "none" or text == "":
            values[key] = None
            continue
        parse = _CONFIG_SCHEMA[key][0]
        try:
            values[key] = parse(text)
        except ValueError as exc:
            raise UsageError(f"{path} line {lineno}: {exc}")
    return values


def write_config_file(path, values: dict):
    with open(path, "w", encoding="utf-8") as handle:
        for key in sorted(values):
            value = values[key]
            if value is None:
                text = "none"
            else:
                text = _CONFIG_SCHEMA[key][1](value)
            handle.write(f"{key}={text}\n")


_PM_DEFAULTS = {
    "matches": None,
    "rosters": None,
    "out": None,
    "min_matches": 50,
    "seed": 0,
}

_FIT_DEFAULTS = {
    "model": None,
    "matches": None,
    "rosters": None,
    "ratings": None,
    "out": None,
    "seed": 0,
    "min_matches": 50,
    "train_fraction": 0.8,
    "alpha": None,
    "lambda": None,
    "cv": False,
    "folds": 10,
    "sigma2": None,
    "tau2": 1.0,
    "chains": 4,
    "warmup": 1000,
    "samples": 2000,
    "dump_chains": False,
}

_SYNTH_DEFAULTS = {
    "out": None,
    "seed": 0,
    "n_players": 50,
    "n_matches": 2000,
    "strength_sd": 0.5,
    "noise_sd": 4.0,
    "allow_draws": True,
}


def _resolve(args, defaults: dict, command: str) -> dict:
    """Merge defaults, config file, and explicit flags (flags win)."""
    from_file = {}
    if getattr(args, "config", None):
        from_file = load_config_file(args.config)
        recorded = from_file.pop("command", None)
        if recorded is not None and recorded != command:
            raise UsageError(
                f"config file was written by {recorded!r}, not {command!r}"
            )
        unknown = set(from_file) - set(defaults)
        if unknown:
            raise UsageError(
                f"config keys {sorted(unknown)} do not apply to {command!r}"
            )
    resolved = dict(defaults)
    # "none" in a file marks a value as unset, so the default stands
    resolved.update({k: v for k, v in from_file.items() if v is not None})
    for key in defaults:
        flag_value = getattr(args, key.replace("lambda", "lam"), None)
        if flag_value is not None:
            resolved[key] = flag_value
    return resolved


def _require(cfg, command, *keys):
    for key in keys:
        if cfg[key] is None:
            flag = "--" + key.replace("_", "-")
            raise UsageError(f"{command}: {flag} is required")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; usage errors here are exit 1."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="apmrate",
        description="Adjusted plus/minus player ratings from match results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key=value file merged under flags")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="top-level random seed")

    pm = sub.add_parser("pm", parents=[], description="Plus/minus table only.")
    add_common(pm)
    pm.add_argument("--matches", help="CSV of map_id,score1,score2")
    pm.add_argument("--rosters", help="CSV of map_id,player_id,side")
    pm.add_argument("--min-matches", type=int, dest="min_matches",
                    help="drop players with fewer appearances")
    pm.set_defaults(func=cmd_pm)

    fit = sub.add_parser("fit", description="Fit one rating model end to end.")
    add_common(fit)
    fit.add_argument("--matches")
    fit.add_argument("--rosters")
    fit.add_argument("--ratings", help="CSV of player_id,avg_rating2 priors")
    fit.add_argument("--model", choices=MODELS)
    fit.add_argument("--min-matches", type=int, dest="min_matches")
    fit.add_argument("--train-fraction", type=float, dest="train_fraction")
    fit.add_argument("--alpha", type=float, help="l1/l2 mixing weight in [0, 1]")
    fit.add_argument("--lambda", type=float, dest="lam", help="penalty strength")
    fit.add_argument("--cv", action="store_true", default=None,
                     help="select hyperparameters by cross-validation")
    fit.add_argument("--folds", type=int, help="cross-validation folds")
    fit.add_argument("--sigma2", type=float, help="observation noise variance")
    fit.add_argument("--tau2", type=float, help="prior variance")
    fit.add_argument("--chains", type=int, help="sampler chains")
    fit.add_argument("--warmup", type=int, help="discarded draws per chain")
    fit.add_argument("--samples", type=int, help="retained draws per chain")
    fit.add_argument("--dump-chains", action="store_true", default=None,
                     dest="dump_chains", help="write raw draws to chains.csv")
    fit.set_defaults(func=cmd_fit)

    synth = sub.add_parser("synth", description="Generate synthetic matches.")
    add_common(synth)
    synth.add_argument("--n-players", type=int, dest="n_players")
    synth.add_argument("--n-matches", type=int, dest="n_matches")
    synth.add_argument("--strength-sd", type=float, dest="strength_sd")
    synth.add_argument("--noise-sd", type=float, dest="noise_sd")
    synth.add_argument("--allow-draws", action=argparse.BooleanOptionalAction,
                       default=None, dest="allow_draws")
    synth.set_defaults(func=cmd_synth)

    return parser


def _emit(path):
    print(f"wrote {path}")


def _finish(out_dir, command, cfg):
    path = os.path.join(out_dir, "run_config.txt")
    write_config_file(path, {"command": command, **cfg})
    _emit(path)


def cmd_pm(args) -> int:
    cfg = _resolve(args, _PM_DEFAULTS, "pm")
    _require(cfg, "pm", "matches", "rosters", "out")
    records = load_matches(cfg["matches"], cfg["rosters"])
    ds = filter_min_matches(build_dataset(records), cfg["min_matches"])
    table = plus_minus(ds)
    os.makedirs(cfg["out"], exist_ok=True)
    path = os.path.join(cfg["out"], "plus_minus.csv")
    write_plus_minus_csv(path, table)
    _emit(path)
    _finish(cfg["out"], "pm", cfg)
    return 0


def _reject_penalty_flags(cfg, model, *, alpha=False, lam=False, cv=False):
    if alpha and cfg["alpha"] is not None:
        raise UsageError(f"model {model} does not take --alpha")
    if lam and cfg["lambda"] is not None:
        raise UsageError(f"model {model} does not take --lambda")
    if cv and cfg["cv"]:
        raise UsageError(f"model {model} does not use --cv")


def _forced(cfg, key, model, value):
    """Accept an explicit flag only when it restates the fixed value."""
    given = cfg[key]
    if given is not None and given != value:
        raise UsageError(
            f"model {model} fixes --{key} at {value}, got {given}"
        )
    return value


def _select_penalty(cfg, model, X, y, family, cv_seed):
    """Resolve (alpha, lambda), cross-validating when asked or needed."""
    alpha = cfg["alpha"]
    lam = cfg["lambda"]
    if model in ("ridge", "logit-ridge"):
        alpha = _forced(cfg, "alpha", model, 0.0)
    cv_result = None
    if cfg["cv"] or lam is None:
        if alpha is not None:
            alpha_grid = np.array([alpha])
        else:
            alpha_grid = np.linspace(0.0, 1.0, 100)
        grid = CvGrid(alphas=alpha_grid, n_lambdas=100,
                      n_folds=cfg["folds"], seed=cv_seed)
        cv_result = cross_validate(X, y, family=family, grid=grid)
        alpha = cv_result.best_alpha
        lam = cv_result.best_lambda
        print(f"cross-validation selected alpha={alpha!r} lambda={lam!r} "
              f"({cv_result.metric})")
    elif alpha is None:
        alpha = 0.5
    return float(alpha), float(lam), cv_result


def _fit_model(cfg, model, train, prior, seed):
    """Fit the requested model on the training split.

    Returns (coef, l1_active, cv_result, estimator).
    """
    cv_seed = substream(seed, "cv")
    if model in LINEAR_MODELS:
        X, y = train.dense(), train.y
        if model == "ols":
            _reject_penalty_flags(cfg, model, alpha=True, lam=True, cv=True)
            est = OLSRating().fit(X, y)
            return est.coef_, False, None, est
        alpha, lam, cv_result = _select_penalty(cfg, model, X, y, "gaussian",
                                                cv_seed)
        est = ElasticNetRating(alpha=alpha, lam=lam).fit(X, y)
        if not est.converged_:
            print("warning: coordinate descent hit the sweep cap",
                  file=sys.stderr)
        return est.coef_, alpha > 0 and lam > 0, cv_result, est
    if model in LOGISTIC_MODELS:
        X = train.dense()
        labels = (train.y > 0).astype(np.float64)
        if model == "logit":
            _reject_penalty_flags(cfg, model, cv=True)
            alpha = _forced(cfg, "alpha", model, 0.0)
            lam = _forced(cfg, "lambda", model, 0.0)
            cv_result = None
        else:
            alpha, lam, cv_result = _select_penalty(cfg, model, X, labels,
                                                    "binomial", cv_seed)
        est = LogisticRating(alpha=alpha, lam=lam).fit(X, labels)
        if est.separation_:
            print("warning: labels are separated; unpenalized coefficients "
                  "are unbounded", file=sys.stderr)
        elif not est.converged_:
            print("warning: logistic solver hit the iteration cap",
                  file=sys.stderr)
        return est.coef_, alpha > 0 and lam > 0, cv_result, est
    # bayes / bayes-hier
    _reject_penalty_flags(cfg, model, alpha=True, lam=True, cv=True)
    est = BayesianRating(
        kind="simple" if model == "bayes" else "hierarchical",
        sigma2=cfg["sigma2"],
        tau2=cfg["tau2"],
        n_chains=cfg["chains"],
        n_warmup=cfg["warmup"],
        n_samples=cfg["samples"],
        seed=substream(seed, "bayes"),
    ).fit(train.X, train.y, prior.scaled, names=train.players)
    if not est.summary_.passed:
        print("warning: sampler diagnostics failed (split R-hat >= 1.05 "
              "or degenerate chain)", file=sys.stderr)
    return est.coef_, False, None, est


def _safe_pearson(actual, predicted):
    try:
        return pearson_test(actual, predicted)
    except (TooFewPoints, ZeroVariance) as exc:
        print(f"warning: significance test skipped: {exc}", file=sys.stderr)
        return None


def cmd_fit(args) -> int:
    cfg = _resolve(args, _FIT_DEFAULTS, "fit")
    _require(cfg, "fit", "model", "matches", "rosters", "out")
    model = cfg["model"]
    if model not in MODELS:
        raise UsageError(f"unknown model {cfg['model']!r}; choose from "
                         f"{', '.join(MODELS)}")
    records = load_matches(cfg["matches"], cfg["rosters"])
    ds = filter_min_matches(build_dataset(records), cfg["min_matches"])
    pm_table = plus_minus(ds)
    prior = None
    if cfg["ratings"] is not None:
        prior = load_rating_prior(cfg["ratings"], ds.players)
    if model in BAYES_MODELS and prior is None:
        raise MissingPrior(f"model {model} needs --ratings")
    seed = cfg["seed"]
    if seed < 0:
        raise UsageError("--seed must be non-negative")

    logistic = model in LOGISTIC_MODELS
    base = binarize_for_logistic(ds)[0] if logistic else ds
    train, test = train_test_split(base, cfg["train_fraction"],
                                   substream(seed, "split"))
    coef, l1_active, cv_result, _est = _fit_model(cfg, model, train, prior, seed)

    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    report = build_report(coef, pm_table, prior=prior, l1_active=l1_active,
                          seed=seed)
    ratings_path = os.path.join(out, "ratings.csv")
    write_ratings_csv(ratings_path, model, report)
    _emit(ratings_path)

    kind = "win_rate" if logistic else "pm"
    for name, part in (("scatter_train.csv", train), ("scatter_test.csv", test)):
        if logistic:
            players, actual, predicted = win_rate_scatter(
                coef, part, (part.y > 0).astype(np.float64))
        else:
            players, actual, predicted = plus_minus_scatter(coef, part)
        path = os.path.join(out, name)
        write_scatter_csv(path, players, actual, predicted, kind=kind)
        _emit(path)
        if name == "scatter_test.csv":
            test_result = _safe_pearson(actual, predicted)

    report_path = os.path.join(out, "test_report.csv")
    write_test_report_csv(report_path, [(model, test_result)])
    _emit(report_path)

    if cv_result is not None:
        path = os.path.join(out, "cv_surface.csv")
        write_cv_csv(path, cv_result)
        _emit(path)
    if cfg["dump_chains"] and model in BAYES_MODELS:
        summaries = [_est.summary_]
        if hasattr(_est, "eta_summary_"):
            summaries.append(_est.eta_summary_)
        path = os.path.join(out, "chains.csv")
        write_chain_csv(path, summaries)
        _emit(path)
    _finish(out, "fit", cfg)
    return 0


def cmd_synth(args) -> int:
    cfg = _resolve(args, _SYNTH_DEFAULTS, "synth")
    _require(cfg, "synth", "out")
    config = SynthConfig(
        n_players=cfg["n_players"],
        n_matches=cfg["n_matches"],
        strength_sd=cfg["strength_sd"],
        noise_sd=cfg["noise_sd"],
        allow_draws=cfg["allow_draws"],
        seed=cfg["seed"],
    )
    records, players, truth = generate(config)
    os.makedirs(cfg["out"], exist_ok=True)
    matches_path = os.path.join(cfg["out"], "matches.csv")
    rosters_path = os.path.join(cfg["out"], "rosters.csv")
    truth_path = os.path.join(cfg["out"], "truth.csv")
    write_matches_csv(records, matches_path, rosters_path)
    write_truth_csv(truth_path, players, truth)
    for path in (matches_path, rosters_path, truth_path):
        _emit(path)
    _finish(cfg["out"], "synth", cfg)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"apmrate: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"apmrate: {exc}", file=sys.stderr)
        return 1
    except DataValidationError as exc:
        print(f"apmrate: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"apmrate: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"apmrate: {exc}", file=sys.stderr)
        return 3
    except RatingError as exc:
        print(f"apmrate: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
