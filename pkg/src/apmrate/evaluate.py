"""Rankings, predicted contribution summaries, and significance tests."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .dataset import Dataset, PlusMinusTable, RatingPrior, signed_average
from .errors import TooFewPoints, ZeroVariance
from .logistic import predict_prob
from .seeding import substream


@dataclass(frozen=True)
class PearsonTest:
    """Sample correlation with its two-sided significance test."""

    r: float
    t_stat: float
    df: int
    p_value: float


def pearson_test(x, y) -> PearsonTest:
    """Two-sided test of zero correlation between paired samples.

    The p-value comes from the regularized incomplete beta function,
    P = I(df/2, 1/2; df / (df + t^2)), which is the exact two-sided
    tail mass of the t distribution with n - 2 degrees of freedom.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError("paired samples must have equal length")
    n = x.size
    if n < 3:
        raise TooFewPoints(f"correlation test needs at least 3 pairs, got {n}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("samples contain non-finite values")
    dx = x - x.mean()
    dy = y - y.mean()
    ssx = float(dx @ dx)
    ssy = float(dy @ dy)
    if ssx == 0.0 or ssy == 0.0:
        raise ZeroVariance("correlation is undefined for a constant sample")
    r = float(dx @ dy) / np.sqrt(ssx * ssy)
    r = float(np.clip(r, -1.0, 1.0))
    df = n - 2
    denom = 1.0 - r * r
    if denom <= 0.0:
        t_stat = np.inf if r > 0 else -np.inf
        return PearsonTest(r=r, t_stat=t_stat, df=df, p_value=0.0)
    t_stat = r * np.sqrt(df / denom)
    p_value = float(betainc(df / 2.0, 0.5, df / (df + t_stat * t_stat)))
    return PearsonTest(r=r, t_stat=float(t_stat), df=df, p_value=p_value)


def rank_players(ratings, seed=0) -> np.ndarray:
    """Dense 1-based ranks, best rating first, ties broken at random.

    Tied ratings get distinct adjacent ranks in an order drawn uniformly
    from the tie group's permutations under the seed.
    """
    ratings = np.asarray(ratings, dtype=np.float64).ravel()
    if ratings.size == 0:
        return np.empty(0, dtype=np.int64)
    if not np.all(np.isfinite(ratings)):
        raise ValueError("ratings must be finite to rank")
    rng = np.random.default_rng(seed)
    shuffle_key = rng.permutation(ratings.size)
    order = np.lexsort((shuffle_key, -ratings))
    ranks = np.empty(ratings.size, dtype=np.int64)
    ranks[order] = np.arange(1, ratings.size + 1)
    return ranks


def plus_minus_scatter(coef, ds: Dataset):
    """Actual versus model-implied average score difference per player.

    The model-implied value replaces each map's real difference with the
    fitted one and averages it the same signed way. Players absent from
    every row of ``ds`` are dropped.
    """
    fitted = np.asarray(ds.X @ np.asarray(coef, dtype=np.float64)).ravel()
    predicted, counts = signed_average(ds, fitted)
    actual, _ = signed_average(ds, ds.y)
    keep = counts > 0
    players = tuple(p for p, k in zip(ds.players, keep) if k)
    return players, actual[keep], predicted[keep]


def win_rate_scatter(coef, ds: Dataset, labels):
    """Actual versus predicted win rate per player.

    Both sides are anchored at one half: a player's rate is 1/2 plus the
    signed average of (outcome - 1/2) over their maps, which equals the
    plain share of maps won once the sign flips for team 2 appearances.
    """
    labels = np.asarray(labels, dtype=np.float64).ravel()
    probs = np.atleast_1d(predict_prob(coef, ds.X))
    predicted_part, counts = signed_average(ds, probs - 0.5)
    actual_part, _ = signed_average(ds, labels - 0.5)
    keep = counts > 0
    players = tuple(p for p, k in zip(ds.players, keep) if k)
    return players, 0.5 + actual_part[keep], 0.5 + predicted_part[keep]


@dataclass(frozen=True, eq=False)
class RatingReport:
    """One model's ratings next to the baseline orderings."""

    players: tuple[str, ...]
    rating: np.ndarray
    model_rank: np.ndarray
    pm: np.ndarray
    pm_rank: np.ndarray
    rating2_rank: np.ndarray | None
    excluded_by_l1: np.ndarray


def build_report(ratings, pm_table: PlusMinusTable, prior: RatingPrior | None = None,
                 l1_active=False, seed=0) -> RatingReport:
    """Assemble the per-player report for one fitted model.

    ``l1_active`` marks zero ratings as dropped by the l1 penalty rather
    than merely estimated at zero. Each ranking uses its own tie-break
    substream so reports for different models agree on the shared
    columns.
    """
    ratings = np.asarray(ratings, dtype=np.float64).ravel()
    if ratings.shape[0] != len(pm_table.players):
        raise ValueError("ratings and plus/minus table disagree on players")
    if prior is not None and prior.players != pm_table.players:
        raise ValueError("prior and plus/minus table disagree on players")
    model_rank = rank_players(ratings, substream(seed, "rank-model"))
    pm_rank = rank_players(pm_table.pm, substream(seed, "rank-pm"))
    rating2_rank = (
        rank_players(prior.raw, substream(seed, "rank-rating2"))
        if prior is not None else None
    )
    excluded = (ratings == 0.0) & bool(l1_active)
    return RatingReport(
        players=pm_table.players,
        rating=ratings,
        model_rank=model_rank,
        pm=pm_table.pm,
        pm_rank=pm_rank,
        rating2_rank=rating2_rank,
        excluded_by_l1=excluded,
    )


def comparison_table(reports: dict[str, RatingReport], top=10):
    """Rows for the players ranked best by plus/minus, across models.

    Returns a list of dicts ordered by plus/minus rank. A model's rating
    cell is None when the l1 penalty excluded that player.
    """
    if not reports:
        return []
    first = next(iter(reports.values()))
    for name, report in reports.items():
        if report.players != first.players:
            raise ValueError(f"report {name!r} covers different players")
    keep = np.flatnonzero(first.pm_rank <= top)
    keep = keep[np.argsort(first.pm_rank[keep])]
    rows = []
    for i in keep:
        row = {
            "player_id": first.players[i],
            "pm": float(first.pm[i]),
            "pm_rank": int(first.pm_rank[i]),
        }
        if first.rating2_rank is not None:
            row["rating2_rank"] = int(first.rating2_rank[i])
        for name, report in reports.items():
            excluded = bool(report.excluded_by_l1[i])
            row[f"{name}_rating"] = None if excluded else float(report.rating[i])
            row[f"{name}_rank"] = int(report.model_rank[i])
        rows.append(row)
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_plus_minus_csv(path, table: PlusMinusTable):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["player_id", "matches", "pm"])
        for i, player in enumerate(table.players):
            writer.writerow([player, int(table.matches[i]), repr(float(table.pm[i]))])


def write_ratings_csv(path, model: str, report: RatingReport):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow([
            "player_id", "model", "rating", "model_rank", "pm", "pm_rank",
            "rating2_rank", "excluded_by_l1",
        ])
        for i, player in enumerate(report.players):
            rating2 = (
                int(report.rating2_rank[i])
                if report.rating2_rank is not None else None
            )
            writer.writerow([
                player,
                model,
                repr(float(report.rating[i])),
                int(report.model_rank[i]),
                repr(float(report.pm[i])),
                int(report.pm_rank[i]),
                _fmt(rating2),
                "true" if report.excluded_by_l1[i] else "false",
            ])


def write_scatter_csv(path, players, actual, predicted, kind="pm"):
    """Scatter pairs per player; ``kind`` picks the column names."""
    if kind == "pm":
        header = ["player_id", "true_pm", "predicted_pm"]
    elif kind == "win_rate":
        header = ["player_id", "actual_rate", "predicted_rate"]
    else:
        raise ValueError(f"unknown scatter kind {kind!r}")
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for player, a, p in zip(players, actual, predicted):
            writer.writerow([player, repr(float(a)), repr(float(p))])


def write_test_report_csv(path, rows):
    """Significance lines per model; ``rows`` pairs names with tests.

    A test of None writes NaN fields, which keeps the report present
    when the scatter was too small to test.
    """
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["model", "r", "t", "df", "p_value"])
        for model, test in rows:
            if test is None:
                writer.writerow([model, "nan", "nan", "nan", "nan"])
            else:
                writer.writerow([
                    model, repr(test.r), repr(test.t_stat), test.df,
                    repr(test.p_value),
                ])


def write_comparison_csv(path, rows):
    if not rows:
        raise ValueError("comparison table is empty")
    header = list(rows[0])
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row.get(key)) for key in header])
