"""Synthetic match generator with planted player strengths.

Each map draws ten distinct players at random, splits them five versus
five, and turns the strength gap plus noise into a CS:GO-shaped
scoreline: regulation maps end 16 to something at most 14, overtime maps
19 to 15, and optional draws 15 all. The planted strengths come back
alongside the records so recovery can be scored.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .dataset import TEAM_SIZE, MatchRecord


@dataclass(frozen=True)
class SynthConfig:
    n_players: int = 50
    n_matches: int = 2000
    strength_sd: float = 0.5
    noise_sd: float = 4.0
    allow_draws: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_players < 2 * TEAM_SIZE:
            raise ValueError(
                f"need at least {2 * TEAM_SIZE} players, got {self.n_players}"
            )
        if self.n_matches < 1:
            raise ValueError("n_matches must be at least 1")
        if self.strength_sd < 0.0:
            raise ValueError("strength_sd must be non-negative")
        if self.noise_sd < 0.0:
            raise ValueError("noise_sd must be non-negative")


def _scoreline(margin: float, allow_draws: bool) -> tuple[int, int]:
    """Map a real-valued margin to a legal final score.

    Margins that round to 0 or +-1 cannot occur in regulation, so they
    become draws (when allowed) or minimal overtime wins for the side
    the raw margin favours. Everything else is a regulation map with the
    loser's rounds clamped to [0, 14].
    """
    rounded = round(margin)
    if abs(rounded) <= 1:
        if allow_draws and rounded == 0:
            return 15, 15
        if margin >= 0:
            return 19, 15
        return 15, 19
    loser = min(14, max(0, round(15.0 - abs(margin))))
    if margin > 0:
        return 16, loser
    return loser, 16


def generate(config: SynthConfig, strengths=None):
    """Draw match records from planted strengths.

    Returns (records, players, strengths). ``strengths`` overrides the
    Gaussian draw when given, which pins the truth while keeping the
    schedule and noise reproducible under the seed.
    """
    rng = np.random.default_rng(config.seed)
    if strengths is None:
        truth = rng.normal(0.0, config.strength_sd, size=config.n_players)
    else:
        truth = np.asarray(strengths, dtype=np.float64).copy()
        if truth.shape != (config.n_players,):
            raise ValueError(
                f"strengths must have shape ({config.n_players},)"
            )
    players = tuple(f"p{i + 1:03d}" for i in range(config.n_players))
    records = []
    for m in range(config.n_matches):
        picked = rng.choice(config.n_players, size=2 * TEAM_SIZE, replace=False)
        team1 = picked[:TEAM_SIZE]
        team2 = picked[TEAM_SIZE:]
        # The noise draw happens even at scale zero so the schedule is
        # identical across noise levels under one seed.
        margin = float(truth[team1].sum() - truth[team2].sum())
        margin += float(rng.normal(0.0, config.noise_sd))
        score1, score2 = _scoreline(margin, config.allow_draws)
        records.append(
            MatchRecord(
                map_id=m + 1,
                team1=tuple(players[j] for j in team1),
                team2=tuple(players[j] for j in team2),
                score1=score1,
                score2=score2,
            )
        )
    truth.setflags(write=False)
    return records, players, truth


def write_truth_csv(path, players, strengths):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["player_id", "true_strength"])
        for player, value in zip(players, strengths):
            writer.writerow([player, repr(float(value))])
