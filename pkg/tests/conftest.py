"""Shared fixtures: small hand-checked match sets."""

import numpy as np
import pytest

from apmrate.dataset import MatchRecord


def _team(prefix, n=4):
    return tuple(f"{prefix}{i}" for i in range(2, 2 + n))


@pytest.fixture
def three_maps():
    """Three maps with hand-computed plus/minus values.

    "ace" appears in all three (sides +, -, +) with score differences
    4, -5, 7, so ace's plus/minus is (4 + 5 + 7) / 3 = 16/3. "rook"
    mirrors ace on the other side each time, giving -16/3.
    """
    return [
        MatchRecord(101, ("ace",) + _team("a"), ("rook",) + _team("b"), 16, 12),
        MatchRecord(102, ("rook",) + _team("c"), ("ace",) + _team("d"), 11, 16),
        MatchRecord(103, ("ace",) + _team("a"), ("rook",) + _team("b"), 16, 9),
    ]


@pytest.fixture
def duplicated_map_pair():
    """Two identical rosters with equal score differences of 3."""
    return [
        MatchRecord(1, _team("t", 5), _team("u", 5), 16, 13),
        MatchRecord(2, _team("t", 5), _team("u", 5), 19, 16),
    ]


def random_records(rng, n_players=14, n_maps=12, max_rounds=16):
    """Valid random records for property checks."""
    names = tuple(f"pl{i:02d}" for i in range(n_players))
    records = []
    for m in range(n_maps):
        picked = rng.choice(n_players, size=10, replace=False)
        while True:
            s1, s2 = rng.integers(0, max_rounds + 1, size=2)
            if abs(int(s1) - int(s2)) != 1:
                break
        records.append(
            MatchRecord(
                map_id=m + 1,
                team1=tuple(names[j] for j in picked[:5]),
                team2=tuple(names[j] for j in picked[5:]),
                score1=int(s1),
                score2=int(s2),
            )
        )
    return records


def ternary_matrix(rng, n, p):
    """Random dense ternary design, Fortran order, no all-zero columns."""
    X = rng.choice([-1.0, 0.0, 1.0], size=(n, p), p=[0.3, 0.4, 0.3])
    for j in range(p):
        if not X[:, j].any():
            X[rng.integers(0, n), j] = 1.0
    return np.asfortranarray(X)
