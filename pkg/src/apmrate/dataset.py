"""Match ingestion and design-matrix assembly.

A match record holds both five-player rosters and the final score of one
map. The design matrix encodes each map as a row with +1 for the five
players on team 1, -1 for the five on team 2, and 0 elsewhere; the
response is the score difference of team 1 over team 2.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (
    DataValidationError,
    DuplicateMapId,
    EmptyModel,
    MissingPrior,
    PlayerOnBothTeams,
    RosterSizeViolation,
    ScorelineWarning,
    ZeroVariance,
)

TEAM_SIZE = 5


@dataclass(frozen=True)
class MatchRecord:
    """One played map: both rosters plus the final scoreline."""

    map_id: int
    team1: tuple[str, ...]
    team2: tuple[str, ...]
    score1: int
    score2: int

    def __post_init__(self):
        for side, team in (("team1", self.team1), ("team2", self.team2)):
            if len(team) != TEAM_SIZE:
                raise RosterSizeViolation(
                    f"map {self.map_id}: {side} has {len(team)} players, "
                    f"expected {TEAM_SIZE}"
                )
            if len(set(team)) != TEAM_SIZE:
                raise RosterSizeViolation(
                    f"map {self.map_id}: {side} lists a player twice"
                )
        shared = set(self.team1) & set(self.team2)
        if shared:
            raise PlayerOnBothTeams(
                f"map {self.map_id}: {sorted(shared)} appear on both sides"
            )
        if self.score1 < 0 or self.score2 < 0:
            raise DataValidationError(f"map {self.map_id}: negative score")
        if abs(self.result_diff) == 1:
            # A map is decided by reaching 16 (or winning overtime by 4+),
            # so a finished map can never end one round apart.
            warnings.warn(
                f"map {self.map_id}: score difference of 1 cannot occur in a "
                "finished map",
                ScorelineWarning,
                stacklevel=2,
            )

    @property
    def result_diff(self) -> int:
        return self.score1 - self.score2

    @property
    def players(self) -> tuple[str, ...]:
        return self.team1 + self.team2


def _read_csv_rows(path, required):
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataValidationError(f"{path}: empty file, expected a header")
        missing = required - set(reader.fieldnames)
        if missing:
            raise DataValidationError(
                f"{path}: missing required columns {sorted(missing)}"
            )
        return list(reader)


def _parse_int(value, path, line, column):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise DataValidationError(
            f"{path} line {line}: column {column!r} has non-integer "
            f"value {value!r}"
        ) from None


def load_matches(matches_path, rosters_path) -> list[MatchRecord]:
    """Read a match table and its roster table into validated records.

    The match file needs columns map_id, score1, score2; the roster file
    needs map_id, player_id, side with side +1 or -1 and exactly five
    players per side per map. Records come back in match-file order.
    """
    scores: dict[int, tuple[int, int]] = {}
    for line, row in enumerate(
        _read_csv_rows(matches_path, {"map_id", "score1", "score2"}), start=2
    ):
        map_id = _parse_int(row["map_id"], matches_path, line, "map_id")
        if map_id in scores:
            raise DuplicateMapId(f"{matches_path}: map {map_id} listed twice")
        s1 = _parse_int(row["score1"], matches_path, line, "score1")
        s2 = _parse_int(row["score2"], matches_path, line, "score2")
        scores[map_id] = (s1, s2)

    rosters: dict[int, dict[int, list[str]]] = {m: {1: [], -1: []} for m in scores}
    for line, row in enumerate(
        _read_csv_rows(rosters_path, {"map_id", "player_id", "side"}), start=2
    ):
        map_id = _parse_int(row["map_id"], rosters_path, line, "map_id")
        if map_id not in rosters:
            raise DataValidationError(
                f"{rosters_path} line {line}: map {map_id} has no match row"
            )
        side = _parse_int(row["side"], rosters_path, line, "side")
        if side not in (1, -1):
            raise DataValidationError(
                f"{rosters_path} line {line}: side must be 1 or -1, got {side}"
            )
        player = (row["player_id"] or "").strip()
        if not player:
            raise DataValidationError(
                f"{rosters_path} line {line}: empty player_id"
            )
        rosters[map_id][side].append(player)

    records = []
    for map_id, (s1, s2) in scores.items():
        sides = rosters[map_id]
        records.append(
            MatchRecord(
                map_id=map_id,
                team1=tuple(sides[1]),
                team2=tuple(sides[-1]),
                score1=s1,
                score2=s2,
            )
        )
    return records


def write_matches_csv(records, matches_path, rosters_path):
    """Emit records in the same two-file layout that load_matches reads."""
    with open(matches_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["map_id", "score1", "score2"])
        for rec in records:
            writer.writerow([rec.map_id, rec.score1, rec.score2])
    with open(rosters_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["map_id", "player_id", "side"])
        for rec in records:
            for player in rec.team1:
                writer.writerow([rec.map_id, player, 1])
            for player in rec.team2:
                writer.writerow([rec.map_id, player, -1])


@dataclass(frozen=True, eq=False)
class Dataset:
    """Response vector and ternary appearance matrix for a set of maps.

    Players are ordered by first appearance; ``X`` is CSR with entries
    in {-1, 0, +1} and ``y`` holds the per-map score differences. All
    arrays are frozen after construction.
    """

    y: np.ndarray
    X: sp.csr_matrix
    players: tuple[str, ...]
    map_ids: np.ndarray

    def __post_init__(self):
        if self.X.shape != (len(self.y), len(self.players)):
            raise ValueError("design matrix shape disagrees with y and players")
        if len(self.map_ids) != len(self.y):
            raise ValueError("map_ids length disagrees with y")
        self.y.setflags(write=False)
        self.map_ids.setflags(write=False)
        for part in (self.X.data, self.X.indices, self.X.indptr):
            part.setflags(write=False)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def appearances(self) -> np.ndarray:
        """Number of maps each player appears in."""
        counts = np.abs(self.X).sum(axis=0)
        return np.asarray(counts).ravel().astype(np.int64)

    def dense(self) -> np.ndarray:
        return np.asfortranarray(self.X.toarray())


def build_dataset(records) -> Dataset:
    """Assemble the appearance matrix from match records.

    Column order follows each player's first appearance scanning the
    records in order, team 1 before team 2 within a map.
    """
    records = list(records)
    if not records:
        raise EmptyModel("no match records to model")
    index: dict[str, int] = {}
    rows, cols, vals = [], [], []
    y = np.empty(len(records), dtype=np.float64)
    map_ids = np.empty(len(records), dtype=np.int64)
    for i, rec in enumerate(records):
        y[i] = rec.result_diff
        map_ids[i] = rec.map_id
        for sign, team in ((1.0, rec.team1), (-1.0, rec.team2)):
            for player in team:
                j = index.setdefault(player, len(index))
                rows.append(i)
                cols.append(j)
                vals.append(sign)
    X = sp.csr_matrix(
        (vals, (rows, cols)), shape=(len(records), len(index)), dtype=np.float64
    )
    return Dataset(y=y, X=X, players=tuple(index), map_ids=map_ids)


def signed_average(ds: Dataset, values) -> tuple[np.ndarray, np.ndarray]:
    """Per-player average of a per-map quantity, signed by side.

    For player j this is (1/n_j) * sum_i X_ij * values_i over the maps
    the player appears in. Players absent from every row get 0 with a
    count of 0; callers decide how to treat them.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.shape[0] != ds.n:
        raise ValueError("values length disagrees with dataset rows")
    totals = np.asarray(ds.X.T @ values).ravel()
    counts = ds.appearances()
    averages = np.divide(
        totals,
        counts,
        out=np.zeros(ds.p, dtype=np.float64),
        where=counts > 0,
    )
    return averages, counts


@dataclass(frozen=True, eq=False)
class PlusMinusTable:
    """Average score difference per player across their maps."""

    players: tuple[str, ...]
    matches: np.ndarray
    pm: np.ndarray

    def __post_init__(self):
        self.matches.setflags(write=False)
        self.pm.setflags(write=False)


def plus_minus(ds: Dataset) -> PlusMinusTable:
    """Average signed score difference for every player in the dataset."""
    pm, counts = signed_average(ds, ds.y)
    if np.any(counts == 0):
        raise EmptyModel("plus/minus needs at least one map per player")
    return PlusMinusTable(players=ds.players, matches=counts, pm=pm)


def _take_rows(ds: Dataset, rows: np.ndarray) -> Dataset:
    return Dataset(
        y=ds.y[rows].copy(),
        X=ds.X[rows].copy(),
        players=ds.players,
        map_ids=ds.map_ids[rows].copy(),
    )


def filter_min_matches(ds: Dataset, min_matches: int) -> Dataset:
    """Drop players with fewer than ``min_matches`` appearances.

    Rows are kept even when some of their players are dropped, so the
    remaining columns still see every map they played.
    """
    if min_matches < 0:
        raise ValueError("min_matches must be non-negative")
    keep = ds.appearances() >= min_matches
    if keep.all():
        return ds
    if not keep.any():
        raise EmptyModel(
            f"no player reaches {min_matches} matches; nothing to model"
        )
    X = ds.X.tocsc()[:, keep].tocsr()
    players = tuple(p for p, k in zip(ds.players, keep) if k)
    return Dataset(y=ds.y.copy(), X=X, players=players, map_ids=ds.map_ids.copy())


def train_test_split(ds: Dataset, train_fraction: float, seed: int):
    """Split rows into train and test datasets by a seeded permutation.

    The row count on each side is round(fraction * n) versus the rest;
    both sides must be non-empty. Column order is preserved, so players
    missing from one side keep an all-zero column there.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n_train = int(round(train_fraction * ds.n))
    if n_train == 0 or n_train == ds.n:
        raise DataValidationError(
            f"train_fraction {train_fraction} leaves an empty side for n={ds.n}"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(ds.n)
    train_rows = np.sort(perm[:n_train])
    test_rows = np.sort(perm[n_train:])
    return _take_rows(ds, train_rows), _take_rows(ds, test_rows)


def binarize_for_logistic(ds: Dataset) -> tuple[Dataset, np.ndarray]:
    """Drop drawn maps and return win labels for team 1.

    The returned dataset keeps the raw score differences in ``y``; the
    labels vector is 1 where team 1 won and 0 where it lost.
    """
    keep = np.flatnonzero(ds.y != 0)
    if keep.size == 0:
        raise EmptyModel("every map is drawn; no labels to fit")
    reduced = _take_rows(ds, keep)
    labels = (reduced.y > 0).astype(np.float64)
    return reduced, labels


def standardize(values) -> np.ndarray:
    """Center and scale to unit sample standard deviation (ddof=1)."""
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size < 2:
        raise ZeroVariance("standardizing needs at least two values")
    sd = values.std(ddof=1)
    if sd == 0.0:
        raise ZeroVariance("cannot standardize a constant vector")
    return (values - values.mean()) / sd


@dataclass(frozen=True, eq=False)
class RatingPrior:
    """External per-player rating used as a prior location.

    ``raw`` holds the averages as read; ``scaled`` is the standardized
    version actually consumed by the samplers.
    """

    players: tuple[str, ...]
    raw: np.ndarray
    scaled: np.ndarray

    def __post_init__(self):
        self.raw.setflags(write=False)
        self.scaled.setflags(write=False)


def load_rating_prior(path, players) -> RatingPrior:
    """Read per-player average ratings and align them to ``players``.

    Every modeled player must have a row; extra rows are ignored.
    """
    table: dict[str, float] = {}
    for line, row in enumerate(
        _read_csv_rows(path, {"player_id", "avg_rating2"}), start=2
    ):
        player = (row["player_id"] or "").strip()
        if not player:
            raise DataValidationError(f"{path} line {line}: empty player_id")
        if player in table:
            raise DataValidationError(
                f"{path} line {line}: duplicate rating row for {player!r}"
            )
        try:
            table[player] = float(row["avg_rating2"])
        except (TypeError, ValueError):
            raise DataValidationError(
                f"{path} line {line}: avg_rating2 is not a number"
            ) from None
    missing = [p for p in players if p not in table]
    if missing:
        raise MissingPrior(
            f"{path}: no rating for {len(missing)} modeled player(s), "
            f"first missing {missing[0]!r}"
        )
    raw = np.array([table[p] for p in players], dtype=np.float64)
    return RatingPrior(players=tuple(players), raw=raw, scaled=standardize(raw))
