"""MovieLens-format rating ingestion, aggregates and cross-validation folds."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse


class DataError(ValueError):
    """Base class for problems with rating data."""


class ParseError(DataError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ValidationError(DataError):
    pass


@dataclass(frozen=True)
class RatingScale:
    min: int = 1
    max: int = 5

    def __post_init__(self):
        if not self.min < self.max:
            raise ValueError(f"rating scale needs min < max, got {self.min}..{self.max}")

    @property
    def median(self) -> float:
        return (self.min + self.max) / 2

    def contains(self, values) -> np.ndarray:
        values = np.asarray(values)
        return (values >= self.min) & (values <= self.max)


@dataclass(frozen=True)
class UserProfile:
    rated_items: frozenset
    mean: float
    std: float
    empty: bool


@dataclass(frozen=True)
class ItemStats:
    raters: frozenset
    mean: float
    empty: bool


class RatingsMatrix:
    """Immutable sparse user x item rating matrix with dense indices.

    ``user_ids[u]`` and ``item_ids[i]`` give the raw MovieLens ids behind the
    dense indices. A train view produced by :meth:`subset` keeps the full
    index space of its parent so indices stay comparable across folds.
    """

    def __init__(self, users, items, ratings, user_ids, item_ids,
                 scale: RatingScale = RatingScale()):
        self.users = np.asarray(users, dtype=np.int64)
        self.items = np.asarray(items, dtype=np.int64)
        self.ratings = np.asarray(ratings, dtype=np.int64)
        self.user_ids = np.asarray(user_ids, dtype=np.int64)
        self.item_ids = np.asarray(item_ids, dtype=np.int64)
        self.scale = scale
        for arr in (self.users, self.items, self.ratings, self.user_ids, self.item_ids):
            arr.setflags(write=False)
        self._validate()

    def _validate(self):
        if not (len(self.users) == len(self.items) == len(self.ratings)):
            raise ValidationError("entry arrays differ in length")
        if len(self.users) == 0:
            return
        if self.users.min() < 0 or self.users.max() >= self.n_users:
            raise ValidationError("user index outside [0, n_users)")
        if self.items.min() < 0 or self.items.max() >= self.n_items:
            raise ValidationError("item index outside [0, n_items)")
        bad = ~self.scale.contains(self.ratings)
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise ValidationError(
                f"rating {self.ratings[k]} outside scale {self.scale.min}..{self.scale.max}")
        keys = self.users * self.n_items + self.items
        uniq, counts = np.unique(keys, return_counts=True)
        if (counts > 1).any():
            key = int(uniq[np.flatnonzero(counts > 1)[0]])
            u, i = divmod(key, self.n_items)
            raise ValidationError(
                f"duplicate rating for user {self.user_ids[u]} item {self.item_ids[i]}")

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    @property
    def n_entries(self) -> int:
        return len(self.ratings)

    def __len__(self):
        return self.n_entries

    def __repr__(self):
        return (f"RatingsMatrix(n_users={self.n_users}, n_items={self.n_items}, "
                f"n_entries={self.n_entries})")

    @cached_property
    def user_index(self) -> dict[int, int]:
        return {int(raw): u for u, raw in enumerate(self.user_ids)}

    @cached_property
    def item_index(self) -> dict[int, int]:
        return {int(raw): i for i, raw in enumerate(self.item_ids)}

    @cached_property
    def csr(self) -> sparse.csr_matrix:
        m = sparse.csr_matrix(
            (self.ratings.astype(np.float64), (self.users, self.items)),
            shape=(self.n_users, self.n_items))
        m.sort_indices()
        return m

    @cached_property
    def dense(self) -> np.ndarray:
        """Float ratings with 0 for unrated cells."""
        out = np.zeros((self.n_users, self.n_items))
        out[self.users, self.items] = self.ratings
        out.setflags(write=False)
        return out

    @cached_property
    def mask(self) -> np.ndarray:
        out = np.zeros((self.n_users, self.n_items), dtype=bool)
        out[self.users, self.items] = True
        out.setflags(write=False)
        return out

    @cached_property
    def global_mean(self) -> float:
        if self.n_entries == 0:
            return self.scale.median
        return float(self.ratings.mean())

    def subset(self, selector) -> RatingsMatrix:
        """Entries picked by a boolean mask or index array, same index space."""
        return RatingsMatrix(self.users[selector], self.items[selector],
                             self.ratings[selector], self.user_ids,
                             self.item_ids, self.scale)

    def entries(self):
        return zip(self.users.tolist(), self.items.tolist(), self.ratings.tolist())

    def _entry_set(self):
        return {(int(self.user_ids[u]), int(self.item_ids[i]), r)
                for u, i, r in self.entries()}

    def same_ratings(self, other: RatingsMatrix) -> bool:
        """True when both hold the same (raw user, raw item, rating) triples."""
        return self._entry_set() == other._entry_set()


def parse_movielens(path, scale: RatingScale = RatingScale()) -> RatingsMatrix:
    """Read a ``u.data``-style file: user, item, rating, timestamp per line.

    Raw ids are mapped to dense indices in ascending id order. Timestamps are
    ignored; blank lines are skipped.
    """
    raw_users, raw_items, ratings = [], [], []
    with Path(path).open("r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.rstrip("\r\n").split("\t")
            if len(fields) < 4:
                raise ParseError(f"expected 4 tab-separated fields, got {len(fields)}", lineno)
            try:
                u, i, r = int(fields[0]), int(fields[1]), int(fields[2])
                int(fields[3])
            except ValueError:
                raise ParseError(f"non-integer field in {line.strip()!r}", lineno) from None
            if not scale.min <= r <= scale.max:
                raise ValidationError(
                    f"line {lineno}: rating {r} outside scale {scale.min}..{scale.max}")
            raw_users.append(u)
            raw_items.append(i)
            ratings.append(r)

    user_ids, users = np.unique(np.asarray(raw_users, dtype=np.int64), return_inverse=True)
    item_ids, items = np.unique(np.asarray(raw_items, dtype=np.int64), return_inverse=True)
    return RatingsMatrix(users, items, ratings, user_ids, item_ids, scale)


def write_movielens(matrix: RatingsMatrix, path) -> None:
    """Export in the same tab-separated format (timestamps written as 0)."""
    with Path(path).open("w", encoding="ascii") as fh:
        for u, i, r in matrix.entries():
            fh.write(f"{matrix.user_ids[u]}\t{matrix.item_ids[i]}\t{r}\t0\n")


@dataclass(frozen=True)
class Fold:
    train: RatingsMatrix
    test_users: np.ndarray
    test_items: np.ndarray
    test_ratings: np.ndarray

    @property
    def test_size(self) -> int:
        return len(self.test_ratings)

    def test_entries(self):
        return list(zip(self.test_users.tolist(), self.test_items.tolist(),
                        self.test_ratings.tolist()))


@dataclass(frozen=True)
class FoldSplit:
    fold_count: int
    folds: list[Fold]
    seed: int

    def __iter__(self):
        return iter(self.folds)

    def __len__(self):
        return len(self.folds)


def split_folds(matrix: RatingsMatrix, k: int = 5, seed: int = 0) -> FoldSplit:
    """Partition rating entries into ``k`` seeded, near-equal test folds."""
    if k < 2:
        raise ValueError(f"fold count must be >= 2, got {k}")
    if matrix.n_entries == 0:
        raise ValueError("cannot split an empty rating matrix")
    if k > matrix.n_entries:
        raise ValueError(f"fold count {k} exceeds number of entries {matrix.n_entries}")
    perm = np.random.default_rng(seed).permutation(matrix.n_entries)
    folds = []
    for part in np.array_split(perm, k):
        test_idx = np.sort(part)
        train_mask = np.ones(matrix.n_entries, dtype=bool)
        train_mask[test_idx] = False
        folds.append(Fold(
            train=matrix.subset(train_mask),
            test_users=matrix.users[test_idx],
            test_items=matrix.items[test_idx],
            test_ratings=matrix.ratings[test_idx],
        ))
    return FoldSplit(fold_count=k, folds=folds, seed=seed)


class UserProfiles:
    """Per-user rating count, mean and population std as aligned arrays."""

    def __init__(self, matrix: RatingsMatrix):
        n = matrix.n_users
        counts = np.bincount(matrix.users, minlength=n)
        sums = np.bincount(matrix.users, weights=matrix.ratings, minlength=n)
        empty = counts == 0
        mean = np.full(n, matrix.scale.median)
        np.divide(sums, counts, out=mean, where=~empty)
        dev2 = np.bincount(matrix.users, weights=(matrix.ratings - mean[matrix.users]) ** 2,
                           minlength=n)
        var = np.zeros(n)
        np.divide(dev2, counts, out=var, where=~empty)
        self.counts = counts
        self.means = mean
        self.stds = np.sqrt(var)
        self.empty = empty
        self._csr = matrix.csr

    def __len__(self):
        return len(self.counts)

    def rated_items(self, u: int) -> np.ndarray:
        return self._csr.indices[self._csr.indptr[u]:self._csr.indptr[u + 1]]

    def __getitem__(self, u: int) -> UserProfile:
        return UserProfile(frozenset(self.rated_items(u).tolist()), float(self.means[u]),
                           float(self.stds[u]), bool(self.empty[u]))


class ItemStatistics:
    """Per-item rater count and mean rating."""

    def __init__(self, matrix: RatingsMatrix):
        n = matrix.n_items
        counts = np.bincount(matrix.items, minlength=n)
        sums = np.bincount(matrix.items, weights=matrix.ratings, minlength=n)
        empty = counts == 0
        mean = np.full(n, matrix.scale.median)
        np.divide(sums, counts, out=mean, where=~empty)
        self.counts = counts
        self.means = mean
        self.empty = empty
        self._csc = matrix.csr.tocsc()
        self._csc.sort_indices()

    def __len__(self):
        return len(self.counts)

    def raters(self, p: int) -> np.ndarray:
        return self._csc.indices[self._csc.indptr[p]:self._csc.indptr[p + 1]]

    def __getitem__(self, p: int) -> ItemStats:
        return ItemStats(frozenset(self.raters(p).tolist()), float(self.means[p]),
                         bool(self.empty[p]))


def profile_users(matrix: RatingsMatrix) -> UserProfiles:
    return UserProfiles(matrix)


def profile_items(matrix: RatingsMatrix) -> ItemStatistics:
    return ItemStatistics(matrix)
