"""Dataset loading and profile initialization.

Reads a four-file record dataset (users, creators, items, interactions) or
generates a synthetic one with the same shape: long-tailed creator activity,
skewed genre popularity, and per-creator genre concentration. Creator and
user seed profiles (skill/audience beliefs, activity levels, preferences)
are derived here and stay immutable afterwards.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .core import ConfigError, DataError, read_kv_file

# Content categories of a mainstream video platform; the default vocabulary.
DEFAULT_GENRES = (
    "Film & Animation",
    "Autos & Vehicles",
    "Music",
    "Pets & Animals",
    "Sports",
    "Travel & Events",
    "Gaming",
    "People & Blogs",
    "Comedy",
    "Entertainment",
    "News & Politics",
    "Howto & Style",
    "Education",
    "Science & Technology",
)

PREF_SMOOTHING = 0.1  # add-alpha smoothing for user genre histograms


class SchemaError(DataError):
    """Record file is missing a column or holds an out-of-vocabulary value."""


class DanglingRef(DataError):
    """A row references an id that does not resolve."""


class EmptyDataset(DataError):
    """One of the required record files has no data rows."""


class InvalidParams(ConfigError):
    """Synthetic generator parameters out of range."""


@dataclass(frozen=True)
class UserRow:
    user_id: int
    name: str


@dataclass(frozen=True)
class CreatorRow:
    creator_id: int
    name: str
    followers: int


@dataclass(frozen=True)
class ItemRow:
    item_id: int
    creator_id: int
    genre: int
    title: str
    tags: tuple[str, ...]
    description: str
    created_day: int


@dataclass(frozen=True)
class InteractionRow:
    user_id: int
    item_id: int
    day: int


@dataclass
class Dataset:
    users: list[UserRow]
    creators: list[CreatorRow]
    items: list[ItemRow]
    interactions: list[InteractionRow]
    genres: tuple[str, ...] = DEFAULT_GENRES

    @property
    def n_genres(self) -> int:
        return len(self.genres)

    def items_of_creator(self, creator_id: int) -> list[ItemRow]:
        return [it for it in self.items if it.creator_id == creator_id]

    def to_dir(self, path: str | Path) -> None:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        with open(path / "users.csv", "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["user_id", "name"])
            for u in self.users:
                w.writerow([u.user_id, u.name])
        with open(path / "creators.csv", "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["creator_id", "name", "followers"])
            for c in self.creators:
                w.writerow([c.creator_id, c.name, c.followers])
        with open(path / "items.csv", "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["item_id", "creator_id", "genre", "title", "tags", "description", "created_day"])
            for it in self.items:
                w.writerow(
                    [it.item_id, it.creator_id, self.genres[it.genre], it.title,
                     "|".join(it.tags), it.description, it.created_day]
                )
        with open(path / "interactions.csv", "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["user_id", "item_id", "day"])
            for r in self.interactions:
                w.writerow([r.user_id, r.item_id, r.day])


def _read_rows(path: Path, required: list[str]) -> list[dict[str, str]]:
    if not path.exists():
        raise SchemaError(f"missing record file {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"{path.name}: missing column {col!r}")
        return list(reader)


def load_dataset(path: str | Path, genres: tuple[str, ...] = DEFAULT_GENRES) -> Dataset:
    """Load and cross-validate the four record files under `path`."""
    path = Path(path)
    genre_index = {g: i for i, g in enumerate(genres)}

    try:
        user_rows = _read_rows(path / "users.csv", ["user_id", "name"])
        creator_rows = _read_rows(path / "creators.csv", ["creator_id", "name", "followers"])
        item_rows = _read_rows(
            path / "items.csv",
            ["item_id", "creator_id", "genre", "title", "tags", "description", "created_day"],
        )
        inter_rows = _read_rows(path / "interactions.csv", ["user_id", "item_id", "day"])
        users = [UserRow(int(r["user_id"]), r["name"]) for r in user_rows]
        creators = [CreatorRow(int(r["creator_id"]), r["name"], int(r["followers"])) for r in creator_rows]
    except ValueError as e:
        raise SchemaError(f"non-numeric id field: {e}") from e

    if not users or not creators or not item_rows:
        raise EmptyDataset(f"dataset at {path} has an empty record file")

    creator_ids = {c.creator_id for c in creators}
    items: list[ItemRow] = []
    for r in item_rows:
        genre_name = r["genre"]
        if genre_name not in genre_index:
            raise SchemaError(f"items.csv: genre {genre_name!r} outside the vocabulary")
        try:
            item = ItemRow(
                item_id=int(r["item_id"]),
                creator_id=int(r["creator_id"]),
                genre=genre_index[genre_name],
                title=r["title"],
                tags=tuple(t for t in r["tags"].split("|") if t),
                description=r["description"],
                created_day=int(r["created_day"]),
            )
        except ValueError as e:
            raise SchemaError(f"items.csv: {e}") from e
        if item.creator_id not in creator_ids:
            raise DanglingRef(f"item {item.item_id} references unknown creator {item.creator_id}")
        items.append(item)

    user_ids = {u.user_id for u in users}
    item_ids = {it.item_id for it in items}
    interactions: list[InteractionRow] = []
    for r in inter_rows:
        try:
            row = InteractionRow(int(r["user_id"]), int(r["item_id"]), int(r["day"]))
        except ValueError as e:
            raise SchemaError(f"interactions.csv: {e}") from e
        if row.user_id not in user_ids:
            raise DanglingRef(f"interaction references unknown user {row.user_id}")
        if row.item_id not in item_ids:
            raise DanglingRef(f"interaction references unknown item {row.item_id}")
        interactions.append(row)

    return Dataset(users=users, creators=creators, items=items, interactions=interactions, genres=genres)


# ---------------------------------------------------------------------------
# Seed profiles


@dataclass
class CreatorSeed:
    creator_id: int
    name: str
    followers: int
    history: list[ItemRow]
    activity: float                      # items per day
    skill: np.ndarray                    # simplex over genres
    audience: dict[int, float]           # genre -> mean interaction count; absent = unknown


@dataclass
class UserSeed:
    user_id: int
    name: str
    preference: np.ndarray               # simplex over genres
    activity: float                      # visit probability per step, in [0, 1]


def init_creator_seeds(d: Dataset) -> list[CreatorSeed]:
    """Derive per-creator activity, skill belief, and audience belief.

    Skill is the per-genre share of the creator's historical items; audience
    is the mean interaction count of their historical items per genre, marked
    unknown for genres never created. Creators with no history fall back to a
    uniform skill, an all-unknown audience, and the population median activity.
    """
    G = d.n_genres
    counts_per_item: dict[int, int] = {}
    for r in d.interactions:
        counts_per_item[r.item_id] = counts_per_item.get(r.item_id, 0) + 1

    by_creator: dict[int, list[ItemRow]] = {c.creator_id: [] for c in d.creators}
    for it in d.items:
        by_creator[it.creator_id].append(it)

    activities = {}
    for c in d.creators:
        history = by_creator[c.creator_id]
        if history:
            days = [it.created_day for it in history]
            span = max(days) - min(days) + 1
            activities[c.creator_id] = len(history) / span
    median_activity = float(np.median(list(activities.values()))) if activities else 1.0

    seeds = []
    for c in d.creators:
        history = by_creator[c.creator_id]
        skill = np.zeros(G)
        audience: dict[int, float] = {}
        if history:
            for it in history:
                skill[it.genre] += 1
            skill /= skill.sum()
            for g in range(G):
                genre_items = [it for it in history if it.genre == g]
                if genre_items:
                    audience[g] = float(
                        np.mean([counts_per_item.get(it.item_id, 0) for it in genre_items])
                    )
            activity = activities[c.creator_id]
        else:
            skill[:] = 1.0 / G
            activity = median_activity
        seeds.append(
            CreatorSeed(
                creator_id=c.creator_id,
                name=c.name,
                followers=c.followers,
                history=history,
                activity=activity,
                skill=skill,
                audience=audience,
            )
        )
    return seeds


def init_user_seeds(d: Dataset) -> list[UserSeed]:
    """Derive per-user genre preferences and activity levels.

    Preference is the add-alpha smoothed genre histogram of the user's
    interacted items; activity is interactions-per-day normalized by the
    dataset maximum. Users with no history get a uniform preference and the
    population median activity.
    """
    G = d.n_genres
    genre_of = {it.item_id: it.genre for it in d.items}
    by_user: dict[int, list[InteractionRow]] = {u.user_id: [] for u in d.users}
    for r in d.interactions:
        by_user[r.user_id].append(r)

    rates = {}
    for u in d.users:
        rows = by_user[u.user_id]
        if rows:
            days = [r.day for r in rows]
            span = max(days) - min(days) + 1
            rates[u.user_id] = len(rows) / span
    max_rate = max(rates.values()) if rates else 0.0
    median_rate = float(np.median(list(rates.values()))) if rates else 0.0

    seeds = []
    for u in d.users:
        rows = by_user[u.user_id]
        if rows:
            hist = np.zeros(G)
            for r in rows:
                hist[genre_of[r.item_id]] += 1
            pref = (hist + PREF_SMOOTHING) / (hist.sum() + PREF_SMOOTHING * G)
            activity = rates[u.user_id] / max_rate
        else:
            pref = np.full(G, 1.0 / G)
            activity = median_rate / max_rate if max_rate > 0 else 0.5
        seeds.append(UserSeed(user_id=u.user_id, name=u.name, preference=pref, activity=activity))
    return seeds


# ---------------------------------------------------------------------------
# Synthetic datasets


@dataclass
class SynthParams:
    """Knobs for the synthetic generator; desk-scale stand-in data."""

    n_users: int = 100
    n_creators: int = 50
    n_genres: int = 14
    n_days: int = 60
    items_per_creator: int = 15
    interactions_per_user: int = 30
    genre_skew: float = 1.0            # power-law exponent of genre popularity
    genre_concentration: float = 12.0  # higher = creators focus on fewer genres
    activity_skew: float = 1.0         # power-law exponent of creator output
    activity_floor: float = 0.05       # tail output as a fraction of the head's
    seed: int = 0

    @classmethod
    def from_file(cls, path) -> "SynthParams":
        pairs = read_kv_file(path)
        valid = {f.name for f in fields(cls)}
        kwargs = {}
        for key, raw in pairs.items():
            if key not in valid:
                raise InvalidParams(f"unknown synth param {key!r}")
            kind = type(getattr(cls(), key))
            try:
                kwargs[key] = kind(raw)
            except ValueError as e:
                raise InvalidParams(f"bad value for {key}: {e}") from e
        params = cls(**kwargs)
        params.validate()
        return params

    def validate(self) -> None:
        checks = [
            (self.n_users >= 1, "n_users must be >= 1"),
            (self.n_creators >= 1, "n_creators must be >= 1"),
            (1 <= self.n_genres <= len(DEFAULT_GENRES), f"n_genres must be in [1, {len(DEFAULT_GENRES)}]"),
            (self.n_days >= 1, "n_days must be >= 1"),
            (self.items_per_creator >= 1, "items_per_creator must be >= 1"),
            (self.interactions_per_user >= 0, "interactions_per_user must be >= 0"),
            (self.genre_skew >= 0.0, "genre_skew must be >= 0"),
            (self.genre_concentration > 0.0, "genre_concentration must be > 0"),
            (self.activity_skew >= 0.0, "activity_skew must be >= 0"),
            (0.0 <= self.activity_floor <= 1.0, "activity_floor must be in [0, 1]"),
            (self.seed >= 0, "seed must be >= 0"),
        ]
        for ok, message in checks:
            if not ok:
                raise InvalidParams(message)


def synth_dataset(params: SynthParams, rng: np.random.Generator) -> Dataset:
    """Generate a reproducible synthetic dataset.

    Creator output follows a power law (a few prolific creators, a long tail),
    genre popularity follows a power law with exponent `genre_skew`, and each
    creator's genre mix is a Dirichlet draw sharpened by `genre_concentration`.
    """
    params.validate()
    p = params
    G = p.n_genres

    genre_pop = (np.arange(G, dtype=float) + 1.0) ** (-p.genre_skew)
    genre_pop /= genre_pop.sum()

    creators = [CreatorRow(c, f"creator{c:03d}", int(rng.lognormal(6.0, 1.5))) for c in range(p.n_creators)]
    users = [UserRow(u, f"user{u:04d}") for u in range(p.n_users)]

    creator_weights = (np.arange(p.n_creators, dtype=float) + 1.0) ** (-p.activity_skew)
    creator_weights = np.maximum(creator_weights, p.activity_floor)
    creator_weights /= creator_weights.sum()
    item_counts = rng.multinomial(p.n_creators * p.items_per_creator, creator_weights)

    alpha = np.maximum(genre_pop * G / p.genre_concentration, 1e-6)
    items: list[ItemRow] = []
    items_by_genre: dict[int, list[int]] = {g: [] for g in range(G)}
    for c in range(p.n_creators):
        mix = rng.dirichlet(alpha)
        genres = rng.choice(G, size=item_counts[c], p=mix)
        days = np.sort(rng.integers(1, p.n_days + 1, size=item_counts[c]))
        for k, (g, day) in enumerate(zip(genres, days)):
            item_id = len(items)
            slug = DEFAULT_GENRES[g].split(" ")[0].lower().strip(",&")
            items.append(
                ItemRow(
                    item_id=item_id,
                    creator_id=c,
                    genre=int(g),
                    title=f"{creators[c].name} clip {k + 1}",
                    tags=(slug, f"{slug}-style-{k % 3}"),
                    description=f"A {DEFAULT_GENRES[g]} upload by {creators[c].name}.",
                    created_day=int(day),
                )
            )
            items_by_genre[int(g)].append(item_id)

    user_weights = (np.arange(p.n_users, dtype=float) + 1.0) ** (-1.0)
    user_weights /= user_weights.sum()
    inter_counts = rng.multinomial(p.n_users * p.interactions_per_user, user_weights)
    all_item_ids = np.arange(len(items))
    interactions: list[InteractionRow] = []
    for u in range(p.n_users):
        pref = rng.dirichlet(np.maximum(genre_pop * G / 2.0, 1e-6))
        genres = rng.choice(G, size=inter_counts[u], p=pref)
        for g in genres:
            candidates = items_by_genre[int(g)]
            item_id = int(rng.choice(candidates)) if candidates else int(rng.choice(all_item_ids))
            day = int(rng.integers(items[item_id].created_day, p.n_days + 1))
            interactions.append(InteractionRow(user_id=u, item_id=item_id, day=day))

    return Dataset(users=users, creators=creators, items=items, interactions=interactions)
