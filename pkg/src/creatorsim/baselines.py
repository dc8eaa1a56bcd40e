"""Published creator-behavior baselines plus a uniform-random policy.

Each baseline keeps a per-creator creation-probability vector over genres (a
simplex point) and picks the next genre from it:

* feedback-gradient: nudge the strategy along normalized click feedback,
* better-response: try a random zero-sum perturbation, keep it only if it
  improves the strategy's expected utility against current audience beliefs,
* like-sampling: sample the genre proportionally to accumulated clicks,
* random: uniform over all genres.

All of them share the creator policy interface (decide + make_content) with
the default agent, reusing the template content generator.
"""

from __future__ import annotations

import numpy as np

from .core import SimError
from .creator import (
    ActionKind,
    CreatedContent,
    CreatorRuntime,
    ExploreAction,
    template_content,
)


class EmptyGenres(SimError):
    """Choice requested from an empty genre set."""


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Clamp negatives to zero and renormalize; uniform if everything clamps."""
    w = np.maximum(v, 0.0)
    total = w.sum()
    if total <= 0:
        return np.full(len(v), 1.0 / len(v))
    return w / total


def cfd_step(s: np.ndarray, feedback: np.ndarray, lr: float) -> np.ndarray:
    """Move the strategy along the normalized click-count gradient."""
    feedback = np.asarray(feedback, dtype=float)
    total = feedback.sum()
    if total <= 0 or lr == 0:
        return s.copy()
    return project_to_simplex(s + lr * feedback / total)


def lbr_step(
    s: np.ndarray,
    utility_of,
    step_size: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Try one random zero-sum perturbation; keep it only if strictly better."""
    if step_size == 0:
        return s.copy()
    direction = rng.normal(size=len(s))
    direction -= direction.mean()
    candidate = project_to_simplex(s + step_size * direction)
    if utility_of(candidate) > utility_of(s):
        return candidate
    return s.copy()


def simuline_choose(likes: np.ndarray, rng: np.random.Generator) -> int:
    """Sample a genre proportionally to like counts; uniform when all zero."""
    likes = np.asarray(likes, dtype=float)
    if (likes < 0).any():
        raise ValueError("negative like counts")
    total = likes.sum()
    if total <= 0:
        return int(rng.integers(0, len(likes)))
    return int(rng.choice(len(likes), p=likes / total))


def random_choose(genres, rng: np.random.Generator) -> int:
    genres = list(genres)
    if not genres:
        raise EmptyGenres("no genres to choose from")
    return int(genres[rng.integers(0, len(genres))])


# ---------------------------------------------------------------------------
# Policy wrappers


def _per_genre_clicks(state: CreatorRuntime) -> np.ndarray:
    counts = np.zeros(state.n_genres)
    for entry in state.creations:
        counts[entry.genre] += state.feedback.items[entry.item_id].clicks
    return counts


def _action_for(state: CreatorRuntime, genre: int) -> ExploreAction:
    created = any(entry.genre == genre for entry in state.creations)
    kind = ActionKind.EXPLOIT if created else ActionKind.EXPLORE
    return ExploreAction(kind, genre)


class _BaselinePolicy:
    """Shared state handling: one strategy vector per creator."""

    def __init__(self, genre_names, memory_k: int = 3):
        self.genre_names = tuple(genre_names)
        self.memory_k = memory_k
        self.strategies: dict[int, np.ndarray] = {}

    def register(self, state: CreatorRuntime) -> None:
        skill = np.asarray(state.beliefs.skill, dtype=float)
        self.strategies[state.creator_id] = project_to_simplex(skill.copy())

    def strategy(self, state: CreatorRuntime) -> np.ndarray:
        if state.creator_id not in self.strategies:
            self.register(state)
        return self.strategies[state.creator_id]

    def make_content(self, state: CreatorRuntime, action: ExploreAction, n: int) -> CreatedContent:
        return template_content(state, action, self.genre_names, self.memory_k, n)


class CfdPolicy(_BaselinePolicy):
    name = "cfd"

    def __init__(self, genre_names, lr: float = 0.1, memory_k: int = 3):
        super().__init__(genre_names, memory_k)
        self.lr = lr
        self._click_snapshots: dict[int, np.ndarray] = {}

    def decide(self, state: CreatorRuntime, n: int, rng: np.random.Generator) -> ExploreAction:
        s = self.strategy(state)
        clicks = _per_genre_clicks(state)
        snapshot = self._click_snapshots.get(state.creator_id, np.zeros(state.n_genres))
        delta = clicks - snapshot
        self._click_snapshots[state.creator_id] = clicks
        s = cfd_step(s, delta, self.lr)
        self.strategies[state.creator_id] = s
        genre = int(rng.choice(len(s), p=s))
        return _action_for(state, genre)


class LbrPolicy(_BaselinePolicy):
    name = "lbr"

    def __init__(self, genre_names, step_size: float = 0.1, memory_k: int = 3):
        super().__init__(genre_names, memory_k)
        self.step_size = step_size

    def decide(self, state: CreatorRuntime, n: int, rng: np.random.Generator) -> ExploreAction:
        s = self.strategy(state)
        audience = np.zeros(state.n_genres)
        for g, value in state.beliefs.audience.items():
            audience[g] = value

        def utility_of(strategy: np.ndarray) -> float:
            return float(strategy @ audience)

        s = lbr_step(s, utility_of, self.step_size, rng)
        self.strategies[state.creator_id] = s
        genre = int(rng.choice(len(s), p=s))
        return _action_for(state, genre)


class SimulinePolicy(_BaselinePolicy):
    name = "simuline"

    def decide(self, state: CreatorRuntime, n: int, rng: np.random.Generator) -> ExploreAction:
        genre = simuline_choose(_per_genre_clicks(state), rng)
        return _action_for(state, genre)


class RandomPolicy(_BaselinePolicy):
    name = "random"

    def decide(self, state: CreatorRuntime, n: int, rng: np.random.Generator) -> ExploreAction:
        genre = random_choose(range(state.n_genres), rng)
        return _action_for(state, genre)
