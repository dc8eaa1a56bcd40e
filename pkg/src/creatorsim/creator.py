"""Creator agents: memories, beliefs, utility, the explore/exploit decision,
content creation, and departure.

A creator only ever sees feedback on its own items (collected upstream via
the log's ownership-checked view), stores it in a feedback memory, and
distills it into two beliefs: skill (its per-genre creation share) and
audience (its per-genre estimate of receptiveness, the mean utility of its
own items in that genre, unknown for genres never tried). The thinking step
is pluggable; the default rule-based policy explores more after poor rewards
and exploits more after good ones, with the explore probability falling
linearly in the reward percentile of the latest item.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import SimError


class NotOwned(SimError):
    """Operation on an item the creator does not own."""


class ForeignItem(SimError):
    """Feedback offered for an item outside the creator's own set."""


class FutureItem(SimError):
    """Utility queried for a step before the item existed."""


class DeadCreator(SimError):
    """Action requested from a departed creator."""


class ActionKind(Enum):
    EXPLORE = "EXPLORE"
    EXPLOIT = "EXPLOIT"


@dataclass(frozen=True)
class ExploreAction:
    kind: ActionKind
    genre: int


@dataclass(frozen=True)
class CreatedContent:
    title: str
    genre: int
    tags: tuple[str, ...]
    description: str


@dataclass
class ItemFeedback:
    created_step: int
    exposures: int = 0
    clicks: int = 0


@dataclass
class FeedbackMemory:
    """Cumulative per-item exposure/click counters for owned items only."""

    items: dict[int, ItemFeedback] = field(default_factory=dict)
    last_refresh: int = -1


@dataclass(frozen=True)
class CreationEntry:
    item_id: int
    genre: int
    title: str
    tags: tuple[str, ...]
    description: str
    step: int


@dataclass
class Beliefs:
    skill: np.ndarray                      # simplex over genres
    audience: dict[int, float]             # genre -> mean utility; absent = unknown


@dataclass
class CreatorRuntime:
    creator_id: int
    name: str
    identity: str
    motivation: str
    activity: float                        # items per day from the seed profile
    create_prob: float                     # activity / population max
    n_genres: int
    feedback: FeedbackMemory
    creations: list[CreationEntry]
    beliefs: Beliefs
    departure_threshold: int = 5
    beta: float = 0.5
    consecutive_zero_click: int = 0
    alive: bool = True
    creation_count: int = 0                # simulated creations, for title numbering
    pending_item: int | None = None        # last creation awaiting its outcome

    def owned(self) -> set[int]:
        return set(self.feedback.items.keys())

    def last_item(self) -> int | None:
        return self.creations[-1].item_id if self.creations else None


# ---------------------------------------------------------------------------
# Memory updates and utility


def update_feedback_memory(state: CreatorRuntime, step_events, n: int) -> None:
    """Fold one step of owned-item feedback into the cumulative counters.

    `step_events` is a list of (item_id, exposures, clicks) obtained through
    the ownership-checked log view.
    """
    for item_id, exposures, clicks in step_events:
        fb = state.feedback.items.get(item_id)
        if fb is None:
            raise ForeignItem(f"creator {state.creator_id} got feedback for foreign item {item_id}")
        fb.exposures += exposures
        fb.clicks += clicks
    state.feedback.last_refresh = n


def item_utility(state: CreatorRuntime, item_id: int, n: int) -> float:
    """Time-averaged blend of an item's exposures and clicks since creation.

    z = (beta * exposures + (1 - beta) * clicks) / (n - created_step + 1).
    """
    fb = state.feedback.items.get(item_id)
    if fb is None:
        raise NotOwned(f"creator {state.creator_id} does not own item {item_id}")
    if n < fb.created_step:
        raise FutureItem(f"item {item_id} created at step {fb.created_step}, queried at {n}")
    weighted = state.beta * fb.exposures + (1.0 - state.beta) * fb.clicks
    return weighted / (n - fb.created_step + 1)


def update_beliefs(state: CreatorRuntime, n: int) -> None:
    """Refresh skill and audience beliefs from the current memories."""
    G = state.n_genres
    counts = np.zeros(G)
    utilities: dict[int, list[float]] = {}
    for entry in state.creations:
        counts[entry.genre] += 1
        utilities.setdefault(entry.genre, []).append(item_utility(state, entry.item_id, n))
    if counts.sum() > 0:
        state.beliefs.skill = counts / counts.sum()
    state.beliefs.audience = {g: float(np.mean(vals)) for g, vals in utilities.items()}


def register_creation_outcome(state: CreatorRuntime, item_id: int, clicks_in_window: int) -> None:
    """Advance or reset the zero-click streak; departure at the threshold."""
    if not state.alive:
        return
    if item_id not in state.feedback.items:
        raise NotOwned(f"creator {state.creator_id} does not own item {item_id}")
    if clicks_in_window == 0:
        state.consecutive_zero_click += 1
        if state.consecutive_zero_click >= state.departure_threshold:
            state.alive = False
    else:
        state.consecutive_zero_click = 0


def wants_to_create(state: CreatorRuntime, rng: np.random.Generator) -> bool:
    """Bernoulli draw on the creator's max-normalized activity."""
    if not state.alive:
        raise DeadCreator(f"creator {state.creator_id} has departed")
    return bool(rng.random() < state.create_prob)


# ---------------------------------------------------------------------------
# The rule-based thinking policy


def reward_percentile(state: CreatorRuntime, n: int) -> float:
    """Rank of the latest item's utility within the creator's own history.

    Midrank convention for ties; 0.5 when there is nothing to compare against.
    """
    last = state.last_item()
    if last is None:
        return 0.5
    z_last = item_utility(state, last, n)
    others = [
        item_utility(state, entry.item_id, n)
        for entry in state.creations
        if entry.item_id != last
    ]
    if not others:
        return 0.5
    below = sum(1 for z in others if z < z_last)
    ties = sum(1 for z in others if z == z_last)
    return (below + 0.5 * ties) / len(others)


def explore_probability(q: float, p_max: float = 0.40, p_min: float = 0.05) -> float:
    """Linear map from reward percentile to explore probability."""
    return p_max - (p_max - p_min) * q


def rule_based_decide(
    state: CreatorRuntime,
    n: int,
    rng: np.random.Generator,
    p_max: float = 0.40,
    p_min: float = 0.05,
) -> ExploreAction:
    """Default explore/exploit decision.

    Explores with probability falling linearly in the latest reward
    percentile. Exploit picks the known genre maximizing audience * skill
    (ties to the lowest genre id); explore samples uniformly among unknown
    genres, degrading to the least-created genre once all are known.
    """
    if not state.alive:
        raise DeadCreator(f"creator {state.creator_id} has departed")
    G = state.n_genres
    q = reward_percentile(state, n)
    p_explore = explore_probability(q, p_max, p_min)
    known = sorted(state.beliefs.audience.keys())
    explore = rng.random() < p_explore or not known

    if not explore:
        best_g, best_v = None, -np.inf
        for g in known:
            v = state.beliefs.audience[g] * state.beliefs.skill[g]
            if v > best_v:
                best_g, best_v = g, v
        return ExploreAction(ActionKind.EXPLOIT, best_g)

    unknown = [g for g in range(G) if g not in state.beliefs.audience]
    if unknown:
        genre = int(unknown[rng.integers(0, len(unknown))])
    else:
        counts = np.zeros(G)
        for entry in state.creations:
            counts[entry.genre] += 1
        genre = int(np.argmin(counts))
    return ExploreAction(ActionKind.EXPLORE, genre)


def retrieve_creation_memory(
    state: CreatorRuntime, action: ExploreAction, k: int, n: int
) -> list[CreationEntry]:
    """Top-k past creations by relevance * recency.

    Relevance is 1 for the action's genre and 0.25 otherwise; recency decays
    as (n - step + 1) ** -0.5. Ties prefer the newer item.
    """
    def score(entry: CreationEntry) -> float:
        relevance = 1.0 if entry.genre == action.genre else 0.25
        return relevance * (n - entry.step + 1) ** -0.5

    ordered = sorted(
        state.creations,
        key=lambda e: (-score(e), -e.step, -e.item_id),
    )
    return ordered[:k]


def template_content(
    state: CreatorRuntime,
    action: ExploreAction,
    genre_names,
    memory_k: int = 3,
    n: int = 0,
) -> CreatedContent:
    """Deterministic template creation for the decided genre.

    Tags reuse the most frequent tags among retrieved same-genre memories,
    falling back to the genre name.
    """
    genre_name = genre_names[action.genre]
    counter = state.creation_count + 1
    title = f"{state.name} — {genre_name} #{counter}"
    retrieved = retrieve_creation_memory(state, action, memory_k, n)
    tag_counts: dict[str, int] = {}
    for entry in retrieved:
        if entry.genre != action.genre:
            continue
        for tag in entry.tags:
            tag_counts[tag] = tag_counts.get(tag, 0) + 1
    if tag_counts:
        ranked = sorted(tag_counts.items(), key=lambda kv: (-kv[1], kv[0]))
        tags = tuple(tag for tag, _ in ranked[:3])
    else:
        tags = (genre_name,)
    description = (
        f"{state.name}, {state.identity} creating for {state.motivation}, "
        f"presents new {genre_name} content."
    )
    return CreatedContent(title=title, genre=action.genre, tags=tags, description=description)


class RuleBasedPolicy:
    """The default creator policy: rule-based thinking plus template content."""

    name = "creagent"

    def __init__(self, genre_names, p_max: float = 0.40, p_min: float = 0.05, memory_k: int = 3):
        self.genre_names = tuple(genre_names)
        self.p_max = p_max
        self.p_min = p_min
        self.memory_k = memory_k

    def decide(self, state: CreatorRuntime, n: int, rng: np.random.Generator) -> ExploreAction:
        return rule_based_decide(state, n, rng, self.p_max, self.p_min)

    def make_content(self, state: CreatorRuntime, action: ExploreAction, n: int) -> CreatedContent:
        return template_content(state, action, self.genre_names, self.memory_k, n)
