"""Run orchestration: the per-step phase loop, the snapshot/commit barrier,
artifact persistence, and post-hoc reporting.

Each step executes CREATE, POOL, RETRAIN (on schedule), SERVE, FEEDBACK,
BELIEFS, and LIFECYCLE in that order. Agents read the previous step's
committed world and mutate only their own state; cross-agent effects (the
event log, the catalog, exposure ledgers, fairness duals) are committed at
phase barriers in stable id order, so results are bit-identical for any
worker count. Metrics are always recomputed from the persisted artifacts,
which makes every run replayable and every report reproducible.
"""

from __future__ import annotations

import json
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import core
from .core import (
    Catalog,
    DataError,
    EventLog,
    EventLogError,
    SimConfig,
    SimError,
    stream,
)
from .creator import (
    Beliefs,
    CreationEntry,
    CreatorRuntime,
    FeedbackMemory,
    ItemFeedback,
    RuleBasedPolicy,
    item_utility,
    register_creation_outcome,
    reward_percentile,
    update_beliefs,
    update_feedback_memory,
    wants_to_create,
)
from .baselines import CfdPolicy, LbrPolicy, RandomPolicy, SimulinePolicy
from .ingest import Dataset, SynthParams, init_creator_seeds, init_user_seeds, load_dataset, synth_dataset
from .metrics import (
    EmptyItems,
    MetricsReport,
    NoExposures,
    alignment_from_distributions,
    content_genre_diversity,
    creator_retention_rate,
    explore_exploit_table,
    genre_histogram,
    normalized_reward_curve,
    per_creator_entropies,
    total_user_welfare,
)
from .recsys import CandidatePool, build_candidate_pool, make_ranker, rank_scored, serve_session
from .rerank import ExposureLedger, fairco_rerank, fairrec_rerank, mmr_rerank, pmmf_rerank
from .users import UserRuntime, end_step, is_active


class ArtifactError(DataError):
    pass


class MissingArtifact(ArtifactError):
    """A required run file is absent."""


class CorruptLog(ArtifactError):
    """A persisted artifact fails its own consistency rules."""


class EmptyInput(SimError):
    """compare() called without any run directories."""


EVENTS_FILE = "events.csv"
ITEMS_FILE = "items.csv"
TRACE_FILE = "creator_trace.csv"
TIMESERIES_FILE = "timeseries.csv"
CONFIG_FILE = "config.txt"
METRICS_FILE = "metrics.json"
SUMMARY_FILE = "dataset_summary.json"

TRACE_HEADER = "step,creator_id,action_kind,genre,item_id,utility_of_last,alive,reward_pct"
TIMESERIES_HEADER = "step,tuw_cum,alive_creators,cgd_window,step_seconds,agent_seconds"


@dataclass
class RunArtifacts:
    out_dir: Path
    seed: int
    report: dict
    tuw_incremental: int

    @property
    def events_path(self) -> Path:
        return self.out_dir / EVENTS_FILE

    @property
    def trace_path(self) -> Path:
        return self.out_dir / TRACE_FILE

    @property
    def metrics_path(self) -> Path:
        return self.out_dir / METRICS_FILE

    @property
    def timeseries_path(self) -> Path:
        return self.out_dir / TIMESERIES_FILE

    @property
    def config_path(self) -> Path:
        return self.out_dir / CONFIG_FILE


def _map_workers(fn, items, workers: int) -> list:
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _deterministic_identity(seed, genres) -> str:
    if seed.history:
        top = int(np.argmax(seed.skill))
        return f"{genres[top]} enthusiast"
    return "new creator"


def _build_policy(cfg: SimConfig, genres, transport=None):
    rule = RuleBasedPolicy(
        genres,
        p_max=cfg.creagent_p_explore_max,
        p_min=cfg.creagent_p_explore_min,
        memory_k=cfg.creagent_memory_k,
    )
    if cfg.creator_policy == "creagent":
        return rule
    if cfg.creator_policy == "creagent_llm":
        from .llm import LlmConfig, LlmPolicy

        llm_cfg = LlmConfig(
            endpoint=cfg.llm_endpoint,
            model=cfg.llm_model,
            temperature=cfg.llm_temperature,
            max_tokens=cfg.llm_max_tokens,
            timeout=cfg.llm_timeout,
            retries=cfg.llm_retries,
        )
        return LlmPolicy(llm_cfg, genres, fallback=rule, transport=transport)
    if cfg.creator_policy == "cfd":
        return CfdPolicy(genres, lr=cfg.cfd_lr, memory_k=cfg.creagent_memory_k)
    if cfg.creator_policy == "lbr":
        return LbrPolicy(genres, step_size=cfg.lbr_step_size, memory_k=cfg.creagent_memory_k)
    if cfg.creator_policy == "simuline":
        return SimulinePolicy(genres, memory_k=cfg.creagent_memory_k)
    if cfg.creator_policy == "random":
        return RandomPolicy(genres, memory_k=cfg.creagent_memory_k)
    raise SimError(f"unknown creator policy {cfg.creator_policy!r}")


class _World:
    """Mutable run state; built once from (config, dataset)."""

    def __init__(self, cfg: SimConfig, data: Dataset, transport=None):
        self.cfg = cfg
        self.genres = data.genres
        G = len(self.genres)

        users_kept = sorted(data.users, key=lambda u: u.user_id)[: cfg.n_users]
        creators_kept = sorted(data.creators, key=lambda c: c.creator_id)[: cfg.n_creators]
        kept_users = {u.user_id for u in users_kept}
        kept_creators = {c.creator_id for c in creators_kept}
        items_kept = [it for it in data.items if it.creator_id in kept_creators]
        kept_items = {it.item_id for it in items_kept}
        inters_kept = [
            r for r in data.interactions if r.user_id in kept_users and r.item_id in kept_items
        ]
        self.dataset = Dataset(users_kept, creators_kept, items_kept, inters_kept, data.genres)

        creator_seeds = init_creator_seeds(self.dataset)
        user_seeds = init_user_seeds(self.dataset)
        user_index = {u.user_id: i for i, u in enumerate(users_kept)}
        creator_index = {c.creator_id: i for i, c in enumerate(creators_kept)}

        # dataset items enter the catalog at step 0 in historical order
        self.catalog = Catalog()
        item_index = {}
        for it in sorted(items_kept, key=lambda x: (x.created_day, x.item_id)):
            rec = self.catalog.add(
                creator_index[it.creator_id], it.genre, it.title, it.tags, it.description, 0
            )
            item_index[it.item_id] = rec.item_id

        self.clicks: list[tuple[int, int, int]] = [
            (user_index[r.user_id], item_index[r.item_id], 0) for r in inters_kept
        ]
        counts_per_item: dict[int, int] = defaultdict(int)
        for _, item, _ in self.clicks:
            counts_per_item[item] += 1

        follower_median = float(np.median([c.followers for c in creators_kept]))
        eta = max((s.activity for s in creator_seeds), default=0.0)
        self.creators: list[CreatorRuntime] = []
        for seed in creator_seeds:
            cid = creator_index[seed.creator_id]
            feedback = FeedbackMemory()
            creations = []
            for it in sorted(seed.history, key=lambda x: (x.created_day, x.item_id)):
                new_id = item_index[it.item_id]
                count = counts_per_item.get(new_id, 0)
                feedback.items[new_id] = ItemFeedback(created_step=0, exposures=count, clicks=count)
                creations.append(CreationEntry(new_id, it.genre, it.title, it.tags, it.description, 0))
            creations.sort(key=lambda e: (e.step, e.item_id))
            self.creators.append(
                CreatorRuntime(
                    creator_id=cid,
                    name=seed.name,
                    identity=_deterministic_identity(seed, self.genres),
                    motivation="profit" if seed.followers > follower_median else "sharing",
                    activity=seed.activity,
                    create_prob=seed.activity / eta if eta > 0 else 0.0,
                    n_genres=G,
                    feedback=feedback,
                    creations=creations,
                    beliefs=Beliefs(skill=seed.skill.copy(), audience=dict(seed.audience)),
                    departure_threshold=cfg.departure_threshold,
                    beta=cfg.beta,
                )
            )

        self.users = [
            UserRuntime(user_id=user_index[s.user_id], preference=s.preference, activity=s.activity)
            for s in user_seeds
        ]
        self.population_preference = np.mean([u.preference for u in self.users], axis=0)

        self.ranker = make_ranker(
            cfg.ranker,
            n_users=len(self.users),
            seed=cfg.seed,
            dim=cfg.mf_dim,
            lr=cfg.mf_lr,
            epochs=cfg.mf_epochs,
            l2=cfg.mf_l2,
            pop_window=cfg.pop_window,
        )
        if self.clicks or cfg.ranker in ("random", "pop"):
            self.ranker.retrain(self.clicks, self.catalog, 0)

        self.policy = _build_policy(cfg, self.genres, transport)
        if hasattr(self.policy, "register"):
            for state in self.creators:
                self.policy.register(state)
        if cfg.creator_policy == "creagent_llm":
            self._summarize_profiles(creator_seeds, transport)
        if cfg.creator_full_information:
            for state in self.creators:
                state.beliefs.audience = {
                    g: float(self.population_preference[g]) for g in range(G)
                }

        self.log = EventLog()
        self.ledger = ExposureLedger()
        self.duals: dict[int, float] = {}
        self.creator_activity_rng = [stream(cfg.seed, "creator_activity", c.creator_id) for c in self.creators]
        self.creator_policy_rng = [stream(cfg.seed, "creator_policy", c.creator_id) for c in self.creators]
        self.user_rng = [stream(cfg.seed, "user", u.user_id) for u in self.users]
        self.alive_at: dict[int, int] = {0: len(self.creators)}
        self.trace_rows: list[dict] = []
        self.timeseries_rows: list[dict] = []
        self.tuw_incremental = 0
        self._step_events: list = []

    def _summarize_profiles(self, creator_seeds, transport) -> None:
        """Fill profile slots through the completion endpoint where possible."""
        from .llm import summarize_profile_slots

        cfg = self.policy.cfg
        for state, seed in zip(self.creators, creator_seeds):
            recent = seed.history[-1] if seed.history else None
            recent_text = (
                f"title: {recent.title}, genre: {self.genres[recent.genre]}, "
                f"description: {recent.description}"
                if recent
                else "(none yet)"
            )
            skill_text = ", ".join(
                f"{self.genres[g]}: {seed.skill[g]:.2f}" for g in range(len(self.genres))
                if seed.skill[g] > 0
            )
            state.identity, state.motivation = summarize_profile_slots(
                cfg,
                name=state.name,
                followers=seed.followers,
                activity=seed.activity,
                skill_text=skill_text,
                recent_content=recent_text,
                fallback=(state.identity, state.motivation),
                transport=transport,
            )

    # -- phases -------------------------------------------------------------

    def phase_create(self, n: int) -> None:
        cfg = self.cfg

        def think(idx: int):
            state = self.creators[idx]
            if not state.alive:
                return None
            if not wants_to_create(state, self.creator_activity_rng[idx]):
                return None
            if state.pending_item is not None:
                clicks = state.feedback.items[state.pending_item].clicks
                last_utility = item_utility(state, state.pending_item, n)
                register_creation_outcome(state, state.pending_item, clicks)
                state.pending_item = None
                if not state.alive:
                    return ("depart", idx, last_utility)
            q = reward_percentile(state, n)
            last = state.last_item()
            z_last = item_utility(state, last, n) if last is not None else None
            action = self.policy.decide(state, n, self.creator_policy_rng[idx])
            content = self.policy.make_content(state, action, n)
            return ("create", idx, q, z_last, action, content)

        results = _map_workers(think, range(len(self.creators)), cfg.workers)
        for result in results:
            if result is None:
                continue
            if result[0] == "depart":
                _, idx, last_utility = result
                self.trace_rows.append(
                    {
                        "step": n,
                        "creator_id": self.creators[idx].creator_id,
                        "action_kind": "DEPART",
                        "genre": "",
                        "item_id": "",
                        "utility_of_last": f"{last_utility:.10g}",
                        "alive": "false",
                        "reward_pct": "",
                    }
                )
                continue
            _, idx, q, z_last, action, content = result
            state = self.creators[idx]
            rec = self.catalog.add(
                state.creator_id, content.genre, content.title, content.tags, content.description, n
            )
            state.feedback.items[rec.item_id] = ItemFeedback(created_step=n)
            state.creations.append(
                CreationEntry(rec.item_id, content.genre, content.title, content.tags, content.description, n)
            )
            state.creation_count += 1
            state.pending_item = rec.item_id
            self.trace_rows.append(
                {
                    "step": n,
                    "creator_id": state.creator_id,
                    "action_kind": action.kind.value,
                    "genre": content.genre,
                    "item_id": rec.item_id,
                    "utility_of_last": "" if z_last is None else f"{z_last:.10g}",
                    "alive": "true",
                    "reward_pct": f"{q:.10g}",
                }
            )

    def phase_serve(self, n: int, pool) -> None:
        cfg = self.cfg
        K = cfg.list_length
        use_rerank = cfg.reranker != "none" and n >= cfg.warmup
        top_m = cfg.rerank_pool_multiplier * K if use_rerank else K
        alive_ids = [c.creator_id for c in self.creators if c.alive]

        # departed creators' items leave the platform with them
        alive_set = set(alive_ids)
        keep = np.asarray(
            [self.catalog[int(i)].creator_id in alive_set for i in pool.item_ids], dtype=bool
        )
        if not keep.all():
            pool = CandidatePool(
                item_ids=pool.item_ids[keep],
                created_steps=pool.created_steps[keep],
                step=pool.step,
            )

        active: list[int] = []
        for idx, user in enumerate(self.users):
            if is_active(user, self.user_rng[idx]):
                active.append(idx)

        def base_rank(idx: int):
            return rank_scored(self.ranker, self.users[idx].user_id, pool, top_m, self.catalog)

        ranked = _map_workers(base_rank, active, cfg.workers)

        step_events = []
        for idx, pairs in zip(active, ranked):
            scored = [(self.catalog[item], score) for item, score in pairs]
            for rec, score in scored:
                self.ledger.add_relevance(rec.creator_id, score)
            if not use_rerank:
                final = [rec for rec, _ in scored[:K]]
            elif cfg.reranker == "mmr":
                final = mmr_rerank(scored, cfg.mmr_lambda, K)
            elif cfg.reranker == "fairrec":
                final = fairrec_rerank(scored, self.ledger, K, cfg.fairrec_min_share, alive_ids)
            elif cfg.reranker == "fairco":
                final = fairco_rerank(scored, self.ledger, cfg.fairco_lambda, alive_ids)[:K]
            else:
                final, self.duals = pmmf_rerank(
                    scored, self.duals, cfg.pmmf_eta_dual, K, alive_ids, cfg.pmmf_dual_max
                )
            events = serve_session(
                final,
                self.users[idx],
                self.user_rng[idx],
                n,
                alpha_click=cfg.user_alpha_click,
                exit_base=cfg.user_exit_base,
                exit_per_skip=cfg.user_exit_per_skip,
            )
            step_events.extend(events)

        step_events.sort(key=lambda ev: (ev.user, ev.item))
        for ev in step_events:
            self.log.append(ev)
            if ev.clicked:
                self.clicks.append((ev.user, ev.item, n))
                if cfg.warmup <= n <= cfg.n_steps:
                    self.tuw_incremental += 1
            if ev.exposed and n >= cfg.warmup:
                self.ledger.add_exposure(self.catalog[ev.item].creator_id)
        self._step_events = step_events

    def phase_feedback(self, n: int) -> None:
        by_item: dict[int, int] = defaultdict(int)
        for ev in self._step_events:
            by_item[ev.item] += 1
        per_creator: dict[int, list[int]] = defaultdict(list)
        for item in by_item:
            per_creator[self.catalog[item].creator_id].append(item)
        for state in self.creators:
            if not state.alive:
                continue
            owned = state.owned()
            step_list = []
            for item in sorted(per_creator.get(state.creator_id, ())):
                exposures, clicks = core.creator_view(
                    self.log, state.creator_id, owned, item, n, n
                )
                step_list.append((item, exposures, clicks))
            update_feedback_memory(state, step_list, n)

    def phase_beliefs(self, n: int) -> None:
        for state in self.creators:
            if not state.alive:
                continue
            update_beliefs(state, n)
            if self.cfg.creator_full_information:
                state.beliefs.audience = {
                    g: float(self.population_preference[g]) for g in range(len(self.genres))
                }

    def phase_lifecycle(self, n: int, step_seconds: float) -> None:
        cfg = self.cfg
        self.alive_at[n] = sum(1 for c in self.creators if c.alive)
        for user in self.users:
            end_step(user, cfg.user_novelty_decay)
        window_lo = max(1, n - cfg.timeliness_window + 1)
        try:
            cgd_window = content_genre_diversity(
                self.log, lambda i: self.catalog[i].genre, len(self.genres), window_lo, n
            )
            cgd_text = f"{cgd_window:.10g}"
        except NoExposures:
            cgd_text = ""
        n_agents = self.alive_at[n] + len(self.users)
        self.timeseries_rows.append(
            {
                "step": n,
                "tuw_cum": self.tuw_incremental,
                "alive_creators": self.alive_at[n],
                "cgd_window": cgd_text,
                "step_seconds": f"{step_seconds:.6f}",
                "agent_seconds": f"{step_seconds / n_agents:.8f}",
            }
        )

    # -- persistence ----------------------------------------------------------

    def write_artifacts(self, out_dir: Path) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        self.log.to_csv(out_dir / EVENTS_FILE)
        self.catalog.to_csv(out_dir / ITEMS_FILE)
        with open(out_dir / TRACE_FILE, "w", encoding="utf-8", newline="\n") as f:
            f.write(TRACE_HEADER + "\n")
            for row in self.trace_rows:
                f.write(
                    f"{row['step']},{row['creator_id']},{row['action_kind']},{row['genre']},"
                    f"{row['item_id']},{row['utility_of_last']},{row['alive']},{row['reward_pct']}\n"
                )
        with open(out_dir / TIMESERIES_FILE, "w", encoding="utf-8", newline="\n") as f:
            f.write(TIMESERIES_HEADER + "\n")
            for row in self.timeseries_rows:
                f.write(
                    f"{row['step']},{row['tuw_cum']},{row['alive_creators']},"
                    f"{row['cgd_window']},{row['step_seconds']},{row['agent_seconds']}\n"
                )
        (out_dir / CONFIG_FILE).write_text(self.cfg.to_text(), encoding="utf-8")
        ref_items = [(it.creator_id, it.genre) for it in self.dataset.items]
        summary = {
            "genres": list(self.genres),
            "n_creators": len(self.creators),
            "n_users": len(self.users),
            "dataset_genre_counts": genre_histogram((g for _, g in ref_items), len(self.genres)).tolist(),
            "dataset_creator_entropies": per_creator_entropies(ref_items, len(self.genres)),
            "population_preference": self.population_preference.tolist(),
        }
        with open(out_dir / SUMMARY_FILE, "w", encoding="utf-8", newline="\n") as f:
            json.dump(summary, f, sort_keys=True, indent=2)
            f.write("\n")


def run_simulation(
    cfg: SimConfig, data: Dataset | None = None, out_dir: str | Path = "run", transport=None
) -> RunArtifacts:
    """Execute the full step loop and persist all artifacts under `out_dir`."""
    cfg.validate()
    if data is None:
        if cfg.data_dir:
            data = load_dataset(cfg.data_dir)
        else:
            params = SynthParams(
                n_users=cfg.n_users,
                n_creators=cfg.n_creators,
                n_genres=cfg.synth_n_genres,
                n_days=cfg.synth_n_days,
                items_per_creator=cfg.synth_items_per_creator,
                interactions_per_user=cfg.synth_interactions_per_user,
                genre_skew=cfg.synth_genre_skew,
                genre_concentration=cfg.synth_genre_concentration,
                activity_skew=cfg.synth_activity_skew,
                activity_floor=cfg.synth_activity_floor,
                seed=cfg.seed,
            )
            data = synth_dataset(params, stream(cfg.seed, "synth"))
    world = _World(cfg, data, transport)
    for n in range(1, cfg.n_steps + 1):
        started = time.perf_counter()
        world.phase_create(n)
        pool = build_candidate_pool(world.catalog, n, cfg.timeliness_window)
        if n % cfg.retrain_period == 0 and (world.clicks or cfg.ranker in ("random", "pop")):
            world.ranker.retrain(world.clicks, world.catalog, n)
        world.phase_serve(n, pool)
        world.phase_feedback(n)
        world.phase_beliefs(n)
        world.phase_lifecycle(n, time.perf_counter() - started)
    out_dir = Path(out_dir)
    world.write_artifacts(out_dir)
    metrics = report(out_dir)
    with open(out_dir / METRICS_FILE, "w", encoding="utf-8", newline="\n") as f:
        json.dump(metrics, f, sort_keys=True, indent=2)
        f.write("\n")
    return RunArtifacts(
        out_dir=out_dir, seed=cfg.seed, report=metrics, tuw_incremental=world.tuw_incremental
    )


# ---------------------------------------------------------------------------
# Post-hoc reporting


def _require(path: Path) -> Path:
    if not path.exists():
        raise MissingArtifact(f"missing artifact {path}")
    return path


def _read_trace(path: Path) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        if header != TRACE_HEADER:
            raise CorruptLog(f"bad trace header {header!r}")
        for lineno, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 8:
                raise CorruptLog(f"trace line {lineno}: expected 8 fields")
            rows.append(dict(zip(TRACE_HEADER.split(","), parts)))
    return rows


def report(run_dir: str | Path, baseline_dir: str | Path | None = None) -> dict:
    """Recompute the full metrics report from the persisted artifacts.

    With `baseline_dir`, the normalized reward curve is filled in: the run's
    cumulative per-step creator reward divided by the baseline run's.
    """
    run_dir = Path(run_dir)
    cfg = SimConfig.from_file(_require(run_dir / CONFIG_FILE))
    try:
        log = EventLog.from_csv(_require(run_dir / EVENTS_FILE))
    except EventLogError as e:
        raise CorruptLog(f"{EVENTS_FILE}: {e}") from e
    try:
        catalog = Catalog.from_csv(_require(run_dir / ITEMS_FILE))
    except DataError as e:
        raise CorruptLog(f"{ITEMS_FILE}: {e}") from e
    trace = _read_trace(_require(run_dir / TRACE_FILE))
    with open(_require(run_dir / SUMMARY_FILE), "r", encoding="utf-8") as f:
        summary = json.load(f)

    start, end = cfg.warmup, cfg.n_steps
    n_creators = summary["n_creators"]
    n_genres = len(summary["genres"])

    departures = sorted(int(r["step"]) for r in trace if r["action_kind"] == "DEPART")

    def alive_at(step: int) -> int:
        return n_creators - sum(1 for s in departures if s <= step)

    tuw = total_user_welfare(log, start, end)
    crr = creator_retention_rate(alive_at, start, end)
    try:
        cgd = content_genre_diversity(log, lambda i: catalog[i].genre, n_genres, start, end)
    except NoExposures:
        cgd = None

    sim_items = [(rec.creator_id, rec.genre) for rec in catalog if rec.created_step >= 1]
    try:
        preference_jsd, diversity_jsd = alignment_from_distributions(
            genre_histogram((g for _, g in sim_items), n_genres),
            np.asarray(summary["dataset_genre_counts"], dtype=float),
            per_creator_entropies(sim_items, n_genres),
            summary["dataset_creator_entropies"],
            n_genres,
        )
    except EmptyItems:
        preference_jsd, diversity_jsd = None, None

    decisions = [
        (float(r["reward_pct"]), r["action_kind"])
        for r in trace
        if r["action_kind"] in ("EXPLORE", "EXPLOIT")
    ]
    table = explore_exploit_table(decisions)

    reward_per_step = [0] * cfg.n_steps
    for ev in log:
        if ev.clicked and catalog[ev.item].created_step >= 1:
            reward_per_step[ev.step - 1] += 1

    normalized = None
    if baseline_dir is not None:
        baseline = report(baseline_dir)
        normalized = normalized_reward_curve(reward_per_step, baseline["reward_per_step"])

    result = MetricsReport(
        tuw=tuw,
        crr=crr,
        cgd=cgd,
        alive_at_start=alive_at(start),
        alive_at_end=alive_at(end),
        preference_jsd=preference_jsd,
        diversity_jsd=diversity_jsd,
        explore_exploit=table,
        reward_per_step=reward_per_step,
        normalized_reward=normalized,
    )
    return {**result.to_dict(), "seed": cfg.seed}


def compare(run_dirs, metric_keys=("tuw", "crr", "cgd")) -> list[dict]:
    """Group runs by configuration-minus-seed; mean and sd per metric."""
    run_dirs = [Path(d) for d in run_dirs]
    if not run_dirs:
        raise EmptyInput("no run directories to compare")
    conditions: dict[tuple, dict] = {}
    for d in run_dirs:
        pairs = core.read_kv_file(_require(d / CONFIG_FILE))
        pairs.pop("seed", None)
        key = tuple(sorted(pairs.items()))
        with open(_require(d / METRICS_FILE), "r", encoding="utf-8") as f:
            metrics = json.load(f)
        conditions.setdefault(key, {"pairs": pairs, "runs": []})["runs"].append(metrics)

    # label conditions by the keys on which they actually differ
    all_pairs = [c["pairs"] for c in conditions.values()]
    differing = sorted(
        k
        for k in all_pairs[0]
        if any(p.get(k) != all_pairs[0][k] for p in all_pairs)
    )
    rows = []
    for key, cond in sorted(conditions.items()):
        if differing:
            label = ",".join(f"{k}={cond['pairs'][k]}" for k in differing)
        else:
            label = ",".join(
                f"{k}={cond['pairs'][k]}" for k in ("ranker", "reranker", "creator_policy")
            )
        stats = {}
        for metric in metric_keys:
            values = [r.get(metric) for r in cond["runs"]]
            values = [v for v in values if v is not None]
            if not values:
                stats[metric] = {"mean": None, "sd": None}
                continue
            mean = float(np.mean(values))
            sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
            stats[metric] = {"mean": mean, "sd": sd}
        rows.append({"label": label, "n_runs": len(cond["runs"]), "metrics": stats})
    return rows
