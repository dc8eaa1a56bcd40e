import numpy as np
import pytest

from creatorsim.core import ItemRecord, stream
from creatorsim.users import (
    SessionClosed,
    UserAction,
    UserRuntime,
    click_probability,
    end_step,
    is_active,
    react,
)


class ScriptedRng:
    """Feeds a fixed sequence of uniform draws."""

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def make_user(n_genres=14, pref=None, activity=0.5):
    if pref is None:
        pref = np.full(n_genres, 1.0 / n_genres)
    return UserRuntime(user_id=0, preference=np.asarray(pref, dtype=float), activity=activity)


def make_item(genre=0, item_id=0):
    return ItemRecord(item_id, 0, genre, "t", (), "", 1)


class TestIsActive:
    def test_always_visits(self):
        u = make_user(activity=1.0)
        rng = stream(0, "u")
        assert all(is_active(u, rng) for _ in range(50))

    def test_never_visits(self):
        u = make_user(activity=0.0)
        rng = stream(0, "u")
        assert not any(is_active(u, rng) for _ in range(50))

    def test_empirical_rate(self):
        u = make_user(activity=0.3)
        rng = stream(1, "u")
        hits = sum(is_active(u, rng) for _ in range(10_000))
        assert hits / 10_000 == pytest.approx(0.3, abs=0.02)


class TestReact:
    def test_uniform_pref_no_satiation_probability(self):
        u = make_user()
        assert click_probability(u, 0) == pytest.approx(0.8)

    def test_zero_affinity_never_clicks(self):
        pref = np.zeros(14)
        pref[1] = 1.0
        u = make_user(pref=pref)
        rng = stream(3, "u")
        for _ in range(30):
            u.exited = False
            assert react(u, make_item(genre=0), rng) is not UserAction.CLICK

    def test_exit_probability_after_three_skips(self):
        u = make_user(pref=np.zeros(14))
        u.preference[0] = 0.0  # never clicks
        u.consecutive_skips = 3
        # click draw fails (any value), exit draw compared against 0.5
        assert react(u, make_item(), ScriptedRng([0.9, 0.499])) is UserAction.EXIT
        u = make_user(pref=np.zeros(14))
        u.consecutive_skips = 3
        assert react(u, make_item(), ScriptedRng([0.9, 0.501])) is UserAction.SKIP

    def test_satiation_discounts_click_probability(self):
        u = make_user()
        u.recent_exposure[0] = 10.0
        assert click_probability(u, 0) == pytest.approx(0.8 / 3.0)

    def test_click_resets_skip_streak(self):
        u = make_user()
        u.consecutive_skips = 4
        assert react(u, make_item(), ScriptedRng([0.0])) is UserAction.CLICK
        assert u.consecutive_skips == 0

    def test_react_after_exit_rejected(self):
        u = make_user()
        u.exited = True
        with pytest.raises(SessionClosed):
            react(u, make_item(), ScriptedRng([0.0]))

    def test_click_rate_monotone_in_preference(self):
        probs = []
        for w in np.linspace(0.0, 1.0, 21):
            pref = np.full(14, (1.0 - w) / 13)
            pref[0] = w
            u = make_user(pref=pref)
            probs.append(click_probability(u, 0))
        assert all(a <= b + 1e-12 for a, b in zip(probs, probs[1:]))


class TestEndStep:
    def test_session_reset(self):
        u = make_user()
        u.consecutive_skips = 4
        u.items_seen = 3
        u.exited = True
        end_step(u)
        assert (u.consecutive_skips, u.items_seen, u.exited) == (0, 0, False)

    def test_decay(self):
        u = make_user()
        u.recent_exposure[2] = 10.0
        end_step(u)
        assert u.recent_exposure[2] == pytest.approx(8.0)
        end_step(u)
        assert u.recent_exposure[2] == pytest.approx(6.4)
