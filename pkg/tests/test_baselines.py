import random

import pytest

from gridtalk.baselines import (
    greedy_click_policy,
    greedy_message_policy,
    greedy_message_weights,
    greedy_policy,
    random_policy,
)
from gridtalk.core import Click, Message, Role, extend, legal_actions

from conftest import SCEN_A, random_message_history

L, D = Role.LETTERS, Role.DIGITS


def hist(*pairs):
    h = ()
    for player, action in pairs:
        h = extend(h, player, action)
    return h


# ---------------------------------------------------------------- random --

def test_random_uniform_over_legal():
    h = hist((L, Message(("blue",))))
    legal = legal_actions(SCEN_A, h, role=D)
    dist = random_policy(SCEN_A, h, D, eps=0.0)
    assert set(a for a, _ in dist.items()) == set(legal)
    for _, p in dist.items():
        assert p == pytest.approx(1 / len(legal), abs=1e-12)


def test_random_no_clicks_at_t1():
    dist = random_policy(SCEN_A, (), L)
    assert all(isinstance(a, Message) for a, _ in dist.items())
    assert dist.prob(Click(1, 1)) == 0.0


def test_random_depends_only_on_legal_set():
    h1 = hist((L, Message(("blue",))))
    h2 = hist((L, Message(("top",))))
    d1 = dict(random_policy(SCEN_A, h1, D).items())
    d2 = dict(random_policy(SCEN_A, h2, D).items())
    assert d1 == d2


def test_random_smoothing_floor():
    h = hist((L, Message(("blue",))))
    dist = random_policy(SCEN_A, h, D, eps=0.01)
    n = len(dist)
    floor = 0.01 / (1 + 0.01 * n)
    assert min(p for _, p in dist.items()) >= floor - 1e-15
    assert sum(p for _, p in dist.items()) == pytest.approx(1.0, abs=1e-9)


# ------------------------------------------------------- greedy messages --

def test_greedy_blue_weight_from_empty_history():
    weights = greedy_message_weights(SCEN_A, (), L)
    assert weights[Message(("blue",))] == 16.0  # 64 -> 48
    assert weights[Message(("blue", "top"))] == 32.0  # AND reading, 64 -> 32
    assert weights[Message(("blue", "top"))] >= weights[Message(("blue",))]


def test_greedy_repeated_message_has_zero_weight():
    h = hist((L, Message(("blue",))), (D, Message(("circle",))))
    weights = greedy_message_weights(SCEN_A, h, L)
    assert weights[Message(("blue",))] == 0.0


def test_greedy_weights_nonnegative_on_random_histories():
    rng = random.Random(9)
    for _ in range(15):
        h = random_message_history(SCEN_A, rng, rng.randint(0, 4))
        mover = L if len(h) % 2 == 0 else D
        weights = greedy_message_weights(SCEN_A, h, mover)
        assert weights
        assert all(w >= 0 for w in weights.values())


def test_greedy_message_policy_drops_zero_weights():
    h = hist((L, Message(("blue",))), (D, Message(("circle",))))
    weights = greedy_message_weights(SCEN_A, h, L)
    dist = greedy_message_policy(SCEN_A, h, L)
    assert dist.prob(Message(("blue",))) == 0.0
    positive = {a for a, w in weights.items() if w > 0}
    assert {a for a, p in dist.items() if p > 0} == positive
    assert sum(p for _, p in dist.items()) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------- greedy clicks --

def test_click_policy_single_candidate():
    marginals = [[0.7, 0.0, 0.0], [0.0, 0.0, 0.0]]
    dist, gamma = greedy_click_policy(SCEN_A, 0b000001, marginals)
    assert dist.prob(Click(1, 1)) == 1.0
    assert gamma == 1.0


def test_click_policy_normalizes_pair():
    marginals = [[0.6, 0.0, 0.0], [0.0, 0.2, 0.0]]
    own = 0b010001  # cells (1,1) and (2,2)
    dist, gamma = greedy_click_policy(SCEN_A, own, marginals)
    assert dist.prob(Click(1, 1)) == pytest.approx(0.75, abs=1e-12)
    assert dist.prob(Click(2, 2)) == pytest.approx(0.25, abs=1e-12)
    assert gamma == pytest.approx(0.75, abs=1e-12)


def test_click_policy_ignores_non_own_cells():
    marginals = [[0.9, 0.9, 0.9], [0.9, 0.9, 0.9]]
    dist, gamma = greedy_click_policy(SCEN_A, 0b000001, marginals)
    assert set(a for a, _ in dist.items()) == {Click(1, 1)}


def test_click_policy_all_zero_weights():
    marginals = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
    dist, gamma = greedy_click_policy(SCEN_A, 0b000011, marginals)
    assert dist is None
    assert gamma == 0.0


# --------------------------------------------------------------- mixture --

def test_greedy_policy_t1_is_pure_messages():
    dist = greedy_policy(SCEN_A, (), L, eps=0.0)
    assert all(isinstance(a, Message) for a, p in dist.items() if p > 0)
    assert sum(p for _, p in dist.items()) == pytest.approx(1.0, abs=1e-9)


def test_greedy_policy_certain_goal_clicks():
    # a single own-consistent cell makes the constrained-literal marginal 1
    h = hist((L, Message(("blue",))))
    dist = greedy_policy(SCEN_A, h, D, own_state=0b000001, eps=0.0)
    assert dist.prob(Click(1, 1)) == pytest.approx(1.0, abs=1e-12)


def test_greedy_policy_mixture_sums_to_one():
    rng = random.Random(4)
    for _ in range(10):
        h = random_message_history(SCEN_A, rng, rng.randint(0, 4))
        mover = L if len(h) % 2 == 0 else D
        dist = greedy_policy(SCEN_A, h, mover)
        assert sum(p for _, p in dist.items()) == pytest.approx(1.0, abs=1e-9)
        legal = set(legal_actions(SCEN_A, h, role=mover))
        assert set(a for a, _ in dist.items()) == legal
        n = len(legal)
        assert min(p for _, p in dist.items()) >= 0.01 / (1 + 0.01 * n) - 1e-15
