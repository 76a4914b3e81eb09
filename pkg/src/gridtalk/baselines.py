"""Reference policies: uniform-random over legal actions, and a greedy
heuristic that trades off shrinking the listener's hypothesis set against
clicking the currently most probable goal cell."""
from __future__ import annotations

from gridtalk.core import (
    Click,
    History,
    Message,
    PolicyDistribution,
    Role,
    Scenario,
    extend,
    legal_actions,
)
from gridtalk.belief import belief_marginals, literal_posterior
from gridtalk.errors import ContradictionError
from gridtalk.planning import smooth
from gridtalk.semantics import DEFAULT_VOCABULARY, Vocabulary, history_denotation

DEFAULT_EPS = 0.01


def random_policy(
    scenario: Scenario,
    history: History,
    role: Role,
    own_state: int | None = None,
    eps: float = DEFAULT_EPS,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> PolicyDistribution:
    """Uniform over the legal action set (speaker-valid messages, positional
    yes/no, own-consistent clicks after the first step)."""
    actions = legal_actions(scenario, history, role=role, own_state=own_state,
                            vocabulary=vocabulary)
    # the uniform distribution is smoothing's fixed point; skipping the
    # arithmetic keeps each probability exactly 1/N
    return PolicyDistribution({a: 1.0 / len(actions) for a in actions})


def greedy_message_weights(
    scenario: Scenario,
    history: History,
    role: Role,
    own_state: int | None = None,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> dict[Message, float]:
    """Shrinkage weight per legal message: how many of the listener's candidate
    states for the speaker the message would eliminate."""
    if own_state is None:
        own_state = scenario.private_state(role)
    listener = role.other
    base = len(history_denotation(scenario, history, listener, vocabulary=vocabulary))
    weights: dict[Message, float] = {}
    for action in legal_actions(scenario, history, role=role, own_state=own_state,
                                vocabulary=vocabulary):
        if not isinstance(action, Message):
            continue
        after = history_denotation(
            scenario, extend(history, role, action), listener, vocabulary=vocabulary)
        weights[action] = float(base - len(after))
    return weights


def greedy_message_policy(
    scenario: Scenario,
    history: History,
    role: Role,
    own_state: int | None = None,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> PolicyDistribution:
    """Messages weighted by shrinkage; zero-weight messages are dropped before
    normalizing, and a uniform fallback covers the no-shrinkage case."""
    weights = greedy_message_weights(scenario, history, role, own_state, vocabulary)
    total = sum(weights.values())
    if total <= 0:
        return PolicyDistribution({a: 1.0 / len(weights) for a in weights})
    probs = {a: w / total for a, w in weights.items()}
    return PolicyDistribution(probs)


def greedy_click_policy(
    scenario: Scenario,
    own_state: int,
    marginals,
) -> tuple[PolicyDistribution | None, float]:
    """Click distribution proportional to min(own bit, goal marginal) plus the
    click-confidence gamma, the largest normalized click probability. All-zero
    weights leave the distribution undefined and gamma at 0."""
    weights: dict[Click, float] = {}
    for row in range(1, scenario.rows + 1):
        for col in range(1, scenario.cols + 1):
            if (own_state >> scenario.cell_index(row, col)) & 1:
                weights[Click(row, col)] = min(1.0, float(marginals[row - 1][col - 1]))
    total = sum(weights.values())
    if total <= 0:
        return None, 0.0
    dist = PolicyDistribution({a: w / total for a, w in weights.items()})
    gamma = max(p for _, p in dist.items())
    return dist, gamma


def greedy_policy(
    scenario: Scenario,
    history: History,
    role: Role,
    own_state: int | None = None,
    eps: float = DEFAULT_EPS,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> PolicyDistribution:
    """Mixture gamma * clicks + (1 - gamma) * messages over the legal set.

    The goal marginals come from the literal posterior, keeping this baseline
    non-pragmatic; on contradictory evidence the click arm is dropped
    (gamma = 0) and the policy keeps talking.
    """
    if own_state is None:
        own_state = scenario.private_state(role)
    t = len(history) + 1
    msg_dist = greedy_message_policy(scenario, history, role, own_state, vocabulary)
    click_dist: PolicyDistribution | None = None
    gamma = 0.0
    if t >= 2:
        try:
            posterior = literal_posterior(
                scenario, history, role, own_state, vocabulary=vocabulary)
        except ContradictionError:
            posterior = None
        if posterior is not None:
            marginals = belief_marginals(scenario, posterior)
            click_dist, gamma = greedy_click_policy(scenario, own_state, marginals)
    mixture: dict = {a: (1.0 - gamma) * p for a, p in msg_dist.items()}
    if click_dist is not None and gamma > 0:
        for a, p in click_dist.items():
            mixture[a] = mixture.get(a, 0.0) + gamma * p
    # smoothing runs over every legal action so the floor covers actions the
    # mixture itself never proposes
    for action in legal_actions(scenario, history, role=role, own_state=own_state,
                                vocabulary=vocabulary):
        mixture.setdefault(action, 0.0)
    dist = PolicyDistribution(mixture)
    return smooth(dist, eps) if eps > 0 else dist
