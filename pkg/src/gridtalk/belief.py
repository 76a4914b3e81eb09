"""Beliefs over the partner's hidden state.

Posteriors are dense float64 vectors indexed by state bitmask. The literal
listener keeps every state consistent with the partner's messages (plus the
goal-overlap prior); the level-k listener additionally reweights each partner
action by how likely a level-(k-1) speaker in that state would have chosen it.

Lookback: with a finite window b, only the last b actions count as evidence,
and the window is treated as the whole observed game (speaker-model prefixes
restart inside the window). Verifying messages are still interpreted against
their true antecedent, which both players remember regardless of window size.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Protocol

import numpy as np

from .core import Action, History, Role, Scenario, Turn
from .errors import ContradictionError
from .semantics import DEFAULT_VOCABULARY, Vocabulary, constraint_at

# oracle(level, prefix, mover, action) -> per-state probability of `action`
# under the level-`level` policy of `mover` at `prefix`; zeros where illegal.
PolicyOracle = Callable[[int, History, Role, Action], np.ndarray]


@lru_cache(maxsize=8)
def bits_table(n_cells: int) -> np.ndarray:
    """(n_states, n_cells) matrix of state bits as float64, read-only."""
    states = np.arange(1 << n_cells, dtype=np.int64)
    table = ((states[:, None] >> np.arange(n_cells)[None, :]) & 1).astype(np.float64)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=8)
def overlap_table(n_cells: int) -> np.ndarray:
    """(n_states, n_states) bool: states sharing at least one set bit."""
    states = np.arange(1 << n_cells, dtype=np.int64)
    table = (states[:, None] & states[None, :]) != 0
    table.setflags(write=False)
    return table


def mask_indicator(n_cells: int, mask: int, inside: bool) -> np.ndarray:
    """0/1 vector over states: states intersecting (or avoiding) a cell mask."""
    states = np.arange(1 << n_cells, dtype=np.int64)
    hit = (states & mask) != 0
    return (hit if inside else ~hit).astype(np.float64)


def prior_vector(scenario: Scenario, own_state: int | None = None, constrained: bool = True) -> np.ndarray:
    """Uniform prior over partner states; the constrained variant keeps only
    states sharing a goal-consistent cell with the viewer (a goal exists)."""
    n = scenario.n_states
    if not constrained:
        return np.full(n, 1.0 / n)
    if own_state is None:
        raise ValueError("constrained prior needs the viewer's own state")
    vec = mask_indicator(scenario.n_cells, own_state, True)
    total = vec.sum()
    if total == 0:
        raise ContradictionError("viewer state has no goal-consistent cell")
    return vec / total


def literal_evidence(
    scenario: Scenario,
    history: History,
    viewer: Role,
    lookback: int | None = None,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> np.ndarray:
    """0/1 vector of partner states satisfying the partner's windowed messages."""
    start = 0 if lookback is None else max(0, len(history) - lookback)
    vec = np.ones(scenario.n_states)
    for i in range(start, len(history)):
        if history[i].player is viewer:
            continue
        constraint = constraint_at(scenario, history, i, vocabulary)
        if constraint is None:
            continue
        mask, inside = constraint
        vec *= mask_indicator(scenario.n_cells, mask, inside)
    return vec


def literal_posterior(
    scenario: Scenario,
    history: History,
    viewer: Role,
    own_state: int | None = None,
    *,
    lookback: int | None = None,
    constrained: bool = True,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> np.ndarray:
    """Uniform distribution over partner states consistent with the partner's
    messages and (by default) overlapping the viewer's own state."""
    if own_state is None and constrained:
        own_state = scenario.private_state(viewer)
    vec = literal_evidence(scenario, history, viewer, lookback, vocabulary)
    vec = vec * prior_vector(scenario, own_state, constrained)
    total = vec.sum()
    if total <= 0:
        raise ContradictionError("no partner state is consistent with the conversation")
    return vec / total


def reindex_window(history: History, start: int) -> History:
    """The suffix history[start:] re-timed to begin at t=1, so a finite
    lookback window is treated as the entire observed game."""
    if start == 0:
        return history
    return tuple(Turn(i + 1, turn.player, turn.action) for i, turn in enumerate(history[start:]))


def pragmatic_posterior(
    scenario: Scenario,
    history: History,
    viewer: Role,
    own_state: int | None = None,
    *,
    k: int,
    policy_oracle: PolicyOracle,
    lookback: int | None = None,
    constrained: bool = True,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> np.ndarray:
    """Level-k posterior over partner states.

    Defined by the recurrence: the posterior after the partner's action a_t
    is the posterior two steps back (the viewer's own intervening action is
    uninformative) reweighted by the level-(k-1) speaker probability of a_t
    and the literal constraint a_t imposes. k=0 is the literal listener.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if own_state is None and constrained:
        own_state = scenario.private_state(viewer)
    if k == 0:
        return literal_posterior(
            scenario, history, viewer, own_state,
            lookback=lookback, constrained=constrained, vocabulary=vocabulary,
        )
    start = 0 if lookback is None else max(0, len(history) - lookback)
    window = reindex_window(history, start)

    def recurse(n: int) -> np.ndarray:
        if n == 0:
            return prior_vector(scenario, own_state, constrained)
        turn = window[n - 1]
        if turn.player is viewer:
            return recurse(n - 1)
        vec = recurse(n - 1).copy()
        constraint = constraint_at(scenario, history, start + n - 1, vocabulary)
        if constraint is not None:
            mask, inside = constraint
            vec *= mask_indicator(scenario.n_cells, mask, inside)
        vec *= policy_oracle(k - 1, window[: n - 1], turn.player, turn.action)
        total = vec.sum()
        if total <= 0:
            raise ContradictionError(f"evidence at t={start + n} contradicts every candidate state")
        return vec / total

    return recurse(len(window))


def belief_marginals(scenario: Scenario, posterior: np.ndarray) -> np.ndarray:
    """Per-cell goal-consistency probabilities as a (rows, cols) matrix."""
    flat = bits_table(scenario.n_cells).T @ np.asarray(posterior, dtype=np.float64)
    return flat.reshape(scenario.rows, scenario.cols)


def format_marginals(matrix: np.ndarray) -> str:
    """Render a marginal matrix with three decimals per cell."""
    return "\n".join(" ".join(f"{v:.3f}" for v in row) for row in matrix)
