"""Forward-planning policies with level-k listener beliefs.

A policy call scores every legal action by its expected gain over abandoning
the game: the action's continuation value under each hypothesized partner
state, weighted by the mover's posterior, minus the walk-away utility. The
continuation value recursion assumes the game ends within the lookahead
budget and that the final action is a click, so at the last budget step only
clicks are considered. Action weights are max(0, gain)^alpha, normalized and
smoothed.

Everything is computed as dense matrices over all 2^cells candidate states at
once: a "node" evaluation yields the policy for every possible mover state
simultaneously, which is exactly the quantity level-k inference needs when it
reweights an observed action by the speaker probability under each state.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .belief import (
    bits_table,
    literal_posterior,
    mask_indicator,
    overlap_table,
    reindex_window,
)
from .core import (
    Action,
    Click,
    History,
    Message,
    PolicyDistribution,
    Role,
    Scenario,
    action_universe,
    active_player,
    extend,
    is_terminal,
)
from .errors import ContradictionError, PolicyUndefinedError
from .semantics import (
    DEFAULT_VOCABULARY,
    Vocabulary,
    constraint_at,
    is_informative,
    message_mask,
)


@dataclass(frozen=True)
class PipConfig:
    """Knobs of the planning/inference/pragmatics policy.

    Attributes:
        k: pragmatic depth of the listener model (0 = literal).
        f: lookahead, the number of actions allowed after a candidate action.
        b: inference window in actions, None for unlimited.
        alpha: rationality exponent on positive expected gains.
        smoothing: epsilon of p -> (p + eps) / (1 + eps * N) per distribution.
        action_cost, reward, penalty: utility constants.
        smooth_interior: also smooth simulated policies inside the lookahead
            tree (default); turn off to smooth only the root distribution.
        constrained_prior: restrict priors to partner states sharing at least
            one goal-consistent cell with the viewer.
    """

    k: int = 1
    f: int = 2
    b: int | None = None
    alpha: float = 10.0
    smoothing: float = 0.01
    action_cost: float = -50.0
    reward: float = 100.0
    penalty: float = -100.0
    smooth_interior: bool = True
    constrained_prior: bool = True

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.f < 1:
            raise ValueError("f must be >= 1")
        if self.b is not None and self.b < 1:
            raise ValueError("b must be >= 1 or None")
        if self.alpha < 0 or self.smoothing < 0:
            raise ValueError("alpha and smoothing must be non-negative")

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "f": self.f,
            "b": self.b,
            "alpha": self.alpha,
            "smoothing": self.smoothing,
            "action_cost": self.action_cost,
            "reward": self.reward,
            "penalty": self.penalty,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "PipConfig":
        known = {
            "k", "f", "b", "alpha", "smoothing", "action_cost", "reward",
            "penalty", "smooth_interior", "constrained_prior",
        }
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**{key: data[key] for key in known if key in data})


FULL_CONFIG = PipConfig()

ABLATIONS = {
    "full": {},
    "noprag": {"k": 0},
    "noplan": {"f": 1},
    "noinfer": {"b": 1},
}


def ablation_config(name: str, base: PipConfig = FULL_CONFIG) -> PipConfig:
    """Named single-component ablations of the full configuration."""
    try:
        return replace(base, **ABLATIONS[name.lower()])
    except KeyError:
        raise ValueError(f"unknown ablation {name!r}; pick from {sorted(ABLATIONS)}") from None


def smooth(dist: PolicyDistribution | Mapping[Action, float], eps: float) -> PolicyDistribution:
    """Mix a distribution toward uniform: p -> (p + eps) / (1 + eps * N)."""
    items = dict(dist.items() if isinstance(dist, PolicyDistribution) else dist.items())
    n = len(items)
    return PolicyDistribution({a: (p + eps) / (1.0 + eps * n) for a, p in items.items()})


@dataclass
class PlannerStats:
    node_evaluations: int = 0
    cache_hits: int = 0
    belief_fallback_rows: int = 0
    max_recursion_depth: int = 0


@dataclass
class _NodeResult:
    pi: np.ndarray      # (S, A) action probabilities per hypothesized mover state
    value: np.ndarray   # (S, S) continuation value, rows mover state, cols partner
    gains: np.ndarray   # (S, A) expected gain over abandoning, pre-weighting
    legal: np.ndarray   # (S, A) bool


class Planner:
    """Evaluates policies, posteriors and continuation values for one board.

    Node evaluations are memoized; reuse one Planner per scenario/config pair
    when scoring many prefixes of the same game.
    """

    def __init__(
        self,
        scenario: Scenario,
        config: PipConfig = FULL_CONFIG,
        vocabulary: Vocabulary = DEFAULT_VOCABULARY,
        use_cache: bool = True,
        cache_limit: int = 6000,
    ):
        self.scenario = scenario
        self.config = config
        self.vocabulary = vocabulary
        self.use_cache = use_cache
        self.cache_limit = cache_limit
        self.stats = PlannerStats()

        n_cells = scenario.n_cells
        self._S = scenario.n_states
        self._bits = np.asarray(bits_table(n_cells))              # (S, C)
        self._compat = overlap_table(n_cells).astype(np.float64)   # (S, S)
        self.universe = action_universe(scenario, vocabulary)
        self._col = {a: i for i, a in enumerate(self.universe)}

        states = np.arange(self._S, dtype=np.int64)
        informative, verifying, clicks = [], [], []
        den_rows = np.zeros((len(self.universe), self._S), dtype=bool)
        self._click_cell = np.zeros(len(self.universe), dtype=np.int64)
        for i, a in enumerate(self.universe):
            if isinstance(a, Click):
                clicks.append(i)
                self._click_cell[i] = scenario.cell_index(a.row, a.col)
            elif is_informative(a, vocabulary):
                informative.append(i)
                den_rows[i] = (states & message_mask(scenario, a)) != 0
            else:
                verifying.append(i)
        self._informative_cols = informative
        self._informative_set = frozenset(informative)
        self._verifying_cols = verifying
        self._click_cols = np.array(clicks)
        self._den = den_rows
        # informative messages that are true somewhere; others are never legal
        self._usable_informative = [c for c in informative if den_rows[c].any()]
        # messages with the same denotation mask are interchangeable to the
        # planner: every downstream quantity depends on the mask alone, so
        # duplicates share one representative's subtree
        seen: dict[bytes, int] = {}
        self._msg_rep = {
            c: seen.setdefault(den_rows[c].tobytes(), c)
            for c in self._usable_informative
        }
        self._click_legal = self._bits.astype(bool)[:, self._click_cell[self._click_cols]]
        prior = self._prior_matrix()
        with np.errstate(invalid="ignore"):
            self._prior_marginals = np.where(
                prior.sum(axis=1, keepdims=True) > 0,
                (prior @ self._bits) / prior.sum(axis=1, keepdims=True),
                self._bits.mean(axis=0),
            )
        tmpl = np.zeros((self._S, len(self.universe)), dtype=bool)
        for c in self._usable_informative:
            tmpl[:, c] = self._den[c]
        self._legal_messages = tmpl
        tmpl = np.zeros((self._S, len(self.universe)), dtype=bool)
        tmpl[:, self._click_cols] = self._click_legal
        self._legal_clicks = tmpl

        self._nodes: dict = {}
        self._evidence_cache: dict = {}
        self._belief_cache: dict = {}
        self._depth = 0

    # ------------------------------------------------------------ public --

    def policy(
        self,
        history: History,
        mover: Role | None = None,
        own_state: int | None = None,
    ) -> PolicyDistribution:
        """Action distribution for the mover at this (non-terminal) history.

        Raises PolicyUndefinedError when the mover's evidence contradicts
        every candidate partner state; callers may retry with a weaker
        listener (see harness fallbacks).
        """
        if is_terminal(history):
            raise PolicyUndefinedError("the game is over")
        if mover is None:
            mover = active_player(len(history) + 1, self.scenario.first_player)
        if own_state is None:
            own_state = self.scenario.private_state(mover)
        root_len = len(history)
        _, bad = self._belief(self.config.k, history, mover, root_len)
        if bad[own_state]:
            raise PolicyUndefinedError("beliefs contradict every candidate partner state")
        res = self._node(self.config.k, history, mover, self.config.f, root_len)
        dist = {
            self.universe[c]: float(res.pi[own_state, c])
            for c in np.nonzero(res.legal[own_state])[0]
        }
        self._maybe_trim()
        return PolicyDistribution(dist)

    def gains(
        self,
        history: History,
        mover: Role | None = None,
        own_state: int | None = None,
    ) -> dict[Action, float]:
        """Expected gain over abandoning for each legal action (pre-weighting)."""
        if mover is None:
            mover = active_player(len(history) + 1, self.scenario.first_player)
        if own_state is None:
            own_state = self.scenario.private_state(mover)
        res = self._node(self.config.k, history, mover, self.config.f, len(history))
        return {
            self.universe[c]: float(res.gains[own_state, c])
            for c in np.nonzero(res.legal[own_state])[0]
        }

    def expected_value(
        self,
        s_self: int,
        s_partner: int,
        history: History,
        mover: Role,
        budget: int,
    ) -> float:
        """Value of continuing from `history` with both states known, assuming
        at most `budget` further actions, the last of which is a click."""
        if is_terminal(history):
            # a click is correct under a hypothesized pair iff the cell is
            # jointly consistent, i.e. its bit is set in both states
            click = history[-1].action
            cell = self.scenario.cell_index(click.row, click.col)
            hit = (s_self >> cell) & 1 and (s_partner >> cell) & 1
            outcome = self.config.reward if hit else self.config.penalty
            return self.config.action_cost * len(history) + outcome
        if budget < 1:
            raise ValueError("budget exhausted on a non-terminal history")
        res = self._node(self.config.k, history, mover, budget - 1, len(history))
        return float(res.value[s_self, s_partner])

    def posterior(
        self,
        history: History,
        viewer: Role,
        own_state: int | None = None,
        level: int | None = None,
    ) -> np.ndarray:
        """Level-k posterior over partner states for a real conversation."""
        if own_state is None:
            own_state = self.scenario.private_state(viewer)
        k = self.config.k if level is None else level
        if k == 0:
            # same quantity the literal pipeline computes; sharing its code
            # path keeps the two public entry points bit-for-bit identical
            return literal_posterior(
                self.scenario, history, viewer, own_state,
                lookback=self.config.b,
                constrained=self.config.constrained_prior,
                vocabulary=self.vocabulary,
            )
        B, bad = self._belief(k, history, viewer, len(history))
        if bad[own_state]:
            raise ContradictionError("evidence contradicts every candidate partner state")
        return B[own_state].copy()

    def policy_oracle(self):
        """Adapter for belief.pragmatic_posterior: per-state probability of an
        action under the level-`level` policy at a (possibly re-timed) prefix."""

        def oracle(level: int, prefix: History, mover: Role, action: Action) -> np.ndarray:
            res = self._node(level, prefix, mover, self.config.f, len(prefix))
            return res.pi[:, self._col[action]].copy()

        return oracle

    def abandon(self, history: History) -> float:
        return self.config.action_cost * len(history) + self.config.penalty

    # --------------------------------------------------------- internals --

    def _maybe_trim(self) -> None:
        if len(self._nodes) <= self.cache_limit:
            return
        # keep evaluations of real prefixes, drop simulated-branch nodes
        for cache in (self._nodes, self._evidence_cache, self._belief_cache):
            stale = [key for key in cache if len(key[1]) != key[-1]]
            for key in stale:
                del cache[key]

    def _node(self, level: int, node: History, mover: Role, phi: int, root_len: int) -> _NodeResult:
        key = (level, node, mover, phi, root_len)
        hit = self._nodes.get(key)
        if hit is not None:
            self.stats.cache_hits += 1
            return hit
        self._depth += 1
        self.stats.node_evaluations += 1
        self.stats.max_recursion_depth = max(self.stats.max_recursion_depth, self._depth)
        try:
            result = self._evaluate_node(level, node, mover, phi, root_len)
        finally:
            self._depth -= 1
        if self.use_cache:
            self._nodes[key] = result
        return result

    def _evaluate_node(self, level: int, node: History, mover: Role, phi: int, root_len: int) -> _NodeResult:
        assert not is_terminal(node), "cannot plan from a finished game"
        cfg = self.config
        S, A = self._S, len(self.universe)
        L = len(node)
        t = L + 1
        spread = cfg.reward - cfg.penalty

        B, _bad = self._belief(level, node, mover, root_len)

        legal = np.zeros((S, A), dtype=bool)
        gains = np.zeros((S, A))
        msg_cols: list[int] = []
        if phi >= 1:
            msg_cols = list(self._usable_informative)
            legal |= self._legal_messages
            if L >= 1 and isinstance(node[-1].action, Message) \
                    and is_informative(node[-1].action, self.vocabulary):
                msg_cols.extend(self._verifying_cols)
                legal[:, self._verifying_cols] = True
        if t >= 2:
            legal |= self._legal_clicks

        # clicks resolve immediately: gain = action cost + spread * P(partner bit)
        marginals = B @ self._bits
        gains[:, self._click_cols] = cfg.action_cost + spread * marginals[:, self._click_cell[self._click_cols]]

        pm_value: np.ndarray | None = None
        if msg_cols:
            if phi == 1:
                # the child-value matrices factor through the responder's
                # forced-click policies, so gains and the value matrix reduce
                # to small matrix products instead of (n, S, S) stacks
                pi0, spi0 = self._click_layer(level, node, mover, msg_cols, root_len)
                base = cfg.action_cost * (L + 2) + cfg.penalty
                gains[:, msg_cols] = (
                    base * (B @ spi0.T)
                    + spread * (np.matmul(B[None, :, :], pi0) * self._bits[None, :, :]).sum(axis=-1).T
                    - self.abandon(node)
                )
                pi = self._weights(gains, legal, interior=(L != root_len))
                pm = pi[:, msg_cols]  # (S, n_msg)
                cross = np.tensordot(pm, pi0, axes=([1], [0]))  # (S, S, C)
                pm_value = base * (pm @ spi0) + spread * (cross * self._bits[:, None, :]).sum(axis=-1)
            else:
                stacks = []
                shared: dict[int, np.ndarray] = {}
                for c in msg_cols:
                    rep = self._msg_rep.get(c, c)
                    val = shared.get(rep)
                    if val is None:
                        child = extend(node, mover, self.universe[rep])
                        val = self._node(level, child, mover.other, phi - 1, root_len).value
                        shared[rep] = val
                    stacks.append(val)
                # D[a][u, v] = child value with mover/partner axes swapped
                d_stack = np.stack(stacks).transpose(0, 2, 1)
                gains[:, msg_cols] = (B[None, :, :] * d_stack).sum(axis=-1).T - self.abandon(node)
                pi = self._weights(gains, legal, interior=(L != root_len))
                pm = pi[:, msg_cols]
                pm_value = (pm.T[:, :, None] * d_stack).sum(axis=0)
        else:
            # clicks already net of abandon via the action-cost identity
            pi = self._weights(gains, legal, interior=(L != root_len))

        value = np.zeros((S, S))
        pc = pi[:, self._click_cols]
        click_u = cfg.action_cost * (L + 1) + cfg.penalty
        value += click_u * pc.sum(axis=-1)[:, None]
        value += spread * (pc @ self._bits[:, self._click_cell[self._click_cols]].T)
        if pm_value is not None:
            value += pm_value
        return _NodeResult(pi=pi, value=value, gains=gains, legal=legal)

    def _click_layer(
        self, level: int, node: History, mover: Role, msg_cols: list[int], root_len: int
    ) -> tuple[np.ndarray, np.ndarray]:
        """Forced-click policies of the responder after each candidate message:
        (n_msg, S, C) click probabilities per responder state and their row
        sums (n_msg, S)."""
        cfg = self.config
        reps: list[int] = []
        pos: dict[int, int] = {}
        take = np.empty(len(msg_cols), dtype=np.int64)
        for row, c in enumerate(msg_cols):
            rep = self._msg_rep.get(c, c)
            if rep not in pos:
                pos[rep] = len(reps)
                reps.append(rep)
            take[row] = pos[rep]
        msg_cols = reps
        evidence = self._child_evidence(level, node, mover, msg_cols, root_len)  # (n, S)
        prior = self._prior_matrix()
        totals = evidence @ prior.T  # (n, S): evidence mass per responder state
        marg_num = np.matmul(prior[None, :, :], evidence[:, :, None] * self._bits[None, :, :])
        bad = totals <= 0
        if bad.any():
            self.stats.belief_fallback_rows += int(bad.sum())
            if level >= 1:
                lit = self._child_evidence(0, node, mover, msg_cols, root_len)
                lit_totals = lit @ prior.T
                lit_num = np.matmul(prior[None, :, :], lit[:, :, None] * self._bits[None, :, :])
                use_lit = bad & (lit_totals > 0)
                totals = np.where(use_lit, lit_totals, totals)
                marg_num = np.where(use_lit[..., None], lit_num, marg_num)
                bad = totals <= 0
            marg_num = np.where(bad[..., None], self._prior_marginals[None, :, :], marg_num)
            totals = np.where(bad, 1.0, totals)
        marg = marg_num / totals[..., None]
        gains = cfg.action_cost + (cfg.reward - cfg.penalty) * marg
        legal = np.broadcast_to(self._click_legal, gains.shape)
        pi0 = self._weights(gains, legal, interior=True)
        pi0 = pi0[take]
        return pi0, pi0.sum(axis=-1)

    def _child_evidence(
        self, level: int, node: History, appender: Role, msg_cols: list[int], root_len: int
    ) -> np.ndarray:
        """Evidence vectors about the appender's state after appending each
        candidate message to `node`, one row per candidate, as seen by the
        appender's partner."""
        viewer = appender.other
        b = self.config.b
        if b is not None:
            rows = []
            for c in msg_cols:
                child = extend(node, appender, self.universe[c])
                rows.append(self._evidence(level, child, viewer, root_len))
            return np.stack(rows)

        base = self._evidence(level, node, viewer, root_len)
        lit = self._den[msg_cols].astype(np.float64)
        for row, c in enumerate(msg_cols):
            if c not in self._informative_set:
                antecedent = node[-1].action
                assert isinstance(antecedent, Message)
                mask = message_mask(self.scenario, antecedent)
                inside = self.universe[c].words[0] == "yes"
                lit[row] = mask_indicator(self.scenario.n_cells, mask, inside)
        out = lit * base[None, :]
        if level >= 1:
            i = len(node)
            phi_obs = max(self.config.f - max(i - root_len, 0), 0)
            res = self._node(level - 1, node, appender, phi_obs, root_len)
            out = out * res.pi[:, msg_cols].T
        return out

    def _evidence(self, level: int, node: History, viewer: Role, root_len: int) -> np.ndarray:
        """Product of per-action evidence about the viewer's partner over the
        lookback window of `node`."""
        key = (level, node, viewer, root_len)
        hit = self._evidence_cache.get(key)
        if hit is not None:
            return hit
        b = self.config.b
        start = 0 if b is None else max(0, len(node) - b)
        vec = np.ones(self._S)
        for i in range(start, len(node)):
            turn = node[i]
            if turn.player is viewer:
                continue
            constraint = constraint_at(self.scenario, node, i, self.vocabulary)
            if constraint is not None:
                mask, inside = constraint
                vec = vec * mask_indicator(self.scenario.n_cells, mask, inside)
            if level >= 1:
                prefix = self._window_prefix(node, start, i)
                phi_obs = self.config.f if i < root_len else max(self.config.f - (i - root_len), 0)
                rl_obs = max(0, min(i, root_len) - start)
                res = self._node(level - 1, prefix, turn.player, phi_obs, rl_obs)
                vec = vec * res.pi[:, self._col[turn.action]]
        if self.use_cache:
            self._evidence_cache[key] = vec
        return vec

    @staticmethod
    def _window_prefix(node: History, start: int, i: int) -> History:
        return reindex_window(node[:i], start)

    def _belief(self, level: int, node: History, viewer: Role, root_len: int) -> tuple[np.ndarray, np.ndarray]:
        """(S, S) posterior over partner states per viewer state, plus a bool
        vector marking viewer states whose evidence was contradictory."""
        key = (level, node, viewer, root_len)
        hit = self._belief_cache.get(key)
        if hit is not None:
            return hit
        evidence = self._evidence(level, node, viewer, root_len)
        raw = evidence[None, :] * self._prior_matrix()
        B, bad = self._normalize_rows(raw, level, node, viewer, root_len)
        result = (B, bad)
        if self.use_cache:
            self._belief_cache[key] = result
        return result

    def _prior_matrix(self) -> np.ndarray:
        if self.config.constrained_prior:
            return self._compat
        return np.ones((self._S, self._S))

    def _normalize_rows(
        self,
        raw: np.ndarray,
        level: int,
        node: History,
        viewer: Role,
        root_len: int,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Row-normalize a belief matrix, patching contradictory rows with the
        literal posterior, then the bare prior, then uniform."""
        sums = raw.sum(axis=-1, keepdims=True)
        bad = sums[..., 0] <= 0
        if bad.any():
            self.stats.belief_fallback_rows += int(bad.sum())
            prior = self._prior_matrix()
            patch = prior
            if level >= 1:
                lit = self._evidence(0, node, viewer, root_len)
                lit_raw = lit[None, :] * prior
                lit_ok = lit_raw.sum(axis=-1) > 0
                patch = np.where(lit_ok[..., None], lit_raw, patch)
            patch_sums = patch.sum(axis=-1, keepdims=True)
            dead = patch_sums[..., 0] <= 0  # e.g. the empty own-state row
            patch = np.where(dead[..., None], 1.0, patch)
            raw = np.where(bad[..., None], patch, raw)
            sums = raw.sum(axis=-1, keepdims=True)
        return raw / sums, bad

    def _weights(self, gains: np.ndarray, legal: np.ndarray, interior: bool) -> np.ndarray:
        """Turn expected gains into action probabilities along the last axis."""
        cfg = self.config
        positive = legal & (gains > 0.0)
        if cfg.alpha == 0:
            w = positive.astype(np.float64)
        else:
            w = np.full_like(gains, -np.inf)
            np.log(gains, out=w, where=positive)
            w *= cfg.alpha
            peak = np.max(w, axis=-1, keepdims=True)
            np.subtract(w, peak, out=w, where=np.isfinite(peak))
            np.exp(w, out=w)  # exp(-inf) = 0 for non-positive gains
        totals = w.sum(axis=-1, keepdims=True)
        fall_back = (totals[..., 0] == 0) & legal.any(axis=-1)
        if fall_back.any():
            w = np.where(fall_back[..., None], legal.astype(np.float64), w)
            totals = w.sum(axis=-1, keepdims=True)
        pi = np.divide(w, totals, out=w, where=totals > 0)
        if cfg.smoothing > 0 and (cfg.smooth_interior or not interior):
            n = legal.sum(axis=-1, keepdims=True)
            np.add(pi, cfg.smoothing, out=pi, where=legal)
            pi /= 1.0 + cfg.smoothing * n
        return pi


def pip_policy(
    scenario: Scenario,
    history: History,
    mover: Role | None = None,
    own_state: int | None = None,
    config: PipConfig = FULL_CONFIG,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> PolicyDistribution:
    """One-shot policy evaluation; build a Planner directly to amortize caches."""
    return Planner(scenario, config, vocabulary).policy(history, mover, own_state)


def expected_value(
    scenario: Scenario,
    s_self: int,
    s_partner: int,
    history: History,
    mover: Role,
    budget: int,
    config: PipConfig = FULL_CONFIG,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> float:
    """One-shot continuation value with both private states known."""
    return Planner(scenario, config, vocabulary).expected_value(s_self, s_partner, history, mover, budget)
