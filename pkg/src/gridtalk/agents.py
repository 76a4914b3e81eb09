"""Named policy agents shared by the simulator, the evaluator and the play
service. The registry keys are the policy name strings used on the CLI."""
from __future__ import annotations

import logging
import random

import numpy as np

from gridtalk.baselines import DEFAULT_EPS, greedy_policy, random_policy
from gridtalk.belief import belief_marginals, literal_posterior, prior_vector
from gridtalk.core import Action, History, PolicyDistribution, Role, Scenario, is_terminal
from gridtalk.errors import ContradictionError, PolicyUndefinedError
from gridtalk.planning import FULL_CONFIG, PipConfig, Planner, ablation_config
from gridtalk.semantics import DEFAULT_VOCABULARY, Vocabulary

log = logging.getLogger(__name__)

POLICY_NAMES = ("random", "greedy", "pip", "pip:noprag", "pip:noplan", "pip:noinfer")


class Agent:
    """A named action policy over non-terminal histories.

    `distribution` returns the (smoothed) action distribution for the mover;
    `act` samples it with the caller's RNG so runs stay reproducible.
    """

    name: str = "agent"

    def distribution(
        self,
        scenario: Scenario,
        history: History,
        role: Role,
        own_state: int | None = None,
    ) -> PolicyDistribution:
        raise NotImplementedError

    def act(
        self,
        scenario: Scenario,
        history: History,
        role: Role,
        rng: random.Random,
        own_state: int | None = None,
    ) -> Action:
        return self.distribution(scenario, history, role, own_state).sample(rng)

    def partner_marginals(
        self,
        scenario: Scenario,
        history: History,
        viewer: Role,
        own_state: int | None = None,
    ) -> np.ndarray:
        """Per-cell goal beliefs about the partner, for debugging overlays.

        Baselines report the literal read; contradictory evidence falls back
        to the viewer's prior rather than erroring a diagnostics endpoint.
        """
        if own_state is None:
            own_state = scenario.private_state(viewer)
        try:
            post = literal_posterior(scenario, history, viewer, own_state)
        except ContradictionError:
            post = prior_vector(scenario, own_state)
        return belief_marginals(scenario, post)


class RandomAgent(Agent):
    name = "random"

    def __init__(self, smoothing: float = DEFAULT_EPS, vocabulary: Vocabulary = DEFAULT_VOCABULARY):
        self.smoothing = smoothing
        self.vocabulary = vocabulary

    def distribution(self, scenario, history, role, own_state=None):
        return random_policy(scenario, history, role, own_state,
                             eps=self.smoothing, vocabulary=self.vocabulary)


class GreedyAgent(Agent):
    name = "greedy"

    def __init__(self, smoothing: float = DEFAULT_EPS, vocabulary: Vocabulary = DEFAULT_VOCABULARY):
        self.smoothing = smoothing
        self.vocabulary = vocabulary

    def distribution(self, scenario, history, role, own_state=None):
        return greedy_policy(scenario, history, role, own_state,
                             eps=self.smoothing, vocabulary=self.vocabulary)


class PipAgent(Agent):
    """Planning agent; keeps one memoized Planner per scenario.

    When the configured inference contradicts every candidate partner state
    the agent plays the uniform-random policy for that turn instead of
    crashing the game; the event is logged and counted in `fallbacks`.
    """

    def __init__(
        self,
        config: PipConfig = FULL_CONFIG,
        name: str = "pip",
        vocabulary: Vocabulary = DEFAULT_VOCABULARY,
        max_planners: int = 8,
    ):
        self.config = config
        self.name = name
        self.vocabulary = vocabulary
        self.max_planners = max_planners
        self.fallbacks = 0
        self._planners: dict[Scenario, Planner] = {}

    @property
    def smoothing(self) -> float:
        return self.config.smoothing

    def planner_for(self, scenario: Scenario) -> Planner:
        planner = self._planners.get(scenario)
        if planner is None:
            while len(self._planners) >= self.max_planners:
                self._planners.pop(next(iter(self._planners)))
            planner = Planner(scenario, self.config, self.vocabulary)
            self._planners[scenario] = planner
        return planner

    def distribution(self, scenario, history, role, own_state=None):
        planner = self.planner_for(scenario)
        try:
            return planner.policy(history, role, own_state)
        except PolicyUndefinedError:
            if is_terminal(history):
                raise
            self.fallbacks += 1
            log.warning("%s: no partner state fits the evidence at t=%d; playing uniform",
                        self.name, len(history) + 1)
            return random_policy(scenario, history, role, own_state,
                                 eps=self.config.smoothing, vocabulary=self.vocabulary)

    def partner_marginals(self, scenario, history, viewer, own_state=None):
        planner = self.planner_for(scenario)
        try:
            post = planner.posterior(history, viewer, own_state)
        except ContradictionError:
            return super().partner_marginals(scenario, history, viewer, own_state)
        return belief_marginals(scenario, post)


def make_agent(
    name: str,
    config: PipConfig | None = None,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> Agent:
    """Build an agent from its policy name; the optional config applies to
    planning agents directly and lends its smoothing to the baselines."""
    key = name.strip().lower()
    base = config or FULL_CONFIG
    if key == "random":
        return RandomAgent(base.smoothing, vocabulary)
    if key == "greedy":
        return GreedyAgent(base.smoothing, vocabulary)
    if key == "pip":
        return PipAgent(base, name=key, vocabulary=vocabulary)
    if key.startswith("pip:"):
        cfg = ablation_config(key.split(":", 1)[1], base)
        return PipAgent(cfg, name=key, vocabulary=vocabulary)
    raise ValueError(f"unknown policy {name!r}; expected one of: {', '.join(POLICY_NAMES)}")
