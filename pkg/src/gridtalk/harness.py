"""Self-play simulation and batch aggregation.

run_game alternates two agents over one board, sampling each turn with a
per-game RNG; run_batch aggregates utility, length and correctness across
many boards; marginals_demo walks a scripted conversation and reports one
player's evolving per-cell beliefs about the partner.
"""
from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from gridtalk.agents import Agent, make_agent
from gridtalk.belief import belief_marginals, format_marginals
from gridtalk.core import (
    Action,
    Click,
    History,
    Role,
    Scenario,
    abandon_utility,
    active_player,
    apply_action,
    is_terminal,
    parse_message,
    utility,
)
from gridtalk.errors import GameError
from gridtalk.evaluation import Outcome, Transcript, scenario_id
from gridtalk.planning import FULL_CONFIG, PipConfig, Planner


def as_agent(policy: Agent | str, config: PipConfig | None = None) -> Agent:
    return policy if isinstance(policy, Agent) else make_agent(policy, config)


def run_game(
    policy_a: Agent | str,
    policy_b: Agent | str,
    scenario: Scenario,
    seed: int,
    max_turns: int = 10,
    config: PipConfig | None = None,
) -> Transcript:
    """Play one game to the click or the turn cap.

    policy_a always controls the letters player and policy_b the digits
    player, whoever moves first. A capped game carries no outcome and is
    marked abandoned. Deterministic per seed.
    """
    agents = {
        Role.LETTERS: as_agent(policy_a, config),
        Role.DIGITS: as_agent(policy_b, config),
    }
    rng = random.Random(seed)
    history: History = ()
    while len(history) < max_turns and not is_terminal(history):
        mover = active_player(len(history) + 1, scenario.first_player)
        action = agents[mover].act(scenario, history, mover, rng)
        history = apply_action(scenario, history, action, mover)
    if is_terminal(history):
        click = history[-1].action
        outcome = Outcome(
            correct=(click.row, click.col) == scenario.goal_cell,
            clicked=(click.row, click.col),
        )
        return Transcript(scenario=scenario, actions=history, outcome=outcome)
    return Transcript(scenario=scenario, actions=history, outcome=None, abandoned=True)


def transcript_utility(
    transcript: Transcript,
    *,
    action_cost: float = -50.0,
    reward: float = 100.0,
    penalty: float = -100.0,
) -> float:
    """Team utility of a finished or abandoned game."""
    if is_terminal(transcript.actions):
        return utility(transcript.scenario, transcript.actions,
                       action_cost=action_cost, reward=reward, penalty=penalty)
    return abandon_utility(transcript.actions, action_cost=action_cost, penalty=penalty)


@dataclass(frozen=True)
class BatchStats:
    games: int
    mean_utility: float
    mean_length: float
    correct_rate: float
    abandoned: int

    def to_json(self) -> dict:
        return {
            "games": self.games,
            "mean_utility": self.mean_utility,
            "mean_length": self.mean_length,
            "correct_rate": self.correct_rate,
            "abandoned": self.abandoned,
        }


def _stats(transcripts: Sequence[Transcript]) -> BatchStats:
    utilities = [transcript_utility(t) for t in transcripts]
    correct = sum(1 for t in transcripts if t.outcome is not None and t.outcome.correct)
    return BatchStats(
        games=len(transcripts),
        mean_utility=sum(utilities) / len(utilities),
        mean_length=sum(t.length for t in transcripts) / len(transcripts),
        correct_rate=correct / len(transcripts),
        abandoned=sum(1 for t in transcripts if t.abandoned),
    )


@dataclass
class BatchResult:
    transcripts: list[Transcript]
    seeds: list[int]
    overall: BatchStats
    per_scenario: dict[str, BatchStats]

    def to_json(self) -> dict:
        return {
            "overall": self.overall.to_json(),
            "per_scenario": {k: v.to_json() for k, v in self.per_scenario.items()},
        }

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["game", "scenario", "seed", "length", "utility", "correct", "abandoned"])
            for i, (t, seed) in enumerate(zip(self.transcripts, self.seeds)):
                writer.writerow([
                    i, scenario_id(t.scenario), seed, t.length,
                    transcript_utility(t),
                    int(bool(t.outcome and t.outcome.correct)),
                    int(t.abandoned),
                ])


def run_batch(
    policy_a: Agent | str,
    policy_b: Agent | str,
    scenarios: Sequence[Scenario],
    seeds: Sequence[int],
    max_turns: int = 10,
    config: PipConfig | None = None,
) -> BatchResult:
    """One game per (scenario, seed) pair, in input order."""
    if not scenarios:
        raise ValueError("no scenarios to play")
    if len(scenarios) != len(seeds):
        raise ValueError("need exactly one seed per scenario")
    agent_a = as_agent(policy_a, config)
    agent_b = as_agent(policy_b, config)
    transcripts = [
        run_game(agent_a, agent_b, scenario, seed, max_turns)
        for scenario, seed in zip(scenarios, seeds)
    ]
    groups: dict[str, list[Transcript]] = {}
    for t in transcripts:
        groups.setdefault(scenario_id(t.scenario), []).append(t)
    return BatchResult(
        transcripts=transcripts,
        seeds=list(seeds),
        overall=_stats(transcripts),
        per_scenario={k: _stats(g) for k, g in groups.items()},
    )


# ------------------------------------------------------- marginals demo --

def parse_action_script(text: str) -> list[Action]:
    """Comma-separated demo actions: words for messages, "click r c" for
    clicks ("blue,yes,click 1 1")."""
    actions: list[Action] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split()
        if parts[0] == "click":
            if len(parts) != 3:
                raise ValueError(f"clicks are written 'click ROW COL', got {chunk!r}")
            actions.append(Click(int(parts[1]), int(parts[2])))
        else:
            actions.append(parse_message(chunk))
    return actions


def marginals_demo(
    scenario: Scenario,
    actions: Sequence,
    viewer: Role,
    config: PipConfig | None = None,
) -> list[tuple[str, np.ndarray]]:
    """Per-cell beliefs of `viewer` about the partner before any action and
    after each scripted action. Actions alternate from the first player and
    must be legal for the true private states; step numbers name offenders."""
    cfg = config or FULL_CONFIG
    planner = Planner(scenario, cfg)
    steps: list[tuple[str, np.ndarray]] = []
    history: History = ()

    def snapshot(label: str) -> None:
        post = planner.posterior(history, viewer)
        steps.append((label, belief_marginals(scenario, post)))

    snapshot("start (prior)")
    for i, action in enumerate(actions, start=1):
        mover = active_player(len(history) + 1, scenario.first_player)
        try:
            history = apply_action(scenario, history, action, mover)
        except GameError as exc:
            raise ValueError(f"step {i} ({action}): {exc}") from exc
        if is_terminal(history):
            steps.append((f"t={len(history)} {mover.value}: {action} (game over)", steps[-1][1]))
            break
        snapshot(f"t={len(history)} {mover.value}: {action}")
    return steps


def render_marginals_demo(steps: Sequence[tuple[str, np.ndarray]]) -> str:
    blocks = [f"{label}\n{format_marginals(matrix)}" for label, matrix in steps]
    return "\n\n".join(blocks)
