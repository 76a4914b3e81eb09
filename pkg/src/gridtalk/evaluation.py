"""Transcript ingestion and policy scoring.

Free-text messages are canonicalized into the game vocabulary, games that
cannot be canonicalized are filtered out, and policies are scored against
the remaining actions by log-likelihood, action rank, first-step entropy
and click accuracy. Emission is JSON/CSV only; figures live in the CLI.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from gridtalk.agents import Agent
from gridtalk.core import (
    Action,
    Click,
    History,
    Message,
    Role,
    Scenario,
    Turn,
    action_to_json,
    active_player,
    validate_history,
)
from gridtalk.semantics import DEFAULT_VOCABULARY, Vocabulary

log = logging.getLogger(__name__)


# ---------------------------------------------------------------- types --

@dataclass(frozen=True)
class Outcome:
    correct: bool
    clicked: tuple[int, int] | None = None

    def to_json(self) -> dict:
        data: dict = {"correct": self.correct}
        if self.clicked is not None:
            data["clicked"] = list(self.clicked)
        return data


@dataclass(frozen=True)
class Transcript:
    """One recorded game: board, action sequence with verbatim message text,
    and the click outcome (absent when the game was abandoned)."""

    scenario: Scenario
    actions: History
    outcome: Outcome | None = None
    abandoned: bool = False
    raws: tuple[str | None, ...] = ()

    def __post_init__(self) -> None:
        validate_history(self.scenario, self.actions)
        raws = self.raws
        if not raws and self.actions:
            raws = tuple(
                t.action.raw if isinstance(t.action, Message) else None
                for t in self.actions
            )
        if len(raws) != len(self.actions):
            raise ValueError("need one raw-text slot per action")
        object.__setattr__(self, "raws", tuple(raws))

    @property
    def length(self) -> int:
        return len(self.actions)

    def message_raws(self) -> list[str]:
        return [
            raw if raw is not None else turn.action.raw
            for turn, raw in zip(self.actions, self.raws)
            if isinstance(turn.action, Message)
        ]

    def to_json(self) -> dict:
        actions = []
        for turn, raw in zip(self.actions, self.raws):
            entry = {"t": turn.t, "player": turn.player.value}
            entry.update(action_to_json(turn.action))
            if raw is not None:
                entry["raw"] = raw
            actions.append(entry)
        data: dict = {"scenario": self.scenario.to_json(), "actions": actions}
        if self.outcome is not None:
            data["outcome"] = self.outcome.to_json()
        if self.abandoned:
            data["abandoned"] = True
        return data

    @classmethod
    def from_json(cls, data: dict, vocabulary: Vocabulary = DEFAULT_VOCABULARY) -> "Transcript":
        scenario = Scenario.from_json(data["scenario"])
        actions: list[Turn] = []
        raws: list[str | None] = []
        for entry in data.get("actions", ()):
            player = Role(entry["player"])
            t = int(entry.get("t", len(actions) + 1))
            if entry.get("type") == "click":
                actions.append(Turn(t, player, Click(int(entry["row"]), int(entry["col"]))))
                raws.append(None)
                continue
            raw = entry.get("raw")
            words = entry.get("words")
            if raw is None:
                raw = " ".join(words) if words else ""
            message = None
            if words:
                try:
                    message = Message(tuple(words))
                except ValueError:
                    message = None
            if message is None:
                message = canonicalize_message(raw, vocabulary)
            if message is None:
                raise ValueError(f"unreadable message at t={t}: {raw!r}")
            actions.append(Turn(t, player, message))
            raws.append(raw)
        outcome = None
        if "outcome" in data and data["outcome"] is not None:
            o = data["outcome"]
            clicked = tuple(o["clicked"]) if o.get("clicked") else None
            outcome = Outcome(correct=bool(o["correct"]), clicked=clicked)
        return cls(
            scenario=scenario,
            actions=tuple(actions),
            outcome=outcome,
            abandoned=bool(data.get("abandoned", False)),
            raws=tuple(raws),
        )


def scenario_id(scenario: Scenario) -> str:
    """Short stable fingerprint used to group report rows by board."""
    blob = json.dumps(scenario.to_json(), sort_keys=True)
    return hashlib.sha1(blob.encode()).hexdigest()[:8]


# ----------------------------------------------------------------- io --

def read_transcripts(
    path: str | Path,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
    skip_bad: bool = True,
) -> list[Transcript]:
    """Load JSONL games, one per line. Unreadable lines are skipped with a
    warning unless skip_bad is false."""
    out: list[Transcript] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(Transcript.from_json(json.loads(line), vocabulary))
            except (ValueError, KeyError) as exc:
                if not skip_bad:
                    raise ValueError(f"{path}:{lineno}: {exc}") from exc
                log.warning("skipping %s:%d: %s", path, lineno, exc)
    return out


def write_transcripts(path: str | Path, transcripts: Iterable[Transcript]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in transcripts:
            fh.write(json.dumps(t.to_json()) + "\n")


# ------------------------------------------------------ canonicalization --

def kept_tokens(raw_text: str, vocabulary: Vocabulary = DEFAULT_VOCABULARY) -> list[str]:
    """Lowercased whitespace tokens restricted to the vocabulary, first
    occurrence only (messages carry distinct words)."""
    known = vocabulary.all_words
    kept: list[str] = []
    for tok in raw_text.lower().split():
        if tok in known and tok not in kept:
            kept.append(tok)
    return kept


def canonicalize_message(
    raw_text: str,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> Message | None:
    """Map free text onto an in-vocabulary Message: keep known words in order
    and take the first two distinct ones. None when nothing survives."""
    kept = kept_tokens(raw_text, vocabulary)
    if not kept:
        return None
    return Message(tuple(kept[:2]))


def filter_dataset(
    transcripts: Iterable[Transcript],
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> list[Transcript]:
    """Keep a game only if every message it contains canonicalizes."""
    kept = []
    for t in transcripts:
        if all(canonicalize_message(raw, vocabulary) is not None for raw in t.message_raws()):
            kept.append(t)
    return kept


# ---------------------------------------------------------------- metrics --

@dataclass(frozen=True)
class ActionScore:
    game: int
    t: int
    player: str
    action: Action
    ll: float
    illegal: bool
    rank: int | None = None


def _floor(policy: Agent, n_actions: int) -> float:
    eps = float(getattr(policy, "smoothing", 0.0))
    if eps <= 0 or n_actions == 0:
        return 0.0
    return eps / (1.0 + eps * n_actions)


def score_actions(policy: Agent, transcript: Transcript, game_index: int = 0) -> list[ActionScore]:
    """Log-likelihood of each recorded action under the policy, using the
    acting player's private state. Actions outside the policy's legal set
    are scored at the smoothed floor and flagged."""
    scores: list[ActionScore] = []
    scenario = transcript.scenario
    for i, turn in enumerate(transcript.actions):
        prefix = transcript.actions[:i]
        dist = policy.distribution(scenario, prefix, turn.player)
        p = dist.prob(turn.action, default=-1.0)
        illegal = p < 0
        if illegal:
            p = _floor(policy, len(dist))
        ll = math.log(p) if p > 0 else float("-inf")
        scores.append(ActionScore(game_index, turn.t, turn.player.value, turn.action, ll, illegal))
    return scores


def action_log_likelihood(policy: Agent, transcript: Transcript) -> list[float]:
    return [s.ll for s in score_actions(policy, transcript)]


def action_rank(
    policy: Agent,
    scenario: Scenario,
    prefix: History,
    taken_action: Action,
    seed: int = 0,
    role: Role | None = None,
    own_state: int | None = None,
) -> int:
    """1-based rank of the taken action after sorting the policy's support by
    descending probability; equal probabilities are randomly ordered by seed."""
    if role is None:
        role = active_player(len(prefix) + 1, scenario.first_player)
    dist = policy.distribution(scenario, prefix, role, own_state)
    if taken_action not in dist:
        raise ValueError(f"{taken_action} is not a legal action here")
    entries = list(dist.items())
    random.Random(seed).shuffle(entries)
    entries.sort(key=lambda ap: -ap[1])
    for i, (action, _) in enumerate(entries, start=1):
        if action == taken_action:
            return i
    raise AssertionError("unreachable: membership checked above")


def bootstrap_ci(
    values: Sequence[float],
    resamples: int = 1000,
    level: float = 0.90,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean, deterministic per seed."""
    vals = np.asarray(list(values), dtype=np.float64)
    if vals.size == 0:
        raise ValueError("cannot bootstrap an empty sample")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, vals.size, size=(resamples, vals.size))
    means = vals[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


def first_step_entropy(transcripts: Iterable[Transcript]) -> dict[Scenario, float]:
    """Shannon entropy (nats) of the empirical opening-action distribution,
    per scenario."""
    counts: dict[Scenario, dict[Action, int]] = {}
    for t in transcripts:
        if not t.actions:
            continue
        per = counts.setdefault(t.scenario, {})
        first = t.actions[0].action
        per[first] = per.get(first, 0) + 1
    out: dict[Scenario, float] = {}
    for scenario, per in counts.items():
        total = sum(per.values())
        out[scenario] = -sum((c / total) * math.log(c / total) for c in per.values())
    return out


@dataclass(frozen=True)
class GroupScore:
    games: int
    scored_games: int
    correct_rate: float | None
    score_per_ten: float | None
    mean_length: float

    def to_json(self) -> dict:
        return {
            "games": self.games,
            "scored_games": self.scored_games,
            "correct_rate": self.correct_rate,
            "score_per_ten": self.score_per_ten,
            "mean_length": self.mean_length,
        }


def _group_score(group: Sequence[Transcript]) -> GroupScore:
    scored = [t for t in group if t.outcome is not None]
    correct = sum(1 for t in scored if t.outcome.correct)
    rate = correct / len(scored) if scored else None
    return GroupScore(
        games=len(group),
        scored_games=len(scored),
        correct_rate=rate,
        score_per_ten=None if rate is None else rate * 10.0,
        mean_length=sum(t.length for t in group) / len(group),
    )


def score_stats(transcripts: Sequence[Transcript]) -> dict:
    """Correct-click rate (raw and per-ten-games scale) and mean game length,
    overall and per scenario. Empty groups are simply absent."""
    groups: dict[Scenario, list[Transcript]] = {}
    for t in transcripts:
        groups.setdefault(t.scenario, []).append(t)
    return {
        "overall": _group_score(transcripts) if transcripts else None,
        "per_scenario": {scenario_id(s): _group_score(g) for s, g in groups.items()},
    }


# ----------------------------------------------------------------- report --

@dataclass
class EvalReport:
    policy: str
    n_games: int
    n_actions: int
    scores: list[ActionScore]
    mean_ll: float
    ci: tuple[float, float]
    mean_rank: float | None
    illegal_actions: int
    truncated_messages: int
    entropy: dict[str, float]
    stats: dict = field(default_factory=dict)

    def per_action_lls(self) -> list[float]:
        return [s.ll for s in self.scores]

    def to_json(self) -> dict:
        def num(x: float | None):
            if x is None or math.isfinite(x):
                return x
            return str(x)

        overall = self.stats.get("overall")
        per_scenario = self.stats.get("per_scenario", {})
        return {
            "policy": self.policy,
            "n_games": self.n_games,
            "n_actions": self.n_actions,
            "mean_ll": num(self.mean_ll),
            "ci_low": num(self.ci[0]),
            "ci_high": num(self.ci[1]),
            "mean_rank": self.mean_rank,
            "illegal_actions": self.illegal_actions,
            "truncated_messages": self.truncated_messages,
            "first_step_entropy": self.entropy,
            "score_stats": {
                "overall": overall.to_json() if overall else None,
                "per_scenario": {k: v.to_json() for k, v in per_scenario.items()},
            },
        }

    def write_json(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")

    def write_csv(self, path: str | Path) -> None:
        """Per-action rows; the summary lives in the JSON report."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["game", "t", "player", "action", "ll", "illegal", "rank"])
            for s in self.scores:
                writer.writerow([
                    s.game, s.t, s.player, str(s.action),
                    "" if math.isinf(s.ll) else f"{s.ll:.6f}",
                    int(s.illegal),
                    "" if s.rank is None else s.rank,
                ])


def evaluate_policy(
    policy: Agent,
    transcripts: Sequence[Transcript],
    *,
    seed: int = 0,
    resamples: int = 1000,
    ci_level: float = 0.90,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> EvalReport:
    """Score every action of every game under one policy and aggregate."""
    if not transcripts:
        raise ValueError("no transcripts to evaluate")
    all_scores: list[ActionScore] = []
    truncated = 0
    for gi, transcript in enumerate(transcripts):
        for raw in transcript.message_raws():
            if len(kept_tokens(raw, vocabulary)) > 2:
                truncated += 1
        for s in score_actions(policy, transcript, gi):
            if s.illegal:
                all_scores.append(s)
                continue
            rank = action_rank(
                policy, transcript.scenario, transcript.actions[:s.t - 1],
                s.action, seed=seed + len(all_scores),
                role=Role(s.player),
            )
            all_scores.append(ActionScore(s.game, s.t, s.player, s.action, s.ll, False, rank))
    lls = [s.ll for s in all_scores]
    ranks = [s.rank for s in all_scores if s.rank is not None]
    entropy = {scenario_id(s): h for s, h in first_step_entropy(transcripts).items()}
    return EvalReport(
        policy=policy.name,
        n_games=len(transcripts),
        n_actions=len(all_scores),
        scores=all_scores,
        mean_ll=sum(lls) / len(lls),
        ci=bootstrap_ci(lls, resamples=resamples, level=ci_level, seed=seed),
        mean_rank=sum(ranks) / len(ranks) if ranks else None,
        illegal_actions=sum(1 for s in all_scores if s.illegal),
        truncated_messages=truncated,
        entropy=entropy,
        stats=score_stats(transcripts),
    )
