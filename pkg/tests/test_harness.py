import random

import pytest

from gridtalk.agents import Agent, make_agent
from gridtalk.core import Click, Message, PolicyDistribution, Role, legal_actions
from gridtalk.evaluation import read_transcripts, write_transcripts
from gridtalk.harness import (
    BatchResult,
    marginals_demo,
    parse_action_script,
    render_marginals_demo,
    run_batch,
    run_game,
    transcript_utility,
)
from gridtalk.planning import PipConfig
from gridtalk.scenario_gen import generate_many

from conftest import SCEN_A

L, D = Role.LETTERS, Role.DIGITS


class TalkerAgent(Agent):
    """Uniform over legal messages, never clicks; forces the turn cap."""

    name = "talker"
    smoothing = 0.0

    def distribution(self, scenario, history, role, own_state=None):
        msgs = [a for a in legal_actions(scenario, history, role=role, own_state=own_state)
                if isinstance(a, Message)]
        return PolicyDistribution({m: 1.0 / len(msgs) for m in msgs})


def test_run_game_seed_deterministic():
    t1 = run_game("random", "greedy", SCEN_A, seed=11)
    t2 = run_game("random", "greedy", SCEN_A, seed=11)
    assert t1 == t2
    assert t1 != run_game("random", "greedy", SCEN_A, seed=12)


def test_capped_game_is_abandoned_without_outcome():
    t = run_game(TalkerAgent(), TalkerAgent(), SCEN_A, seed=0, max_turns=4)
    assert t.length == 4
    assert t.abandoned and t.outcome is None
    assert transcript_utility(t) == -50.0 * 4 - 100.0


def test_terminal_game_records_outcome_and_utility():
    t = run_game("greedy", "greedy", SCEN_A, seed=2)
    if t.outcome is not None:
        assert t.outcome.clicked is not None
        click = t.actions[-1].action
        assert isinstance(click, Click)
        expected = (click.row, click.col) == SCEN_A.goal_cell
        assert t.outcome.correct == expected
        base = -50.0 * t.length
        assert transcript_utility(t) == base + (100.0 if expected else -100.0)


def test_pip_self_play_clicks_out_on_scen_a():
    a, b = make_agent("pip"), make_agent("pip")
    ended = 0
    for seed in range(6):
        t = run_game(a, b, SCEN_A, seed=seed)
        if not t.abandoned:
            ended += 1
            assert t.length <= 10
    assert ended >= 5


def test_run_game_round_trips_through_jsonl(tmp_path):
    games = [run_game("random", "random", s, seed=i)
             for i, s in enumerate(generate_many(3, seed=5))]
    path = tmp_path / "selfplay.jsonl"
    write_transcripts(path, games)
    assert read_transcripts(path) == games


def test_batch_of_one_matches_single_game():
    batch = run_batch("random", "greedy", [SCEN_A], [9])
    t = run_game("random", "greedy", SCEN_A, seed=9)
    assert batch.transcripts == [t]
    assert batch.overall.games == 1
    assert batch.overall.mean_utility == transcript_utility(t)
    assert batch.overall.mean_length == t.length


def test_batch_stats_invariant_to_scenario_order(tmp_path):
    scens = generate_many(6, seed=1)
    seeds = list(range(6))
    fwd = run_batch("random", "random", scens, seeds)
    order = list(range(6))[::-1]
    rev = run_batch("random", "random", [scens[i] for i in order], [seeds[i] for i in order])
    assert fwd.overall == rev.overall
    assert fwd.per_scenario == rev.per_scenario
    csv_path = tmp_path / "batch.csv"
    fwd.write_csv(csv_path)
    lines = csv_path.read_text().strip().splitlines()
    assert len(lines) == 1 + 6
    assert lines[0].startswith("game,scenario,seed")


def test_batch_input_validation():
    with pytest.raises(ValueError):
        run_batch("random", "random", [], [])
    with pytest.raises(ValueError):
        run_batch("random", "random", [SCEN_A], [1, 2])


def test_parse_action_script():
    acts = parse_action_script("blue, yes ,click 1 2")
    assert acts == [Message(("blue",)), Message(("yes",)), Click(1, 2)]
    with pytest.raises(ValueError):
        parse_action_script("click 1")


def test_marginals_demo_prior_only():
    steps = marginals_demo(SCEN_A, [], viewer=D)
    assert len(steps) == 1
    label, matrix = steps[0]
    assert "prior" in label
    assert matrix.shape == (2, 3)


def test_marginals_demo_unconstrained_literal_blue():
    cfg = PipConfig(k=0, constrained_prior=False)
    steps = marginals_demo(SCEN_A, [Message(("blue",))], viewer=D, config=cfg)
    assert len(steps) == 2
    _, after = steps[1]
    # blue cells at (1,1) and (2,2)
    assert after[0][0] == pytest.approx(2 / 3, abs=1e-9)
    assert after[1][1] == pytest.approx(2 / 3, abs=1e-9)
    for r, c in [(0, 1), (0, 2), (1, 0), (1, 2)]:
        assert after[r][c] == pytest.approx(0.5, abs=1e-9)
    text = render_marginals_demo(steps)
    assert "0.667" in text and "0.500" in text


def test_marginals_demo_k_sensitivity():
    pragmatic = marginals_demo(SCEN_A, [Message(("blue",))], viewer=D, config=PipConfig(k=1))
    literal = marginals_demo(SCEN_A, [Message(("blue",))], viewer=D, config=PipConfig(k=0))
    diff = abs(pragmatic[1][1] - literal[1][1]).max()
    assert diff > 1e-4


def test_marginals_demo_rejects_illegal_step():
    # (2,2) carries digit 1, so the digits player may not click it
    with pytest.raises(ValueError, match="step 2"):
        marginals_demo(SCEN_A, [Message(("blue",)), Click(2, 2)], viewer=D,
                       config=PipConfig(k=0))


def test_marginals_demo_stops_at_terminal_click():
    cfg = PipConfig(k=0)
    steps = marginals_demo(SCEN_A, [Message(("blue",)), Message(("circle",)), Click(1, 1)],
                           viewer=D, config=cfg)
    assert "game over" in steps[-1][0]
    assert len(steps) == 4
