from __future__ import annotations

import random

import pytest

from gridtalk.core import (
    DIGITS,
    LETTERS,
    GridObject,
    History,
    Message,
    Role,
    Scenario,
    Turn,
    active_player,
    legal_actions,
)
from gridtalk.semantics import DEFAULT_VOCABULARY, is_informative

COLORS = ("blue", "yellow", "green")
SHAPES = ("square", "diamond", "circle")


def build_scenario(*, rows: int, cols: int, goal: str, first: str, cells: list[tuple]) -> Scenario:
    """cells: (row, col, color, shape, letter, digit) tuples."""
    return Scenario(
        rows=rows,
        cols=cols,
        goal_letter=goal[0],
        goal_digit=goal[1],
        first_player=Role(first),
        objects=tuple(GridObject(*c) for c in cells),
    )


SCEN_A = build_scenario(
    rows=2,
    cols=3,
    goal="B2",
    first="letters",
    cells=[
        (1, 1, "blue", "square", "B", "2"),
        (1, 2, "yellow", "circle", "B", "1"),
        (1, 3, "green", "diamond", "A", "2"),
        (2, 1, "green", "circle", "A", "2"),
        (2, 2, "blue", "diamond", "B", "1"),
        (2, 3, "yellow", "square", "A", "1"),
    ],
)


@pytest.fixture
def scen_a() -> Scenario:
    return SCEN_A


def random_scenario(rng: random.Random, shape: tuple[int, int] | None = None) -> Scenario:
    """A structurally valid board (unique goal object); no generator filters."""
    rows, cols = shape or rng.choice([(2, 3), (3, 2)])
    n = rows * cols
    while True:
        letters = [rng.choice(LETTERS) for _ in range(n)]
        digits = [rng.choice(DIGITS) for _ in range(n)]
        goal_idx = rng.randrange(n)
        gl, gd = letters[goal_idx], digits[goal_idx]
        if sum(1 for i in range(n) if letters[i] == gl and digits[i] == gd) != 1:
            continue
        cells = []
        i = 0
        for r in range(1, rows + 1):
            for c in range(1, cols + 1):
                cells.append((r, c, rng.choice(COLORS), rng.choice(SHAPES), letters[i], digits[i]))
                i += 1
        return build_scenario(rows=rows, cols=cols, goal=gl + gd, first=rng.choice(["letters", "digits"]), cells=cells)


def word_holds(scenario: Scenario, word: str, row: int, col: int) -> bool:
    """Oracle predicate: does `word` hold of the object at (row, col)?"""
    o = scenario.object_at(row, col)
    if word in COLORS:
        return o.color == word
    if word in SHAPES:
        return o.shape == word
    if word == "top":
        return row == 1
    if word == "bottom":
        return row == scenario.rows
    if word == "left":
        return col == 1
    if word == "right":
        return col == scenario.cols
    if word == "middle":
        return col == 2 if scenario.cols == 3 else row == 2
    raise AssertionError(word)


def oracle_satisfies(scenario: Scenario, words: tuple[str, ...], state: int) -> bool:
    """Brute-force truth of an informative message against a state, computed
    object-by-object with no bitmask arithmetic."""
    cells = [scenario.cell_of_index(i) for i in range(scenario.n_cells) if state >> i & 1]
    if len(words) == 1:
        return any(word_holds(scenario, words[0], r, c) for r, c in cells)
    x, y = words
    grid = [scenario.cell_of_index(i) for i in range(scenario.n_cells)]
    conjoinable = any(word_holds(scenario, x, r, c) and word_holds(scenario, y, r, c) for r, c in grid)
    if conjoinable:
        return any(word_holds(scenario, x, r, c) and word_holds(scenario, y, r, c) for r, c in cells)
    return any(word_holds(scenario, x, r, c) or word_holds(scenario, y, r, c) for r, c in cells)


def random_message_history(
    scenario: Scenario,
    rng: random.Random,
    length: int,
    informative_only: bool = False,
) -> History:
    """A legal non-terminal history of speaker-valid messages (no clicks)."""
    history: History = ()
    for _ in range(length):
        t = len(history) + 1
        mover = active_player(t, scenario.first_player)
        options = [
            a
            for a in legal_actions(scenario, history, mover)
            if isinstance(a, Message) and (not informative_only or is_informative(a, DEFAULT_VOCABULARY))
        ]
        action = rng.choice(options)
        history = history + (Turn(t, mover, action),)
    return history
