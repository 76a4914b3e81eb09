"""Random board generation with a standalone validity checker.

Boards are rejection-sampled until the goal pair is unique, both players see
enough goal-consistent objects to need a conversation, and neither player's
consistent set can be named by a single color, shape, or grid line.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Sequence

from gridtalk.core import (
    COLORS,
    DIGITS,
    GRID_SHAPES,
    LETTERS,
    SHAPES,
    GridObject,
    Role,
    Scenario,
)
from gridtalk.errors import GenerationError

MAX_ATTEMPTS = 100_000


@dataclass(frozen=True)
class CriteriaReport:
    passed: bool
    failures: tuple[str, ...]

    def to_json(self) -> dict:
        return {"pass": self.passed, "failures": list(self.failures)}


def _line_classes(rows: int, cols: int) -> dict[str, Callable[[int, int], bool]]:
    """The five grid lines a consistent set must not be contained in."""
    return {
        "left column": lambda r, c: c == 1,
        "right column": lambda r, c: c == cols,
        "top row": lambda r, c: r == 1,
        "bottom row": lambda r, c: r == rows,
        "middle line": (lambda r, c: c == 2) if cols == 3 else (lambda r, c: r == 2),
    }


def check_draw(
    rows: int,
    cols: int,
    objects: Sequence[GridObject],
    goal_letter: str,
    goal_digit: str,
) -> list[str]:
    """All criteria failures of a raw board draw (which, unlike a Scenario,
    may still carry a duplicated goal pair)."""
    failures: list[str] = []
    goals = [o for o in objects if o.letter == goal_letter and o.digit == goal_digit]
    if len(goals) != 1:
        failures.append(f"goal pair must appear on exactly one object, found {len(goals)}")

    consistent: dict[Role, list[GridObject]] = {}
    for role in (Role.LETTERS, Role.DIGITS):
        goal = goal_letter if role is Role.LETTERS else goal_digit
        consistent[role] = [o for o in objects if o.symbol(role) == goal]
        if len(consistent[role]) < 2:
            failures.append(f"{role.value} player needs at least two goal-consistent objects")
    if sum(len(v) for v in consistent.values()) < rows * cols:
        failures.append("goal-consistent counts must sum to at least the board size")

    for role, objs in consistent.items():
        if not objs:
            continue
        if len({o.color for o in objs}) == 1:
            failures.append(f"{role.value}-consistent objects all share color {objs[0].color}")
        if len({o.shape for o in objs}) == 1:
            failures.append(f"{role.value}-consistent objects all share shape {objs[0].shape}")
        for name, on_line in _line_classes(rows, cols).items():
            if all(on_line(o.row, o.col) for o in objs):
                failures.append(f"{role.value}-consistent objects all sit on the {name}")
    return failures


def check_criteria(scenario: Scenario) -> CriteriaReport:
    failures = check_draw(
        scenario.rows, scenario.cols, scenario.objects,
        scenario.goal_letter, scenario.goal_digit,
    )
    return CriteriaReport(passed=not failures, failures=tuple(failures))


def generate(seed: int, max_attempts: int = MAX_ATTEMPTS) -> Scenario:
    """Deterministic rejection sampler: uniform grid shape, uniform object
    properties, uniform goal object and first player; redraw until the
    criteria pass."""
    rng = random.Random(seed)
    for _ in range(max_attempts):
        rows, cols = rng.choice(GRID_SHAPES)
        objects = tuple(
            GridObject(r, c, rng.choice(COLORS), rng.choice(SHAPES),
                       rng.choice(LETTERS), rng.choice(DIGITS))
            for r in range(1, rows + 1)
            for c in range(1, cols + 1)
        )
        goal = objects[rng.randrange(len(objects))]
        first = rng.choice((Role.LETTERS, Role.DIGITS))
        if check_draw(rows, cols, objects, goal.letter, goal.digit):
            continue
        return Scenario(rows=rows, cols=cols, goal_letter=goal.letter,
                        goal_digit=goal.digit, first_player=first, objects=objects)
    raise GenerationError(f"no acceptable board after {max_attempts} draws")


def generate_many(count: int, seed: int) -> list[Scenario]:
    """Independent boards from disjoint seed streams, ordered by index."""
    return [generate(seed + i) for i in range(count)]


def acceptance_rate(seed: int, draws: int = 10_000) -> float:
    """Fraction of raw draws passing the criteria (regression diagnostics)."""
    rng = random.Random(seed)
    accepted = 0
    for _ in range(draws):
        rows, cols = rng.choice(GRID_SHAPES)
        objects = [
            GridObject(r, c, rng.choice(COLORS), rng.choice(SHAPES),
                       rng.choice(LETTERS), rng.choice(DIGITS))
            for r in range(1, rows + 1)
            for c in range(1, cols + 1)
        ]
        goal = objects[rng.randrange(len(objects))]
        rng.choice((Role.LETTERS, Role.DIGITS))
        if not check_draw(rows, cols, objects, goal.letter, goal.digit):
            accepted += 1
    return accepted / draws
