"""Game state, actions, turn order, legality and utility for the two-player
grid dialogue game.

The world is a small grid of objects. Every object has two public properties
(color, shape) and two hidden symbols: a letter and a digit. One player sees
only the letters, the other only the digits, and both know the goal pair
(e.g. "B2"). Players alternate turns; a turn is either a short message or a
click on a cell. A click ends the game.

Private knowledge is represented as a bitmask over cells (row-major, bit i set
iff cell i carries the goal symbol visible to that player), so the full space
of candidate partner states for a 6-cell grid is the 64 masks 0..63.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .errors import GameOverError, RuleViolationError

COLORS = ("blue", "yellow", "green")
SHAPES = ("square", "diamond", "circle")
LETTERS = ("A", "B", "C")
DIGITS = ("1", "2", "3")

GRID_SHAPES = ((2, 3), (3, 2))


class Role(enum.Enum):
    """Which hidden symbol a player can see."""

    LETTERS = "letters"
    DIGITS = "digits"

    @property
    def other(self) -> "Role":
        return Role.DIGITS if self is Role.LETTERS else Role.LETTERS

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


def active_player(t: int, first_player: Role) -> Role:
    """Mover at 1-based time step t; the first player moves on odd steps."""
    if t < 1:
        raise ValueError(f"time step must be >= 1, got {t}")
    return first_player if t % 2 == 1 else first_player.other


@dataclass(frozen=True)
class GridObject:
    """One cell of the board. Coordinates are 1-based."""

    row: int
    col: int
    color: str
    shape: str
    letter: str
    digit: str

    def __post_init__(self) -> None:
        if self.color not in COLORS:
            raise ValueError(f"bad color {self.color!r}")
        if self.shape not in SHAPES:
            raise ValueError(f"bad shape {self.shape!r}")
        if self.letter not in LETTERS:
            raise ValueError(f"bad letter {self.letter!r}")
        if self.digit not in DIGITS:
            raise ValueError(f"bad digit {self.digit!r}")

    def symbol(self, role: Role) -> str:
        return self.letter if role is Role.LETTERS else self.digit


@dataclass(frozen=True)
class Scenario:
    """A full game instance: board layout, goal pair and turn order.

    Attributes:
        rows, cols: grid shape, one of 2x3 / 3x2.
        goal_letter, goal_digit: the target combination both players know.
        first_player: who moves at t=1.
        objects: one GridObject per cell, any order; validated to cover the
            grid exactly once and to contain exactly one goal object.
    """

    rows: int
    cols: int
    goal_letter: str
    goal_digit: str
    first_player: Role
    objects: tuple[GridObject, ...]

    def __post_init__(self) -> None:
        if (self.rows, self.cols) not in GRID_SHAPES:
            raise ValueError(f"unsupported grid {self.rows}x{self.cols}")
        if self.goal_letter not in LETTERS or self.goal_digit not in DIGITS:
            raise ValueError("bad goal pair")
        cells = {(o.row, o.col) for o in self.objects}
        want = {(r, c) for r in range(1, self.rows + 1) for c in range(1, self.cols + 1)}
        if cells != want or len(self.objects) != len(want):
            raise ValueError("objects must cover every cell exactly once")
        goals = [o for o in self.objects if o.letter == self.goal_letter and o.digit == self.goal_digit]
        if len(goals) != 1:
            raise ValueError(f"expected exactly one goal object, found {len(goals)}")
        # normalize storage to row-major order so equal boards compare equal
        object.__setattr__(self, "objects", tuple(sorted(self.objects, key=lambda o: (o.row, o.col))))

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    @property
    def n_states(self) -> int:
        return 1 << self.n_cells

    def cell_index(self, row: int, col: int) -> int:
        """Row-major 0-based index of a 1-based (row, col) cell."""
        if not (1 <= row <= self.rows and 1 <= col <= self.cols):
            raise ValueError(f"cell ({row},{col}) outside {self.rows}x{self.cols} grid")
        return (row - 1) * self.cols + (col - 1)

    def cell_of_index(self, index: int) -> tuple[int, int]:
        return index // self.cols + 1, index % self.cols + 1

    def object_at(self, row: int, col: int) -> GridObject:
        return self.objects[self.cell_index(row, col)]

    @cached_property
    def goal_cell(self) -> tuple[int, int]:
        """The (row, col) of the unique object carrying the goal pair."""
        for o in self.objects:
            if o.letter == self.goal_letter and o.digit == self.goal_digit:
                return (o.row, o.col)
        raise AssertionError("unreachable: validated in __post_init__")

    def private_state(self, role: Role) -> int:
        """Bitmask of cells goal-consistent from `role`'s point of view."""
        goal = self.goal_letter if role is Role.LETTERS else self.goal_digit
        mask = 0
        for o in self.objects:
            if o.symbol(role) == goal:
                mask |= 1 << self.cell_index(o.row, o.col)
        return mask

    def state_cells(self, state: int) -> tuple[tuple[int, int], ...]:
        """Decode a bitmask into 1-based (row, col) cells."""
        return tuple(self.cell_of_index(i) for i in range(self.n_cells) if state >> i & 1)

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "goal": {"letter": self.goal_letter, "digit": self.goal_digit},
            "first_player": self.first_player.value,
            "objects": [
                {
                    "row": o.row,
                    "col": o.col,
                    "color": o.color,
                    "shape": o.shape,
                    "letter": o.letter,
                    "digit": o.digit,
                }
                for o in self.objects
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Scenario":
        return cls(
            rows=int(data["rows"]),
            cols=int(data["cols"]),
            goal_letter=data["goal"]["letter"],
            goal_digit=data["goal"]["digit"],
            first_player=Role(data["first_player"]),
            objects=tuple(
                GridObject(
                    row=int(o["row"]),
                    col=int(o["col"]),
                    color=o["color"],
                    shape=o["shape"],
                    letter=o["letter"],
                    digit=o["digit"],
                )
                for o in data["objects"]
            ),
        )


@dataclass(frozen=True)
class Message:
    """A one- or two-word utterance. Word order is not meaningful, so words
    are stored sorted and `Message(("top","blue")) == Message(("blue","top"))`.
    """

    words: tuple[str, ...]

    def __post_init__(self) -> None:
        words = tuple(sorted(self.words))
        if not 1 <= len(words) <= 2:
            raise ValueError("messages carry one or two words")
        if len(set(words)) != len(words):
            raise ValueError("message words must be distinct")
        object.__setattr__(self, "words", words)

    @property
    def raw(self) -> str:
        return " ".join(self.words)

    def __str__(self) -> str:
        return self.raw


@dataclass(frozen=True)
class Click:
    """Click on a 1-based (row, col) cell. Ends the game."""

    row: int
    col: int

    def __str__(self) -> str:
        return f"click({self.row},{self.col})"


Action = Message | Click


def action_key(action: Action) -> tuple:
    """Stable sort key giving a deterministic iteration order over actions."""
    if isinstance(action, Message):
        return (0, action.words)
    return (1, action.row, action.col)


def action_to_json(action: Action) -> dict:
    if isinstance(action, Message):
        return {"type": "message", "raw": action.raw, "words": list(action.words)}
    return {"type": "click", "row": action.row, "col": action.col}


def action_from_json(data: Mapping) -> Action:
    kind = data.get("type")
    if kind == "message":
        words = data.get("words")
        if words is None:
            words = str(data["raw"]).split()
        return Message(tuple(words))
    if kind == "click":
        return Click(int(data["row"]), int(data["col"]))
    raise ValueError(f"unknown action type {kind!r}")


@dataclass(frozen=True)
class Turn:
    """One entry of the action sequence."""

    t: int
    player: Role
    action: Action


History = tuple[Turn, ...]
EMPTY_HISTORY: History = ()


def is_terminal(history: History) -> bool:
    """A game ends exactly when somebody clicks."""
    return bool(history) and isinstance(history[-1].action, Click)


def validate_history(scenario: Scenario, history: History) -> None:
    """Check time indexing, alternation and click finality; raises ValueError."""
    for i, turn in enumerate(history):
        if turn.t != i + 1:
            raise ValueError(f"turn {i} has t={turn.t}, expected {i + 1}")
        if turn.player is not active_player(turn.t, scenario.first_player):
            raise ValueError(f"turn {turn.t} played by {turn.player}, out of order")
        if isinstance(turn.action, Click) and i != len(history) - 1:
            raise ValueError("click must be the final action")


def extend(history: History, player: Role, action: Action) -> History:
    """Append an action without rule checking (see apply_action for checks)."""
    return history + (Turn(len(history) + 1, player, action),)


def utility(
    scenario: Scenario,
    history: History,
    *,
    action_cost: float = -50.0,
    reward: float = 100.0,
    penalty: float = -100.0,
) -> float:
    """Team utility of a finished game: a per-action cost plus the click
    reward or penalty. Both players share this value."""
    if not is_terminal(history):
        raise ValueError("utility is defined for finished games only")
    click = history[-1].action
    assert isinstance(click, Click)
    hit = (click.row, click.col) == scenario.goal_cell
    return action_cost * len(history) + (reward if hit else penalty)


def abandon_utility(
    history: History,
    *,
    action_cost: float = -50.0,
    penalty: float = -100.0,
) -> float:
    """Utility of walking away now: costs for the actions taken so far plus
    the miss penalty. Baseline against which continuations are scored."""
    return action_cost * len(history) + penalty


def parse_message(raw: str, vocabulary=None) -> Message:
    """Parse free text into a Message, rejecting unknown words strictly."""
    from . import semantics

    vocab = vocabulary or semantics.DEFAULT_VOCABULARY
    tokens = raw.split()
    if not tokens:
        raise RuleViolationError("empty_message", "message has no words")
    if len(tokens) > 2:
        raise RuleViolationError("too_many_words", "messages carry at most two words")
    for tok in tokens:
        if tok not in vocab.all_words:
            from .errors import UnknownWordError

            raise UnknownWordError(tok)
    if len(set(tokens)) != len(tokens):
        raise RuleViolationError("repeated_word", "message words must be distinct")
    return Message(tuple(tokens))


def action_universe(scenario: Scenario, vocabulary=None) -> tuple[Action, ...]:
    """Every action that can ever occur in this scenario, in a fixed order:
    single informative words, two-word combinations, verifying words, then
    clicks row-major. Planners index distributions against this order."""
    from . import semantics

    vocab = vocabulary or semantics.DEFAULT_VOCABULARY
    words = vocab.informative
    actions: list[Action] = [Message((w,)) for w in words]
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            actions.append(Message((words[i], words[j])))
    actions.extend(Message((w,)) for w in vocab.verifying)
    for idx in range(scenario.n_cells):
        actions.append(Click(*scenario.cell_of_index(idx)))
    return tuple(actions)


def legal_actions(
    scenario: Scenario,
    history: History,
    role: Role | None = None,
    own_state: int | None = None,
    vocabulary=None,
) -> tuple[Action, ...]:
    """Actions available to the mover: messages the speaker can truthfully
    send, a yes/no reply when the partner just sent an informative message,
    and clicks on own goal-consistent cells (never on the first step)."""
    from . import semantics

    vocab = vocabulary or semantics.DEFAULT_VOCABULARY
    if is_terminal(history):
        raise GameOverError()
    t = len(history) + 1
    if role is None:
        role = active_player(t, scenario.first_player)
    if own_state is None:
        own_state = scenario.private_state(role)

    out: list[Action] = []
    for action in action_universe(scenario, vocab):
        if isinstance(action, Message):
            if semantics.is_verifying(action, vocab):
                if history and isinstance(history[-1].action, Message) \
                        and history[-1].player is not role \
                        and semantics.is_informative(history[-1].action, vocab):
                    out.append(action)
            elif semantics.speaker_valid(scenario, action, own_state, vocab):
                out.append(action)
        else:
            if t >= 2 and own_state >> scenario.cell_index(action.row, action.col) & 1:
                out.append(action)
    return tuple(out)


def apply_action(
    scenario: Scenario,
    history: History,
    action: Action,
    role: Role | None = None,
    vocabulary=None,
) -> History:
    """Validate an action against the rules and append it.

    Raises RuleViolationError with a machine-readable `rule` naming the
    violated constraint, or GameOverError for actions after a click.
    """
    from . import semantics

    vocab = vocabulary or semantics.DEFAULT_VOCABULARY
    if is_terminal(history):
        raise GameOverError()
    t = len(history) + 1
    mover = active_player(t, scenario.first_player)
    if role is not None and role is not mover:
        raise RuleViolationError("not_your_turn", f"it is {mover.value}'s turn")
    own_state = scenario.private_state(mover)

    if isinstance(action, Click):
        if t == 1:
            raise RuleViolationError("first_step_click", "clicking is not allowed on the first step")
        if not (1 <= action.row <= scenario.rows and 1 <= action.col <= scenario.cols):
            raise RuleViolationError("click_out_of_bounds", f"no cell at ({action.row},{action.col})")
        if not own_state >> scenario.cell_index(action.row, action.col) & 1:
            raise RuleViolationError(
                "click_not_consistent", "players may only click cells consistent with their own symbols"
            )
        return extend(history, mover, action)

    for word in action.words:
        if word not in vocab.all_words:
            from .errors import UnknownWordError

            raise UnknownWordError(word)
    if semantics.is_verifying(action, vocab):
        if len(action.words) != 1:
            raise RuleViolationError("verifying_word_combined", "yes/no cannot be combined with other words")
        prev = history[-1] if history else None
        if prev is None or not isinstance(prev.action, Message) \
                or prev.player is mover or not semantics.is_informative(prev.action, vocab):
            raise RuleViolationError(
                "verify_without_antecedent", "yes/no must answer the partner's informative message"
            )
        return extend(history, mover, action)

    if not semantics.speaker_valid(scenario, action, own_state, vocab):
        raise RuleViolationError(
            "not_speaker_valid", f"{action.raw!r} does not hold for any of the speaker's goal cells"
        )
    return extend(history, mover, action)


@dataclass(frozen=True)
class PolicyDistribution:
    """A probability distribution over actions.

    Iteration, sampling and argmax all follow the deterministic action_key
    order so identical inputs reproduce identical games.
    """

    probs: Mapping[Action, float]
    _order: tuple[Action, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", dict(self.probs))
        object.__setattr__(self, "_order", tuple(sorted(self.probs, key=action_key)))

    def prob(self, action: Action, default: float = 0.0) -> float:
        return self.probs.get(action, default)

    def items(self) -> Iterator[tuple[Action, float]]:
        for a in self._order:
            yield a, self.probs[a]

    def support(self) -> tuple[Action, ...]:
        return tuple(a for a in self._order if self.probs[a] > 0.0)

    def __len__(self) -> int:
        return len(self.probs)

    def __contains__(self, action: Action) -> bool:
        return action in self.probs

    def total(self) -> float:
        return sum(self.probs.values())

    def sample(self, rng: random.Random) -> Action:
        u = rng.random() * self.total()
        acc = 0.0
        last = None
        for a in self._order:
            acc += self.probs[a]
            last = a
            if u < acc:
                return a
        assert last is not None, "cannot sample from an empty distribution"
        return last

    def argmax(self) -> Action:
        best = None
        best_p = float("-inf")
        for a in self._order:
            if self.probs[a] > best_p:
                best, best_p = a, self.probs[a]
        assert best is not None, "cannot take argmax of an empty distribution"
        return best


def uniform_distribution(actions: Iterable[Action]) -> PolicyDistribution:
    """Uniform over the given actions, exactly 1/N each, no smoothing."""
    acts = list(actions)
    if not acts:
        raise ValueError("no actions to distribute over")
    p = 1.0 / len(acts)
    return PolicyDistribution({a: p for a in acts})
