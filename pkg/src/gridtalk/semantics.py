"""Literal meaning of messages.

Every informative word denotes a set of cells (a bitmask). A state satisfies
a word when it has a goal-consistent cell inside that mask. A two-word
message reads as a conjunction when some single cell could carry both
properties, otherwise as a disjunction. "yes"/"no" verify the partner's
previous informative message against the speaker's own state.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .core import COLORS, SHAPES, History, Message, Role, Scenario
from .errors import MalformedHistoryError, UnknownWordError

POSITION_WORDS = ("top", "bottom", "left", "right", "middle")


@dataclass(frozen=True)
class Vocabulary:
    """The word inventory of the game."""

    informative: tuple[str, ...] = COLORS + SHAPES + POSITION_WORDS
    verifying: tuple[str, ...] = ("yes", "no")

    @property
    def all_words(self) -> frozenset[str]:
        return frozenset(self.informative) | frozenset(self.verifying)


DEFAULT_VOCABULARY = Vocabulary()


def is_verifying(message: Message, vocabulary: Vocabulary = DEFAULT_VOCABULARY) -> bool:
    return any(w in vocabulary.verifying for w in message.words)


def is_informative(message: Message, vocabulary: Vocabulary = DEFAULT_VOCABULARY) -> bool:
    return all(w in vocabulary.informative for w in message.words)


@lru_cache(maxsize=4096)
def property_mask(scenario: Scenario, word: str) -> int:
    """Bitmask of cells the word is true of. Position words name border lines;
    "middle" names the center line of the length-3 axis."""
    mask = 0
    for o in scenario.objects:
        if word in COLORS:
            hit = o.color == word
        elif word in SHAPES:
            hit = o.shape == word
        elif word == "top":
            hit = o.row == 1
        elif word == "bottom":
            hit = o.row == scenario.rows
        elif word == "left":
            hit = o.col == 1
        elif word == "right":
            hit = o.col == scenario.cols
        elif word == "middle":
            hit = o.col == 2 if scenario.cols == 3 else o.row == 2
        else:
            raise UnknownWordError(word)
        if hit:
            mask |= 1 << scenario.cell_index(o.row, o.col)
    return mask


def message_mask(scenario: Scenario, message: Message) -> int:
    """Single cell-mask equivalent of an informative message.

    For a pair of words with intersecting property masks the message asserts
    a goal-consistent cell with both properties (mask intersection); for
    disjoint property masks it asserts a goal-consistent cell with either
    property (mask union).
    """
    masks = [property_mask(scenario, w) for w in message.words]
    if len(masks) == 1:
        return masks[0]
    a, b = masks
    return a & b if a & b else a | b


def state_in_denotation(scenario: Scenario, message: Message, state: int) -> bool:
    """Whether a private state satisfies an informative message."""
    return state & message_mask(scenario, message) != 0


def message_denotation(scenario: Scenario, message: Message) -> frozenset[int]:
    """All private states satisfying an informative message."""
    mask = message_mask(scenario, message)
    return frozenset(s for s in range(scenario.n_states) if s & mask)


def speaker_valid(
    scenario: Scenario,
    message: Message,
    own_state: int,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> bool:
    """Whether the speaker may truthfully send an informative message."""
    if not is_informative(message, vocabulary):
        raise ValueError(f"{message.raw!r} is not an informative message")
    return state_in_denotation(scenario, message, own_state)


def constraint_at(
    scenario: Scenario,
    history: History,
    index: int,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> tuple[int, bool] | None:
    """Literal constraint the action at `index` places on its speaker's state,
    as (mask, inside): inside=True requires state & mask != 0, inside=False
    requires state & mask == 0. Clicks carry no literal constraint (None).

    Verifying messages bind to the immediately preceding action, which must
    be an informative message; otherwise the history is malformed.
    """
    action = history[index].action
    if not isinstance(action, Message):
        return None
    if is_verifying(action, vocabulary):
        word = action.words[0]
        if len(action.words) != 1 or word not in vocabulary.verifying:
            raise MalformedHistoryError(f"bad verifying message {action.raw!r} at t={index + 1}")
        if index == 0:
            raise MalformedHistoryError("yes/no with no preceding message")
        antecedent = history[index - 1].action
        if not isinstance(antecedent, Message) or not is_informative(antecedent, vocabulary):
            raise MalformedHistoryError("yes/no must follow an informative message")
        return message_mask(scenario, antecedent), word == "yes"
    return message_mask(scenario, action), True


def history_denotation(
    scenario: Scenario,
    history: History,
    viewer: Role,
    lookback: int | None = None,
    vocabulary: Vocabulary = DEFAULT_VOCABULARY,
) -> frozenset[int]:
    """Partner states consistent with everything the partner said.

    Only the partner's messages inside the lookback window constrain the
    result; the viewer's own actions and clicks never do. With no partner
    messages this is the full state space.
    """
    start = 0 if lookback is None else max(0, len(history) - lookback)
    states = set(range(scenario.n_states))
    for i in range(start, len(history)):
        if history[i].player is viewer:
            continue
        constraint = constraint_at(scenario, history, i, vocabulary)
        if constraint is None:
            continue
        mask, inside = constraint
        if inside:
            states = {s for s in states if s & mask}
        else:
            states = {s for s in states if not s & mask}
    return frozenset(states)
