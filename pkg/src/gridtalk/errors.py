"""Shared exception types for the game engine and agents."""
from __future__ import annotations


class GameError(Exception):
    """Base class for all gridtalk errors."""


class RuleViolationError(GameError):
    """An action broke a game rule.

    Attributes:
        rule: short machine-readable rule identifier, e.g. "first_step_click".
    """

    def __init__(self, rule: str, message: str):
        super().__init__(message)
        self.rule = rule


class GameOverError(RuleViolationError):
    """An action was submitted to a finished game."""

    def __init__(self, message: str = "the game is already over"):
        super().__init__("game_over", message)


class UnknownWordError(RuleViolationError):
    """A message used a word outside the vocabulary."""

    def __init__(self, word: str):
        super().__init__("unknown_word", f"unknown word: {word!r}")
        self.word = word


class MalformedHistoryError(GameError):
    """An action sequence cannot be interpreted (e.g. a verifying message with
    no preceding informative message to bind to)."""


class ContradictionError(GameError):
    """Observed evidence left an empty belief support."""


class PolicyUndefinedError(GameError):
    """A policy could not produce a distribution for this state."""


class GenerationError(GameError):
    """Scenario sampling failed to satisfy the acceptance criteria."""
