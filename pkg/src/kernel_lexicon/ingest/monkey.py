"""Random-text ("monkey typing") corpus generator.

Characters are drawn i.i.d.: a space with probability ``space_probability``,
otherwise one of ``alphabet_size`` letters uniformly. Words are the maximal
runs of letters between spaces.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from kernel_lexicon.errors import ParameterError

if TYPE_CHECKING:
    from collections.abc import Iterator

# Fixed so the stream depends on the seed alone
EMISSION_BLOCK = 1 << 16
# Letters beyond the Latin alphabet are taken from the CJK block
_EXTENDED_LETTERS_START = 0x4E00
_MAX_SEED = 2**64


@dataclass(frozen=True)
class MonkeyConfig:
    """Parameters of the random-text model."""

    alphabet_size: int = 26
    space_probability: float = 0.18
    target_tokens: int = 1_000_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.alphabet_size < 1:
            raise ParameterError(f"alphabet_size must be >= 1, got {self.alphabet_size}")
        if not 0.0 < self.space_probability < 1.0:
            raise ParameterError(
                f"space_probability must lie in (0, 1), got {self.space_probability}"
            )
        if self.target_tokens < 1:
            raise ParameterError(f"target_tokens must be positive, got {self.target_tokens}")
        if not -(2**63) <= self.seed < _MAX_SEED:
            raise ParameterError(f"seed must fit in 64 bits, got {self.seed}")

    @property
    def letter_probability(self) -> float:
        """Probability of each individual letter."""
        return (1.0 - self.space_probability) / self.alphabet_size

    @property
    def alphabet(self) -> str:
        """The letters available to the generator."""
        return monkey_alphabet(self.alphabet_size)


def monkey_alphabet(size: int) -> str:
    """Return ``size`` distinct lowercase letters."""
    letters = string.ascii_lowercase[:size]
    if size > len(string.ascii_lowercase):
        extra = size - len(string.ascii_lowercase)
        letters += "".join(chr(_EXTENDED_LETTERS_START + i) for i in range(extra))
    return letters


def generate_monkey_text(config: MonkeyConfig) -> Iterator[str]:
    """Generate exactly ``config.target_tokens`` random words.

    The same seed always yields the same stream.

    Args:
        config: Model parameters

    Yields:
        Words in emission order
    """
    rng = np.random.default_rng(config.seed % _MAX_SEED)
    symbols = np.array(list(config.alphabet + " "))
    space_index = config.alphabet_size

    emitted = 0
    carry = ""
    while True:
        is_space = rng.random(EMISSION_BLOCK) < config.space_probability
        letters = rng.integers(0, config.alphabet_size, EMISSION_BLOCK)
        codes = np.where(is_space, space_index, letters)
        pieces = "".join(symbols[codes]).split(" ")

        pieces[0] = carry + pieces[0]
        carry = pieces.pop()
        for word in pieces:
            if not word:
                continue
            yield word
            emitted += 1
            if emitted == config.target_tokens:
                return


def geometric_length_law(space_probability: float, max_length: int) -> dict[int, float]:
    """Closed-form word-length distribution of the monkey model.

    P(length = L) = (1 - p)^(L - 1) * p for L >= 1.
    """
    if not 0.0 < space_probability < 1.0:
        raise ParameterError(f"space_probability must lie in (0, 1), got {space_probability}")
    p = space_probability
    return {length: (1.0 - p) ** (length - 1) * p for length in range(1, max_length + 1)}
