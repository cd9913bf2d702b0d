"""Tests for the random-text generator."""

import math
from collections import Counter
from itertools import islice

import pytest

from kernel_lexicon.errors import ParameterError
from kernel_lexicon.ingest.monkey import (
    MonkeyConfig,
    generate_monkey_text,
    geometric_length_law,
    monkey_alphabet,
)


class TestMonkeyConfig:
    """Tests for MonkeyConfig dataclass."""

    def test_default_values(self) -> None:
        """Should default to a 26-letter alphabet."""
        config = MonkeyConfig()

        assert config.alphabet_size == 26
        assert config.alphabet == "abcdefghijklmnopqrstuvwxyz"
        assert config.letter_probability == pytest.approx(0.82 / 26)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"alphabet_size": 0},
            {"space_probability": 0.0},
            {"space_probability": 1.0},
            {"target_tokens": 0},
            {"seed": 2**64},
        ],
    )
    def test_rejects_invalid_parameters(self, kwargs: dict) -> None:
        """Should reject parameters outside their domain."""
        with pytest.raises(ParameterError):
            MonkeyConfig(**kwargs)


class TestMonkeyAlphabet:
    """Tests for monkey_alphabet function."""

    def test_small_alphabet(self) -> None:
        """Should use the first Latin letters."""
        assert monkey_alphabet(3) == "abc"

    def test_extends_beyond_latin(self) -> None:
        """Should add distinct letters past 26."""
        letters = monkey_alphabet(30)

        assert len(letters) == 30
        assert len(set(letters)) == 30
        assert all(letter.isalpha() for letter in letters)


class TestGenerateMonkeyText:
    """Tests for generate_monkey_text function."""

    def test_exact_token_count(self) -> None:
        """Should emit exactly target_tokens words."""
        words = list(generate_monkey_text(MonkeyConfig(target_tokens=12_345, seed=1)))

        assert len(words) == 12_345
        assert all(words)

    def test_same_seed_same_stream(self) -> None:
        """Should be deterministic for a fixed seed."""
        config = MonkeyConfig(target_tokens=5000, seed=42)

        assert list(generate_monkey_text(config)) == list(generate_monkey_text(config))

    def test_different_seeds_differ(self) -> None:
        """Should produce different streams for different seeds."""
        a = list(generate_monkey_text(MonkeyConfig(target_tokens=500, seed=1)))
        b = list(generate_monkey_text(MonkeyConfig(target_tokens=500, seed=2)))

        assert a != b

    def test_prefix_independent_of_target(self) -> None:
        """Should emit the same prefix regardless of the requested length."""
        short = list(generate_monkey_text(MonkeyConfig(target_tokens=100, seed=9)))
        long = generate_monkey_text(MonkeyConfig(target_tokens=100_000, seed=9))

        assert short == list(islice(long, 100))

    def test_uses_only_alphabet_letters(self) -> None:
        """Should only emit letters from the configured alphabet."""
        config = MonkeyConfig(alphabet_size=4, target_tokens=2000, seed=3)

        letters = set("".join(generate_monkey_text(config)))

        assert letters <= set("abcd")

    def test_negative_seed(self) -> None:
        """Should accept negative seeds."""
        words = list(generate_monkey_text(MonkeyConfig(target_tokens=10, seed=-5)))

        assert len(words) == 10

    def test_length_distribution_matches_geometric_law(self) -> None:
        """Should agree with the closed-form length law at every short length."""
        n = 60_000
        p = 0.2
        config = MonkeyConfig(alphabet_size=5, space_probability=p, target_tokens=n, seed=7)
        lengths = Counter(len(word) for word in generate_monkey_text(config))
        expected = geometric_length_law(p, 6)

        for length, probability in expected.items():
            observed = lengths[length] / n
            standard_error = math.sqrt(probability * (1 - probability) / n)
            assert abs(observed - probability) <= 4 * standard_error, length


class TestGeometricLengthLaw:
    """Tests for geometric_length_law function."""

    def test_values(self) -> None:
        """Should follow (1 - p)^(L - 1) * p."""
        law = geometric_length_law(0.25, 3)

        assert law == pytest.approx({1: 0.25, 2: 0.1875, 3: 0.140625})

    def test_sums_towards_one(self) -> None:
        """Should sum to nearly one over many lengths."""
        assert sum(geometric_length_law(0.18, 200).values()) == pytest.approx(1.0)

    def test_rejects_bad_probability(self) -> None:
        """Should reject p outside (0, 1)."""
        with pytest.raises(ParameterError):
            geometric_length_law(1.5, 3)
