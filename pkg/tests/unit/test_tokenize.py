"""Tests for token policy and tokenization."""

import pytest

from kernel_lexicon.errors import IngestError, ParameterError
from kernel_lexicon.ingest.tokenize import (
    TokenPolicy,
    WordBoundaryRule,
    decode_text,
    tokenize,
)


class TestTokenPolicy:
    """Tests for TokenPolicy dataclass."""

    def test_default_values(self) -> None:
        """Should drop numbers and punctuation by default."""
        policy = TokenPolicy()

        assert policy.lowercase_fold is True
        assert policy.drop_numeric is True
        assert policy.drop_punctuation is True
        assert policy.min_token_length == 1
        assert policy.word_boundary_rule is WordBoundaryRule.UNICODE_WORDS

    def test_rejects_non_positive_min_length(self) -> None:
        """Should reject min_token_length below 1."""
        with pytest.raises(ParameterError):
            TokenPolicy(min_token_length=0)

    def test_coerces_rule_from_string(self) -> None:
        """Should accept the boundary rule as a plain string."""
        policy = TokenPolicy(word_boundary_rule="whitespace_split")  # type: ignore[arg-type]

        assert policy.word_boundary_rule is WordBoundaryRule.WHITESPACE_SPLIT

    def test_rejects_unknown_rule(self) -> None:
        """Should reject unknown boundary rules."""
        with pytest.raises(ValueError):
            TokenPolicy(word_boundary_rule="sentences")  # type: ignore[arg-type]


class TestTokenize:
    """Tests for tokenize function."""

    def test_splits_and_lowercases(self) -> None:
        """Should split words and fold case."""
        assert tokenize("The Cat sat") == ["the", "cat", "sat"]

    def test_drops_numbers_and_punctuation(self) -> None:
        """Should exclude numbers and punctuation."""
        assert tokenize("In 1984, 3.14 apples!") == ["in", "apples"]

    def test_empty_text(self) -> None:
        """Should return no tokens for empty or whitespace-only text."""
        assert tokenize("") == []
        assert tokenize("   \n\t ") == []

    def test_only_punctuation_and_digits(self) -> None:
        """Should return no tokens when nothing survives the policy."""
        assert tokenize("... 123 !!! 4,5") == []

    def test_unicode_letters(self) -> None:
        """Should keep non-Latin letters."""
        assert tokenize("Москва и Zürich") == ["москва", "и", "zürich"]

    def test_nfc_normalization(self) -> None:
        """Should treat composed and decomposed forms alike."""
        composed = "caf\u00e9"
        decomposed = "cafe\u0301"

        assert tokenize(decomposed) == tokenize(composed) == [composed]

    def test_keeps_case_when_folding_disabled(self) -> None:
        """Should preserve case when lowercase_fold is off."""
        policy = TokenPolicy(lowercase_fold=False)

        assert tokenize("The Cat", policy) == ["The", "Cat"]

    def test_min_token_length(self) -> None:
        """Should drop tokens shorter than the minimum."""
        policy = TokenPolicy(min_token_length=3)

        assert tokenize("a an the cats", policy) == ["the", "cats"]

    def test_keeps_punctuation_when_asked(self) -> None:
        """Should emit punctuation tokens when drop_punctuation is off."""
        policy = TokenPolicy(drop_punctuation=False, join_internal_punctuation=False)

        assert tokenize("well-known!", policy) == ["well", "-", "known", "!"]

    def test_joins_internal_punctuation(self) -> None:
        """Should keep hyphenated and apostrophe words whole."""
        policy = TokenPolicy(drop_punctuation=False)

        assert tokenize("a well-known dog's bone.", policy) == [
            "a",
            "well-known",
            "dog's",
            "bone",
            ".",
        ]

    def test_keeps_numbers_when_asked(self) -> None:
        """Should keep numeric tokens when drop_numeric is off."""
        policy = TokenPolicy(drop_numeric=False)

        assert tokenize("born 1984", policy) == ["born", "1984"]

    def test_whitespace_split_rule(self) -> None:
        """Should split on whitespace only and strip punctuation."""
        policy = TokenPolicy(word_boundary_rule=WordBoundaryRule.WHITESPACE_SPLIT)

        assert tokenize("dog's bone, well-known", policy) == ["dogs", "bone", "wellknown"]

    def test_accepts_bytes(self) -> None:
        """Should decode UTF-8 bytes before splitting."""
        assert tokenize("Grüße".encode()) == ["grüße"]

    def test_deterministic(self) -> None:
        """Should return identical tokens for identical inputs."""
        text = "It was the best of times, it was the worst of times."

        assert tokenize(text) == tokenize(text)

    def test_tokens_satisfy_policy(self) -> None:
        """Every emitted token should be admissible under its policy."""
        text = "Mr. O'Brien paid $3.50 for 2 well-known e-books; ça va?"
        for policy in (
            TokenPolicy(),
            TokenPolicy(min_token_length=2),
            TokenPolicy(word_boundary_rule=WordBoundaryRule.WHITESPACE_SPLIT),
        ):
            for token in tokenize(text, policy):
                assert policy.accepts(token), (policy, token)


class TestDecodeText:
    """Tests for decode_text function."""

    def test_decodes_valid_utf8(self) -> None:
        """Should decode valid UTF-8."""
        assert decode_text("naïve".encode()) == "naïve"

    def test_reports_byte_offset(self) -> None:
        """Should report the offset of the first invalid byte."""
        with pytest.raises(IngestError) as exc_info:
            decode_text(b"abc\xffdef", source="bad.txt")

        assert exc_info.value.byte_offset == 3
        assert exc_info.value.source == "bad.txt"
        assert "byte_offset=3" in str(exc_info.value)
