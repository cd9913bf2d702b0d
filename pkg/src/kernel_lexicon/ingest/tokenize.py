"""Token policy and tokenization."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import StrEnum

import regex

from kernel_lexicon.errors import IngestError, ParameterError


class WordBoundaryRule(StrEnum):
    """How raw text is cut into candidate words."""

    UNICODE_WORDS = "unicode_words"
    WHITESPACE_SPLIT = "whitespace_split"


_WORD = r"[\p{L}\p{M}\p{N}]+"
_LETTERS_ONLY = regex.compile(_WORD)
_JOINED = regex.compile(rf"{_WORD}(?:\p{{P}}+{_WORD})*|\p{{P}}+")
_SPLIT = regex.compile(rf"{_WORD}|\p{{P}}+")
_PUNCTUATION = regex.compile(r"\p{P}+")
_NUMERIC = regex.compile(r"[\p{N}\p{P}]*\p{N}[\p{N}\p{P}]*")


@dataclass(frozen=True)
class TokenPolicy:
    """Rules that turn text into tokens.

    Numbers and punctuation are excluded by default.
    """

    lowercase_fold: bool = True
    drop_numeric: bool = True
    drop_punctuation: bool = True
    min_token_length: int = 1
    word_boundary_rule: WordBoundaryRule = WordBoundaryRule.UNICODE_WORDS
    # Only meaningful when punctuation is kept: "well-known" stays one token
    join_internal_punctuation: bool = True

    def __post_init__(self) -> None:
        if self.min_token_length < 1:
            raise ParameterError(
                f"min_token_length must be a positive integer, got {self.min_token_length}"
            )
        # Accept plain strings from config files
        object.__setattr__(
            self, "word_boundary_rule", WordBoundaryRule(self.word_boundary_rule)
        )

    def accepts(self, token: str) -> bool:
        """Check whether a single token is admissible under this policy."""
        if len(token) < self.min_token_length or not token.strip():
            return False
        if self.lowercase_fold and token != token.lower():
            return False
        if self.drop_punctuation and _PUNCTUATION.search(token):
            return False
        if self.drop_numeric and _NUMERIC.fullmatch(token):
            return False
        return not any(ch.isspace() for ch in token)


def decode_text(data: bytes, source: str | None = None) -> str:
    """Decode UTF-8 bytes strictly.

    Raises:
        IngestError: With the byte offset of the first invalid sequence
    """
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise IngestError(
            f"Invalid UTF-8 sequence: {e.reason}", source=source, byte_offset=e.start
        ) from e


def _candidates(text: str, policy: TokenPolicy) -> list[str]:
    if policy.word_boundary_rule is WordBoundaryRule.WHITESPACE_SPLIT:
        pieces = text.split()
        if policy.drop_punctuation:
            pieces = [_PUNCTUATION.sub("", piece) for piece in pieces]
        return pieces

    if policy.drop_punctuation:
        return _LETTERS_ONLY.findall(text)
    if policy.join_internal_punctuation:
        return _JOINED.findall(text)
    return _SPLIT.findall(text)


def tokenize(text: str | bytes, policy: TokenPolicy | None = None) -> list[str]:
    """Split text into tokens according to a policy.

    The result is a pure function of (text, policy). Text is NFC-normalized
    before splitting.

    Args:
        text: Unicode text, or UTF-8 bytes
        policy: Token policy (defaults to TokenPolicy())

    Returns:
        Tokens in text order

    Raises:
        IngestError: If bytes are not valid UTF-8
    """
    if policy is None:
        policy = TokenPolicy()
    if isinstance(text, bytes):
        text = decode_text(text)
    if not text:
        return []

    text = unicodedata.normalize("NFC", text)
    tokens: list[str] = []
    for candidate in _candidates(text, policy):
        token = candidate.lower() if policy.lowercase_fold else candidate
        if not token:
            continue
        if policy.drop_numeric and _NUMERIC.fullmatch(token):
            continue
        if len(token) < policy.min_token_length:
            continue
        tokens.append(token)
    return tokens
