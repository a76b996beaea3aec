"""Token classification and filtering of transcripts.

Transcripts mix English words with markers that scoring ignores: unknown or foreign words
(``<unk>``, ``<unk-it>``), fillers (``@uh``, ``@m``) and false starts (``pro-``).
"""

import logging
from collections.abc import Iterable
from enum import StrEnum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from prosokit.errors import ConfigurationError
from prosokit.io.yamlio import load_yaml

logger = logging.getLogger(__name__)


class TokenClass(StrEnum):
    """Class of a transcript token."""

    ENGLISH = "English"
    UNK = "Unk"
    FILLER = "Filler"
    FALSE_START = "FalseStart"


class TokenFilterRules(BaseModel):
    """Rules that tell English words from non-English tokens."""

    model_config = ConfigDict(frozen=True)

    unk_tokens: frozenset[str] = Field(
        frozenset({"<unk>", "<unk-it>", "<unk-de>"}),
        min_length=1,
        description="Literal unknown-word tokens",
    )
    filler_prefix: str = Field("@", min_length=1, max_length=1, description="Filler prefix")
    false_start_suffix: str = Field(
        "-", min_length=1, max_length=1, description="Suffix of partial words"
    )
    match_unk_variants: bool = Field(
        True, description="Treat every '<unk...>' token as unknown"
    )


DEFAULT_RULES = TokenFilterRules()


def classify_token(token: str, rules: TokenFilterRules = DEFAULT_RULES) -> TokenClass:
    """Classify a token; unknown words win over fillers, fillers over false starts.

    Parameters
    ----------
    token : str
        Non-empty token.
    rules : TokenFilterRules, optional
        Classification rules, by default the standard ones.

    Returns
    -------
    TokenClass
        The class of the token.

    Raises
    ------
    ValueError
        If the token is empty.

    Examples
    --------
    >>> classify_token("<unk-it>")
    <TokenClass.UNK: 'Unk'>
    >>> classify_token("pro-")
    <TokenClass.FALSE_START: 'FalseStart'>
    >>> classify_token("@m"), classify_token("watch")
    (<TokenClass.FILLER: 'Filler'>, <TokenClass.ENGLISH: 'English'>)
    >>> classify_token("-")
    <TokenClass.ENGLISH: 'English'>
    """
    if not token:
        error_msg = "Cannot classify an empty token"
        raise ValueError(error_msg)
    if token in rules.unk_tokens or (
        rules.match_unk_variants and token.startswith("<unk") and token.endswith(">")
    ):
        return TokenClass.UNK
    if token.startswith(rules.filler_prefix):
        return TokenClass.FILLER
    if len(token) >= 2 and token.endswith(rules.false_start_suffix):  # noqa: PLR2004
        return TokenClass.FALSE_START
    return TokenClass.ENGLISH


def is_english(token: str, rules: TokenFilterRules = DEFAULT_RULES) -> bool:
    """Return True for tokens that scoring keeps."""
    return classify_token(token, rules) is TokenClass.ENGLISH


def filter_tokens(tokens: Iterable[str], rules: TokenFilterRules = DEFAULT_RULES) -> list[str]:
    """Keep the English tokens, in order.

    Examples
    --------
    >>> " ".join(filter_tokens("<unk> in <unk> the people i watch the".split()))
    'in the people i watch the'
    """
    return [token for token in tokens if is_english(token, rules)]


def remove_fillers(tokens: Iterable[str], rules: TokenFilterRules = DEFAULT_RULES) -> list[str]:
    """Drop filler tokens only, keeping unknown words and false starts.

    Examples
    --------
    >>> remove_fillers(["@uh", "pro-", "program", "<unk>"])
    ['pro-', 'program', '<unk>']
    """
    return [token for token in tokens if classify_token(token, rules) is not TokenClass.FILLER]


def load_filter_rules(path: Path) -> TokenFilterRules:
    """Read token filter rules from a YAML file; missing keys keep their defaults.

    Raises
    ------
    ConfigurationError
        If the values are invalid.
    """
    try:
        return TokenFilterRules.model_validate(load_yaml(path))
    except ValidationError as err:
        error_msg = f"Invalid token filter rules in '{path}': {err}"
        logger.error(error_msg)
        raise ConfigurationError(error_msg) from err
