"""Spelling normalization of transcripts."""

import logging
from collections.abc import Sequence
from pathlib import Path
from typing import NamedTuple

from pydantic import BaseModel, ConfigDict, field_validator

from prosokit.errors import FormatError
from prosokit.io.filesfolders import open_file

logger = logging.getLogger(__name__)


class SpellingRule(NamedTuple):
    """Replace the token sequence `match` by `replacement`."""

    match: tuple[str, ...]
    replacement: tuple[str, ...]


class SpellingRules(BaseModel):
    """Ordered rules; at each position the longest matching rule is applied."""

    model_config = ConfigDict(frozen=True)

    rules: tuple[SpellingRule, ...] = ()

    @field_validator("rules")
    @classmethod
    def _non_empty_matches(cls, rules: tuple[SpellingRule, ...]) -> tuple[SpellingRule, ...]:
        for rule in rules:
            if not rule.match:
                error_msg = "spelling rules need at least one token to match"
                raise ValueError(error_msg)
        return rules

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[str, str]]) -> "SpellingRules":
        """Build rules from ``(match, replacement)`` strings split on whitespace.

        Examples
        --------
        >>> SpellingRules.from_pairs([("coca-cola", "coca cola")]).rules[0].replacement
        ('coca', 'cola')
        """
        return cls(
            rules=tuple(
                SpellingRule(tuple(match.split()), tuple(replacement.split()))
                for match, replacement in pairs
            )
        )

    @classmethod
    def default(cls) -> "SpellingRules":
        """British spellings and split compounds used by the reference transcripts."""
        return cls.from_pairs([("favorite", "favourite"), ("coca-cola", "coca cola")])


def normalize_spelling(tokens: Sequence[str], rules: SpellingRules | None = None) -> list[str]:
    """Apply spelling rules left to right, longest match first.

    Replaced tokens are not matched again.

    Parameters
    ----------
    tokens : Sequence[str]
        Transcript tokens.
    rules : SpellingRules | None, optional
        Rules to apply, by default :meth:`SpellingRules.default`.

    Returns
    -------
    list[str]
        Normalized tokens.

    Examples
    --------
    >>> " ".join(normalize_spelling("my favorite coca-cola".split()))
    'my favourite coca cola'
    """
    rules = SpellingRules.default() if rules is None else rules
    # stable sort: rules of equal length keep their file order
    ordered = sorted(rules.rules, key=lambda rule: -len(rule.match))
    output: list[str] = []
    position = 0
    while position < len(tokens):
        for rule in ordered:
            end = position + len(rule.match)
            if tuple(tokens[position:end]) == rule.match:
                output.extend(rule.replacement)
                position = end
                break
        else:
            output.append(tokens[position])
            position += 1
    return output


def load_spelling_rules(path: Path) -> SpellingRules:
    """Read ``match<TAB>replacement`` rules, one per line.

    Blank lines and lines starting with ``#`` are skipped. An empty replacement deletes the
    match.

    Raises
    ------
    FormatError
        If a line has no tab or an empty match.
    """
    pairs: list[tuple[str, str]] = []
    with open_file(path, "r") as f:
        for number, line in enumerate(f, start=1):
            text = line.rstrip("\r\n")
            if not text.strip() or text.lstrip().startswith("#"):
                continue
            match, tab, replacement = text.partition("\t")
            if not tab or not match.strip():
                error_msg = "expected 'match<TAB>replacement'"
                raise FormatError(error_msg, path, number)
            pairs.append((match, replacement))
    logger.debug("Loaded %d spelling rules from '%s'", len(pairs), path)
    return SpellingRules.from_pairs(pairs)
