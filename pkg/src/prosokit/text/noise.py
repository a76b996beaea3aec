"""Partial-word noise for language-model training text.

Words are turned into a false start followed by the full word (``program`` becomes
``prog- program``), so a language model trained on the text learns where children restart
words.
"""

import logging
from collections.abc import Iterable, Sequence
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt

from prosokit.decorators.log import log_stage
from prosokit.text.spelling import SpellingRules, normalize_spelling
from prosokit.text.tokens import DEFAULT_RULES, TokenFilterRules, is_english, remove_fillers

logger = logging.getLogger(__name__)


class NoiseConfig(BaseModel):
    """Settings of partial-word injection."""

    model_config = ConfigDict(frozen=True)

    word_probability: float = Field(
        0.1, ge=0.0, le=1.0, description="Probability of noising an eligible word"
    )
    min_word_length: int = Field(3, ge=3, description="Shortest word that can be noised")
    seed: NonNegativeInt = Field(0, description="Base random seed")


class NoisedLine(NamedTuple):
    """Tokens of a noised line with the number of eligible and noised words."""

    tokens: list[str]
    n_eligible: int
    n_noised: int


class NoiseSummary(NamedTuple):
    """Noised corpus lines and totals over the corpus."""

    lines: list[str]
    n_eligible: int
    n_noised: int


def partial_word(word: str, split: int, suffix: str = "-") -> str:
    """False start made of the first `split` characters of `word`.

    Examples
    --------
    >>> partial_word("program", 4)
    'prog-'
    """
    if not 1 <= split < len(word):
        error_msg = f"split index {split} is outside [1, {len(word) - 1}] for '{word}'"
        raise ValueError(error_msg)
    return f"{word[:split]}{suffix}"


def noise_tokens(
    tokens: Sequence[str],
    config: NoiseConfig,
    rng: np.random.Generator,
    rules: TokenFilterRules = DEFAULT_RULES,
) -> NoisedLine:
    """Inject partial words using an existing generator.

    Only English words of at least `min_word_length` characters are eligible; other
    tokens draw no random numbers.
    """
    output: list[str] = []
    n_eligible = n_noised = 0
    for token in tokens:
        if len(token) >= config.min_word_length and is_english(token, rules):
            n_eligible += 1
            if rng.random() < config.word_probability:
                split = int(rng.integers(1, len(token)))
                output.append(partial_word(token, split, rules.false_start_suffix))
                n_noised += 1
        output.append(token)
    return NoisedLine(output, n_eligible, n_noised)


def inject_partial_words(
    line: Sequence[str],
    config: NoiseConfig,
    rules: TokenFilterRules = DEFAULT_RULES,
    line_index: int = 0,
) -> list[str]:
    """Replace randomly chosen words by a partial word followed by the word.

    Each eligible word is selected independently with probability `word_probability`;
    the split point is uniform in ``[1, len(word) - 1]``. The random stream depends only on
    ``(config.seed, line_index)``.

    Parameters
    ----------
    line : Sequence[str]
        Tokens of one sentence.
    config : NoiseConfig
        Injection settings.
    rules : TokenFilterRules, optional
        Rules deciding which tokens are English.
    line_index : int, optional
        Position of the line in its corpus, by default 0.

    Returns
    -------
    list[str]
        Noised tokens.

    Examples
    --------
    >>> inject_partial_words(["i", "am", "ok"], NoiseConfig(word_probability=1.0))
    ['i', 'am', 'ok']
    >>> inject_partial_words(["program"], NoiseConfig(word_probability=1.0))[1]
    'program'
    """
    rng = np.random.default_rng([config.seed, line_index])
    return noise_tokens(line, config, rng, rules).tokens


@log_stage(logger, "noise corpus")
def noise_corpus(
    lines: Iterable[str],
    config: NoiseConfig,
    rules: TokenFilterRules = DEFAULT_RULES,
    kaldi_text: bool = False,
    drop_fillers: bool = False,
    spelling: SpellingRules | None = None,
) -> NoiseSummary:
    """Noise every line of a corpus.

    Line ``i`` uses a generator seeded with ``(seed, i)``, so results do not depend on how
    the corpus is split. Optional steps run before the injection: spelling normalization,
    then filler removal.

    Parameters
    ----------
    lines : Iterable[str]
        Sentences, or Kaldi ``text`` lines when `kaldi_text` is set.
    config : NoiseConfig
        Injection settings.
    rules : TokenFilterRules, optional
        Rules deciding which tokens are English.
    kaldi_text : bool, optional
        Keep the first field (utterance id) untouched, by default False.
    drop_fillers : bool, optional
        Remove filler tokens, by default False.
    spelling : SpellingRules | None, optional
        Spelling rules to apply, by default none.

    Returns
    -------
    NoiseSummary
        Output lines (without newlines) and counts.
    """
    output: list[str] = []
    n_eligible = n_noised = 0
    for index, line in enumerate(lines):
        tokens = line.split()
        prefix: list[str] = []
        if kaldi_text and tokens:
            prefix, tokens = tokens[:1], tokens[1:]
        if spelling is not None:
            tokens = normalize_spelling(tokens, spelling)
        if drop_fillers:
            tokens = remove_fillers(tokens, rules)

        noised = noise_tokens(tokens, config, np.random.default_rng([config.seed, index]), rules)
        output.append(" ".join(prefix + noised.tokens))
        n_eligible += noised.n_eligible
        n_noised += noised.n_noised

    logger.info("Noised %d of %d eligible words in %d lines", n_noised, n_eligible, len(output))
    return NoiseSummary(output, n_eligible, n_noised)
