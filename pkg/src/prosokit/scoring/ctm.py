"""CTM hypotheses, confidence filtering and the threshold sweep.

A CTM line holds ``utt channel begin duration word [confidence]``; a missing confidence
is read as 1.0.
"""

import logging
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import NamedTuple

from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, ValidationError

from prosokit.decorators.log import log_stage
from prosokit.errors import FormatError, UndefinedMetricError
from prosokit.io.filesfolders import open_file
from prosokit.scoring.wer import modified_wer
from prosokit.text.tokens import DEFAULT_RULES, TokenFilterRules

logger = logging.getLogger(__name__)

_CTM_FIELDS = (5, 6)


class CtmEntry(BaseModel):
    """One decoded word with its timing and confidence."""

    model_config = ConfigDict(frozen=True)

    utt_id: str
    channel: str
    begin: NonNegativeFloat
    duration: NonNegativeFloat
    word: str
    confidence: float = Field(1.0, ge=0.0, le=1.0)


class ConfidenceFilterConfig(BaseModel):
    """Words are kept when ``confidence >= threshold``."""

    model_config = ConfigDict(frozen=True)

    threshold: float = Field(ge=0.0, le=1.0)


class SweepResult(NamedTuple):
    """Best threshold of a sweep and the WER obtained at every threshold."""

    best_threshold: float
    best_wer: float
    curve: list[tuple[float, float]]


def parse_ctm_line(line: str, path: Path | None = None, number: int | None = None) -> CtmEntry:
    """Parse one CTM line.

    Raises
    ------
    FormatError
        On a wrong number of fields, non numeric values, negative times or a confidence
        outside ``[0, 1]``.

    Examples
    --------
    >>> parse_ctm_line("utt1 1 0.50 0.20 hello 0.9").confidence
    0.9
    >>> parse_ctm_line("utt1 1 0.50 0.20 hello").confidence
    1.0
    """
    fields = line.split()
    if len(fields) not in _CTM_FIELDS:
        error_msg = f"expected 5 or 6 CTM fields, got {len(fields)}"
        raise FormatError(error_msg, path, number)
    try:
        values = {"begin": float(fields[2]), "duration": float(fields[3])}
        if len(fields) == _CTM_FIELDS[1]:
            values["confidence"] = float(fields[5])
        return CtmEntry(utt_id=fields[0], channel=fields[1], word=fields[4], **values)
    except ValidationError as err:
        error_msg = "; ".join(
            f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in err.errors()
        )
        raise FormatError(error_msg, path, number) from err
    except ValueError as err:
        error_msg = f"non numeric CTM field in '{line.strip()}'"
        raise FormatError(error_msg, path, number) from err


def read_ctm(path: Path) -> list[CtmEntry]:
    """Read a CTM file, skipping blank lines and ``;;`` comments."""
    entries: list[CtmEntry] = []
    with open_file(path, "r") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip() or line.startswith(";;"):
                continue
            entries.append(parse_ctm_line(line, path, number))
    return entries


def write_ctm(path: Path, entries: Iterable[CtmEntry]) -> None:
    """Write entries as CTM lines with their confidence."""
    with open_file(path, "w") as f:
        for entry in entries:
            f.write(
                f"{entry.utt_id} {entry.channel} {entry.begin:.2f} {entry.duration:.2f} "
                f"{entry.word} {entry.confidence:.4f}\n"
            )


def sort_ctm(entries: Iterable[CtmEntry]) -> list[CtmEntry]:
    """Sort by utterance then start time, keeping the file order of ties."""
    return sorted(entries, key=lambda entry: (entry.utt_id, entry.begin))


def filter_ctm(entries: Iterable[CtmEntry], config: ConfidenceFilterConfig) -> list[CtmEntry]:
    """Keep the words whose confidence reaches the threshold.

    Entries are first sorted by ``(utt_id, begin)``. A threshold of 0 keeps everything.

    Parameters
    ----------
    entries : Iterable[CtmEntry]
        Decoded words.
    config : ConfidenceFilterConfig
        Threshold.

    Returns
    -------
    list[CtmEntry]
        Kept words, sorted.
    """
    return [entry for entry in sort_ctm(entries) if entry.confidence >= config.threshold]


def ctm_to_transcripts(
    entries: Iterable[CtmEntry], utterances: Iterable[str] = ()
) -> dict[str, list[str]]:
    """Group words per utterance in time order.

    Utterances listed in `utterances` get an empty transcript when they have no words.
    """
    transcripts: dict[str, list[str]] = defaultdict(list)
    for utt_id in utterances:
        transcripts[utt_id] = []
    for entry in sort_ctm(entries):
        transcripts[entry.utt_id].append(entry.word)
    return dict(transcripts)


def threshold_grid(grid_step: float) -> list[float]:
    """Thresholds ``0, step, 2 step, ...`` up to 1, always ending at 1.

    Examples
    --------
    >>> threshold_grid(0.25)
    [0.0, 0.25, 0.5, 0.75, 1.0]
    >>> threshold_grid(0.3)
    [0.0, 0.3, 0.6, 0.9, 1.0]
    """
    if not 0.0 < grid_step <= 1.0:
        error_msg = f"grid_step must be in (0, 1], got {grid_step}"
        raise ValueError(error_msg)
    n_steps = math.floor(1.0 / grid_step + 1e-9)
    grid = [round(step * grid_step, 12) for step in range(n_steps + 1)]
    if not math.isclose(grid[-1], 1.0):
        grid.append(1.0)
    return [min(value, 1.0) for value in grid]


@log_stage(logger, "confidence threshold sweep")
def sweep_threshold(
    entries: Sequence[CtmEntry],
    ref: Mapping[str, Sequence[str]],
    rules: TokenFilterRules = DEFAULT_RULES,
    grid_step: float = 0.01,
) -> SweepResult:
    """Find the confidence threshold with the lowest modified WER.

    Parameters
    ----------
    entries : Sequence[CtmEntry]
        Decoded words with confidences.
    ref : Mapping[str, Sequence[str]]
        Reference transcripts.
    rules : TokenFilterRules, optional
        Token classification rules.
    grid_step : float, optional
        Spacing of the thresholds tried in ``[0, 1]``, by default 0.01.

    Returns
    -------
    SweepResult
        Best threshold (the smallest one on ties), its WER and the whole curve.

    Raises
    ------
    UndefinedMetricError
        If the reference has no English word.
    """
    curve: list[tuple[float, float]] = []
    best: tuple[float, float] | None = None
    for threshold in threshold_grid(grid_step):
        kept = filter_ctm(entries, ConfidenceFilterConfig(threshold=threshold))
        report = modified_wer(ref, ctm_to_transcripts(kept), rules)
        if report.wer is None:
            error_msg = "Cannot sweep thresholds against an empty reference"
            logger.error(error_msg)
            raise UndefinedMetricError(error_msg)
        curve.append((threshold, report.wer))
        if best is None or report.wer < best[1]:
            best = (threshold, report.wer)

    assert best is not None
    logger.info("Best threshold %.2f with WER %.2f%%", best[0], 100 * best[1])
    return SweepResult(best[0], best[1], curve)
