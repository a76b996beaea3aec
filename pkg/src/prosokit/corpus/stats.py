"""Descriptive statistics of a data directory, overall and per speaker group."""

import logging
from collections import defaultdict
from pathlib import Path
from typing import NamedTuple

from pydantic import BaseModel, ConfigDict

from prosokit.corpus.datadir import DataDir
from prosokit.decorators.log import log_stage
from prosokit.errors import ProsokitError
from prosokit.pitch import track_pitch, write_pitch_csv
from prosokit.text.tokens import DEFAULT_RULES, TokenClass, classify_token
from prosokit.utils.pool import ordered_map

logger = logging.getLogger(__name__)

DEFAULT_GROUP = "all"

_ITEM_ERRORS = (ProsokitError, OSError, ValueError, RuntimeError)


class GroupStats(BaseModel):
    """Statistics of the utterances of one speaker group.

    Attributes
    ----------
    words_per_second : float
        Tokens divided by audio seconds.
    mean_pitch_hz : float | None
        Duration-weighted mean of the utterance mean pitch; None without voiced speech.
    partial_word_utt_pct : float
        Percentage of utterances with at least one false start.
    """

    model_config = ConfigDict(frozen=True)

    n_utterances: int
    n_speakers: int
    n_words: int
    duration_s: float
    words_per_second: float
    mean_pitch_hz: float | None
    partial_word_utt_pct: float


class CorpusStats(BaseModel):
    """Corpus totals and per-group statistics.

    Utterances whose audio cannot be read are listed in `skipped` and left out of every
    figure.
    """

    model_config = ConfigDict(frozen=True)

    n_utterances: int
    n_words: int
    n_speakers: int
    duration_hours: float
    per_group: dict[str, GroupStats]
    skipped: dict[str, str]


class _Job(NamedTuple):
    datadir: DataDir
    utt_id: str
    f_min: float
    f_max: float
    pitch_dir: Path | None


class _UttStats(NamedTuple):
    utt_id: str
    duration: float
    mean_f0: float | None
    error: str | None


def _utterance_stats(job: _Job) -> _UttStats:
    try:
        duration = job.datadir.duration(job.utt_id)
        track = track_pitch(job.datadir.read_audio(job.utt_id), job.f_min, job.f_max)
    except _ITEM_ERRORS as err:
        return _UttStats(job.utt_id, 0.0, None, f"{type(err).__name__}: {err}")
    if job.pitch_dir is not None:
        write_pitch_csv(track, job.pitch_dir / f"{job.utt_id}.csv")
    mean_f0 = track.mean_voiced_f0 if track.voiced_f0 else None
    return _UttStats(job.utt_id, duration, mean_f0, None)


def _group_stats(datadir: DataDir, results: list[_UttStats]) -> GroupStats:
    duration = sum(result.duration for result in results)
    n_words = sum(len(datadir.text[result.utt_id]) for result in results)
    voiced = [result for result in results if result.mean_f0 is not None]
    voiced_duration = sum(result.duration for result in voiced)
    weighted = sum((result.mean_f0 or 0.0) * result.duration for result in voiced)
    mean_pitch = weighted / voiced_duration if voiced_duration > 0 else None
    with_partial = sum(
        any(
            classify_token(token, DEFAULT_RULES) is TokenClass.FALSE_START
            for token in datadir.text[result.utt_id]
        )
        for result in results
    )
    return GroupStats(
        n_utterances=len(results),
        n_speakers=len({datadir.utt2spk[result.utt_id] for result in results}),
        n_words=n_words,
        duration_s=duration,
        words_per_second=n_words / duration if duration > 0 else 0.0,
        mean_pitch_hz=mean_pitch,
        partial_word_utt_pct=100.0 * with_partial / len(results),
    )


@log_stage(logger, "corpus statistics")
def compute_stats(
    datadir: DataDir,
    f_min: float = 100.0,
    f_max: float = 500.0,
    jobs: int = 1,
    pitch_dir: Path | None = None,
) -> CorpusStats:
    """Count words, speakers and hours, and describe every speaker group.

    Speakers without a group (or every speaker when the directory has no ``spk2group``)
    fall in the group ``all``. Groups with no readable utterance are omitted.

    Parameters
    ----------
    datadir : DataDir
        Corpus to describe.
    f_min : float, optional
        Lowest pitch searched in Hz, by default 100.
    f_max : float, optional
        Highest pitch searched in Hz, by default 500.
    jobs : int, optional
        Worker processes, by default 1.
    pitch_dir : Path | None, optional
        Folder receiving one ``time,f0,voiced`` CSV per utterance, by default none.

    Returns
    -------
    CorpusStats
        Totals and per-group statistics.
    """
    jobs_list = [
        _Job(datadir, utt_id, f_min, f_max, pitch_dir) for utt_id in datadir.utterances
    ]
    results = list(ordered_map(_utterance_stats, jobs_list, jobs))

    skipped = {result.utt_id: result.error for result in results if result.error is not None}
    for utt_id, error in skipped.items():
        logger.warning("Skipping '%s' in statistics: %s", utt_id, error)
    readable = [result for result in results if result.error is None]

    groups = datadir.groups or {}
    ungrouped = [speaker for speaker in datadir.speakers if speaker not in groups]
    if groups and ungrouped:
        logger.warning(
            "%d speakers have no group and are counted in '%s'", len(ungrouped), DEFAULT_GROUP
        )
    by_group: dict[str, list[_UttStats]] = defaultdict(list)
    for result in readable:
        by_group[groups.get(datadir.utt2spk[result.utt_id], DEFAULT_GROUP)].append(result)
    for label in sorted(set(groups.values()) - set(by_group)):
        logger.warning("Group '%s' has no readable utterance and is omitted", label)

    return CorpusStats(
        n_utterances=len(readable),
        n_words=sum(len(datadir.text[result.utt_id]) for result in readable),
        n_speakers=len({datadir.utt2spk[result.utt_id] for result in readable}),
        duration_hours=sum(result.duration for result in readable) / 3600.0,
        per_group={
            label: _group_stats(datadir, members) for label, members in sorted(by_group.items())
        },
        skipped=skipped,
    )
