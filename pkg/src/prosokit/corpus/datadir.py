"""Kaldi-style data directories.

A data directory holds ``wav.scp`` (recording to WAV path), ``text`` (utterance to
tokens), ``utt2spk`` (utterance to speaker), an optional ``segments`` file cutting
utterances out of recordings and an optional ``spk2group`` file (speaker to group
label, e.g. a proficiency level or an age group).
"""

import logging
from collections import defaultdict
from pathlib import Path
from typing import NamedTuple

from pydantic import BaseModel, ConfigDict

from prosokit.dsp.audio import AudioBuffer, read_wav, wav_duration
from prosokit.errors import DataDirError, FormatError
from prosokit.io.filesfolders import create_folder, resolve_path
from prosokit.io.kaldi import read_scalar_table, read_table, read_transcripts, write_table

logger = logging.getLogger(__name__)

WAV_SCP = "wav.scp"
TEXT = "text"
UTT2SPK = "utt2spk"
SPK2UTT = "spk2utt"
SEGMENTS = "segments"
SPK2GROUP = "spk2group"

REQUIRED_FILES = (WAV_SCP, TEXT, UTT2SPK)


class Segment(NamedTuple):
    """Excerpt ``[begin, end)`` in seconds of a recording."""

    recording: str
    begin: float
    end: float


class DataDir(BaseModel):
    """In-memory view of a data directory.

    Attributes
    ----------
    wav_map : dict[str, Path]
        Recording id to WAV file. Recording ids are utterance ids when there are no
        segments.
    text : dict[str, tuple[str, ...]]
        Utterance id to tokens.
    utt2spk : dict[str, str]
        Utterance id to speaker id.
    segments : dict[str, Segment] | None
        Utterance id to segment, when utterances are excerpts of recordings.
    groups : dict[str, str] | None
        Speaker id to group label.
    """

    model_config = ConfigDict(frozen=True)

    wav_map: dict[str, Path]
    text: dict[str, tuple[str, ...]]
    utt2spk: dict[str, str]
    segments: dict[str, Segment] | None = None
    groups: dict[str, str] | None = None

    def __len__(self) -> int:
        """Return the number of utterances."""
        return len(self.text)

    @property
    def utterances(self) -> list[str]:
        """Sorted utterance ids."""
        return sorted(self.text)

    @property
    def speakers(self) -> list[str]:
        """Sorted speaker ids."""
        return sorted(set(self.utt2spk.values()))

    def audio_path(self, utt_id: str) -> Path:
        """WAV file holding the utterance."""
        recording = self.segments[utt_id].recording if self.segments else utt_id
        return self.wav_map[recording]

    def read_audio(self, utt_id: str) -> AudioBuffer:
        """Read the samples of one utterance, cutting its segment when there is one."""
        if self.segments:
            segment = self.segments[utt_id]
            return read_wav(self.wav_map[segment.recording], segment.begin, segment.end)
        return read_wav(self.wav_map[utt_id])

    def duration(self, utt_id: str) -> float:
        """Duration in seconds, from the segment or else from the WAV header."""
        if self.segments:
            segment = self.segments[utt_id]
            return segment.end - segment.begin
        return wav_duration(self.wav_map[utt_id])

    def problems(self) -> list[str]:
        """List every inconsistency between the tables (empty when valid).

        Examples
        --------
        >>> datadir = DataDir(
        ...     wav_map={"u1": Path("u1.wav")},
        ...     text={"u1": ("hello",), "u2": ("hi",)},
        ...     utt2spk={"u1": "s1", "u2": "s1"},
        ... )
        >>> datadir.problems()
        ["utterance 'u2' is in text, utt2spk but not in wav.scp"]
        """
        problems: list[str] = []
        source_name = SEGMENTS if self.segments is not None else WAV_SCP
        source = set(self.segments if self.segments is not None else self.wav_map)
        tables = {source_name: source, TEXT: set(self.text), UTT2SPK: set(self.utt2spk)}
        every_id = set().union(*tables.values())
        for utt_id in sorted(every_id):
            present = [name for name, keys in tables.items() if utt_id in keys]
            problems.extend(
                f"utterance '{utt_id}' is in {', '.join(present)} but not in {name}"
                for name, keys in tables.items()
                if utt_id not in keys
            )

        for utt_id, segment in sorted((self.segments or {}).items()):
            if segment.recording not in self.wav_map:
                problems.append(
                    f"segment '{utt_id}' refers to unknown recording '{segment.recording}'"
                )
            if not 0.0 <= segment.begin < segment.end:
                problems.append(
                    f"segment '{utt_id}' has invalid times {segment.begin}-{segment.end}"
                )

        return problems

    def check(self, root: Path | None = None) -> None:
        """Raise :class:`DataDirError` listing every problem, if any."""
        problems = self.problems()
        if problems:
            error = DataDirError(root or Path(), problems)
            logger.error(str(error))
            raise error


def _read_segments(path: Path) -> dict[str, Segment]:
    segments: dict[str, Segment] = {}
    for utt_id, fields in read_table(path, min_fields=3).items():
        try:
            segments[utt_id] = Segment(fields[0], float(fields[1]), float(fields[2]))
        except ValueError as err:
            error_msg = f"segment '{utt_id}' has non numeric times"
            raise FormatError(error_msg, path) from err
    return segments


def load_datadir(root: Path) -> DataDir:
    """Load and cross-validate a data directory.

    Relative WAV paths are resolved against the working directory, as Kaldi does.

    Parameters
    ----------
    root : Path
        Directory holding at least ``wav.scp``, ``text`` and ``utt2spk``.

    Returns
    -------
    DataDir
        The validated directory.

    Raises
    ------
    DataDirError
        If required files are missing or the tables disagree; every problem is listed.
    FormatError
        If a file is malformed or repeats an id.
    """
    missing = [name for name in REQUIRED_FILES if not (root / name).is_file()]
    if missing:
        error = DataDirError(root, [f"missing file '{name}'" for name in missing])
        logger.error(str(error))
        raise error

    wav_map = {
        recording: resolve_path(path)
        for recording, path in read_scalar_table(root / WAV_SCP).items()
    }
    segments = _read_segments(root / SEGMENTS) if (root / SEGMENTS).is_file() else None
    groups = read_scalar_table(root / SPK2GROUP) if (root / SPK2GROUP).is_file() else None
    datadir = DataDir(
        wav_map=wav_map,
        text={utt: tuple(tokens) for utt, tokens in read_transcripts(root / TEXT).items()},
        utt2spk=read_scalar_table(root / UTT2SPK),
        segments=segments,
        groups=groups,
    )
    datadir.check(root)
    logger.info(
        "Loaded '%s': %d utterances, %d speakers", root, len(datadir), len(datadir.speakers)
    )
    return datadir


def write_datadir(datadir: DataDir, root: Path) -> None:
    """Write a data directory, every table sorted by key.

    ``spk2utt`` is derived from ``utt2spk``; ``segments`` and ``spk2group`` are written
    only when present.

    Parameters
    ----------
    datadir : DataDir
        Directory contents.
    root : Path
        Output directory, created when missing.
    """
    create_folder(root)
    write_table(root / WAV_SCP, {key: str(path) for key, path in datadir.wav_map.items()})
    write_table(root / TEXT, datadir.text)
    write_table(root / UTT2SPK, datadir.utt2spk)

    spk2utt: dict[str, list[str]] = defaultdict(list)
    for utt_id in datadir.utterances:
        spk2utt[datadir.utt2spk[utt_id]].append(utt_id)
    write_table(root / SPK2UTT, spk2utt)

    if datadir.segments is not None:
        write_table(
            root / SEGMENTS,
            {
                utt: f"{seg.recording} {seg.begin:.10g} {seg.end:.10g}"
                for utt, seg in datadir.segments.items()
            },
        )
    if datadir.groups is not None:
        write_table(root / SPK2GROUP, datadir.groups)
