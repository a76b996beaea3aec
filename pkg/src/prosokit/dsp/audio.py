"""Audio buffers and 16-bit PCM WAV input/output."""

import logging
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
import soundfile as sf
from pydantic import BaseModel, ConfigDict, PositiveInt, field_validator

from prosokit.errors import UnsupportedFormatError
from prosokit.io.filesfolders import create_folder

logger = logging.getLogger(__name__)

PCM_SCALE = 32768.0
MAX_AMPLITUDE = 32767.0 / PCM_SCALE

# libsndfile subtypes that are PCM but not 16 bit
_OTHER_PCM_DEPTHS = {"PCM_S8", "PCM_U8", "PCM_24", "PCM_32"}


class AudioBuffer(BaseModel):
    """Mono signal with its sample rate.

    Attributes
    ----------
    samples : NDArray[np.float64]
        Read-only amplitudes, nominally in [-1, 1].
    sample_rate : int
        Samples per second.
    downmixed : bool
        True when the buffer was averaged from a multichannel file.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    samples: npt.NDArray[np.float64]
    sample_rate: PositiveInt
    downmixed: bool = False

    @field_validator("samples", mode="before")
    @classmethod
    def _as_readonly_vector(cls, value: Any) -> npt.NDArray[np.float64]:
        samples = np.array(value, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(samples)):
            error_msg = "Audio samples must be finite (no NaN or Inf)"
            raise ValueError(error_msg)
        samples.flags.writeable = False
        return samples

    def __len__(self) -> int:
        """Return the number of samples."""
        return int(self.samples.shape[0])

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self) / self.sample_rate


def _check_header(path: Path) -> Any:
    if not path.is_file():
        error_msg = f"Audio file '{path}' does not exist."
        logger.error(error_msg)
        raise FileNotFoundError(error_msg)
    try:
        info = sf.info(str(path))
    except sf.SoundFileError as err:
        error_msg = f"Malformed or unreadable WAV header in '{path}': {err}"
        logger.error(error_msg)
        raise UnsupportedFormatError("header", error_msg) from err

    if info.format != "WAV":
        error_msg = f"'{path}' is a {info.format} container, expected RIFF/WAVE"
        raise UnsupportedFormatError("container", error_msg)
    if info.subtype in _OTHER_PCM_DEPTHS:
        error_msg = f"'{path}' is {info.subtype_info}, only 16-bit PCM is supported"
        raise UnsupportedFormatError("bits_per_sample", error_msg)
    if info.subtype != "PCM_16":
        error_msg = f"'{path}' uses {info.subtype_info} encoding, only PCM is supported"
        raise UnsupportedFormatError("audio_format", error_msg)
    return info


def read_wav(path: Path, begin: float | None = None, end: float | None = None) -> AudioBuffer:
    """Read a 16-bit PCM WAV file.

    Samples are scaled by 1/32768. Multichannel files are averaged to mono and the
    result is flagged with ``downmixed``.

    Parameters
    ----------
    path : Path
        WAV file.
    begin : float | None, optional
        Start of the excerpt in seconds, by default the start of the file.
    end : float | None, optional
        End of the excerpt in seconds, by default the end of the file.

    Returns
    -------
    AudioBuffer
        The decoded signal.

    Raises
    ------
    UnsupportedFormatError
        For malformed headers, non WAV containers and encodings other than 16-bit PCM.
    """
    info = _check_header(path)
    start = round(begin * info.samplerate) if begin is not None else 0
    stop = round(end * info.samplerate) if end is not None else None
    data, sample_rate = sf.read(
        str(path), dtype="int16", always_2d=True, start=start, stop=stop
    )
    samples = data.astype(np.float64) / PCM_SCALE
    downmixed = samples.shape[1] > 1
    if downmixed:
        logger.warning("'%s' has %d channels, averaging to mono", path, samples.shape[1])
    return AudioBuffer(
        samples=samples.mean(axis=1), sample_rate=int(sample_rate), downmixed=downmixed
    )


def wav_duration(path: Path) -> float:
    """Duration in seconds read from the WAV header."""
    info = _check_header(path)
    return float(info.frames / info.samplerate)


def write_wav(audio: AudioBuffer, path: Path) -> None:
    """Write a buffer as a mono 16-bit PCM WAV file.

    Values are clamped to ``[-1, 32767/32768]`` and rounded to the nearest quantization
    step, so reading the file back differs by at most one step.

    Parameters
    ----------
    audio : AudioBuffer
        Signal to write.
    path : Path
        Output file; the folder is created when missing.
    """
    create_folder(path, includes_file=True)
    clamped = np.clip(audio.samples, -1.0, MAX_AMPLITUDE)
    pcm = np.round(clamped * PCM_SCALE).astype(np.int16)
    sf.write(str(path), pcm, audio.sample_rate, subtype="PCM_16", format="WAV")
