"""Frame-level fundamental frequency estimation by normalized autocorrelation."""

import csv
import logging
import math
from pathlib import Path
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, PositiveFloat

from prosokit.dsp.audio import AudioBuffer
from prosokit.errors import ConfigurationError, UndefinedMetricError
from prosokit.io.filesfolders import open_file

logger = logging.getLogger(__name__)

FRAME_MS = 25.0
HOP_MS = 10.0
VOICING_THRESHOLD = 0.5
RMS_THRESHOLD = 0.01
# local maxima within this fraction of the best peak compete; the shortest lag wins
OCTAVE_TOLERANCE = 0.05


class PitchFrame(NamedTuple):
    """Pitch estimate of one analysis frame; `f0` is 0 when unvoiced."""

    time: float
    f0: float
    voiced: bool


class PitchTrack(BaseModel):
    """Sequence of frame estimates.

    Attributes
    ----------
    frames : tuple[PitchFrame, ...]
        One estimate per frame; `time` is the frame centre in seconds.
    f_min, f_max : float
        Search range in Hz; every voiced f0 lies inside it.
    """

    model_config = ConfigDict(frozen=True)

    frames: tuple[PitchFrame, ...]
    f_min: PositiveFloat
    f_max: PositiveFloat

    @property
    def voiced_f0(self) -> list[float]:
        """f0 values of the voiced frames."""
        return [frame.f0 for frame in self.frames if frame.voiced]

    @property
    def voiced_fraction(self) -> float:
        """Share of voiced frames, 0 for an empty track."""
        if not self.frames:
            return 0.0
        return len(self.voiced_f0) / len(self.frames)

    @property
    def mean_voiced_f0(self) -> float:
        """Mean f0 over voiced frames.

        Raises
        ------
        UndefinedMetricError
            If no frame is voiced.
        """
        voiced = self.voiced_f0
        if not voiced:
            error_msg = "Mean pitch is undefined for a track without voiced frames"
            raise UndefinedMetricError(error_msg)
        return float(np.mean(voiced))


def normalized_autocorrelation(
    frame: npt.NDArray[np.float64], max_lag: int
) -> npt.NDArray[np.float64]:
    """Autocorrelation at lags ``0..max_lag`` normalized by the energy of both overlaps.

    Examples
    --------
    >>> x = np.sin(2 * np.pi * np.arange(400) / 40)
    >>> round(float(normalized_autocorrelation(x, 40)[40]), 6)
    1.0
    """
    n = len(frame)
    raw = np.correlate(frame, frame, mode="full")[n - 1 : n + max_lag]
    cumulative = np.concatenate(([0.0], np.cumsum(frame**2)))
    lags = np.arange(max_lag + 1)
    head = cumulative[n - lags]
    tail = cumulative[n] - cumulative[lags]
    denominator = np.sqrt(head * tail)
    result = np.zeros(max_lag + 1)
    valid = denominator > 1e-12
    result[valid] = raw[valid] / denominator[valid]
    return result


def _best_lag(correlation: npt.NDArray[np.float64], lag_min: int, lag_max: int) -> int:
    window = correlation[lag_min : lag_max + 1]
    peak = float(window.max())
    for lag in range(lag_min, lag_max + 1):
        value = correlation[lag]
        if (
            value >= (1.0 - OCTAVE_TOLERANCE) * peak
            and value >= correlation[lag - 1]
            and value >= correlation[lag + 1]
        ):
            return lag
    return lag_min + int(np.argmax(window))


def _refine(correlation: npt.NDArray[np.float64], lag: int) -> float:
    before, centre, after = correlation[lag - 1], correlation[lag], correlation[lag + 1]
    curvature = before - 2.0 * centre + after
    if curvature >= 0.0:
        return float(lag)
    return float(lag + 0.5 * (before - after) / curvature)


def track_pitch(
    audio: AudioBuffer,
    f_min: float = 100.0,
    f_max: float = 500.0,
    voicing_threshold: float = VOICING_THRESHOLD,
    rms_threshold: float = RMS_THRESHOLD,
) -> PitchTrack:
    """Estimate f0 every 10 ms over 25 ms frames.

    A frame is voiced when its normalized autocorrelation peak in the lag range
    ``[rate / f_max, rate / f_min]`` reaches `voicing_threshold` and its RMS reaches
    `rms_threshold`. The lag is refined by parabolic interpolation. Frames are lengthened
    to two periods of `f_min` when 25 ms is shorter.

    Parameters
    ----------
    audio : AudioBuffer
        Signal to analyse.
    f_min : float, optional
        Lowest pitch searched in Hz, by default 100.
    f_max : float, optional
        Highest pitch searched in Hz, by default 500.
    voicing_threshold : float, optional
        Minimum normalized autocorrelation peak, by default 0.5.
    rms_threshold : float, optional
        Minimum frame RMS, by default 0.01.

    Returns
    -------
    PitchTrack
        Empty when the signal is shorter than one frame.

    Raises
    ------
    ConfigurationError
        Unless ``0 < f_min < f_max < rate / 2``.

    Examples
    --------
    >>> t = np.arange(16000) / 16000
    >>> tone = AudioBuffer(samples=0.5 * np.sin(2 * np.pi * 220 * t), sample_rate=16000)
    >>> track = track_pitch(tone)
    >>> abs(track.mean_voiced_f0 - 220) < 2
    True
    """
    rate = audio.sample_rate
    if not 0 < f_min < f_max < rate / 2:
        error_msg = f"Pitch range [{f_min}, {f_max}] Hz is invalid for {rate} Hz audio"
        logger.error(error_msg)
        raise ConfigurationError(error_msg)

    frame_length = max(round(rate * FRAME_MS / 1000), math.ceil(2 * rate / f_min))
    hop = round(rate * HOP_MS / 1000)
    lag_min = max(2, math.floor(rate / f_max))
    lag_max = min(math.ceil(rate / f_min), frame_length - 2)

    samples = audio.samples
    frames: list[PitchFrame] = []
    for start in range(0, len(samples) - frame_length + 1, hop):
        time = (start + frame_length / 2) / rate
        segment = samples[start : start + frame_length]
        rms = math.sqrt(float(np.mean(segment**2)))
        f0 = 0.0
        if rms >= rms_threshold:
            correlation = normalized_autocorrelation(segment - segment.mean(), lag_max + 1)
            lag = _best_lag(correlation, lag_min, lag_max)
            if correlation[lag] >= voicing_threshold:
                candidate = rate / _refine(correlation, lag)
                f0 = candidate if f_min <= candidate <= f_max else 0.0
        frames.append(PitchFrame(time=time, f0=f0, voiced=f0 > 0.0))

    if not frames:
        logger.debug("Signal of %d samples is shorter than one pitch frame", len(samples))
    return PitchTrack(frames=tuple(frames), f_min=f_min, f_max=f_max)


def write_pitch_csv(track: PitchTrack, path: Path) -> None:
    """Write a track as CSV with the header ``time,f0,voiced``."""
    with open_file(path, "w") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["time", "f0", "voiced"])
        for frame in track.frames:
            writer.writerow([f"{frame.time:.3f}", f"{frame.f0:.2f}", int(frame.voiced)])
