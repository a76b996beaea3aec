"""Speaking-rate and pitch modification of a short-time magnitude.

Both modifications edit the magnitude of the analysed signal and rebuild the waveform with
:func:`prosokit.prosody.rtisi.rtisi_la`, so the phase is always re-estimated.
"""

import logging

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from prosokit.dsp.audio import AudioBuffer
from prosokit.dsp.stft import MagnitudeSpectrogram, StftConfig, frame_count, stft
from prosokit.errors import DegenerateInputError
from prosokit.prosody.rtisi import RtisiConfig, rtisi_la

logger = logging.getLogger(__name__)


class TimeScaleSpec(BaseModel):
    """Speaking-rate factor; ``alpha > 1`` speeds speech up and shortens it."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(ge=0.25, le=4.0)


class PitchScaleSpec(BaseModel):
    """Pitch-scale factor; ``s < 1`` lowers the pitch."""

    model_config = ConfigDict(frozen=True)

    s: float = Field(gt=0.0, le=2.0)


def _uniform_hop(config: StftConfig) -> StftConfig:
    if config.analysis_hop == config.synthesis_hop:
        return config
    return config.model_copy(update={"analysis_hop": config.synthesis_hop})


def _interpolate(
    values: npt.NDArray[np.float64], positions: npt.NDArray[np.float64], axis: int
) -> npt.NDArray[np.float64]:
    """Linear interpolation of `values` at fractional indices along `axis`."""
    last = values.shape[axis] - 1
    lower = np.floor(positions).astype(int)
    upper = np.minimum(lower + 1, last)
    fraction = positions - lower
    low = np.take(values, lower, axis=axis)
    high = np.take(values, upper, axis=axis)
    shape = [1, 1]
    shape[axis] = -1
    return np.maximum(low + fraction.reshape(shape) * (high - low), 0.0)


def stretch_frames(
    spec: MagnitudeSpectrogram, alpha: float, length: int
) -> MagnitudeSpectrogram:
    """Resample the frame sequence so that it describes `length` samples.

    Output frame ``t`` is read at source position ``t * alpha`` (clamped to the last frame)
    with linear interpolation between neighbouring frames.
    """
    n_frames = frame_count(length, spec.config.frame_length, spec.config.synthesis_hop)
    positions = np.minimum(np.arange(n_frames) * alpha, spec.n_frames - 1)
    return MagnitudeSpectrogram(
        frames=_interpolate(spec.frames, positions, axis=0),
        config=spec.config,
        sample_rate=spec.sample_rate,
        length=length,
    )


def scale_pitch_frames(spec: MagnitudeSpectrogram, s: float) -> MagnitudeSpectrogram:
    """Map every frame along frequency so that bin ``k`` takes the value at ``k / s``.

    Bins whose source lies above the last bin are zero; the frame size is unchanged.

    Examples
    --------
    >>> config = StftConfig(frame_length=8, analysis_hop=2, synthesis_hop=2)
    >>> spec = MagnitudeSpectrogram(
    ...     frames=[[0.0, 1.0, 2.0, 3.0, 4.0]], config=config, sample_rate=8000
    ... )
    >>> scale_pitch_frames(spec, 2.0).frames.tolist()
    [[0.0, 0.5, 1.0, 1.5, 2.0]]
    >>> scale_pitch_frames(spec, 0.5).frames.tolist()
    [[0.0, 2.0, 4.0, 0.0, 0.0]]
    """
    n_bins = spec.config.n_bins
    source = np.arange(n_bins) / s
    inside = source <= n_bins - 1
    frames = np.zeros_like(spec.frames)
    if spec.n_frames:
        frames[:, inside] = _interpolate(spec.frames, source[inside], axis=1)
    return MagnitudeSpectrogram(
        frames=frames, config=spec.config, sample_rate=spec.sample_rate, length=spec.length
    )


def time_scale(
    audio: AudioBuffer, spec: TimeScaleSpec, rtisi: RtisiConfig, seed: int = 0
) -> AudioBuffer:
    """Change the speaking rate while keeping the pitch.

    The output has ``round(len(audio) / alpha)`` samples.

    Parameters
    ----------
    audio : AudioBuffer
        Non-empty input.
    spec : TimeScaleSpec
        Speaking-rate factor.
    rtisi : RtisiConfig
        Reconstruction settings; analysis uses the synthesis hop.
    seed : int, optional
        Seed forwarded to the reconstruction.

    Returns
    -------
    AudioBuffer
        Time-scaled signal.

    Raises
    ------
    DegenerateInputError
        If the input is empty or the output would be shorter than one frame.
    """
    config = _uniform_hop(rtisi.stft)
    length = expected_length(len(audio), spec.alpha)
    if len(audio) == 0 or length < config.frame_length:
        error_msg = (
            f"Time scaling {len(audio)} samples by {spec.alpha} leaves {length} samples, "
            f"less than one frame of {config.frame_length}"
        )
        raise DegenerateInputError(error_msg)

    magnitude = stft(audio, config).magnitude()
    target = stretch_frames(magnitude, spec.alpha, length)
    logger.debug(
        "Time scaling %d -> %d frames (alpha=%s)", magnitude.n_frames, target.n_frames, spec.alpha
    )
    return rtisi_la(target, rtisi.model_copy(update={"stft": config}), seed)


def pitch_scale(
    audio: AudioBuffer, spec: PitchScaleSpec, rtisi: RtisiConfig, seed: int = 0
) -> AudioBuffer:
    """Scale the pitch by `s` while keeping the duration.

    Parameters
    ----------
    audio : AudioBuffer
        Non-empty input.
    spec : PitchScaleSpec
        Pitch-scale factor.
    rtisi : RtisiConfig
        Reconstruction settings; analysis uses the synthesis hop.
    seed : int, optional
        Seed forwarded to the reconstruction.

    Returns
    -------
    AudioBuffer
        Signal of the same length.

    Raises
    ------
    DegenerateInputError
        If the input is empty, or has energy and all of it maps above the Nyquist frequency.
    """
    if len(audio) == 0:
        error_msg = "Cannot pitch scale an empty signal"
        raise DegenerateInputError(error_msg)
    config = _uniform_hop(rtisi.stft)
    magnitude = stft(audio, config).magnitude()
    target = scale_pitch_frames(magnitude, spec.s)
    if magnitude.energy > 0.0 and target.energy == 0.0:
        error_msg = f"Pitch scale {spec.s} moves all content above the Nyquist frequency"
        raise DegenerateInputError(error_msg)
    return rtisi_la(target, rtisi.model_copy(update={"stft": config}), seed)


def expected_length(n_samples: int, alpha: float) -> int:
    """Samples produced by :func:`time_scale` for an input of `n_samples`.

    Examples
    --------
    >>> expected_length(16000, 1.1)
    14545
    """
    return round(n_samples / alpha)
