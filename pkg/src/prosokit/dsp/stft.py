"""Short-time Fourier analysis and weighted overlap-add synthesis.

Frame ``t`` covers samples ``[t*hop, t*hop + frame_length)`` of the signal padded with
``frame_length // 2`` zeros at the start, so frame centres sit at ``t*hop`` in the
original time axis. A signal of ``n`` samples gives ``ceil(n / hop)`` frames, plus the
frames needed to reach the last sample when the hop exceeds half a frame.
"""

import logging
import math
from functools import cached_property
from typing import Any, Literal, Self

import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import (
    BaseModel,
    ConfigDict,
    NonNegativeInt,
    PositiveInt,
    field_validator,
    model_validator,
)
from scipy import fft, signal

from prosokit.dsp.audio import AudioBuffer
from prosokit.errors import (
    ConfigurationError,
    DegenerateInputError,
    ShapeMismatchError,
    UndefinedMetricError,
)

logger = logging.getLogger(__name__)

WindowName = Literal["hann", "hamming", "rectangular"]

COLA_TOLERANCE = 1e-6

_SCIPY_WINDOWS: dict[str, str] = {"hann": "hann", "hamming": "hamming", "rectangular": "boxcar"}


def next_power_of_two(value: int) -> int:
    """Return the smallest power of two greater than or equal to `value`.

    Examples
    --------
    >>> next_power_of_two(400)
    512
    >>> next_power_of_two(512)
    512
    """
    return 1 << max(0, math.ceil(math.log2(value)))


def cola_deviation(window: npt.NDArray[np.float64], hop: int) -> float:
    """Relative spread of the summed squared windows shifted by `hop`.

    Zero means the overlap-add of squared windows is perfectly constant.
    """
    squared = window**2
    sums = np.zeros(hop)
    for start in range(0, len(window), hop):
        segment = squared[start : start + hop]
        sums[: len(segment)] += segment
    peak = float(sums.max())
    if peak <= 0.0:
        return math.inf
    return float((peak - sums.min()) / peak)


class StftConfig(BaseModel):
    """Framing parameters, in samples.

    Attributes
    ----------
    frame_length : int
        Window length.
    analysis_hop : int
        Frame shift used by :func:`stft`.
    synthesis_hop : int
        Frame shift used by :func:`istft` and the phase reconstruction.
    window : {"hann", "hamming", "rectangular"}
        Window shape (periodic variants).
    fft_size : int
        DFT length, at least `frame_length`. Defaults to the next power of two.
    """

    model_config = ConfigDict(frozen=True)

    frame_length: PositiveInt
    analysis_hop: PositiveInt
    synthesis_hop: PositiveInt
    window: WindowName = "hann"
    fft_size: PositiveInt

    @model_validator(mode="before")
    @classmethod
    def _default_fft_size(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("fft_size") is None:
            data = dict(data)
            frame_length = data.get("frame_length")
            if isinstance(frame_length, int) and frame_length > 0:
                data["fft_size"] = next_power_of_two(frame_length)
        return data

    @model_validator(mode="after")
    def _check_sizes(self) -> Self:
        for name in ("analysis_hop", "synthesis_hop"):
            if getattr(self, name) > self.frame_length:
                error_msg = f"{name} ({getattr(self, name)}) exceeds frame_length"
                raise ValueError(error_msg)
        if self.fft_size < self.frame_length:
            error_msg = f"fft_size ({self.fft_size}) is smaller than frame_length"
            raise ValueError(error_msg)
        return self

    @classmethod
    def from_durations(
        cls,
        sample_rate: int,
        frame_ms: float = 32.0,
        hop_ms: float = 8.0,
        window: WindowName = "hann",
    ) -> "StftConfig":
        """Build a configuration from durations in milliseconds.

        Examples
        --------
        >>> StftConfig.from_durations(16000).fft_size
        512
        """
        frame_length = round(sample_rate * frame_ms / 1000)
        hop = max(1, round(sample_rate * hop_ms / 1000))
        return cls(
            frame_length=frame_length, analysis_hop=hop, synthesis_hop=hop, window=window
        )

    @property
    def n_bins(self) -> int:
        """Number of non-negative frequency bins."""
        return self.fft_size // 2 + 1

    def window_values(self) -> npt.NDArray[np.float64]:
        """Return the (periodic) window samples."""
        values = signal.get_window(_SCIPY_WINDOWS[self.window], self.frame_length, fftbins=True)
        return np.asarray(values, dtype=np.float64)

    def is_cola(self, hop: int | None = None) -> bool:
        """Check the constant overlap-add property of the squared window for `hop`."""
        hop = self.synthesis_hop if hop is None else hop
        return cola_deviation(self.window_values(), hop) <= COLA_TOLERANCE

    def check_cola(self) -> None:
        """Raise if the synthesis hop does not give perfect reconstruction.

        Raises
        ------
        ConfigurationError
            If the squared-window overlap-add is not constant.
        """
        if not self.is_cola():
            error_msg = (
                f"{self.window} window of {self.frame_length} samples with hop "
                f"{self.synthesis_hop} does not satisfy the constant overlap-add property"
            )
            logger.error(error_msg)
            raise ConfigurationError(error_msg)


class _Spectrogram(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    config: StftConfig
    sample_rate: PositiveInt
    length: NonNegativeInt | None = None

    @property
    def n_frames(self) -> int:
        """Number of frames."""
        return int(self.frames.shape[0])  # type: ignore[attr-defined]

    @model_validator(mode="after")
    def _check_columns(self) -> Self:
        frames = self.frames  # type: ignore[attr-defined]
        if frames.ndim != 2 or frames.shape[1] != self.config.n_bins:  # noqa: PLR2004
            error_msg = (
                f"expected frames of shape (T, {self.config.n_bins}), got {frames.shape}"
            )
            raise ValueError(error_msg)
        return self

    def output_length(self) -> int:
        """Samples produced when this spectrogram is turned back into audio.

        The source length when known, else the longest signal that :func:`frame_count`
        cuts into exactly `n_frames` frames at the synthesis hop, so a reconstruction can
        always be compared with the magnitudes it came from. That is
        ``n_frames * synthesis_hop`` whenever the hop is at most half a frame.
        """
        if self.length is not None:
            return self.length
        if self.n_frames == 0:
            return 0
        hop = self.config.synthesis_hop
        right = self.config.frame_length - self.config.frame_length // 2
        return min(self.n_frames * hop, (self.n_frames - 1) * hop + right)


class ComplexSpectrogram(_Spectrogram):
    """Complex short-time spectra, one row per frame."""

    frames: npt.NDArray[np.complex128]

    @field_validator("frames", mode="before")
    @classmethod
    def _readonly(cls, value: Any) -> npt.NDArray[np.complex128]:
        frames = np.array(value, dtype=np.complex128)
        frames.flags.writeable = False
        return frames

    def magnitude(self) -> "MagnitudeSpectrogram":
        """Return the magnitude spectrogram, keeping config, rate and length."""
        return MagnitudeSpectrogram(
            frames=np.abs(self.frames),
            config=self.config,
            sample_rate=self.sample_rate,
            length=self.length,
        )


class MagnitudeSpectrogram(_Spectrogram):
    """Non-negative short-time magnitudes (STFTM), one row per frame."""

    frames: npt.NDArray[np.float64]

    @field_validator("frames", mode="before")
    @classmethod
    def _readonly_nonnegative(cls, value: Any) -> npt.NDArray[np.float64]:
        frames = np.array(value, dtype=np.float64)
        if not np.all(np.isfinite(frames)) or np.any(frames < 0):
            error_msg = "magnitudes must be finite and non-negative"
            raise ValueError(error_msg)
        frames.flags.writeable = False
        return frames

    @cached_property
    def energy(self) -> float:
        """Squared Frobenius norm."""
        return float(np.sum(self.frames**2))


def frame_count(n_samples: int, frame_length: int, hop: int) -> int:
    """Number of centred frames whose union covers `n_samples` samples.

    Examples
    --------
    >>> frame_count(1600, 400, 160)
    10
    >>> frame_count(2048, 256, 256)
    9
    """
    n_frames = -(-n_samples // hop)
    # the last frame must reach sample n - 1 past its centre
    right = frame_length - frame_length // 2
    if n_samples > right:
        n_frames = max(n_frames, -(-(n_samples - right) // hop) + 1)
    return max(n_frames, 1)


def frame_signal(
    samples: npt.NDArray[np.float64], frame_length: int, hop: int
) -> npt.NDArray[np.float64]:
    """Cut a signal into centred, zero padded frames.

    Examples
    --------
    >>> frame_signal(np.ones(1600), 400, 160).shape
    (10, 400)
    >>> frame_signal(np.ones(2048), 256, 256).shape
    (9, 256)
    """
    n_frames = frame_count(len(samples), frame_length, hop)
    half = frame_length // 2
    tail = (n_frames - 1) * hop + frame_length - half - len(samples)
    padded = np.pad(samples, (half, max(tail, 0)))
    return sliding_window_view(padded, frame_length)[::hop][:n_frames]


def overlap_add(frames: npt.NDArray[np.float64], hop: int) -> npt.NDArray[np.float64]:
    """Overlap-add frames placed every `hop` samples."""
    n_frames, frame_length = frames.shape
    if n_frames == 0:
        return np.zeros(0)
    output = np.zeros((n_frames - 1) * hop + frame_length)
    for index, frame in enumerate(frames):
        output[index * hop : index * hop + frame_length] += frame
    return output


def normalise_overlap(
    numerator: npt.NDArray[np.float64], window_power: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    """Divide by the summed squared windows, leaving uncovered samples at zero."""
    output = np.zeros_like(numerator)
    if window_power.size == 0:
        return output
    covered = window_power > 1e-10 * window_power.max()
    output[covered] = numerator[covered] / window_power[covered]
    return output


def crop_centred(
    padded: npt.NDArray[np.float64], frame_length: int, length: int
) -> npt.NDArray[np.float64]:
    """Remove the analysis padding and return exactly `length` samples."""
    output = np.zeros(length)
    available = padded[frame_length // 2 : frame_length // 2 + length]
    output[: len(available)] = available
    return output


def stft(audio: AudioBuffer, config: StftConfig) -> ComplexSpectrogram:
    """Compute the short-time Fourier transform.

    Parameters
    ----------
    audio : AudioBuffer
        Signal with at least one sample.
    config : StftConfig
        Framing parameters; `analysis_hop` is used.

    Returns
    -------
    ComplexSpectrogram
        :func:`frame_count` frames of ``fft_size // 2 + 1`` bins, ``ceil(len / analysis_hop)``
        whenever the hop is at most half a frame.

    Raises
    ------
    DegenerateInputError
        If the signal is empty.
    """
    if len(audio) == 0:
        error_msg = "Cannot analyse an empty signal"
        raise DegenerateInputError(error_msg)
    frames = frame_signal(audio.samples, config.frame_length, config.analysis_hop)
    spectra = fft.rfft(frames * config.window_values(), n=config.fft_size, axis=1)
    return ComplexSpectrogram(
        frames=spectra, config=config, sample_rate=audio.sample_rate, length=len(audio)
    )


def synthesise(
    spectra: npt.NDArray[np.complex128], config: StftConfig
) -> npt.NDArray[np.float64]:
    """Windowed inverse transforms of every frame (``T x frame_length``)."""
    frames = fft.irfft(spectra, n=config.fft_size, axis=1)[:, : config.frame_length]
    return np.asarray(frames * config.window_values(), dtype=np.float64)


def window_power(config: StftConfig, n_frames: int) -> npt.NDArray[np.float64]:
    """Overlap-added squared synthesis windows for `n_frames` frames."""
    squared = config.window_values() ** 2
    return overlap_add(np.tile(squared, (n_frames, 1)), config.synthesis_hop)


def istft(spec: ComplexSpectrogram) -> AudioBuffer:
    """Invert a complex spectrogram by weighted overlap-add.

    Parameters
    ----------
    spec : ComplexSpectrogram
        Spectra laid out as produced by :func:`stft`; `synthesis_hop` is used.

    Returns
    -------
    AudioBuffer
        ``spec.output_length()`` samples.

    Raises
    ------
    ConfigurationError
        If the window and synthesis hop do not satisfy the constant overlap-add property.
    """
    config = spec.config
    config.check_cola()
    numerator = overlap_add(synthesise(spec.frames, config), config.synthesis_hop)
    samples = normalise_overlap(numerator, window_power(config, spec.n_frames))
    return AudioBuffer(
        samples=crop_centred(samples, config.frame_length, spec.output_length()),
        sample_rate=spec.sample_rate,
    )


def spectral_convergence(target: MagnitudeSpectrogram, candidate: AudioBuffer) -> float:
    """Distance between a target STFTM and the STFTM of a candidate signal.

    Computed as ``||abs(STFT(candidate)) - target||_F / ||target||_F``.

    Parameters
    ----------
    target : MagnitudeSpectrogram
        Reference magnitudes; its configuration is used to analyse the candidate.
    candidate : AudioBuffer
        Signal to measure.

    Returns
    -------
    float
        Non-negative ratio, 0 for a perfect match.

    Raises
    ------
    UndefinedMetricError
        If the target is all zeros.
    ShapeMismatchError
        If the candidate yields a different number of frames.
    """
    if target.energy == 0.0:
        error_msg = "Spectral convergence is undefined for an all-zero target"
        raise UndefinedMetricError(error_msg)
    estimate = np.abs(stft(candidate, target.config).frames)
    if estimate.shape != target.frames.shape:
        error_msg = f"candidate spectrogram {estimate.shape} != target {target.frames.shape}"
        raise ShapeMismatchError(error_msg)
    return float(np.linalg.norm(estimate - target.frames) / math.sqrt(target.energy))
