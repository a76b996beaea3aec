"""Phase reconstruction from a short-time Fourier transform magnitude.

`rtisi_la` rebuilds the signal frame by frame: every new frame gets an initial phase from
the partial reconstruction, then the frames of the look-ahead buffer are re-estimated
several times before the oldest one is committed. `griffin_lim` iterates over the whole
spectrogram at once and is the quality reference.
"""

import logging
from typing import Literal

import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, ConfigDict, NonNegativeInt, PositiveInt
from scipy import fft

from prosokit.dsp.audio import AudioBuffer
from prosokit.dsp.stft import (
    MagnitudeSpectrogram,
    StftConfig,
    crop_centred,
    normalise_overlap,
    overlap_add,
    synthesise,
    window_power,
)
from prosokit.errors import ShapeMismatchError

logger = logging.getLogger(__name__)

PhaseInit = Literal["zero", "random"]

# bins weaker than this fraction of the frame peak take the fallback phase
_PHASE_FLOOR = 1e-8


class RtisiConfig(BaseModel):
    """Settings of the look-ahead reconstruction.

    Attributes
    ----------
    iterations_per_frame : int
        Projections K run every time a frame enters the buffer.
    lookahead_frames : int
        Frames L kept modifiable after the newest one is added.
    stft : StftConfig
        Framing; `synthesis_hop` and the window must satisfy the overlap-add property.
    phase_init : {"zero", "random"}
        Phase of bins with no estimate from the partial reconstruction.
    """

    model_config = ConfigDict(frozen=True)

    iterations_per_frame: PositiveInt = 8
    lookahead_frames: NonNegativeInt = 3
    stft: StftConfig
    phase_init: PhaseInit = "zero"


class _PartialSignal:
    """Overlap-add accumulator in padded time coordinates."""

    def __init__(self, config: StftConfig, n_frames: int) -> None:
        self.hop = config.synthesis_hop
        self.size = config.frame_length
        self.fft_size = config.fft_size
        self.window = config.window_values()
        length = max(0, (n_frames - 1) * self.hop + self.size)
        self.signal = np.zeros(length)
        self.power = np.zeros(length)

    def span(self, index: int) -> slice:
        return slice(index * self.hop, index * self.hop + self.size)

    def add_window(self, index: int) -> None:
        self.power[self.span(index)] += self.window**2

    def analyse(self, index: int) -> npt.NDArray[np.complex128]:
        """Spectrum of the normalized partial signal under frame `index`."""
        span = self.span(index)
        segment = normalise_overlap(self.signal[span], self.power[span])
        return np.asarray(fft.rfft(segment * self.window, n=self.fft_size))

    def synthesise(
        self, magnitude: npt.NDArray[np.float64], phase: npt.NDArray[np.float64]
    ) -> npt.NDArray[np.float64]:
        frame = fft.irfft(magnitude * np.exp(1j * phase), n=self.fft_size)[: self.size]
        return np.asarray(frame * self.window, dtype=np.float64)


def _estimated_phase(
    spectrum: npt.NDArray[np.complex128], fallback: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    magnitude = np.abs(spectrum)
    peak = float(magnitude.max()) if magnitude.size else 0.0
    reliable = magnitude > _PHASE_FLOOR * peak if peak > 0.0 else np.zeros(len(spectrum), bool)
    return np.where(reliable, np.angle(spectrum), fallback)


def _fallback_phase(
    n_bins: int, phase_init: PhaseInit, rng: np.random.Generator
) -> npt.NDArray[np.float64]:
    if phase_init == "random":
        return rng.uniform(-np.pi, np.pi, n_bins)
    return np.zeros(n_bins)


def rtisi_la(target: MagnitudeSpectrogram, config: RtisiConfig, seed: int = 0) -> AudioBuffer:
    """Reconstruct a signal from its magnitude with look-ahead iterative inversion.

    Parameters
    ----------
    target : MagnitudeSpectrogram
        Magnitudes to match; its frames are laid out with ``config.stft``.
    config : RtisiConfig
        Iterations, look-ahead and framing.
    seed : int, optional
        Seed of the random fallback phase, unused with ``phase_init="zero"``.

    Returns
    -------
    AudioBuffer
        ``target.output_length()`` samples. An all-zero target gives silence.

    Raises
    ------
    ConfigurationError
        If the window and synthesis hop do not satisfy the overlap-add property.
    ShapeMismatchError
        If the target bins do not match ``config.stft.fft_size``.
    """
    stft_config = config.stft
    stft_config.check_cola()
    if target.frames.shape[1] != stft_config.n_bins:
        error_msg = f"target has {target.frames.shape[1]} bins, expected {stft_config.n_bins}"
        raise ShapeMismatchError(error_msg)
    magnitudes = target.frames
    n_frames = target.n_frames
    lookahead = config.lookahead_frames
    rng = np.random.default_rng(seed)

    partial = _PartialSignal(stft_config, n_frames)
    buffer: dict[int, npt.NDArray[np.float64]] = {}
    for newest in range(n_frames + lookahead):
        if newest < n_frames:
            fallback = _fallback_phase(stft_config.n_bins, config.phase_init, rng)
            # new window in the normaliser: the estimate tapers off where earlier frames end
            partial.add_window(newest)
            phase = _estimated_phase(partial.analyse(newest), fallback)
            frame = partial.synthesise(magnitudes[newest], phase)
            partial.signal[partial.span(newest)] += frame
            buffer[newest] = frame

        for _ in range(config.iterations_per_frame):
            for index in sorted(buffer):
                spectrum = partial.analyse(index)
                frame = partial.synthesise(magnitudes[index], np.angle(spectrum))
                partial.signal[partial.span(index)] += frame - buffer[index]
                buffer[index] = frame

        buffer.pop(newest - lookahead, None)

    samples = normalise_overlap(partial.signal, partial.power)
    return AudioBuffer(
        samples=crop_centred(samples, stft_config.frame_length, target.output_length()),
        sample_rate=target.sample_rate,
    )


def griffin_lim(
    target: MagnitudeSpectrogram,
    n_iter: int = 50,
    seed: int = 0,
    phase_init: PhaseInit = "zero",
) -> AudioBuffer:
    """Reconstruct a signal with global Griffin-Lim iterations.

    Each iteration overlap-adds the whole spectrogram, re-analyses the result with the
    synthesis hop and keeps the phases.

    Parameters
    ----------
    target : MagnitudeSpectrogram
        Magnitudes to match.
    n_iter : int, optional
        Number of iterations, by default 50.
    seed : int, optional
        Seed of the random initial phase, by default 0.
    phase_init : {"zero", "random"}, optional
        Initial phase, by default "zero".

    Returns
    -------
    AudioBuffer
        ``target.output_length()`` samples.
    """
    config = target.config
    config.check_cola()
    rng = np.random.default_rng(seed)
    magnitudes = target.frames
    n_frames = target.n_frames
    window = config.window_values()
    wss = window_power(config, n_frames)

    if phase_init == "random":
        phase = rng.uniform(-np.pi, np.pi, magnitudes.shape)
    else:
        phase = np.zeros(magnitudes.shape)

    def overlap(current: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        frames = synthesise(magnitudes * np.exp(1j * current), config)
        return normalise_overlap(overlap_add(frames, config.synthesis_hop), wss)

    for iteration in range(n_iter):
        signal = overlap(phase)
        frames = sliding_window_view(signal, config.frame_length)
        frames = frames[:: config.synthesis_hop][:n_frames]
        phase = np.angle(fft.rfft(frames * window, n=config.fft_size, axis=1))
        logger.debug("Griffin-Lim iteration %d/%d", iteration + 1, n_iter)

    return AudioBuffer(
        samples=crop_centred(overlap(phase), config.frame_length, target.output_length()),
        sample_rate=target.sample_rate,
    )
