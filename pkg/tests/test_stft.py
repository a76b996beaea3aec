"""Tests for `prosokit.dsp.stft`."""

import numpy as np
import pytest
from pydantic import ValidationError

from prosokit.dsp.audio import AudioBuffer
from prosokit.dsp.stft import (
    MagnitudeSpectrogram,
    StftConfig,
    cola_deviation,
    frame_count,
    istft,
    next_power_of_two,
    spectral_convergence,
    stft,
)
from prosokit.errors import (
    ConfigurationError,
    DegenerateInputError,
    ShapeMismatchError,
    UndefinedMetricError,
)

SAMPLE_RATE = 16000


def _config(frame_length: int = 512, hop: int = 128, window: str = "hann") -> StftConfig:
    return StftConfig(
        frame_length=frame_length, analysis_hop=hop, synthesis_hop=hop, window=window
    )


def test_config_defaults() -> None:
    """Test the `StftConfig` defaults.

    This function tests the following scenarios:
        - The FFT size defaults to the next power of two.
        - Durations in milliseconds are converted to samples.
        - Hops longer than the frame are rejected.
    """
    assert _config(400, 160).fft_size == 512
    assert next_power_of_two(1) == 1
    assert next_power_of_two(513) == 1024

    config = StftConfig.from_durations(SAMPLE_RATE)
    assert (config.frame_length, config.analysis_hop, config.synthesis_hop) == (512, 128, 128)
    assert config.n_bins == 257

    with pytest.raises(ValidationError):
        _config(512, 600)
    with pytest.raises(ValidationError):
        StftConfig(frame_length=512, analysis_hop=128, synthesis_hop=128, fft_size=256)


@pytest.mark.parametrize(
    ("window", "frame_length", "hop", "expected"),
    [
        ("hann", 512, 128, True),
        ("hann", 512, 256, False),
        ("hamming", 512, 128, True),
        ("rectangular", 512, 512, True),
        ("rectangular", 512, 300, False),
    ],
)
def test_cola(window: str, frame_length: int, hop: int, expected: bool) -> None:
    """Test the constant overlap-add check of squared windows."""
    config = _config(frame_length, hop, window)
    assert config.is_cola() is expected
    if expected:
        config.check_cola()
    else:
        with pytest.raises(ConfigurationError):
            config.check_cola()


def test_cola_deviation_of_zero_window() -> None:
    """Test that an all-zero window never satisfies the overlap-add property."""
    assert cola_deviation(np.zeros(8), 2) == float("inf")


def test_stft_shape() -> None:
    """Test the number of frames and bins of the transform.

    This function tests the following scenarios:
        - ``ceil(n / hop)`` frames of ``fft_size // 2 + 1`` bins.
        - The source length is kept.
        - An empty signal is rejected.
    """
    audio = AudioBuffer(samples=np.ones(1600), sample_rate=SAMPLE_RATE)
    spec = stft(audio, _config())
    assert spec.frames.shape == (13, 257)
    assert spec.length == 1600
    assert spec.magnitude().frames.shape == (13, 257)

    with pytest.raises(DegenerateInputError):
        stft(AudioBuffer(samples=np.zeros(0), sample_rate=SAMPLE_RATE), _config())


def test_round_trip() -> None:
    """Test that `istft` inverts `stft` on seeded random signals.

    This function tests the following scenarios:
        - 100 random signals of random lengths with a Hann 512/128 framing.
        - The reconstruction error stays below 1e-6 everywhere.
    """
    rng = np.random.default_rng(1234)
    config = _config()
    for _ in range(100):
        samples = rng.uniform(-1.0, 1.0, int(rng.integers(600, 6000)))
        audio = AudioBuffer(samples=samples, sample_rate=SAMPLE_RATE)
        rebuilt = istft(stft(audio, config))
        assert len(rebuilt) == len(audio)
        assert float(np.max(np.abs(rebuilt.samples - samples))) <= 1e-6


@pytest.mark.parametrize(
    ("frame_length", "hop", "window"),
    [(256, 256, "rectangular"), (300, 300, "rectangular"), (256, 64, "hann")],
)
def test_round_trip_covers_tail(frame_length: int, hop: int, window: str) -> None:
    """Test that every sample is analysed, also when the hop exceeds half a frame.

    This function tests the following scenarios:
        - The last frame reaches the last sample.
        - The reconstruction matches the signal up to its final sample.
        - Half-frame hops keep ``ceil(n / hop)`` frames.
        - Without a source length, the output length gives back the same frames.
    """
    rng = np.random.default_rng(7)
    for n_samples in (2048, 2049, 2100, 257):
        samples = rng.normal(size=n_samples)
        audio = AudioBuffer(samples=samples, sample_rate=SAMPLE_RATE)
        spec = stft(audio, _config(frame_length, hop, window))
        n_frames = frame_count(n_samples, frame_length, hop)
        assert spec.n_frames == n_frames
        assert (n_frames - 1) * hop + frame_length - frame_length // 2 >= n_samples
        if 2 * hop <= frame_length:
            assert n_frames == -(-n_samples // hop)
        free = spec.model_copy(update={"length": None})
        assert frame_count(free.output_length(), frame_length, hop) == n_frames
        rebuilt = istft(spec)
        np.testing.assert_allclose(rebuilt.samples, samples, atol=1e-8)


def test_istft_rejects_non_cola() -> None:
    """Test that synthesis with a non overlap-add hop raises."""
    audio = AudioBuffer(samples=np.ones(2000), sample_rate=SAMPLE_RATE)
    with pytest.raises(ConfigurationError):
        istft(stft(audio, _config(512, 256)))


def test_magnitude_validation() -> None:
    """Test that magnitudes must be non-negative and match the number of bins."""
    config = _config()
    with pytest.raises(ValidationError):
        MagnitudeSpectrogram(frames=-np.ones((3, 257)), config=config, sample_rate=SAMPLE_RATE)
    with pytest.raises(ValidationError):
        MagnitudeSpectrogram(frames=np.ones((3, 100)), config=config, sample_rate=SAMPLE_RATE)

    spec = MagnitudeSpectrogram(frames=np.ones((3, 257)), config=config, sample_rate=SAMPLE_RATE)
    assert spec.output_length() == 3 * 128
    assert spec.model_copy(update={"length": 300}).output_length() == 300
    assert spec.energy == pytest.approx(3 * 257)
    assert not spec.frames.flags.writeable


def test_spectral_convergence() -> None:
    """Test the spectral convergence measure.

    This function tests the following scenarios:
        - A signal matches its own magnitudes.
        - A different signal does not.
        - All-zero targets and length mismatches raise.
    """
    config = _config()
    t = np.arange(4000) / SAMPLE_RATE
    audio = AudioBuffer(samples=0.5 * np.sin(2 * np.pi * 220 * t), sample_rate=SAMPLE_RATE)
    target = stft(audio, config).magnitude()
    assert spectral_convergence(target, audio) == pytest.approx(0.0, abs=1e-9)

    other = AudioBuffer(samples=0.5 * np.sin(2 * np.pi * 330 * t), sample_rate=SAMPLE_RATE)
    assert spectral_convergence(target, other) > 0.5

    silence = AudioBuffer(samples=np.zeros(4000), sample_rate=SAMPLE_RATE)
    with pytest.raises(UndefinedMetricError):
        spectral_convergence(stft(silence, config).magnitude(), audio)

    shorter = AudioBuffer(samples=audio.samples[:2000], sample_rate=SAMPLE_RATE)
    with pytest.raises(ShapeMismatchError):
        spectral_convergence(target, shorter)
