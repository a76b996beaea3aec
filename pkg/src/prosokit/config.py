"""Settings shared by the library and the command line.

Defaults can be overridden from a YAML file shaped like :func:`settings_template`.
"""

import logging
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError

from prosokit.dsp.stft import StftConfig, WindowName
from prosokit.io.yamlio import generate_yaml_template, load_yaml
from prosokit.prosody.rtisi import PhaseInit, RtisiConfig
from prosokit.specaug import SpecAugPolicy

logger = logging.getLogger(__name__)


class StftSettings(BaseModel):
    """Framing in milliseconds, converted to samples for each sample rate."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    frame_ms: PositiveFloat = Field(32.0, description="Frame length in ms")
    hop_ms: PositiveFloat = Field(8.0, description="Hop in ms")
    window: WindowName = Field("hann", description="Window shape")

    def to_config(self, sample_rate: int) -> StftConfig:
        """Framing in samples; the FFT size is the next power of two.

        Examples
        --------
        >>> config = StftSettings().to_config(16000)
        >>> config.frame_length, config.analysis_hop, config.fft_size
        (512, 128, 512)
        """
        return StftConfig.from_durations(sample_rate, self.frame_ms, self.hop_ms, self.window)


class RtisiSettings(BaseModel):
    """Look-ahead phase reconstruction settings."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    iterations: PositiveInt = Field(8, description="Iterations per frame")
    lookahead: int = Field(3, ge=0, description="Look-ahead frames")
    phase_init: PhaseInit = Field("zero", description="Phase of bins without estimate")


class NoiseSettings(BaseModel):
    """Partial-word injection settings."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    word_probability: float = Field(0.1, ge=0.0, le=1.0, description="Noise probability")
    min_word_length: int = Field(3, ge=3, description="Shortest eligible word")


class PitchSettings(BaseModel):
    """Pitch search range."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    f_min: PositiveFloat = Field(100.0, description="Lowest pitch in Hz")
    f_max: PositiveFloat = Field(500.0, description="Highest pitch in Hz")


class ScoringSettings(BaseModel):
    """Confidence threshold sweep."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    grid_step: float = Field(0.01, gt=0.0, le=1.0, description="Threshold grid step")


class Settings(BaseModel):
    """Every tunable of the toolkit."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    stft: StftSettings = StftSettings()
    rtisi: RtisiSettings = RtisiSettings()
    specaug: SpecAugPolicy = SpecAugPolicy()
    noise: NoiseSettings = NoiseSettings()
    pitch: PitchSettings = PitchSettings()
    scoring: ScoringSettings = ScoringSettings()

    def rtisi_config(self, sample_rate: int) -> RtisiConfig:
        """Reconstruction settings for a sample rate."""
        return RtisiConfig(
            iterations_per_frame=self.rtisi.iterations,
            lookahead_frames=self.rtisi.lookahead,
            stft=self.stft.to_config(sample_rate),
            phase_init=self.rtisi.phase_init,
        )


def load_settings(path: Path | None = None) -> Settings:
    """Read settings from YAML; the defaults when `path` is None.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    ValidationError
        If a value is invalid or a key is unknown.
    """
    if path is None:
        return Settings()
    try:
        return Settings.model_validate(load_yaml(path))
    except ValidationError as err:
        logger.error("Invalid settings in '%s': %s", path, err)
        raise


def settings_template() -> str:
    """Commented YAML with every setting and its default."""
    return generate_yaml_template(Settings)
