"""SpecAugment-style masking and time warping of feature matrices.

Features come from any front end (MFCC, filterbanks) as ``T x D`` matrices, read and written
as Kaldi text archives.
"""

import logging
import math
from collections.abc import Iterable, Iterator
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveFloat, field_validator

from prosokit.errors import FormatError
from prosokit.io.kaldi import read_matrix_archive, write_matrix_archive

logger = logging.getLogger(__name__)

WARP_SKIPPED = "warp_skipped"


class FeatureMatrix(BaseModel):
    """Frames of acoustic features.

    Attributes
    ----------
    frames : NDArray[np.float64]
        Read-only ``T x D`` matrix (time x feature dimension), ``D >= 1``.
    frame_shift : float
        Seconds between consecutive frames.
    flags : frozenset[str]
        Notes left by the augmentation (e.g. ``warp_skipped``).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frames: npt.NDArray[np.float64]
    frame_shift: PositiveFloat = 0.01
    flags: frozenset[str] = frozenset()

    @field_validator("frames", mode="before")
    @classmethod
    def _readonly_matrix(cls, value: Any) -> npt.NDArray[np.float64]:
        frames = np.array(value, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[1] < 1:  # noqa: PLR2004
            error_msg = f"features must be a T x D matrix with D >= 1, got shape {frames.shape}"
            raise ValueError(error_msg)
        if not np.all(np.isfinite(frames)):
            error_msg = "features must be finite"
            raise ValueError(error_msg)
        frames.flags.writeable = False
        return frames

    @property
    def n_frames(self) -> int:
        """Number of frames (T)."""
        return int(self.frames.shape[0])

    @property
    def n_dims(self) -> int:
        """Feature dimension (D)."""
        return int(self.frames.shape[1])


class SpecAugPolicy(BaseModel):
    """Augmentation policy. Defaults follow the LibriSpeech double (LD) policy."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    time_warp_w: NonNegativeInt = Field(80, description="Time warp parameter W (frames)")
    freq_mask_f: NonNegativeInt = Field(27, description="Maximum frequency mask width F")
    n_freq_masks: NonNegativeInt = Field(2, description="Number of frequency masks")
    time_mask_t: NonNegativeInt = Field(100, description="Maximum time mask width (frames)")
    n_time_masks: NonNegativeInt = Field(2, description="Number of time masks")
    max_time_mask_ratio: float = Field(
        1.0, gt=0.0, le=1.0, description="Upper bound p on the masked fraction of frames"
    )

    @classmethod
    def identity(cls) -> "SpecAugPolicy":
        """Policy that leaves every matrix untouched."""
        return cls(
            time_warp_w=0, freq_mask_f=0, n_freq_masks=0, time_mask_t=0, n_time_masks=0
        )


def _time_warp(
    frames: npt.NDArray[np.float64], width: int, rng: np.random.Generator
) -> npt.NDArray[np.float64]:
    n_frames = frames.shape[0]
    anchor = int(rng.integers(width, n_frames - width))
    shift = int(rng.integers(-width, width + 1))
    target = int(np.clip(anchor + shift, 1, n_frames - 2))
    # output frame i reads the source at a position mapped piecewise linearly
    source = np.interp(
        np.arange(n_frames), [0, target, n_frames - 1], [0, anchor, n_frames - 1]
    )
    lower = np.floor(source).astype(int)
    upper = np.minimum(lower + 1, n_frames - 1)
    fraction = (source - lower)[:, np.newaxis]
    return frames[lower] + fraction * (frames[upper] - frames[lower])


def spec_augment(
    feat: FeatureMatrix, policy: SpecAugPolicy, seed: int | np.random.Generator
) -> FeatureMatrix:
    """Warp and mask a feature matrix.

    The warp moves a random anchor frame ``t0`` in ``[W, T - W)`` by ``d`` in ``[-W, W]``
    keeping both ends fixed. Then `n_freq_masks` bands of width up to `freq_mask_f` and
    `n_time_masks` runs of width up to `time_mask_t` are set to zero; the time masks
    together never cover more than ``floor(p * T)`` frames.

    Parameters
    ----------
    feat : FeatureMatrix
        Input features.
    policy : SpecAugPolicy
        Augmentation parameters.
    seed : int | np.random.Generator
        Non-negative seed or an existing generator.

    Returns
    -------
    FeatureMatrix
        Matrix of the same shape. When the input is too short to warp
        (``T <= 2 W``) only the masks are applied and ``warp_skipped`` is flagged.

    Examples
    --------
    >>> feat = FeatureMatrix(frames=np.ones((50, 10)))
    >>> out = spec_augment(feat, SpecAugPolicy.identity(), seed=3)
    >>> bool(np.array_equal(out.frames, feat.frames))
    True
    """
    rng = np.random.default_rng(seed)
    frames = np.array(feat.frames)
    n_frames, n_dims = frames.shape
    flags: set[str] = set()

    width = policy.time_warp_w
    if width > 0:
        if n_frames > 2 * width:
            frames = _time_warp(frames, width, rng)
        else:
            logger.debug("%d frames are too few to warp with W=%d", n_frames, width)
            flags.add(WARP_SKIPPED)

    for _ in range(policy.n_freq_masks):
        mask_width = min(int(rng.integers(0, policy.freq_mask_f + 1)), n_dims)
        start = int(rng.integers(0, n_dims - mask_width + 1))
        frames[:, start : start + mask_width] = 0.0

    budget = math.floor(policy.max_time_mask_ratio * n_frames)
    for _ in range(policy.n_time_masks):
        mask_width = min(int(rng.integers(0, policy.time_mask_t + 1)), budget)
        start = int(rng.integers(0, n_frames - mask_width + 1))
        frames[start : start + mask_width] = 0.0
        budget -= mask_width

    return FeatureMatrix(frames=frames, frame_shift=feat.frame_shift, flags=frozenset(flags))


def augment_archive(
    matrices: Iterable[tuple[str, FeatureMatrix]],
    policy: SpecAugPolicy,
    copies: int = 1,
    seed: int = 0,
    include_original: bool = True,
) -> Iterator[tuple[str, FeatureMatrix]]:
    """Produce augmented copies of every matrix of an archive.

    Copy ``c`` of the ``i``-th utterance is named ``<utt>-sa<c>`` and drawn from a
    generator seeded with ``(seed, i, c)``, so the result does not depend on how the
    archive is split or scheduled.

    Parameters
    ----------
    matrices : Iterable[tuple[str, FeatureMatrix]]
        Utterance ids and features.
    policy : SpecAugPolicy
        Augmentation parameters.
    copies : int, optional
        Augmented copies per utterance, by default 1.
    seed : int, optional
        Non-negative base seed, by default 0.
    include_original : bool, optional
        Also yield the untouched matrix first, by default True.

    Yields
    ------
    tuple[str, FeatureMatrix]
        Utterance id and features.
    """
    n_skipped = 0
    for index, (utt_id, feat) in enumerate(matrices):
        if include_original:
            yield utt_id, feat
        for copy in range(1, copies + 1):
            augmented = spec_augment(feat, policy, np.random.default_rng([seed, index, copy]))
            n_skipped += WARP_SKIPPED in augmented.flags
            yield f"{utt_id}-sa{copy}", augmented
    if n_skipped:
        logger.warning("Time warp skipped on %d matrices too short for W", n_skipped)


def read_feature_archive(
    path: Path, frame_shift: float = 0.01
) -> Iterator[tuple[str, FeatureMatrix]]:
    """Read ``(utt_id, FeatureMatrix)`` pairs from a Kaldi text archive.

    Raises
    ------
    FormatError
        On malformed archives, empty or non finite matrices.
    """
    for utt_id, matrix in read_matrix_archive(path):
        try:
            yield utt_id, FeatureMatrix(frames=matrix, frame_shift=frame_shift)
        except ValueError as err:
            error_msg = f"invalid feature matrix '{utt_id}'"
            raise FormatError(error_msg, path) from err


def write_feature_archive(path: Path, matrices: Iterable[tuple[str, FeatureMatrix]]) -> None:
    """Write ``(utt_id, FeatureMatrix)`` pairs as a Kaldi text archive."""
    write_matrix_archive(path, ((utt_id, feat.frames) for utt_id, feat in matrices))
