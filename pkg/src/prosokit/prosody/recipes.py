"""Prosody augmentation recipes applied to whole data directories.

Every recipe is a list of variants (a speaking-rate or a pitch factor). Applying a recipe
adds one modified copy of each utterance per variant, so a recipe with ``n`` variants
multiplies the corpus size by ``1 + n``.
"""

import csv
import logging
from enum import StrEnum
from pathlib import Path
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from prosokit.corpus.datadir import DataDir, Segment, write_datadir
from prosokit.decorators.log import log_stage
from prosokit.dsp.audio import AudioBuffer, read_wav, write_wav
from prosokit.errors import ProsokitError
from prosokit.io.filesfolders import open_file
from prosokit.prosody.modify import PitchScaleSpec, TimeScaleSpec, pitch_scale, time_scale
from prosokit.prosody.rtisi import RtisiConfig
from prosokit.utils.pool import ordered_map

logger = logging.getLogger(__name__)

MANIFEST_NAME = "augment_manifest.csv"
WAV_FOLDER = "wav"
MANIFEST_HEADER = ("new_utt_id", "src_utt_id", "kind", "factor", "status", "out_wav_path")

# errors that fail a single utterance without stopping the batch
_ITEM_ERRORS = (ProsokitError, OSError, ValueError, RuntimeError)


class VariantKind(StrEnum):
    """Kind of prosody modification."""

    TIME_SCALE = "TimeScale"
    PITCH_SCALE = "PitchScale"


class Variant(NamedTuple):
    """One modification with its factor."""

    kind: VariantKind
    factor: float

    @property
    def suffix(self) -> str:
        """Suffix added to utterance ids.

        Examples
        --------
        >>> Variant(VariantKind.TIME_SCALE, 1.1).suffix
        '-sr110'
        >>> Variant(VariantKind.PITCH_SCALE, 0.85).suffix
        '-p085'
        """
        tag = "sr" if self.kind is VariantKind.TIME_SCALE else "p"
        return f"-{tag}{round(self.factor * 100):03d}"


class RecipeName(StrEnum):
    """Named recipes."""

    SR = "SR"
    P = "P"
    SR_P = "SR_P"
    SR2_P2 = "SR2_P2"


_SR = (Variant(VariantKind.TIME_SCALE, 1.1),)
_P = (Variant(VariantKind.PITCH_SCALE, 0.9),)
_SR2_P2 = (Variant(VariantKind.TIME_SCALE, 1.2), Variant(VariantKind.PITCH_SCALE, 0.85))


class AugmentRecipe(BaseModel):
    """Named list of variants."""

    model_config = ConfigDict(frozen=True)

    name: RecipeName
    variants: tuple[Variant, ...]

    @property
    def size_multiplier(self) -> int:
        """Utterance count of the output relative to the input."""
        return 1 + len(self.variants)

    @classmethod
    def named(cls, name: str) -> "AugmentRecipe":
        """Look a recipe up by name, ignoring case and accepting ``-`` for ``_``.

        Examples
        --------
        >>> AugmentRecipe.named("sr2-p2").size_multiplier
        5
        """
        key = RecipeName(name.upper().replace("-", "_"))
        variants = {
            RecipeName.SR: _SR,
            RecipeName.P: _P,
            RecipeName.SR_P: _SR + _P,
            RecipeName.SR2_P2: _SR + _P + _SR2_P2,
        }[key]
        return cls(name=key, variants=variants)


class ManifestRow(NamedTuple):
    """One generated utterance; `out_wav_path` is relative to the output folder."""

    new_utt_id: str
    src_utt_id: str
    kind: str
    factor: float
    status: str
    out_wav_path: str

    @property
    def ok(self) -> bool:
        """Whether the utterance was generated."""
        return self.status == "ok"


class AugmentResult(NamedTuple):
    """Augmented data directory and manifest rows sorted by new utterance id."""

    datadir: DataDir
    manifest: list[ManifestRow]

    @property
    def n_failed(self) -> int:
        """Number of utterances that could not be generated."""
        return sum(not row.ok for row in self.manifest)


class _Job(NamedTuple):
    index: int
    utt_id: str
    wav_path: Path
    segment: Segment | None
    variants: tuple[Variant, ...]
    rtisi: RtisiConfig
    out_root: Path
    seed: int


class _Outcome(NamedTuple):
    row: ManifestRow
    duration: float


def apply_variant(
    audio: AudioBuffer, variant: Variant, rtisi: RtisiConfig, seed: int = 0
) -> AudioBuffer:
    """Apply one variant to a signal."""
    if variant.kind is VariantKind.TIME_SCALE:
        return time_scale(audio, TimeScaleSpec(alpha=variant.factor), rtisi, seed)
    return pitch_scale(audio, PitchScaleSpec(s=variant.factor), rtisi, seed)


def _variant_seed(seed: int, index: int, variant_index: int) -> int:
    state = np.random.SeedSequence([seed, index, variant_index]).generate_state(1)
    return int(state[0])


def _augment_utterance(job: _Job) -> list[_Outcome]:
    """Generate every variant of one utterance (runs in worker processes)."""
    audio: AudioBuffer | None = None
    try:
        if job.segment is None:
            audio = read_wav(job.wav_path)
        else:
            audio = read_wav(job.wav_path, job.segment.begin, job.segment.end)
    except _ITEM_ERRORS as err:
        logger.warning("Cannot read '%s': %s", job.utt_id, err)

    outcomes: list[_Outcome] = []
    for variant_index, variant in enumerate(job.variants):
        new_utt_id = f"{job.utt_id}{variant.suffix}"
        relative = f"{WAV_FOLDER}/{new_utt_id}.wav"
        status, duration = "failed", 0.0
        if audio is not None:
            try:
                modified = apply_variant(
                    audio, variant, job.rtisi, _variant_seed(job.seed, job.index, variant_index)
                )
                write_wav(modified, job.out_root / relative)
                status, duration = "ok", modified.duration
            except _ITEM_ERRORS as err:
                logger.warning("Skipping '%s': %s", new_utt_id, err)
        row = ManifestRow(
            new_utt_id, job.utt_id, variant.kind.value, variant.factor, status, relative
        )
        outcomes.append(_Outcome(row, duration))
    return outcomes


def write_manifest(path: Path, rows: list[ManifestRow]) -> None:
    """Write manifest rows as CSV with a header line."""
    with open_file(path, "w") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        writer.writerows(rows)


def _extend_datadir(datadir: DataDir, outcomes: list[_Outcome], out_root: Path) -> DataDir:
    wav_map = dict(datadir.wav_map)
    text = dict(datadir.text)
    utt2spk = dict(datadir.utt2spk)
    segments = dict(datadir.segments) if datadir.segments is not None else None
    for row, duration in outcomes:
        if not row.ok:
            continue
        wav_map[row.new_utt_id] = (out_root / row.out_wav_path).resolve()
        text[row.new_utt_id] = datadir.text[row.src_utt_id]
        utt2spk[row.new_utt_id] = datadir.utt2spk[row.src_utt_id]
        if segments is not None:
            segments[row.new_utt_id] = Segment(row.new_utt_id, 0.0, duration)
    return DataDir(
        wav_map=wav_map, text=text, utt2spk=utt2spk, segments=segments, groups=datadir.groups
    )


@log_stage(logger, "prosody augmentation")
def run_recipe(
    datadir: DataDir,
    recipe: AugmentRecipe,
    out_root: Path,
    rtisi: RtisiConfig,
    seed: int = 0,
    jobs: int = 1,
) -> AugmentResult:
    """Augment a data directory and write the result.

    The output folder receives the data directory tables, the generated WAV files in
    ``wav/`` and ``augment_manifest.csv``. Failures are recorded in the manifest and
    skipped. Results do not depend on `jobs`.

    Parameters
    ----------
    datadir : DataDir
        Source corpus.
    recipe : AugmentRecipe
        Variants to generate.
    out_root : Path
        Output folder.
    rtisi : RtisiConfig
        Reconstruction settings.
    seed : int, optional
        Non-negative base seed, by default 0.
    jobs : int, optional
        Worker processes, by default 1.

    Returns
    -------
    AugmentResult
        Original plus generated utterances, and the manifest.
    """
    job_list = [
        _Job(
            index=index,
            utt_id=utt_id,
            wav_path=datadir.audio_path(utt_id),
            segment=datadir.segments[utt_id] if datadir.segments is not None else None,
            variants=recipe.variants,
            rtisi=rtisi,
            out_root=out_root,
            seed=seed,
        )
        for index, utt_id in enumerate(datadir.utterances)
    ]
    outcomes = [
        outcome
        for result in ordered_map(_augment_utterance, job_list, jobs)
        for outcome in result
    ]
    outcomes.sort(key=lambda outcome: outcome.row.new_utt_id)

    augmented = _extend_datadir(datadir, outcomes, out_root)
    augmented.check(out_root)
    write_datadir(augmented, out_root)
    manifest = [outcome.row for outcome in outcomes]
    write_manifest(out_root / MANIFEST_NAME, manifest)

    result = AugmentResult(augmented, manifest)
    if result.n_failed:
        logger.warning("%d of %d utterances failed", result.n_failed, len(manifest))
    logger.info(
        "Recipe %s: %d -> %d utterances", recipe.name.value, len(datadir), len(augmented)
    )
    return result


def apply_recipe(
    datadir: DataDir,
    recipe: AugmentRecipe,
    out_root: Path,
    rtisi: RtisiConfig,
    seed: int = 0,
    jobs: int = 1,
) -> DataDir:
    """Augment a data directory; see :func:`run_recipe`."""
    return run_recipe(datadir, recipe, out_root, rtisi, seed, jobs).datadir
