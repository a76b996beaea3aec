"""Command line interface.

Every subcommand logs to stderr and prints its machine readable result (JSON) to stdout.
Exit codes: 0 success, 1 fatal error, 2 partial success (some items skipped), 64 usage
error.
"""

import argparse
import json
import logging
import os
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any, NoReturn, TypeVar, get_args

from pydantic import BaseModel
from ruamel.yaml.error import YAMLError

from prosokit.config import Settings, load_settings, settings_template
from prosokit.corpus.datadir import DataDir, load_datadir
from prosokit.corpus.stats import compute_stats
from prosokit.decorators.log import log_stage
from prosokit.dsp.audio import read_wav, write_wav
from prosokit.dsp.stft import WindowName
from prosokit.errors import ProsokitError
from prosokit.io.filesfolders import open_file
from prosokit.io.kaldi import read_scalar_table, read_transcripts
from prosokit.prosody.modify import PitchScaleSpec, TimeScaleSpec, pitch_scale, time_scale
from prosokit.prosody.recipes import AugmentRecipe, run_recipe
from prosokit.scoring.ctm import (
    ConfidenceFilterConfig,
    ctm_to_transcripts,
    filter_ctm,
    read_ctm,
    sweep_threshold,
    write_ctm,
)
from prosokit.scoring.significance import matched_pairs_test
from prosokit.scoring.wer import WerReport, modified_wer
from prosokit.specaug import augment_archive, read_feature_archive, write_feature_archive
from prosokit.text.noise import NoiseConfig, noise_corpus
from prosokit.text.spelling import load_spelling_rules
from prosokit.text.tokens import DEFAULT_RULES, TokenFilterRules, load_filter_rules
from prosokit.utils.logger import init_logger

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2
EXIT_USAGE = 64

SEED_ENV = "PROSOKIT_SEED"
# framing rate when a data directory has no audio to read it from
EMPTY_CORPUS_RATE = 16000

M = TypeVar("M", bound=BaseModel)


class UsageError(Exception):
    """Invalid combination of command line values."""


class _ArgumentParser(argparse.ArgumentParser):
    """Parser exiting with the usage error code instead of 2."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _print_json(payload: Any) -> None:
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _override(model: M, **values: Any) -> M:
    """Validated copy of `model` with the values that were given on the command line."""
    updates = {key: value for key, value in values.items() if value is not None}
    if not updates:
        return model
    return type(model).model_validate({**model.model_dump(), **updates})


def resolve_seed(seed: int | None) -> int:
    """Seed from the flag, then the ``PROSOKIT_SEED`` variable, then 0.

    Raises
    ------
    UsageError
        If the seed is negative or the variable is not an integer.
    """
    if seed is None:
        raw = os.environ.get(SEED_ENV)
        if raw is None:
            return 0
        try:
            seed = int(raw)
        except ValueError as err:
            error_msg = f"{SEED_ENV} must be an integer, got '{raw}'"
            raise UsageError(error_msg) from err
    if seed < 0:
        error_msg = f"the seed must be non-negative, got {seed}"
        raise UsageError(error_msg)
    return seed


def _filter_rules(path: Path | None) -> TokenFilterRules:
    return DEFAULT_RULES if path is None else load_filter_rules(path)


def _read_hypotheses(path: Path, hyp_format: str) -> dict[str, list[str]]:
    if hyp_format == "ctm":
        return ctm_to_transcripts(read_ctm(path))
    return read_transcripts(path)


def _settings_with_stft(args: argparse.Namespace, settings: Settings) -> Settings:
    stft = _override(settings.stft, frame_ms=args.frame_ms, hop_ms=args.hop_ms, window=args.window)
    rtisi = _override(
        settings.rtisi,
        iterations=args.iterations,
        lookahead=args.lookahead,
        phase_init=args.phase_init,
    )
    return settings.model_copy(update={"stft": stft, "rtisi": rtisi})


@log_stage(logger, "augment command")
def cmd_augment(args: argparse.Namespace, settings: Settings) -> int:
    """Apply a prosody recipe to a data directory."""
    datadir = load_datadir(args.datadir)
    settings = _settings_with_stft(args, settings)
    # framing in samples follows the first utterance; corpora use a single rate
    sample_rate = EMPTY_CORPUS_RATE
    if len(datadir) > 0:
        sample_rate = datadir.read_audio(datadir.utterances[0]).sample_rate
    else:
        logger.warning("'%s' has no utterance to augment", args.datadir)
    result = run_recipe(
        datadir,
        AugmentRecipe.named(args.recipe),
        args.out,
        settings.rtisi_config(sample_rate),
        args.seed,
        args.jobs,
    )
    _print_json(
        {
            "recipe": args.recipe,
            "n_input": len(datadir),
            "n_output": len(result.datadir),
            "n_failed": result.n_failed,
        }
    )
    return EXIT_PARTIAL if result.n_failed else EXIT_OK


def _modify_file(args: argparse.Namespace, settings: Settings, kind: str) -> int:
    settings = _settings_with_stft(args, settings)
    audio = read_wav(args.input)
    rtisi = settings.rtisi_config(audio.sample_rate)
    if kind == "tsm":
        modified = time_scale(audio, TimeScaleSpec(alpha=args.alpha), rtisi, args.seed)
    else:
        modified = pitch_scale(audio, PitchScaleSpec(s=args.factor), rtisi, args.seed)
    write_wav(modified, args.output)
    _print_json({"input_samples": len(audio), "output_samples": len(modified)})
    return EXIT_OK


@log_stage(logger, "time scale command")
def cmd_tsm(args: argparse.Namespace, settings: Settings) -> int:
    """Change the speaking rate of one WAV file."""
    return _modify_file(args, settings, "tsm")


@log_stage(logger, "pitch scale command")
def cmd_pitch(args: argparse.Namespace, settings: Settings) -> int:
    """Change the pitch of one WAV file."""
    return _modify_file(args, settings, "pitch")


@log_stage(logger, "specaug command")
def cmd_specaug(args: argparse.Namespace, settings: Settings) -> int:
    """Augment a Kaldi text feature archive."""
    policy = _override(
        settings.specaug,
        time_warp_w=args.time_warp_w,
        freq_mask_f=args.freq_mask_f,
        n_freq_masks=args.n_freq_masks,
        time_mask_t=args.time_mask_t,
        n_time_masks=args.n_time_masks,
        max_time_mask_ratio=args.max_time_mask_ratio,
    )
    matrices = list(read_feature_archive(args.input, args.frame_shift))
    augmented = list(
        augment_archive(matrices, policy, args.copies, args.seed, not args.no_original)
    )
    write_feature_archive(args.output, augmented)
    _print_json({"n_input": len(matrices), "n_output": len(augmented)})
    return EXIT_OK


@log_stage(logger, "noise-text command")
def cmd_noise_text(args: argparse.Namespace, settings: Settings) -> int:
    """Inject partial words into a text corpus."""
    noise = _override(
        settings.noise,
        word_probability=args.probability,
        min_word_length=args.min_word_length,
    )
    config = NoiseConfig(
        word_probability=noise.word_probability,
        min_word_length=noise.min_word_length,
        seed=args.seed,
    )
    spelling = None if args.spelling_rules is None else load_spelling_rules(args.spelling_rules)
    with open_file(args.input, "r") as f:
        lines = [line.rstrip("\n") for line in f]
    summary = noise_corpus(
        lines,
        config,
        _filter_rules(args.rules),
        kaldi_text=args.kaldi_text,
        drop_fillers=args.drop_fillers,
        spelling=spelling,
    )
    with open_file(args.output, "w") as f:
        f.writelines(f"{line}\n" for line in summary.lines)
    _print_json(
        {
            "n_lines": len(summary.lines),
            "n_eligible": summary.n_eligible,
            "n_noised": summary.n_noised,
        }
    )
    return EXIT_OK


def _score(args: argparse.Namespace, hyp: Path) -> WerReport:
    return modified_wer(
        read_transcripts(args.ref),
        _read_hypotheses(hyp, args.hyp_format),
        _filter_rules(args.rules),
    )


@log_stage(logger, "score command")
def cmd_score(args: argparse.Namespace, settings: Settings) -> int:  # noqa: ARG001
    """Print the modified WER report of a hypothesis."""
    _print_json(_score(args, args.hyp).to_json_dict(per_utt=args.per_utt))
    return EXIT_OK


@log_stage(logger, "compare command")
def cmd_compare(args: argparse.Namespace, settings: Settings) -> int:  # noqa: ARG001
    """Print both WERs and the matched-pairs test of two hypotheses."""
    report_a = _score(args, args.hyp_a)
    report_b = _score(args, args.hyp_b)
    result = matched_pairs_test(report_a, report_b)
    _print_json(
        {
            "wer_a": report_a.wer,
            "wer_b": report_b.wer,
            **result.model_dump(),
            "significant": result.significant(args.alpha),
        }
    )
    return EXIT_OK


@log_stage(logger, "filter-ctm command")
def cmd_filter_ctm(args: argparse.Namespace, settings: Settings) -> int:
    """Drop low-confidence words, with a fixed or a swept threshold."""
    entries = read_ctm(args.input)
    rules = _filter_rules(args.rules)
    payload: dict[str, Any]
    if args.sweep is not None:
        grid_step = args.grid_step if args.grid_step is not None else settings.scoring.grid_step
        sweep = sweep_threshold(entries, read_transcripts(args.sweep), rules, grid_step)
        threshold = sweep.best_threshold
        payload = {
            "best_threshold": sweep.best_threshold,
            "best_wer": sweep.best_wer,
            "curve": [list(point) for point in sweep.curve],
        }
    else:
        threshold = args.threshold
        payload = {"threshold": threshold}
    kept = filter_ctm(entries, ConfidenceFilterConfig(threshold=threshold))
    write_ctm(args.output, kept)
    payload.update({"n_words": len(entries), "n_kept": len(kept)})
    _print_json(payload)
    return EXIT_OK


@log_stage(logger, "stats command")
def cmd_stats(args: argparse.Namespace, settings: Settings) -> int:
    """Print corpus statistics."""
    datadir = load_datadir(args.datadir)
    if args.spk2group is not None:
        datadir = DataDir(
            wav_map=datadir.wav_map,
            text=datadir.text,
            utt2spk=datadir.utt2spk,
            segments=datadir.segments,
            groups=read_scalar_table(args.spk2group),
        )
        datadir.check(args.datadir)
    pitch = _override(settings.pitch, f_min=args.f_min, f_max=args.f_max)
    stats = compute_stats(datadir, pitch.f_min, pitch.f_max, args.jobs, args.pitch_dir)
    _print_json(stats.model_dump())
    return EXIT_PARTIAL if stats.skipped else EXIT_OK


def cmd_config_template(args: argparse.Namespace, settings: Settings) -> int:  # noqa: ARG001
    """Print a YAML settings template."""
    sys.stdout.write(settings_template())
    return EXIT_OK


def _common_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    group = common.add_argument_group("common options")
    group.add_argument(
        "--seed", type=int, default=None, help=f"random seed (default: ${SEED_ENV} or 0)"
    )
    group.add_argument(
        "--jobs", type=int, default=1, help="worker processes, 0 for one per CPU (default: 1)"
    )
    group.add_argument("--log-level", default="INFO", help="logging level (default: INFO)")
    group.add_argument("--log-dir", type=Path, default=None, help="folder for log files")
    group.add_argument("--config", type=Path, default=None, help="YAML settings file")
    return common


def _add_stft_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("analysis and reconstruction")
    group.add_argument("--frame-ms", type=float, default=None, help="frame length in ms")
    group.add_argument("--hop-ms", type=float, default=None, help="hop in ms")
    group.add_argument(
        "--window", choices=get_args(WindowName), default=None, help="window shape"
    )
    group.add_argument("--iterations", type=int, default=None, help="iterations per frame")
    group.add_argument("--lookahead", type=int, default=None, help="look-ahead frames")
    group.add_argument(
        "--phase-init", choices=["zero", "random"], default=None, help="phase of new bins"
    )


def _add_scoring_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rules", type=Path, default=None, help="token filter rules (YAML)")
    parser.add_argument(
        "--hyp-format", choices=["text", "ctm"], default="text", help="hypothesis file format"
    )


def build_parser() -> argparse.ArgumentParser:
    """Parser of every subcommand."""
    common = _common_parser()
    parser = _ArgumentParser(prog="prosokit", description="Speech augmentation and scoring.")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, func: Callable[..., int], help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, parents=[common], help=help_text, description=help_text)
        sub.set_defaults(func=func)
        return sub

    sub = add("augment", cmd_augment, "apply a prosody recipe to a Kaldi data directory")
    sub.add_argument("datadir", type=Path, help="source data directory")
    sub.add_argument("out", type=Path, help="output data directory")
    sub.add_argument(
        "--recipe", choices=["sr", "p", "sr-p", "sr2-p2"], required=True, help="recipe name"
    )
    _add_stft_options(sub)

    sub = add("tsm", cmd_tsm, "change the speaking rate of a WAV file")
    sub.add_argument("input", type=Path, help="input WAV")
    sub.add_argument("output", type=Path, help="output WAV")
    sub.add_argument("--alpha", type=float, required=True, help="speaking-rate factor")
    _add_stft_options(sub)

    sub = add("pitch", cmd_pitch, "change the pitch of a WAV file")
    sub.add_argument("input", type=Path, help="input WAV")
    sub.add_argument("output", type=Path, help="output WAV")
    sub.add_argument("--factor", type=float, required=True, help="pitch-scale factor")
    _add_stft_options(sub)

    sub = add("specaug", cmd_specaug, "augment a Kaldi text feature archive")
    sub.add_argument("input", type=Path, help="input archive")
    sub.add_argument("output", type=Path, help="output archive")
    sub.add_argument("--copies", type=int, default=1, help="augmented copies per utterance")
    sub.add_argument("--no-original", action="store_true", help="omit the original matrices")
    sub.add_argument("--frame-shift", type=float, default=0.01, help="seconds between frames")
    sub.add_argument("--time-warp-w", type=int, default=None, help="time warp parameter W")
    sub.add_argument("--freq-mask-f", type=int, default=None, help="frequency mask width F")
    sub.add_argument("--n-freq-masks", type=int, default=None, help="frequency masks")
    sub.add_argument("--time-mask-t", type=int, default=None, help="time mask width T")
    sub.add_argument("--n-time-masks", type=int, default=None, help="time masks")
    sub.add_argument(
        "--max-time-mask-ratio", type=float, default=None, help="masked fraction bound p"
    )

    sub = add("noise-text", cmd_noise_text, "inject partial words into a text corpus")
    sub.add_argument("input", type=Path, help="input corpus, one sentence per line")
    sub.add_argument("output", type=Path, help="output corpus")
    sub.add_argument("--probability", type=float, default=None, help="noise probability")
    sub.add_argument("--min-word-length", type=int, default=None, help="shortest noised word")
    sub.add_argument("--kaldi-text", action="store_true", help="first field is an utterance id")
    sub.add_argument("--drop-fillers", action="store_true", help="remove filler tokens")
    sub.add_argument("--spelling-rules", type=Path, default=None, help="spelling rules file")
    sub.add_argument("--rules", type=Path, default=None, help="token filter rules (YAML)")

    sub = add("score", cmd_score, "modified WER of a hypothesis")
    sub.add_argument("ref", type=Path, help="reference transcripts")
    sub.add_argument("hyp", type=Path, help="hypothesis transcripts")
    sub.add_argument("--per-utt", action="store_true", help="include per-utterance detail")
    _add_scoring_options(sub)

    sub = add("compare", cmd_compare, "matched-pairs test between two hypotheses")
    sub.add_argument("ref", type=Path, help="reference transcripts")
    sub.add_argument("hyp_a", type=Path, metavar="HYP_A", help="hypotheses of system A")
    sub.add_argument("hyp_b", type=Path, metavar="HYP_B", help="hypotheses of system B")
    sub.add_argument("--alpha", type=float, default=0.001, help="significance level")
    _add_scoring_options(sub)

    sub = add("filter-ctm", cmd_filter_ctm, "drop low-confidence words from a CTM file")
    sub.add_argument("input", type=Path, help="input CTM")
    sub.add_argument("output", type=Path, help="output CTM")
    threshold = sub.add_mutually_exclusive_group(required=True)
    threshold.add_argument("--threshold", type=float, help="fixed confidence threshold")
    threshold.add_argument("--sweep", type=Path, help="reference used to pick the threshold")
    sub.add_argument("--grid-step", type=float, default=None, help="sweep grid step")
    sub.add_argument("--rules", type=Path, default=None, help="token filter rules (YAML)")

    sub = add("stats", cmd_stats, "corpus statistics overall and per speaker group")
    sub.add_argument("datadir", type=Path, help="data directory")
    sub.add_argument("--spk2group", type=Path, default=None, help="speaker to group map")
    sub.add_argument("--pitch-dir", type=Path, default=None, help="folder for pitch CSVs")
    sub.add_argument("--f-min", type=float, default=None, help="lowest pitch in Hz")
    sub.add_argument("--f-max", type=float, default=None, help="highest pitch in Hz")

    add("config-template", cmd_config_template, "print a YAML settings template")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.seed = resolve_seed(args.seed)
        init_logger(level=args.log_level, output_folder=args.log_dir)
    except (UsageError, ValueError) as err:
        parser.error(str(err))

    try:
        settings = load_settings(args.config)
        return int(args.func(args, settings))
    except (ProsokitError, OSError, ValueError, YAMLError) as err:
        logger.error("%s: %s", type(err).__name__, err)
        logger.debug("Traceback", exc_info=True)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
