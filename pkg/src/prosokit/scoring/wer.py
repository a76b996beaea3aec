"""Word error rate after removing non-English tokens from both sides."""

import logging
from collections.abc import Mapping, Sequence
from typing import Any

from pydantic import BaseModel, ConfigDict

from prosokit.errors import FormatError
from prosokit.scoring.align import EditCounts, EditOp, align, count_edits
from prosokit.text.tokens import DEFAULT_RULES, TokenFilterRules, filter_tokens

logger = logging.getLogger(__name__)


class UtteranceScore(BaseModel):
    """Alignment of one utterance after filtering."""

    model_config = ConfigDict(frozen=True)

    counts: EditCounts
    alignment: list[EditOp]
    filtered_ref_tokens: int
    filtered_hyp_tokens: int

    @property
    def wer(self) -> float | None:
        """Utterance WER, None when the filtered reference is empty."""
        return self.counts.wer


class WerReport(BaseModel):
    """Corpus-level WER with per-utterance detail.

    Attributes
    ----------
    n_ref : int
        Reference words left after filtering.
    substitutions, deletions, insertions : int
        Summed alignment counts.
    wer : float | None
        ``(S + D + I) / n_ref``, None when `n_ref` is 0.
    per_utt : dict[str, UtteranceScore]
        Utterance id to its alignment.
    filtered_ref_tokens, filtered_hyp_tokens : int
        Non-English tokens removed from each side.
    """

    model_config = ConfigDict(frozen=True)

    n_utterances: int
    n_ref: int
    n_hyp: int
    matches: int
    substitutions: int
    deletions: int
    insertions: int
    wer: float | None
    per_utt: dict[str, UtteranceScore]
    filtered_ref_tokens: int
    filtered_hyp_tokens: int

    @property
    def errors(self) -> int:
        """Total number of errors."""
        return self.substitutions + self.deletions + self.insertions

    def to_json_dict(self, per_utt: bool = False) -> dict[str, Any]:
        """JSON-ready summary, optionally with the per-utterance detail."""
        summary = self.model_dump(exclude={"per_utt"})
        summary["wer_percent"] = None if self.wer is None else round(100 * self.wer, 2)
        if per_utt:
            summary["per_utt"] = {
                utt_id: {
                    **score.counts.model_dump(),
                    "wer": score.wer,
                    "alignment": [[op.kind.value, op.ref, op.hyp] for op in score.alignment],
                }
                for utt_id, score in self.per_utt.items()
            }
        return summary


def score_utterance(
    ref: Sequence[str], hyp: Sequence[str], rules: TokenFilterRules = DEFAULT_RULES
) -> UtteranceScore:
    """Filter both token sequences and align what remains.

    Examples
    --------
    >>> ref = "<unk> in <unk> the people i watch the".split()
    >>> hyp = "interesting in people i watch the".split()
    >>> score = score_utterance(ref, hyp)
    >>> score.counts.errors, score.counts.n_ref
    (2, 6)
    """
    kept_ref = filter_tokens(ref, rules)
    kept_hyp = filter_tokens(hyp, rules)
    alignment = align(kept_ref, kept_hyp)
    return UtteranceScore(
        counts=count_edits(alignment),
        alignment=alignment,
        filtered_ref_tokens=len(ref) - len(kept_ref),
        filtered_hyp_tokens=len(hyp) - len(kept_hyp),
    )


def modified_wer(
    ref_transcripts: Mapping[str, Sequence[str]],
    hyp_transcripts: Mapping[str, Sequence[str]],
    rules: TokenFilterRules = DEFAULT_RULES,
) -> WerReport:
    """WER over a corpus once unknown words, fillers and false starts are removed.

    Counts are summed over utterances before dividing. An utterance missing from the
    hypotheses is scored against an empty hypothesis.

    Parameters
    ----------
    ref_transcripts : Mapping[str, Sequence[str]]
        Utterance id to reference tokens.
    hyp_transcripts : Mapping[str, Sequence[str]]
        Utterance id to hypothesis tokens.
    rules : TokenFilterRules, optional
        Token classification rules.

    Returns
    -------
    WerReport
        Corpus counts and per-utterance alignments.

    Raises
    ------
    FormatError
        If a hypothesis utterance has no reference.
    """
    unknown = sorted(set(hyp_transcripts) - set(ref_transcripts))
    if unknown:
        error_msg = f"hypothesis utterances without reference: {', '.join(unknown)}"
        logger.error(error_msg)
        raise FormatError(error_msg)

    per_utt: dict[str, UtteranceScore] = {}
    total = EditCounts()
    filtered_ref = filtered_hyp = 0
    for utt_id in sorted(ref_transcripts):
        score = score_utterance(ref_transcripts[utt_id], hyp_transcripts.get(utt_id, ()), rules)
        per_utt[utt_id] = score
        total += score.counts
        filtered_ref += score.filtered_ref_tokens
        filtered_hyp += score.filtered_hyp_tokens

    missing = len(set(ref_transcripts) - set(hyp_transcripts))
    if missing:
        logger.warning("%d reference utterances have no hypothesis", missing)

    return WerReport(
        n_utterances=len(per_utt),
        n_ref=total.n_ref,
        n_hyp=total.n_hyp,
        matches=total.matches,
        substitutions=total.substitutions,
        deletions=total.deletions,
        insertions=total.insertions,
        wer=total.wer,
        per_utt=per_utt,
        filtered_ref_tokens=filtered_ref,
        filtered_hyp_tokens=filtered_hyp,
    )
