"""Matched-pairs test between two recognisers scored on the same utterances."""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import stats

from prosokit.errors import ShapeMismatchError, UndefinedMetricError
from prosokit.scoring.wer import WerReport

logger = logging.getLogger(__name__)

MIN_UTTERANCES = 2


class MatchedPairsResult(BaseModel):
    """Outcome of the test; positive differences mean system A makes more errors."""

    model_config = ConfigDict(frozen=True)

    n_utterances: int
    mean_difference: float
    z: float
    p_value: float

    def significant(self, alpha: float = 0.001) -> bool:
        """Whether the difference is significant at level `alpha`."""
        return self.p_value < alpha


def matched_pairs_test(report_a: WerReport, report_b: WerReport) -> MatchedPairsResult:
    """Compare per-utterance error counts of two systems.

    The difference of error counts is averaged over utterances and compared with its
    standard error under a normal approximation; the p value is two-sided.

    Parameters
    ----------
    report_a, report_b : WerReport
        Reports over the same utterances.

    Returns
    -------
    MatchedPairsResult
        Mean difference, z statistic and p value. Identical error counts give
        ``z = 0`` and ``p = 1``.

    Raises
    ------
    ShapeMismatchError
        If the reports cover different utterances.
    UndefinedMetricError
        With fewer than two utterances.
    """
    if set(report_a.per_utt) != set(report_b.per_utt):
        error_msg = "Matched-pairs test needs both reports on the same utterances"
        raise ShapeMismatchError(error_msg)
    if len(report_a.per_utt) < MIN_UTTERANCES:
        error_msg = f"Matched-pairs test needs at least {MIN_UTTERANCES} utterances"
        raise UndefinedMetricError(error_msg)

    utterances = sorted(report_a.per_utt)
    differences = np.array(
        [
            report_a.per_utt[utt].counts.errors - report_b.per_utt[utt].counts.errors
            for utt in utterances
        ],
        dtype=np.float64,
    )
    mean = float(differences.mean())
    std_error = float(differences.std(ddof=1)) / math.sqrt(len(differences))
    if std_error == 0.0:
        z = 0.0 if mean == 0.0 else math.copysign(math.inf, mean)
    else:
        z = mean / std_error
    p_value = float(2.0 * stats.norm.sf(abs(z)))
    logger.debug("Matched pairs: mean difference %.3f, z=%.3f, p=%.3g", mean, z, p_value)
    return MatchedPairsResult(
        n_utterances=len(differences), mean_difference=mean, z=z, p_value=p_value
    )
