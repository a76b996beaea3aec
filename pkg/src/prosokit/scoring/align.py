"""Levenshtein alignment of token sequences."""

from collections.abc import Iterable, Sequence
from enum import StrEnum
from typing import NamedTuple, Self

from pydantic import BaseModel, ConfigDict, NonNegativeInt


class EditKind(StrEnum):
    """Alignment operation."""

    MATCH = "match"
    SUBSTITUTION = "sub"
    DELETION = "del"
    INSERTION = "ins"


class EditOp(NamedTuple):
    """One aligned position; `ref` is None for insertions and `hyp` for deletions."""

    kind: EditKind
    ref: str | None
    hyp: str | None


class EditCounts(BaseModel):
    """Counts of alignment operations, summed over utterances with ``+``."""

    model_config = ConfigDict(frozen=True)

    matches: NonNegativeInt = 0
    substitutions: NonNegativeInt = 0
    deletions: NonNegativeInt = 0
    insertions: NonNegativeInt = 0

    def __add__(self, other: Self) -> Self:
        """Sum the counts of two alignments."""
        return type(self)(
            matches=self.matches + other.matches,
            substitutions=self.substitutions + other.substitutions,
            deletions=self.deletions + other.deletions,
            insertions=self.insertions + other.insertions,
        )

    @property
    def errors(self) -> int:
        """Substitutions, deletions and insertions."""
        return self.substitutions + self.deletions + self.insertions

    @property
    def n_ref(self) -> int:
        """Length of the reference."""
        return self.matches + self.substitutions + self.deletions

    @property
    def n_hyp(self) -> int:
        """Length of the hypothesis."""
        return self.matches + self.substitutions + self.insertions

    @property
    def wer(self) -> float | None:
        """Word error rate, None for an empty reference."""
        return self.errors / self.n_ref if self.n_ref else None


def distance_table(ref: Sequence[str], hyp: Sequence[str]) -> list[list[int]]:
    """Unit-cost edit distances between every pair of prefixes.

    Examples
    --------
    >>> distance_table(["a", "b"], ["b"])[-1][-1]
    1
    """
    table = [list(range(len(hyp) + 1))]
    for i, ref_token in enumerate(ref, start=1):
        previous = table[-1]
        row = [i]
        for j, hyp_token in enumerate(hyp, start=1):
            row.append(
                min(
                    previous[j - 1] + (ref_token != hyp_token),
                    previous[j] + 1,
                    row[j - 1] + 1,
                )
            )
        table.append(row)
    return table


def align(ref: Sequence[str], hyp: Sequence[str]) -> list[EditOp]:
    """Minimum edit distance alignment with unit costs.

    Ties are broken while tracing back from the end, preferring a match, then a
    substitution, then a deletion, then an insertion.

    Parameters
    ----------
    ref : Sequence[str]
        Reference tokens.
    hyp : Sequence[str]
        Hypothesis tokens.

    Returns
    -------
    list[EditOp]
        Operations in sequence order.

    Examples
    --------
    >>> [op.kind.value for op in align("a b c".split(), "a x c d".split())]
    ['match', 'sub', 'match', 'ins']
    """
    table = distance_table(ref, hyp)
    ops: list[EditOp] = []
    i, j = len(ref), len(hyp)
    while i > 0 or j > 0:
        cost = table[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and cost == table[i - 1][j - 1]:
            ops.append(EditOp(EditKind.MATCH, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and cost == table[i - 1][j - 1] + 1:
            ops.append(EditOp(EditKind.SUBSTITUTION, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and cost == table[i - 1][j] + 1:
            ops.append(EditOp(EditKind.DELETION, ref[i - 1], None))
            i -= 1
        else:
            ops.append(EditOp(EditKind.INSERTION, None, hyp[j - 1]))
            j -= 1
    ops.reverse()
    return ops


def count_edits(ops: Iterable[EditOp]) -> EditCounts:
    """Count the operations of an alignment."""
    counts = dict.fromkeys(EditKind, 0)
    for op in ops:
        counts[op.kind] += 1
    return EditCounts(
        matches=counts[EditKind.MATCH],
        substitutions=counts[EditKind.SUBSTITUTION],
        deletions=counts[EditKind.DELETION],
        insertions=counts[EditKind.INSERTION],
    )
