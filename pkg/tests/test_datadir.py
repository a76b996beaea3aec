"""Tests for `prosokit.io.kaldi` and `prosokit.corpus.datadir`."""

from pathlib import Path

import numpy as np
import pytest

from prosokit.corpus.datadir import DataDir, Segment, load_datadir, write_datadir
from prosokit.errors import DataDirError, FormatError
from prosokit.io.kaldi import (
    read_matrix_archive,
    read_scalar_table,
    read_transcripts,
    write_matrix_archive,
    write_table,
)
from tests.conftest import MakeDataDir


def test_tables(tmp_path: Path) -> None:
    """Test reading and writing key/value tables.

    This function tests the following scenarios:
        - Blank lines are skipped and empty transcripts kept.
        - Tables are written sorted by key.
        - Duplicated ids and short lines raise with their line number.
    """
    path = tmp_path / "text"
    path.write_text("b hello world\n\na\n", encoding="utf-8")
    assert read_transcripts(path) == {"b": ["hello", "world"], "a": []}

    out = tmp_path / "out" / "utt2spk"
    write_table(out, {"u2": "s1", "u1": "s2", "u3": ["x", "y"]})
    assert out.read_text(encoding="utf-8") == "u1 s2\nu2 s1\nu3 x y\n"

    path.write_text("u1 s1\nu1 s2\n", encoding="utf-8")
    with pytest.raises(FormatError, match="duplicate") as excinfo:
        read_scalar_table(path)
    assert excinfo.value.line == 2

    path.write_text("u1\n", encoding="utf-8")
    with pytest.raises(FormatError):
        read_scalar_table(path)


def test_matrix_archive(tmp_path: Path) -> None:
    """Test the text matrix archives.

    This function tests the following scenarios:
        - Matrices are written and read back in order.
        - Values may share the line of the opening bracket.
        - Unterminated matrices and ragged rows raise.
    """
    path = tmp_path / "feats.ark"
    first = np.arange(6, dtype=np.float64).reshape(2, 3) / 7
    second = np.array([[1.5, -2.25]])
    write_matrix_archive(path, [("b", first), ("a", second)])
    read = list(read_matrix_archive(path))
    assert [key for key, _ in read] == ["b", "a"]
    np.testing.assert_allclose(read[0][1], first, rtol=1e-9)
    np.testing.assert_array_equal(read[1][1], second)

    path.write_text("u [ 1 2\n 3 4 ]\n", encoding="utf-8")
    np.testing.assert_array_equal(next(read_matrix_archive(path))[1], [[1, 2], [3, 4]])

    path.write_text("u [\n 1 2\n", encoding="utf-8")
    with pytest.raises(FormatError, match="not terminated"):
        list(read_matrix_archive(path))
    path.write_text("u [\n 1 2\n 3 ]\n", encoding="utf-8")
    with pytest.raises(FormatError, match="ragged"):
        list(read_matrix_archive(path))


def test_load_datadir(make_datadir: MakeDataDir) -> None:
    """Test loading a data directory with and without segments."""
    datadir = load_datadir(make_datadir(4))
    assert len(datadir) == 4
    assert datadir.speakers == ["spk1", "spk2"]
    assert datadir.text["utt00"][:2] == ("i", "like")
    assert datadir.duration("utt01") == pytest.approx(0.25)
    assert len(datadir.read_audio("utt02")) == 4000

    segmented = load_datadir(make_datadir(3, segments=True, name="seg"))
    assert segmented.segments is not None
    assert segmented.segments["utt01"] == Segment("rec", 0.25, 0.5)
    assert segmented.audio_path("utt02").name == "rec.wav"
    assert len(segmented.read_audio("utt01")) == 4000


def test_datadir_problems(make_datadir: MakeDataDir) -> None:
    """Test that every inconsistency is reported at once.

    This function tests the following scenarios:
        - Missing required files.
        - Utterances missing from some tables.
        - Segments with unknown recordings or invalid times.
    """
    root = make_datadir(3)
    (root / "utt2spk").unlink()
    with pytest.raises(DataDirError, match="missing file 'utt2spk'"):
        load_datadir(root)

    root = make_datadir(3, name="bad")
    with (root / "text").open("a", encoding="utf-8") as f:
        f.write("extra1 hello\nextra2 hi\n")
    with pytest.raises(DataDirError) as excinfo:
        load_datadir(root)
    assert len(excinfo.value.problems) == 4

    datadir = DataDir(
        wav_map={"rec": Path("rec.wav")},
        text={"u1": ("a",), "u2": ("b",)},
        utt2spk={"u1": "s", "u2": "s"},
        segments={"u1": Segment("other", 0.0, 1.0), "u2": Segment("rec", 2.0, 1.0)},
    )
    assert datadir.problems() == [
        "segment 'u1' refers to unknown recording 'other'",
        "segment 'u2' has invalid times 2.0-1.0",
    ]


def test_write_datadir(make_datadir: MakeDataDir, tmp_path: Path) -> None:
    """Test that a written data directory loads back identically, with spk2utt."""
    datadir = load_datadir(make_datadir(4, segments=True, groups={"spk1": "A1", "spk2": "B1"}))
    out = tmp_path / "copy"
    write_datadir(datadir, out)

    assert load_datadir(out) == datadir
    spk2utt = (out / "spk2utt").read_text(encoding="utf-8").splitlines()
    assert spk2utt == ["spk1 utt00 utt02", "spk2 utt01 utt03"]
