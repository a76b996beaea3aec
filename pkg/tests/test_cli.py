"""Tests for the command line interface."""

import json
import logging
from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest

from prosokit.cli import EXIT_FATAL, EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, main, resolve_seed
from prosokit.dsp.audio import read_wav, write_wav
from prosokit.io.kaldi import read_matrix_archive, write_matrix_archive
from tests.conftest import MakeDataDir, tone

REF = "u1 <unk> in <unk> the people i watch the\n"
HYP = "u1 interesting in people i watch the\n"


@pytest.fixture(autouse=True)
def _reset_logger() -> Generator[None, None, None]:
    """Remove the handlers installed by `main`."""
    yield
    logger = logging.getLogger("prosokit")
    for handler in list(logger.handlers):
        handler.close()
        logger.removeHandler(handler)
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


def _run(capsys: pytest.CaptureFixture[str], *argv: str) -> tuple[int, dict]:
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else {}


def test_resolve_seed(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test the seed resolution.

    This function tests the following scenarios:
        - The flag wins over the environment variable.
        - The environment variable is used without flag, 0 without either.
        - Negative or non numeric seeds are rejected.
    """
    monkeypatch.delenv("PROSOKIT_SEED", raising=False)
    assert resolve_seed(None) == 0
    monkeypatch.setenv("PROSOKIT_SEED", "42")
    assert resolve_seed(None) == 42
    assert resolve_seed(7) == 7

    monkeypatch.setenv("PROSOKIT_SEED", "forty")
    with pytest.raises(SystemExit) as excinfo:
        main(["config-template"])
    assert excinfo.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as excinfo:
        main(["config-template", "--seed", "-1"])
    assert excinfo.value.code == EXIT_USAGE


def test_usage_errors(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that unknown flags, missing commands, bad log levels and windows exit with 64."""
    for argv in (
        ["score", "--unknown"],
        [],
        ["config-template", "--log-level", "LOUD"],
        ["tsm", "in.wav", "out.wav", "--alpha", "1.1", "--window", "kaiser"],
    ):
        with pytest.raises(SystemExit) as excinfo:
            main(argv)
        assert excinfo.value.code == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_score(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test the score command on the worked example.

    This function tests the following scenarios:
        - The JSON report on stdout.
        - Per-utterance detail on request.
        - Hypotheses given as CTM.
        - A missing file is a fatal error.
    """
    ref = tmp_path / "ref.txt"
    hyp = tmp_path / "hyp.txt"
    ref.write_text(REF, encoding="utf-8")
    hyp.write_text(HYP, encoding="utf-8")

    code, report = _run(capsys, "score", str(ref), str(hyp))
    assert code == EXIT_OK
    assert (report["n_ref"], report["wer_percent"]) == (6, 33.33)
    assert "per_utt" not in report

    _, report = _run(capsys, "score", str(ref), str(hyp), "--per-utt")
    assert report["per_utt"]["u1"]["wer"] == pytest.approx(1 / 3)

    ctm = tmp_path / "hyp.ctm"
    words = HYP.split()[1:]
    ctm.write_text(
        "".join(f"u1 1 {i * 0.5:.2f} 0.40 {word} 0.9\n" for i, word in enumerate(words)),
        encoding="utf-8",
    )
    _, report = _run(capsys, "score", str(ref), str(ctm), "--hyp-format", "ctm")
    assert report["wer_percent"] == 33.33

    code, _ = _run(capsys, "score", str(ref), str(tmp_path / "missing.txt"))
    assert code == EXIT_FATAL


def test_compare(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test that identical systems are not significantly different."""
    ref = tmp_path / "ref.txt"
    hyp = tmp_path / "hyp.txt"
    ref.write_text(REF + "u2 the cat is sleeping\n", encoding="utf-8")
    hyp.write_text(HYP + "u2 the cat sleeping\n", encoding="utf-8")
    code, result = _run(capsys, "compare", str(ref), str(hyp), str(hyp))
    assert code == EXIT_OK
    assert result["n_utterances"] == 2
    assert result["wer_a"] == result["wer_b"]
    assert result["z"] == 0.0
    assert result["significant"] is False


def test_filter_ctm(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test the fixed threshold and the sweep of the filter-ctm command."""
    ctm = tmp_path / "in.ctm"
    ctm.write_text(
        "u1 1 0.0 0.3 hello 0.9\nu1 1 0.3 0.3 uh 0.2\nu1 1 0.6 0.3 world 0.8\n",
        encoding="utf-8",
    )
    out = tmp_path / "out.ctm"
    code, payload = _run(capsys, "filter-ctm", str(ctm), str(out), "--threshold", "0.5")
    assert code == EXIT_OK
    assert (payload["n_words"], payload["n_kept"]) == (3, 2)
    assert len(out.read_text(encoding="utf-8").splitlines()) == 2

    ref = tmp_path / "ref.txt"
    ref.write_text("u1 hello world\n", encoding="utf-8")
    code, payload = _run(
        capsys, "filter-ctm", str(ctm), str(out), "--sweep", str(ref), "--grid-step", "0.1"
    )
    assert code == EXIT_OK
    assert payload["best_wer"] == 0.0
    assert payload["n_kept"] == 2


def test_tsm(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test the time scale command on a WAV file."""
    source = tmp_path / "in.wav"
    write_wav(tone(200.0, 0.5), source)
    out = tmp_path / "out.wav"
    code, payload = _run(capsys, "tsm", str(source), str(out), "--alpha", "1.2")
    assert code == EXIT_OK
    assert payload == {"input_samples": 8000, "output_samples": round(8000 / 1.2)}
    assert len(read_wav(out)) == round(8000 / 1.2)


def test_pitch(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test that the pitch command keeps the number of samples."""
    source = tmp_path / "in.wav"
    write_wav(tone(200.0, 0.5), source)
    code, payload = _run(capsys, "pitch", str(source), str(tmp_path / "out.wav"), "--factor", "0.9")
    assert code == EXIT_OK
    assert payload == {"input_samples": 8000, "output_samples": 8000}


def test_specaug(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test the specaug command on a feature archive.

    This function tests the following scenarios:
        - Copies follow the originals, named with their copy suffix.
        - The originals can be left out.
    """
    rng = np.random.default_rng(0)
    source = tmp_path / "feats.ark"
    write_matrix_archive(source, [("u1", rng.normal(size=(30, 8))), ("u2", np.ones((20, 8)))])
    out = tmp_path / "aug.ark"

    code, payload = _run(capsys, "specaug", str(source), str(out), "--copies", "2", "--seed", "5")
    assert code == EXIT_OK
    assert payload == {"n_input": 2, "n_output": 6}
    keys = [key for key, _ in read_matrix_archive(out)]
    assert keys == ["u1", "u1-sa1", "u1-sa2", "u2", "u2-sa1", "u2-sa2"]

    _, payload = _run(capsys, "specaug", str(source), str(out), "--no-original")
    assert payload["n_output"] == 2
    assert [key for key, _ in read_matrix_archive(out)] == ["u1-sa1", "u2-sa1"]


def test_noise_text(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test the noise-text command on Kaldi text lines."""
    source = tmp_path / "text"
    source.write_text("utt1 the school program\nutt2 ok\n", encoding="utf-8")
    out = tmp_path / "noised"
    code, payload = _run(
        capsys, "noise-text", str(source), str(out), "--probability", "1.0", "--kaldi-text"
    )
    assert code == EXIT_OK
    assert payload == {"n_lines": 2, "n_eligible": 3, "n_noised": 3}
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0].split()[0] == "utt1"
    assert len(lines[0].split()) == 7
    assert lines[1] == "utt2 ok"


def test_augment(
    make_datadir: MakeDataDir, tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Test the augment command on a small data directory."""
    datadir = make_datadir(3)
    code, payload = _run(
        capsys, "augment", str(datadir), str(tmp_path / "sr"), "--recipe", "sr", "--seed", "3"
    )
    assert code == EXIT_OK
    assert payload == {"recipe": "sr", "n_input": 3, "n_output": 6, "n_failed": 0}
    assert (tmp_path / "sr" / "wav.scp").exists()


def test_augment_reproducible(
    make_datadir: MakeDataDir, tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Test that two runs with the same seed write identical audio and manifests.

    This function tests the following scenarios:
        - The second run uses two workers and still matches the first one.
        - Every generated WAV file and the manifest are equal byte for byte.
    """
    datadir = str(make_datadir(3))
    first, second = tmp_path / "first", tmp_path / "second"
    assert _run(capsys, "augment", datadir, str(first), "--recipe", "sr-p", "--seed", "11")[0] == 0
    code, _ = _run(
        capsys, "augment", datadir, str(second), "--recipe", "sr-p", "--seed", "11", "--jobs", "2"
    )
    assert code == EXIT_OK

    names = sorted(path.name for path in (first / "wav").iterdir())
    assert names == sorted(path.name for path in (second / "wav").iterdir())
    assert len(names) == 6
    for name in [*(f"wav/{name}" for name in names), "augment_manifest.csv"]:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_augment_empty(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test that an empty data directory gives an empty output and a header-only manifest."""
    datadir = tmp_path / "empty"
    datadir.mkdir()
    for name in ("wav.scp", "text", "utt2spk"):
        (datadir / name).write_text("", encoding="utf-8")
    out = tmp_path / "out"
    code, payload = _run(capsys, "augment", str(datadir), str(out), "--recipe", "sr2-p2")
    assert code == EXIT_OK
    assert payload == {"recipe": "sr2-p2", "n_input": 0, "n_output": 0, "n_failed": 0}
    manifest = (out / "augment_manifest.csv").read_text(encoding="utf-8").splitlines()
    assert manifest == ["new_utt_id,src_utt_id,kind,factor,status,out_wav_path"]


def test_stats(
    make_datadir: MakeDataDir, tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Test the stats command.

    This function tests the following scenarios:
        - Statistics per group read from a separate map.
        - Unreadable audio gives the partial success exit code.
    """
    datadir = make_datadir(4)
    groups = tmp_path / "groups"
    groups.write_text("spk1 A1\nspk2 A2\n", encoding="utf-8")
    code, stats = _run(capsys, "stats", str(datadir), "--spk2group", str(groups))
    assert code == EXIT_OK
    assert sorted(stats["per_group"]) == ["A1", "A2"]
    assert stats["n_utterances"] == 4

    (tmp_path / "data_wav" / "utt01.wav").write_bytes(b"broken")
    code, stats = _run(capsys, "stats", str(datadir))
    assert code == EXIT_PARTIAL
    assert list(stats["skipped"]) == ["utt01"]


def test_config(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test the settings template and invalid settings files."""
    code = main(["config-template"])
    template = capsys.readouterr().out
    assert code == EXIT_OK
    assert "stft:" in template
    assert "frame_ms: 32.0" in template

    config = tmp_path / "settings.yaml"
    config.write_text("stft:\n    frame_len: 20\n", encoding="utf-8")
    ref = tmp_path / "ref.txt"
    ref.write_text(REF, encoding="utf-8")
    assert main(["score", str(ref), str(ref), "--config", str(config)]) == EXIT_FATAL
