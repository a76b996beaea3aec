"""Shared fixtures: small synthetic Kaldi data directories."""

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from prosokit.dsp.audio import AudioBuffer, write_wav

SAMPLE_RATE = 16000
TRANSCRIPTS = (
    "i like to watch the people",
    "my favourite pro- program is about animals",
    "@uh we go to school by bus",
    "<unk> in the holiday i play football",
    "the cat is sleeping",
)

MakeDataDir = Callable[..., Path]


def tone(f0: float, duration: float, amplitude: float = 0.3) -> AudioBuffer:
    """Harmonic tone used as synthetic speech."""
    t = np.arange(round(duration * SAMPLE_RATE)) / SAMPLE_RATE
    samples = amplitude * (np.sin(2 * np.pi * f0 * t) + 0.5 * np.sin(4 * np.pi * f0 * t))
    return AudioBuffer(samples=samples, sample_rate=SAMPLE_RATE)


@pytest.fixture
def make_datadir(tmp_path: Path) -> MakeDataDir:
    """Return a factory writing a data directory of `n_utts` tones.

    Utterances alternate between speakers ``spk1`` and ``spk2``. With `segments`, all
    utterances are cut from a single recording.
    """

    def factory(
        n_utts: int = 10,
        duration: float = 0.25,
        segments: bool = False,
        groups: dict[str, str] | None = None,
        name: str = "data",
    ) -> Path:
        root = tmp_path / name
        audio_dir = tmp_path / f"{name}_wav"
        root.mkdir()
        utt_ids = [f"utt{i:02d}" for i in range(n_utts)]
        text = [f"{utt} {TRANSCRIPTS[i % len(TRANSCRIPTS)]}" for i, utt in enumerate(utt_ids)]
        utt2spk = [f"{utt} spk{i % 2 + 1}" for i, utt in enumerate(utt_ids)]

        if segments:
            pieces = [tone(150.0 + 10 * i, duration).samples for i in range(n_utts)]
            recording = AudioBuffer(samples=np.concatenate(pieces), sample_rate=SAMPLE_RATE)
            write_wav(recording, audio_dir / "rec.wav")
            wav_scp = [f"rec {audio_dir / 'rec.wav'}"]
            segment_lines = [
                f"{utt} rec {i * duration:.4f} {(i + 1) * duration:.4f}"
                for i, utt in enumerate(utt_ids)
            ]
            (root / "segments").write_text("\n".join(segment_lines) + "\n", encoding="utf-8")
        else:
            wav_scp = []
            for i, utt in enumerate(utt_ids):
                write_wav(tone(150.0 + 10 * i, duration), audio_dir / f"{utt}.wav")
                wav_scp.append(f"{utt} {audio_dir / f'{utt}.wav'}")

        (root / "wav.scp").write_text("\n".join(wav_scp) + "\n", encoding="utf-8")
        (root / "text").write_text("\n".join(text) + "\n", encoding="utf-8")
        (root / "utt2spk").write_text("\n".join(utt2spk) + "\n", encoding="utf-8")
        if groups is not None:
            lines = [f"{speaker} {label}" for speaker, label in groups.items()]
            (root / "spk2group").write_text("\n".join(lines) + "\n", encoding="utf-8")
        return root

    return factory
