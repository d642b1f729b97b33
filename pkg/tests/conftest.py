"""Shared fixtures: signal generators, a disposable demo project and the
acceptance-criteria reporting hook."""

import shutil
from pathlib import Path

import numpy as np
import pytest

from sonobox.audio_io import AudioClip, encode_wav

REPO_ROOT = Path(__file__).resolve().parent.parent
DEMO_DIR = REPO_ROOT / "demo"


# ---------------------------------------------------------------------------
# signal generators
#
# Test content is kept below ~0.55 * Nyquist: the spectrogram keeps
# window/2 bins (Nyquist bin dropped), so energy at the top of the band is
# irrecoverable by construction and full-band white noise cannot round-trip.

def sine_clip(freq_hz, seconds, sr, amp=0.5, offset_s=0.0):
    t = np.arange(int(round(seconds * sr))) / sr
    return AudioClip(amp * np.sin(2 * np.pi * freq_hz * t), sr, offset_s=offset_s)


def tone_mixture_clip(rng, seconds, sr, n_tones=None, fmax_frac=0.55):
    n = int(round(seconds * sr))
    t = np.arange(n) / sr
    k = n_tones or int(rng.integers(4, 12))
    freqs = rng.uniform(40.0, fmax_frac * sr / 2.0, k)
    amps = rng.uniform(0.02, 0.12, k)
    phases = rng.uniform(0, 2 * np.pi, k)
    x = np.zeros(n)
    for f, a, p in zip(freqs, amps, phases):
        x += a * np.sin(2 * np.pi * f * t + p)
    return AudioClip(np.clip(x, -1, 1), sr)


def lowpassed_noise(rng, n, sr, cutoff_frac=0.5, amp=0.3):
    """Noise with no energy above cutoff_frac * Nyquist (brickwall in the
    global spectrum)."""
    noise = rng.normal(0, 1.0, n)
    spectrum = np.fft.rfft(noise)
    spectrum[int(len(spectrum) * cutoff_frac):] = 0
    shaped = np.fft.irfft(spectrum, n)
    return amp * shaped / np.abs(shaped).max()


def dft_oracle(x, k_indices):
    """Direct DFT by explicit summation (independent of np.fft code paths).

    Chunked over output bins to keep the coefficient matrix small.
    """
    n = len(x)
    ks = np.asarray(k_indices)
    out = np.empty(len(ks), dtype=complex)
    samples = np.arange(n)
    for lo in range(0, len(ks), 32):
        chunk = ks[lo : lo + 32]
        angles = -2j * np.pi * np.outer(chunk, samples) / n
        out[lo : lo + 32] = np.exp(angles) @ x
    return out


def band_energy_oracle(x, f_lo, f_hi, sr):
    """Signal energy within [f_lo, f_hi] by windowed direct DFT.

    The taper (hand-built raised cosine) suppresses truncation splatter of
    strong out-of-band components, which would otherwise dominate the
    measurement; both signals under comparison go through the same path.
    """
    n = len(x)
    taper = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / (n - 1))
    k_lo = int(np.ceil(f_lo * n / sr))
    k_hi = int(np.floor(f_hi * n / sr))
    coeffs = dft_oracle(x * taper, np.arange(k_lo, k_hi + 1))
    return float(np.sum(np.abs(coeffs) ** 2))


# ---------------------------------------------------------------------------
# demo project

def synth_audio(dest, name, sr, seconds, seed):
    rng = np.random.default_rng(seed)
    clip = tone_mixture_clip(rng, seconds, sr, n_tones=6)
    (dest / name).write_bytes(encode_wav(clip))


def build_demo_project(dest: Path, with_audio=True) -> Path:
    """Copy the checked-in demo config CSVs and synthesize small recordings."""
    dest.mkdir(parents=True, exist_ok=True)
    for csv_name in ("species_list.csv", "location_list.csv", "bto_codes.csv"):
        shutil.copy(DEMO_DIR / csv_name, dest / csv_name)
    if with_audio:
        audio = dest / "audio"
        audio.mkdir(exist_ok=True)
        synth_audio(audio, "ASHF01_20240506_063000.wav", 24000, 4.0, seed=101)
        synth_audio(audio, "BIRC02_20240518_052000_start_02_30.wav", 22050, 2.0, seed=102)
        synth_audio(audio, "oddly_named_recording.wav", 16000, 1.5, seed=103)
    return dest


@pytest.fixture
def demo_project(tmp_path):
    return build_demo_project(tmp_path / "project")


# ---------------------------------------------------------------------------
# acceptance reporting: one pass/fail line per criterion at the end of the run

_acceptance_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and "test_acceptance" in str(item.fspath):
        _acceptance_results.append((item, report.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for item, passed in _acceptance_results:
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        terminalreporter.write_line(("PASS  " if passed else "FAIL  ") + doc)
