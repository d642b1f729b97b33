"""Synthesize demo recordings into demo/audio/ so the app has something to show.

Each file carries a handful of bird-like FM chirps over soft background
noise, named after the recorders in location_list.csv. Run once:

    python demo/make_audio.py
"""

from pathlib import Path

import numpy as np

from sonobox.audio_io import AudioClip, encode_wav


def chirp(t, start, dur, f0, f1, amp):
    """One smooth frequency sweep with a raised-cosine envelope."""
    local = (t - start) / dur
    active = (local >= 0) & (local <= 1)
    phase = 2 * np.pi * (f0 * (t - start) + 0.5 * (f1 - f0) * (t - start) ** 2 / dur)
    env = np.where(active, 0.5 - 0.5 * np.cos(2 * np.pi * np.clip(local, 0, 1)), 0.0)
    return amp * env * np.sin(phase)


def background(rng, n, sr, cutoff_hz, amp):
    """Low-passed noise floor (wind-ish rumble)."""
    noise = rng.normal(0, 1.0, n)
    spectrum = np.fft.rfft(noise)
    freqs = np.fft.rfftfreq(n, 1 / sr)
    spectrum[freqs > cutoff_hz] = 0
    shaped = np.fft.irfft(spectrum, n)
    return amp * shaped / np.abs(shaped).max()


def make_file(path, sr, seconds, seed):
    rng = np.random.default_rng(seed)
    n = int(sr * seconds)
    t = np.arange(n) / sr
    x = background(rng, n, sr, 900.0, 0.05)
    n_calls = rng.integers(4, 9)
    for _ in range(n_calls):
        start = rng.uniform(0.5, seconds - 1.5)
        dur = rng.uniform(0.15, 0.8)
        f0 = rng.uniform(1500, 6000)
        f1 = f0 * rng.uniform(0.7, 1.4)
        x += chirp(t, start, dur, f0, f1, rng.uniform(0.1, 0.35))
    clip = AudioClip(np.clip(x, -1, 1), sr)
    path.write_bytes(encode_wav(clip))
    print(f"wrote {path} ({seconds:g}s @ {sr} Hz)")


def main():
    out = Path(__file__).parent / "audio"
    out.mkdir(exist_ok=True)
    make_file(out / "ASHF01_20240506_063000.wav", 24000, 35, seed=11)
    make_file(out / "BIRC02_20240518_052000_start_02_30.wav", 22050, 20, seed=23)
    make_file(out / "CLOO03_20240601_204500.wav", 16000, 16, seed=37)


if __name__ == "__main__":
    main()
