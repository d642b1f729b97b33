"""Short-time Fourier analysis and time-frequency selection filtering.

The complex spectrogram is the shared substrate: the display raster is its
dB magnitude, and filtered playback comes from zeroing (or attenuating)
cells outside a selection and resynthesizing with weighted overlap-add.

Conventions, fixed package-wide:
  * frames along axis 0, frequency bins along axis 1
  * bins 0 .. window_size/2 - 1 are kept (the Nyquist bin is dropped, so a
    256-point window yields 128 bins)
  * frame times are window centers, absolute in the source recording
  * cell membership in a selection uses the frame center time and bin
    center frequency, half-open on the upper edges
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .audio_io import AudioClip
from .errors import (
    EmptySelectionError,
    ReconstructionUnsupportedError,
    TooShortError,
    ValidationError,
)

WINDOW_FUNCTIONS = ("hann", "hamming", "rectangular")
DEFAULT_FLOOR_DB = -96.0
DEFAULT_ATTENUATION_FACTOR = 100.0

_COLA_RTOL = 1e-8


@dataclass(frozen=True)
class StftParams:
    """Analysis parameters: window length, overlap fraction and window shape."""

    window_size: int = 256
    overlap_fraction: float = 0.75
    window_fn: str = "hann"

    def __post_init__(self):
        w = self.window_size
        if w < 16 or (w & (w - 1)) != 0:
            raise ValidationError("window_size must be a power of two >= 16", field="window_size")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ValidationError("overlap_fraction must lie in [0, 1)", field="overlap_fraction")
        exact = w * (1.0 - self.overlap_fraction)
        if abs(exact - round(exact)) > 1e-9 or round(exact) < 1:
            raise ValidationError(
                "window_size * (1 - overlap_fraction) must be a positive integer",
                field="overlap_fraction",
            )
        if self.window_fn not in WINDOW_FUNCTIONS:
            raise ValidationError(
                f"window_fn must be one of {WINDOW_FUNCTIONS}", field="window_fn"
            )

    @property
    def hop(self) -> int:
        return round(self.window_size * (1.0 - self.overlap_fraction))

    def window_samples(self) -> np.ndarray:
        """Periodic window of window_size points (periodic variants sum
        to a constant under overlap-add, the symmetric ones do not)."""
        w = self.window_size
        n = np.arange(w)
        if self.window_fn == "hann":
            return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / w)
        if self.window_fn == "hamming":
            return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / w)
        return np.ones(w)


@dataclass(frozen=True)
class SelectionBox:
    """Time-frequency rectangle: lower-left / upper-right corners in s and Hz."""

    t_min_s: float
    t_max_s: float
    f_min_hz: float
    f_max_hz: float

    def __post_init__(self):
        if not self.t_min_s < self.t_max_s:
            raise ValidationError("t_min_s must be below t_max_s", field="t_max_s")
        if self.f_min_hz < 0:
            raise ValidationError("f_min_hz must be non-negative", field="f_min_hz")
        if not self.f_min_hz < self.f_max_hz:
            raise ValidationError("f_min_hz must be below f_max_hz", field="f_max_hz")


@dataclass(frozen=True)
class FilterMode:
    """How cells outside the selection are treated on reconstruction."""

    tag: str = "zero_outside"
    attenuation_factor: float = DEFAULT_ATTENUATION_FACTOR

    def __post_init__(self):
        if self.tag not in ("zero_outside", "attenuate_outside"):
            raise ValidationError("unknown filter mode tag", field="tag")
        if not self.attenuation_factor > 1:
            raise ValidationError("attenuation_factor must exceed 1", field="attenuation_factor")

    @classmethod
    def zero(cls) -> "FilterMode":
        return cls(tag="zero_outside")

    @classmethod
    def attenuate(cls, factor: float = DEFAULT_ATTENUATION_FACTOR) -> "FilterMode":
        return cls(tag="attenuate_outside", attenuation_factor=factor)


class _SpectrogramAxes:
    """Shared axis helpers for complex and dB spectrograms."""

    @property
    def n_frames(self) -> int:
        return self._values().shape[0]

    @property
    def n_bins(self) -> int:
        return self._values().shape[1]

    @property
    def nyquist_hz(self) -> float:
        return self.sample_rate_hz / 2.0

    def time_extent(self) -> tuple[float, float]:
        """Span covered by the analysis windows: [first window start, last window end]."""
        half = self.params.window_size / (2.0 * self.sample_rate_hz)
        return float(self.frame_times_s[0] - half), float(self.frame_times_s[-1] + half)

    def freq_extent(self) -> tuple[float, float]:
        """Display span: bin k occupies [k, k+1) * sr/window, so [0, Nyquist] overall."""
        return 0.0, self.nyquist_hz


@dataclass(frozen=True)
class ComplexSpectrogram(_SpectrogramAxes):
    values: np.ndarray  # (frames, bins) complex
    frame_times_s: np.ndarray
    bin_freqs_hz: np.ndarray
    params: StftParams
    sample_rate_hz: int

    def _values(self) -> np.ndarray:
        return self.values


@dataclass(frozen=True)
class MagnitudeSpectrogramDb(_SpectrogramAxes):
    values_db: np.ndarray  # (frames, bins), each in [floor_db, 0]
    floor_db: float
    frame_times_s: np.ndarray
    bin_freqs_hz: np.ndarray
    params: StftParams
    sample_rate_hz: int

    def _values(self) -> np.ndarray:
        return self.values_db


def stft(clip: AudioClip, params: StftParams = StftParams()) -> ComplexSpectrogram:
    """Windowed FFT of successive hops.

    Produces floor((N - window)/hop) + 1 frames of window/2 bins; the tail
    samples not covered by a whole window are ignored. Raises TooShortError
    for clips shorter than one window.
    """
    w = params.window_size
    hop = params.hop
    x = clip.samples
    if len(x) < w:
        raise TooShortError(f"clip has {len(x)} samples, below the {w}-point window")
    frames = sliding_window_view(x, w)[::hop]
    windowed = frames * params.window_samples()
    values = np.fft.rfft(windowed, axis=1)[:, : w // 2]
    n_frames = frames.shape[0]
    sr = clip.sample_rate_hz
    frame_times = clip.offset_s + (np.arange(n_frames) * hop + w / 2.0) / sr
    bin_freqs = np.arange(w // 2) * (sr / w)
    return ComplexSpectrogram(
        values=values,
        frame_times_s=frame_times,
        bin_freqs_hz=bin_freqs,
        params=params,
        sample_rate_hz=sr,
    )


def _cola_profile(params: StftParams) -> np.ndarray:
    """Overlap-add sum of shifted windows over one hop period (exact for an
    infinite frame train)."""
    win = params.window_samples()
    hop = params.hop
    return np.bincount(np.arange(params.window_size) % hop, weights=win, minlength=hop)


def check_cola(params: StftParams) -> bool:
    """True when shifted analysis windows sum to a constant."""
    profile = _cola_profile(params)
    mean = profile.mean()
    if mean <= 0:
        return False
    return (profile.max() - profile.min()) <= _COLA_RTOL * mean


def istft(spec: ComplexSpectrogram) -> AudioClip:
    """Weighted overlap-add reconstruction of a (possibly filtered) spectrogram.

    Each frame is inverted assuming a zero Nyquist bin, weighted by the
    analysis window and accumulated; the running window-energy sum
    normalizes the result, which makes the round trip exact on samples
    covered by the analysis windows. Output length is
    window + (frames-1)*hop, i.e. any uncovered tail is dropped.
    """
    params = spec.params
    if not check_cola(params):
        raise ReconstructionUnsupportedError(
            f"{params.window_fn} window at overlap {params.overlap_fraction} does not "
            "satisfy constant overlap-add; reconstruction is unsupported"
        )
    w = params.window_size
    hop = params.hop
    win = params.window_samples()
    n_frames = spec.values.shape[0]

    full = np.zeros((n_frames, w // 2 + 1), dtype=complex)
    full[:, : w // 2] = spec.values
    frames = np.fft.irfft(full, n=w, axis=1)

    out = np.zeros(w + (n_frames - 1) * hop)
    den = np.zeros_like(out)
    win_sq = win * win
    for i in range(n_frames):
        sl = slice(i * hop, i * hop + w)
        out[sl] += frames[i] * win
        den[sl] += win_sq

    threshold = 1e-10 * den.max()
    np.divide(out, den, out=out, where=den > threshold)
    out[den <= threshold] = 0.0

    sr = spec.sample_rate_hz
    offset = max(0.0, float(spec.frame_times_s[0]) - w / (2.0 * sr))
    return AudioClip(samples=out, sample_rate_hz=sr, offset_s=offset)


def to_db(spec: ComplexSpectrogram, floor_db: float = DEFAULT_FLOOR_DB) -> MagnitudeSpectrogramDb:
    """Magnitudes scaled to dB relative to the global maximum, clamped at floor_db.

    The maximum cell maps to exactly 0 dB; an all-zero spectrogram maps
    every cell to floor_db.
    """
    if not floor_db < 0:
        raise ValidationError("floor_db must be negative", field="floor_db")
    mags = np.abs(spec.values)
    peak = mags.max() if mags.size else 0.0
    if peak == 0.0:
        db = np.full(mags.shape, floor_db)
    else:
        with np.errstate(divide="ignore"):
            db = 20.0 * np.log10(mags / peak)
        np.maximum(db, floor_db, out=db)
    return MagnitudeSpectrogramDb(
        values_db=db,
        floor_db=floor_db,
        frame_times_s=spec.frame_times_s,
        bin_freqs_hz=spec.bin_freqs_hz,
        params=spec.params,
        sample_rate_hz=spec.sample_rate_hz,
    )


def _selection_mask(spec: ComplexSpectrogram, box: SelectionBox) -> np.ndarray:
    in_t = (spec.frame_times_s >= box.t_min_s) & (spec.frame_times_s < box.t_max_s)
    in_f = (spec.bin_freqs_hz >= box.f_min_hz) & (spec.bin_freqs_hz < box.f_max_hz)
    return np.outer(in_t, in_f)


def box_filter(spec: ComplexSpectrogram, box: SelectionBox, mode: FilterMode) -> ComplexSpectrogram:
    """Keep cells inside the box untouched; zero or attenuate the rest.

    Attenuation multiplies the complex values by 1/attenuation_factor,
    scaling magnitude while preserving phase. Raises EmptySelectionError
    when no cell center falls inside the box.
    """
    mask = _selection_mask(spec, box)
    if not mask.any():
        raise EmptySelectionError("selection does not cover any spectrogram cell")
    values = spec.values.copy()
    if mode.tag == "zero_outside":
        values[~mask] = 0.0
    else:
        values[~mask] *= 1.0 / mode.attenuation_factor
    return replace(spec, values=values)


def band_filter(
    spec: ComplexSpectrogram, f_min_hz: float, f_max_hz: float, mode: FilterMode
) -> ComplexSpectrogram:
    """Box filter spanning all frames: keep only [f_min_hz, f_max_hz)."""
    if f_min_hz < 0 or not f_min_hz < f_max_hz:
        raise ValidationError("need 0 <= f_min_hz < f_max_hz", field="f_max_hz")
    box = SelectionBox(
        t_min_s=-np.inf, t_max_s=np.inf, f_min_hz=f_min_hz, f_max_hz=f_max_hz
    )
    return box_filter(spec, box, mode)


def noise_reduce(spec: ComplexSpectrogram) -> ComplexSpectrogram:
    """Row-wise noise reduction on the complex spectrogram.

    For each frequency bin, the median magnitude across frames is
    subtracted from every cell's magnitude (floored at zero); phase is
    preserved. Stationary banded noise, whose median equals its typical
    level, is removed while sparse vocalisations survive.
    """
    if spec.values.size == 0:
        raise ValidationError("spectrogram is empty")
    mags = np.abs(spec.values)
    medians = np.median(mags, axis=0)
    reduced = np.maximum(mags - medians[None, :], 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(mags > 0, reduced / np.where(mags > 0, mags, 1.0), 0.0)
    return replace(spec, values=spec.values * scale)
