"""Rasterize dB spectrograms to palette-mapped PNGs.

This is the hot path of the annotation loop, so the server renders only
the base raster; bounding boxes and drag guides are separate overlay
layers drawn client-side, and a label edit never touches this code.

Sampling is nearest-cell: the spectrogram is treated as a grid of
equally-sized tiles spanning its display extent, and each output pixel
takes the color of the tile containing its center. Palettes are embedded
8-stop tables (standard published viridis-family values) so the output
does not depend on any plotting toolchain.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from PIL import Image

from .audio_io import AudioClip
from .dsp import (
    MagnitudeSpectrogramDb,
    SelectionBox,
    StftParams,
    stft,
    to_db,
)
from .errors import EmptySelectionError, TooShortError, ValidationError

MAX_PIXELS = 64_000_000
DEFAULT_WIDTH_PX = 1124
DEFAULT_HEIGHT_PX = 256


@dataclass(frozen=True)
class Palette:
    name: str
    stops: tuple  # ((position, (r, g, b)), ...) with positions 0 .. 1 strictly increasing


def _evenly(name, colors):
    n = len(colors)
    return Palette(name, tuple((i / (n - 1), c) for i, c in enumerate(colors)))


PALETTES = {
    p.name: p
    for p in (
        _evenly("viridis", ((68, 1, 84), (70, 50, 126), (54, 92, 141), (39, 127, 142),
                            (31, 161, 135), (74, 193, 109), (160, 218, 57), (253, 231, 37))),
        _evenly("magma", ((0, 0, 4), (34, 17, 80), (95, 24, 127), (152, 45, 128),
                          (211, 67, 110), (248, 118, 92), (254, 187, 129), (252, 253, 191))),
        _evenly("inferno", ((0, 0, 4), (40, 11, 83), (101, 21, 110), (159, 42, 99),
                            (212, 72, 66), (245, 125, 21), (250, 194, 40), (252, 255, 164))),
        _evenly("plasma", ((13, 8, 135), (83, 2, 163), (139, 10, 165), (184, 50, 137),
                           (219, 92, 104), (244, 136, 73), (254, 189, 42), (240, 249, 33))),
        _evenly("grayscale", tuple((round(i * 255 / 7),) * 3 for i in range(8))),
    )
}


def list_palettes() -> list[str]:
    """Available palette names, in a stable order."""
    return list(PALETTES)


@dataclass(frozen=True)
class RenderParams:
    palette: str = "viridis"
    contrast_floor_db: float = -96.0
    width_px: int = DEFAULT_WIDTH_PX
    height_px: int = DEFAULT_HEIGHT_PX
    zoom: SelectionBox | None = None

    def __post_init__(self):
        if self.palette not in PALETTES:
            raise ValidationError(f"unknown palette {self.palette!r}", field="palette")
        if not -120.0 <= self.contrast_floor_db <= -10.0:
            raise ValidationError("contrast_floor_db must lie in [-120, -10]", field="floor_db")
        if self.width_px < 1 or self.height_px < 1:
            raise ValidationError("image dimensions must be positive", field="width_px")
        if self.width_px * self.height_px > MAX_PIXELS:
            raise ValidationError("requested image exceeds the pixel cap", field="width_px")


class RenderExtent(NamedTuple):
    """Exact time/frequency span of a rendered raster, for pixel mapping."""

    t0_s: float
    t1_s: float
    f0_hz: float
    f1_hz: float


def _crop_indices(spec: MagnitudeSpectrogramDb, zoom: SelectionBox | None):
    """Tile index ranges [i_lo, i_hi) x [k_lo, k_hi) covered by the zoom box."""
    n_frames, n_bins = spec.values_db.shape
    if zoom is None:
        return 0, n_frames, 0, n_bins
    t0, t1 = spec.time_extent()
    f0, f1 = spec.freq_extent()
    if zoom.t_max_s <= t0 or zoom.t_min_s >= t1 or zoom.f_max_hz <= f0 or zoom.f_min_hz >= f1:
        raise EmptySelectionError("zoom box lies outside the spectrogram extent")
    i_lo = int(np.clip(math.floor((zoom.t_min_s - t0) / (t1 - t0) * n_frames), 0, n_frames - 1))
    i_hi = int(np.clip(math.ceil((zoom.t_max_s - t0) / (t1 - t0) * n_frames), i_lo + 1, n_frames))
    bin_width = f1 / n_bins
    k_lo = int(np.clip(math.floor(zoom.f_min_hz / bin_width), 0, n_bins - 1))
    k_hi = int(np.clip(math.ceil(zoom.f_max_hz / bin_width), k_lo + 1, n_bins))
    return i_lo, i_hi, k_lo, k_hi


def rendered_extent(spec: MagnitudeSpectrogramDb, zoom: SelectionBox | None = None) -> RenderExtent:
    """Extent a render of this spectrogram covers, snapped to tile edges."""
    i_lo, i_hi, k_lo, k_hi = _crop_indices(spec, zoom)
    t0, t1 = spec.time_extent()
    n_frames, n_bins = spec.values_db.shape
    bin_width = spec.freq_extent()[1] / n_bins
    span = t1 - t0
    return RenderExtent(
        t0_s=t0 + span * i_lo / n_frames,
        t1_s=t0 + span * i_hi / n_frames,
        f0_hz=k_lo * bin_width,
        f1_hz=k_hi * bin_width,
    )


def _apply_palette(palette: Palette, t: np.ndarray) -> np.ndarray:
    positions = np.array([p for p, _ in palette.stops])
    rgb = np.empty(t.shape + (3,), dtype=np.uint8)
    for c in range(3):
        channel = np.array([color[c] for _, color in palette.stops], dtype=float)
        rgb[..., c] = np.round(np.interp(t, positions, channel)).astype(np.uint8)
    return rgb


def render_raster(
    spec: MagnitudeSpectrogramDb, params: RenderParams
) -> tuple[bytes, RenderExtent]:
    """Render and also report the exact extent covered (for HTTP headers)."""
    if spec.values_db.size == 0:
        raise ValidationError("spectrogram is empty")
    i_lo, i_hi, k_lo, k_hi = _crop_indices(spec, params.zoom)
    w, h = params.width_px, params.height_px
    n_cols = i_hi - i_lo
    n_rows = k_hi - k_lo

    # Nearest-cell sampling at each pixel center; frequency increases upward.
    frame_idx = i_lo + np.clip(
        ((np.arange(w) + 0.5) * n_cols / w).astype(np.intp), 0, n_cols - 1
    )
    bin_idx = k_lo + np.clip(
        ((np.arange(h)[::-1] + 0.5) * n_rows / h).astype(np.intp), 0, n_rows - 1
    )
    dbs = spec.values_db[frame_idx[None, :], bin_idx[:, None]]

    floor = params.contrast_floor_db
    t = np.clip((dbs - floor) / (0.0 - floor), 0.0, 1.0)
    rgb = _apply_palette(PALETTES[params.palette], t)

    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue(), rendered_extent(spec, params.zoom)


def render_spectrogram(spec: MagnitudeSpectrogramDb, params: RenderParams) -> bytes:
    """PNG of exactly width_px x height_px; no axes or margins baked in."""
    png, _ = render_raster(spec, params)
    return png


def zoom_recompute(
    clip: AudioClip,
    region: SelectionBox,
    stft_params: StftParams,
    render_params: RenderParams,
    transform=None,
) -> tuple[bytes, RenderExtent]:
    """Re-run the STFT on a time sub-range and render only the requested bins.

    The sub-range is trimmed to whole analysis windows, so the returned
    extent may differ from the request by up to one frame/bin width; the
    caller must use the returned extent for pixel-to-coordinate mapping.
    transform, when given, maps the complex spectrogram before dB conversion
    (e.g. noise reduction), so the zoomed view matches the full view.
    """
    sr = clip.sample_rate_hz
    w = stft_params.window_size
    n = len(clip.samples)
    if n < w:
        raise TooShortError("clip is shorter than one analysis window")
    if (region.t_max_s - region.t_min_s) * sr < w:
        raise TooShortError("zoom region is shorter than one analysis window")
    start = int(np.clip(math.floor((region.t_min_s - clip.offset_s) * sr), 0, n - w))
    stop = int(np.clip(math.ceil((region.t_max_s - clip.offset_s) * sr), start + w, n))

    sub = AudioClip(
        samples=clip.samples[start:stop],
        sample_rate_hz=sr,
        offset_s=clip.offset_s + start / sr,
    )
    spec = stft(sub, stft_params)
    if transform is not None:
        spec = transform(spec)
    spec_db = to_db(spec, floor_db=render_params.contrast_floor_db)
    t0, t1 = spec_db.time_extent()
    crop = SelectionBox(
        t_min_s=t0 - 1.0,
        t_max_s=t1 + 1.0,
        f_min_hz=max(0.0, region.f_min_hz),
        f_max_hz=region.f_max_hz,
    )
    params = RenderParams(
        palette=render_params.palette,
        contrast_floor_db=render_params.contrast_floor_db,
        width_px=render_params.width_px,
        height_px=render_params.height_px,
        zoom=crop,
    )
    return render_raster(spec_db, params)
