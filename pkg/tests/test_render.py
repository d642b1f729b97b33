import io
import time

import numpy as np
import pytest
from PIL import Image

from sonobox.audio_io import AudioClip
from sonobox.dsp import MagnitudeSpectrogramDb, SelectionBox, StftParams, stft, to_db
from sonobox.errors import EmptySelectionError, TooShortError, ValidationError
from sonobox.render import (
    PALETTES,
    RenderParams,
    list_palettes,
    render_raster,
    render_spectrogram,
    rendered_extent,
    zoom_recompute,
)

from conftest import lowpassed_noise, sine_clip


def decode_png(png: bytes) -> np.ndarray:
    return np.array(Image.open(io.BytesIO(png)).convert("RGB"))


def make_db_spec(values_db, sr=800, window=16, offset_s=0.0):
    """Type-consistent dB spectrogram with bins = window/2."""
    frames, bins = values_db.shape
    params = StftParams(window_size=window, overlap_fraction=0.5)
    assert bins == window // 2
    times = offset_s + (np.arange(frames) * params.hop + window / 2) / sr
    freqs = np.arange(bins) * sr / window
    return MagnitudeSpectrogramDb(
        values_db=np.asarray(values_db, dtype=float),
        floor_db=-96.0,
        frame_times_s=times,
        bin_freqs_hz=freqs,
        params=params,
        sample_rate_hz=sr,
    )


def reference_pixels(spec, params):
    """Independent reimplementation of the pixel mapping, plain loops."""
    values = spec.values_db
    n_frames, n_bins = values.shape
    t0, t1 = spec.time_extent()
    nyq = spec.sample_rate_hz / 2
    if params.zoom is None:
        i_lo, i_hi, k_lo, k_hi = 0, n_frames, 0, n_bins
    else:
        z = params.zoom
        i_lo = min(max(int(np.floor((z.t_min_s - t0) / (t1 - t0) * n_frames)), 0), n_frames - 1)
        i_hi = min(max(int(np.ceil((z.t_max_s - t0) / (t1 - t0) * n_frames)), i_lo + 1), n_frames)
        bw = nyq / n_bins
        k_lo = min(max(int(np.floor(z.f_min_hz / bw)), 0), n_bins - 1)
        k_hi = min(max(int(np.ceil(z.f_max_hz / bw)), k_lo + 1), n_bins)
    stops = PALETTES[params.palette].stops
    xs = [p for p, _ in stops]
    img = np.zeros((params.height_px, params.width_px, 3), dtype=np.uint8)
    for y in range(params.height_px):
        for x in range(params.width_px):
            col = i_lo + int((x + 0.5) * (i_hi - i_lo) / params.width_px)
            row = k_lo + int((params.height_px - 1 - y + 0.5) * (k_hi - k_lo) / params.height_px)
            col = min(col, i_hi - 1)
            row = min(row, k_hi - 1)
            db = values[col, row]
            t = (db - params.contrast_floor_db) / (0 - params.contrast_floor_db)
            t = min(max(t, 0.0), 1.0)
            for c in range(3):
                ys = [color[c] for _, color in stops]
                img[y, x, c] = int(round(np.interp(t, xs, ys)))
    return img


class TestPalettes:
    def test_required_names_present(self):
        names = list_palettes()
        assert {"viridis", "magma", "inferno", "plasma", "grayscale"} <= set(names)
        assert names[0] == "viridis"

    def test_stable_across_calls(self):
        assert list_palettes() == list_palettes()

    def test_all_names_validate(self):
        for name in list_palettes():
            RenderParams(palette=name)

    def test_stop_positions_strictly_increasing(self):
        for palette in PALETTES.values():
            positions = [p for p, _ in palette.stops]
            assert positions[0] == 0.0 and positions[-1] == 1.0
            assert all(b > a for a, b in zip(positions, positions[1:]))


class TestParams:
    def test_unknown_palette(self):
        with pytest.raises(ValidationError):
            RenderParams(palette="sunburst")

    def test_floor_range(self):
        with pytest.raises(ValidationError):
            RenderParams(contrast_floor_db=-5.0)
        with pytest.raises(ValidationError):
            RenderParams(contrast_floor_db=-130.0)

    def test_pixel_cap(self):
        with pytest.raises(ValidationError):
            RenderParams(width_px=10_000, height_px=10_000)


class TestRaster:
    def test_all_floor_uniform_first_stop(self):
        spec = make_db_spec(np.full((8, 8), -96.0))
        img = decode_png(render_spectrogram(spec, RenderParams(width_px=24, height_px=16)))
        assert img.shape == (16, 24, 3)
        assert np.all(img == np.array(PALETTES["viridis"].stops[0][1]))

    def test_single_hot_cell_gets_last_stop_exactly(self):
        values = np.full((8, 8), -96.0)
        values[2, 3] = 0.0
        spec = make_db_spec(values)
        img = decode_png(render_spectrogram(spec, RenderParams(width_px=40, height_px=40)))
        top = np.array(PALETTES["viridis"].stops[-1][1])
        hot = np.all(img == top, axis=2)
        expected = np.zeros((40, 40), dtype=bool)
        expected[20:25, 10:15] = True  # frame tile 2, bin tile 3, y flipped
        assert np.array_equal(hot, expected)

    def test_matches_reference_mapping(self):
        rng = np.random.default_rng(61)
        values = rng.uniform(-96.0, 0.0, (10, 8))
        values[rng.uniform(size=(10, 8)) < 0.2] = -96.0
        spec = make_db_spec(values)
        for zoom in (None, SelectionBox(0.05, 0.14, 120.0, 390.0)):
            params = RenderParams(palette="magma", contrast_floor_db=-80.0,
                                  width_px=37, height_px=23, zoom=zoom)
            img = decode_png(render_spectrogram(spec, params))
            assert np.array_equal(img, reference_pixels(spec, params))

    def test_dimensions_always_match_request(self):
        spec = make_db_spec(np.zeros((3, 8)) - 50.0)
        for w, h in ((1, 1), (7, 300), (301, 5)):
            img = decode_png(render_spectrogram(spec, RenderParams(width_px=w, height_px=h)))
            assert img.shape == (h, w, 3)

    def test_deterministic_bytes(self):
        spec = to_db(stft(sine_clip(1000, 0.5, 24000)))
        params = RenderParams(width_px=200, height_px=64)
        assert render_spectrogram(spec, params) == render_spectrogram(spec, params)

    def test_brightest_pixel_invariant_under_floor(self):
        rng = np.random.default_rng(67)
        spec = to_db(stft(AudioClip(lowpassed_noise(rng, 8000, 8000), 8000)))
        imgs = {}
        for floor in (-96.0, -60.0, -30.0):
            png = render_spectrogram(
                spec, RenderParams(palette="grayscale", contrast_floor_db=floor,
                                   width_px=100, height_px=50))
            imgs[floor] = decode_png(png)
        argmaxes = {f: np.argmax(img.sum(axis=2)) for f, img in imgs.items()}
        assert len(set(argmaxes.values())) == 1

    def test_zoom_outside_extent(self):
        spec = make_db_spec(np.zeros((8, 8)) - 40.0)
        with pytest.raises(EmptySelectionError):
            render_spectrogram(
                spec,
                RenderParams(zoom=SelectionBox(100.0, 101.0, 10.0, 20.0)),
            )

    def test_render_under_250ms(self):
        """The paper-scale raster (128 x 5622 at 1124 x 256) must not be a
        bottleneck; measured, with one warm-up run."""
        spec = to_db(stft(sine_clip(1000, 15.0, 24000)))
        params = RenderParams(width_px=1124, height_px=256)
        render_spectrogram(spec, params)
        t0 = time.perf_counter()
        render_spectrogram(spec, params)
        elapsed = time.perf_counter() - t0
        assert elapsed < 0.25, f"render took {elapsed * 1000:.0f} ms"


class TestZoomRecompute:
    def test_full_extent_identity(self):
        clip = sine_clip(1000, 1.0, 24000)
        stft_params = StftParams()
        render_params = RenderParams(width_px=300, height_px=80)
        spec = to_db(stft(clip, stft_params), floor_db=-96.0)
        full_png, full_extent = render_raster(spec, render_params)

        t0, t1 = spec.time_extent()
        region = SelectionBox(t0, t1, 0.0, spec.nyquist_hz)
        zoom_png, zoom_extent = zoom_recompute(clip, region, stft_params, render_params)
        assert zoom_png == full_png
        assert zoom_extent == full_extent

    def test_window_doubling_swaps_resolution(self):
        clip = sine_clip(2000, 1.0, 24000)
        region = SelectionBox(0.0, 1.0, 0.0, 12000.0)
        shapes = {}
        for w in (256, 512):
            spec = to_db(stft(clip, StftParams(window_size=w)))
            shapes[w] = spec.values_db.shape
        assert shapes[512][1] == 2 * shapes[256][1]
        assert abs(shapes[256][0] - 2 * shapes[512][0]) <= 4  # frame count roughly halves

    def test_requested_extent_quantization(self):
        sr = 24000
        n = 5 * sr
        t = np.arange(n) / sr
        chirp = 0.4 * np.sin(2 * np.pi * (500 * t + 400 * t**2))
        clip = AudioClip(chirp, sr)
        region = SelectionBox(2.0, 3.0, 1000.0, 3000.0)
        stft_params = StftParams()
        _png, extent = zoom_recompute(clip, region, stft_params, RenderParams(width_px=64, height_px=64))
        frame_w = stft_params.hop / sr
        bin_w = sr / stft_params.window_size
        assert abs(extent.t0_s - 2.0) <= frame_w
        assert abs(extent.t1_s - 3.0) <= frame_w
        assert abs(extent.f0_hz - 1000.0) <= bin_w
        assert abs(extent.f1_hz - 3000.0) <= bin_w

    def test_region_shorter_than_window(self):
        clip = sine_clip(1000, 1.0, 24000)
        with pytest.raises(TooShortError):
            zoom_recompute(clip, SelectionBox(0.5, 0.5001, 0.0, 12000.0),
                           StftParams(), RenderParams())


def test_rendered_extent_full_view():
    spec = to_db(stft(sine_clip(1000, 15.0, 24000)))
    extent = rendered_extent(spec)
    assert extent.t0_s == pytest.approx(0.0)
    assert extent.t1_s == pytest.approx(15.0)
    assert extent.f0_hz == 0.0
    assert extent.f1_hz == pytest.approx(12000.0)
