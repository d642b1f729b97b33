"""WAV decode/encode, gain, segmentation and recording-filename parsing.

All audio is handled as mono float arrays normalized to [-1, 1]. Stereo
input is mixed down by channel mean; output encoding is fixed at 16-bit
PCM mono, which every browser can play.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .errors import FormatError, OutOfRangeError, UnsupportedFormatError, ValidationError

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003

_FILENAME_RE = re.compile(
    r"^(?P<recorder>.+)_(?P<date>\d{8})_(?P<time>\d{6})"
    r"(?:_start_(?P<mm>\d{2})_(?P<ss>\d{2}))?\.wav$",
    re.IGNORECASE,
)


@dataclass
class AudioClip:
    """Mono waveform with samples in [-1, 1].

    offset_s is the clip's start time measured from the beginning of the
    source recording, so spectrogram frame times stay absolute after
    segmentation.
    """

    samples: np.ndarray
    sample_rate_hz: int
    offset_s: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValidationError("AudioClip samples must be one-dimensional", field="samples")
        if self.sample_rate_hz <= 0:
            raise ValidationError("sample_rate_hz must be positive", field="sample_rate_hz")
        if self.offset_s < 0:
            raise ValidationError("offset_s must be non-negative", field="offset_s")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def __len__(self):
        return len(self.samples)


@dataclass
class RecordingFile:
    """Metadata parsed from a RECORDERNAME_YYYYMMDD_HHMMSS[.wav] file name.

    Parsing is best-effort: a name that does not match the convention
    yields a RecordingFile with only file_name set and metadata_available
    False, and the file can still be opened and annotated.
    """

    file_name: str
    recorder_name: str = ""
    recorded_at: datetime | None = None
    start_offset_s: float = 0.0
    duration_s: float = 0.0
    metadata_available: bool = field(default=False)


def parse_filename(name: str) -> RecordingFile:
    """Extract recorder name, timestamp and optional start offset from a file name.

    The recorder name may itself contain underscores; the date/time groups
    are matched from the right. An optional ``_start_MM_SS`` suffix before
    the extension marks how far into the source recording the file begins.
    Never raises: unmatched names come back with metadata_available=False.
    """
    m = _FILENAME_RE.match(name)
    if not m:
        return RecordingFile(file_name=name)
    try:
        recorded_at = datetime.strptime(m.group("date") + m.group("time"), "%Y%m%d%H%M%S")
    except ValueError:
        # Matched the shape but not a real date (e.g. month 13).
        return RecordingFile(file_name=name)
    start = 0.0
    if m.group("mm") is not None:
        start = 60.0 * int(m.group("mm")) + int(m.group("ss"))
    return RecordingFile(
        file_name=name,
        recorder_name=m.group("recorder"),
        recorded_at=recorded_at,
        start_offset_s=start,
        metadata_available=True,
    )


def _iter_chunks(data: bytes):
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        yield cid, body_start, size
        pos = body_start + size + (size & 1)  # chunks are word-aligned


def _parse_header(data: bytes):
    """Return (format_tag, channels, sample_rate, bits, data_start, declared_size).

    declared_size is taken from the data chunk header, so the probe works
    on a partial read of a large file; decode_wav clamps it to the bytes
    actually present.
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise FormatError("not a RIFF/WAVE stream")
    fmt = None
    data_span = None
    for cid, start, size in _iter_chunks(data):
        if cid == b"fmt " and fmt is None:
            if size < 16 or start + 16 > len(data):
                raise FormatError("fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", data, start)
        elif cid == b"data" and data_span is None:
            data_span = (start, size)
    if fmt is None:
        raise FormatError("missing fmt chunk")
    if data_span is None:
        raise FormatError("missing data chunk")
    format_tag, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    return format_tag, channels, sample_rate, bits, data_span[0], data_span[1]


def wav_info(data: bytes) -> tuple[int, int, float]:
    """Cheap header-only probe: (sample_rate_hz, n_frames, duration_s).

    Works on a prefix of the file as long as it reaches the data chunk
    header.
    """
    format_tag, channels, sample_rate, bits, _start, size = _parse_header(data)
    if sample_rate <= 0 or channels == 0 or bits == 0:
        raise FormatError("fmt chunk has zero rate, channels or bit depth")
    frame_bytes = channels * (bits // 8)
    if frame_bytes == 0:
        raise FormatError("fmt chunk has sub-byte sample width")
    n_frames = size // frame_bytes
    return sample_rate, n_frames, n_frames / sample_rate


def decode_wav(data: bytes) -> AudioClip:
    """Decode a PCM WAV byte stream to a normalized mono AudioClip.

    Accepts 8/16/24/32-bit integer and 32-bit float encodings, 1 or 2
    channels. Stereo is mixed to mono by channel mean; samples are rescaled
    to [-1, 1] by the format's full-scale value.
    """
    format_tag, channels, sample_rate, bits, start, size = _parse_header(data)
    if sample_rate <= 0:
        raise FormatError("sample rate must be positive")
    if channels not in (1, 2):
        raise UnsupportedFormatError(f"{channels}-channel audio is not supported (mono/stereo only)")

    if format_tag == _WAVE_FORMAT_PCM:
        if bits not in (8, 16, 24, 32):
            raise UnsupportedFormatError(f"PCM with {bits} bits per sample is not supported")
    elif format_tag == _WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise UnsupportedFormatError(f"IEEE float with {bits} bits per sample is not supported")
    else:
        raise UnsupportedFormatError(f"WAVE format tag 0x{format_tag:04X} is not supported (PCM and float32 only)")

    frame_bytes = channels * (bits // 8)
    size = min(size, len(data) - start)
    size -= size % frame_bytes
    raw = data[start : start + size]

    if format_tag == _WAVE_FORMAT_IEEE_FLOAT:
        samples = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        samples = np.clip(samples, -1.0, 1.0)
    elif bits == 8:
        samples = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif bits == 16:
        samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif bits == 24:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        vals = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        vals -= (vals & 0x800000) << 1  # sign-extend
        samples = vals.astype(np.float64) / float(2**23)
    else:  # 32-bit integer
        samples = np.frombuffer(raw, dtype="<i4").astype(np.float64) / float(2**31)

    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)

    return AudioClip(samples=samples, sample_rate_hz=sample_rate, offset_s=0.0)


def encode_wav(clip: AudioClip) -> bytes:
    """Encode a clip as 16-bit PCM mono with a canonical 44-byte header.

    Samples are clamped to [-1, 1] then scaled symmetrically (full positive
    scale clips to 32767), so decode(encode(c)) stays within one 16-bit LSB
    of c per sample.
    """
    scaled = np.clip(clip.samples, -1.0, 1.0) * 32768.0
    ints = np.clip(np.round(scaled), -32768, 32767).astype("<i2")
    payload = ints.tobytes()
    sr = clip.sample_rate_hz
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, _WAVE_FORMAT_PCM, 1, sr, sr * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(payload))
    return header + payload


def apply_gain(clip: AudioClip, gain_db: float) -> AudioClip:
    """Scale samples by 10^(gain_db/20), clamping to [-1, 1] afterwards."""
    if not np.isfinite(gain_db):
        raise ValidationError("gain_db must be finite", field="gain_db")
    factor = 10.0 ** (gain_db / 20.0)
    return AudioClip(
        samples=np.clip(clip.samples * factor, -1.0, 1.0),
        sample_rate_hz=clip.sample_rate_hz,
        offset_s=clip.offset_s,
    )


def segment(clip: AudioClip, index: int, clip_len_s: float) -> AudioClip:
    """Return the index-th display segment of clip_len_s seconds.

    The final segment may be shorter; requesting past the end raises
    OutOfRangeError. offset_s on the result is absolute in the source
    recording so concatenating all segments reproduces the input exactly.
    """
    if clip_len_s <= 0:
        raise ValidationError("clip_len_s must be positive", field="clip_len_s")
    if index < 0:
        raise ValidationError("segment index must be non-negative", field="index")
    per = int(round(clip_len_s * clip.sample_rate_hz))
    if per < 1:
        raise ValidationError("clip_len_s is shorter than one sample", field="clip_len_s")
    start = index * per
    if start >= len(clip.samples):
        raise OutOfRangeError(f"segment {index} starts past the end of the clip")
    stop = min(start + per, len(clip.samples))
    return AudioClip(
        samples=clip.samples[start:stop].copy(),
        sample_rate_hz=clip.sample_rate_hz,
        offset_s=clip.offset_s + start / clip.sample_rate_hz,
    )


def n_segments(n_samples: int, sample_rate_hz: int, clip_len_s: float) -> int:
    """Number of display segments a recording splits into (ceiling rule)."""
    per = int(round(clip_len_s * sample_rate_hz))
    if per < 1:
        raise ValidationError("clip_len_s is shorter than one sample", field="clip_len_s")
    return max(1, -(-n_samples // per)) if n_samples else 0
