"""HTTP API for the browser annotation UI.

Identity is a plain X-Username header (a reverse proxy can supply it);
there is no authentication. Filtered audio lives in an in-memory LRU+TTL
cache keyed by unguessable tokens, so no temp-file cleanup is needed.
Spectrogram responses carry strong ETags derived from the file and all
parameters, letting clients skip recomputation entirely on revalidation.
"""

from __future__ import annotations

import hashlib
import re
import secrets
import threading
import time
from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, Header, Query, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict

from . import audio_io, dsp, render
from .annotations import Label, LabelStore, summarize
from .dsp import FilterMode, SelectionBox, StftParams
from .errors import (
    AlreadyPresentError,
    ConfigError,
    EmptySelectionError,
    FormatError,
    ImmutableFieldError,
    NotFoundError,
    NotRemovableError,
    OutOfRangeError,
    ReconstructionUnsupportedError,
    SonoboxError,
    TooShortError,
    UnsupportedFormatError,
    ValidationError,
)
from .project import (
    ClassList,
    ProjectConfig,
    add_class,
    class_list,
    display_name,
    remove_class,
    resolve_metadata,
)
from .render import RenderParams, list_palettes

USERNAME_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")

DEFAULT_PORT = 8787
DEFAULT_CLIP_SECONDS = 15.0
DEFAULT_CACHE_MB = 64
DEFAULT_TOKEN_TTL_S = 600.0

_STATUS = {
    ValidationError: 422,
    TooShortError: 422,
    EmptySelectionError: 422,
    ReconstructionUnsupportedError: 422,
    ImmutableFieldError: 422,
    NotRemovableError: 422,
    NotFoundError: 404,
    OutOfRangeError: 404,
    AlreadyPresentError: 409,
    ConfigError: 409,
    FormatError: 500,
    UnsupportedFormatError: 500,
}


@dataclass
class ServerConfig:
    root: Path
    clip_seconds: float = DEFAULT_CLIP_SECONDS
    cache_mb: int = DEFAULT_CACHE_MB
    token_ttl_seconds: float = DEFAULT_TOKEN_TTL_S
    static_dir: Path | None = None


@dataclass
class SessionSettings:
    gain_db: float = 0.0
    clip_seconds: float = DEFAULT_CLIP_SECONDS
    window_size: int = 256
    overlap_fraction: float = 0.75
    window_fn: str = "hann"
    palette: str = "viridis"
    contrast_floor_db: float = -96.0
    use_bto_codes: bool = False


@dataclass
class Session:
    username: str
    selected_site: str | None = None
    custom_classes: list[str] = field(default_factory=list)
    settings: SessionSettings = field(default_factory=SessionSettings)


class SessionRegistry:
    def __init__(self, default_clip_seconds: float):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._clip_seconds = default_clip_seconds

    def _default(self, key: str) -> Session:
        return Session(username=key, settings=SessionSettings(clip_seconds=self._clip_seconds))

    def peek(self, key: str) -> Session:
        """Read-only view; never creates state (GETs must not mutate)."""
        with self._lock:
            return self._sessions.get(key) or self._default(key)

    def get_or_create(self, key: str) -> Session:
        with self._lock:
            if key not in self._sessions:
                self._sessions[key] = self._default(key)
            return self._sessions[key]


class FilteredAudioCache:
    """Token -> WAV bytes with idle-TTL expiry and size-capped LRU eviction.

    Bytes stored under a token are immutable for the token's lifetime.
    """

    def __init__(self, max_bytes: int, ttl_seconds: float, clock=time.monotonic):
        self._entries: OrderedDict[str, tuple[bytes, float]] = OrderedDict()
        self._max_bytes = max_bytes
        self._ttl = ttl_seconds
        self._clock = clock
        self._total = 0
        self._lock = threading.Lock()

    def _expire(self, now: float) -> None:
        dead = [t for t, (_, last) in self._entries.items() if now - last > self._ttl]
        for token in dead:
            data, _ = self._entries.pop(token)
            self._total -= len(data)

    def put(self, data: bytes) -> str:
        token = secrets.token_urlsafe(24)  # 192 bits
        with self._lock:
            now = self._clock()
            self._expire(now)
            self._entries[token] = (data, now)
            self._total += len(data)
            while self._total > self._max_bytes and len(self._entries) > 1:
                _, (old, _ts) = self._entries.popitem(last=False)
                self._total -= len(old)
        return token

    def get(self, token: str) -> bytes | None:
        with self._lock:
            now = self._clock()
            self._expire(now)
            entry = self._entries.get(token)
            if entry is None:
                return None
            data, _ = entry
            self._entries[token] = (data, now)
            self._entries.move_to_end(token)
            return data


class _ClipCache:
    """Tiny decoded-audio cache keyed by (path, mtime, size)."""

    def __init__(self, capacity: int = 8):
        self._entries: OrderedDict[tuple, audio_io.AudioClip] = OrderedDict()
        self._capacity = capacity
        self._lock = threading.Lock()

    def load(self, path: Path) -> audio_io.AudioClip:
        stat = path.stat()
        key = (str(path), stat.st_mtime_ns, stat.st_size)
        with self._lock:
            if key in self._entries:
                self._entries.move_to_end(key)
                return self._entries[key]
        clip = audio_io.decode_wav(path.read_bytes())
        with self._lock:
            self._entries[key] = clip
            while len(self._entries) > self._capacity:
                self._entries.popitem(last=False)
        return clip


# ---------------------------------------------------------------------------
# request parsing helpers

_QUERY_FIELD = {"window_size": "window", "overlap_fraction": "overlap", "window_fn": "window_fn"}


def _stft_params(window: int, overlap: float, window_fn: str) -> StftParams:
    try:
        return StftParams(window_size=window, overlap_fraction=overlap, window_fn=window_fn)
    except ValidationError as exc:
        raise ValidationError(str(exc), field=_QUERY_FIELD.get(exc.field, exc.field)) from exc


def _render_params(palette: str, floor_db: float, width: int, height: int,
                   zoom: SelectionBox | None = None) -> RenderParams:
    try:
        return RenderParams(
            palette=palette,
            contrast_floor_db=floor_db,
            width_px=width,
            height_px=height,
            zoom=zoom,
        )
    except ValidationError as exc:
        field_map = {"width_px": "width", "height_px": "height"}
        raise ValidationError(str(exc), field=field_map.get(exc.field, exc.field)) from exc


def _parse_zoom(zoom: str | None) -> SelectionBox | None:
    if zoom is None or zoom == "":
        return None
    parts = zoom.split(",")
    if len(parts) != 4:
        raise ValidationError("zoom must be 't0,t1,f0,f1'", field="zoom")
    try:
        t0, t1, f0, f1 = (float(p) for p in parts)
    except ValueError:
        raise ValidationError("zoom must contain four numbers", field="zoom")
    for v in (t0, t1, f0, f1):
        if not (-1e12 < v < 1e12):
            raise ValidationError("zoom bounds must be finite", field="zoom")
    try:
        return SelectionBox(t_min_s=t0, t_max_s=t1, f_min_hz=max(0.0, f0), f_max_hz=f1)
    except ValidationError as exc:
        raise ValidationError(str(exc), field="zoom") from exc


def _parse_range(header: str | None, length: int):
    """Single byte-range per RFC 7233; returns (start, stop) or None for full."""
    if not header or not header.startswith("bytes="):
        return None
    spec = header[len("bytes="):].strip()
    if "," in spec or "-" not in spec:
        return None
    first, _, last = spec.partition("-")
    try:
        if first == "" and last:
            n = int(last)
            if n <= 0:
                return None
            return max(0, length - n), length
        start = int(first)
        stop = int(last) + 1 if last else length
    except ValueError:
        return None
    if start >= length or start < 0 or stop <= start:
        return "unsatisfiable"
    return start, min(stop, length)


# ---------------------------------------------------------------------------
# request bodies

class BoxIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    t_min_s: float
    t_max_s: float
    f_min_hz: float
    f_max_hz: float

    def to_box(self) -> SelectionBox:
        return SelectionBox(
            t_min_s=self.t_min_s,
            t_max_s=self.t_max_s,
            f_min_hz=self.f_min_hz,
            f_max_hz=self.f_max_hz,
        )


class FilterIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    box: BoxIn | None = None
    f_range: tuple[float, float] | None = None
    mode: str = "zero"
    noise_reduce: bool = False
    gain_db: float = 0.0
    window: int = 256
    overlap: float = 0.75
    window_fn: str = "hann"
    clip_s: float | None = None


class LabelIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    t_min_s: float
    t_max_s: float
    f_min_hz: float
    f_max_hz: float
    class_name: str
    confidence_pct: int = 100
    call_type: str = ""
    notes: str = ""


class ClassIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    name: str
    site: str | None = None


class SessionIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    selected_site: str | None = None
    settings: dict | None = None


def _label_json(label: Label) -> dict:
    return {
        "id": label.id,
        "created_at": label.created_at.isoformat() + "Z",
        "file_name": label.file_name,
        "t_min_s": label.box.t_min_s,
        "t_max_s": label.box.t_max_s,
        "f_min_hz": label.box.f_min_hz,
        "f_max_hz": label.box.f_max_hz,
        "class_name": label.class_name,
        "confidence_pct": label.confidence_pct,
        "labeller": label.labeller,
        "call_type": label.call_type,
        "notes": label.notes,
    }


def create_app(config: ServerConfig) -> FastAPI:
    app = FastAPI(title="sonobox", docs_url=None, redoc_url=None)

    root = Path(config.root)
    audio_dir = root / "audio"
    store = LabelStore(root)
    project = ProjectConfig.load(root)
    sessions = SessionRegistry(config.clip_seconds)
    cache = FilteredAudioCache(config.cache_mb * 1024 * 1024, config.token_ttl_seconds)
    clips = _ClipCache()

    app.state.config = config
    app.state.store = store
    app.state.project = project
    app.state.audio_cache = cache

    @app.exception_handler(SonoboxError)
    async def _on_error(_request: Request, exc: SonoboxError):
        body = {"code": exc.code, "message": str(exc)}
        if getattr(exc, "field", None):
            body["field"] = exc.field
        return JSONResponse(status_code=_STATUS.get(type(exc), 500), content=body)

    def current_user(x_username: str | None) -> str | None:
        if x_username is None or x_username == "":
            return None
        if not USERNAME_RE.match(x_username):
            raise ValidationError(
                "X-Username must match [A-Za-z0-9_-]{1,64}", field="X-Username"
            )
        return x_username

    def session_key(user: str | None) -> str:
        return user or "tmp"

    def audio_files() -> list[str]:
        if not audio_dir.is_dir():
            raise ConfigError(
                f"workflow folder {audio_dir} does not exist; create it and add "
                ".wav recordings (see README)"
            )
        return sorted(p.name for p in audio_dir.iterdir()
                      if p.is_file() and p.suffix.lower() == ".wav")

    def audio_path(file_name: str) -> Path:
        if "/" in file_name or "\\" in file_name or ".." in file_name:
            raise NotFoundError(f"no such audio file {file_name!r}")
        path = audio_dir / file_name
        if not path.is_file():
            raise NotFoundError(f"no such audio file {file_name!r}")
        return path

    def load_segment(file_name: str, index: int, clip_s: float, gain_db: float = 0.0):
        clip = clips.load(audio_path(file_name))
        if gain_db:
            clip = audio_io.apply_gain(clip, gain_db)
        try:
            return audio_io.segment(clip, index, clip_s)
        except OutOfRangeError as exc:
            raise NotFoundError(str(exc)) from exc

    def clip_seconds_for(user: str | None, clip_s: float | None) -> float:
        if clip_s is not None:
            if clip_s <= 0:
                raise ValidationError("clip_s must be positive", field="clip_s")
            return clip_s
        return sessions.peek(session_key(user)).settings.clip_seconds

    # -- files ------------------------------------------------------------

    @app.get("/api/files")
    def list_files(
        clip_s: float | None = Query(default=None),
        x_username: str | None = Header(default=None),
    ):
        user = current_user(x_username)
        seconds = clip_seconds_for(user, clip_s)
        counts = store.count_by_file(user=user)
        out = []
        for name in audio_files():
            with open(audio_dir / name, "rb") as fh:
                head = fh.read(64 * 1024)
            sr, n_samples, duration = audio_io.wav_info(head)
            out.append(
                {
                    "file_name": name,
                    "n_labels": counts.get(name, 0),
                    "duration_s": duration,
                    "n_segments": audio_io.n_segments(n_samples, sr, seconds),
                }
            )
        return out

    # -- spectrogram & audio ------------------------------------------------

    @app.get("/api/files/{file_name}/segments/{index}/spectrogram")
    def spectrogram(
        file_name: str,
        index: int,
        request: Request,
        window: int = Query(default=256),
        overlap: float = Query(default=0.75),
        window_fn: str = Query(default="hann"),
        palette: str = Query(default="viridis"),
        floor_db: float = Query(default=-96.0),
        width: int = Query(default=render.DEFAULT_WIDTH_PX),
        height: int = Query(default=render.DEFAULT_HEIGHT_PX),
        zoom: str | None = Query(default=None),
        clip_s: float | None = Query(default=None),
        noise_reduce: bool = Query(default=False),
        x_username: str | None = Header(default=None),
    ):
        user = current_user(x_username)
        seconds = clip_seconds_for(user, clip_s)
        stft_params = _stft_params(window, overlap, window_fn)
        zoom_box = _parse_zoom(zoom)
        render_params = _render_params(palette, floor_db, width, height)

        path = audio_path(file_name)
        stat = path.stat()
        etag_src = (
            f"{file_name}|{stat.st_mtime_ns}|{stat.st_size}|{index}|{window}|{overlap}|"
            f"{window_fn}|{palette}|{floor_db}|{width}|{height}|{zoom}|{seconds}|{noise_reduce}"
        )
        etag = '"' + hashlib.sha256(etag_src.encode()).hexdigest()[:32] + '"'
        if request.headers.get("if-none-match") == etag:
            return Response(status_code=304, headers={"ETag": etag})

        segment = load_segment(file_name, index, seconds)
        transform = dsp.noise_reduce if noise_reduce else None
        if zoom_box is not None:
            png, extent = render.zoom_recompute(
                segment, zoom_box, stft_params, render_params, transform=transform
            )
        else:
            spec = dsp.stft(segment, stft_params)
            if transform is not None:
                spec = transform(spec)
            spec_db = dsp.to_db(spec, floor_db=floor_db)
            png, extent = render.render_raster(spec_db, render_params)
        headers = {
            "ETag": etag,
            "Cache-Control": "private, max-age=0, must-revalidate",
            "X-Extent-T0": str(extent.t0_s),
            "X-Extent-T1": str(extent.t1_s),
            "X-Extent-F0": str(extent.f0_hz),
            "X-Extent-F1": str(extent.f1_hz),
        }
        return Response(content=png, media_type="image/png", headers=headers)

    def _serve_wav(data: bytes, range_header: str | None):
        parsed = _parse_range(range_header, len(data))
        base = {"Accept-Ranges": "bytes", "Content-Type": "audio/wav"}
        if parsed == "unsatisfiable":
            return Response(
                status_code=416,
                headers={**base, "Content-Range": f"bytes */{len(data)}"},
            )
        if parsed is None:
            return Response(content=data, headers=base)
        start, stop = parsed
        return Response(
            status_code=206,
            content=data[start:stop],
            headers={**base, "Content-Range": f"bytes {start}-{stop - 1}/{len(data)}"},
        )

    @app.get("/api/files/{file_name}/segments/{index}/audio")
    def segment_audio(
        file_name: str,
        index: int,
        request: Request,
        gain_db: float = Query(default=0.0),
        clip_s: float | None = Query(default=None),
        x_username: str | None = Header(default=None),
    ):
        user = current_user(x_username)
        seconds = clip_seconds_for(user, clip_s)
        segment = load_segment(file_name, index, seconds, gain_db=gain_db)
        return _serve_wav(audio_io.encode_wav(segment), request.headers.get("range"))

    @app.post("/api/files/{file_name}/segments/{index}/filter")
    def filter_segment(
        file_name: str,
        index: int,
        body: FilterIn,
        x_username: str | None = Header(default=None),
    ):
        user = current_user(x_username)
        if body.box is not None and body.f_range is not None:
            raise ValidationError("give either box or f_range, not both", field="box")
        if body.box is None and body.f_range is None and not body.noise_reduce:
            raise ValidationError(
                "nothing to filter: give box, f_range or noise_reduce", field="box"
            )
        if body.mode not in ("zero", "attenuate"):
            raise ValidationError("mode must be 'zero' or 'attenuate'", field="mode")
        mode = FilterMode.zero() if body.mode == "zero" else FilterMode.attenuate()

        seconds = clip_seconds_for(user, body.clip_s)
        stft_params = _stft_params(body.window, body.overlap, body.window_fn)
        segment = load_segment(file_name, index, seconds, gain_db=body.gain_db)

        spec = dsp.stft(segment, stft_params)
        if body.noise_reduce:
            spec = dsp.noise_reduce(spec)
        if body.box is not None:
            spec = dsp.box_filter(spec, body.box.to_box(), mode)
        elif body.f_range is not None:
            f_lo, f_hi = body.f_range
            spec = dsp.band_filter(spec, f_lo, f_hi, mode)
        filtered = dsp.istft(spec)
        wav = audio_io.encode_wav(filtered)
        token = cache.put(wav)
        return {
            "token": token,
            "audio_url": f"/api/audio/{token}",
            "duration_s": filtered.duration_s,
        }

    @app.get("/api/audio/{token}")
    def filtered_audio(token: str, request: Request):
        data = cache.get(token)
        if data is None:
            return JSONResponse(
                status_code=410,
                content={"code": "gone", "message": "filtered audio token expired or unknown"},
            )
        return _serve_wav(data, request.headers.get("range"))

    # -- labels -------------------------------------------------------------

    @app.get("/api/files/{file_name}/labels")
    def get_labels(file_name: str, x_username: str | None = Header(default=None)):
        user = current_user(x_username)
        audio_path(file_name)
        return [_label_json(l) for l in store.list_labels(file_name=file_name, user=user)]

    @app.post("/api/files/{file_name}/labels", status_code=201)
    def post_label(file_name: str, body: LabelIn, x_username: str | None = Header(default=None)):
        user = current_user(x_username)
        audio_path(file_name)
        label = Label(
            file_name=file_name,
            box=SelectionBox(
                t_min_s=body.t_min_s,
                t_max_s=body.t_max_s,
                f_min_hz=body.f_min_hz,
                f_max_hz=body.f_max_hz,
            ),
            class_name=body.class_name,
            confidence_pct=body.confidence_pct,
            call_type=body.call_type,
            notes=body.notes,
            labeller=user or "tmp",
        )
        label_id = store.save_label(label, user=user)
        stored = next(l for l in store.list_labels(user=user) if l.id == label_id)
        return _label_json(stored)

    @app.patch("/api/labels/{label_id}")
    def patch_label(
        label_id: str,
        changes: dict = Body(...),
        x_username: str | None = Header(default=None),
    ):
        user = current_user(x_username)
        return _label_json(store.edit_label(label_id, changes, user=user))

    @app.delete("/api/labels/{label_id}", status_code=204)
    def delete_label(label_id: str, x_username: str | None = Header(default=None)):
        user = current_user(x_username)
        store.delete_label(label_id, user=user)
        return Response(status_code=204)

    @app.get("/api/labels/export")
    def export_labels(x_username: str | None = Header(default=None)):
        user = current_user(x_username)
        data = store.export_all(user=user)
        filename = f"labels_{user or 'tmp'}.csv"
        return Response(
            content=data,
            media_type="text/csv; charset=utf-8",
            headers={"Content-Disposition": f'attachment; filename="{filename}"'},
        )

    @app.get("/api/summary")
    def summary(
        file: str | None = Query(default=None),
        class_names: list[str] | None = Query(default=None, alias="class"),
        x_username: str | None = Header(default=None),
    ):
        user = current_user(x_username)
        rows = summarize(
            store.list_labels(user=user),
            files=audio_files(),
            file_pattern=file,
            classes=set(class_names) if class_names else None,
        )
        return [
            {"file_name": f, "class_name": c, "count": n} for f, c, n in rows
        ]

    # -- configuration --------------------------------------------------------

    @app.get("/api/sites")
    def sites():
        return {"sites": project.species.sites()}

    def _class_list_for(session: Session, site: str | None):
        """Class list for the requested (or session) site; before a site is
        chosen, only the misc and custom groups exist."""
        site = site or session.selected_site
        if site is None:
            classes = ClassList(core=(), misc=project.misc)
            for name in session.custom_classes:
                classes = add_class(classes, name)
            return None, classes
        if site not in project.species.by_site:
            raise NotFoundError(f"unknown site {site!r}")
        return site, class_list(
            site, project.species, custom=session.custom_classes, misc=project.misc
        )

    @app.get("/api/classes")
    def get_classes(
        site: str | None = Query(default=None),
        use_codes: bool = Query(default=False),
        x_username: str | None = Header(default=None),
    ):
        user = current_user(x_username)
        session = sessions.peek(session_key(user))
        resolved_site, classes = _class_list_for(session, site)

        def entries(names):
            return [
                {"name": n, "display": display_name(n, project.bto, use_codes)} for n in names
            ]

        return {
            "site": resolved_site,
            "groups": {
                "core": entries(classes.core),
                "misc": entries(classes.misc),
                "custom": entries(classes.custom),
            },
        }

    @app.post("/api/classes", status_code=201)
    def post_class(body: ClassIn, x_username: str | None = Header(default=None)):
        user = current_user(x_username)
        session = sessions.get_or_create(session_key(user))
        _site, classes = _class_list_for(session, body.site)
        updated = add_class(classes, body.name)
        session.custom_classes = list(updated.custom)
        return {"name": updated.custom[-1], "group": "custom"}

    @app.delete("/api/classes")
    def delete_class(
        name: str = Query(...),
        site: str | None = Query(default=None),
        x_username: str | None = Header(default=None),
    ):
        user = current_user(x_username)
        session = sessions.get_or_create(session_key(user))
        _site, classes = _class_list_for(session, site)
        updated = remove_class(classes, name)
        session.custom_classes = list(updated.custom)
        return {"name": name, "removed": True}

    @app.get("/api/files/{file_name}/metadata")
    def metadata(file_name: str):
        audio_path(file_name)
        rec = audio_io.parse_filename(file_name)
        site, recorded_at = resolve_metadata(rec, project.locations)
        return {
            "file_name": file_name,
            "metadata_available": rec.metadata_available,
            "recorder_name": rec.recorder_name,
            "recorded_at": recorded_at.isoformat() if recorded_at else None,
            "start_offset_s": rec.start_offset_s,
            "site": None
            if site is None
            else {
                "recorder_name": site.recorder_name,
                "lat": site.lat,
                "long": site.long,
                "location_name": site.location_name,
                "location_county": site.location_county,
                "habitat_type": site.habitat_type,
                "dist_to_coastline": site.dist_to_coastline,
                "extras": [[k, v] for k, v in site.extras],
            },
        }

    @app.get("/api/palettes")
    def palettes():
        return {"palettes": list_palettes()}

    # -- session ---------------------------------------------------------------

    @app.get("/api/session")
    def get_session(x_username: str | None = Header(default=None)):
        user = current_user(x_username)
        session = sessions.peek(session_key(user))
        return {
            "username": session.username,
            "selected_site": session.selected_site,
            "custom_classes": list(session.custom_classes),
            "settings": asdict(session.settings),
        }

    @app.put("/api/session")
    def put_session(body: SessionIn, x_username: str | None = Header(default=None)):
        user = current_user(x_username)
        session = sessions.get_or_create(session_key(user))
        if body.selected_site is not None:
            if body.selected_site != "" and body.selected_site not in project.species.by_site:
                raise NotFoundError(f"unknown site {body.selected_site!r}")
            session.selected_site = body.selected_site or None
        if body.settings:
            current = asdict(session.settings)
            unknown = set(body.settings) - set(current)
            if unknown:
                raise ValidationError(f"unknown settings {sorted(unknown)}", field="settings")
            current.update(body.settings)
            candidate = SessionSettings(**current)
            # settings must stay valid per their type invariants
            _stft_params(candidate.window_size, candidate.overlap_fraction, candidate.window_fn)
            _render_params(candidate.palette, candidate.contrast_floor_db, 16, 16)
            if candidate.clip_seconds <= 0:
                raise ValidationError("clip_seconds must be positive", field="clip_seconds")
            if not abs(candidate.gain_db) < 1000:
                raise ValidationError("gain_db out of range", field="gain_db")
            session.settings = candidate
        return get_session(x_username)

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(config.static_dir), html=True), name="ui")

    return app
