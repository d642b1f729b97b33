"""Command-line entry points: serve, render, summary, validate.

Exit codes: 0 ok, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import audio_io, dsp, render
from .annotations import LabelStore, summarize, summary_csv
from .errors import SonoboxError
from .overlay import GROUP_COLORS, draw_rect, draw_tag
from .project import (
    BTO_CODES_FILE,
    LOCATION_LIST_FILE,
    SPECIES_LIST_FILE,
    ProjectConfig,
    class_list,
    load_bto_codes,
    load_locations,
    load_species_lists,
)
from .render import RenderParams
from .server import (
    DEFAULT_CACHE_MB,
    DEFAULT_CLIP_SECONDS,
    DEFAULT_PORT,
    DEFAULT_TOKEN_TTL_S,
    ServerConfig,
    create_app,
)


def _env(name, cast, default):
    raw = os.environ.get(f"NEAL_{name}")
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        print(f"warning: ignoring NEAL_{name}={raw!r} (not a {cast.__name__})", file=sys.stderr)
        return default


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sonobox", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the annotation API server")
    serve.add_argument("--root", default=_env("ROOT", str, "."),
                       help="project root containing audio/, labels/ and the config CSVs")
    serve.add_argument("--port", type=int, default=_env("PORT", int, DEFAULT_PORT))
    serve.add_argument("--host", default=_env("HOST", str, "127.0.0.1"))
    serve.add_argument("--clip-seconds", type=float,
                       default=_env("CLIP_SECONDS", float, DEFAULT_CLIP_SECONDS))
    serve.add_argument("--cache-mb", type=int, default=_env("CACHE_MB", int, DEFAULT_CACHE_MB))
    serve.add_argument("--token-ttl-seconds", type=float,
                       default=_env("TOKEN_TTL_SECONDS", float, DEFAULT_TOKEN_TTL_S))
    serve.add_argument("--static-dir", default=_env("STATIC_DIR", str, "frontend/dist"),
                       help="directory with the built browser UI (optional)")

    rend = sub.add_parser("render", help="render one segment to PNG with label overlays")
    rend.add_argument("file", help="audio file name inside <root>/audio")
    rend.add_argument("segment", type=int, help="segment index")
    rend.add_argument("out", help="output PNG path")
    rend.add_argument("--root", default=".")
    rend.add_argument("--clip-seconds", type=float, default=DEFAULT_CLIP_SECONDS)
    rend.add_argument("--window", type=int, default=256)
    rend.add_argument("--overlap", type=float, default=0.75)
    rend.add_argument("--palette", default="viridis")
    rend.add_argument("--floor-db", type=float, default=-96.0)
    rend.add_argument("--width", type=int, default=render.DEFAULT_WIDTH_PX)
    rend.add_argument("--height", type=int, default=render.DEFAULT_HEIGHT_PX)
    rend.add_argument("--site", default=None,
                      help="site whose species list colors the boxes (default: first site)")

    summ = sub.add_parser("summary", help="write per-file per-class label counts as CSV")
    summ.add_argument("out", nargs="?", default="-", help="output CSV path (default stdout)")
    summ.add_argument("--root", default=".")
    summ.add_argument("--file", default=None, help="filter file names by substring")
    summ.add_argument("--class", dest="classes", action="append", default=None,
                      help="restrict to a class (repeatable)")

    val = sub.add_parser("validate", help="check config CSVs and audio filename conventions")
    val.add_argument("--root", default=".")
    return parser


def cmd_serve(args) -> int:
    root = Path(args.root)
    if not root.is_dir():
        print(f"error: project root {root} does not exist", file=sys.stderr)
        return 1
    static = Path(args.static_dir) if args.static_dir else None
    config = ServerConfig(
        root=root,
        clip_seconds=args.clip_seconds,
        cache_mb=args.cache_mb,
        token_ttl_seconds=args.token_ttl_seconds,
        static_dir=static if static and static.is_dir() else None,
    )
    app = create_app(config)
    import uvicorn

    print(f"serving project {root.resolve()} on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def render_annotated(root: Path, file_name: str, segment_index: int, *,
                     clip_seconds: float = DEFAULT_CLIP_SECONDS,
                     stft_params: dsp.StftParams = dsp.StftParams(),
                     render_params: RenderParams = RenderParams(),
                     site: str | None = None) -> bytes:
    """Raster plus label overlays, as the UI would show them, for offline use."""
    path = root / "audio" / file_name
    clip = audio_io.decode_wav(path.read_bytes())
    seg = audio_io.segment(clip, segment_index, clip_seconds)
    spec_db = dsp.to_db(dsp.stft(seg, stft_params), floor_db=render_params.contrast_floor_db)
    png, extent = render.render_raster(spec_db, render_params)

    project = ProjectConfig.load(root)
    classes = None
    site = site or (project.species.sites()[0] if project.species.sites() else None)
    if site is not None:
        classes = class_list(site, project.species, misc=project.misc)

    img = np.array(Image.open(io.BytesIO(png)).convert("RGB"))
    h, w = img.shape[:2]
    t_span = extent.t1_s - extent.t0_s
    f_span = extent.f1_hz - extent.f0_hz

    store = LabelStore(root)
    for label in store.list_labels(file_name=file_name, user=None):
        box = label.box
        if box.t_max_s <= extent.t0_s or box.t_min_s >= extent.t1_s:
            continue
        if box.f_max_hz <= extent.f0_hz or box.f_min_hz >= extent.f1_hz:
            continue
        x0 = round((box.t_min_s - extent.t0_s) / t_span * w)
        x1 = round((box.t_max_s - extent.t0_s) / t_span * w)
        y0 = round((1.0 - (box.f_max_hz - extent.f0_hz) / f_span) * h)
        y1 = round((1.0 - (box.f_min_hz - extent.f0_hz) / f_span) * h)
        group = classes.group_of(label.class_name) if classes else "grey"
        color = GROUP_COLORS[group]
        draw_rect(img, x0, y0, x1, y1, color)
        draw_tag(img, x0, y0, label.class_name, color)

    buf = io.BytesIO()
    Image.fromarray(img, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def cmd_render(args) -> int:
    root = Path(args.root)
    try:
        png = render_annotated(
            root,
            args.file,
            args.segment,
            clip_seconds=args.clip_seconds,
            stft_params=dsp.StftParams(window_size=args.window, overlap_fraction=args.overlap),
            render_params=RenderParams(
                palette=args.palette,
                contrast_floor_db=args.floor_db,
                width_px=args.width,
                height_px=args.height,
            ),
            site=args.site,
        )
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SonoboxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    Path(args.out).write_bytes(png)
    print(f"wrote {args.out}")
    return 0


def cmd_summary(args) -> int:
    root = Path(args.root)
    store = LabelStore(root)
    audio_dir = root / "audio"
    files = sorted(p.name for p in audio_dir.iterdir() if p.suffix.lower() == ".wav") \
        if audio_dir.is_dir() else []
    rows = summarize(
        store.list_labels(user=None),
        files=files,
        file_pattern=args.file,
        classes=set(args.classes) if args.classes else None,
    )
    data = summary_csv(rows)
    if args.out == "-":
        sys.stdout.write(data.decode("utf-8"))
    else:
        Path(args.out).write_bytes(data)
        print(f"wrote {args.out}")
    return 0


def validate_project(root: Path) -> tuple[list[str], list[str]]:
    """Collect (errors, warnings) for a project folder; never raises."""
    errors: list[str] = []
    warnings: list[str] = []

    species_path = root / SPECIES_LIST_FILE
    if not species_path.exists():
        errors.append(f"{SPECIES_LIST_FILE} is missing")
        species = None
    else:
        try:
            species = load_species_lists(species_path.read_bytes())
        except SonoboxError as exc:
            errors.append(f"{SPECIES_LIST_FILE}: {exc}")
            species = None

    locations_path = root / LOCATION_LIST_FILE
    recorders: list[str] = []
    if not locations_path.exists():
        warnings.append(f"{LOCATION_LIST_FILE} is missing; the metadata panel will be empty")
    else:
        try:
            recorders = [s.recorder_name for s in load_locations(locations_path.read_bytes())]
        except SonoboxError as exc:
            errors.append(f"{LOCATION_LIST_FILE}: {exc}")

    bto_path = root / BTO_CODES_FILE
    if not bto_path.exists():
        warnings.append(f"{BTO_CODES_FILE} is missing; the code display toggle will do nothing")
    else:
        try:
            load_bto_codes(bto_path.read_bytes())
        except SonoboxError as exc:
            errors.append(f"{BTO_CODES_FILE}: {exc}")

    if species is not None:
        for site in species.sites():
            try:
                class_list(site, species)
            except SonoboxError as exc:
                errors.append(f"class list for site {site!r}: {exc}")

    audio_dir = root / "audio"
    if not audio_dir.is_dir():
        errors.append("audio/ directory is missing")
    else:
        wavs = sorted(p.name for p in audio_dir.iterdir() if p.suffix.lower() == ".wav")
        if not wavs:
            warnings.append("audio/ contains no .wav files")
        for name in wavs:
            rec = audio_io.parse_filename(name)
            if not rec.metadata_available:
                warnings.append(
                    f"audio file {name!r} does not match RECORDERNAME_YYYYMMDD_HHMMSS.wav; "
                    "metadata will be unavailable"
                )
            elif recorders and rec.recorder_name not in recorders:
                warnings.append(
                    f"audio file {name!r}: recorder {rec.recorder_name!r} is not in "
                    f"{LOCATION_LIST_FILE}"
                )
    return errors, warnings


def cmd_validate(args) -> int:
    root = Path(args.root)
    errors, warnings = validate_project(root)
    for w in warnings:
        print(f"WARNING: {w}")
    for e in errors:
        print(f"ERROR: {e}")
    if errors:
        print(f"{len(errors)} error(s), {len(warnings)} warning(s)")
        return 1
    print(f"ok ({len(warnings)} warning(s))")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "serve": cmd_serve,
        "render": cmd_render,
        "summary": cmd_summary,
        "validate": cmd_validate,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
