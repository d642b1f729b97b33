"""CSV-backed bounding-box label store.

One file per labeller under <root>/labels: labels_<username>.csv, or
labels_tmp.csv when no username is known. Writes are atomic
(write-temp-then-rename) and serialized per user, so a crash never leaves
a half-written file and two users can never touch each other's rows.
"""

from __future__ import annotations

import csv
import io
import os
import re
import secrets
import tempfile
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from .dsp import SelectionBox
from .errors import (
    FormatError,
    ImmutableFieldError,
    NotFoundError,
    ValidationError,
)

CSV_COLUMNS = [
    "id",
    "created_at",
    "file_name",
    "t_min_s",
    "t_max_s",
    "f_min_hz",
    "f_max_hz",
    "class_name",
    "confidence_pct",
    "labeller",
    "call_type",
    "notes",
]

EDITABLE_FIELDS = {
    "t_min_s",
    "t_max_s",
    "f_min_hz",
    "f_max_hz",
    "class_name",
    "confidence_pct",
    "call_type",
    "notes",
}

_USERNAME_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


def _quant(x: float) -> float:
    """Storage precision for box bounds: milliseconds / millihertz."""
    return float(f"{float(x):.3f}")


def _now_utc() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


def _format_ts(ts: datetime) -> str:
    if ts.tzinfo is not None:
        ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    return ts.replace(microsecond=0).isoformat() + "Z"


def _parse_ts(text: str) -> datetime:
    return datetime.fromisoformat(text.strip().replace("Z", "+00:00")).replace(tzinfo=None)


@dataclass
class Label:
    """One bounding-box annotation."""

    file_name: str
    box: SelectionBox
    class_name: str
    confidence_pct: int = 100
    labeller: str = ""
    call_type: str = ""
    notes: str = ""
    id: str = ""
    created_at: datetime | None = None

    def __post_init__(self):
        if not self.class_name:
            raise ValidationError("class_name must be non-empty", field="class_name")
        if not self.file_name:
            raise ValidationError("file_name must be non-empty", field="file_name")
        self.confidence_pct = int(self.confidence_pct)
        if not 0 <= self.confidence_pct <= 100:
            raise ValidationError("confidence_pct must lie in [0, 100]", field="confidence_pct")


def _normalize(label: Label) -> Label:
    """Quantize box bounds to storage precision and fill id/timestamp."""
    box = SelectionBox(
        t_min_s=_quant(label.box.t_min_s),
        t_max_s=_quant(label.box.t_max_s),
        f_min_hz=_quant(label.box.f_min_hz),
        f_max_hz=_quant(label.box.f_max_hz),
    )
    return replace(
        label,
        box=box,
        id=label.id or secrets.token_hex(8),
        created_at=label.created_at or _now_utc(),
    )


def _to_row(label: Label) -> dict:
    return {
        "id": label.id,
        "created_at": _format_ts(label.created_at),
        "file_name": label.file_name,
        "t_min_s": f"{label.box.t_min_s:.3f}",
        "t_max_s": f"{label.box.t_max_s:.3f}",
        "f_min_hz": f"{label.box.f_min_hz:.3f}",
        "f_max_hz": f"{label.box.f_max_hz:.3f}",
        "class_name": label.class_name,
        "confidence_pct": str(label.confidence_pct),
        "labeller": label.labeller,
        "call_type": label.call_type,
        "notes": label.notes,
    }


def _from_row(row: dict) -> Label:
    return Label(
        id=row["id"],
        created_at=_parse_ts(row["created_at"]),
        file_name=row["file_name"],
        box=SelectionBox(
            t_min_s=float(row["t_min_s"]),
            t_max_s=float(row["t_max_s"]),
            f_min_hz=float(row["f_min_hz"]),
            f_max_hz=float(row["f_max_hz"]),
        ),
        class_name=row["class_name"],
        confidence_pct=int(row["confidence_pct"]),
        labeller=row["labeller"],
        call_type=row["call_type"],
        notes=row["notes"],
    )


def serialize_labels(labels: list[Label]) -> bytes:
    """Deterministic CSV bytes: header plus one row per label."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    for label in labels:
        writer.writerow(_to_row(label))
    return buf.getvalue().encode("utf-8")


def parse_labels(data: bytes) -> list[Label]:
    """Read a label CSV; tolerates a UTF-8 BOM and headerless legacy files.

    Headerless rows are mapped positionally: 12 columns are assumed to be
    the full schema, 11 columns the same schema without the leading id
    (ids are generated on import).
    """
    text = data.decode("utf-8-sig")
    if not text.strip():
        return []
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return []
    start = 0
    header = [h.strip() for h in rows[0]]
    if header == CSV_COLUMNS:
        start = 1
        positional_id = True
    elif len(rows[0]) == len(CSV_COLUMNS):
        positional_id = True
    elif len(rows[0]) == len(CSV_COLUMNS) - 1:
        positional_id = False
    else:
        raise FormatError(f"label CSV has {len(rows[0])} columns, expected 11 or 12")
    labels = []
    for lineno, row in enumerate(rows[start:], start + 1):
        if not any(cell.strip() for cell in row):
            continue
        if positional_id:
            mapping = dict(zip(CSV_COLUMNS, row))
        else:
            mapping = dict(zip(CSV_COLUMNS[1:], row))
            mapping["id"] = secrets.token_hex(8)
        try:
            labels.append(_from_row(mapping))
        except (KeyError, ValueError) as exc:
            raise FormatError(f"label CSV row {lineno} is malformed: {exc}") from exc
    return labels


class LabelStore:
    """Per-user CSV label files under <root>/labels."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.labels_dir = self.root / "labels"
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _user_key(self, user: str | None) -> str:
        if user is None or user == "":
            return "tmp"
        if not _USERNAME_RE.match(user):
            raise ValidationError(
                "username must match [A-Za-z0-9_-]{1,64}", field="labeller"
            )
        return user

    def path_for(self, user: str | None) -> Path:
        return self.labels_dir / f"labels_{self._user_key(user)}.csv"

    def _lock_for(self, user: str | None) -> threading.Lock:
        key = self._user_key(user)
        with self._registry_lock:
            return self._locks.setdefault(key, threading.Lock())

    def _load(self, user: str | None) -> list[Label]:
        path = self.path_for(user)
        if not path.exists():
            return []
        return parse_labels(path.read_bytes())

    def _write(self, user: str | None, labels: list[Label]) -> None:
        self.labels_dir.mkdir(parents=True, exist_ok=True)
        path = self.path_for(user)
        fd, tmp_path = tempfile.mkstemp(dir=self.labels_dir, prefix=".labels-", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(serialize_labels(labels))
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise

    # -- mutations (serialized per user) --------------------------------

    def save_label(self, label: Label, user: str | None = None) -> str:
        """Append a validated label to the user's file; returns the new id."""
        with self._lock_for(user):
            labels = self._load(user)
            existing = {l.id for l in labels}
            stored = _normalize(label)
            while stored.id in existing:
                stored = replace(stored, id=secrets.token_hex(8))
            labels.append(stored)
            self._write(user, labels)
            return stored.id

    def delete_label(self, label_id: str, user: str | None = None) -> None:
        with self._lock_for(user):
            labels = self._load(user)
            kept = [l for l in labels if l.id != label_id]
            if len(kept) == len(labels):
                raise NotFoundError(f"no label with id {label_id!r}")
            self._write(user, kept)

    def edit_label(self, label_id: str, changes: dict, user: str | None = None) -> Label:
        """Apply a partial edit; only box bounds, class, confidence, call
        type and notes may change."""
        bad = set(changes) - EDITABLE_FIELDS
        if bad & {"id", "created_at", "labeller", "file_name"}:
            raise ImmutableFieldError(f"field(s) {sorted(bad)} cannot be edited")
        if bad:
            raise ValidationError(f"unknown field(s) {sorted(bad)}")
        with self._lock_for(user):
            labels = self._load(user)
            for i, label in enumerate(labels):
                if label.id == label_id:
                    box = SelectionBox(
                        t_min_s=_quant(changes.get("t_min_s", label.box.t_min_s)),
                        t_max_s=_quant(changes.get("t_max_s", label.box.t_max_s)),
                        f_min_hz=_quant(changes.get("f_min_hz", label.box.f_min_hz)),
                        f_max_hz=_quant(changes.get("f_max_hz", label.box.f_max_hz)),
                    )
                    updated = replace(
                        label,
                        box=box,
                        class_name=changes.get("class_name", label.class_name),
                        confidence_pct=changes.get("confidence_pct", label.confidence_pct),
                        call_type=changes.get("call_type", label.call_type),
                        notes=changes.get("notes", label.notes),
                    )
                    labels[i] = updated
                    self._write(user, labels)
                    return updated
            raise NotFoundError(f"no label with id {label_id!r}")

    # -- reads -----------------------------------------------------------

    def _user_keys_on_disk(self) -> list[str]:
        if not self.labels_dir.is_dir():
            return []
        keys = []
        for path in sorted(self.labels_dir.glob("labels_*.csv")):
            keys.append(path.stem[len("labels_"):])
        return keys

    def list_labels(self, file_name: str | None = None, user: str | None = None) -> list[Label]:
        """Labels in creation order; user=None merges every user's file."""
        if user is not None:
            labels = self._load(user)
        else:
            labels = []
            for key in self._user_keys_on_disk():
                labels.extend(self._load(key))
        if file_name is not None:
            labels = [l for l in labels if l.file_name == file_name]
        return labels

    def count_by_file(self, user: str | None = None) -> dict[str, int]:
        counts: dict[str, int] = {}
        for label in self.list_labels(user=user):
            counts[label.file_name] = counts.get(label.file_name, 0) + 1
        return counts

    def export_all(self, user: str | None = None) -> bytes:
        """The user's labels as a CSV byte stream (byte-stable per store state)."""
        with self._lock_for(user):
            return serialize_labels(self._load(user))


def summarize(
    labels: list[Label],
    files: list[str] | None = None,
    file_pattern: str | None = None,
    classes: set[str] | None = None,
) -> list[tuple[str, str, int]]:
    """Per-file per-class label counts (exact group-by), sorted by name.

    files, when given, enumerates the workflow folder so files without any
    label appear with a count of zero. file_pattern is a case-insensitive
    substring match; classes restricts to the given class names.
    """
    counts: dict[tuple[str, str], int] = {}
    for label in labels:
        key = (label.file_name, label.class_name)
        counts[key] = counts.get(key, 0) + 1

    def keep(file_name: str, class_name: str) -> bool:
        if file_pattern is not None and file_pattern.lower() not in file_name.lower():
            return False
        if classes is not None and class_name not in classes:
            return False
        return True

    rows = [(f, c, n) for (f, c), n in counts.items() if keep(f, c)]
    counted_files = {f for f, _, _ in rows}
    if files is not None:
        for file_name in files:
            if file_name not in counted_files and keep(file_name, ""):
                if classes is None:
                    rows.append((file_name, "", 0))
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def summary_csv(rows: list[tuple[str, str, int]]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["file_name", "class_name", "count"])
    for file_name, class_name, count in rows:
        writer.writerow([file_name, class_name, count])
    return buf.getvalue().encode("utf-8")
