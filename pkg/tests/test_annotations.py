import threading
from datetime import datetime

import numpy as np
import pytest

from sonobox.annotations import (
    CSV_COLUMNS,
    Label,
    LabelStore,
    parse_labels,
    serialize_labels,
    summarize,
)
from sonobox.dsp import SelectionBox
from sonobox.errors import FormatError, ImmutableFieldError, NotFoundError, ValidationError


def make_label(file_name="a.wav", cls="Wren", t0=1.0, t1=2.0, f0=500.0, f1=2500.0, **kw):
    return Label(
        file_name=file_name,
        box=SelectionBox(t_min_s=t0, t_max_s=t1, f_min_hz=f0, f_max_hz=f1),
        class_name=cls,
        **kw,
    )


def label_key(label):
    return (
        label.id,
        label.created_at,
        label.file_name,
        label.box,
        label.class_name,
        label.confidence_pct,
        label.labeller,
        label.call_type,
        label.notes,
    )


def random_label(rng, files=("a.wav", "b.wav"), classes=("Wren", "Robin", "Human")):
    t0 = round(float(rng.uniform(0, 50)), 3)
    f0 = round(float(rng.uniform(0, 8000)), 3)
    return make_label(
        file_name=str(rng.choice(files)),
        cls=str(rng.choice(classes)),
        t0=t0,
        t1=t0 + round(float(rng.uniform(0.05, 5)), 3),
        f0=f0,
        f1=f0 + round(float(rng.uniform(50, 3000)), 3),
        confidence_pct=int(rng.integers(0, 21) * 5),
        call_type=str(rng.choice(["", "song", "alarm call"])),
        notes=str(rng.choice(["", "faint", "two, overlapping \"notes\"", "line\nbreak"])),
    )


class TestSaveAndList:
    def test_save_single_label_round_trip(self, tmp_path):
        store = LabelStore(tmp_path)
        label = make_label(confidence_pct=80, call_type="song", notes="clear")
        label_id = store.save_label(label, user="alice")
        rows = store.list_labels(user="alice")
        assert len(rows) == 1
        got = rows[0]
        assert got.id == label_id
        assert (got.file_name, got.class_name, got.confidence_pct) == ("a.wav", "Wren", 80)
        assert (got.call_type, got.notes, got.labeller) == ("song", "clear", "")
        assert got.box == SelectionBox(1.0, 2.0, 500.0, 2500.0)

    def test_confidence_defaults_to_100(self, tmp_path):
        store = LabelStore(tmp_path)
        store.save_label(make_label(), user="alice")
        assert store.list_labels(user="alice")[0].confidence_pct == 100

    def test_anonymous_goes_to_tmp_file(self, tmp_path):
        store = LabelStore(tmp_path)
        store.save_label(make_label())
        assert (tmp_path / "labels" / "labels_tmp.csv").exists()

    def test_named_user_file(self, tmp_path):
        store = LabelStore(tmp_path)
        store.save_label(make_label(), user="bob_2")
        assert (tmp_path / "labels" / "labels_bob_2.csv").exists()

    def test_invalid_box_rejected(self, tmp_path):
        store = LabelStore(tmp_path)
        with pytest.raises(ValidationError):
            store.save_label(make_label(t0=3.0, t1=1.0), user="alice")
        assert store.list_labels(user="alice") == []

    def test_fifty_random_labels_round_trip(self, tmp_path):
        rng = np.random.default_rng(71)
        store = LabelStore(tmp_path)
        saved = []
        for _ in range(50):
            store.save_label(random_label(rng), user="alice")
        saved = store.list_labels(user="alice")
        reopened = LabelStore(tmp_path).list_labels(user="alice")
        assert sorted(map(label_key, saved)) == sorted(map(label_key, reopened))
        assert len(reopened) == 50

    def test_list_filters_by_file(self, tmp_path):
        store = LabelStore(tmp_path)
        store.save_label(make_label(file_name="a.wav"), user="u")
        store.save_label(make_label(file_name="b.wav", cls="Robin"), user="u")
        only_a = store.list_labels(file_name="a.wav", user="u")
        assert [l.class_name for l in only_a] == ["Wren"]

    def test_empty_store(self, tmp_path):
        assert LabelStore(tmp_path).list_labels(user="alice") == []


class TestDelete:
    def test_save_then_delete_empties_store(self, tmp_path):
        store = LabelStore(tmp_path)
        label_id = store.save_label(make_label(), user="u")
        store.delete_label(label_id, user="u")
        assert store.list_labels(user="u") == []

    def test_delete_unknown_id(self, tmp_path):
        store = LabelStore(tmp_path)
        store.save_label(make_label(), user="u")
        with pytest.raises(NotFoundError):
            store.delete_label("nope", user="u")

    def test_delete_one_of_three_leaves_others_byte_identical(self, tmp_path):
        rng = np.random.default_rng(73)
        store = LabelStore(tmp_path)
        ids = [store.save_label(random_label(rng), user="u") for _ in range(3)]
        path = store.path_for("u")
        before_lines = path.read_bytes().split(b"\r\n")
        store.delete_label(ids[1], user="u")
        after_lines = path.read_bytes().split(b"\r\n")
        # header + rows 0 and 2 survive untouched at byte level
        assert after_lines[0] == before_lines[0]
        expected = [l for l in before_lines[1:] if ids[1].encode() not in l]
        assert after_lines[1:] == expected


class TestEdit:
    def test_edit_confidence_only(self, tmp_path):
        store = LabelStore(tmp_path)
        label_id = store.save_label(make_label(), user="u")
        before = store.list_labels(user="u")[0]
        updated = store.edit_label(label_id, {"confidence_pct": 75}, user="u")
        assert updated.confidence_pct == 75
        after = store.list_labels(user="u")[0]
        assert after.confidence_pct == 75
        assert (after.box, after.class_name, after.created_at) == (
            before.box, before.class_name, before.created_at)

    def test_invalid_result_rolls_back(self, tmp_path):
        store = LabelStore(tmp_path)
        label_id = store.save_label(make_label(t0=1.0, t1=2.0), user="u")
        before = store.path_for("u").read_bytes()
        with pytest.raises(ValidationError):
            store.edit_label(label_id, {"t_max_s": 0.5}, user="u")
        assert store.path_for("u").read_bytes() == before

    def test_immutable_fields_rejected(self, tmp_path):
        store = LabelStore(tmp_path)
        label_id = store.save_label(make_label(), user="u")
        for field in ("created_at", "labeller", "file_name", "id"):
            with pytest.raises(ImmutableFieldError):
                store.edit_label(label_id, {field: "x"}, user="u")

    def test_unknown_field_rejected(self, tmp_path):
        store = LabelStore(tmp_path)
        label_id = store.save_label(make_label(), user="u")
        with pytest.raises(ValidationError):
            store.edit_label(label_id, {"sparkle": 1}, user="u")

    def test_edit_middle_label_leaves_others_byte_identical(self, tmp_path):
        rng = np.random.default_rng(79)
        store = LabelStore(tmp_path)
        ids = [store.save_label(random_label(rng), user="u") for _ in range(5)]
        before = store.path_for("u").read_bytes().split(b"\r\n")
        store.edit_label(ids[2], {"class_name": "Goldcrest"}, user="u")
        after = store.path_for("u").read_bytes().split(b"\r\n")
        for i, (b, a) in enumerate(zip(before, after)):
            if ids[2].encode() in b:
                assert b != a
            else:
                assert b == a


class TestStoreProperties:
    def test_randomized_sequences_reload_to_same_multiset(self, tmp_path):
        rng = np.random.default_rng(83)
        store = LabelStore(tmp_path)
        live_ids = []
        for step in range(300):
            op = rng.choice(["save", "save", "edit", "delete"])
            if op == "save" or not live_ids:
                live_ids.append(store.save_label(random_label(rng), user="u"))
            elif op == "edit":
                target = str(rng.choice(live_ids))
                store.edit_label(target, {"confidence_pct": int(rng.integers(0, 101))}, user="u")
            else:
                target = str(rng.choice(live_ids))
                live_ids.remove(target)
                store.delete_label(target, user="u")
            if step % 10 == 0:
                in_memory = store.list_labels(user="u")
                reloaded = LabelStore(tmp_path).list_labels(user="u")
                assert sorted(map(label_key, in_memory)) == sorted(map(label_key, reloaded))
        assert len(store.list_labels(user="u")) == len(live_ids)

    def test_concurrent_users_never_cross_contaminate(self, tmp_path):
        store = LabelStore(tmp_path)
        errors = []

        def worker(user, n):
            rng = np.random.default_rng(hash(user) % 2**32)
            try:
                for i in range(n):
                    store.save_label(
                        random_label(rng, classes=(f"{user}-class-{i}",)), user=user)
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(u, 40)) for u in ("alice", "bob")]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        alice = store.list_labels(user="alice")
        bob = store.list_labels(user="bob")
        assert len(alice) == 40 and len(bob) == 40
        assert all(l.class_name.startswith("alice-") for l in alice)
        assert all(l.class_name.startswith("bob-") for l in bob)

    def test_same_user_concurrent_saves_all_survive(self, tmp_path):
        store = LabelStore(tmp_path)

        def worker(seed):
            rng = np.random.default_rng(seed)
            for _ in range(25):
                store.save_label(random_label(rng), user="u")

        threads = [threading.Thread(target=worker, args=(s,)) for s in (1, 2, 3)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(store.list_labels(user="u")) == 75


class TestExport:
    def test_empty_store_header_only(self, tmp_path):
        data = LabelStore(tmp_path).export_all(user="u")
        assert data.decode() == ",".join(CSV_COLUMNS) + "\r\n"

    def test_export_reflects_edits(self, tmp_path):
        store = LabelStore(tmp_path)
        label_id = store.save_label(make_label(), user="u")
        store.edit_label(label_id, {"confidence_pct": 60}, user="u")
        assert b",60," in store.export_all(user="u")

    def test_export_byte_stable(self, tmp_path):
        rng = np.random.default_rng(89)
        store = LabelStore(tmp_path)
        for _ in range(10):
            store.save_label(random_label(rng), user="u")
        assert store.export_all(user="u") == store.export_all(user="u")

    def test_reimport_reproduces_store(self, tmp_path):
        rng = np.random.default_rng(97)
        store = LabelStore(tmp_path)
        for _ in range(20):
            store.save_label(random_label(rng), user="u")
        exported = store.export_all(user="u")
        reimported = parse_labels(exported)
        assert sorted(map(label_key, reimported)) == sorted(
            map(label_key, store.list_labels(user="u")))

    def test_quoting_round_trip(self, tmp_path):
        store = LabelStore(tmp_path)
        nasty = 'comma, "quote" and\nnewline'
        store.save_label(make_label(notes=nasty, call_type="a,b"), user="u")
        back = LabelStore(tmp_path).list_labels(user="u")[0]
        assert back.notes == nasty
        assert back.call_type == "a,b"


class TestParsing:
    def test_bom_tolerated(self, tmp_path):
        store = LabelStore(tmp_path)
        store.save_label(make_label(), user="u")
        path = store.path_for("u")
        path.write_bytes(b"\xef\xbb\xbf" + path.read_bytes())
        assert len(LabelStore(tmp_path).list_labels(user="u")) == 1

    def test_headerless_12_column_import(self):
        row = "abc123,2024-05-01T10:00:00Z,a.wav,1.000,2.000,500.000,900.000,Wren,100,u,,"
        labels = parse_labels(row.encode())
        assert labels[0].id == "abc123"
        assert labels[0].created_at == datetime(2024, 5, 1, 10, 0, 0)

    def test_headerless_11_column_import_generates_ids(self):
        row = "2024-05-01T10:00:00Z,a.wav,1.000,2.000,500.000,900.000,Wren,100,u,,"
        labels = parse_labels(row.encode())
        assert labels[0].class_name == "Wren"
        assert len(labels[0].id) == 16

    def test_wrong_column_count_rejected(self):
        with pytest.raises(FormatError):
            parse_labels(b"a,b,c\n")

    def test_malformed_row_named(self):
        good = serialize_labels([])
        bad = good + b"x,notadate,a.wav,1,2,3,4,Wren,100,u,,\r\n"
        with pytest.raises(FormatError, match="row 2"):
            parse_labels(bad)


class TestSummarize:
    def brute_force(self, labels, files=None, pattern=None, classes=None):
        out = {}
        for l in labels:
            if pattern is not None and pattern.lower() not in l.file_name.lower():
                continue
            if classes is not None and l.class_name not in classes:
                continue
            out[(l.file_name, l.class_name)] = out.get((l.file_name, l.class_name), 0) + 1
        rows = [(f, c, n) for (f, c), n in out.items()]
        if files is not None and classes is None:
            counted = {f for f, _, _ in rows}
            for f in files:
                if f not in counted and (pattern is None or pattern.lower() in f.lower()):
                    rows.append((f, "", 0))
        return sorted(rows)

    def test_empty_store_zero_rows(self):
        rows = summarize([], files=["a.wav", "b.wav"])
        assert rows == [("a.wav", "", 0), ("b.wav", "", 0)]

    def test_fixture_matches_brute_force(self):
        rng = np.random.default_rng(101)
        labels = [random_label(rng, files=("a.wav", "b.wav"),
                               classes=("Wren", "Robin", "Human")) for _ in range(10)]
        rows = summarize(labels, files=["a.wav", "b.wav", "c.wav"])
        assert rows == self.brute_force(labels, files=["a.wav", "b.wav", "c.wav"])

    def test_class_filter_partition(self):
        rng = np.random.default_rng(103)
        labels = [random_label(rng) for _ in range(40)]
        total = sum(n for _, _, n in summarize(labels))
        by_class = 0
        for cls in ("Wren", "Robin", "Human"):
            by_class += sum(n for _, _, n in summarize(labels, classes={cls}))
        assert by_class == total == 40

    def test_random_filters_match_brute_force(self):
        rng = np.random.default_rng(107)
        files = [f"rec{i}.wav" for i in range(4)]
        classes = ("Wren", "Robin", "Human", "Rook")
        labels = [random_label(rng, files=files, classes=classes) for _ in range(60)]
        for _ in range(20):
            pattern = str(rng.choice(["rec", "1", "rec2", "nope", ""])) or None
            subset = None
            if rng.random() < 0.5:
                subset = set(rng.choice(classes, size=rng.integers(1, 4), replace=False))
            got = summarize(labels, files=files, file_pattern=pattern, classes=subset)
            assert got == self.brute_force(labels, files=files, pattern=pattern, classes=subset)
