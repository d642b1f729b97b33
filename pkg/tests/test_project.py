import numpy as np
import pytest

from sonobox.audio_io import parse_filename
from sonobox.errors import (
    AlreadyPresentError,
    ConfigError,
    NotFoundError,
    NotRemovableError,
    ValidationError,
)
from sonobox.project import (
    DEFAULT_MISC_CLASSES,
    ProjectConfig,
    add_class,
    class_list,
    display_name,
    load_bto_codes,
    load_locations,
    load_species_lists,
    remove_class,
    resolve_metadata,
)

from conftest import DEMO_DIR


class TestSpeciesLists:
    def test_columns_sorted_at_load(self):
        data = b"SiteA,SiteB\nwren,robin\nblackbird,\n"
        lists = load_species_lists(data)
        assert lists.by_site["SiteA"] == ["blackbird", "wren"]
        assert lists.by_site["SiteB"] == ["robin"]

    def test_blank_middle_cell_skipped(self):
        data = b"SiteA\nWren\n\nRobin\n"
        assert load_species_lists(data).by_site["SiteA"] == ["Robin", "Wren"]

    def test_bom_transparent(self):
        plain = b"SiteA\nWren\n"
        bom = b"\xef\xbb\xbf" + plain
        assert load_species_lists(bom).by_site == load_species_lists(plain).by_site

    def test_duplicate_sites_rejected(self):
        with pytest.raises(ConfigError):
            load_species_lists(b"SiteA,sitea\nWren,Robin\n")

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            load_species_lists(b"")
        with pytest.raises(ConfigError):
            load_species_lists(b",,\nWren\n")

    def test_case_insensitive_dedupe(self):
        lists = load_species_lists(b"S\nWren\nwren\nWREN\nRobin\n")
        assert lists.by_site["S"] == ["Robin", "Wren"]

    def test_ragged_columns(self):
        data = b"A,B\nWren,Robin\nBlackbird\n"
        lists = load_species_lists(data)
        assert lists.by_site["A"] == ["Blackbird", "Wren"]
        assert lists.by_site["B"] == ["Robin"]

    def test_shuffled_rows_same_result(self):
        rng = np.random.default_rng(3)
        species = ["Wren", "Robin", "Blackbird", "Rook", "Linnet"]
        base = load_species_lists(("S\n" + "\n".join(species)).encode())
        for _ in range(5):
            shuffled = list(species)
            rng.shuffle(shuffled)
            again = load_species_lists(("S\n" + "\n".join(shuffled)).encode())
            assert again.by_site == base.by_site


class TestLocations:
    def test_all_documented_columns(self):
        rows = load_locations(
            b"recorder_name,lat,long,location_name,location_county,habitat_type,dist_to_coastline\n"
            b"REC01,52.1,-6.5,Hilltop,Wexford,Pasture,3.5\n"
        )
        site = rows[0]
        assert site.recorder_name == "REC01"
        assert site.lat == 52.1 and site.long == -6.5
        assert site.location_name == "Hilltop"
        assert site.location_county == "Wexford"
        assert site.habitat_type == "Pasture"
        assert site.dist_to_coastline == 3.5
        assert site.extras == []

    def test_blank_fields_allowed(self):
        rows = load_locations(b"recorder_name,lat,long,habitat_type\nREC01,,,\n")
        assert rows[0].lat is None
        assert rows[0].habitat_type == ""

    def test_extra_columns_verbatim(self):
        rows = load_locations(b"recorder_name,notes,lat\nREC01,fence post,52.0\n")
        assert rows[0].extras == [("notes", "fence post")]

    def test_missing_recorder_name_column(self):
        with pytest.raises(ConfigError):
            load_locations(b"lat,long\n52.0,-6.0\n")

    def test_out_of_range_lat(self):
        with pytest.raises(ConfigError):
            load_locations(b"recorder_name,lat\nREC01,95.0\n")

    def test_non_numeric_coordinate(self):
        with pytest.raises(ConfigError):
            load_locations(b"recorder_name,long\nREC01,east\n")


class TestBtoCodes:
    def test_lookup_table(self):
        table = load_bto_codes(b"bto_code,species_name\nWR,Wren\nR.,Robin\n")
        assert table.code_for("Wren") == "WR"
        assert table.code_for("wren") == "WR"
        assert table.code_for("Robin") == "R."
        assert table.code_for("Dodo") is None

    def test_code_length_enforced(self):
        with pytest.raises(ConfigError):
            load_bto_codes(b"bto_code,species_name\nWREN,Wren\n")

    def test_duplicate_species_rejected(self):
        with pytest.raises(ConfigError):
            load_bto_codes(b"bto_code,species_name\nWR,Wren\nXX,Wren\n")

    def test_missing_columns(self):
        with pytest.raises(ConfigError):
            load_bto_codes(b"code,name\nWR,Wren\n")


class TestResolveMetadata:
    SITES = None

    def sites(self):
        return load_locations(
            b"recorder_name,location_name\nREC01,Hilltop\nREC02,Lakeside\n")

    def test_matching_recorder(self):
        rec = parse_filename("REC01_20240101_120000.wav")
        site, when = resolve_metadata(rec, self.sites())
        assert site.location_name == "Hilltop"
        assert when.year == 2024

    def test_unknown_recorder(self):
        rec = parse_filename("OTHER_20240101_120000.wav")
        site, when = resolve_metadata(rec, self.sites())
        assert site is None and when is not None

    def test_match_is_case_sensitive(self):
        rec = parse_filename("rec01_20240101_120000.wav")
        site, _ = resolve_metadata(rec, self.sites())
        assert site is None

    def test_unparseable_name(self):
        site, when = resolve_metadata(parse_filename("junk.wav"), self.sites())
        assert site is None and when is None


class TestClassList:
    def lists(self):
        return load_species_lists(b"SiteA,SiteB\nWren,Robin\nBlackbird,Chaffinch\nRobin,\n")

    def test_core_plus_misc_counts(self):
        cl = class_list("SiteA", self.lists())
        assert len(cl.core) == 3 and len(cl.misc) == 6 and cl.custom == ()
        assert list(cl.core) == ["Blackbird", "Robin", "Wren"]
        assert cl.misc == DEFAULT_MISC_CLASSES

    def test_unknown_site(self):
        with pytest.raises(ConfigError):
            class_list("Nowhere", self.lists())

    def test_switching_site_swaps_only_core(self):
        a = add_class(class_list("SiteA", self.lists()), "Siskin")
        b = class_list("SiteB", self.lists(), custom=list(a.custom))
        assert a.misc == b.misc and a.custom == b.custom
        assert list(b.core) == ["Chaffinch", "Robin"]

    def test_add_class_appends_to_custom(self):
        cl = add_class(class_list("SiteA", self.lists()), "Siskin")
        assert cl.custom == ("Siskin",)
        assert cl.group_of("Siskin") == "custom"

    def test_add_duplicate_case_insensitive(self):
        cl = class_list("SiteA", self.lists())
        with pytest.raises(AlreadyPresentError, match="already present in the list"):
            add_class(cl, "wren")
        with pytest.raises(AlreadyPresentError):
            add_class(cl, " Human ")

    def test_add_empty_name(self):
        with pytest.raises(ValidationError):
            add_class(class_list("SiteA", self.lists()), "   ")

    def test_remove_restores_previous_list(self):
        base = class_list("SiteA", self.lists())
        assert remove_class(add_class(base, "Siskin"), "Siskin") == base

    def test_remove_core_not_removable(self):
        with pytest.raises(NotRemovableError):
            remove_class(class_list("SiteA", self.lists()), "Wren")
        with pytest.raises(NotRemovableError):
            remove_class(class_list("SiteA", self.lists()), "Human")

    def test_remove_absent(self):
        with pytest.raises(NotFoundError):
            remove_class(class_list("SiteA", self.lists()), "Dodo")

    def test_misc_collision_flagged(self):
        lists = load_species_lists(b"S\nWren\nhuman\n")
        with pytest.raises(ConfigError):
            class_list("S", lists)

    def test_unknown_class_is_grey(self):
        cl = class_list("SiteA", self.lists())
        assert cl.group_of("Dodo") == "grey"

    def test_no_duplicates_after_random_ops(self):
        rng = np.random.default_rng(11)
        cl = class_list("SiteA", self.lists())
        pool = [f"Extra{i}" for i in range(8)]
        for _ in range(100):
            name = str(rng.choice(pool))
            try:
                if rng.random() < 0.6:
                    cl = add_class(cl, name)
                else:
                    cl = remove_class(cl, name)
            except (AlreadyPresentError, NotFoundError):
                pass
            names = [n.lower() for n in cl.all_names()]
            assert len(names) == len(set(names))


class TestDisplayName:
    def table(self):
        return load_bto_codes((DEMO_DIR / "bto_codes.csv").read_bytes())

    def test_toggle_off_is_identity(self):
        assert display_name("Wren", self.table(), use_codes=False) == "Wren"

    def test_wren_maps_to_wr(self):
        # value read from the bundled lookup fixture
        assert display_name("Wren", self.table(), use_codes=True) == "WR"

    def test_unmatched_class_falls_through(self):
        assert display_name("Wind Turbine", self.table(), use_codes=True) == "Wind Turbine"


class TestProjectConfig:
    def test_loads_demo_project(self, demo_project):
        config = ProjectConfig.load(demo_project)
        assert len(config.species.sites()) == 5
        assert len(config.locations) == 5
        assert config.bto.code_for("Wren") == "WR"
        assert config.misc == DEFAULT_MISC_CLASSES

    def test_missing_files_degrade(self, tmp_path):
        config = ProjectConfig.load(tmp_path)
        assert config.species.sites() == []
        assert config.locations == []

    def test_misc_override_file(self, demo_project):
        (demo_project / "misc_classes.csv").write_text("Traffic\nRain\n")
        config = ProjectConfig.load(demo_project)
        assert config.misc == ("Traffic", "Rain")
