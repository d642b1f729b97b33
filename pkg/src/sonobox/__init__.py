"""Spectrogram annotation toolkit: audio I/O, STFT filtering, rendering,
a CSV label store and the HTTP API serving the browser UI."""

from .audio_io import AudioClip, RecordingFile, apply_gain, decode_wav, encode_wav, parse_filename, segment
from .dsp import (
    ComplexSpectrogram,
    FilterMode,
    MagnitudeSpectrogramDb,
    SelectionBox,
    StftParams,
    band_filter,
    box_filter,
    istft,
    noise_reduce,
    stft,
    to_db,
)
from .annotations import Label, LabelStore, summarize
from .project import (
    BtoCodeTable,
    ClassList,
    ProjectConfig,
    SiteMetadata,
    SpeciesLists,
    add_class,
    class_list,
    display_name,
    load_bto_codes,
    load_locations,
    load_species_lists,
    remove_class,
    resolve_metadata,
)
from .render import Palette, RenderParams, list_palettes, render_spectrogram, zoom_recompute

__version__ = "0.1.0"
