/* Shapes of the JSON the API serves; kept in sync with the server by hand. */

export interface FileEntry {
  file_name: string;
  n_labels: number;
  duration_s: number;
  n_segments: number;
}

export interface LabelOut {
  id: string;
  created_at: string;
  file_name: string;
  t_min_s: number;
  t_max_s: number;
  f_min_hz: number;
  f_max_hz: number;
  class_name: string;
  confidence_pct: number;
  labeller: string;
  call_type: string;
  notes: string;
}

export interface ClassEntry {
  name: string;
  display: string;
}

export interface ClassGroups {
  core: ClassEntry[];
  misc: ClassEntry[];
  custom: ClassEntry[];
}

export interface ClassesResponse {
  site: string | null;
  groups: ClassGroups;
}

export interface FilterResponse {
  token: string;
  audio_url: string;
  duration_s: number;
}

export interface SummaryRow {
  file_name: string;
  class_name: string;
  count: number;
}

export interface SiteMetadata {
  recorder_name: string;
  lat: number | null;
  long: number | null;
  location_name: string;
  location_county: string;
  habitat_type: string;
  dist_to_coastline: number | null;
  extras: [string, string][];
}

export interface MetadataResponse {
  file_name: string;
  metadata_available: boolean;
  recorder_name: string;
  recorded_at: string | null;
  start_offset_s: number;
  site: SiteMetadata | null;
}

export interface SessionSettings {
  gain_db: number;
  clip_seconds: number;
  window_size: number;
  overlap_fraction: number;
  window_fn: string;
  palette: string;
  contrast_floor_db: number;
  use_bto_codes: boolean;
}

export interface SessionResponse {
  username: string;
  selected_site: string | null;
  custom_classes: string[];
  settings: SessionSettings;
}
