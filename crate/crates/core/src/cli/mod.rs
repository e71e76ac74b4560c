pub mod config;
pub mod presets;
pub mod snapshot;

pub use config::{parse_config, parse_config_str, print_config};
pub use presets::{preset, Overrides, Preset};
pub use snapshot::{write_manifest, write_snapshot, Manifest, SnapshotWriter};
