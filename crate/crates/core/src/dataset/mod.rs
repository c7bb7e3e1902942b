//! Dataset-scale orchestration: manifests, class balancing, batch
//! augmentation, parameter sweeps and throughput measurement.

pub mod augment;
pub mod bench;
pub mod imageio;
pub mod manifest;
pub mod sampler;
pub mod sweep;

pub use augment::{output_name, run_augment, AugmentJob, AugmentSummary, RecordLine, RECORDS_FILE};
pub use bench::{run_bench, BenchReport};
pub use imageio::{decode_image, encode_png, encode_png_bytes};
pub use manifest::{load_manifest, parse_manifest, Label, ManifestEntry};
pub use sampler::{balanced_weights, SamplerWeights};
pub use sweep::{default_values, run_sweep, sweep_grid};
