//! Max-entropy image augmentation.
//!
//! Three random transform families (smooth spatial diffeomorphisms, smooth
//! intensity maps and small random convolutions) are composed into branches,
//! branches are averaged with Dirichlet weights and the result is blended
//! with the source image by a Beta-distributed coefficient. Everything is
//! driven by counter-based random streams, so a `(seed, stream_id)` pair
//! fully determines an output.
//!
//! ```
//! use maxent_augment::{preset, replay, ImageTensor, Pipeline};
//!
//! let pipeline = Pipeline::new(preset("S1")?, 42)?;
//! let image = ImageTensor::filled(64, 64, 3, 0.5)?;
//! let (out, record) = pipeline.augment(0, &image)?;
//! assert_eq!(replay(&record, &image)?, out);
//! # Ok::<(), maxent_augment::AugmentError>(())
//! ```

pub mod config;
pub mod dataset;
pub mod distributions;
pub mod error;
pub mod image;
pub mod mixer;
pub mod presets;
pub mod rng;
pub mod transforms;

pub use config::{load_config, DepthMode, PipelineConfig};
pub use error::{AugmentError, Result};
pub use image::{clamp_buffer, clamp_image, ImageTensor};
pub use mixer::{replay, transform_image, AugmentationRecord, MixOverrides, MixWeights, Pipeline};
pub use presets::{preset, PRESET_NAMES};
pub use rng::RngStream;
pub use transforms::{Family, Transform, TransformSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
