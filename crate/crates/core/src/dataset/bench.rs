//! Throughput of decode alone versus decode plus augmentation.
//!
//! Each worker times decode and augmentation separately for every image it
//! processes, so the overhead ratio `(decode + augment) / decode` is at
//! least 1 by construction.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::imageio::decode_image;
use super::manifest::ManifestEntry;
use crate::config::PipelineConfig;
use crate::error::{AugmentError, Result};
use crate::mixer::transform_image;
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub preset: String,
    pub workers: usize,
    pub resolution: [usize; 2],
    pub images: usize,
    pub decode_images_per_sec: f64,
    pub augmented_images_per_sec: f64,
    pub augmented_images_per_sec_per_worker: f64,
    pub overhead_ratio: f64,
}

#[derive(Default)]
struct WorkerTally {
    images: usize,
    decode: Duration,
    augment: Duration,
}

pub fn run_bench(
    entries: &[ManifestEntry],
    cfg: &PipelineConfig,
    workers: usize,
    duration: Duration,
    preset_name: &str,
) -> Result<BenchReport> {
    if entries.is_empty() {
        return Err(AugmentError::invalid(
            "benchmark needs a non-empty manifest",
        ));
    }
    cfg.validate()?;
    let workers = workers.max(1);

    // Warm-up: pays for one-off work such as strength calibration.
    let first = decode_image(&entries[0].image_path)?;
    transform_image(RngStream::new(0, u64::MAX), cfg, &first)?;

    let next = AtomicUsize::new(0);
    let start = Instant::now();
    let tallies: Vec<Result<WorkerTally>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut t = WorkerTally::default();
                    while start.elapsed() < duration || t.images == 0 {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let entry = &entries[i % entries.len()];
                        let t0 = Instant::now();
                        let img = decode_image(&entry.image_path)?;
                        let t1 = Instant::now();
                        transform_image(RngStream::new(0, i as u64), cfg, &img)?;
                        let t2 = Instant::now();
                        t.decode += t1 - t0;
                        t.augment += t2 - t1;
                        t.images += 1;
                    }
                    Ok(t)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench worker panicked"))
            .collect()
    });

    let mut total = WorkerTally::default();
    for t in tallies {
        let t = t?;
        total.images += t.images;
        total.decode += t.decode;
        total.augment += t.augment;
    }
    let decode_s = total.decode.as_secs_f64().max(1e-12);
    let both_s = decode_s + total.augment.as_secs_f64();
    let per_worker = total.images as f64 / both_s;
    Ok(BenchReport {
        preset: preset_name.to_string(),
        workers,
        resolution: [first.height(), first.width()],
        images: total.images,
        decode_images_per_sec: workers as f64 * total.images as f64 / decode_s,
        augmented_images_per_sec: workers as f64 * per_worker,
        augmented_images_per_sec_per_worker: per_worker,
        overhead_ratio: both_s / decode_s,
    })
}
