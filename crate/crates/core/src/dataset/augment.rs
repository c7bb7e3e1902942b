//! Batch augmentation of a manifest into PNG files plus a records file.
//!
//! Entry `i`, copy `c` uses stream `i * copies + c`, so outputs depend only on
//! `(manifest, config, seed)` and never on the worker count.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::imageio::{decode_image, encode_png};
use super::manifest::ManifestEntry;
use crate::config::PipelineConfig;
use crate::error::{AugmentError, Result};
use crate::mixer::{transform_image, AugmentationRecord};
use crate::rng::RngStream;

pub const RECORDS_FILE: &str = "records.jsonl";

#[derive(Debug, Clone)]
pub struct AugmentJob<'a> {
    pub entries: &'a [ManifestEntry],
    pub config: &'a PipelineConfig,
    pub out_dir: &'a Path,
    pub seed: u64,
    pub workers: usize,
    pub copies: usize,
}

/// One line of the records file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordLine {
    pub output: String,
    pub source: PathBuf,
    pub copy: usize,
    pub record: AugmentationRecord,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AugmentSummary {
    pub entries: usize,
    pub processed: usize,
    pub outputs: usize,
    pub failed: usize,
    pub skipped: Vec<(PathBuf, String)>,
}

impl AugmentSummary {
    pub fn is_complete(&self) -> bool {
        self.failed == 0
    }
}

pub fn output_name(source: &Path, copy: usize, stream_id: u64) -> String {
    let stem = source
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image");
    format!("{stem}__c{copy}__s{stream_id}.png")
}

fn process_entry(
    job: &AugmentJob<'_>,
    index: usize,
    entry: &ManifestEntry,
) -> Result<Vec<RecordLine>> {
    let image = decode_image(&entry.image_path)?;
    (0..job.copies)
        .map(|copy| {
            let stream_id = (index * job.copies + copy) as u64;
            let (out, record) =
                transform_image(RngStream::new(job.seed, stream_id), job.config, &image)?;
            let name = output_name(&entry.image_path, copy, stream_id);
            encode_png(&out, job.out_dir.join(&name))?;
            Ok(RecordLine {
                output: name,
                source: entry.image_path.clone(),
                copy,
                record,
            })
        })
        .collect()
}

pub fn run_augment(job: &AugmentJob<'_>) -> Result<AugmentSummary> {
    job.config.validate()?;
    if job.copies == 0 {
        return Err(AugmentError::invalid("copies per image must be at least 1"));
    }
    std::fs::create_dir_all(job.out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.workers.max(1))
        .build()
        .map_err(|e| AugmentError::invalid(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<Vec<RecordLine>>> = pool.install(|| {
        job.entries
            .par_iter()
            .enumerate()
            .map(|(i, e)| process_entry(job, i, e))
            .collect()
    });

    let mut summary = AugmentSummary {
        entries: job.entries.len(),
        ..Default::default()
    };
    let mut sink = BufWriter::new(std::fs::File::create(job.out_dir.join(RECORDS_FILE))?);
    for (entry, result) in job.entries.iter().zip(results) {
        match result {
            Ok(lines) => {
                summary.processed += 1;
                summary.outputs += lines.len();
                for line in lines {
                    serde_json::to_writer(&mut sink, &line)?;
                    sink.write_all(b"\n")?;
                }
            }
            Err(e) => {
                summary.failed += 1;
                summary
                    .skipped
                    .push((entry.image_path.clone(), e.to_string()));
            }
        }
    }
    sink.flush()?;
    Ok(summary)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RecordLine>> {
    std::fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(AugmentError::from))
        .collect()
}
