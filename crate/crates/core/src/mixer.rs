//! One augmentation step: `width` branches, each a composition of sampled
//! transforms, combined with Dirichlet weights and then blended with the
//! original image by a Beta-distributed coefficient.
//!
//! Draw order on an image's stream is fixed: the branch weights, the mix
//! coefficient, then per branch its length (uniform depth mode only) and per
//! step a family index and a child seed. Transform parameters are sampled
//! from the child seed, which is what makes a record replayable on its own.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::config::{DepthMode, PipelineConfig};
use crate::distributions::{sample_beta, sample_dirichlet};
use crate::error::{AugmentError, Result};
use crate::image::ImageTensor;
use crate::rng::{RngStream, StreamRng};
use crate::transforms::TransformSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixWeights {
    pub weights: Vec<f64>,
    pub mix_coefficient: f64,
}

impl MixWeights {
    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() || self.weights.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(AugmentError::invalid(
                "mix weights must be non-empty and non-negative",
            ));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(AugmentError::invalid(format!(
                "mix weights sum to {total}, not 1"
            )));
        }
        if !(0.0..=1.0).contains(&self.mix_coefficient) {
            return Err(AugmentError::invalid(format!(
                "mix coefficient {} outside [0, 1]",
                self.mix_coefficient
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    #[serde(flatten)]
    pub spec: TransformSpec,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationRecord {
    pub root_seed: u64,
    pub stream_id: u64,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub weights: Vec<f64>,
    pub mix_coefficient: f64,
    pub branches: Vec<Vec<TransformRecord>>,
}

/// Test and tooling hook: replaces sampled values after they are drawn, so
/// the rest of the stream is unaffected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MixOverrides {
    pub weights: Option<Vec<f64>>,
    pub mix_coefficient: Option<f64>,
}

/// Intermediate buffers of one call, for property checks.
#[derive(Debug, Clone)]
pub struct MixTrace {
    pub branch_outputs: Vec<ImageTensor>,
    /// Dirichlet combination of the branches.
    pub combined: Vec<f64>,
    /// Final blend before clamping.
    pub unclamped: Vec<f32>,
}

/// Draws the transform sequence of one branch.
pub fn sample_branch(
    rng: &mut StreamRng,
    cfg: &PipelineConfig,
    height: usize,
    width: usize,
) -> Result<Vec<TransformSpec>> {
    let len = match cfg.depth_mode {
        DepthMode::Fixed => cfg.depth,
        DepthMode::UniformUpTo => rng.random_range(1..=cfg.depth),
    };
    (0..len)
        .map(|_| {
            let family = cfg.family_pool[rng.random_range(0..cfg.family_pool.len())];
            let seed = rng.next_u64();
            TransformSpec::resolve(
                family,
                seed,
                &cfg.diffeo,
                &cfg.color,
                &cfg.spectral,
                height,
                width,
            )
        })
        .collect()
}

/// Applies `specs` left to right, returning the output and per-step digests.
pub fn apply_branch(
    specs: &[TransformSpec],
    x: &ImageTensor,
) -> Result<(ImageTensor, Vec<TransformRecord>)> {
    let (h, w, ch) = x.dims();
    let mut current = x.clone();
    let mut records = Vec::with_capacity(specs.len());
    for spec in specs {
        let t = spec.realize(h, w, ch)?;
        current = t.apply(&current)?;
        records.push(TransformRecord {
            spec: spec.clone(),
            digest: t.digest(),
        });
    }
    Ok((current, records))
}

pub fn compose_branch(
    rng: &mut StreamRng,
    cfg: &PipelineConfig,
    x: &ImageTensor,
) -> Result<ImageTensor> {
    let specs = sample_branch(rng, cfg, x.height(), x.width())?;
    apply_branch(&specs, x).map(|(img, _)| img)
}

/// `x_T = sum_i w_i b_i`, `x_hat = (1 - p) x + p x_T`, accumulated in f64.
pub fn mix_branches(
    original: &ImageTensor,
    branches: &[ImageTensor],
    mix: &MixWeights,
) -> Result<(ImageTensor, Vec<f64>, Vec<f32>)> {
    mix.validate()?;
    if branches.len() != mix.weights.len() {
        return Err(AugmentError::invalid(format!(
            "{} branches but {} weights",
            branches.len(),
            mix.weights.len()
        )));
    }
    if let Some(b) = branches.iter().find(|b| !b.same_dims(original)) {
        return Err(AugmentError::invalid(format!(
            "branch is {:?} but original is {:?}",
            b.dims(),
            original.dims()
        )));
    }
    let n = original.data().len();
    let mut combined = vec![0.0f64; n];
    for (b, &w) in branches.iter().zip(&mix.weights) {
        for (acc, &v) in combined.iter_mut().zip(b.data()) {
            *acc += w * v as f64;
        }
    }
    let p = mix.mix_coefficient;
    let unclamped: Vec<f32> = original
        .data()
        .iter()
        .zip(&combined)
        .map(|(&x, &xt)| ((1.0 - p) * x as f64 + p * xt) as f32)
        .collect();
    if unclamped.iter().any(|v| v.is_nan()) {
        return Err(AugmentError::NumericDomain("NaN in mixed image".into()));
    }
    let out = unclamped.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let (h, w, c) = original.dims();
    Ok((ImageTensor::from_raw(h, w, c, out), combined, unclamped))
}

pub fn transform_image(
    stream: RngStream,
    cfg: &PipelineConfig,
    x: &ImageTensor,
) -> Result<(ImageTensor, AugmentationRecord)> {
    transform_image_traced(stream, cfg, x, &MixOverrides::default()).map(|(img, rec, _)| (img, rec))
}

pub fn transform_image_traced(
    stream: RngStream,
    cfg: &PipelineConfig,
    x: &ImageTensor,
    overrides: &MixOverrides,
) -> Result<(ImageTensor, AugmentationRecord, MixTrace)> {
    cfg.validate()?;
    let (h, w, ch) = x.dims();
    let mut rng = stream.rng();
    let weights = sample_dirichlet(&mut rng, cfg.width, cfg.dirichlet_concentration)?;
    let p = sample_beta(&mut rng, cfg.beta_alpha, cfg.beta_beta)?;
    let branch_specs = (0..cfg.width)
        .map(|_| sample_branch(&mut rng, cfg, h, w))
        .collect::<Result<Vec<_>>>()?;

    let mix = MixWeights {
        weights: overrides.weights.clone().unwrap_or(weights),
        mix_coefficient: overrides.mix_coefficient.unwrap_or(p),
    };
    if mix.weights.len() != cfg.width {
        return Err(AugmentError::invalid(format!(
            "override has {} weights for width {}",
            mix.weights.len(),
            cfg.width
        )));
    }

    let mut branch_outputs = Vec::with_capacity(cfg.width);
    let mut branches = Vec::with_capacity(cfg.width);
    for specs in &branch_specs {
        let (img, recs) = apply_branch(specs, x)?;
        branch_outputs.push(img);
        branches.push(recs);
    }
    let (out, combined, unclamped) = mix_branches(x, &branch_outputs, &mix)?;
    let record = AugmentationRecord {
        root_seed: stream.root_seed,
        stream_id: stream.stream_id,
        height: h,
        width: w,
        channels: ch,
        weights: mix.weights,
        mix_coefficient: mix.mix_coefficient,
        branches,
    };
    Ok((
        out,
        record,
        MixTrace {
            branch_outputs,
            combined,
            unclamped,
        },
    ))
}

/// Re-applies a record's transforms and weights to `x`.
pub fn replay(record: &AugmentationRecord, x: &ImageTensor) -> Result<ImageTensor> {
    if x.dims() != (record.height, record.width, record.channels) {
        return Err(AugmentError::invalid(format!(
            "record is for {}x{}x{} but image is {:?}",
            record.height,
            record.width,
            record.channels,
            x.dims()
        )));
    }
    let (h, w, ch) = x.dims();
    let mut outputs = Vec::with_capacity(record.branches.len());
    for branch in &record.branches {
        let mut current = x.clone();
        for step in branch {
            let t = step.spec.realize(h, w, ch)?;
            let digest = t.digest();
            if digest != step.digest {
                return Err(AugmentError::Replay(format!(
                    "{} transform digest {digest} does not match recorded {}",
                    step.spec.family(),
                    step.digest
                )));
            }
            current = t.apply(&current)?;
        }
        outputs.push(current);
    }
    let mix = MixWeights {
        weights: record.weights.clone(),
        mix_coefficient: record.mix_coefficient,
    };
    mix_branches(x, &outputs, &mix).map(|(img, _, _)| img)
}

/// A config bound to a root seed; augments images by stream id.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    config: PipelineConfig,
    seed: u64,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Pipeline { config, seed })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn augment(
        &self,
        stream_id: u64,
        x: &ImageTensor,
    ) -> Result<(ImageTensor, AugmentationRecord)> {
        transform_image(RngStream::new(self.seed, stream_id), &self.config, x)
    }
}
