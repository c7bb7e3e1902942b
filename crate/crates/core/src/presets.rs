//! Named hyperparameter sets for the three validation splits.
//!
//! All presets share `K_tau = 10` with the diffeomorphism strength sampled
//! from the bijective interval, `K_gamma = 500`, `sigma_gamma^2 = 0.001`,
//! `K_omega = 3`, `sigma_omega^2 = 0.01`, width 3 and all three families.
//! S1 and S3 compose three transforms per branch, S2 one; S1 and S2 mix with
//! `Beta(5, 1)`, S3 with `Beta(6, 2)`. `default` is S1 with uniform mixing.
//!
//! S3 targets color/spectral shifts. To drop the spatial family use a config
//! with `family_pool = color, spectral`.

use crate::config::{DepthMode, PipelineConfig};
use crate::error::{AugmentError, Result};
use crate::transforms::{
    ColorMapParams, DiffeoParams, Family, SpectralKernelParams, StrengthInterval,
};

pub const PRESET_NAMES: [&str; 4] = ["S1", "S2", "S3", "default"];

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub config: PipelineConfig,
}

fn base() -> PipelineConfig {
    PipelineConfig {
        width: 3,
        depth: 3,
        depth_mode: DepthMode::Fixed,
        dirichlet_concentration: 1.0,
        beta_alpha: 5.0,
        beta_beta: 1.0,
        family_pool: Family::ALL.to_vec(),
        diffeo: DiffeoParams {
            smoothness_cutoff: 10,
            strength: None,
            strength_interval: StrengthInterval::Auto,
        },
        color: ColorMapParams::new(500, 0.001),
        spectral: SpectralKernelParams::new(3, 0.01),
    }
}

pub fn preset(name: &str) -> Result<PipelineConfig> {
    let mut cfg = base();
    match name {
        "S1" => {}
        "S2" => cfg.depth = 1,
        "S3" => {
            cfg.beta_alpha = 6.0;
            cfg.beta_beta = 2.0;
        }
        "default" => {
            cfg.beta_alpha = 1.0;
            cfg.beta_beta = 1.0;
        }
        other => return Err(AugmentError::UnknownPreset(other.to_string())),
    }
    Ok(cfg)
}

pub fn presets() -> Vec<Preset> {
    PRESET_NAMES
        .iter()
        .map(|&name| Preset {
            name,
            config: preset(name).expect("shipped preset"),
        })
        .collect()
}
