//! The three primitive transform families and a serialisable description
//! of one sampled transform, used for audit and replay.

pub mod color;
pub mod diffeo;
pub mod spectral;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use color::{apply_color_map, sample_color_map, ColorMap, ColorMapParams};
pub use diffeo::{apply_diffeo, sample_diffeo, DiffeoParams, DisplacementField, StrengthInterval};
pub use spectral::{
    apply_spectral, apply_spectral_with, sample_spectral_kernel, ConvolutionMethod, SpectralKernel,
    SpectralKernelParams,
};

use crate::error::{AugmentError, Result};
use crate::image::ImageTensor;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Spatial,
    Color,
    Spectral,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Spatial, Family::Color, Family::Spectral];

    pub fn name(self) -> &'static str {
        match self {
            Family::Spatial => "spatial",
            Family::Color => "color",
            Family::Spectral => "spectral",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spatial" | "tau" => Ok(Family::Spatial),
            "color" | "colour" | "gamma" => Ok(Family::Color),
            "spectral" | "omega" => Ok(Family::Spectral),
            other => Err(format!("unknown transform family `{other}`")),
        }
    }
}

/// A sampled, ready-to-apply transform.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Spatial(DisplacementField),
    Color(ColorMap),
    Spectral(SpectralKernel),
}

impl Transform {
    pub fn family(&self) -> Family {
        match self {
            Transform::Spatial(_) => Family::Spatial,
            Transform::Color(_) => Family::Color,
            Transform::Spectral(_) => Family::Spectral,
        }
    }

    pub fn apply(&self, x: &ImageTensor) -> Result<ImageTensor> {
        match self {
            Transform::Spatial(f) => apply_diffeo(x, f),
            Transform::Color(m) => apply_color_map(x, m),
            Transform::Spectral(k) => apply_spectral(x, k),
        }
    }

    /// Short hex SHA-256 over the sampled parameters.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.family().name().as_bytes());
        let mut put = |v: f64| hasher.update(v.to_bits().to_le_bytes());
        match self {
            Transform::Spatial(f) => {
                put(f.strength());
                for &(i, j, a, b) in f.coefficients() {
                    put(i as f64);
                    put(j as f64);
                    put(a);
                    put(b);
                }
            }
            Transform::Color(m) => {
                for channel in m.coefficients() {
                    put(channel.len() as f64);
                    channel.iter().for_each(|&a| put(a));
                }
            }
            Transform::Spectral(k) => {
                put(k.size() as f64);
                k.taps().iter().for_each(|&t| put(t));
            }
        }
        let bytes = hasher.finalize();
        bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Everything needed to re-derive one transform: its family, the seed of the
/// child stream it was sampled from and the resolved sampling parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum TransformSpec {
    Spatial {
        seed: u64,
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strength: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        interval: Option<[f64; 2]>,
    },
    Color {
        seed: u64,
        k: usize,
        strength: f64,
        #[serde(default = "color_decay", skip_serializing_if = "is_color_decay")]
        decay: f64,
    },
    Spectral {
        seed: u64,
        k: usize,
        strength: f64,
        #[serde(default = "spectral_decay", skip_serializing_if = "is_spectral_decay")]
        decay: f64,
    },
}

fn color_decay() -> f64 {
    color::DEFAULT_COLOR_DECAY
}

fn is_color_decay(v: &f64) -> bool {
    *v == color::DEFAULT_COLOR_DECAY
}

fn spectral_decay() -> f64 {
    spectral::DEFAULT_SPECTRAL_DECAY
}

fn is_spectral_decay(v: &f64) -> bool {
    *v == spectral::DEFAULT_SPECTRAL_DECAY
}

impl TransformSpec {
    pub fn family(&self) -> Family {
        match self {
            TransformSpec::Spatial { .. } => Family::Spatial,
            TransformSpec::Color { .. } => Family::Color,
            TransformSpec::Spectral { .. } => Family::Spectral,
        }
    }

    /// Resolves a spec for `family` from pipeline parameters. An automatic
    /// strength interval is calibrated for `height x width` here so the spec
    /// stays valid on its own.
    pub fn resolve(
        family: Family,
        seed: u64,
        diffeo: &DiffeoParams,
        color: &ColorMapParams,
        spectral: &SpectralKernelParams,
        height: usize,
        width: usize,
    ) -> Result<Self> {
        Ok(match family {
            Family::Spatial => TransformSpec::Spatial {
                seed,
                k: diffeo.smoothness_cutoff,
                strength: diffeo.strength,
                interval: match diffeo.strength {
                    Some(_) => None,
                    None => {
                        let (lo, hi) = diffeo.resolve_interval(height, width)?;
                        Some([lo, hi])
                    }
                },
            },
            Family::Color => TransformSpec::Color {
                seed,
                k: color.smoothness_cutoff,
                strength: color.strength,
                decay: color.decay_exponent,
            },
            Family::Spectral => TransformSpec::Spectral {
                seed,
                k: spectral.kernel_size,
                strength: spectral.strength,
                decay: spectral.decay_exponent,
            },
        })
    }

    pub fn realize(&self, height: usize, width: usize, channels: usize) -> Result<Transform> {
        match *self {
            TransformSpec::Spatial {
                seed,
                k,
                strength,
                interval,
            } => {
                let strength_interval = match (strength, interval) {
                    (_, Some([low, high])) => StrengthInterval::Fixed { low, high },
                    (Some(_), None) => StrengthInterval::Auto,
                    (None, None) => {
                        return Err(AugmentError::invalid(
                            "spatial transform needs a strength or an interval",
                        ))
                    }
                };
                let params = DiffeoParams {
                    smoothness_cutoff: k,
                    strength,
                    strength_interval,
                };
                let mut rng = RngStream::new(seed, 0).rng();
                sample_diffeo(&mut rng, &params, height, width).map(Transform::Spatial)
            }
            TransformSpec::Color {
                seed,
                k,
                strength,
                decay,
            } => {
                let params = ColorMapParams {
                    smoothness_cutoff: k,
                    strength,
                    decay_exponent: decay,
                };
                let mut rng = RngStream::new(seed, 0).rng();
                sample_color_map(&mut rng, &params, channels).map(Transform::Color)
            }
            TransformSpec::Spectral {
                seed,
                k,
                strength,
                decay,
            } => {
                let params = SpectralKernelParams {
                    kernel_size: k,
                    strength,
                    decay_exponent: decay,
                };
                let mut rng = RngStream::new(seed, 0).rng();
                sample_spectral_kernel(&mut rng, &params).map(Transform::Spectral)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_parsing() {
        assert_eq!("Spatial".parse::<Family>().unwrap(), Family::Spatial);
        assert_eq!("colour".parse::<Family>().unwrap(), Family::Color);
        assert!("affine".parse::<Family>().is_err());
    }

    #[test]
    fn spec_realizes_reproducibly() {
        let spec = TransformSpec::Color {
            seed: 99,
            k: 50,
            strength: 0.01,
            decay: 1.0,
        };
        let a = spec.realize(8, 8, 3).unwrap();
        let b = spec.realize(8, 8, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
        let other = TransformSpec::Color {
            seed: 100,
            k: 50,
            strength: 0.01,
            decay: 1.0,
        };
        assert_ne!(other.realize(8, 8, 3).unwrap().digest(), a.digest());
    }

    #[test]
    fn spec_json_shape() {
        let spec = TransformSpec::Spectral {
            seed: 1,
            k: 3,
            strength: 0.01,
            decay: 2.0,
        };
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(s, r#"{"family":"spectral","seed":1,"k":3,"strength":0.01}"#);
        assert_eq!(serde_json::from_str::<TransformSpec>(&s).unwrap(), spec);
    }
}
