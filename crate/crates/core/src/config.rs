//! Pipeline hyperparameters and the flat `key = value` config format.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AugmentError, Result};
use crate::presets;
use crate::transforms::{
    ColorMapParams, DiffeoParams, Family, SpectralKernelParams, StrengthInterval,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthMode {
    /// Every branch composes exactly `depth` transforms.
    Fixed,
    /// Each branch draws its length uniformly from `1..=depth`.
    UniformUpTo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub width: usize,
    pub depth: usize,
    pub depth_mode: DepthMode,
    pub dirichlet_concentration: f64,
    pub beta_alpha: f64,
    pub beta_beta: f64,
    pub family_pool: Vec<Family>,
    pub diffeo: DiffeoParams,
    pub color: ColorMapParams,
    pub spectral: SpectralKernelParams,
}

/// Every key the config format accepts, in serialisation order.
pub const CONFIG_KEYS: [&str; 16] = [
    "width",
    "depth",
    "depth_mode",
    "dirichlet_concentration",
    "beta_alpha",
    "beta_beta",
    "family_pool",
    "k_tau",
    "sigma_tau_sq",
    "tau_strength_interval",
    "k_gamma",
    "sigma_gamma_sq",
    "k_omega",
    "sigma_omega_sq",
    "gamma_decay_exponent",
    "omega_decay_exponent",
];

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AugmentError::config(
            key,
            format!("must be a positive finite number, got {v}"),
        ))
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(AugmentError::config("width", "must be at least 1"));
        }
        if self.depth == 0 {
            return Err(AugmentError::config("depth", "must be at least 1"));
        }
        positive("dirichlet_concentration", self.dirichlet_concentration)?;
        positive("beta_alpha", self.beta_alpha)?;
        positive("beta_beta", self.beta_beta)?;
        if self.family_pool.is_empty() {
            return Err(AugmentError::config(
                "family_pool",
                "must name at least one family",
            ));
        }
        self.diffeo.validate()?;
        self.color.validate()?;
        self.spectral.validate()
    }

    /// The same config with every transform strength forced to zero.
    pub fn with_zero_strengths(mut self) -> Self {
        self.diffeo.strength = Some(0.0);
        self.color.strength = 0.0;
        self.spectral.strength = 0.0;
        self
    }

    /// Renders the config in the flat text format; `parse` inverts it exactly.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mode = match self.depth_mode {
            DepthMode::Fixed => "fixed",
            DepthMode::UniformUpTo => "uniform",
        };
        let pool: Vec<&str> = self.family_pool.iter().map(|f| f.name()).collect();
        let interval = match self.diffeo.strength_interval {
            StrengthInterval::Auto => "auto".to_string(),
            StrengthInterval::Fixed { low, high } => format!("{low}, {high}"),
        };
        let sigma_tau = self
            .diffeo
            .strength
            .map(|v| v.to_string())
            .unwrap_or_default();
        let _ = writeln!(s, "width = {}", self.width);
        let _ = writeln!(s, "depth = {}", self.depth);
        let _ = writeln!(s, "depth_mode = {mode}");
        let _ = writeln!(
            s,
            "dirichlet_concentration = {}",
            self.dirichlet_concentration
        );
        let _ = writeln!(s, "beta_alpha = {}", self.beta_alpha);
        let _ = writeln!(s, "beta_beta = {}", self.beta_beta);
        let _ = writeln!(s, "family_pool = {}", pool.join(", "));
        let _ = writeln!(s, "k_tau = {}", self.diffeo.smoothness_cutoff);
        let _ = writeln!(s, "sigma_tau_sq = {sigma_tau}");
        let _ = writeln!(s, "tau_strength_interval = {interval}");
        let _ = writeln!(s, "k_gamma = {}", self.color.smoothness_cutoff);
        let _ = writeln!(s, "sigma_gamma_sq = {}", self.color.strength);
        let _ = writeln!(s, "k_omega = {}", self.spectral.kernel_size);
        let _ = writeln!(s, "sigma_omega_sq = {}", self.spectral.strength);
        let _ = writeln!(s, "gamma_decay_exponent = {}", self.color.decay_exponent);
        let _ = writeln!(s, "omega_decay_exponent = {}", self.spectral.decay_exponent);
        s
    }

    /// Parses config text. Keys not present keep their value from the
    /// `default` preset; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = presets::preset("default")?;
        let mut seen: Vec<&str> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| AugmentError::ConfigSyntax {
                    line: lineno + 1,
                    message: format!("expected `key = value`, got `{line}`"),
                })?;
            let key = key.trim();
            let value = value.trim();
            let Some(&known) = CONFIG_KEYS.iter().find(|k| **k == key) else {
                return Err(AugmentError::config(key, "unknown key"));
            };
            if seen.contains(&known) {
                return Err(AugmentError::config(key, "given more than once"));
            }
            seen.push(known);
            apply_key(&mut cfg, known, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| AugmentError::config(key, format!("cannot parse `{value}`")))
}

fn apply_key(cfg: &mut PipelineConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "width" => cfg.width = parse_num(key, value)?,
        "depth" => cfg.depth = parse_num(key, value)?,
        "depth_mode" => {
            cfg.depth_mode = match value {
                "fixed" => DepthMode::Fixed,
                "uniform" | "uniform-up-to" | "uniform-up-to-m" => DepthMode::UniformUpTo,
                _ => {
                    return Err(AugmentError::config(
                        key,
                        format!("expected `fixed` or `uniform`, got `{value}`"),
                    ))
                }
            }
        }
        "dirichlet_concentration" => cfg.dirichlet_concentration = parse_num(key, value)?,
        "beta_alpha" => cfg.beta_alpha = parse_num(key, value)?,
        "beta_beta" => cfg.beta_beta = parse_num(key, value)?,
        "family_pool" => {
            let mut pool = Vec::new();
            for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let fam: Family = item
                    .parse()
                    .map_err(|e: String| AugmentError::config(key, e))?;
                if !pool.contains(&fam) {
                    pool.push(fam);
                }
            }
            cfg.family_pool = pool;
        }
        "k_tau" => cfg.diffeo.smoothness_cutoff = parse_num(key, value)?,
        "sigma_tau_sq" => {
            cfg.diffeo.strength = if value.is_empty() {
                None
            } else {
                Some(parse_num(key, value)?)
            }
        }
        "tau_strength_interval" => {
            cfg.diffeo.strength_interval = if value.eq_ignore_ascii_case("auto") || value.is_empty()
            {
                StrengthInterval::Auto
            } else {
                let parts: Vec<&str> = value
                    .trim_start_matches('[')
                    .trim_end_matches(']')
                    .split(',')
                    .map(str::trim)
                    .collect();
                let [lo, hi] = parts[..] else {
                    return Err(AugmentError::config(
                        key,
                        format!("expected `auto` or `low, high`, got `{value}`"),
                    ));
                };
                StrengthInterval::Fixed {
                    low: parse_num(key, lo)?,
                    high: parse_num(key, hi)?,
                }
            }
        }
        "k_gamma" => cfg.color.smoothness_cutoff = parse_num(key, value)?,
        "sigma_gamma_sq" => cfg.color.strength = parse_num(key, value)?,
        "k_omega" => cfg.spectral.kernel_size = parse_num(key, value)?,
        "sigma_omega_sq" => cfg.spectral.strength = parse_num(key, value)?,
        "gamma_decay_exponent" => cfg.color.decay_exponent = parse_num(key, value)?,
        "omega_decay_exponent" => cfg.spectral.decay_exponent = parse_num(key, value)?,
        _ => unreachable!("key list and match arms out of sync: {key}"),
    }
    Ok(())
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path)?;
    PipelineConfig::parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn s1_text_round_trips() {
        let s1 = presets::preset("S1").unwrap();
        assert_eq!(PipelineConfig::parse(&s1.to_config_string()).unwrap(), s1);
    }

    #[test]
    fn width_zero_names_width() {
        let err = PipelineConfig::parse("width = 0").unwrap_err();
        assert_eq!(err.key(), Some("width"));
    }

    #[test]
    fn negative_alpha_rejected() {
        let err = PipelineConfig::parse("beta_alpha = -1").unwrap_err();
        assert_eq!(err.key(), Some("beta_alpha"));
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        assert_eq!(
            PipelineConfig::parse("colour_strength = 1")
                .unwrap_err()
                .key(),
            Some("colour_strength")
        );
        assert_eq!(
            PipelineConfig::parse("depth = 1\ndepth = 2")
                .unwrap_err()
                .key(),
            Some("depth")
        );
    }

    #[test]
    fn syntax_error_reports_line() {
        match PipelineConfig::parse("# header\nwidth 3") {
            Err(AugmentError::ConfigSyntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parses_optional_fields() {
        let cfg = PipelineConfig::parse(
            "sigma_tau_sq = 2.5\ntau_strength_interval = 1, 4\nfamily_pool = color, spectral\ndepth_mode = uniform",
        )
        .unwrap();
        assert_eq!(cfg.diffeo.strength, Some(2.5));
        assert_eq!(
            cfg.diffeo.strength_interval,
            StrengthInterval::Fixed {
                low: 1.0,
                high: 4.0
            }
        );
        assert_eq!(cfg.family_pool, vec![Family::Color, Family::Spectral]);
        assert_eq!(cfg.depth_mode, DepthMode::UniformUpTo);
        assert_eq!(
            PipelineConfig::parse("sigma_tau_sq =")
                .unwrap()
                .diffeo
                .strength,
            None
        );
        assert_eq!(
            PipelineConfig::parse("family_pool =").unwrap_err().key(),
            Some("family_pool")
        );
        assert_eq!(
            PipelineConfig::parse("k_omega = 4").unwrap_err().key(),
            Some("k_omega")
        );
        let cfg =
            PipelineConfig::parse("gamma_decay_exponent = 0\nomega_decay_exponent = 1.5").unwrap();
        assert_eq!(
            (cfg.color.decay_exponent, cfg.spectral.decay_exponent),
            (0.0, 1.5)
        );
        let err = PipelineConfig::parse("omega_decay_exponent = -1").unwrap_err();
        assert_eq!(err.key(), Some("omega_decay_exponent"));
    }

    fn arb_config() -> impl Strategy<Value = PipelineConfig> {
        (
            (
                1usize..8,
                1usize..6,
                any::<bool>(),
                0.01f64..10.0,
                0.01f64..10.0,
                0.01f64..10.0,
            ),
            (
                proptest::sample::subsequence(Family::ALL.to_vec(), 1..=3),
                2usize..40,
                proptest::option::of(0.0f64..50.0),
            ),
            (
                proptest::option::of((0.0f64..5.0, 0.0f64..5.0)),
                1usize..600,
                0.0f64..1.0,
                0usize..8,
                0.0f64..1.0,
            ),
            (0.0f64..3.0, 0.0f64..3.0),
        )
            .prop_map(
                |((n, m, uni, conc, a, b), (pool, kt, st), (iv, kg, sg, ko, so), (dg, dw))| {
                    PipelineConfig {
                        width: n,
                        depth: m,
                        depth_mode: if uni {
                            DepthMode::UniformUpTo
                        } else {
                            DepthMode::Fixed
                        },
                        dirichlet_concentration: conc,
                        beta_alpha: a,
                        beta_beta: b,
                        family_pool: pool,
                        diffeo: DiffeoParams {
                            smoothness_cutoff: kt,
                            strength: st,
                            strength_interval: match iv {
                                None => StrengthInterval::Auto,
                                Some((x, y)) => StrengthInterval::Fixed {
                                    low: x.min(y),
                                    high: x.max(y),
                                },
                            },
                        },
                        color: ColorMapParams {
                            smoothness_cutoff: kg,
                            strength: sg,
                            decay_exponent: dg,
                        },
                        spectral: SpectralKernelParams {
                            kernel_size: 2 * ko + 1,
                            strength: so,
                            decay_exponent: dw,
                        },
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn config_text_round_trip(cfg in arb_config()) {
            prop_assert_eq!(PipelineConfig::parse(&cfg.to_config_string()).unwrap(), cfg);
        }
    }
}
