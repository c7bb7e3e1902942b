//! Random smooth per-channel intensity maps.
//!
//! `f_c(v) = clamp(v + sum_{k=1..K} a_ck sin(pi k v))`, `a_ck ~ N(0, strength / K)`.
//! Every basis term vanishes at 0 and 1, so the endpoints are fixed.
//!
//! Applying a map with `K` in the hundreds directly would cost `K` sines per
//! pixel. Instead the perturbation and its derivative are tabulated on
//! `LUT_INTERVALS + 1` uniform knots (a single length-`2 * LUT_INTERVALS` FFT)
//! and evaluated by cubic Hermite interpolation, which stays within `1e-6`
//! of the series for `K <= 500`.

use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::distributions::sample_gaussian;
use crate::error::{AugmentError, Result};
use crate::image::ImageTensor;
use crate::rng::StreamRng;

pub const LUT_INTERVALS: usize = 8192;

/// Coefficients have variance `strength / K^decay_exponent` unless overridden.
pub const DEFAULT_COLOR_DECAY: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorMapParams {
    pub smoothness_cutoff: usize,
    pub strength: f64,
    pub decay_exponent: f64,
}

impl ColorMapParams {
    pub fn new(smoothness_cutoff: usize, strength: f64) -> Self {
        ColorMapParams {
            smoothness_cutoff,
            strength,
            decay_exponent: DEFAULT_COLOR_DECAY,
        }
    }

    pub fn coefficient_variance(&self) -> f64 {
        self.strength / (self.smoothness_cutoff as f64).powf(self.decay_exponent)
    }

    pub fn validate(&self) -> Result<()> {
        if self.smoothness_cutoff == 0 {
            return Err(AugmentError::config("k_gamma", "must be at least 1"));
        }
        if self.smoothness_cutoff > LUT_INTERVALS {
            return Err(AugmentError::config(
                "k_gamma",
                format!("must be at most {LUT_INTERVALS}"),
            ));
        }
        if !(self.strength >= 0.0 && self.strength.is_finite()) {
            return Err(AugmentError::config(
                "sigma_gamma_sq",
                format!(
                    "must be a non-negative finite number, got {}",
                    self.strength
                ),
            ));
        }
        if !(self.decay_exponent >= 0.0 && self.decay_exponent.is_finite()) {
            return Err(AugmentError::config(
                "gamma_decay_exponent",
                format!(
                    "must be a non-negative finite number, got {}",
                    self.decay_exponent
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorMap {
    coefficients: Vec<Vec<f64>>,
    lut: Vec<Table>,
}

/// `[value, slope]` of the perturbation at each knot, slope per unit of `v`.
type Table = Vec<[f64; 2]>;

impl ColorMap {
    /// Builds a map from per-channel sine coefficients (`coefficients[c][k-1]`).
    pub fn from_coefficients(coefficients: Vec<Vec<f64>>) -> Result<Self> {
        if coefficients.len() != 1 && coefficients.len() != 3 {
            return Err(AugmentError::invalid(format!(
                "color maps need 1 or 3 channels, got {}",
                coefficients.len()
            )));
        }
        if coefficients.iter().flatten().any(|a| !a.is_finite()) {
            return Err(AugmentError::NumericDomain(
                "non-finite color coefficient".into(),
            ));
        }
        if coefficients.iter().any(|c| c.len() > LUT_INTERVALS) {
            return Err(AugmentError::invalid(format!(
                "at most {LUT_INTERVALS} coefficients per channel"
            )));
        }
        let lut = coefficients.iter().map(|c| tabulate(c)).collect();
        Ok(ColorMap { coefficients, lut })
    }

    pub fn identity(channels: usize) -> Result<Self> {
        Self::from_coefficients(vec![Vec::new(); channels])
    }

    pub fn channels(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    /// The map as applied to pixels (tabulated perturbation).
    #[inline]
    pub fn eval(&self, channel: usize, v: f32) -> f32 {
        let table = &self.lut[channel];
        let pos = v as f64 * LUT_INTERVALS as f64;
        let j = (pos as usize).min(LUT_INTERVALS - 1);
        let t = pos - j as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h = 1.0 / LUT_INTERVALS as f64;
        let [v0, s0] = table[j];
        let [v1, s1] = table[j + 1];
        let delta = (2.0 * t3 - 3.0 * t2 + 1.0) * v0
            + (t3 - 2.0 * t2 + t) * h * s0
            + (3.0 * t2 - 2.0 * t3) * v1
            + (t3 - t2) * h * s1;
        ((v as f64 + delta) as f32).clamp(0.0, 1.0)
    }

    /// Direct evaluation of the sine series, for checking the table.
    pub fn eval_exact(&self, channel: usize, v: f64) -> f64 {
        let delta: f64 = self.coefficients[channel]
            .iter()
            .enumerate()
            .map(|(k, a)| a * (std::f64::consts::PI * (k + 1) as f64 * v).sin())
            .sum();
        (v + delta).clamp(0.0, 1.0)
    }
}

fn lut_fft() -> &'static Arc<dyn Fft<f64>> {
    static FFT: OnceLock<Arc<dyn Fft<f64>>> = OnceLock::new();
    FFT.get_or_init(|| FftPlanner::new().plan_fft_forward(2 * LUT_INTERVALS))
}

/// `value[j] = sum_k a_k sin(pi k j / M)` and `slope[j] = sum_k pi k a_k cos(pi k j / M)`
/// for `j = 0..=M`. Both real sequences go through one complex DFT of
/// `a + i b` (with `b_k = pi k a_k`) and are separated by conjugate symmetry.
fn tabulate(coeffs: &[f64]) -> Table {
    let m = LUT_INTERVALS;
    let n = 2 * m;
    if coeffs.iter().all(|&a| a == 0.0) {
        return vec![[0.0; 2]; m + 1];
    }
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for (k, &a) in coeffs.iter().enumerate() {
        buf[k + 1] = Complex::new(a, std::f64::consts::PI * (k + 1) as f64 * a);
    }
    lut_fft().process(&mut buf);
    let mut table = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let z = buf[j];
        let zc = buf[(n - j) % n].conj();
        // A_j = (Z_j + conj Z_{n-j}) / 2, B_j = (Z_j - conj Z_{n-j}) / (2i)
        let a = (z + zc) * 0.5;
        let b = (z - zc) * Complex::new(0.0, -0.5);
        table.push([-a.im, b.re]);
    }
    table[0][0] = 0.0;
    table[m][0] = 0.0;
    table
}

pub fn sample_color_map(
    rng: &mut StreamRng,
    params: &ColorMapParams,
    channels: usize,
) -> Result<ColorMap> {
    params
        .validate()
        .map_err(|e| AugmentError::invalid(e.to_string()))?;
    if channels != 1 && channels != 3 {
        return Err(AugmentError::invalid(format!(
            "color maps need 1 or 3 channels, got {channels}"
        )));
    }
    let k = params.smoothness_cutoff;
    let variance = params.coefficient_variance();
    let coefficients = (0..channels)
        .map(|_| (0..k).map(|_| sample_gaussian(rng, variance)).collect())
        .collect();
    ColorMap::from_coefficients(coefficients)
}

pub fn apply_color_map(x: &ImageTensor, map: &ColorMap) -> Result<ImageTensor> {
    let (h, w, ch) = x.dims();
    if map.channels() != ch {
        return Err(AugmentError::invalid(format!(
            "color map has {} channels but image has {ch}",
            map.channels()
        )));
    }
    let out = x
        .data()
        .chunks_exact(ch)
        .flat_map(|px| px.iter().enumerate().map(|(c, &v)| map.eval(c, v)))
        .collect();
    Ok(ImageTensor::from_raw(h, w, ch, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn zero_strength_is_identity() {
        let mut rng = RngStream::new(1, 0).rng();
        let p = ColorMapParams::new(500, 0.0);
        let m = sample_color_map(&mut rng, &p, 3).unwrap();
        for i in 0..=1000 {
            let v = i as f32 / 1000.0;
            for c in 0..3 {
                assert_eq!(m.eval(c, v), v);
            }
        }
    }

    #[test]
    fn endpoints_fixed() {
        for seed in 0..20 {
            let mut rng = RngStream::new(seed, 3).rng();
            let p = ColorMapParams::new(1 + seed as usize * 25, 0.5);
            let m = sample_color_map(&mut rng, &p, 3).unwrap();
            for c in 0..3 {
                assert_eq!(m.eval(c, 0.0), 0.0);
                assert_eq!(m.eval(c, 1.0), 1.0);
            }
        }
    }

    #[test]
    fn table_tracks_exact_series() {
        for (k, s) in [(500, 0.001), (2, 0.05), (300, 0.01)] {
            let mut rng = RngStream::new(k as u64, 0).rng();
            let p = ColorMapParams::new(k, s);
            let m = sample_color_map(&mut rng, &p, 1).unwrap();
            let worst = (0..=4999)
                .map(|i| {
                    let v = (i as f64 + 0.37) / 5000.0;
                    (m.eval(0, v as f32) as f64 - m.eval_exact(0, v as f32 as f64)).abs()
                })
                .fold(0.0, f64::max);
            assert!(worst < 1e-6, "k={k}: table error {worst}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = RngStream::new(1, 0).rng();
        let zero_k = ColorMapParams::new(0, 0.1);
        assert!(sample_color_map(&mut rng, &zero_k, 3).is_err());
        let ok = ColorMapParams::new(4, 0.1);
        assert!(sample_color_map(&mut rng, &ok, 2).is_err());
    }

    #[test]
    fn channel_mismatch_rejected() {
        let img = ImageTensor::filled(2, 2, 3, 0.5).unwrap();
        let m = ColorMap::identity(1).unwrap();
        assert!(matches!(
            apply_color_map(&img, &m),
            Err(AugmentError::InvalidParameter(_))
        ));
    }

    #[test]
    fn black_image_stays_black() {
        let img = ImageTensor::filled(5, 5, 3, 0.0).unwrap();
        let mut rng = RngStream::new(8, 8).rng();
        let p = ColorMapParams::new(10, 1.0);
        let m = sample_color_map(&mut rng, &p, 3).unwrap();
        assert_eq!(apply_color_map(&img, &m).unwrap(), img);
    }
}
