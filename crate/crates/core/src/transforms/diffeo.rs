//! Random diffeomorphisms: identity plus a band-limited displacement field.
//!
//! Each displacement component is a truncated double sine series
//!
//! ```text
//! d(y, x) = sum_{i,j >= 1, i^2 + j^2 <= K^2} c_ij sin(i pi x / (W-1)) sin(j pi y / (H-1))
//! ```
//!
//! with `c_ij ~ N(0, strength / (i^2 + j^2))`, in pixel units. The basis
//! vanishes on the border so edges stay put.
//!
//! When no strength is given it is drawn uniformly from an interval chosen so
//! that the warp stays bijective. The default interval is calibrated per
//! `(K, height, width)` the first time that shape is seen: the displacement
//! scales with `sqrt(strength)`, so for each calibration field we solve for
//! the largest strength keeping every discrete Jacobian determinant positive
//! and take the 0.1% quantile over fields as the upper end.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::distributions::{sample_gaussian, sample_uniform};
use crate::error::{AugmentError, Result};
use crate::image::ImageTensor;
use crate::rng::{RngStream, StreamRng};

/// Resamples allowed after the first draw fails the Jacobian test.
pub const MAX_BIJECTIVITY_RETRIES: usize = 8;

/// Fraction of calibration fields allowed to fail at the interval's upper end.
pub const CALIBRATION_FAILURE_RATE: f64 = 0.001;

/// Lower end of the calibrated interval as a fraction of the upper end.
pub const CALIBRATED_LOW_FRACTION: f64 = 0.25;

const CALIBRATION_SEED: u64 = 0x5eed_d1ff_e0c4_a11b;
const CALIBRATION_MAX_SAMPLES: usize = 2000;
const CALIBRATION_MIN_SAMPLES: usize = 128;
const CALIBRATION_FLOP_BUDGET: f64 = 4e9;
/// Standard normal quantile at `CALIBRATION_FAILURE_RATE` (one-sided).
const Z_0_001: f64 = 3.090_232_306_167_813;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StrengthInterval {
    /// Calibrated per image shape.
    Auto,
    Fixed {
        low: f64,
        high: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffeoParams {
    pub smoothness_cutoff: usize,
    /// Explicit strength; `None` samples from `strength_interval`.
    pub strength: Option<f64>,
    pub strength_interval: StrengthInterval,
}

impl DiffeoParams {
    pub fn validate(&self) -> Result<()> {
        if self.smoothness_cutoff < 2 {
            // the lowest mode (1, 1) needs k^2 >= 2
            return Err(AugmentError::config("k_tau", "must be at least 2"));
        }
        if let Some(s) = self.strength {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(AugmentError::config(
                    "sigma_tau_sq",
                    format!("must be a non-negative finite number, got {s}"),
                ));
            }
        }
        if let StrengthInterval::Fixed { low, high } = self.strength_interval {
            if !(low >= 0.0 && low <= high && high.is_finite()) {
                return Err(AugmentError::config(
                    "tau_strength_interval",
                    format!("need 0 <= low <= high, got [{low}, {high}]"),
                ));
            }
        }
        Ok(())
    }

    /// The concrete interval used for images of this shape.
    pub fn resolve_interval(&self, height: usize, width: usize) -> Result<(f64, f64)> {
        match self.strength_interval {
            StrengthInterval::Fixed { low, high } => Ok((low, high)),
            StrengthInterval::Auto => {
                check_cutoff(self.smoothness_cutoff, height, width)?;
                Ok(calibrated_interval(self.smoothness_cutoff, height, width))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    height: usize,
    width: usize,
    dx: Vec<f64>,
    dy: Vec<f64>,
    strength: f64,
    /// `(i, j, c_x, c_y)` per mode; empty for hand-built fields.
    coefficients: Vec<(usize, usize, f64, f64)>,
}

impl DisplacementField {
    /// A field from explicit per-pixel displacements (row-major).
    pub fn from_components(
        height: usize,
        width: usize,
        dx: Vec<f64>,
        dy: Vec<f64>,
    ) -> Result<Self> {
        if dx.len() != height * width || dy.len() != height * width {
            return Err(AugmentError::invalid(format!(
                "displacement components must have {} entries",
                height * width
            )));
        }
        if dx.iter().chain(&dy).any(|v| !v.is_finite()) {
            return Err(AugmentError::NumericDomain(
                "non-finite displacement".into(),
            ));
        }
        Ok(DisplacementField {
            height,
            width,
            dx,
            dy,
            strength: f64::NAN,
            coefficients: Vec::new(),
        })
    }

    pub fn constant(height: usize, width: usize, dx: f64, dy: f64) -> Result<Self> {
        Self::from_components(
            height,
            width,
            vec![dx; height * width],
            vec![dy; height * width],
        )
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    pub fn dy(&self) -> &[f64] {
        &self.dy
    }

    /// Strength the field was drawn with (`NaN` for hand-built fields).
    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn coefficients(&self) -> &[(usize, usize, f64, f64)] {
        &self.coefficients
    }

    /// Smallest central-difference Jacobian determinant of `identity + field`
    /// over interior grid points. `+inf` when there are no interior points.
    pub fn min_jacobian_determinant(&self) -> f64 {
        let (h, w) = (self.height, self.width);
        let mut min = f64::INFINITY;
        for y in 1..h.saturating_sub(1) {
            for x in 1..w.saturating_sub(1) {
                let g = central_gradients(&self.dx, &self.dy, w, y, x);
                let det = (1.0 + g[0]) * (1.0 + g[3]) - g[1] * g[2];
                min = min.min(det);
            }
        }
        min
    }

    pub fn is_bijective(&self) -> bool {
        self.min_jacobian_determinant() > 0.0
    }
}

/// `[d dx/dx, d dx/dy, d dy/dx, d dy/dy]` by central differences.
#[inline]
fn central_gradients(dx: &[f64], dy: &[f64], w: usize, y: usize, x: usize) -> [f64; 4] {
    let i = y * w + x;
    [
        0.5 * (dx[i + 1] - dx[i - 1]),
        0.5 * (dx[i + w] - dx[i - w]),
        0.5 * (dy[i + 1] - dy[i - 1]),
        0.5 * (dy[i + w] - dy[i - w]),
    ]
}

fn check_cutoff(k: usize, height: usize, width: usize) -> Result<()> {
    if height < 2 || width < 2 {
        return Err(AugmentError::invalid(format!(
            "diffeomorphisms need images of at least 2x2, got {height}x{width}"
        )));
    }
    if k == 0 {
        return Err(AugmentError::invalid("k_tau must be at least 1"));
    }
    if k >= height.min(width) {
        return Err(AugmentError::invalid(format!(
            "k_tau = {k} exceeds the Nyquist limit for {height}x{width} (must be < {})",
            height.min(width)
        )));
    }
    Ok(())
}

/// Mode pairs `(i, j)`, `i, j >= 1`, `i^2 + j^2 <= k^2`, in row-major `(i, j)` order.
pub fn band_modes(k: usize) -> Vec<(usize, usize)> {
    let k2 = k * k;
    let mut modes = Vec::new();
    for i in 1..=k {
        for j in 1..=k {
            if i * i + j * j <= k2 {
                modes.push((i, j));
            }
        }
    }
    modes
}

/// `table[m * n + p] = sin((m + 1) pi p / (n - 1))` for `m < k`.
fn sine_table(k: usize, n: usize) -> Vec<f64> {
    let step = std::f64::consts::PI / (n - 1) as f64;
    let mut table = Vec::with_capacity(k * n);
    for m in 1..=k {
        for p in 0..n {
            table.push((m as f64 * p as f64 * step).sin());
        }
    }
    table
}

struct Synthesizer {
    k: usize,
    height: usize,
    width: usize,
    modes: Vec<(usize, usize)>,
    sin_x: Vec<f64>,
    sin_y: Vec<f64>,
}

impl Synthesizer {
    fn new(k: usize, height: usize, width: usize) -> Self {
        Synthesizer {
            k,
            height,
            width,
            modes: band_modes(k),
            sin_x: sine_table(k, width),
            sin_y: sine_table(k, height),
        }
    }

    fn draw_coefficients(
        &self,
        rng: &mut StreamRng,
        strength: f64,
    ) -> Vec<(usize, usize, f64, f64)> {
        let cx: Vec<f64> = self
            .modes
            .iter()
            .map(|&(i, j)| sample_gaussian(rng, strength / (i * i + j * j) as f64))
            .collect();
        let cy: Vec<f64> = self
            .modes
            .iter()
            .map(|&(i, j)| sample_gaussian(rng, strength / (i * i + j * j) as f64))
            .collect();
        self.modes
            .iter()
            .zip(cx.into_iter().zip(cy))
            .map(|(&(i, j), (a, b))| (i, j, a, b))
            .collect()
    }

    /// Evaluates one component on the grid from `(i, j, c)` triples.
    fn synthesize(&self, coeffs: impl Iterator<Item = (usize, usize, f64)>) -> Vec<f64> {
        let (k, h, w) = (self.k, self.height, self.width);
        let mut dense = vec![0.0; k * k];
        for (i, j, c) in coeffs {
            dense[(i - 1) * k + (j - 1)] = c;
        }
        // rows[y * k + i] = sum_j c_ij sin_y[j][y]
        let mut rows = vec![0.0; h * k];
        for y in 0..h {
            for i in 0..k {
                let mut acc = 0.0;
                for j in 0..k {
                    acc += dense[i * k + j] * self.sin_y[j * h + y];
                }
                rows[y * k + i] = acc;
            }
        }
        let mut out = vec![0.0; h * w];
        for y in 0..h {
            let dst = &mut out[y * w..(y + 1) * w];
            for i in 0..k {
                let r = rows[y * k + i];
                if r == 0.0 {
                    continue;
                }
                let basis = &self.sin_x[i * w..(i + 1) * w];
                for (d, b) in dst.iter_mut().zip(basis) {
                    *d += r * b;
                }
            }
        }
        out
    }

    fn field(
        &self,
        strength: f64,
        coefficients: Vec<(usize, usize, f64, f64)>,
    ) -> DisplacementField {
        let dx = self.synthesize(coefficients.iter().map(|&(i, j, a, _)| (i, j, a)));
        let dy = self.synthesize(coefficients.iter().map(|&(i, j, _, b)| (i, j, b)));
        DisplacementField {
            height: self.height,
            width: self.width,
            dx,
            dy,
            strength,
            coefficients,
        }
    }
}

/// Draws a displacement field for an image of `height x width`.
pub fn sample_diffeo(
    rng: &mut StreamRng,
    params: &DiffeoParams,
    height: usize,
    width: usize,
) -> Result<DisplacementField> {
    params
        .validate()
        .map_err(|e| AugmentError::invalid(e.to_string()))?;
    check_cutoff(params.smoothness_cutoff, height, width)?;
    let synth = Synthesizer::new(params.smoothness_cutoff, height, width);

    if let Some(strength) = params.strength {
        let coeffs = synth.draw_coefficients(rng, strength);
        return Ok(synth.field(strength, coeffs));
    }

    let (low, high) = params.resolve_interval(height, width)?;
    for _ in 0..=MAX_BIJECTIVITY_RETRIES {
        let strength = sample_uniform(rng, low, high);
        let coeffs = synth.draw_coefficients(rng, strength);
        let field = synth.field(strength, coeffs);
        if field.is_bijective() {
            return Ok(field);
        }
    }
    Err(AugmentError::NumericDomain(format!(
        "no bijective field after {MAX_BIJECTIVITY_RETRIES} resamples \
         (k_tau = {}, interval [{low}, {high}])",
        params.smoothness_cutoff
    )))
}

/// Backward warp: `out(p) = x(p + field(p))`, bilinear, coordinates clamped
/// to the image border.
pub fn apply_diffeo(x: &ImageTensor, field: &DisplacementField) -> Result<ImageTensor> {
    let (h, w, ch) = x.dims();
    if field.height != h || field.width != w {
        return Err(AugmentError::invalid(format!(
            "field is {}x{} but image is {h}x{w}",
            field.height, field.width
        )));
    }
    let out = match ch {
        1 => warp::<1>(x.data(), field, h, w),
        3 => warp::<3>(x.data(), field, h, w),
        _ => unreachable!("ImageTensor guarantees 1 or 3 channels"),
    };
    Ok(ImageTensor::from_raw(h, w, ch, out))
}

fn warp<const C: usize>(src: &[f32], field: &DisplacementField, h: usize, w: usize) -> Vec<f32> {
    let max_x = (w - 1) as f64;
    let max_y = (h - 1) as f64;
    let mut out = vec![0.0f32; h * w * C];
    let pixel = |i: usize| -> &[f32; C] { src[i * C..i * C + C].try_into().unwrap() };
    for y in 0..h {
        for xi in 0..w {
            let idx = y * w + xi;
            let sx = (xi as f64 + field.dx[idx]).clamp(0.0, max_x);
            let sy = (y as f64 + field.dy[idx]).clamp(0.0, max_y);
            // non-negative after the clamp, so truncation is floor
            let x0 = sx as usize;
            let y0 = sy as usize;
            let x1 = (x0 + 1).min(w - 1);
            let y1 = (y0 + 1).min(h - 1);
            let fx = sx - x0 as f64;
            let fy = sy - y0 as f64;
            let (v00, v01) = (pixel(y0 * w + x0), pixel(y0 * w + x1));
            let (v10, v11) = (pixel(y1 * w + x0), pixel(y1 * w + x1));
            let dst = &mut out[idx * C..idx * C + C];
            for c in 0..C {
                let top = (1.0 - fx) * v00[c] as f64 + fx * v01[c] as f64;
                let bottom = (1.0 - fx) * v10[c] as f64 + fx * v11[c] as f64;
                let v = (1.0 - fy) * top + fy * bottom;
                dst[c] = (v as f32).clamp(0.0, 1.0);
            }
        }
    }
    out
}

type CalibrationKey = (usize, usize, usize);
type CalibrationCache = Mutex<HashMap<CalibrationKey, Arc<OnceLock<(f64, f64)>>>>;

fn calibration_cache() -> &'static CalibrationCache {
    static CACHE: OnceLock<CalibrationCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The default strength interval for `(k, height, width)`, computed once per shape.
pub fn calibrated_interval(k: usize, height: usize, width: usize) -> (f64, f64) {
    let cell = {
        let mut cache = calibration_cache().lock().unwrap();
        cache.entry((k, height, width)).or_default().clone()
    };
    *cell.get_or_init(|| {
        let high = calibrate_max_strength(k, height, width);
        (CALIBRATED_LOW_FRACTION * high, high)
    })
}

/// Number of calibration fields, bounded by a rough flop budget.
pub fn calibration_samples(k: usize, height: usize, width: usize) -> usize {
    let per_field =
        2.0 * (k * k * height + height * width * k) as f64 + 40.0 * (height * width) as f64;
    ((CALIBRATION_FLOP_BUDGET / per_field) as usize)
        .clamp(CALIBRATION_MIN_SAMPLES, CALIBRATION_MAX_SAMPLES)
}

/// Upper strength such that a fraction `CALIBRATION_FAILURE_RATE` of fields
/// fails the Jacobian test. With at least 1000 samples the empirical quantile
/// is used; below that a log-normal fit of the per-field critical strengths.
pub fn calibrate_max_strength(k: usize, height: usize, width: usize) -> f64 {
    let n = calibration_samples(k, height, width);
    let synth = Synthesizer::new(k, height, width);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(n);
    let mut critical = vec![0.0; n];
    // Plain scoped threads: this can run inside a rayon task that another
    // task is blocked on, so it must not hand work back to the rayon pool.
    std::thread::scope(|scope| {
        let chunk = n.div_ceil(workers);
        for (c, slots) in critical.chunks_mut(chunk).enumerate() {
            let synth = &synth;
            scope.spawn(move || {
                for (o, slot) in slots.iter_mut().enumerate() {
                    let idx = (c * chunk + o) as u64;
                    let mut rng = RngStream::new(CALIBRATION_SEED, idx).rng();
                    let coeffs = synth.draw_coefficients(&mut rng, 1.0);
                    let field = synth.field(1.0, coeffs);
                    *slot = critical_strength(&field);
                }
            });
        }
    });
    critical.sort_by(f64::total_cmp);
    if n >= 1000 {
        critical[(CALIBRATION_FAILURE_RATE * n as f64).floor() as usize]
    } else {
        let logs: Vec<f64> = critical.iter().map(|s| s.ln()).collect();
        let mean = logs.iter().sum::<f64>() / n as f64;
        let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean - Z_0_001 * var.sqrt()).exp().min(critical[0])
    }
}

/// For a unit-strength field `u`, the largest `s` with every interior
/// determinant of `identity + sqrt(s) u` positive.
fn critical_strength(unit: &DisplacementField) -> f64 {
    let (h, w) = (unit.height, unit.width);
    let mut t_min = f64::INFINITY;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let g = central_gradients(&unit.dx, &unit.dy, w, y, x);
            // det(t) = 1 + t (ux + vy) + t^2 (ux vy - uy vx)
            let b = g[0] + g[3];
            let a = g[0] * g[3] - g[1] * g[2];
            t_min = t_min.min(first_positive_root(a, b));
        }
    }
    t_min * t_min
}

fn first_positive_root(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return if b < 0.0 { -1.0 / b } else { f64::INFINITY };
    }
    let disc = b * b - 4.0 * a;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    // stable form: roots q / a and 1 / q
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    [q / a, 1.0 / q]
        .into_iter()
        .filter(|r| *r > 0.0)
        .fold(f64::INFINITY, f64::min)
}
