//! Random spectral filters: a centered delta plus i.i.d. Gaussian taps,
//! convolved per channel with reflect-padded borders.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::distributions::sample_gaussian;
use crate::error::{AugmentError, Result};
use crate::image::ImageTensor;
use crate::rng::StreamRng;

/// Kernels at least this wide are applied in the frequency domain.
pub const FFT_KERNEL_THRESHOLD: usize = 9;

/// Taps get noise of variance `strength / K^decay_exponent` unless overridden.
pub const DEFAULT_SPECTRAL_DECAY: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralKernelParams {
    pub kernel_size: usize,
    pub strength: f64,
    pub decay_exponent: f64,
}

impl SpectralKernelParams {
    pub fn new(kernel_size: usize, strength: f64) -> Self {
        SpectralKernelParams {
            kernel_size,
            strength,
            decay_exponent: DEFAULT_SPECTRAL_DECAY,
        }
    }

    pub fn tap_variance(&self) -> f64 {
        self.strength / (self.kernel_size as f64).powf(self.decay_exponent)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel_size == 0 || self.kernel_size.is_multiple_of(2) {
            return Err(AugmentError::config(
                "k_omega",
                format!("must be an odd positive integer, got {}", self.kernel_size),
            ));
        }
        if !(self.strength >= 0.0 && self.strength.is_finite()) {
            return Err(AugmentError::config(
                "sigma_omega_sq",
                format!(
                    "must be a non-negative finite number, got {}",
                    self.strength
                ),
            ));
        }
        if !(self.decay_exponent >= 0.0 && self.decay_exponent.is_finite()) {
            return Err(AugmentError::config(
                "omega_decay_exponent",
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
pub struct SpectralKernel {
    size: usize,
    taps: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvolutionMethod {
    /// Direct below `FFT_KERNEL_THRESHOLD`, FFT at or above it.
    Auto,
    Direct,
    Fft,
}

impl SpectralKernel {
    /// `taps` is row-major `size x size`.
    pub fn new(size: usize, taps: Vec<f64>) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(AugmentError::invalid(format!(
                "kernel size must be odd and positive, got {size}"
            )));
        }
        if taps.len() != size * size {
            return Err(AugmentError::invalid(format!(
                "expected {} taps, got {}",
                size * size,
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(AugmentError::NumericDomain("non-finite kernel tap".into()));
        }
        Ok(SpectralKernel { size, taps })
    }

    pub fn delta(size: usize) -> Result<Self> {
        let mut taps = vec![0.0; size * size];
        if size % 2 == 1 {
            taps[size * size / 2] = 1.0;
        }
        Self::new(size, taps)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    #[inline]
    pub fn tap(&self, u: usize, v: usize) -> f64 {
        self.taps[u * self.size + v]
    }
}

pub fn sample_spectral_kernel(
    rng: &mut StreamRng,
    params: &SpectralKernelParams,
) -> Result<SpectralKernel> {
    params
        .validate()
        .map_err(|e| AugmentError::invalid(e.to_string()))?;
    let k = params.kernel_size;
    let variance = params.tap_variance();
    let center = k * k / 2;
    let taps = (0..k * k)
        .map(|i| {
            let noise = sample_gaussian(rng, variance);
            if i == center {
                1.0 + noise
            } else {
                noise
            }
        })
        .collect();
    SpectralKernel::new(k, taps)
}

pub fn apply_spectral(x: &ImageTensor, kernel: &SpectralKernel) -> Result<ImageTensor> {
    apply_spectral_with(x, kernel, ConvolutionMethod::Auto)
}

/// Numpy-style reflection (edge sample not repeated).
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - m }) as usize
}

pub fn apply_spectral_with(
    x: &ImageTensor,
    kernel: &SpectralKernel,
    method: ConvolutionMethod,
) -> Result<ImageTensor> {
    let (h, w, ch) = x.dims();
    let k = kernel.size;
    if k > h.min(w) {
        return Err(AugmentError::invalid(format!(
            "kernel size {k} exceeds image {h}x{w}"
        )));
    }
    let r = k / 2;
    let (hp, wp) = (h + 2 * r, w + 2 * r);
    let use_fft = match method {
        ConvolutionMethod::Auto => k >= FFT_KERNEL_THRESHOLD,
        ConvolutionMethod::Direct => false,
        ConvolutionMethod::Fft => true,
    };
    let mut out = vec![0.0f32; h * w * ch];
    let mut fft = use_fft.then(|| FftConvolver::new(kernel, hp, wp));
    let mut padded = vec![0.0f64; hp * wp];
    let col_src: Vec<usize> = (0..wp)
        .map(|px| reflect(px as isize - r as isize, w))
        .collect();
    let row_src: Vec<usize> = (0..hp)
        .map(|py| reflect(py as isize - r as isize, h))
        .collect();
    let src = x.data();
    for c in 0..ch {
        for (py, &sy) in row_src.iter().enumerate() {
            let src_row = &src[sy * w * ch..(sy + 1) * w * ch];
            let dst = &mut padded[py * wp..(py + 1) * wp];
            for (d, &sx) in dst.iter_mut().zip(&col_src) {
                *d = src_row[sx * ch + c] as f64;
            }
        }
        match fft.as_mut() {
            Some(conv) => conv.convolve(&padded, r, h, w, ch, c, &mut out),
            None => convolve_direct(&padded, wp, kernel, h, w, ch, c, &mut out),
        }
    }
    for v in &mut out {
        if v.is_nan() {
            return Err(AugmentError::NumericDomain(
                "NaN after spectral filter".into(),
            ));
        }
        *v = v.clamp(0.0, 1.0);
    }
    Ok(ImageTensor::from_raw(h, w, ch, out))
}

#[allow(clippy::too_many_arguments)]
fn convolve_direct(
    padded: &[f64],
    wp: usize,
    kernel: &SpectralKernel,
    h: usize,
    w: usize,
    ch: usize,
    c: usize,
    out: &mut [f32],
) {
    let k = kernel.size;
    let mut row = vec![0.0f64; w];
    for y in 0..h {
        row.fill(0.0);
        // out(y, x) = sum_{u,v} k[u][v] padded[y + 2r - u][x + 2r - v]
        for u in 0..k {
            let src_row = &padded[(y + k - 1 - u) * wp..];
            for v in 0..k {
                let t = kernel.tap(u, v);
                if t == 0.0 {
                    continue;
                }
                let src = &src_row[k - 1 - v..k - 1 - v + w];
                for (acc, s) in row.iter_mut().zip(src) {
                    *acc += t * s;
                }
            }
        }
        for (x, acc) in row.iter().enumerate() {
            out[(y * w + x) * ch + c] = *acc as f32;
        }
    }
}

struct FftConvolver {
    hp: usize,
    wp: usize,
    kernel_spectrum: Vec<Complex<f64>>,
    planner: FftPlanner<f64>,
    scratch: Vec<Complex<f64>>,
}

impl FftConvolver {
    fn new(kernel: &SpectralKernel, hp: usize, wp: usize) -> Self {
        let mut planner = FftPlanner::new();
        let k = kernel.size;
        let mut spec = vec![Complex::new(0.0, 0.0); hp * wp];
        for u in 0..k {
            for v in 0..k {
                spec[u * wp + v] = Complex::new(kernel.tap(u, v), 0.0);
            }
        }
        fft2(&mut planner, &mut spec, hp, wp, false);
        FftConvolver {
            hp,
            wp,
            kernel_spectrum: spec,
            planner,
            scratch: vec![Complex::new(0.0, 0.0); hp * wp],
        }
    }

    /// Circular convolution of the padded plane; the valid `h x w` window
    /// starting at `(2r, 2r)` never wraps.
    #[allow(clippy::too_many_arguments)]
    fn convolve(
        &mut self,
        padded: &[f64],
        r: usize,
        h: usize,
        w: usize,
        ch: usize,
        c: usize,
        out: &mut [f32],
    ) {
        let (hp, wp) = (self.hp, self.wp);
        for (z, &p) in self.scratch.iter_mut().zip(padded) {
            *z = Complex::new(p, 0.0);
        }
        fft2(&mut self.planner, &mut self.scratch, hp, wp, false);
        for (z, kz) in self.scratch.iter_mut().zip(&self.kernel_spectrum) {
            *z *= kz;
        }
        fft2(&mut self.planner, &mut self.scratch, hp, wp, true);
        let norm = 1.0 / (hp * wp) as f64;
        for y in 0..h {
            for x in 0..w {
                let z = self.scratch[(y + 2 * r) * wp + x + 2 * r];
                out[(y * w + x) * ch + c] = (z.re * norm) as f32;
            }
        }
    }
}

/// In-place unnormalised 2D FFT of a row-major `rows x cols` buffer.
fn fft2(
    planner: &mut FftPlanner<f64>,
    data: &mut [Complex<f64>],
    rows: usize,
    cols: usize,
    inverse: bool,
) {
    let plan = |p: &mut FftPlanner<f64>, n| {
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    };
    plan(planner, cols).process(data);
    let mut t = vec![Complex::new(0.0, 0.0); rows * cols];
    for y in 0..rows {
        for x in 0..cols {
            t[x * rows + y] = data[y * cols + x];
        }
    }
    plan(planner, rows).process(&mut t);
    for x in 0..cols {
        for y in 0..rows {
            data[y * cols + x] = t[x * rows + y];
        }
    }
}
