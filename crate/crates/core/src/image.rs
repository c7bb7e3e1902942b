//! The image container shared by every transform.
//!
//! Pixels are stored row-major as interleaved `f32` intensities in `[0, 1]`
//! (`data[(y * width + x) * channels + c]`).

use crate::error::{AugmentError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageTensor {
    /// Builds an image, checking the shape and that every value lies in `[0, 1]`.
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        check_shape(height, width, channels, data.len())?;
        if let Some((i, v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(if v.is_nan() {
                AugmentError::NumericDomain(format!("NaN at element {i}"))
            } else {
                AugmentError::invalid(format!("value {v} at element {i} outside [0, 1]"))
            });
        }
        Ok(ImageTensor {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(
            height,
            width,
            channels,
            vec![value; height * width * channels],
        )
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Self::new(height, width, channels, data)
    }

    /// Internal constructor for buffers already known to be valid.
    pub(crate) fn from_raw(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), height * width * channels);
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        ImageTensor {
            height,
            width,
            channels,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    pub fn same_dims(&self, other: &ImageTensor) -> bool {
        self.dims() == other.dims()
    }

    /// Largest absolute per-element difference; `None` if the shapes differ.
    pub fn max_abs_diff(&self, other: &ImageTensor) -> Option<f32> {
        self.same_dims(other).then(|| {
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f32::max)
        })
    }
}

pub(crate) fn check_shape(height: usize, width: usize, channels: usize, len: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(AugmentError::invalid(format!(
            "image dimensions must be positive, got {height}x{width}"
        )));
    }
    if channels != 1 && channels != 3 {
        return Err(AugmentError::invalid(format!(
            "images must have 1 or 3 channels, got {channels}"
        )));
    }
    if len != height * width * channels {
        return Err(AugmentError::invalid(format!(
            "data length {len} does not match {height}x{width}x{channels}"
        )));
    }
    Ok(())
}

/// Clips finite values into `[0, 1]`, rejecting NaN.
pub fn clamp_buffer(
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
) -> Result<ImageTensor> {
    check_shape(height, width, channels, data.len())?;
    let mut data = data;
    for (i, v) in data.iter_mut().enumerate() {
        if v.is_nan() {
            return Err(AugmentError::NumericDomain(format!("NaN at element {i}")));
        }
        *v = v.clamp(0.0, 1.0);
    }
    Ok(ImageTensor::from_raw(height, width, channels, data))
}

/// Clamps an image into `[0, 1]`. Values already in range are left untouched.
pub fn clamp_image(x: ImageTensor) -> Result<ImageTensor> {
    let (h, w, c) = x.dims();
    clamp_buffer(h, w, c, x.data)
}
