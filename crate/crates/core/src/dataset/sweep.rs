//! Smoothness sweeps: the source image next to seven variants of a single
//! transform family, laid out as a 2x4 grid.

use std::path::Path;

use rand::RngCore;

use super::imageio::{decode_image, encode_png};
use crate::config::PipelineConfig;
use crate::error::{AugmentError, Result};
use crate::image::ImageTensor;
use crate::rng::RngStream;
use crate::transforms::{Family, TransformSpec};

pub const GRID_ROWS: usize = 2;
pub const GRID_COLS: usize = 4;

pub fn default_values(family: Family) -> Vec<usize> {
    match family {
        Family::Spatial | Family::Color => vec![2, 5, 10, 20, 40, 100, 300],
        Family::Spectral => vec![3, 5, 7, 9, 11, 13, 15],
    }
}

/// Builds the grid in memory. Strengths come from `cfg`; variant `i` draws
/// its transform from stream `i` of `seed`.
pub fn sweep_grid(
    image: &ImageTensor,
    family: Family,
    values: &[usize],
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<ImageTensor> {
    if values.len() != GRID_ROWS * GRID_COLS - 1 {
        return Err(AugmentError::invalid(format!(
            "a sweep needs exactly {} values, got {}",
            GRID_ROWS * GRID_COLS - 1,
            values.len()
        )));
    }
    let (h, w, ch) = image.dims();
    let mut cells = vec![image.clone()];
    for (i, &value) in values.iter().enumerate() {
        let (mut diffeo, mut color, mut spectral) = (cfg.diffeo.clone(), cfg.color, cfg.spectral);
        match family {
            Family::Spatial => diffeo.smoothness_cutoff = value,
            Family::Color => color.smoothness_cutoff = value,
            Family::Spectral => spectral.kernel_size = value,
        }
        let invalid =
            |e: AugmentError| AugmentError::invalid(format!("{family} smoothness {value}: {e}"));
        diffeo.validate().map_err(invalid)?;
        color.validate().map_err(invalid)?;
        spectral.validate().map_err(invalid)?;
        let child = RngStream::new(seed, i as u64).rng().next_u64();
        let spec = TransformSpec::resolve(family, child, &diffeo, &color, &spectral, h, w)
            .map_err(invalid)?;
        let t = spec.realize(h, w, ch).map_err(invalid)?;
        cells.push(t.apply(image)?);
    }
    let (gh, gw) = (GRID_ROWS * h, GRID_COLS * w);
    let mut data = vec![0.0f32; gh * gw * ch];
    for (idx, cell) in cells.iter().enumerate() {
        let (r, c) = (idx / GRID_COLS, idx % GRID_COLS);
        for y in 0..h {
            let dst = ((r * h + y) * gw + c * w) * ch;
            let src = y * w * ch;
            data[dst..dst + w * ch].copy_from_slice(&cell.data()[src..src + w * ch]);
        }
    }
    ImageTensor::new(gh, gw, ch, data)
}

/// Decodes `image_path`, sweeps `family` over `values` (or the defaults)
/// and writes the grid PNG.
pub fn run_sweep(
    image_path: impl AsRef<Path>,
    family: Family,
    values: Option<&[usize]>,
    out_path: impl AsRef<Path>,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<ImageTensor> {
    let image = decode_image(image_path)?;
    let defaults = default_values(family);
    let grid = sweep_grid(&image, family, values.unwrap_or(&defaults), cfg, seed)?;
    encode_png(&grid, out_path)?;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    #[test]
    fn grid_layout_places_original_top_left() {
        let img = ImageTensor::from_fn(6, 5, 1, |y, x, _| (y * 5 + x) as f32 / 29.0).unwrap();
        let cfg = preset("S1").unwrap();
        let grid = sweep_grid(&img, Family::Spectral, &[1, 1, 1, 3, 3, 5, 5], &cfg, 0).unwrap();
        assert_eq!(grid.dims(), (12, 20, 1));
        for y in 0..6 {
            for x in 0..5 {
                assert_eq!(grid.get(y, x, 0), img.get(y, x, 0));
                // k = 1 kernels are scaled deltas: close to the source
                assert!((grid.get(y, x + 5, 0) - img.get(y, x, 0)).abs() < 0.2);
            }
        }
    }

    #[test]
    fn invalid_values_rejected() {
        let img = ImageTensor::filled(16, 16, 3, 0.5).unwrap();
        let cfg = preset("S1").unwrap();
        assert!(sweep_grid(&img, Family::Spectral, &[3, 5, 7, 9, 11, 13, 4], &cfg, 0).is_err());
        assert!(sweep_grid(
            &img,
            Family::Spatial,
            &[2, 5, 10, 20, 40, 100, 300],
            &cfg,
            0
        )
        .is_err());
        assert!(sweep_grid(&img, Family::Color, &[2, 5], &cfg, 0).is_err());
    }
}
