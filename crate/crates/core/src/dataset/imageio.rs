use std::io::Cursor;
use std::path::Path;

use image::{ColorType, ExtendedColorType, ImageFormat};

use crate::error::{AugmentError, Result};
use crate::image::ImageTensor;

/// Decodes PNG or JPEG. Grayscale sources stay single-channel, everything
/// else becomes RGB (alpha dropped). 8-bit values are divided by 255.
pub fn decode_image(path: impl AsRef<Path>) -> Result<ImageTensor> {
    let path = path.as_ref();
    let img = image::ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(|source| AugmentError::Image {
            path: path.to_path_buf(),
            source,
        })?;
    let gray = matches!(
        img.color(),
        ColorType::L8 | ColorType::La8 | ColorType::L16 | ColorType::La16
    );
    let (w, h, ch, bytes) = if gray {
        let b = img.to_luma8();
        (b.width(), b.height(), 1, b.into_raw())
    } else {
        let b = img.to_rgb8();
        (b.width(), b.height(), 3, b.into_raw())
    };
    let data = bytes.into_iter().map(|v| v as f32 / 255.0).collect();
    ImageTensor::new(h as usize, w as usize, ch, data)
}

pub fn to_u8(img: &ImageTensor) -> Vec<u8> {
    img.data()
        .iter()
        .map(|&v| (v * 255.0).round() as u8)
        .collect()
}

/// 8-bit PNG, rounded to nearest.
pub fn encode_png_bytes(img: &ImageTensor) -> Result<Vec<u8>> {
    let color = if img.channels() == 1 {
        ExtendedColorType::L8
    } else {
        ExtendedColorType::Rgb8
    };
    let mut out = Cursor::new(Vec::new());
    image::write_buffer_with_format(
        &mut out,
        &to_u8(img),
        img.width() as u32,
        img.height() as u32,
        color,
        ImageFormat::Png,
    )
    .map_err(|source| AugmentError::Image {
        path: "<memory>".into(),
        source,
    })?;
    Ok(out.into_inner())
}

pub fn encode_png(img: &ImageTensor, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_png_bytes(img)?)?;
    Ok(())
}
