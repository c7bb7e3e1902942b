//! Brute-force reference implementations shared by the integration suites.
//! None of these call into the code paths they check.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use maxent_augment::dataset::encode_png;
use maxent_augment::ImageTensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_image(seed: u64, h: usize, w: usize, ch: usize) -> ImageTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageTensor::from_fn(h, w, ch, |_, _, _| rng.random::<f32>()).unwrap()
}

/// Smooth-ish synthetic photo stand-in with 8-bit exact values.
pub fn synthetic_u8_image(seed: u64, h: usize, w: usize) -> ImageTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b, c): (f32, f32, f32) = (rng.random(), rng.random(), rng.random());
    ImageTensor::from_fn(h, w, 3, |y, x, ch| {
        let v = 0.5
            + 0.3 * (x as f32 * (0.05 + a * 0.1) + ch as f32).sin()
            + 0.2 * (y as f32 * (0.03 + b * 0.1) + c * 6.0).cos();
        (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
    })
    .unwrap()
}

pub fn ramp(h: usize, w: usize, ch: usize) -> ImageTensor {
    ImageTensor::from_fn(h, w, ch, |y, x, c| {
        ((x + 2 * y + 3 * c) as f32 / (w + 2 * h + 6) as f32).min(1.0)
    })
    .unwrap()
}

/// Per-pixel bilinear backward warp written as a plain double loop.
pub fn naive_bilinear(img: &ImageTensor, dx: &[f64], dy: &[f64]) -> Vec<f32> {
    let (h, w, ch) = img.dims();
    let mut out = Vec::with_capacity(h * w * ch);
    for y in 0..h {
        for x in 0..w {
            let sx = (x as f64 + dx[y * w + x]).max(0.0).min((w - 1) as f64);
            let sy = (y as f64 + dy[y * w + x]).max(0.0).min((h - 1) as f64);
            let x0 = sx.floor() as usize;
            let y0 = sy.floor() as usize;
            let x1 = if x0 + 1 < w { x0 + 1 } else { w - 1 };
            let y1 = if y0 + 1 < h { y0 + 1 } else { h - 1 };
            let fx = sx - x0 as f64;
            let fy = sy - y0 as f64;
            for c in 0..ch {
                let p = |yy: usize, xx: usize| img.get(yy, xx, c) as f64;
                let top = (1.0 - fx) * p(y0, x0) + fx * p(y0, x1);
                let bottom = (1.0 - fx) * p(y1, x0) + fx * p(y1, x1);
                let v = (1.0 - fy) * top + fy * bottom;
                out.push((v as f32).clamp(0.0, 1.0));
            }
        }
    }
    out
}

fn mirror(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    while i < 0 || i >= n {
        if i < 0 {
            i = -i;
        }
        if i >= n {
            i = 2 * (n - 1) - i;
        }
    }
    i as usize
}

/// Sliding-window 2D convolution with mirrored borders, then clamp.
pub fn sliding_window_conv(img: &ImageTensor, taps: &[f64], k: usize) -> Vec<f32> {
    let (h, w, ch) = img.dims();
    let r = (k / 2) as isize;
    let mut out = Vec::with_capacity(h * w * ch);
    for y in 0..h as isize {
        for x in 0..w as isize {
            for c in 0..ch {
                let mut acc = 0.0f64;
                for u in 0..k as isize {
                    for v in 0..k as isize {
                        let sy = mirror(y + r - u, h);
                        let sx = mirror(x + r - v, w);
                        acc += taps[(u * k as isize + v) as usize] * img.get(sy, sx, c) as f64;
                    }
                }
                out.push((acc as f32).clamp(0.0, 1.0));
            }
        }
    }
    out
}

/// Full sine-mode decomposition of a grid function vanishing on the border:
/// `coef[(i - 1) * (h - 2) + (j - 1)]` for `i in 1..=w-2` (x), `j in 1..=h-2` (y).
pub fn sine_modes(f: &[f64], h: usize, w: usize) -> Vec<f64> {
    let (nx, ny) = (w - 2, h - 2);
    let pi = std::f64::consts::PI;
    let mut tmp = vec![0.0; ny * nx];
    for y in 1..h - 1 {
        for i in 1..=nx {
            let mut acc = 0.0;
            for x in 1..w - 1 {
                acc += f[y * w + x] * (pi * (i * x) as f64 / (w - 1) as f64).sin();
            }
            tmp[(y - 1) * nx + (i - 1)] = acc;
        }
    }
    let norm = 4.0 / ((w - 1) * (h - 1)) as f64;
    let mut coef = vec![0.0; nx * ny];
    for i in 1..=nx {
        for j in 1..=ny {
            let mut acc = 0.0;
            for y in 1..h - 1 {
                acc += tmp[(y - 1) * nx + (i - 1)] * (pi * (j * y) as f64 / (h - 1) as f64).sin();
            }
            coef[(i - 1) * ny + (j - 1)] = acc * norm;
        }
    }
    coef
}

/// Largest out-of-band and in-band modal magnitudes for cutoff `k`.
pub fn band_split(f: &[f64], h: usize, w: usize, k: usize) -> (f64, f64) {
    let coef = sine_modes(f, h, w);
    let ny = h - 2;
    let (mut outside, mut inside) = (0.0f64, 0.0f64);
    for (idx, c) in coef.iter().enumerate() {
        let (i, j) = (idx / ny + 1, idx % ny + 1);
        if i * i + j * j > k * k {
            outside = outside.max(c.abs());
        } else {
            inside = inside.max(c.abs());
        }
    }
    (outside, inside)
}

/// Minimum over interior points of the forward map's Jacobian determinant,
/// from centered finite differences of `x + dx`, `y + dy`.
pub fn min_jacobian(dx: &[f64], dy: &[f64], h: usize, w: usize) -> f64 {
    let mut min = f64::INFINITY;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let map_x = |yy: usize, xx: usize| xx as f64 + dx[yy * w + xx];
            let map_y = |yy: usize, xx: usize| yy as f64 + dy[yy * w + xx];
            let a = (map_x(y, x + 1) - map_x(y, x - 1)) / 2.0;
            let b = (map_x(y + 1, x) - map_x(y - 1, x)) / 2.0;
            let c = (map_y(y, x + 1) - map_y(y, x - 1)) / 2.0;
            let d = (map_y(y + 1, x) - map_y(y - 1, x)) / 2.0;
            min = min.min(a * d - b * c);
        }
    }
    min
}

/// Writes `n` synthetic PNGs plus a manifest cycling through the labels.
pub fn synthetic_manifest(dir: &Path, n: usize, h: usize, w: usize) -> PathBuf {
    let labels = ["empty", "half-full", "full", "unknown"];
    let img_dir = dir.join("images");
    std::fs::create_dir_all(&img_dir).unwrap();
    let mut lines = String::new();
    for i in 0..n {
        let name = format!("img_{i:03}.png");
        encode_png(&synthetic_u8_image(i as u64, h, w), img_dir.join(&name)).unwrap();
        lines.push_str(&format!(
            "{{\"path\": \"images/{name}\", \"label\": \"{}\", \"container_id\": \"c{}\"}}\n",
            labels[i % 4],
            i % 5
        ));
    }
    let path = dir.join("manifest.jsonl");
    std::fs::write(&path, lines).unwrap();
    path
}

/// Relative path -> bytes for every file under `root`.
pub fn tree_bytes(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.strip_prefix(root).unwrap().to_path_buf(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

/// Fixed sweep fixtures: family, source side length, SHA-256 of the grid PNG
/// for the S1 preset, seed 99 and the default value list.
pub const SWEEP_GOLDENS: [(maxent_augment::Family, usize, &str); 3] = [
    (
        maxent_augment::Family::Color,
        64,
        "09429ffee96a2eb954104981d6a6d8406862fe0640f7d33d2f730be856097b3b",
    ),
    (
        maxent_augment::Family::Spectral,
        64,
        "e9809358c5d35b525d2bea8ddbb4aa73964e555d91fd3e58b3efcfae322837bc",
    ),
    (
        maxent_augment::Family::Spatial,
        304,
        "039874a84b04b245a988e8e522da336665e204a9f6d9ed1e1271158b56d52e6d",
    ),
];

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Runs one golden sweep in `dir`, returning the digest of the written PNG.
pub fn golden_sweep(dir: &Path, family: maxent_augment::Family, side: usize) -> String {
    let src = dir.join(format!("sweep_src_{side}.png"));
    encode_png(&synthetic_u8_image(7, side, side), &src).unwrap();
    let out = dir.join(format!("sweep_{family}.png"));
    let cfg = maxent_augment::preset("S1").unwrap();
    maxent_augment::dataset::run_sweep(&src, family, None, &out, &cfg, 99).unwrap();
    sha256_hex(&std::fs::read(&out).unwrap())
}
