//! Deterministic synthetic test images.
//!
//! The standard 512×512 host set is not bundled (licensing); these generators
//! provide three hosts with distinct texture characters plus a synthetic
//! watermark logo, all reproducible bit-for-bit. Values stay inside
//! [16, 240] so embedding perturbations do not clip at the 8-bit bounds.

use crate::matrix::ImageMatrix;

/// Texture character of a synthetic host.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthHost {
    /// Smooth overlapping intensity blobs, low high-frequency energy.
    Smooth,
    /// Fine oriented texture with pseudo-random grain.
    Texture,
    /// Piecewise structures: soft-edged blocks over a gradient.
    Structured,
}

impl SynthHost {
    pub const ALL: [SynthHost; 3] = [SynthHost::Smooth, SynthHost::Texture, SynthHost::Structured];

    pub fn name(&self) -> &'static str {
        match self {
            SynthHost::Smooth => "synthetic-smooth",
            SynthHost::Texture => "synthetic-texture",
            SynthHost::Structured => "synthetic-structured",
        }
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn grain(r: usize, c: usize, seed: u64) -> f64 {
    let h = mix(seed ^ mix((r as u64) << 32 | c as u64));
    (h >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}

/// Band-limited grain: white noise smoothed by two 5-tap binomial passes.
/// Mid-frequency texture survives mild low-pass filtering and JPEG
/// quantization, where raw white grain would be stripped wholesale.
fn smooth_grain(size: usize, seed: u64) -> ImageMatrix {
    let raw = ImageMatrix::from_fn(size, size, |r, c| grain(r, c, seed));
    let kernel = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
    let mut img = raw;
    for _ in 0..2 {
        let mut horiz = ImageMatrix::zeros(size, size);
        for r in 0..size {
            for c in 0..size {
                let mut acc = 0.0;
                for (k, &w) in kernel.iter().enumerate() {
                    acc += w * img[(r, (c + size + k - 2) % size)];
                }
                horiz[(r, c)] = acc;
            }
        }
        let mut out = ImageMatrix::zeros(size, size);
        for r in 0..size {
            for c in 0..size {
                let mut acc = 0.0;
                for (k, &w) in kernel.iter().enumerate() {
                    acc += w * horiz[((r + size + k - 2) % size, c)];
                }
                out[(r, c)] = acc;
            }
        }
        img = out;
    }
    // Renormalize to roughly unit peak contrast.
    let std = {
        let n = (size * size) as f64;
        let mean: f64 = img.as_slice().iter().sum::<f64>() / n;
        (img.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
    };
    img.scaled(0.29 / std.max(1e-9))
}

/// Remaps intensities so the histogram is (near-)uniform on [lo, hi]: each
/// pixel gets its rank quantile. Photographic test sets are roughly
/// equalized already, and a flat histogram keeps histogram-equalization
/// attacks from applying a violent tone curve.
fn uniformize(img: ImageMatrix, lo: f64, hi: f64) -> ImageMatrix {
    let mut order: Vec<usize> = (0..img.as_slice().len()).collect();
    order.sort_by(|&a, &b| {
        img.as_slice()[a]
            .partial_cmp(&img.as_slice()[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let n = order.len() as f64;
    let mut data = vec![0.0; order.len()];
    for (rank, &idx) in order.iter().enumerate() {
        data[idx] = (lo + rank as f64 / (n - 1.0) * (hi - lo)).round();
    }
    ImageMatrix::from_vec(img.rows(), img.cols(), data).expect("same dims")
}

/// Smooth radial vignette toward dark borders. Classic photographic test
/// images fade toward their frame; geometric attacks that zero-fill lost
/// border regions then barely disturb the content.
fn vignette(img: ImageMatrix, floor: f64) -> ImageMatrix {
    let rows = img.rows() as f64;
    let cols = img.cols() as f64;
    let cy = (rows - 1.0) / 2.0;
    let cx = (cols - 1.0) / 2.0;
    let r_inner = 0.50 * cy.min(cx);
    let r_outer = 1.04 * cy.min(cx);
    let mut out = img.clone();
    for r in 0..img.rows() {
        for c in 0..img.cols() {
            let d = (r as f64 - cy).abs().max((c as f64 - cx).abs());
            let t = ((d - r_inner) / (r_outer - r_inner)).clamp(0.0, 1.0);
            let w = 1.0 - t * t * (3.0 - 2.0 * t);
            out[(r, c)] = (floor + (out[(r, c)] - floor) * w).round();
        }
    }
    out
}

/// Generates one synthetic host at the given square size.
pub fn host(kind: SynthHost, size: usize) -> ImageMatrix {
    assert!(size >= 16, "synthetic hosts start at 16x16");
    let n = size as f64;
    let tau = std::f64::consts::TAU;
    let (base, grain_weight, grain_seed) = match kind {
        SynthHost::Smooth => (
            ImageMatrix::from_fn(size, size, |r, c| {
                let y = r as f64 / n;
                let x = c as f64 / n;
                (tau * (1.3 * x + 0.4)).sin() * (tau * (0.9 * y + 0.1)).cos()
                    + 0.7 * (tau * (2.1 * x - 1.7 * y)).sin()
                    + 0.5 * (tau * (0.6 * x + 2.4 * y + 0.25)).cos()
                    + 0.3 * (tau * 3.2 * ((x - 0.3).powi(2) + (y - 0.6).powi(2))).cos()
            }),
            0.16,
            0x30a7,
        ),
        SynthHost::Texture => (
            ImageMatrix::from_fn(size, size, |r, c| {
                let y = r as f64 / n;
                let x = c as f64 / n;
                (tau * (11.0 * x + 3.0 * y)).sin()
                    + 0.8 * (tau * (4.0 * x - 13.0 * y)).cos()
                    + 0.6 * (tau * (19.0 * (x + y))).sin() * (tau * 2.0 * y).cos()
                    + 1.5 * (tau * (1.1 * x + 0.7 * y)).cos()
            }),
            0.55,
            0x7e37,
        ),
        SynthHost::Structured => (
            ImageMatrix::from_fn(size, size, |r, c| {
                let y = r as f64 / n;
                let x = c as f64 / n;
                let block = {
                    let bx = (x * 5.0).floor() as i64;
                    let by = (y * 4.0).floor() as i64;
                    (mix((bx * 31 + by * 7) as u64 ^ 0xabcd) >> 11) as f64 / (1u64 << 53) as f64
                };
                let edge_soft = ((tau * 5.0 * x).sin() * (tau * 4.0 * y).sin()).tanh();
                2.0 * block + 0.8 * edge_soft + 1.2 * (x + y)
            }),
            0.55,
            0x51ab,
        ),
    };
    let raw = base.add(&smooth_grain(size, grain_seed).scaled(grain_weight));
    vignette(uniformize(raw, 16.0, 240.0), 20.0)
}

/// Synthetic gray-scale watermark logo built entirely from axis-aligned
/// structures (stripes, frames, blocks), so the image is an exactly
/// low-rank matrix (each term is an outer product of row and column
/// profiles). A low-rank mark concentrates its singular content in the
/// well-conditioned top modes of the embedding algebra, where it survives
/// attacks; high-rank marks waste energy on fragile near-null modes.
pub fn logo(size: usize) -> ImageMatrix {
    assert!(size >= 8, "logo starts at 8x8");
    let n = size as f64;
    // Deterministic coarse stripe patterns.
    let stripe = |i: usize, bands: f64, seed: u64| -> f64 {
        let band = (i as f64 / n * bands) as u64;
        if mix(seed ^ band.wrapping_mul(0x9e37)) & 1 == 0 {
            1.0
        } else {
            0.0
        }
    };
    // A dark field with sparse bright features keeps the mark's mean low:
    // the rank-one mean component dominates the embedding distortion, so a
    // bright logo costs several dB of transparency for no robustness gain.
    ImageMatrix::from_fn(size, size, |r, c| {
        let y = r as f64 / n;
        let x = c as f64 / n;
        let row_stripe = stripe(r, 7.0, 11);
        let col_stripe = stripe(c, 9.0, 23);
        let fine_row = stripe(r, 15.0, 37);
        let border_r = if y < 0.05 || y >= 0.95 { 1.0 } else { 0.0 };
        let border_c = if x < 0.05 || x >= 0.95 { 1.0 } else { 0.0 };
        let border = border_r + border_c - border_r * border_c;
        let center = if (0.38..0.62).contains(&y) && (0.38..0.62).contains(&x) {
            1.0
        } else {
            0.0
        };
        let corner_r = if !(0.22..0.78).contains(&y) { 1.0 } else { 0.0 };
        let corner_c = if !(0.22..0.78).contains(&x) { 1.0 } else { 0.0 };
        let corner = corner_r * corner_c;
        let v = 18.0
            + 52.0 * row_stripe * col_stripe
            + 36.0 * fine_row * col_stripe
            + 30.0 * row_stripe
            + 150.0 * border
            + 196.0 * center
            + 90.0 * corner;
        v.clamp(16.0, 240.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hosts_are_deterministic_and_in_range() {
        for kind in SynthHost::ALL {
            let a = host(kind, 128);
            let b = host(kind, 128);
            assert_eq!(a.as_slice(), b.as_slice(), "{kind:?} must be reproducible");
            for &v in a.as_slice() {
                assert!((16.0..=240.0).contains(&v), "{kind:?} value {v}");
                assert_eq!(v, v.round());
            }
        }
    }

    #[test]
    fn hosts_differ_from_each_other() {
        let a = host(SynthHost::Smooth, 64);
        let b = host(SynthHost::Texture, 64);
        assert!(a.max_abs_diff(&b) > 10.0);
    }

    #[test]
    fn logo_has_contrast() {
        let l = logo(256);
        let n = (l.rows() * l.cols()) as f64;
        let mean: f64 = l.as_slice().iter().sum::<f64>() / n;
        let var: f64 = l.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(var.sqrt() > 50.0, "logo std {}", var.sqrt());
    }
}
