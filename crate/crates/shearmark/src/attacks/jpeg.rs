//! Baseline JPEG compression as an attack: 8×8 block DCT, quality-scaled
//! quantization of the standard luminance table, dequantization and inverse
//! DCT. The entropy-coding stage is lossless and therefore skipped; all of
//! JPEG's distortion comes from the quantizer, and doing it in-process keeps
//! the attack bit-deterministic across platforms.

use crate::matrix::ImageMatrix;

/// Standard luminance quantization table (quality 50), zig-zag-free layout.
const BASE_TABLE: [u32; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Quality-scaled table per the common libjpeg rule.
fn scaled_table(quality: u32) -> [f64; 64] {
    let q = quality.clamp(1, 100);
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0.0; 64];
    for (o, &b) in out.iter_mut().zip(&BASE_TABLE) {
        *o = ((b * scale + 50) / 100).clamp(1, 255) as f64;
    }
    out
}

/// Orthonormal 8-point DCT-II basis: `C[u][x]`.
fn dct_basis() -> [[f64; 8]; 8] {
    let mut c = [[0.0; 8]; 8];
    for (u, row) in c.iter_mut().enumerate() {
        let norm = if u == 0 {
            (1.0f64 / 8.0).sqrt()
        } else {
            (2.0f64 / 8.0).sqrt()
        };
        for (x, v) in row.iter_mut().enumerate() {
            *v = norm * ((2.0 * x as f64 + 1.0) * u as f64 * std::f64::consts::PI / 16.0).cos();
        }
    }
    c
}

/// Encode-decode roundtrip at the given quality. The image is padded to a
/// block multiple by edge replication and cropped back afterwards.
pub fn quantization_roundtrip(img: &ImageMatrix, quality: u32) -> ImageMatrix {
    let (rows, cols) = img.dims();
    let pr = rows.div_ceil(8) * 8;
    let pc = cols.div_ceil(8) * 8;
    let table = scaled_table(quality);
    let basis = dct_basis();

    let padded = ImageMatrix::from_fn(pr, pc, |r, c| {
        img[(r.min(rows - 1), c.min(cols - 1))] - 128.0
    });

    let mut out = ImageMatrix::zeros(pr, pc);
    let mut block = [[0.0f64; 8]; 8];
    let mut coef = [[0.0f64; 8]; 8];
    for br in (0..pr).step_by(8) {
        for bc in (0..pc).step_by(8) {
            for y in 0..8 {
                for x in 0..8 {
                    block[y][x] = padded[(br + y, bc + x)];
                }
            }
            // F = C · f · Cᵀ
            for u in 0..8 {
                for v in 0..8 {
                    let mut acc = 0.0;
                    for y in 0..8 {
                        for x in 0..8 {
                            acc += basis[u][y] * basis[v][x] * block[y][x];
                        }
                    }
                    let q = table[u * 8 + v];
                    coef[u][v] = (acc / q).round() * q;
                }
            }
            // f = Cᵀ · F · C
            for y in 0..8 {
                for x in 0..8 {
                    let mut acc = 0.0;
                    for u in 0..8 {
                        for v in 0..8 {
                            acc += basis[u][y] * basis[v][x] * coef[u][v];
                        }
                    }
                    out[(br + y, bc + x)] = acc + 128.0;
                }
            }
        }
    }

    ImageMatrix::from_fn(rows, cols, |r, c| out[(r, c)].clamp(0.0, 255.0))
}
