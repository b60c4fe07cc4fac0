//! 1-level separable 2-D discrete wavelet transform with periodic extension.
//!
//! Analysis convention: `low[i] = Σ_k h[k]·x[(2i + k) mod N]`, i.e. periodic
//! correlation at even phases. For an orthonormal filter pair the transform
//! matrix is orthogonal, so synthesis is its transpose and reconstruction is
//! exact. Inputs must have even dimensions; odd sizes are rejected because the
//! subband/watermark dimension arithmetic downstream assumes exact halving.

use crate::error::{Error, Result};
use crate::matrix::ImageMatrix;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// An analysis filter pair (scaling + wavelet). Synthesis uses the transpose
/// of the analysis operator, which for orthonormal pairs is its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilterPair {
    name: String,
    scaling: Vec<f64>,
    wavelet: Vec<f64>,
}

impl WaveletFilterPair {
    /// Orthonormal Haar pair, the default: shortest support, no ringing.
    pub fn haar() -> Self {
        let pair = Self {
            name: "haar".to_string(),
            scaling: vec![SQRT_HALF, SQRT_HALF],
            wavelet: vec![SQRT_HALF, -SQRT_HALF],
        };
        pair.verify().expect("haar pair is orthonormal");
        pair
    }

    /// Orthonormal Daubechies-4 pair.
    pub fn daubechies4() -> Self {
        let s3 = 3.0f64.sqrt();
        let norm = 4.0 * 2.0f64.sqrt();
        let h = [
            (1.0 + s3) / norm,
            (3.0 + s3) / norm,
            (3.0 - s3) / norm,
            (1.0 - s3) / norm,
        ];
        // Quadrature mirror: g[k] = (-1)^k h[L-1-k].
        let g: Vec<f64> = (0..4)
            .map(|k| if k % 2 == 0 { h[3 - k] } else { -h[3 - k] })
            .collect();
        let pair = Self {
            name: "db4".to_string(),
            scaling: h.to_vec(),
            wavelet: g,
        };
        pair.verify().expect("db4 pair is orthonormal");
        pair
    }

    /// Looks up a filter pair by name (`haar` or `db4`).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "haar" => Ok(Self::haar()),
            "db4" | "daubechies4" => Ok(Self::daubechies4()),
            other => Err(Error::InvalidConfig(format!(
                "unknown wavelet '{other}' (expected haar or db4)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }

    pub fn wavelet(&self) -> &[f64] {
        &self.wavelet
    }

    /// Numerical construction check: unit scaling norm and perfect
    /// reconstruction on a probe signal.
    fn verify(&self) -> Result<()> {
        let norm: f64 = self.scaling.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "scaling filter of '{}' is not unit norm",
                self.name
            )));
        }
        let probe: Vec<f64> = (0..8).map(|i| ((i * i + 3) % 11) as f64 - 5.0).collect();
        let (lo, hi) = analyze_1d(&probe, self);
        let back = synthesize_1d(&lo, &hi, self);
        let err = probe
            .iter()
            .zip(&back)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if err > 1e-10 {
            return Err(Error::InvalidConfig(format!(
                "filter pair '{}' fails perfect reconstruction (err {err:.3e})",
                self.name
            )));
        }
        Ok(())
    }
}

/// The four subbands of one decomposition level. For an even M×N input each
/// subband is (M/2)×(N/2) and all four share identical dimensions.
#[derive(Debug, Clone)]
pub struct SubbandSet {
    pub ll: ImageMatrix,
    pub lh: ImageMatrix,
    pub hl: ImageMatrix,
    pub hh: ImageMatrix,
    pub filter: WaveletFilterPair,
}

impl SubbandSet {
    fn check_consistent(&self) -> Result<()> {
        let d = self.ll.dims();
        if self.lh.dims() != d || self.hl.dims() != d || self.hh.dims() != d {
            return Err(Error::InvalidInput(
                "subbands do not share identical dimensions".to_string(),
            ));
        }
        Ok(())
    }
}

fn analyze_1d(x: &[f64], filter: &WaveletFilterPair) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let half = n / 2;
    let mut lo = vec![0.0; half];
    let mut hi = vec![0.0; half];
    for i in 0..half {
        let mut a = 0.0;
        let mut b = 0.0;
        for (k, (&h, &g)) in filter.scaling.iter().zip(&filter.wavelet).enumerate() {
            let v = x[(2 * i + k) % n];
            a += h * v;
            b += g * v;
        }
        lo[i] = a;
        hi[i] = b;
    }
    (lo, hi)
}

fn synthesize_1d(lo: &[f64], hi: &[f64], filter: &WaveletFilterPair) -> Vec<f64> {
    let half = lo.len();
    let n = 2 * half;
    let mut x = vec![0.0; n];
    for i in 0..half {
        for (k, (&h, &g)) in filter.scaling.iter().zip(&filter.wavelet).enumerate() {
            x[(2 * i + k) % n] += h * lo[i] + g * hi[i];
        }
    }
    x
}

/// Filters every row, splitting the image into horizontal low/high halves.
fn analyze_rows(img: &ImageMatrix, filter: &WaveletFilterPair) -> (ImageMatrix, ImageMatrix) {
    let half = img.cols() / 2;
    let mut lo = ImageMatrix::zeros(img.rows(), half);
    let mut hi = ImageMatrix::zeros(img.rows(), half);
    for r in 0..img.rows() {
        let (l, h) = analyze_1d(img.row(r), filter);
        for c in 0..half {
            lo[(r, c)] = l[c];
            hi[(r, c)] = h[c];
        }
    }
    (lo, hi)
}

fn analyze_cols(img: &ImageMatrix, filter: &WaveletFilterPair) -> (ImageMatrix, ImageMatrix) {
    let half = img.rows() / 2;
    let mut lo = ImageMatrix::zeros(half, img.cols());
    let mut hi = ImageMatrix::zeros(half, img.cols());
    let mut column = vec![0.0; img.rows()];
    for c in 0..img.cols() {
        for r in 0..img.rows() {
            column[r] = img[(r, c)];
        }
        let (l, h) = analyze_1d(&column, filter);
        for r in 0..half {
            lo[(r, c)] = l[r];
            hi[(r, c)] = h[r];
        }
    }
    (lo, hi)
}

fn synthesize_cols(lo: &ImageMatrix, hi: &ImageMatrix, filter: &WaveletFilterPair) -> ImageMatrix {
    let rows = lo.rows() * 2;
    let mut out = ImageMatrix::zeros(rows, lo.cols());
    let mut l = vec![0.0; lo.rows()];
    let mut h = vec![0.0; lo.rows()];
    for c in 0..lo.cols() {
        for r in 0..lo.rows() {
            l[r] = lo[(r, c)];
            h[r] = hi[(r, c)];
        }
        let x = synthesize_1d(&l, &h, filter);
        for r in 0..rows {
            out[(r, c)] = x[r];
        }
    }
    out
}

fn synthesize_rows(lo: &ImageMatrix, hi: &ImageMatrix, filter: &WaveletFilterPair) -> ImageMatrix {
    let cols = lo.cols() * 2;
    let mut out = ImageMatrix::zeros(lo.rows(), cols);
    for r in 0..lo.rows() {
        let x = synthesize_1d(lo.row(r), hi.row(r), filter);
        for c in 0..cols {
            out[(r, c)] = x[c];
        }
    }
    out
}

/// Decomposes an even-sized image into its four subbands.
///
/// The first subband letter names the filter applied along the rows, the
/// second the filter applied down the columns, so `lh` is row-lowpassed and
/// column-highpassed.
pub fn dwt_forward(image: &ImageMatrix, filter: &WaveletFilterPair) -> Result<SubbandSet> {
    image.ensure_image_dims("dwt input")?;
    image.ensure_finite("dwt input")?;
    if image.rows() % 2 != 0 || image.cols() % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "dwt requires even dimensions, got {}x{}",
            image.rows(),
            image.cols()
        )));
    }
    let (lx, hx) = analyze_rows(image, filter);
    let (ll, lh) = analyze_cols(&lx, filter);
    let (hl, hh) = analyze_cols(&hx, filter);
    Ok(SubbandSet {
        ll,
        lh,
        hl,
        hh,
        filter: filter.clone(),
    })
}

/// Reconstructs the unique image whose forward transform yields `bands`.
pub fn dwt_inverse(bands: &SubbandSet) -> Result<ImageMatrix> {
    bands.check_consistent()?;
    let lx = synthesize_cols(&bands.ll, &bands.lh, &bands.filter);
    let hx = synthesize_cols(&bands.hl, &bands.hh, &bands.filter);
    Ok(synthesize_rows(&lx, &hx, &bands.filter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Deterministic pseudo-random image for tests.
    fn test_image(rows: usize, cols: usize, seed: u64) -> ImageMatrix {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        ImageMatrix::from_fn(rows, cols, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 255.0
        })
    }

    /// Independent oracle: direct 2-D periodic correlation with the separable
    /// kernel `row_f ⊗ col_f`, evaluated at even phases.
    fn direct_subband(img: &ImageMatrix, row_f: &[f64], col_f: &[f64]) -> ImageMatrix {
        let (m, n) = img.dims();
        ImageMatrix::from_fn(m / 2, n / 2, |i, j| {
            let mut acc = 0.0;
            for (kr, &cf) in col_f.iter().enumerate() {
                for (kc, &rf) in row_f.iter().enumerate() {
                    acc += cf * rf * img[((2 * i + kr) % m, (2 * j + kc) % n)];
                }
            }
            acc
        })
    }

    #[test]
    fn forward_matches_direct_convolution_oracle() {
        let img = test_image(64, 64, 7);
        for filter in [WaveletFilterPair::haar(), WaveletFilterPair::daubechies4()] {
            let bands = dwt_forward(&img, &filter).unwrap();
            let h = filter.scaling();
            let g = filter.wavelet();
            assert!(bands.ll.max_abs_diff(&direct_subband(&img, h, h)) < 1e-12);
            assert!(bands.lh.max_abs_diff(&direct_subband(&img, h, g)) < 1e-12);
            assert!(bands.hl.max_abs_diff(&direct_subband(&img, g, h)) < 1e-12);
            assert!(bands.hh.max_abs_diff(&direct_subband(&img, g, g)) < 1e-12);
        }
    }

    #[test]
    fn subband_dimensions_halve() {
        let img = test_image(512, 512, 3);
        let bands = dwt_forward(&img, &WaveletFilterPair::haar()).unwrap();
        assert_eq!(bands.ll.dims(), (256, 256));
        assert_eq!(bands.lh.dims(), (256, 256));
        assert_eq!(bands.hl.dims(), (256, 256));
        assert_eq!(bands.hh.dims(), (256, 256));
    }

    #[test]
    fn constant_image_haar() {
        let c = 37.5;
        let img = ImageMatrix::filled(16, 16, c);
        let bands = dwt_forward(&img, &WaveletFilterPair::haar()).unwrap();
        for v in bands.ll.as_slice() {
            assert!((v - 2.0 * c).abs() < 1e-12);
        }
        assert!(bands.lh.max_abs() < 1e-12);
        assert!(bands.hl.max_abs() < 1e-12);
        assert!(bands.hh.max_abs() < 1e-12);

        // Inverse of the constant-LL band set recovers the constant image.
        let back = dwt_inverse(&bands).unwrap();
        assert!(back.max_abs_diff(&img) < 1e-12);
    }

    #[test]
    fn perfect_reconstruction_512() {
        let img = test_image(512, 512, 11);
        for filter in [WaveletFilterPair::haar(), WaveletFilterPair::daubechies4()] {
            let bands = dwt_forward(&img, &filter).unwrap();
            let back = dwt_inverse(&bands).unwrap();
            assert!(back.max_abs_diff(&img) < 1e-10 * img.max_abs());
        }
    }

    #[test]
    fn energy_conservation() {
        let img = test_image(128, 128, 5);
        let total: f64 = img.as_slice().iter().map(|v| v * v).sum();
        for filter in [WaveletFilterPair::haar(), WaveletFilterPair::daubechies4()] {
            let bands = dwt_forward(&img, &filter).unwrap();
            let sub: f64 = [&bands.ll, &bands.lh, &bands.hl, &bands.hh]
                .iter()
                .flat_map(|b| b.as_slice())
                .map(|v| v * v)
                .sum();
            assert!((sub - total).abs() < 1e-9 * total);
        }
    }

    #[test]
    fn linearity() {
        let x = test_image(64, 64, 21);
        let y = test_image(64, 64, 22);
        let filter = WaveletFilterPair::haar();
        let combo = x.scaled(2.5).add(&y.scaled(-1.25));
        let bx = dwt_forward(&x, &filter).unwrap();
        let by = dwt_forward(&y, &filter).unwrap();
        let bc = dwt_forward(&combo, &filter).unwrap();
        let expect_ll = bx.ll.scaled(2.5).add(&by.ll.scaled(-1.25));
        assert!(bc.ll.max_abs_diff(&expect_ll) < 1e-10 * expect_ll.max_abs().max(1.0));
        let expect_hh = bx.hh.scaled(2.5).add(&by.hh.scaled(-1.25));
        assert!(bc.hh.max_abs_diff(&expect_hh) < 1e-10 * bc.hh.max_abs().max(1.0));
    }

    #[test]
    fn all_zero_bands_give_zero_image() {
        let z = ImageMatrix::zeros(8, 8);
        let bands = SubbandSet {
            ll: z.clone(),
            lh: z.clone(),
            hl: z.clone(),
            hh: z,
            filter: WaveletFilterPair::haar(),
        };
        let img = dwt_inverse(&bands).unwrap();
        assert_eq!(img.max_abs(), 0.0);
    }

    #[test]
    fn odd_dimensions_rejected() {
        let img = ImageMatrix::zeros(15, 16);
        assert!(matches!(
            dwt_forward(&img, &WaveletFilterPair::haar()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn tiny_dimensions_rejected() {
        let img = ImageMatrix::zeros(1, 8);
        assert!(dwt_forward(&img, &WaveletFilterPair::haar()).is_err());
    }

    #[test]
    fn mismatched_subbands_rejected() {
        let bands = SubbandSet {
            ll: ImageMatrix::zeros(4, 4),
            lh: ImageMatrix::zeros(4, 4),
            hl: ImageMatrix::zeros(4, 2),
            hh: ImageMatrix::zeros(4, 4),
            filter: WaveletFilterPair::haar(),
        };
        assert!(dwt_inverse(&bands).is_err());
    }

    #[test]
    fn unknown_filter_name_rejected() {
        assert!(WaveletFilterPair::by_name("sym8").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn prop_perfect_reconstruction(seed in 0u64..1000, size_pow in 2u32..6) {
            let n = 1usize << size_pow;
            let img = test_image(n, n, seed);
            for filter in [WaveletFilterPair::haar(), WaveletFilterPair::daubechies4()] {
                let back = dwt_inverse(&dwt_forward(&img, &filter).unwrap()).unwrap();
                prop_assert!(back.max_abs_diff(&img) < 1e-10 * img.max_abs().max(1.0));
            }
        }
    }
}
