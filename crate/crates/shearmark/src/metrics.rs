//! Image-quality and watermark-similarity metrics: MSE, PSNR, SSIM and
//! zero-mean normalized cross-correlation (NC).

use crate::error::{Error, Result};
use crate::matrix::ImageMatrix;

/// Peak value convention for PSNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Peak {
    /// Conventional fixed peak, 255 for 8-bit pipelines.
    Fixed(f64),
    /// Literal per-image maximum of the first argument.
    InputMax,
}

impl Default for Peak {
    fn default() -> Self {
        Peak::Fixed(255.0)
    }
}

/// All four metrics of one image pair.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MetricReport {
    pub mse: f64,
    pub psnr: f64,
    pub ssim: f64,
    pub nc: f64,
    /// Set when either NC input had zero variance; `nc` is then defined as 0.
    pub nc_degenerate: bool,
}

fn check_same_dims(x: &ImageMatrix, y: &ImageMatrix) -> Result<()> {
    if x.dims() != y.dims() {
        return Err(Error::InvalidInput(format!(
            "metric inputs differ in size: {}x{} vs {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    Ok(())
}

/// Mean squared error.
pub fn mse(x: &ImageMatrix, y: &ImageMatrix) -> Result<f64> {
    check_same_dims(x, y)?;
    let n = (x.rows() * x.cols()) as f64;
    let sum: f64 = x
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    Ok(sum / n)
}

/// Peak signal-to-noise ratio in dB; `+inf` for identical inputs.
pub fn psnr(x: &ImageMatrix, y: &ImageMatrix, peak: Peak) -> Result<f64> {
    let m = mse(x, y)?;
    let p = match peak {
        Peak::Fixed(v) => {
            if v <= 0.0 {
                return Err(Error::InvalidInput("psnr peak must be positive".into()));
            }
            v
        }
        Peak::InputMax => {
            let v = x.as_slice().iter().fold(f64::MIN, |a, &b| a.max(b));
            if v <= 0.0 {
                return Err(Error::InvalidInput(
                    "psnr literal peak requires a positive maximum".into(),
                ));
            }
            v
        }
    };
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (p * p / m).log10())
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const SSIM_L: f64 = 255.0;

fn ssim_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
        sum += *v;
    }
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

/// Separable valid-mode correlation with the 1-D SSIM kernel.
fn gaussian_valid(img: &ImageMatrix, kernel: &[f64]) -> ImageMatrix {
    let k = kernel.len();
    let rows = img.rows() - k + 1;
    let cols = img.cols() - k + 1;
    let mut horiz = ImageMatrix::zeros(img.rows(), cols);
    for r in 0..img.rows() {
        for c in 0..cols {
            let mut acc = 0.0;
            for (i, &w) in kernel.iter().enumerate() {
                acc += w * img[(r, c + i)];
            }
            horiz[(r, c)] = acc;
        }
    }
    let mut out = ImageMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            let mut acc = 0.0;
            for (i, &w) in kernel.iter().enumerate() {
                acc += w * horiz[(r + i, c)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// Mean structural similarity over 11×11 Gaussian windows (σ = 1.5),
/// stability constants K1 = 0.01, K2 = 0.03 on an 8-bit dynamic range.
pub fn ssim(x: &ImageMatrix, y: &ImageMatrix) -> Result<f64> {
    check_same_dims(x, y)?;
    if x.rows() < SSIM_WINDOW || x.cols() < SSIM_WINDOW {
        return Err(Error::InvalidInput(format!(
            "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW} images, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let kernel = ssim_kernel();
    let mu_x = gaussian_valid(x, &kernel);
    let mu_y = gaussian_valid(y, &kernel);
    let xx = gaussian_valid(&x.zip_map(x, |a, b| a * b), &kernel);
    let yy = gaussian_valid(&y.zip_map(y, |a, b| a * b), &kernel);
    let xy = gaussian_valid(&x.zip_map(y, |a, b| a * b), &kernel);

    let c1 = (SSIM_K1 * SSIM_L) * (SSIM_K1 * SSIM_L);
    let c2 = (SSIM_K2 * SSIM_L) * (SSIM_K2 * SSIM_L);
    let mut total = 0.0;
    let n = mu_x.rows() * mu_x.cols();
    for r in 0..mu_x.rows() {
        for c in 0..mu_x.cols() {
            let mx = mu_x[(r, c)];
            let my = mu_y[(r, c)];
            let var_x = xx[(r, c)] - mx * mx;
            let var_y = yy[(r, c)] - my * my;
            let cov = xy[(r, c)] - mx * my;
            let num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
            let den = (mx * mx + my * my + c1) * (var_x + var_y + c2);
            total += num / den;
        }
    }
    Ok(total / n as f64)
}

/// Zero-mean normalized cross-correlation (Pearson over all pixels).
///
/// Returns `(value, degenerate)`; a constant input has no defined
/// correlation, in which case the value is 0 and the flag is set.
pub fn nc_with_flag(w: &ImageMatrix, w_ext: &ImageMatrix) -> Result<(f64, bool)> {
    check_same_dims(w, w_ext)?;
    let n = (w.rows() * w.cols()) as f64;
    let mean_a: f64 = w.as_slice().iter().sum::<f64>() / n;
    let mean_b: f64 = w_ext.as_slice().iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&a, &b) in w.as_slice().iter().zip(w_ext.as_slice()) {
        let da = a - mean_a;
        let db = b - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Ok((0.0, true));
    }
    Ok((cov / (var_a.sqrt() * var_b.sqrt()), false))
}

/// [`nc_with_flag`] without the degeneracy flag.
pub fn nc(w: &ImageMatrix, w_ext: &ImageMatrix) -> Result<f64> {
    nc_with_flag(w, w_ext).map(|(v, _)| v)
}

/// Computes all four metrics of `y` against the reference `x`.
pub fn report(x: &ImageMatrix, y: &ImageMatrix, peak: Peak) -> Result<MetricReport> {
    let (nc_val, degenerate) = nc_with_flag(x, y)?;
    Ok(MetricReport {
        mse: mse(x, y)?,
        psnr: psnr(x, y, peak)?,
        ssim: ssim(x, y)?,
        nc: nc_val,
        nc_degenerate: degenerate,
    })
}
