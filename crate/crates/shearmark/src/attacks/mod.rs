//! The attack catalog: image-processing and geometric distortions applied to
//! 8-bit watermarked images, with deterministic seeding and known-parameter
//! re-registration for the geometric kinds.
//!
//! Eighteen attack families are supported: average filter (AF), Gaussian
//! low-pass filter (GP), median filter (MF), Gaussian noise (GN), speckle
//! noise (SN), salt & pepper noise (SP), blur (BL), gamma correction (GC),
//! histogram equalization (HE), motion blur (MB), sharpening (SH), JPEG
//! compression (JPEG), crop (CR), rotation (RO), scaling (SC), translation
//! (TR), shearing (SE) and flip (FL).
//!
//! Noise magnitudes follow the unit-interval convention: variances and
//! densities refer to intensities normalized to [0, 1]. Every attack returns
//! an image of the input's dimensions, quantized back to 8 bits; geometric
//! attacks render onto the original canvas with zero fill.

mod jpeg;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};
use crate::matrix::ImageMatrix;
use crate::resample;

/// Mirror axis of a flip attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipAxis {
    /// Left-right mirror.
    Horizontal,
    /// Top-bottom mirror.
    Vertical,
}

/// One fully parameterized attack.
#[derive(Debug, Clone, PartialEq)]
pub enum AttackSpec {
    Average { size: usize },
    GaussianFilter { size: usize },
    Median { size: usize },
    GaussianNoise { mean: f64, variance: f64, seed: Option<u64> },
    SpeckleNoise { variance: f64, seed: Option<u64> },
    SaltPepper { density: f64, seed: Option<u64> },
    Blur { sigma: f64 },
    GammaCorrection { gamma: f64 },
    HistogramEqualization,
    MotionBlur { length: usize, angle_degrees: f64 },
    Sharpen { amount: f64 },
    Jpeg { quality: u32 },
    Crop { keep_area: f64 },
    Rotate { degrees: f64 },
    Scale { factor: f64 },
    Translate { dx: usize, dy: usize },
    Shear { x: f64, y: f64 },
    Flip { axis: FlipAxis },
}

impl AttackSpec {
    /// Stable two-to-four letter code used in catalogs and reports.
    pub fn kind_code(&self) -> &'static str {
        match self {
            AttackSpec::Average { .. } => "AF",
            AttackSpec::GaussianFilter { .. } => "GP",
            AttackSpec::Median { .. } => "MF",
            AttackSpec::GaussianNoise { .. } => "GN",
            AttackSpec::SpeckleNoise { .. } => "SN",
            AttackSpec::SaltPepper { .. } => "SP",
            AttackSpec::Blur { .. } => "BL",
            AttackSpec::GammaCorrection { .. } => "GC",
            AttackSpec::HistogramEqualization => "HE",
            AttackSpec::MotionBlur { .. } => "MB",
            AttackSpec::Sharpen { .. } => "SH",
            AttackSpec::Jpeg { .. } => "JPEG",
            AttackSpec::Crop { .. } => "CR",
            AttackSpec::Rotate { .. } => "RO",
            AttackSpec::Scale { .. } => "SC",
            AttackSpec::Translate { .. } => "TR",
            AttackSpec::Shear { .. } => "SE",
            AttackSpec::Flip { .. } => "FL",
        }
    }

    /// Canonical parameter string (no kind, no seed).
    pub fn params_string(&self) -> String {
        match self {
            AttackSpec::Average { size }
            | AttackSpec::GaussianFilter { size }
            | AttackSpec::Median { size } => format!("{size}"),
            AttackSpec::GaussianNoise { mean, variance, .. } => format!("{mean},{variance}"),
            AttackSpec::SpeckleNoise { variance, .. } => format!("{variance}"),
            AttackSpec::SaltPepper { density, .. } => format!("{density}"),
            AttackSpec::Blur { sigma } => format!("{sigma}"),
            AttackSpec::GammaCorrection { gamma } => format!("{gamma}"),
            AttackSpec::HistogramEqualization => String::new(),
            AttackSpec::MotionBlur { length, angle_degrees } => {
                format!("{length},{angle_degrees}")
            }
            AttackSpec::Sharpen { amount } => format!("{amount}"),
            AttackSpec::Jpeg { quality } => format!("{quality}"),
            AttackSpec::Crop { keep_area } => format!("{keep_area}"),
            AttackSpec::Rotate { degrees } => format!("{degrees}"),
            AttackSpec::Scale { factor } => format!("{factor}"),
            AttackSpec::Translate { dx, dy } => format!("{dx},{dy}"),
            AttackSpec::Shear { x, y } => format!("{x},{y}"),
            AttackSpec::Flip { axis } => match axis {
                FlipAxis::Horizontal => "h".to_string(),
                FlipAxis::Vertical => "v".to_string(),
            },
        }
    }

    /// Geometric attacks admit known-parameter re-registration.
    pub fn is_geometric(&self) -> bool {
        matches!(
            self,
            AttackSpec::Rotate { .. }
                | AttackSpec::Scale { .. }
                | AttackSpec::Translate { .. }
                | AttackSpec::Shear { .. }
                | AttackSpec::Flip { .. }
        )
    }

    /// Noise attacks draw from a seeded generator.
    pub fn is_noise(&self) -> bool {
        matches!(
            self,
            AttackSpec::GaussianNoise { .. }
                | AttackSpec::SpeckleNoise { .. }
                | AttackSpec::SaltPepper { .. }
        )
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            AttackSpec::GaussianNoise { seed, .. }
            | AttackSpec::SpeckleNoise { seed, .. }
            | AttackSpec::SaltPepper { seed, .. } => *seed,
            _ => None,
        }
    }

    /// Copy with the seed filled in (noise kinds only; others unchanged).
    pub fn with_seed(&self, new_seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            AttackSpec::GaussianNoise { seed, .. }
            | AttackSpec::SpeckleNoise { seed, .. }
            | AttackSpec::SaltPepper { seed, .. } => *seed = Some(new_seed),
            _ => {}
        }
        out
    }

    /// Parameter range validation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match *self {
            AttackSpec::Average { size }
            | AttackSpec::GaussianFilter { size }
            | AttackSpec::Median { size } => {
                if size < 3 || size > 31 || size % 2 == 0 {
                    return bad(format!("filter size {size} must be odd and in 3..=31"));
                }
            }
            AttackSpec::GaussianNoise { mean, variance, .. } => {
                if !mean.is_finite() || mean.abs() > 1.0 {
                    return bad(format!("GN mean {mean} outside [-1, 1]"));
                }
                if !(variance >= 0.0) || variance > 10.0 {
                    return bad(format!("GN variance {variance} outside [0, 10]"));
                }
            }
            AttackSpec::SpeckleNoise { variance, .. } => {
                if !(variance >= 0.0) || variance > 10.0 {
                    return bad(format!("SN variance {variance} outside [0, 10]"));
                }
            }
            AttackSpec::SaltPepper { density, .. } => {
                if !(0.0..=1.0).contains(&density) {
                    return bad(format!("SP density {density} outside [0, 1]"));
                }
            }
            AttackSpec::Blur { sigma } => {
                if !(sigma > 0.0) || sigma > 50.0 {
                    return bad(format!("BL sigma {sigma} outside (0, 50]"));
                }
            }
            AttackSpec::GammaCorrection { gamma } => {
                if !(gamma > 0.0) || gamma > 10.0 {
                    return bad(format!("GC gamma {gamma} outside (0, 10]"));
                }
            }
            AttackSpec::HistogramEqualization => {}
            AttackSpec::MotionBlur { length, angle_degrees } => {
                if length == 0 || length > 64 {
                    return bad(format!("MB length {length} outside 1..=64"));
                }
                if !angle_degrees.is_finite() {
                    return bad("MB angle must be finite".into());
                }
            }
            AttackSpec::Sharpen { amount } => {
                if !(amount >= 0.0) || amount > 10.0 {
                    return bad(format!("SH amount {amount} outside [0, 10]"));
                }
            }
            AttackSpec::Jpeg { quality } => {
                if !(1..=100).contains(&quality) {
                    return bad(format!("JPEG quality {quality} outside 1..=100"));
                }
            }
            AttackSpec::Crop { keep_area } => {
                if !(keep_area > 0.0) || keep_area > 1.0 {
                    return bad(format!("CR retained area {keep_area} outside (0, 1]"));
                }
            }
            AttackSpec::Rotate { degrees } => {
                if !degrees.is_finite() {
                    return bad("RO angle must be finite".into());
                }
            }
            AttackSpec::Scale { factor } => {
                if !(factor > 0.0) || factor > 1.0 {
                    return bad(format!("SC factor {factor} outside (0, 1]"));
                }
            }
            AttackSpec::Translate { .. } => {}
            AttackSpec::Shear { x, y } => {
                if !x.is_finite() || !y.is_finite() || x.abs() > 2.0 || y.abs() > 2.0 {
                    return bad(format!("SE offsets ({x},{y}) outside [-2, 2]"));
                }
                if (1.0 - x * y).abs() < 0.1 {
                    return bad(format!("SE offsets ({x},{y}) are near-singular"));
                }
            }
            AttackSpec::Flip { .. } => {}
        }
        Ok(())
    }
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind_code())?;
        let params = self.params_string();
        if !params.is_empty() {
            write!(f, " {params}")?;
        }
        if let Some(seed) = self.seed() {
            write!(f, " seed={seed}")?;
        }
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::InvalidSpec(format!("bad {what} '{tok}'")))
}

impl FromStr for AttackSpec {
    type Err = Error;

    /// Grammar: `KIND param[,param…] [seed=N]`, e.g. `SP 0.04 seed=7`.
    fn from_str(line: &str) -> Result<Self> {
        let mut tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(Error::InvalidSpec("empty attack spec".into()));
        }
        let mut seed = None;
        if let Some(last) = tokens.last() {
            if let Some(num) = last.strip_prefix("seed=") {
                seed = Some(parse_num::<u64>(num, "seed")?);
                tokens.pop();
            }
        }
        let kind = tokens[0].to_ascii_uppercase();
        if tokens.len() > 2 {
            return Err(Error::InvalidSpec(format!(
                "too many tokens in '{line}' (parameters are comma-separated)"
            )));
        }
        let params: Vec<&str> = tokens
            .get(1)
            .map(|p| p.split(',').collect())
            .unwrap_or_default();
        let argc = params.len();
        let need = |n: usize| -> Result<()> {
            if argc != n {
                return Err(Error::InvalidSpec(format!(
                    "{kind} expects {n} parameter(s), got {argc}"
                )));
            }
            Ok(())
        };

        let spec = match kind.as_str() {
            "AF" => {
                need(1)?;
                AttackSpec::Average {
                    size: parse_num(params[0], "filter size")?,
                }
            }
            "GP" => {
                need(1)?;
                AttackSpec::GaussianFilter {
                    size: parse_num(params[0], "filter size")?,
                }
            }
            "MF" => {
                need(1)?;
                AttackSpec::Median {
                    size: parse_num(params[0], "filter size")?,
                }
            }
            "GN" => {
                // Either "GN var" or "GN mean,var".
                let (mean, variance) = match argc {
                    1 => (0.0, parse_num(params[0], "variance")?),
                    2 => (
                        parse_num(params[0], "mean")?,
                        parse_num(params[1], "variance")?,
                    ),
                    _ => return Err(Error::InvalidSpec("GN expects 1 or 2 parameters".into())),
                };
                AttackSpec::GaussianNoise { mean, variance, seed }
            }
            "SN" => {
                need(1)?;
                AttackSpec::SpeckleNoise {
                    variance: parse_num(params[0], "variance")?,
                    seed,
                }
            }
            "SP" => {
                need(1)?;
                AttackSpec::SaltPepper {
                    density: parse_num(params[0], "density")?,
                    seed,
                }
            }
            "BL" => {
                need(1)?;
                AttackSpec::Blur {
                    sigma: parse_num(params[0], "sigma")?,
                }
            }
            "GC" => {
                // Bare "GC" uses the default gamma 0.8.
                let gamma = match argc {
                    0 => 0.8,
                    1 => parse_num(params[0], "gamma")?,
                    _ => return Err(Error::InvalidSpec("GC expects 0 or 1 parameters".into())),
                };
                AttackSpec::GammaCorrection { gamma }
            }
            "HE" => {
                need(0)?;
                AttackSpec::HistogramEqualization
            }
            "MB" => {
                need(2)?;
                AttackSpec::MotionBlur {
                    length: parse_num(params[0], "length")?,
                    angle_degrees: parse_num(params[1], "angle")?,
                }
            }
            "SH" => {
                need(1)?;
                AttackSpec::Sharpen {
                    amount: parse_num(params[0], "amount")?,
                }
            }
            "JPEG" => {
                need(1)?;
                AttackSpec::Jpeg {
                    quality: parse_num(params[0], "quality")?,
                }
            }
            "CR" => {
                need(1)?;
                let v: f64 = parse_num(params[0], "retained area")?;
                // Values above 1 are percentages.
                let keep_area = if v > 1.0 { v / 100.0 } else { v };
                AttackSpec::Crop { keep_area }
            }
            "RO" => {
                need(1)?;
                AttackSpec::Rotate {
                    degrees: parse_num(params[0], "angle")?,
                }
            }
            "SC" => {
                need(1)?;
                AttackSpec::Scale {
                    factor: parse_num(params[0], "factor")?,
                }
            }
            "TR" => {
                need(2)?;
                AttackSpec::Translate {
                    dx: parse_num(params[0], "dx")?,
                    dy: parse_num(params[1], "dy")?,
                }
            }
            "SE" => {
                need(2)?;
                AttackSpec::Shear {
                    x: parse_num(params[0], "x shear")?,
                    y: parse_num(params[1], "y shear")?,
                }
            }
            "FL" => {
                need(1)?;
                let axis = match params[0] {
                    "h" | "horizontal" => FlipAxis::Horizontal,
                    "v" | "vertical" => FlipAxis::Vertical,
                    other => {
                        return Err(Error::InvalidSpec(format!(
                            "FL axis '{other}' (expected h or v)"
                        )))
                    }
                };
                AttackSpec::Flip { axis }
            }
            other => {
                return Err(Error::InvalidSpec(format!("unknown attack kind '{other}'")));
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses a catalog: one attack per line, `#` comments and blank lines
/// ignored. An empty file is an empty catalog.
pub fn parse_catalog(text: &str) -> Result<Vec<AttackSpec>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let spec: AttackSpec = line.parse().map_err(|e| Error::CatalogParse {
            line: i + 1,
            msg: format!("{e}"),
        })?;
        out.push(spec);
    }
    Ok(out)
}

/// Reads and parses a catalog file.
pub fn parse_catalog_file(path: &Path) -> Result<Vec<AttackSpec>> {
    let text = std::fs::read_to_string(path)?;
    parse_catalog(&text)
}

/// The bundled default catalog covering every attack family at its bench
/// parameter grid.
pub fn default_catalog() -> Vec<AttackSpec> {
    parse_catalog(DEFAULT_CATALOG_TEXT).expect("bundled catalog parses")
}

/// Text of the bundled catalog, usable as a starting point for custom grids.
pub const DEFAULT_CATALOG_TEXT: &str = include_str!("../../data/default_attacks.txt");

fn check_8bit(image: &ImageMatrix) -> Result<()> {
    image.ensure_image_dims("attack input")?;
    image.ensure_finite("attack input")?;
    let ok = image.as_slice().iter().all(|&v| (0.0..=255.0).contains(&v));
    if !ok {
        return Err(Error::InvalidInput(
            "attack input must be in the 8-bit range [0, 255]".into(),
        ));
    }
    Ok(())
}

/// Applies an attack to an 8-bit image. Output has the same dimensions and is
/// quantized back to 8 bits; identical `(image, spec, seed)` triples yield
/// identical bytes.
pub fn apply_attack(image: &ImageMatrix, spec: &AttackSpec) -> Result<ImageMatrix> {
    spec.validate()?;
    check_8bit(image)?;
    let out = match *spec {
        AttackSpec::Average { size } => box_filter(image, size),
        AttackSpec::GaussianFilter { size } => {
            // Kernel width convention: sigma grows with the window size.
            let sigma = 0.3 * ((size as f64 - 1.0) / 2.0 - 1.0) + 0.8;
            gaussian_blur(image, sigma, Some(size))
        }
        AttackSpec::Median { size } => median_filter(image, size),
        AttackSpec::GaussianNoise { mean, variance, seed } => {
            let seed = require_seed(seed)?;
            gaussian_noise(image, mean, variance, seed)
        }
        AttackSpec::SpeckleNoise { variance, seed } => {
            let seed = require_seed(seed)?;
            speckle_noise(image, variance, seed)
        }
        AttackSpec::SaltPepper { density, seed } => {
            let seed = require_seed(seed)?;
            salt_pepper(image, density, seed)
        }
        AttackSpec::Blur { sigma } => gaussian_blur(image, sigma, None),
        AttackSpec::GammaCorrection { gamma } => {
            image.map(|v| 255.0 * (v / 255.0).powf(gamma))
        }
        AttackSpec::HistogramEqualization => histogram_equalize(image),
        AttackSpec::MotionBlur { length, angle_degrees } => {
            motion_blur(image, length, angle_degrees)
        }
        AttackSpec::Sharpen { amount } => {
            let smooth = gaussian_blur(image, 1.0, None);
            image.zip_map(&smooth, |orig, low| orig + amount * (orig - low))
        }
        AttackSpec::Jpeg { quality } => jpeg::quantization_roundtrip(image, quality),
        AttackSpec::Crop { keep_area } => crop_centered(image, keep_area),
        AttackSpec::Rotate { degrees } => rotate(image, degrees),
        AttackSpec::Scale { factor } => {
            let rows = ((image.rows() as f64 * factor).round() as usize).max(1);
            let cols = ((image.cols() as f64 * factor).round() as usize).max(1);
            let small = resample::downscale_area(image, rows, cols);
            resample::resize_bilinear(&small, image.rows(), image.cols())
        }
        AttackSpec::Translate { dx, dy } => translate(image, dx as isize, dy as isize),
        AttackSpec::Shear { x, y } => warp_linear(image, [[1.0, x], [y, 1.0]]),
        AttackSpec::Flip { axis } => flip(image, axis),
    };
    Ok(out.quantize_u8())
}

/// Inverts a geometric attack with its known parameters, zero-filling where
/// content was lost. Errors for non-geometric kinds.
///
/// Attacks render with bilinear interpolation; registration resamples with a
/// Catmull-Rom kernel, which suppresses the aliasing a second interpolation
/// pass would otherwise stack on top of the attack's.
pub fn register(image: &ImageMatrix, spec: &AttackSpec) -> Result<ImageMatrix> {
    spec.validate()?;
    check_8bit(image)?;
    let out = match *spec {
        AttackSpec::Rotate { degrees } => rotate_with(image, -degrees, Interp::Cubic),
        // The scaling attack already renders back at the original size.
        AttackSpec::Scale { .. } => image.clone(),
        AttackSpec::Translate { dx, dy } => translate(image, -(dx as isize), -(dy as isize)),
        AttackSpec::Shear { x, y } => {
            let det = 1.0 - x * y;
            let inv = [[1.0 / det, -x / det], [-y / det, 1.0 / det]];
            warp_linear_with(image, inv, Interp::Cubic)
        }
        AttackSpec::Flip { axis } => flip(image, axis),
        _ => {
            return Err(Error::InvalidSpec(format!(
                "{} is not a geometric attack",
                spec.kind_code()
            )))
        }
    };
    Ok(out.quantize_u8())
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| Error::InvalidSpec("noise attack requires a seed".into()))
}

// ---- filters --------------------------------------------------------------

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Separable correlation with replicate borders.
fn separable_filter(img: &ImageMatrix, kernel: &[f64]) -> ImageMatrix {
    let radius = (kernel.len() / 2) as isize;
    let (rows, cols) = img.dims();
    let mut horiz = ImageMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let src = clamp_index(c as isize + k as isize - radius, cols);
                acc += w * img[(r, src)];
            }
            horiz[(r, c)] = acc;
        }
    }
    let mut out = ImageMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let src = clamp_index(r as isize + k as isize - radius, rows);
                acc += w * horiz[(src, c)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

fn box_filter(img: &ImageMatrix, size: usize) -> ImageMatrix {
    let kernel = vec![1.0 / size as f64; size];
    separable_filter(img, &kernel)
}

fn gaussian_kernel(sigma: f64, size: Option<usize>) -> Vec<f64> {
    let size = size.unwrap_or_else(|| {
        let radius = (3.0 * sigma).ceil().max(1.0) as usize;
        2 * radius + 1
    });
    let half = (size / 2) as f64;
    let mut k: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

fn gaussian_blur(img: &ImageMatrix, sigma: f64, size: Option<usize>) -> ImageMatrix {
    separable_filter(img, &gaussian_kernel(sigma, size))
}

fn median_filter(img: &ImageMatrix, size: usize) -> ImageMatrix {
    let radius = (size / 2) as isize;
    let (rows, cols) = img.dims();
    let mut window = Vec::with_capacity(size * size);
    ImageMatrix::from_fn(rows, cols, |r, c| {
        window.clear();
        for dr in -radius..=radius {
            for dc in -radius..=radius {
                window.push(img[(
                    clamp_index(r as isize + dr, rows),
                    clamp_index(c as isize + dc, cols),
                )]);
            }
        }
        window.sort_by(|a, b| a.partial_cmp(b).unwrap());
        window[window.len() / 2]
    })
}

fn motion_blur(img: &ImageMatrix, length: usize, angle_degrees: f64) -> ImageMatrix {
    if length <= 1 {
        return img.clone();
    }
    // Rasterize a unit-weight line through the kernel center by bilinear
    // splatting, then normalize.
    let size = if length % 2 == 1 { length } else { length + 1 };
    let center = (size / 2) as f64;
    let mut kernel = ImageMatrix::zeros(size, size);
    let theta = angle_degrees.to_radians();
    let (dx, dy) = (theta.cos(), -theta.sin());
    for i in 0..length {
        let t = i as f64 - (length as f64 - 1.0) / 2.0;
        let x = center + t * dx;
        let y = center + t * dy;
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        for (gy, gx, w) in [
            (y0, x0, (1.0 - fy) * (1.0 - fx)),
            (y0, x0 + 1.0, (1.0 - fy) * fx),
            (y0 + 1.0, x0, fy * (1.0 - fx)),
            (y0 + 1.0, x0 + 1.0, fy * fx),
        ] {
            if gy >= 0.0 && gx >= 0.0 && (gy as usize) < size && (gx as usize) < size && w > 0.0 {
                kernel[(gy as usize, gx as usize)] += w;
            }
        }
    }
    let total: f64 = kernel.as_slice().iter().sum();
    let kernel = kernel.scaled(1.0 / total);

    let radius = (size / 2) as isize;
    let (rows, cols) = img.dims();
    ImageMatrix::from_fn(rows, cols, |r, c| {
        let mut acc = 0.0;
        for kr in 0..size {
            for kc in 0..size {
                let w = kernel[(kr, kc)];
                if w == 0.0 {
                    continue;
                }
                acc += w * img[(
                    clamp_index(r as isize + kr as isize - radius, rows),
                    clamp_index(c as isize + kc as isize - radius, cols),
                )];
            }
        }
        acc
    })
}

fn histogram_equalize(img: &ImageMatrix) -> ImageMatrix {
    let mut counts = [0u64; 256];
    for &v in img.as_slice() {
        counts[(v.round() as i64).clamp(0, 255) as usize] += 1;
    }
    let total: u64 = counts.iter().sum();
    let mut cdf = [0u64; 256];
    let mut running = 0u64;
    for (i, &c) in counts.iter().enumerate() {
        running += c;
        cdf[i] = running;
    }
    let cdf_min = cdf
        .iter()
        .copied()
        .find(|&v| v > 0)
        .unwrap_or(0);
    let denom = (total - cdf_min).max(1) as f64;
    let mut lut = [0.0f64; 256];
    for i in 0..256 {
        lut[i] = ((cdf[i].saturating_sub(cdf_min)) as f64 / denom * 255.0).round();
    }
    img.map(|v| lut[(v.round() as i64).clamp(0, 255) as usize])
}

// ---- noise ----------------------------------------------------------------

fn gaussian_noise(img: &ImageMatrix, mean: f64, variance: f64, seed: u64) -> ImageMatrix {
    let mut rng: StdRng = SeedableRng::seed_from_u64(seed);
    let normal = Normal::new(mean, variance.sqrt()).expect("validated variance");
    img.map(|v| v + 255.0 * normal.sample(&mut rng))
}

fn speckle_noise(img: &ImageMatrix, variance: f64, seed: u64) -> ImageMatrix {
    let mut rng: StdRng = SeedableRng::seed_from_u64(seed);
    // Multiplicative x * (1 + n) with n zero-mean uniform of the given
    // variance: half-width sqrt(3 v).
    let a = (3.0 * variance).sqrt();
    if a == 0.0 {
        return img.clone();
    }
    let uniform = Uniform::new_inclusive(-a, a);
    img.map(|v| v * (1.0 + uniform.sample(&mut rng)))
}

fn salt_pepper(img: &ImageMatrix, density: f64, seed: u64) -> ImageMatrix {
    let mut rng: StdRng = SeedableRng::seed_from_u64(seed);
    let uniform = Uniform::new(0.0, 1.0);
    img.map(|v| {
        if uniform.sample(&mut rng) < density {
            if uniform.sample(&mut rng) < 0.5 {
                0.0
            } else {
                255.0
            }
        } else {
            v
        }
    })
}

// ---- geometric ------------------------------------------------------------

fn flip(img: &ImageMatrix, axis: FlipAxis) -> ImageMatrix {
    let (rows, cols) = img.dims();
    match axis {
        FlipAxis::Horizontal => ImageMatrix::from_fn(rows, cols, |r, c| img[(r, cols - 1 - c)]),
        FlipAxis::Vertical => ImageMatrix::from_fn(rows, cols, |r, c| img[(rows - 1 - r, c)]),
    }
}

fn translate(img: &ImageMatrix, dx: isize, dy: isize) -> ImageMatrix {
    let (rows, cols) = img.dims();
    ImageMatrix::from_fn(rows, cols, |r, c| {
        let sr = r as isize - dy;
        let sc = c as isize - dx;
        if sr >= 0 && sc >= 0 && (sr as usize) < rows && (sc as usize) < cols {
            img[(sr as usize, sc as usize)]
        } else {
            0.0
        }
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Interp {
    Bilinear,
    Cubic,
}

fn rotate(img: &ImageMatrix, degrees: f64) -> ImageMatrix {
    rotate_with(img, degrees, Interp::Bilinear)
}

/// Rotation about the image center. Quarter turns are exact grid
/// permutations, so the angle is decomposed into the nearest multiple of 90
/// degrees plus a residual in [-45, 45] that takes the single interpolation
/// pass; large angles then resample no worse than small ones.
fn rotate_with(img: &ImageMatrix, degrees: f64, interp: Interp) -> ImageMatrix {
    let quarter_turns = (degrees / 90.0).round();
    let residual = degrees - quarter_turns * 90.0;
    let mut out = img.clone();
    let turns = ((quarter_turns as i64 % 4) + 4) % 4;
    for _ in 0..turns {
        out = quarter_turn_ccw(&out);
    }
    if residual != 0.0 {
        let theta = residual.to_radians();
        let (sin, cos) = theta.sin_cos();
        // Inverse map: rotate destination coordinates by -theta.
        out = warp_inverse(&out, move |y, x| (cos * y - sin * x, sin * y + cos * x), interp);
    }
    out
}

/// Exact counterclockwise quarter turn on the square canvas (for
/// non-square images the rotated content is re-rendered onto the original
/// canvas through the generic path).
fn quarter_turn_ccw(img: &ImageMatrix) -> ImageMatrix {
    let (rows, cols) = img.dims();
    if rows == cols {
        ImageMatrix::from_fn(rows, cols, |r, c| img[(c, cols - 1 - r)])
    } else {
        warp_inverse(img, |y, x| (x, -y), Interp::Bilinear)
    }
}

fn warp_linear(img: &ImageMatrix, m: [[f64; 2]; 2]) -> ImageMatrix {
    warp_linear_with(img, m, Interp::Bilinear)
}

/// Applies the forward linear map `m` (about the image center) by inverse
/// warping onto the fixed canvas, zero outside.
fn warp_linear_with(img: &ImageMatrix, m: [[f64; 2]; 2], interp: Interp) -> ImageMatrix {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ];
    // Row vector convention: (x', y') = (x, y) applied to the shear matrix
    // [[1, x],[y, 1]] means x' = x + sx*y, y' = sy*x + y.
    warp_inverse(
        img,
        move |y, x| {
            (
                inv[1][0] * x + inv[1][1] * y,
                inv[0][0] * x + inv[0][1] * y,
            )
        },
        interp,
    )
}

fn warp_inverse(
    img: &ImageMatrix,
    source_of: impl Fn(f64, f64) -> (f64, f64),
    interp: Interp,
) -> ImageMatrix {
    let (rows, cols) = img.dims();
    let cy = (rows - 1) as f64 / 2.0;
    let cx = (cols - 1) as f64 / 2.0;
    ImageMatrix::from_fn(rows, cols, |r, c| {
        let (sy, sx) = source_of(r as f64 - cy, c as f64 - cx);
        let sy = sy + cy;
        let sx = sx + cx;
        if sy < -0.5 || sx < -0.5 || sy > (rows - 1) as f64 + 0.5 || sx > (cols - 1) as f64 + 0.5 {
            0.0
        } else {
            match interp {
                Interp::Bilinear => resample::bilinear_sample(img, sy, sx),
                Interp::Cubic => resample::cubic_sample(img, sy, sx),
            }
        }
    })
}

fn crop_centered(img: &ImageMatrix, keep_area: f64) -> ImageMatrix {
    let (rows, cols) = img.dims();
    let side = keep_area.sqrt();
    let keep_rows = ((rows as f64 * side).round() as usize).clamp(1, rows);
    let keep_cols = ((cols as f64 * side).round() as usize).clamp(1, cols);
    let r0 = (rows - keep_rows) / 2;
    let c0 = (cols - keep_cols) / 2;
    ImageMatrix::from_fn(rows, cols, |r, c| {
        if r >= r0 && r < r0 + keep_rows && c >= c0 && c < c0 + keep_cols {
            img[(r, c)]
        } else {
            0.0
        }
    })
}
