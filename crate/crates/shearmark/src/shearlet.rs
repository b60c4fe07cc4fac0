//! Cone-adapted discrete shearlet transform, built in the frequency domain.
//!
//! The system partitions the frequency square into dyadic radial rings and
//! shear-indexed angular wedges on two cones (horizontal `|ξx| ≥ |ξy|`,
//! vertical `|ξy| ≥ |ξx|`). Every bin belongs to exactly one subband, so the
//! real, even-symmetric weight planes satisfy `Σ |ψ̂|² = 1` at every bin by
//! construction: the transform is a Parseval frame, analysis is plain
//! frequency-domain multiplication, the adjoint reconstructs exactly, and no
//! plane is downsampled. The hard partition also makes the per-plane
//! analysis/synthesis roundtrip an exact projection — content inside a
//! subband's support passes through modify-reconstruct-reanalyze unchanged,
//! which the singular-value watermark embedding depends on.
//!
//! Scale 1 owns the outermost radial band (out to the square corners);
//! higher scale indices take successively finer annuli next to the lowpass.
//! A scale with shear level `k` contributes `2^(k+2)` directional planes:
//! shears `-(2^k - 1) ..= 2^k - 1` on the horizontal cone and
//! `-2^k ..= 2^k` on the vertical cone, the two seam (diagonal) wedges being
//! assigned to the vertical cone. Plane order is lowpass first, then scales
//! ascending, horizontal cone before vertical, shears ascending.

use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::matrix::ImageMatrix;

/// Cone membership of one coefficient plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    Lowpass,
    Horizontal,
    Vertical,
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cone::Lowpass => write!(f, "low"),
            Cone::Horizontal => write!(f, "h"),
            Cone::Vertical => write!(f, "v"),
        }
    }
}

/// Descriptor of one plane: scale (1-based; 0 for the lowpass), cone, and
/// signed shear offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubbandIndex {
    pub scale: usize,
    pub cone: Cone,
    pub shear: i32,
}

/// Addresses exactly one plane of a system. Parsed from `scale:cone:shear`
/// strings such as `1:v:0` (cone `h`, `v`, or `low`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubbandSelector {
    pub scale: usize,
    pub cone: Cone,
    pub shear: i32,
}

impl SubbandSelector {
    /// The embedding default: first scale, vertical cone, no shear. Scale 1
    /// is the outermost band, so this wedge spans nearly the full row-
    /// frequency range and gives the embedding a well-conditioned carrier.
    pub fn default_embedding() -> Self {
        Self {
            scale: 1,
            cone: Cone::Vertical,
            shear: 0,
        }
    }
}

impl fmt::Display for SubbandSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.scale, self.cone, self.shear)
    }
}

impl FromStr for SubbandSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidSelector(format!(
                "expected scale:cone:shear, got '{s}'"
            )));
        }
        let scale: usize = parts[0]
            .parse()
            .map_err(|_| Error::InvalidSelector(format!("bad scale in '{s}'")))?;
        let cone = match parts[1] {
            "h" => Cone::Horizontal,
            "v" => Cone::Vertical,
            "low" | "l" => Cone::Lowpass,
            other => {
                return Err(Error::InvalidSelector(format!(
                    "bad cone '{other}' (expected h, v or low)"
                )))
            }
        };
        let shear: i32 = parts[2]
            .parse()
            .map_err(|_| Error::InvalidSelector(format!("bad shear in '{s}'")))?;
        Ok(Self { scale, cone, shear })
    }
}

/// A built shearlet system for one image size: the Parseval-normalized
/// frequency weights of every plane plus their descriptors.
pub struct ShearletSystem {
    rows: usize,
    cols: usize,
    n_scales: usize,
    shear_levels: Vec<u32>,
    index: Vec<SubbandIndex>,
    /// One rows×cols real weight plane per subband, DFT bin layout.
    filters: Vec<Vec<f64>>,
}

/// Ordered coefficient planes of one decomposition, all full-resolution.
#[derive(Debug, Clone)]
pub struct ShearletCoeffs {
    pub planes: Vec<ImageMatrix>,
    index: Vec<SubbandIndex>,
}

impl ShearletCoeffs {
    pub fn plane(&self, i: usize) -> &ImageMatrix {
        &self.planes[i]
    }

    pub fn index(&self) -> &[SubbandIndex] {
        &self.index
    }

    /// Copy of the coefficients with exactly one plane substituted.
    pub fn with_plane(&self, i: usize, plane: ImageMatrix) -> Result<Self> {
        if i >= self.planes.len() {
            return Err(Error::InvalidSelector(format!(
                "plane {i} out of range ({} planes)",
                self.planes.len()
            )));
        }
        if plane.dims() != self.planes[i].dims() {
            return Err(Error::InvalidInput(format!(
                "replacement plane is {}x{}, expected {}x{}",
                plane.rows(),
                plane.cols(),
                self.planes[i].rows(),
                self.planes[i].cols()
            )));
        }
        let mut out = self.clone();
        out.planes[i] = plane;
        Ok(out)
    }
}

/// Radial ring boundaries in bins of the smaller dimension: `0.5 * 2^j` for
/// j = 0..=n_scales. The lowpass keeps only the bins inside half a bin of
/// DC; ring j covers `(0.5*2^j, 0.5*2^(j+1)]`; everything beyond the last
/// boundary, out to the square corners, belongs to scale 1.
fn radial_boundaries(n_scales: usize) -> Vec<f64> {
    (0..=n_scales).map(|j| 0.5 * 2f64.powi(j as i32)).collect()
}

/// 1-based scale owning max-norm radius `rr` (in bins); `None` means the
/// lowpass. Scale 1 owns the outermost band, scale `n_scales` the innermost.
fn scale_of_radius(rr: f64, bounds: &[f64]) -> Option<usize> {
    let n_scales = bounds.len() - 1;
    if rr <= bounds[0] {
        return None;
    }
    for band in 0..n_scales {
        if rr <= bounds[band + 1] {
            return Some(n_scales - band);
        }
    }
    Some(1)
}

/// Shear offset owning slope `t` at level `k`: the nearest integer of
/// `2^k * t`, ties away from zero. `|result| = 2^k` marks a seam wedge.
fn shear_of_slope(t: f64, k: u32) -> i32 {
    let spread = (1i64 << k) as f64;
    let s = (spread * t).round() as i32;
    s.clamp(-(1 << k), 1 << k)
}

#[inline]
fn signed_freq(i: usize, n: usize) -> f64 {
    if i <= n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

/// Constructs the Parseval-normalized system for one image size.
///
/// `shear_levels` has one entry per scale; level `k` yields `2^(k+2)`
/// directional planes on that scale.
pub fn build_system(
    rows: usize,
    cols: usize,
    n_scales: usize,
    shear_levels: &[u32],
) -> Result<ShearletSystem> {
    if rows < 32 || cols < 32 {
        return Err(Error::InvalidConfig(format!(
            "shearlet system needs at least 32x32, got {rows}x{cols}"
        )));
    }
    if n_scales == 0 {
        return Err(Error::InvalidConfig("n_scales must be at least 1".into()));
    }
    if shear_levels.len() != n_scales {
        return Err(Error::InvalidConfig(format!(
            "shear_levels has {} entries for {} scales",
            shear_levels.len(),
            n_scales
        )));
    }
    if let Some(&k) = shear_levels.iter().find(|&&k| k > 6) {
        return Err(Error::InvalidConfig(format!(
            "shear level {k} too large (max 6)"
        )));
    }
    let min_half = rows.min(cols) as f64 / 2.0;
    // Ring boundaries normalized so 1 is the Nyquist of the smaller axis.
    let bounds: Vec<f64> = radial_boundaries(n_scales)
        .into_iter()
        .map(|b| b / min_half)
        .collect();
    if bounds[n_scales] > 0.25 {
        return Err(Error::InvalidConfig(format!(
            "{rows}x{cols} image too small for {n_scales} scales"
        )));
    }

    // Plane descriptors in their fixed order.
    let mut index = vec![SubbandIndex {
        scale: 0,
        cone: Cone::Lowpass,
        shear: 0,
    }];
    for (scale, &k) in shear_levels.iter().enumerate() {
        let scale = scale + 1;
        let top = 1i32 << k;
        for shear in -(top - 1)..=(top - 1) {
            index.push(SubbandIndex {
                scale,
                cone: Cone::Horizontal,
                shear,
            });
        }
        for shear in -top..=top {
            index.push(SubbandIndex {
                scale,
                cone: Cone::Vertical,
                shear,
            });
        }
    }

    // Start-of-block offsets: plane_base[scale-1] is the first horizontal
    // plane of that scale.
    let mut plane_base = Vec::with_capacity(n_scales);
    let mut acc = 1usize;
    for &k in shear_levels {
        plane_base.push(acc);
        acc += 1usize << (k + 2);
    }

    let n_planes = index.len();
    let mut filters = vec![vec![0.0f64; rows * cols]; n_planes];
    let half_r = rows as f64 / 2.0;
    let half_c = cols as f64 / 2.0;

    for u in 0..rows {
        let fy = signed_freq(u, rows) / half_r;
        for v in 0..cols {
            let fx = signed_freq(v, cols) / half_c;
            let bin = u * cols + v;
            let r = fx.abs().max(fy.abs());
            let scale = match scale_of_radius(r, &bounds) {
                None => {
                    filters[0][bin] = 1.0;
                    continue;
                }
                Some(s) => s,
            };
            let k = shear_levels[scale - 1];
            let top = 1i32 << k;
            let in_horizontal = fx.abs() >= fy.abs();
            // Slope coordinate within the bin's own cone, in [-1, 1].
            let slope = if in_horizontal { fy / fx } else { fx / fy };
            let shear = shear_of_slope(slope, k);
            // Seam wedges |shear| = 2^k straddle both cones and belong to
            // the vertical cone; other wedges stay in the bin's own cone.
            let base = plane_base[scale - 1];
            let plane = if shear.abs() == top || !in_horizontal {
                base + (2 * top - 1) as usize + (shear + top) as usize
            } else {
                base + (shear + top - 1) as usize
            };
            filters[plane][bin] = 1.0;
        }
    }

    // Real output requires exactly even filters: ψ̂(u, v) = ψ̂(-u, -v) with
    // indices mod N. The signed-frequency map sends a Nyquist index to +N/2
    // for both members of a pair whose other axis flips, so symmetrize
    // explicitly.
    for f in filters.iter_mut() {
        for u in 0..rows {
            let pu = (rows - u) % rows;
            for v in 0..cols {
                let pv = (cols - v) % cols;
                let a = u * cols + v;
                let b = pu * cols + pv;
                if a < b {
                    let avg = 0.5 * (f[a] + f[b]);
                    f[a] = avg;
                    f[b] = avg;
                }
            }
        }
    }

    // Exact Parseval normalization: divide every filter by sqrt(Σ ψ̂²).
    for bin in 0..rows * cols {
        let total: f64 = filters.iter().map(|f| f[bin] * f[bin]).sum();
        if total < 0.25 {
            return Err(Error::InvalidConfig(format!(
                "frequency coverage gap at bin {bin} (sum {total:.3e})"
            )));
        }
        let inv = 1.0 / total.sqrt();
        for f in filters.iter_mut() {
            f[bin] *= inv;
        }
    }

    Ok(ShearletSystem {
        rows,
        cols,
        n_scales,
        shear_levels: shear_levels.to_vec(),
        index,
        filters,
    })
}

fn fft2(data: &mut [Complex<f64>], rows: usize, cols: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let direction = if inverse {
        rustfft::FftDirection::Inverse
    } else {
        rustfft::FftDirection::Forward
    };
    let row_fft = planner.plan_fft(cols, direction);
    for chunk in data.chunks_exact_mut(cols) {
        row_fft.process(chunk);
    }
    // Transpose, transform the other dimension, transpose back.
    let mut t = vec![Complex::default(); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = data[r * cols + c];
        }
    }
    let col_fft = planner.plan_fft(rows, direction);
    for chunk in t.chunks_exact_mut(rows) {
        col_fft.process(chunk);
    }
    for c in 0..cols {
        for r in 0..rows {
            data[r * cols + c] = t[c * rows + r];
        }
    }
    if inverse {
        let scale = 1.0 / (rows * cols) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Inverse FFT expected to produce a real plane; the residual imaginary part
/// must stay below 1e-12 relative and is truncated.
fn ifft2_real(mut spectrum: Vec<Complex<f64>>, rows: usize, cols: usize) -> ImageMatrix {
    fft2(&mut spectrum, rows, cols, true);
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    for v in &spectrum {
        max_re = max_re.max(v.re.abs());
        max_im = max_im.max(v.im.abs());
    }
    assert!(
        max_im <= 1e-12 * max_re.max(1.0),
        "shearlet plane has non-negligible imaginary part ({max_im:.3e})"
    );
    ImageMatrix::from_vec(
        rows,
        cols,
        spectrum.into_iter().map(|v| v.re).collect(),
    )
    .expect("dimensions match by construction")
}

impl ShearletSystem {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_scales(&self) -> usize {
        self.n_scales
    }

    pub fn shear_levels(&self) -> &[u32] {
        &self.shear_levels
    }

    pub fn n_planes(&self) -> usize {
        self.filters.len()
    }

    pub fn index(&self) -> &[SubbandIndex] {
        &self.index
    }

    /// Frequency weight plane of subband `i`, row-major DFT bins.
    pub fn filter(&self, i: usize) -> &[f64] {
        &self.filters[i]
    }

    /// Largest deviation of `Σ |ψ̂|²` from 1 over all bins.
    pub fn frame_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for bin in 0..self.rows * self.cols {
            let total: f64 = self.filters.iter().map(|f| f[bin] * f[bin]).sum();
            worst = worst.max((total - 1.0).abs());
        }
        worst
    }

    /// Resolves a selector to its plane position.
    pub fn resolve(&self, sel: &SubbandSelector) -> Result<usize> {
        if sel.cone == Cone::Lowpass {
            if sel.scale == 0 && sel.shear == 0 {
                return Ok(0);
            }
            return Err(Error::InvalidSelector(format!(
                "lowpass selector must be 0:low:0, got {sel}"
            )));
        }
        self.index
            .iter()
            .position(|ix| ix.scale == sel.scale && ix.cone == sel.cone && ix.shear == sel.shear)
            .ok_or_else(|| {
                Error::InvalidSelector(format!(
                    "selector {sel} does not resolve in a {}-scale system with levels {:?}",
                    self.n_scales, self.shear_levels
                ))
            })
    }

    /// Forward transform: one full-resolution real plane per subband.
    pub fn decompose(&self, image: &ImageMatrix) -> Result<ShearletCoeffs> {
        if image.dims() != (self.rows, self.cols) {
            return Err(Error::InvalidInput(format!(
                "image is {}x{}, system expects {}x{}",
                image.rows(),
                image.cols(),
                self.rows,
                self.cols
            )));
        }
        image.ensure_finite("shearlet input")?;
        let mut spectrum: Vec<Complex<f64>> = image
            .as_slice()
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .collect();
        fft2(&mut spectrum, self.rows, self.cols, false);

        let planes = self
            .filters
            .iter()
            .map(|filter| {
                let weighted: Vec<Complex<f64>> = spectrum
                    .iter()
                    .zip(filter)
                    .map(|(s, &w)| s * w)
                    .collect();
                ifft2_real(weighted, self.rows, self.cols)
            })
            .collect();

        Ok(ShearletCoeffs {
            planes,
            index: self.index.clone(),
        })
    }

    /// Adjoint reconstruction; exact for unmodified coefficients because the
    /// frame is Parseval.
    pub fn reconstruct(&self, coeffs: &ShearletCoeffs) -> Result<ImageMatrix> {
        if coeffs.planes.len() != self.filters.len() {
            return Err(Error::InvalidInput(format!(
                "coefficients have {} planes, system has {}",
                coeffs.planes.len(),
                self.filters.len()
            )));
        }
        let mut acc = vec![Complex::new(0.0, 0.0); self.rows * self.cols];
        for (plane, filter) in coeffs.planes.iter().zip(&self.filters) {
            if plane.dims() != (self.rows, self.cols) {
                return Err(Error::InvalidInput(format!(
                    "plane is {}x{}, system expects {}x{}",
                    plane.rows(),
                    plane.cols(),
                    self.rows,
                    self.cols
                )));
            }
            let mut spectrum: Vec<Complex<f64>> = plane
                .as_slice()
                .iter()
                .map(|&v| Complex::new(v, 0.0))
                .collect();
            fft2(&mut spectrum, self.rows, self.cols, false);
            for (a, (s, &w)) in acc.iter_mut().zip(spectrum.iter().zip(filter)) {
                *a += s * w;
            }
        }
        Ok(ifft2_real(acc, self.rows, self.cols))
    }

    /// Projects an arbitrary plane onto what subband `i` of a decomposition
    /// can actually carry: multiplies its spectrum by `ψ̂_i²`. Modifying a
    /// plane by `delta`, reconstructing and re-analyzing yields the original
    /// plane plus exactly this projection of `delta`.
    pub fn project_plane(&self, i: usize, plane: &ImageMatrix) -> Result<ImageMatrix> {
        if i >= self.filters.len() {
            return Err(Error::InvalidSelector(format!(
                "plane {i} out of range ({} planes)",
                self.filters.len()
            )));
        }
        if plane.dims() != (self.rows, self.cols) {
            return Err(Error::InvalidInput(format!(
                "plane is {}x{}, system expects {}x{}",
                plane.rows(),
                plane.cols(),
                self.rows,
                self.cols
            )));
        }
        let mut spectrum: Vec<Complex<f64>> = plane
            .as_slice()
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .collect();
        fft2(&mut spectrum, self.rows, self.cols, false);
        for (s, &w) in spectrum.iter_mut().zip(&self.filters[i]) {
            *s *= w * w;
        }
        Ok(ifft2_real(spectrum, self.rows, self.cols))
    }

    /// Copy of the plane addressed by `sel`.
    pub fn select_subband(
        &self,
        coeffs: &ShearletCoeffs,
        sel: &SubbandSelector,
    ) -> Result<ImageMatrix> {
        let i = self.resolve(sel)?;
        Ok(coeffs.planes[i].clone())
    }

    /// Coefficients with the plane addressed by `sel` substituted.
    pub fn replace_subband(
        &self,
        coeffs: &ShearletCoeffs,
        sel: &SubbandSelector,
        plane: ImageMatrix,
    ) -> Result<ShearletCoeffs> {
        let i = self.resolve(sel)?;
        coeffs.with_plane(i, plane)
    }
}
