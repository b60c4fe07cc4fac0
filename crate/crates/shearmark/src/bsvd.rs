//! Bidiagonal singular value decomposition.
//!
//! A matrix is factored in two stages: Householder bidiagonalization
//! `A = U_A · B · V_Aᵀ` with `B` upper bidiagonal, then an implicit-shift QR
//! iteration on `B` giving `B = U_B · diag(s) · V_Bᵀ`. The five factors
//! together reconstruct `A = U_A · U_B · diag(s) · V_Bᵀ · V_Aᵀ`, and the
//! singular values agree with those of a direct SVD.
//!
//! Everything here is deterministic: identical input bits produce identical
//! output bits.

use crate::error::{Error, Result};
use crate::matrix::ImageMatrix;

/// Iteration budget for the QR sweep phase.
const MAX_SWEEPS: usize = 10_000;

/// The five factors of one matrix, with `s` nonnegative and descending.
///
/// Shapes for an m×n input with r = min(m, n): `u_a` is m×r with orthonormal
/// columns, `u_b`, `v_b` are r×r orthogonal, `v_a` is n×r with orthonormal
/// columns. Wide inputs are factored through their transpose with the U/V
/// roles swapped, so composition always reproduces the original orientation.
#[derive(Debug, Clone)]
pub struct FactorSet {
    pub u_a: ImageMatrix,
    pub u_b: ImageMatrix,
    pub s: Vec<f64>,
    pub v_b: ImageMatrix,
    pub v_a: ImageMatrix,
}

/// Replacement for the singular-value diagonal in [`compose`].
///
/// The embedding algebra needs the diagonal form; tests use both.
pub enum Sigma<'a> {
    Diag(&'a [f64]),
    Full(&'a ImageMatrix),
}

/// Householder bidiagonalization of a tall-or-square matrix (m ≥ n).
///
/// Returns `(u_a, b, v_a)` with `b` upper bidiagonal (all other entries are
/// exactly zero), `u_a` m×n with orthonormal columns, `v_a` n×n orthogonal,
/// and `u_a · b · v_aᵀ = a`. Reflectors are sign-fixed so the diagonal of `b`
/// is nonnegative.
pub fn bidiagonalize(a: &ImageMatrix) -> Result<(ImageMatrix, ImageMatrix, ImageMatrix)> {
    a.ensure_finite("bidiagonalize input")?;
    let (m, n) = a.dims();
    if m < n {
        return Err(Error::InvalidInput(format!(
            "bidiagonalize requires rows >= cols, got {m}x{n} (factor the transpose)"
        )));
    }
    let w = bidiagonalize_work(a);
    let mut b = ImageMatrix::zeros(n, n);
    for i in 0..n {
        b[(i, i)] = w.diag[i];
        if i + 1 < n {
            b[(i, i + 1)] = w.sup[i];
        }
    }
    Ok((w.u, b, w.v))
}

struct Bidiagonal {
    u: ImageMatrix,
    diag: Vec<f64>,
    sup: Vec<f64>,
    v: ImageMatrix,
}

/// Core Householder reduction; caller guarantees m ≥ n ≥ 1 and finite input.
fn bidiagonalize_work(a: &ImageMatrix) -> Bidiagonal {
    let (m, n) = a.dims();
    let mut work = a.clone();
    // Householder vectors are stored in the eliminated parts of `work`;
    // left reflector k lives in column k (rows k+1..m), right reflector k in
    // row k (cols k+2..n). tau = 0 marks a skipped reflector.
    let mut tau_left = vec![0.0f64; n];
    let mut tau_right = vec![0.0f64; n];
    let mut diag = vec![0.0f64; n];
    let mut sup = vec![0.0f64; n.saturating_sub(1)];

    for k in 0..n {
        // Left reflector: zero work[k+1.., k].
        let norm = {
            let mut s = 0.0;
            for i in k..m {
                s += work[(i, k)] * work[(i, k)];
            }
            s.sqrt()
        };
        if norm > 0.0 {
            let akk = work[(k, k)];
            let alpha = if akk >= 0.0 { -norm } else { norm };
            let v0 = akk - alpha;
            if v0 != 0.0 {
                for i in (k + 1)..m {
                    work[(i, k)] /= v0;
                }
                tau_left[k] = -v0 / alpha;
                // Apply H = I - tau*v*vT to the trailing columns.
                for j in (k + 1)..n {
                    let mut dot = work[(k, j)];
                    for i in (k + 1)..m {
                        dot += work[(i, k)] * work[(i, j)];
                    }
                    dot *= tau_left[k];
                    work[(k, j)] -= dot;
                    for i in (k + 1)..m {
                        let vi = work[(i, k)];
                        work[(i, j)] -= dot * vi;
                    }
                }
            }
            diag[k] = alpha;
        } else {
            diag[k] = 0.0;
        }

        // Right reflector: zero work[k, k+2..].
        if k + 2 < n {
            let norm = {
                let mut s = 0.0;
                for j in (k + 1)..n {
                    s += work[(k, j)] * work[(k, j)];
                }
                s.sqrt()
            };
            if norm > 0.0 {
                let akj = work[(k, k + 1)];
                let alpha = if akj >= 0.0 { -norm } else { norm };
                let v0 = akj - alpha;
                if v0 != 0.0 {
                    for j in (k + 2)..n {
                        work[(k, j)] /= v0;
                    }
                    tau_right[k] = -v0 / alpha;
                    for i in (k + 1)..m {
                        let mut dot = work[(i, k + 1)];
                        for j in (k + 2)..n {
                            dot += work[(k, j)] * work[(i, j)];
                        }
                        dot *= tau_right[k];
                        work[(i, k + 1)] -= dot;
                        for j in (k + 2)..n {
                            let vj = work[(k, j)];
                            work[(i, j)] -= dot * vj;
                        }
                    }
                }
                sup[k] = alpha;
            } else {
                sup[k] = 0.0;
            }
        } else if k + 1 < n {
            sup[k] = work[(k, k + 1)];
        }
    }

    // Accumulate U (m×n) = H_0 · H_1 · … · H_{n-1} applied to the thin
    // identity, in reverse so each reflector touches a shrinking block.
    let mut u = ImageMatrix::zeros(m, n);
    for i in 0..n {
        u[(i, i)] = 1.0;
    }
    for k in (0..n).rev() {
        let tau = tau_left[k];
        if tau == 0.0 {
            continue;
        }
        for c in 0..n {
            let mut dot = u[(k, c)];
            for i in (k + 1)..m {
                dot += work[(i, k)] * u[(i, c)];
            }
            dot *= tau;
            u[(k, c)] -= dot;
            for i in (k + 1)..m {
                let vi = work[(i, k)];
                u[(i, c)] -= dot * vi;
            }
        }
    }

    // Accumulate V (n×n) = G_0 · … · G_{n-3} likewise.
    let mut v = ImageMatrix::identity(n);
    if n >= 2 {
        for k in (0..n - 2).rev() {
            let tau = tau_right[k];
            if tau == 0.0 {
                continue;
            }
            for c in 0..n {
                let mut dot = v[(k + 1, c)];
                for j in (k + 2)..n {
                    dot += work[(k, j)] * v[(j, c)];
                }
                dot *= tau;
                v[(k + 1, c)] -= dot;
                for j in (k + 2)..n {
                    let vj = work[(k, j)];
                    v[(j, c)] -= dot * vj;
                }
            }
        }
    }

    // Fix signs so the bidiagonal diagonal is nonnegative. Negating row i of
    // B flips diag[i] and sup[i]; compensate in column i of U.
    for i in 0..n {
        if diag[i] < 0.0 {
            diag[i] = -diag[i];
            if i < sup.len() {
                sup[i] = -sup[i];
            }
            for r in 0..m {
                u[(r, i)] = -u[(r, i)];
            }
        }
    }

    Bidiagonal { u, diag, sup, v }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if a == 0.0 {
        (0.0, 1.0)
    } else {
        let h = a.hypot(b);
        (a / h, b / h)
    }
}

fn rotate_columns(m: &mut ImageMatrix, i: usize, j: usize, c: f64, s: f64) {
    for r in 0..m.rows() {
        let a = m[(r, i)];
        let b = m[(r, j)];
        m[(r, i)] = c * a + s * b;
        m[(r, j)] = c * b - s * a;
    }
}

/// Implicit-shift QR on a bidiagonal matrix, accumulating the rotations into
/// `u` and `v`. On return `diag` holds nonnegative singular values sorted
/// descending and `sup` is zeroed.
fn bidiagonal_qr(
    diag: &mut [f64],
    sup: &mut [f64],
    u: &mut ImageMatrix,
    v: &mut ImageMatrix,
) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut sweeps = 0usize;
    let mut hi = n - 1;

    while hi > 0 {
        // Deflate negligible superdiagonal entries.
        let threshold = eps * (diag[hi - 1].abs() + diag[hi].abs());
        if sup[hi - 1].abs() <= threshold {
            sup[hi - 1] = 0.0;
            hi -= 1;
            continue;
        }

        // Locate the start of the unreduced block.
        let mut lo = hi - 1;
        while lo > 0 {
            let t = eps * (diag[lo - 1].abs() + diag[lo].abs());
            if sup[lo - 1].abs() <= t {
                sup[lo - 1] = 0.0;
                break;
            }
            lo -= 1;
        }

        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::NumericalFailure(format!(
                "bidiagonal QR exceeded {MAX_SWEEPS} sweeps"
            )));
        }

        // A zero diagonal inside the block breaks the shift formula; chase
        // the adjacent superdiagonal off the bottom with left rotations.
        let scale = diag[lo..=hi]
            .iter()
            .chain(sup[lo..hi].iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let mut had_zero = false;
        for idx in lo..hi {
            if diag[idx].abs() <= eps * scale {
                diag[idx] = 0.0;
                let mut z = sup[idx];
                sup[idx] = 0.0;
                for j in (idx + 1)..=hi {
                    let (c, s) = givens(diag[j], z);
                    diag[j] = c * diag[j] + s * z;
                    if j < hi {
                        z = -s * sup[j];
                        sup[j] = c * sup[j];
                    }
                    rotate_columns(u, j, idx, c, s);
                }
                had_zero = true;
                break;
            }
        }
        if had_zero {
            continue;
        }

        // Wilkinson shift from the trailing 2x2 of BᵀB.
        let d_hi = diag[hi];
        let d_h1 = diag[hi - 1];
        let e_h1 = sup[hi - 1];
        let e_h2 = if hi >= 2 && hi - 2 >= lo { sup[hi - 2] } else { 0.0 };
        let t11 = d_h1 * d_h1 + e_h2 * e_h2;
        let t12 = d_h1 * e_h1;
        let t22 = d_hi * d_hi + e_h1 * e_h1;
        let d = (t11 - t22) / 2.0;
        let sign_d = if d >= 0.0 { 1.0 } else { -1.0 };
        let mu = t22 - t12 * t12 / (d + sign_d * (d * d + t12 * t12).sqrt());

        // Bulge chase.
        let mut x = diag[lo] * diag[lo] - mu;
        let mut z = diag[lo] * sup[lo];
        for k in lo..hi {
            let (c, s) = givens(x, z);
            if k > lo {
                sup[k - 1] = c * x + s * z;
            }
            let dk = diag[k];
            let ek = sup[k];
            let dk1 = diag[k + 1];
            diag[k] = c * dk + s * ek;
            sup[k] = c * ek - s * dk;
            let bulge = s * dk1;
            diag[k + 1] = c * dk1;
            rotate_columns(v, k, k + 1, c, s);

            let (c2, s2) = givens(diag[k], bulge);
            diag[k] = c2 * diag[k] + s2 * bulge;
            let old_ek = sup[k];
            let old_dk1 = diag[k + 1];
            sup[k] = c2 * old_ek + s2 * old_dk1;
            diag[k + 1] = c2 * old_dk1 - s2 * old_ek;
            if k + 1 < hi {
                let old_ek1 = sup[k + 1];
                x = sup[k];
                z = s2 * old_ek1;
                sup[k + 1] = c2 * old_ek1;
            }
            rotate_columns(u, k, k + 1, c2, s2);
        }
    }

    // Nonnegative singular values.
    for i in 0..n {
        if diag[i] < 0.0 {
            diag[i] = -diag[i];
            for r in 0..u.rows() {
                u[(r, i)] = -u[(r, i)];
            }
        }
    }

    // Sort descending, permuting matching columns.
    for i in 0..n {
        let mut max_idx = i;
        for j in (i + 1)..n {
            if diag[j] > diag[max_idx] {
                max_idx = j;
            }
        }
        if max_idx != i {
            diag.swap(i, max_idx);
            for r in 0..u.rows() {
                let t = u[(r, i)];
                u[(r, i)] = u[(r, max_idx)];
                u[(r, max_idx)] = t;
            }
            for r in 0..v.rows() {
                let t = v[(r, i)];
                v[(r, i)] = v[(r, max_idx)];
                v[(r, max_idx)] = t;
            }
        }
    }

    Ok(())
}

/// Thin SVD of an arbitrary finite matrix: `a = u · diag(s) · vᵀ` with `s`
/// nonnegative descending, `u` m×r and `v` n×r (r = min(m, n)).
pub fn svd(a: &ImageMatrix) -> Result<(ImageMatrix, Vec<f64>, ImageMatrix)> {
    a.ensure_finite("svd input")?;
    let (m, n) = a.dims();
    if m < n {
        let (u, s, v) = svd_tall(&a.transpose())?;
        return Ok((v, s, u));
    }
    svd_tall(a)
}

fn svd_tall(a: &ImageMatrix) -> Result<(ImageMatrix, Vec<f64>, ImageMatrix)> {
    let mut w = bidiagonalize_work(a);
    bidiagonal_qr(&mut w.diag, &mut w.sup, &mut w.u, &mut w.v)?;
    Ok((w.u, w.diag, w.v))
}

/// Full bidiagonal SVD: both factorization stages, all five factors.
pub fn bsvd(a: &ImageMatrix) -> Result<FactorSet> {
    a.ensure_finite("bsvd input")?;
    let (m, n) = a.dims();
    if m < n {
        let f = bsvd_tall(&a.transpose())?;
        return Ok(FactorSet {
            u_a: f.v_a,
            u_b: f.v_b,
            s: f.s,
            v_b: f.u_b,
            v_a: f.u_a,
        });
    }
    bsvd_tall(a)
}

fn bsvd_tall(a: &ImageMatrix) -> Result<FactorSet> {
    let n = a.cols();
    let w = bidiagonalize_work(a);
    let u_a = w.u;
    let v_a = w.v;
    let mut diag = w.diag;
    let mut sup = w.sup;
    let mut u_b = ImageMatrix::identity(n);
    let mut v_b = ImageMatrix::identity(n);
    bidiagonal_qr(&mut diag, &mut sup, &mut u_b, &mut v_b)?;
    Ok(FactorSet {
        u_a,
        u_b,
        s: diag,
        v_b,
        v_a,
    })
}

/// Recomposes `u_a · u_b · Σ · v_bᵀ · v_aᵀ` with a replacement Σ.
pub fn compose(f: &FactorSet, sigma: Sigma) -> Result<ImageMatrix> {
    let r = f.s.len();
    let left = f.u_a.matmul(&f.u_b);
    let mid = match sigma {
        Sigma::Diag(d) => {
            if d.len() != r {
                return Err(Error::InvalidInput(format!(
                    "sigma diagonal length {} does not match factor rank {r}",
                    d.len()
                )));
            }
            left.mul_diag(d)
        }
        Sigma::Full(m) => {
            if m.dims() != (r, r) {
                return Err(Error::InvalidInput(format!(
                    "sigma matrix {}x{} does not match factor rank {r}",
                    m.rows(),
                    m.cols()
                )));
            }
            left.matmul(m)
        }
    };
    Ok(mid.matmul(&f.v_b.transpose()).matmul(&f.v_a.transpose()))
}

impl FactorSet {
    /// Reconstruction with the factor's own singular values.
    pub fn reconstruct(&self) -> ImageMatrix {
        compose(self, Sigma::Diag(&self.s)).expect("own diagonal always matches")
    }

    /// Worst orthogonality residual across all four orthogonal factors.
    pub fn orthogonality_residual(&self) -> f64 {
        self.u_a
            .orthogonality_residual()
            .max(self.u_b.orthogonality_residual())
            .max(self.v_b.orthogonality_residual())
            .max(self.v_a.orthogonality_residual())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(rows: usize, cols: usize, seed: u64) -> ImageMatrix {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15) | 1;
        ImageMatrix::from_fn(rows, cols, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
    }

    /// Independent oracle: cyclic Jacobi eigenvalue iteration on the Gram
    /// matrix AᵀA; singular values are the square roots of its eigenvalues.
    fn gram_singular_values(a: &ImageMatrix) -> Vec<f64> {
        let (m, n) = a.dims();
        let (mut g, r) = if m >= n {
            (a.transpose().matmul(a), n)
        } else {
            (a.matmul(&a.transpose()), m)
        };
        for _ in 0..100 {
            let mut off = 0.0;
            for p in 0..r {
                for q in (p + 1)..r {
                    off += g[(p, q)] * g[(p, q)];
                }
            }
            if off < 1e-24 * (1.0 + g.frobenius_norm()) {
                break;
            }
            for p in 0..r {
                for q in (p + 1)..r {
                    let apq = g[(p, q)];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let app = g[(p, p)];
                    let aqq = g[(q, q)];
                    let theta = 0.5 * (aqq - app) / apq;
                    let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..r {
                        let gkp = g[(k, p)];
                        let gkq = g[(k, q)];
                        g[(k, p)] = c * gkp - s * gkq;
                        g[(k, q)] = s * gkp + c * gkq;
                    }
                    for k in 0..r {
                        let gpk = g[(p, k)];
                        let gqk = g[(q, k)];
                        g[(p, k)] = c * gpk - s * gqk;
                        g[(q, k)] = s * gpk + c * gqk;
                    }
                }
            }
        }
        let mut evals: Vec<f64> = (0..r).map(|i| g[(i, i)].max(0.0).sqrt()).collect();
        evals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        evals
    }

    #[test]
    fn bidiagonalize_identity() {
        let a = ImageMatrix::identity(4);
        let (u, b, v) = bidiagonalize(&a).unwrap();
        // Nonnegative-diagonal convention pins B to the identity itself;
        // U and V are diagonal with +-1 entries.
        assert!(b.max_abs_diff(&ImageMatrix::identity(4)) < 1e-14);
        for i in 0..4 {
            for j in 0..4 {
                let (uv, vv) = (u[(i, j)], v[(i, j)]);
                if i == j {
                    assert!((uv.abs() - 1.0).abs() < 1e-14);
                    assert!((vv.abs() - 1.0).abs() < 1e-14);
                } else {
                    assert!(uv.abs() < 1e-14);
                    assert!(vv.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn bidiagonalize_preserves_bidiagonal_input() {
        let mut a = ImageMatrix::zeros(4, 4);
        for i in 0..4 {
            a[(i, i)] = (i + 1) as f64;
            if i + 1 < 4 {
                a[(i, i + 1)] = -(0.5 + i as f64);
            }
        }
        let (u, b, v) = bidiagonalize(&a).unwrap();
        for i in 0..4 {
            assert!((b[(i, i)] - a[(i, i)].abs()).abs() < 1e-12);
            if i + 1 < 4 {
                assert!((b[(i, i + 1)].abs() - a[(i, i + 1)].abs()).abs() < 1e-12);
            }
        }
        for m in [&u, &v] {
            for i in 0..4 {
                for j in 0..4 {
                    if i == j {
                        assert!((m[(i, j)].abs() - 1.0).abs() < 1e-12);
                    } else {
                        assert!(m[(i, j)].abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn bidiagonalize_reconstructs_and_zeroes_lower_triangle() {
        let a = test_matrix(16, 16, 42);
        let (u, b, v) = bidiagonalize(&a).unwrap();
        let rebuilt = u.matmul(&b).matmul(&v.transpose());
        assert!(rebuilt.max_abs_diff(&a) < 1e-12 * a.max_abs());
        for i in 0..16 {
            for j in 0..16 {
                if j != i && j != i + 1 {
                    assert_eq!(b[(i, j)], 0.0, "B[{i},{j}] must be exactly zero");
                }
            }
            assert!(b[(i, i)] >= 0.0, "diagonal sign convention");
        }
        assert!(u.orthogonality_residual() < 1e-10);
        assert!(v.orthogonality_residual() < 1e-10);
    }

    #[test]
    fn bidiagonalize_rejects_wide() {
        let a = ImageMatrix::zeros(3, 5);
        assert!(bidiagonalize(&a).is_err());
    }

    #[test]
    fn bidiagonalize_rejects_non_finite() {
        let mut a = ImageMatrix::zeros(3, 3);
        a[(1, 1)] = f64::INFINITY;
        assert!(bidiagonalize(&a).is_err());
    }

    #[test]
    fn svd_diagonal() {
        let mut a = ImageMatrix::zeros(3, 3);
        a[(0, 0)] = 3.0;
        a[(1, 1)] = 2.0;
        a[(2, 2)] = 1.0;
        let (_, s, _) = svd(&a).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-12);
        assert!((s[1] - 2.0).abs() < 1e-12);
        assert!((s[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_zero_matrix() {
        let a = ImageMatrix::zeros(5, 3);
        let (_, s, _) = svd(&a).unwrap();
        assert!(s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn svd_matches_gram_oracle_32() {
        let a = test_matrix(32, 32, 7);
        let (u, s, v) = svd(&a).unwrap();
        let oracle = gram_singular_values(&a);
        for (got, want) in s.iter().zip(&oracle) {
            assert!((got - want).abs() < 1e-9 * s[0], "{got} vs {want}");
        }
        let rebuilt = u.mul_diag(&s).matmul(&v.transpose());
        assert!(rebuilt.max_abs_diff(&a) < 1e-10 * a.max_abs().max(1.0));
    }

    #[test]
    fn svd_wide_matrix() {
        let a = test_matrix(5, 9, 31);
        let (u, s, v) = svd(&a).unwrap();
        assert_eq!(u.dims(), (5, 5));
        assert_eq!(v.dims(), (9, 5));
        let rebuilt = u.mul_diag(&s).matmul(&v.transpose());
        assert!(rebuilt.max_abs_diff(&a) < 1e-10);
        let oracle = gram_singular_values(&a);
        for (got, want) in s.iter().zip(&oracle) {
            assert!((got - want).abs() < 1e-9 * s[0].max(1.0));
        }
    }

    #[test]
    fn bsvd_identity_singular_values() {
        let f = bsvd(&ImageMatrix::identity(6)).unwrap();
        for &v in &f.s {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bsvd_rank_one() {
        let u: Vec<f64> = (0..8).map(|i| ((i + 1) as f64).sin()).collect();
        let norm_u: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v: Vec<f64> = (0..8).map(|i| ((2 * i + 3) as f64).cos()).collect();
        let norm_v: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let a = ImageMatrix::from_fn(8, 8, |r, c| u[r] / norm_u * v[c] / norm_v);
        let f = bsvd(&a).unwrap();
        assert!((f.s[0] - 1.0).abs() < 1e-10);
        for &x in &f.s[1..] {
            assert!(x.abs() < 1e-10);
        }
    }

    #[test]
    fn bsvd_agrees_with_direct_svd_many_random() {
        // Singular values from both factorization routes must agree.
        for seed in 0..50u64 {
            let m = 2 + (seed as usize * 7) % 63;
            let n = 2 + (seed as usize * 13) % 63;
            let a = test_matrix(m, n, seed + 100);
            let f = bsvd(&a).unwrap();
            let (_, s, _) = svd(&a).unwrap();
            let top = f.s[0].max(s[0]).max(1e-30);
            for (x, y) in f.s.iter().zip(&s) {
                assert!((x - y).abs() < 1e-9 * top, "seed {seed}: {x} vs {y}");
            }
            assert!(f.orthogonality_residual() < 1e-10, "seed {seed}");
            let rebuilt = f.reconstruct();
            assert!(rebuilt.max_abs_diff(&a) < 1e-9 * a.max_abs().max(1.0));
        }
    }

    #[test]
    fn bsvd_matches_gram_oracle() {
        for seed in 0..10u64 {
            let a = test_matrix(48, 33, seed);
            let f = bsvd(&a).unwrap();
            let oracle = gram_singular_values(&a);
            for (x, y) in f.s.iter().zip(&oracle) {
                assert!((x - y).abs() < 1e-9 * f.s[0].max(1.0));
            }
        }
    }

    #[test]
    fn compose_identity_roundtrip() {
        let a = test_matrix(20, 14, 9);
        let f = bsvd(&a).unwrap();
        let back = compose(&f, Sigma::Diag(&f.s)).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-9 * a.max_abs());
    }

    #[test]
    fn compose_zero_sigma_gives_zero() {
        let a = test_matrix(6, 6, 3);
        let f = bsvd(&a).unwrap();
        let zeros = vec![0.0; f.s.len()];
        let out = compose(&f, Sigma::Diag(&zeros)).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn compose_is_linear_in_sigma() {
        let a = test_matrix(10, 10, 17);
        let f = bsvd(&a).unwrap();
        let doubled: Vec<f64> = f.s.iter().map(|v| v * 2.0).collect();
        let out = compose(&f, Sigma::Diag(&doubled)).unwrap();
        assert!(out.max_abs_diff(&a.scaled(2.0)) < 1e-9 * a.max_abs());
    }

    #[test]
    fn compose_accepts_full_sigma() {
        let a = test_matrix(7, 7, 23);
        let f = bsvd(&a).unwrap();
        let mut full = ImageMatrix::zeros(7, 7);
        for (i, &v) in f.s.iter().enumerate() {
            full[(i, i)] = v;
        }
        let from_full = compose(&f, Sigma::Full(&full)).unwrap();
        let from_diag = compose(&f, Sigma::Diag(&f.s)).unwrap();
        assert!(from_full.max_abs_diff(&from_diag) < 1e-12);
    }

    #[test]
    fn compose_rejects_mismatched_sigma() {
        let a = test_matrix(6, 6, 4);
        let f = bsvd(&a).unwrap();
        assert!(compose(&f, Sigma::Diag(&[1.0, 2.0])).is_err());
        let wrong = ImageMatrix::zeros(2, 2);
        assert!(compose(&f, Sigma::Full(&wrong)).is_err());
    }

    #[test]
    fn determinism_bitwise() {
        let a = test_matrix(24, 24, 77);
        let f1 = bsvd(&a).unwrap();
        let f2 = bsvd(&a).unwrap();
        assert_eq!(f1.s, f2.s);
        assert_eq!(f1.u_a.as_slice(), f2.u_a.as_slice());
        assert_eq!(f1.u_b.as_slice(), f2.u_b.as_slice());
        assert_eq!(f1.v_b.as_slice(), f2.v_b.as_slice());
        assert_eq!(f1.v_a.as_slice(), f2.v_a.as_slice());
    }
}
