//! Bidiagonal SVD on a subband: factor shapes, orthogonality residuals,
//! reconstruction error, and agreement with the direct SVD.
//!
//! ```bash
//! cargo run --release --example bsvd_factors
//! ```

use shearmark::bsvd::{self, Sigma};
use shearmark::synth::{self, SynthHost};
use shearmark::wavelet::{self, WaveletFilterPair};

fn main() -> shearmark::Result<()> {
    let host = synth::host(SynthHost::Smooth, 256);
    let bands = wavelet::dwt_forward(&host, &WaveletFilterPair::haar())?;
    let plane = &bands.ll;

    let (u_a, b, v_a) = bsvd::bidiagonalize(plane)?;
    println!(
        "bidiagonalization of the {}x{} low band:",
        plane.rows(),
        plane.cols()
    );
    println!("  U_A orthogonality residual: {:.3e}", u_a.orthogonality_residual());
    println!("  V_A orthogonality residual: {:.3e}", v_a.orthogonality_residual());
    let rebuilt = u_a.matmul(&b).matmul(&v_a.transpose());
    println!(
        "  U_A B V_A^T reconstruction error: {:.3e}",
        rebuilt.max_abs_diff(plane) / plane.max_abs()
    );

    let factors = bsvd::bsvd(plane)?;
    println!("\nfull factorization:");
    println!("  worst factor orthogonality residual: {:.3e}", factors.orthogonality_residual());
    println!(
        "  composition error: {:.3e}",
        factors.reconstruct().max_abs_diff(plane) / plane.max_abs()
    );
    println!(
        "  singular values: s[0] = {:.1}, s[8] = {:.1}, s[{}] = {:.3e}",
        factors.s[0],
        factors.s[8],
        factors.s.len() - 1,
        factors.s[factors.s.len() - 1]
    );

    // Both factorization routes deliver the same singular values.
    let (_, direct, _) = bsvd::svd(plane)?;
    let worst = factors
        .s
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("  max |bsvd - svd| over singular values: {:.3e}", worst);

    // Halving the singular values halves the plane.
    let halved: Vec<f64> = factors.s.iter().map(|v| v / 2.0).collect();
    let half_plane = bsvd::compose(&factors, Sigma::Diag(&halved))?;
    println!(
        "  compose with s/2 gives plane/2: {:.3e}",
        half_plane.max_abs_diff(&plane.scaled(0.5))
    );
    Ok(())
}
