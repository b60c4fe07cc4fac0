//! Shearlet system tour: plane inventory, frame tightness, reconstruction
//! error, and a look at how energy spreads over the directional planes.
//!
//! ```bash
//! cargo run --release --example shearlet_planes
//! ```

use shearmark::shearlet;
use shearmark::synth::{self, SynthHost};

fn main() -> shearmark::Result<()> {
    let system = shearlet::build_system(256, 256, 3, &[0, 1, 1])?;
    println!(
        "system 256x256, 3 scales, levels [0,1,1]: {} planes",
        system.n_planes()
    );
    println!("frame tightness deviation: {:.3e}", system.frame_deviation());

    let image = synth::host(SynthHost::Texture, 256);
    let coeffs = system.decompose(&image)?;

    let total: f64 = image.as_slice().iter().map(|v| v * v).sum();
    println!("\n{:<6} {:>5} {:>6} {:>6} {:>10}", "plane", "scale", "cone", "shear", "energy %");
    for (i, ix) in system.index().iter().enumerate() {
        let energy: f64 = coeffs.plane(i).as_slice().iter().map(|v| v * v).sum();
        println!(
            "{:<6} {:>5} {:>6} {:>6} {:>9.3}%",
            i,
            ix.scale,
            ix.cone.to_string(),
            ix.shear,
            100.0 * energy / total
        );
    }

    let back = system.reconstruct(&coeffs)?;
    let rel = back.sub(&image).frobenius_norm() / image.frobenius_norm();
    println!("\nadjoint reconstruction relative L2 error: {rel:.3e}");

    let sel = shearlet::SubbandSelector::default_embedding();
    let plane = system.resolve(&sel)?;
    println!("default embedding selector {sel} resolves to plane {plane}");
    Ok(())
}
