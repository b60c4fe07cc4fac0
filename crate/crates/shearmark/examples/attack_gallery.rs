//! Applies the full default attack catalog to a watermarked image, saves
//! every attacked image, and prints the extraction NC per attack.
//!
//! ```bash
//! cargo run --release --example attack_gallery
//! ```

use std::fs;
use std::path::Path;

use shearmark::attacks;
use shearmark::image_io;
use shearmark::metrics;
use shearmark::synth::{self, SynthHost};
use shearmark::watermark::{self, EmbedConfig};

fn main() -> shearmark::Result<()> {
    let out_dir = Path::new("target/examples/attack_gallery");
    fs::create_dir_all(out_dir)?;

    let host = synth::host(SynthHost::Smooth, 512);
    let logo = synth::logo(256);
    let outcome = watermark::embed(&host, &logo, &EmbedConfig::default())?;
    let watermarked = outcome.watermarked.quantize_u8();

    println!("{:<12} {:>10} {:>8}", "attack", "registered", "nc");
    for (i, spec) in attacks::default_catalog().iter().enumerate() {
        let spec = if spec.is_noise() && spec.seed().is_none() {
            spec.with_seed(42 + i as u64)
        } else {
            spec.clone()
        };
        let attacked = attacks::apply_attack(&watermarked, &spec)?;
        let name = format!("{:02}_{}", i, spec.to_string().replace([' ', ','], "_"));
        image_io::save(&out_dir.join(format!("{name}.png")), &attacked)?;

        let received = if spec.is_geometric() {
            attacks::register(&attacked, &spec)?
        } else {
            attacked
        };
        let extracted = watermark::extract(&received, &outcome.key)?.quantize_u8();
        let nc = metrics::nc(&logo, &extracted)?;
        println!(
            "{:<12} {:>10} {:>8.4}",
            spec.to_string(),
            if spec.is_geometric() { "yes" } else { "-" },
            nc
        );
    }
    println!("\nattacked images in {}", out_dir.display());
    Ok(())
}
