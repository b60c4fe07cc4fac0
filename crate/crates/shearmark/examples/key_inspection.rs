//! Writes a key file, reads it back, and prints what extraction actually
//! depends on — also demonstrates the corruption diagnostics.
//!
//! ```bash
//! cargo run --release --example key_inspection
//! ```

use std::fs;
use std::path::Path;

use shearmark::synth::{self, SynthHost};
use shearmark::watermark::{self, EmbedConfig};

fn main() -> shearmark::Result<()> {
    let out_dir = Path::new("target/examples/key_inspection");
    fs::create_dir_all(out_dir)?;

    let host = synth::host(SynthHost::Structured, 256);
    let logo = synth::logo(128);
    let outcome = watermark::embed(&host, &logo, &EmbedConfig::default())?;

    let path = out_dir.join("demo.smk");
    watermark::write_key(&outcome.key, &path)?;
    let size = fs::metadata(&path)?.len();
    println!("key file: {} ({size} bytes)", path.display());

    let key = watermark::read_key(&path)?;
    println!("  version:      {}", key.format_version);
    println!("  scheme:       {}", key.config.scheme);
    println!("  alpha:        {}", key.config.alpha);
    println!("  wavelet:      {}", key.config.wavelet);
    println!("  shear levels: {:?}", key.config.shear_levels);
    println!("  selector:     {}", key.config.selector);
    println!("  host dims:    {}x{}", key.host_rows, key.host_cols);
    println!("  mark dims:    {}x{}", key.wm_rows, key.wm_cols);
    println!("  stored rank:  {} singular values", key.s.len());
    println!(
        "  u_w/v_w orthogonality residuals: {:.2e} / {:.2e}",
        key.u_w.orthogonality_residual(),
        key.v_w.orthogonality_residual()
    );

    // Corrupt one byte in the middle; the reader pinpoints the failure.
    let mut bytes = fs::read(&path)?;
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x10;
    let corrupt = out_dir.join("corrupt.smk");
    fs::write(&corrupt, &bytes)?;
    match watermark::read_key(&corrupt) {
        Err(e) => println!("\ncorrupted copy rejected: {e}"),
        Ok(_) => println!("\nunexpected: corrupted key parsed"),
    }
    Ok(())
}
