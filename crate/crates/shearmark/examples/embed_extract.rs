//! End-to-end walkthrough: embed the synthetic logo into a synthetic host,
//! save everything, extract the mark back and score it.
//!
//! ```bash
//! cargo run --release --example embed_extract
//! ```

use std::fs;
use std::path::Path;

use shearmark::image_io;
use shearmark::metrics::{self, Peak};
use shearmark::synth::{self, SynthHost};
use shearmark::watermark::{self, EmbedConfig};

fn main() -> shearmark::Result<()> {
    let out_dir = Path::new("target/examples/embed_extract");
    fs::create_dir_all(out_dir)?;

    let host = synth::host(SynthHost::Smooth, 512);
    let logo = synth::logo(256);
    let config = EmbedConfig::default();

    let outcome = watermark::embed(&host, &logo, &config)?;
    let watermarked = outcome.watermarked.quantize_u8();

    image_io::save(&out_dir.join("host.png"), &host)?;
    image_io::save(&out_dir.join("logo.png"), &logo)?;
    image_io::save(&out_dir.join("watermarked.png"), &watermarked)?;
    watermark::write_key(&outcome.key, &out_dir.join("watermarked.smk"))?;

    let psnr = metrics::psnr(&host, &watermarked, Peak::default())?;
    let ssim = metrics::ssim(&host, &watermarked)?;
    println!("transparency: psnr {psnr:.2} dB, ssim {ssim:.4}");

    let extracted = watermark::extract(&watermarked, &outcome.key)?.quantize_u8();
    image_io::save(&out_dir.join("extracted.png"), &extracted)?;
    let nc = metrics::nc(&logo, &extracted)?;
    println!("no-attack extraction: nc {nc:.4}");
    println!("outputs in {}", out_dir.display());
    Ok(())
}
