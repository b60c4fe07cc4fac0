//! Compares the three scheme variants on transparency and a few
//! representative attacks, mirroring the bench's scheme columns.
//!
//! ```bash
//! cargo run --release --example scheme_comparison
//! ```

use shearmark::attacks::{self, AttackSpec};
use shearmark::metrics::{self, Peak};
use shearmark::synth::{self, SynthHost};
use shearmark::watermark::{self, EmbedConfig, Scheme};

fn main() -> shearmark::Result<()> {
    let host = synth::host(SynthHost::Smooth, 512);
    let probes: Vec<AttackSpec> = ["JPEG 40", "AF 5", "RO 45", "HE"]
        .iter()
        .map(|t| t.parse().unwrap())
        .collect();

    println!(
        "{:<10} {:>8} {:>8} {:>8} | {:>8} {:>8} {:>8} {:>8}",
        "scheme", "psnr", "ssim", "rt nc", "JPEG40", "AF5", "RO45", "HE"
    );
    for scheme in Scheme::ALL {
        let config = EmbedConfig {
            scheme,
            ..EmbedConfig::default()
        };
        let (wr, _) = watermark::embedding_dims(&config, host.rows(), host.cols())?;
        let logo = synth::logo(wr);
        let outcome = watermark::embed(&host, &logo, &config)?;
        let wm8 = outcome.watermarked.quantize_u8();

        let psnr = metrics::psnr(&host, &wm8, Peak::default())?;
        let ssim = metrics::ssim(&host, &wm8)?;
        let rt = metrics::nc(
            &logo,
            &watermark::extract(&wm8, &outcome.key)?.quantize_u8(),
        )?;

        let mut cells = Vec::new();
        for spec in &probes {
            let attacked = attacks::apply_attack(&wm8, spec)?;
            let received = if spec.is_geometric() {
                attacks::register(&attacked, spec)?
            } else {
                attacked
            };
            let extracted = watermark::extract(&received, &outcome.key)?.quantize_u8();
            cells.push(metrics::nc(&logo, &extracted)?);
        }
        let psnr_txt = if psnr.is_infinite() {
            "inf".to_string()
        } else {
            format!("{psnr:.2}")
        };
        println!(
            "{:<10} {:>8} {:>8.4} {:>8.4} | {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            scheme.code(),
            psnr_txt,
            ssim,
            rt,
            cells[0],
            cells[1],
            cells[2],
            cells[3]
        );
    }
    Ok(())
}
