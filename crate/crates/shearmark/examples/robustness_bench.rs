//! Desk-scale robustness bench over the three synthetic hosts and all
//! scheme variants; writes bench.csv and bench.json.
//!
//! ```bash
//! cargo run --release --example robustness_bench
//! ```

use std::path::PathBuf;

use shearmark::attacks;
use shearmark::bench::{run_bench, BenchConfig, NamedImage};
use shearmark::synth::{self, SynthHost};
use shearmark::watermark::{EmbedConfig, Scheme};

fn main() -> shearmark::Result<()> {
    let out_dir = PathBuf::from("target/examples/robustness_bench");
    let config = BenchConfig {
        hosts: SynthHost::ALL
            .iter()
            .map(|&kind| NamedImage {
                name: kind.name().to_string(),
                image: synth::host(kind, 512),
            })
            .collect(),
        watermark: NamedImage {
            name: "synthetic-logo".to_string(),
            image: synth::logo(256),
        },
        embed: EmbedConfig::default(),
        catalog: attacks::default_catalog(),
        schemes: vec![Scheme::DwtDst, Scheme::DwtOnly, Scheme::DstOnly],
        base_seed: 42,
        out_dir: out_dir.clone(),
        size: Some(128),
        register_geometric: true,
        threads: std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
    };

    let report = run_bench(&config)?;
    let (csv_path, json_path) = report.write(&out_dir)?;
    println!("cells: {} transparency + {} robustness, {} errors", report.transparency.len(), report.robustness.len(), report.error_count());
    for row in &report.transparency {
        println!(
            "{}/{}: psnr {:.2} ssim {:.4} roundtrip nc {:.4}",
            row.host, row.scheme, row.psnr, row.ssim, row.nc
        );
    }
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    Ok(())
}
