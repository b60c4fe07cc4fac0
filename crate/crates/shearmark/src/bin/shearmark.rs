//! Command-line front end: embed, extract, attack, metrics and the full
//! robustness bench. All logic lives in the library; this binary only maps
//! arguments and files onto it.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use shearmark::attacks::{self, AttackSpec};
use shearmark::bench::{self, BenchConfig, NamedImage};
use shearmark::image_io;
use shearmark::metrics;
use shearmark::shearlet::SubbandSelector;
use shearmark::synth::{self, SynthHost};
use shearmark::watermark::{self, EmbedConfig, Scheme};
use shearmark::{Error, Result};

#[derive(Parser)]
#[command(
    name = "shearmark",
    version,
    about = "Gray-scale image watermarking in wavelet/shearlet subband singular values"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a watermark into a host image and write the key file.
    Embed(EmbedArgs),
    /// Extract a watermark from a (possibly attacked) image using a key.
    Extract(ExtractArgs),
    /// Apply one attack to an image.
    Attack(AttackArgs),
    /// Run the full host x scheme x attack robustness bench.
    Bench(BenchArgs),
    /// Compute MSE / PSNR / SSIM / NC between two images.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct EmbedOpts {
    /// Scaling factor trading transparency against robustness.
    #[arg(long, default_value_t = 0.008)]
    alpha: f64,
    /// Scheme variant: dwt-dst, dwt-only or dst-only.
    #[arg(long, default_value = "dwt-dst")]
    scheme: String,
    /// Wavelet filter: haar or db4.
    #[arg(long, default_value = "haar")]
    wavelet: String,
    /// Shearlet scale count.
    #[arg(long, default_value_t = 3)]
    scales: usize,
    /// Comma-separated shear level per scale.
    #[arg(long, default_value = "0,1,1")]
    shear_levels: String,
    /// Embedding subband selector, scale:cone:shear (cone h, v or low).
    #[arg(long, default_value = "1:v:0")]
    subband: String,
}

impl EmbedOpts {
    fn to_config(&self) -> Result<EmbedConfig> {
        let shear_levels = self
            .shear_levels
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidConfig(format!("bad shear level '{t}'")))
            })
            .collect::<Result<Vec<u32>>>()?;
        let config = EmbedConfig {
            alpha: self.alpha,
            scheme: Scheme::from_str(&self.scheme)?,
            wavelet: self.wavelet.clone(),
            n_scales: self.scales,
            shear_levels,
            selector: SubbandSelector::from_str(&self.subband)?,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct EmbedArgs {
    /// Host image (.png, .pgm or .smf).
    #[arg(long)]
    host: PathBuf,
    /// Watermark image.
    #[arg(long)]
    wm: PathBuf,
    /// Output watermarked image; use .smf to keep full precision.
    #[arg(long)]
    out: PathBuf,
    /// Output key file.
    #[arg(long)]
    key: PathBuf,
    /// Also write a lossless .smf copy of the watermarked image.
    #[arg(long)]
    lossless: Option<PathBuf>,
    #[command(flatten)]
    opts: EmbedOpts,
}

#[derive(Args)]
struct ExtractArgs {
    /// Received image.
    #[arg(long = "in")]
    input: PathBuf,
    /// Key file written at embedding time.
    #[arg(long)]
    key: PathBuf,
    /// Output path for the extracted watermark.
    #[arg(long)]
    out: PathBuf,
    /// Reference watermark; when given, NC against it is printed.
    #[arg(long = "ref")]
    reference: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    /// Input image.
    #[arg(long = "in")]
    input: PathBuf,
    /// Attack spec, e.g. "SP 0.04" or "TR 20,35" (see the catalog grammar).
    #[arg(long)]
    spec: String,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
    /// Seed for noise attacks without an inline seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Apply known-parameter registration after a geometric attack.
    #[arg(long)]
    register: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Host image paths.
    #[arg(long, num_args = 1..)]
    hosts: Vec<PathBuf>,
    /// Use the three built-in synthetic hosts instead of files.
    #[arg(long)]
    synthetic: bool,
    /// Watermark image path; defaults to the built-in synthetic logo.
    #[arg(long)]
    wm: Option<PathBuf>,
    /// Attack catalog file; defaults to the bundled grid.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Comma-separated schemes to compare.
    #[arg(long, default_value = "dwt-dst,dwt-only,dst-only")]
    schemes: String,
    /// Base seed (the SHEARMARK_SEED env var overrides the default of 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for bench.csv and bench.json.
    #[arg(long, default_value = "bench-out")]
    out_dir: PathBuf,
    /// Desk-scale mode: resize hosts to this square size first.
    #[arg(long)]
    size: Option<usize>,
    /// Evaluate geometric attacks raw instead of re-registered.
    #[arg(long)]
    no_register: bool,
    /// Worker threads for attack cells.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    opts: EmbedOpts,
}

#[derive(Args)]
struct MetricsArgs {
    /// Reference image.
    #[arg(long)]
    a: PathBuf,
    /// Comparison image.
    #[arg(long)]
    b: PathBuf,
    /// Use the literal per-image maximum of `a` as the PSNR peak.
    #[arg(long)]
    peak_literal: bool,
}

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.2}")
    }
}

fn named(path: &PathBuf) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn cmd_embed(args: &EmbedArgs) -> Result<()> {
    let config = args.opts.to_config()?;
    let host = image_io::load(&args.host)?;
    let wm = image_io::load(&args.wm)?;
    let outcome = watermark::embed(&host, &wm, &config)?;
    image_io::save(&args.out, &outcome.watermarked)?;
    if let Some(lossless) = &args.lossless {
        image_io::save(lossless, &outcome.watermarked)?;
    }
    watermark::write_key(&outcome.key, &args.key)?;

    let written = image_io::load(&args.out)?;
    let psnr = metrics::psnr(&host, &written, metrics::Peak::default())?;
    let ssim = metrics::ssim(&host, &written)?;
    println!(
        "embedded {} into {} (scheme {}, alpha {})",
        args.wm.display(),
        args.host.display(),
        config.scheme,
        config.alpha
    );
    println!("psnr: {} dB", fmt_db(psnr));
    println!("ssim: {ssim:.4}");
    Ok(())
}

fn cmd_extract(args: &ExtractArgs) -> Result<()> {
    let key = watermark::read_key(&args.key)?;
    let image = image_io::load(&args.input)?;
    let extracted = watermark::extract(&image, &key)?;
    image_io::save(&args.out, &extracted)?;
    println!("extracted watermark written to {}", args.out.display());
    if let Some(reference) = &args.reference {
        let wm = image_io::load(reference)?;
        let written = image_io::load(&args.out)?;
        let nc = metrics::nc(&wm, &written)?;
        println!("nc: {nc:.4}");
    }
    Ok(())
}

fn cmd_attack(args: &AttackArgs) -> Result<()> {
    let mut spec = AttackSpec::from_str(&args.spec)?;
    if spec.is_noise() && spec.seed().is_none() {
        let seed = args.seed.ok_or_else(|| {
            Error::InvalidSpec("noise attack needs --seed or an inline seed=N".into())
        })?;
        spec = spec.with_seed(seed);
    }
    let image = image_io::load(&args.input)?;
    let mut out = attacks::apply_attack(&image, &spec)?;
    if args.register {
        if !spec.is_geometric() {
            return Err(Error::InvalidSpec(format!(
                "{} is not a geometric attack, nothing to register",
                spec.kind_code()
            )));
        }
        out = attacks::register(&out, &spec)?;
    }
    image_io::save(&args.out, &out)?;
    println!("applied {spec} -> {}", args.out.display());
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let hosts = if args.synthetic {
        SynthHost::ALL
            .iter()
            .map(|&kind| NamedImage {
                name: kind.name().to_string(),
                image: synth::host(kind, 512),
            })
            .collect()
    } else {
        if args.hosts.is_empty() {
            return Err(Error::InvalidConfig(
                "bench needs --hosts or --synthetic".into(),
            ));
        }
        args.hosts
            .iter()
            .map(|p| {
                Ok(NamedImage {
                    name: named(p),
                    image: image_io::load(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };

    let watermark = match &args.wm {
        Some(path) => NamedImage {
            name: named(path),
            image: image_io::load(path)?,
        },
        None => NamedImage {
            name: "synthetic-logo".to_string(),
            image: synth::logo(256),
        },
    };

    let catalog = match &args.catalog {
        Some(path) => attacks::parse_catalog_file(path)?,
        None => attacks::default_catalog(),
    };

    let schemes = args
        .schemes
        .split(',')
        .map(|t| Scheme::from_str(t.trim()))
        .collect::<Result<Vec<_>>>()?;

    // Seed priority: --seed flag, then SHEARMARK_SEED, then 42.
    let base_seed = match args.seed {
        Some(s) => s,
        None => match std::env::var("SHEARMARK_SEED") {
            Ok(v) => v
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad SHEARMARK_SEED '{v}'")))?,
            Err(_) => 42,
        },
    };

    let config = BenchConfig {
        hosts,
        watermark,
        embed: args.opts.to_config()?,
        catalog,
        schemes,
        base_seed,
        out_dir: args.out_dir.clone(),
        size: args.size,
        register_geometric: !args.no_register,
        threads: args.threads.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        }),
    };

    let report = bench::run_bench(&config)?;
    let (csv_path, json_path) = report.write(&config.out_dir)?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    for row in &report.transparency {
        println!(
            "{}/{}: psnr {} ssim {:.4} roundtrip nc {:.4}",
            row.host,
            row.scheme,
            fmt_db(row.psnr),
            row.ssim,
            row.nc
        );
    }
    let errors = report.error_count();
    if errors > 0 {
        return Err(Error::InvalidInput(format!(
            "{errors} bench cell(s) failed; see {}",
            json_path.display()
        )));
    }
    Ok(())
}

fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let a = image_io::load(&args.a)?;
    let b = image_io::load(&args.b)?;
    let peak = if args.peak_literal {
        metrics::Peak::InputMax
    } else {
        metrics::Peak::default()
    };
    let report = metrics::report(&a, &b, peak)?;
    println!("mse:  {:.6}", report.mse);
    println!("psnr: {} dB", fmt_db(report.psnr));
    println!("ssim: {:.4}", report.ssim);
    if report.nc_degenerate {
        println!("nc:   {:.4} (degenerate: constant input)", report.nc);
    } else {
        println!("nc:   {:.4}", report.nc);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Embed(args) => cmd_embed(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Metrics(args) => cmd_metrics(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
