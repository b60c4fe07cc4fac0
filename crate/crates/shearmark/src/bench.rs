//! Robustness bench: embeds into every host with every scheme, applies the
//! attack catalog, extracts, and reports transparency (PSNR/SSIM) plus
//! per-attack NC in CSV and JSON form.
//!
//! The grid is complete by construction: a failed cell is recorded as an
//! error cell rather than dropped. Attacks operate on the 8-bit quantized
//! watermarked image. Geometric attacks are re-registered with their known
//! parameters before extraction unless raw mode is requested; every such
//! cell is tagged with its registration mode. Noise cells get deterministic
//! per-cell seeds derived from the base seed, host name, scheme and attack
//! position, so reruns with one seed reproduce the report byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::attacks::{self, AttackSpec};
use crate::error::{Error, Result};
use crate::matrix::ImageMatrix;
use crate::metrics;
use crate::resample;
use crate::watermark::{self, EmbedConfig, Scheme};

/// An image with the name it is reported under.
#[derive(Debug, Clone)]
pub struct NamedImage {
    pub name: String,
    pub image: ImageMatrix,
}

/// Full bench configuration.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub hosts: Vec<NamedImage>,
    pub watermark: NamedImage,
    /// Embedding parameters; the scheme field is overridden per grid column.
    pub embed: EmbedConfig,
    pub catalog: Vec<AttackSpec>,
    pub schemes: Vec<Scheme>,
    pub base_seed: u64,
    pub out_dir: PathBuf,
    /// Desk-scale mode: resize hosts to this square size before the run.
    pub size: Option<usize>,
    /// Invert geometric attacks with their known parameters before
    /// extraction.
    pub register_geometric: bool,
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchMetadata {
    pub tool_version: String,
    pub base_seed: u64,
    pub config_hash: String,
    pub registered_mode: bool,
    pub size: Option<usize>,
}

/// Per (host, scheme) imperceptibility of the watermarked image, plus the
/// no-attack extraction NC.
#[derive(Debug, Clone, Serialize)]
pub struct TransparencyRow {
    pub host: String,
    pub scheme: String,
    pub psnr: f64,
    pub ssim: f64,
    pub nc: f64,
}

/// Per (host, scheme, attack) extraction quality.
#[derive(Debug, Clone, Serialize)]
pub struct RobustnessRow {
    pub host: String,
    pub scheme: String,
    pub attack: String,
    pub params: String,
    /// `Some` for geometric attacks: whether re-registration ran.
    pub registered: Option<bool>,
    pub nc: Option<f64>,
    pub seed: Option<u64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub metadata: BenchMetadata,
    pub transparency: Vec<TransparencyRow>,
    pub robustness: Vec<RobustnessRow>,
}

const CSV_HEADER: &str = "host,scheme,attack,params,registered,nc,psnr,ssim,seed";

fn fmt_f(v: f64, decimals: usize) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.decimals$}")
    }
}

impl BenchReport {
    pub fn error_count(&self) -> usize {
        self.robustness.iter().filter(|r| r.error.is_some()).count()
    }

    /// Stable CSV rendering: transparency rows (attack `none`) first, then
    /// the robustness grid in its deterministic order.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for t in &self.transparency {
            let _ = writeln!(
                out,
                "{},{},none,,,{},{},{},",
                t.host,
                t.scheme,
                fmt_f(t.nc, 4),
                fmt_f(t.psnr, 2),
                fmt_f(t.ssim, 4)
            );
        }
        for r in &self.robustness {
            let registered = match r.registered {
                Some(true) => "true",
                Some(false) => "false",
                None => "",
            };
            let nc = match (&r.error, r.nc) {
                (Some(_), _) => "err".to_string(),
                (None, Some(v)) => fmt_f(v, 4),
                (None, None) => String::new(),
            };
            let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},\"{}\",{},{},,,{}",
                r.host, r.scheme, r.attack, r.params, registered, nc, seed
            );
        }
        out
    }

    /// Writes `bench.csv` and `bench.json` atomically (temp file + rename).
    pub fn write(&self, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(out_dir)?;
        let csv_path = out_dir.join("bench.csv");
        let json_path = out_dir.join("bench.json");
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        atomic_write(&csv_path, self.to_csv().as_bytes())?;
        atomic_write(&json_path, json.as_bytes())?;
        Ok((csv_path, json_path))
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic per-cell seed from the base seed and the cell address.
pub fn derive_cell_seed(base: u64, host: &str, scheme: Scheme, attack_idx: usize) -> u64 {
    let mut z = base;
    z = mix64(z ^ fnv1a64(host.as_bytes()));
    z = mix64(z ^ fnv1a64(scheme.code().as_bytes()));
    mix64(z ^ attack_idx as u64)
}

fn config_hash(config: &BenchConfig) -> String {
    let mut desc = String::new();
    let _ = write!(
        desc,
        "alpha={};wavelet={};scales={};levels={:?};selector={};seed={};size={:?};register={};",
        config.embed.alpha,
        config.embed.wavelet,
        config.embed.n_scales,
        config.embed.shear_levels,
        config.embed.selector,
        config.base_seed,
        config.size,
        config.register_geometric
    );
    for s in &config.schemes {
        let _ = write!(desc, "scheme={s};");
    }
    for a in &config.catalog {
        let _ = write!(desc, "attack={a};");
    }
    for h in &config.hosts {
        let _ = write!(desc, "host={};", h.name);
    }
    let _ = write!(desc, "wm={};", config.watermark.name);
    format!("{:016x}", fnv1a64(desc.as_bytes()))
}

/// One embedded (host, scheme) pair, shared by that pair's attack cells.
struct EmbeddedCell {
    host_idx: usize,
    scheme: Scheme,
    host8: ImageMatrix,
    watermarked8: ImageMatrix,
    reference_wm: ImageMatrix,
    key: watermark::WatermarkKey,
}

/// Runs the full grid and assembles the report. Cell failures become error
/// cells; the report is complete either way.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    if config.hosts.is_empty() {
        return Err(Error::InvalidConfig("bench needs at least one host".into()));
    }
    if config.schemes.is_empty() {
        return Err(Error::InvalidConfig("bench needs at least one scheme".into()));
    }
    config.embed.validate()?;
    for spec in &config.catalog {
        spec.validate()?;
    }

    // Desk-scale mode: shrink hosts up front.
    let hosts: Vec<NamedImage> = config
        .hosts
        .iter()
        .map(|h| {
            let image = match config.size {
                Some(s) => resample::resize(&h.image, s, s).quantize_u8(),
                None => h.image.quantize_u8(),
            };
            NamedImage {
                name: h.name.clone(),
                image,
            }
        })
        .collect();

    // Embeds are cheap relative to the attack grid; run them up front.
    let mut transparency = Vec::new();
    let mut embedded = Vec::new();
    for (host_idx, host) in hosts.iter().enumerate() {
        for &scheme in &config.schemes {
            let embed_config = EmbedConfig {
                scheme,
                ..config.embed.clone()
            };
            let (wr, wc) =
                watermark::embedding_dims(&embed_config, host.image.rows(), host.image.cols())?;
            let reference_wm =
                resample::resize(&config.watermark.image, wr, wc).quantize_u8();
            let outcome = watermark::embed(&host.image, &reference_wm, &embed_config)?;
            let watermarked8 = outcome.watermarked.quantize_u8();

            let psnr = metrics::psnr(&host.image, &watermarked8, metrics::Peak::default())?;
            let ssim = metrics::ssim(&host.image, &watermarked8)?;
            // NC is scored on the extracted watermark as it would be written
            // to disk: quantized to 8 bits, which also bounds the blown-up
            // values extraction produces for damaged modes.
            let extracted = watermark::extract(&watermarked8, &outcome.key)?.quantize_u8();
            let nc = metrics::nc(&reference_wm, &extracted)?;
            transparency.push(TransparencyRow {
                host: host.name.clone(),
                scheme: scheme.code().to_string(),
                psnr,
                ssim,
                nc,
            });
            embedded.push(EmbeddedCell {
                host_idx,
                scheme,
                host8: host.image.clone(),
                watermarked8,
                reference_wm,
                key: outcome.key,
            });
        }
    }

    // Attack cells, executed concurrently and assembled in index order.
    let n_attacks = config.catalog.len();
    let total_cells = embedded.len() * n_attacks;
    let results: Mutex<Vec<Option<RobustnessRow>>> = Mutex::new(vec![None; total_cells]);
    let next: AtomicUsize = AtomicUsize::new(0);
    let threads = config.threads.max(1).min(total_cells.max(1));

    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let cell = next.fetch_add(1, Ordering::Relaxed);
                if cell >= total_cells {
                    break;
                }
                let pair = &embedded[cell / n_attacks];
                let attack_idx = cell % n_attacks;
                let spec = &config.catalog[attack_idx];
                let host_name = &hosts[pair.host_idx].name;
                let row = run_cell(config, pair, host_name, attack_idx, spec);
                results.lock().unwrap()[cell] = Some(row);
            });
        }
    });

    let robustness = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every cell filled"))
        .collect();

    Ok(BenchReport {
        metadata: BenchMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            base_seed: config.base_seed,
            config_hash: config_hash(config),
            registered_mode: config.register_geometric,
            size: config.size,
        },
        transparency,
        robustness,
    })
}

fn run_cell(
    config: &BenchConfig,
    pair: &EmbeddedCell,
    host_name: &str,
    attack_idx: usize,
    spec: &AttackSpec,
) -> RobustnessRow {
    let derived = derive_cell_seed(config.base_seed, host_name, pair.scheme, attack_idx);
    let spec = if spec.is_noise() && spec.seed().is_none() {
        spec.with_seed(derived)
    } else {
        spec.clone()
    };
    let registered = spec
        .is_geometric()
        .then_some(config.register_geometric);

    let outcome = (|| -> Result<f64> {
        let attacked = attacks::apply_attack(&pair.watermarked8, &spec)?;
        let received = if spec.is_geometric() && config.register_geometric {
            attacks::register(&attacked, &spec)?
        } else {
            attacked
        };
        let extracted = watermark::extract(&received, &pair.key)?.quantize_u8();
        metrics::nc(&pair.reference_wm, &extracted)
    })();

    let mut row = RobustnessRow {
        host: host_name.to_string(),
        scheme: pair.scheme.code().to_string(),
        attack: spec.kind_code().to_string(),
        params: spec.params_string(),
        registered,
        nc: None,
        seed: spec.seed(),
        error: None,
    };
    match outcome {
        Ok(nc) => row.nc = Some(nc),
        Err(e) => row.error = Some(format!("{e}")),
    }
    let _ = &pair.host8; // kept for future per-cell metrics on attacked images
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn tiny_config(out: &Path) -> BenchConfig {
        BenchConfig {
            hosts: vec![NamedImage {
                name: "synthetic-smooth".into(),
                image: synth::host(synth::SynthHost::Smooth, 512),
            }],
            watermark: NamedImage {
                name: "logo".into(),
                image: synth::logo(256),
            },
            embed: EmbedConfig::default(),
            catalog: attacks::parse_catalog("JPEG 40\nFL h\nSP 0.01\n").unwrap(),
            schemes: vec![Scheme::DwtDst],
            base_seed: 42,
            out_dir: out.to_path_buf(),
            size: Some(128),
            register_geometric: true,
            threads: 2,
        }
    }

    fn tmp_dir(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("shearmark-bench-tests").join(name);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn grid_is_complete_and_deterministic() {
        let dir = tmp_dir("grid");
        let config = tiny_config(&dir);
        let report1 = run_bench(&config).unwrap();
        let report2 = run_bench(&config).unwrap();
        assert_eq!(report1.transparency.len(), 1);
        assert_eq!(report1.robustness.len(), 3);
        assert_eq!(report1.error_count(), 0);
        assert_eq!(report1.to_csv(), report2.to_csv());
        // CSV row count: header + transparency + robustness.
        assert_eq!(report1.to_csv().lines().count(), 1 + 1 + 3);
        assert!(report1.to_csv().starts_with(CSV_HEADER));
    }

    #[test]
    fn different_seed_changes_noise_cells_only() {
        let dir = tmp_dir("seeds");
        let mut config = tiny_config(&dir);
        let r1 = run_bench(&config).unwrap();
        config.base_seed = 43;
        let r2 = run_bench(&config).unwrap();
        // JPEG and FL are deterministic, SP is seeded.
        for (a, b) in r1.robustness.iter().zip(&r2.robustness) {
            if a.attack == "SP" {
                assert_ne!(a.seed, b.seed);
            } else {
                assert_eq!(a.nc, b.nc, "{}", a.attack);
            }
        }
    }

    #[test]
    fn report_files_written_atomically() {
        let dir = tmp_dir("files");
        let config = tiny_config(&dir);
        let report = run_bench(&config).unwrap();
        let (csv_path, json_path) = report.write(&dir).unwrap();
        assert!(csv_path.exists());
        assert!(json_path.exists());
        assert!(!csv_path.with_extension("tmp").exists());
        let text = fs::read_to_string(&csv_path).unwrap();
        assert_eq!(text, report.to_csv());
        let parsed: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
        assert_eq!(parsed["metadata"]["base_seed"], 42);
    }

    #[test]
    fn empty_hosts_rejected() {
        let dir = tmp_dir("empty");
        let mut config = tiny_config(&dir);
        config.hosts.clear();
        assert!(run_bench(&config).is_err());
    }

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let a = derive_cell_seed(42, "hostA", Scheme::DwtDst, 0);
        let b = derive_cell_seed(42, "hostA", Scheme::DwtDst, 0);
        assert_eq!(a, b);
        assert_ne!(a, derive_cell_seed(42, "hostA", Scheme::DwtDst, 1));
        assert_ne!(a, derive_cell_seed(42, "hostB", Scheme::DwtDst, 0));
        assert_ne!(a, derive_cell_seed(42, "hostA", Scheme::DstOnly, 0));
        assert_ne!(a, derive_cell_seed(43, "hostA", Scheme::DwtDst, 0));
    }
}
