//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them).
//!
//! Every tolerance is pinned in code. Criteria run on the three bundled
//! synthetic hosts and the synthetic logo, so all numbers are exactly
//! reproducible.

use std::time::Instant;

use shearmark::attacks::{self, AttackSpec};
use shearmark::bench::{run_bench, BenchConfig, NamedImage};
use shearmark::bsvd;
use shearmark::matrix::ImageMatrix;
use shearmark::metrics::{self, Peak};
use shearmark::shearlet;
use shearmark::synth::{self, SynthHost};
use shearmark::watermark::{self, EmbedConfig, Scheme};
use shearmark::wavelet::{self, WaveletFilterPair};

fn test_image(rows: usize, cols: usize, seed: u64) -> ImageMatrix {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15) | 1;
    ImageMatrix::from_fn(rows, cols, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 255.0
    })
}

fn ci_hosts() -> Vec<NamedImage> {
    SynthHost::ALL
        .iter()
        .map(|&kind| NamedImage {
            name: kind.name().to_string(),
            image: synth::host(kind, 512),
        })
        .collect()
}

#[test]
fn c1_wavelet_perfect_reconstruction() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0;
    for (i, &size) in [64usize, 128, 256, 512].iter().enumerate() {
        for j in 0..5 {
            let img = test_image(size, size, (i * 5 + j) as u64 + 1);
            let filter = if j % 2 == 0 {
                WaveletFilterPair::haar()
            } else {
                WaveletFilterPair::daubechies4()
            };
            let back = wavelet::dwt_inverse(&wavelet::dwt_forward(&img, &filter).unwrap()).unwrap();
            let err = back.max_abs_diff(&img) / img.max_abs();
            worst = worst.max(err);
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 1: {} roundtrips, worst relative error {worst:.3e}, {elapsed:.1?} — {}",
        count,
        if worst < 1e-10 { "PASS" } else { "FAIL" }
    );
    assert_eq!(count, 20);
    assert!(worst < 1e-10, "wavelet reconstruction error {worst:.3e}");
    assert!(elapsed.as_secs_f64() < 5.0, "criterion 1 took {elapsed:?}");
}

#[test]
fn c2_shearlet_frame() {
    let start = Instant::now();
    let system = shearlet::build_system(256, 256, 3, &[0, 1, 1]).unwrap();
    let planes = system.n_planes();
    let deviation = system.frame_deviation();
    let mut worst_rel = 0.0f64;
    for seed in 0..10 {
        let img = test_image(256, 256, 500 + seed);
        let coeffs = system.decompose(&img).unwrap();
        let back = system.reconstruct(&coeffs).unwrap();
        let rel = back.sub(&img).frobenius_norm() / img.frobenius_norm();
        worst_rel = worst_rel.max(rel);
    }
    let elapsed = start.elapsed();
    let pass = planes == 21 && deviation < 1e-10 && worst_rel < 1e-7;
    println!(
        "criterion 2: {planes} planes, frame deviation {deviation:.3e}, worst roundtrip {worst_rel:.3e}, {elapsed:.1?} — {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert_eq!(planes, 21);
    assert!(deviation < 1e-10);
    assert!(worst_rel < 1e-7);
    assert!(elapsed.as_secs_f64() < 30.0, "criterion 2 took {elapsed:?}");
}

/// Independent oracle: cyclic Jacobi eigenvalues of the Gram matrix.
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
                let theta = 0.5 * (g[(q, q)] - g[(p, p)]) / apq;
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
fn c3_bsvd_oracle_equivalence() {
    let mut worst_sigma = 0.0f64;
    let mut worst_orth = 0.0f64;
    for seed in 0..50u64 {
        let m = 2 + (seed as usize * 11) % 63;
        let n = 2 + (seed as usize * 17) % 63;
        let a = test_image(m, n, 900 + seed).map(|v| v / 32.0 - 4.0);
        let f = bsvd::bsvd(&a).unwrap();
        let oracle = gram_singular_values(&a);
        let top = f.s[0].max(1e-30);
        for (got, want) in f.s.iter().zip(&oracle) {
            worst_sigma = worst_sigma.max((got - want).abs() / top);
        }
        worst_orth = worst_orth.max(f.orthogonality_residual());
    }
    let pass = worst_sigma < 1e-9 && worst_orth < 1e-10;
    println!(
        "criterion 3: 50 matrices, worst sigma error {worst_sigma:.3e}·s1, worst orthogonality {worst_orth:.3e} — {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(worst_sigma < 1e-9);
    assert!(worst_orth < 1e-10);
}

#[test]
fn c4_roundtrip_all_schemes() {
    let hosts = ci_hosts();
    let mut all_pass = true;
    for host in &hosts {
        let start = Instant::now();
        for scheme in Scheme::ALL {
            let config = EmbedConfig {
                scheme,
                ..EmbedConfig::default()
            };
            let (wr, _) =
                watermark::embedding_dims(&config, host.image.rows(), host.image.cols()).unwrap();
            let wm = synth::logo(wr);
            let outcome = watermark::embed(&host.image, &wm, &config).unwrap();

            // Algebraic roundtrip in lossless (working precision) mode.
            let extracted = watermark::extract(&outcome.watermarked, &outcome.key).unwrap();
            let nc = metrics::nc(&wm, &extracted).unwrap();

            // Transparency of the 8-bit artifact.
            let wm8 = outcome.watermarked.quantize_u8();
            let psnr = metrics::psnr(&host.image, &wm8, Peak::default()).unwrap();
            let ssim = metrics::ssim(&host.image, &wm8).unwrap();

            let pass = nc >= 0.999 && psnr >= 55.0 && ssim >= 0.995;
            all_pass &= pass;
            println!(
                "criterion 4: {}/{}: nc {nc:.5}, psnr {}, ssim {ssim:.4} — {}",
                host.name,
                scheme.code(),
                if psnr.is_infinite() { "inf".into() } else { format!("{psnr:.2}") },
                if pass { "PASS" } else { "FAIL" }
            );
            assert!(nc >= 0.999, "{}/{}: nc {nc}", host.name, scheme.code());
            assert!(psnr >= 55.0, "{}/{}: psnr {psnr}", host.name, scheme.code());
            assert!(ssim >= 0.995, "{}/{}: ssim {ssim}", host.name, scheme.code());
        }
        let elapsed = start.elapsed();
        println!("criterion 4: {} total {elapsed:.1?}", host.name);
        assert!(
            elapsed.as_secs_f64() < 60.0,
            "{} took {elapsed:?}",
            host.name
        );
    }
    assert!(all_pass);
}

#[test]
fn c5_robustness_thresholds() {
    // DWT-DST at 512x512, registered geometric mode, fixed seeds, on the
    // primary (smooth) host; the full table prints for manual comparison.
    let host = synth::host(SynthHost::Smooth, 512);
    let wm = synth::logo(256);
    let config = EmbedConfig::default();
    let outcome = watermark::embed(&host, &wm, &config).unwrap();
    let wm8 = outcome.watermarked.quantize_u8();

    // (attack text, threshold) — the release thresholds, pinned in code.
    let thresholds: Vec<(&str, f64)> = vec![
        ("GP 5", 0.95),
        ("JPEG 30", 0.95),
        ("JPEG 40", 0.95),
        ("SP 0.001", 0.95),
        ("SP 0.005", 0.95),
        ("SP 0.01", 0.95),
        ("SP 0.04", 0.95),
        ("SH 0.1", 0.95),
        ("SH 0.2", 0.95),
        ("SH 0.5", 0.95),
        ("SH 0.8", 0.95),
        ("SH 1", 0.95),
        ("BL 0.2", 0.95),
        ("AF 5", 0.90),
        ("MF 5", 0.90),
        ("SC 0.25", 0.90),
        ("RO 45", 0.90),
        ("RO 70", 0.90),
        ("RO -10", 0.90),
        ("TR 10,10", 0.90),
        ("SE 0.3,0.1", 0.90),
        ("HE", 0.90),
    ];

    let nc_for = |text: &str, seed: u64| -> f64 {
        let spec: AttackSpec = text.parse().unwrap();
        let spec = if spec.is_noise() && spec.seed().is_none() {
            spec.with_seed(seed)
        } else {
            spec
        };
        let attacked = attacks::apply_attack(&wm8, &spec).unwrap();
        let received = if spec.is_geometric() {
            attacks::register(&attacked, &spec).unwrap()
        } else {
            attacked
        };
        let extracted = watermark::extract(&received, &outcome.key)
            .unwrap()
            .quantize_u8();
        metrics::nc(&wm, &extracted).unwrap()
    };

    println!("criterion 5: full default catalog on synthetic-smooth/dwt-dst (registered):");
    for (i, spec) in attacks::default_catalog().iter().enumerate() {
        let text = format!("{spec}");
        let nc = nc_for(&text, 1000 + i as u64);
        println!("    {text:<14} nc {nc:.4}");
    }

    let mut failures = Vec::new();
    for (i, (text, threshold)) in thresholds.iter().enumerate() {
        let nc = nc_for(text, 2000 + i as u64);
        let ok = nc >= *threshold;
        println!(
            "criterion 5: {text:<12} nc {nc:.4} (>= {threshold:.2}) — {}",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failures.push(format!("{text}: nc {nc:.4} < {threshold}"));
        }
    }
    assert!(
        failures.is_empty(),
        "robustness thresholds not met: {failures:?}"
    );
}

#[test]
fn c6_noise_monotonicity() {
    for kind in [SynthHost::Smooth, SynthHost::Texture] {
        let host = synth::host(kind, 512);
        let wm = synth::logo(256);
        let outcome = watermark::embed(&host, &wm, &EmbedConfig::default()).unwrap();
        let wm8 = outcome.watermarked.quantize_u8();

        let run_ladder = |specs: &[&str], label: &str| {
            let mut values = Vec::new();
            for (i, text) in specs.iter().enumerate() {
                let spec: AttackSpec = text.parse::<AttackSpec>().unwrap().with_seed(77 + i as u64);
                let attacked = attacks::apply_attack(&wm8, &spec).unwrap();
                let extracted = watermark::extract(&attacked, &outcome.key)
                    .unwrap()
                    .quantize_u8();
                values.push(metrics::nc(&wm, &extracted).unwrap());
            }
            let monotone = values.windows(2).all(|w| w[1] <= w[0] + 0.01);
            println!(
                "criterion 6: {}/{label}: {:?} — {}",
                kind.name(),
                values.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
                if monotone { "PASS" } else { "FAIL" }
            );
            assert!(monotone, "{label} ladder not monotone: {values:?}");
        };

        run_ladder(&["SP 0.005", "SP 0.01", "SP 0.04", "SP 0.1", "SP 0.5"], "SP");
        run_ladder(&["GN 0,0.06", "GN 0,0.1", "GN 0,0.3"], "GN");
    }
}

#[test]
fn c7_variant_ordering() {
    let hosts = ci_hosts();
    let mut wins = 0;
    for host in &hosts {
        let psnr_of = |scheme: Scheme| -> f64 {
            let config = EmbedConfig {
                scheme,
                ..EmbedConfig::default()
            };
            let (wr, _) =
                watermark::embedding_dims(&config, host.image.rows(), host.image.cols()).unwrap();
            let wm = synth::logo(wr);
            let outcome = watermark::embed(&host.image, &wm, &config).unwrap();
            metrics::psnr(
                &host.image,
                &outcome.watermarked.quantize_u8(),
                Peak::default(),
            )
            .unwrap()
        };
        let hybrid = psnr_of(Scheme::DwtDst);
        let plain = psnr_of(Scheme::DwtOnly);
        let win = hybrid >= plain;
        if win {
            wins += 1;
        }
        println!(
            "criterion 7: {}: dwt-dst {} vs dwt-only {} — {}",
            host.name,
            if hybrid.is_infinite() { "inf".into() } else { format!("{hybrid:.2}") },
            if plain.is_infinite() { "inf".into() } else { format!("{plain:.2}") },
            if win { "hybrid >= plain" } else { "plain wins" }
        );
    }
    println!(
        "criterion 7: hybrid transparency wins on {wins}/3 hosts — {}",
        if wins >= 2 { "PASS" } else { "FAIL" }
    );
    assert!(wins >= 2, "hybrid PSNR ordering held on {wins}/3 hosts");
}

#[test]
fn c8_desk_scale_determinism() {
    let start = Instant::now();
    let dir = std::env::temp_dir().join("shearmark-acceptance-c8");
    let config = BenchConfig {
        hosts: ci_hosts(),
        watermark: NamedImage {
            name: "synthetic-logo".into(),
            image: synth::logo(256),
        },
        embed: EmbedConfig::default(),
        catalog: attacks::default_catalog(),
        schemes: vec![Scheme::DwtDst, Scheme::DwtOnly, Scheme::DstOnly],
        base_seed: 42,
        out_dir: dir.clone(),
        size: Some(128),
        register_geometric: true,
        threads: 1,
    };
    let report1 = run_bench(&config).unwrap();
    let report2 = run_bench(&config).unwrap();
    let csv1 = report1.to_csv();
    let csv2 = report2.to_csv();
    let json1 = serde_json::to_string(&report1).unwrap();
    let json2 = serde_json::to_string(&report2).unwrap();
    let elapsed = start.elapsed();

    let cells = report1.robustness.len();
    let expected = 3 * 3 * attacks::default_catalog().len();
    let pass = csv1 == csv2
        && json1 == json2
        && cells == expected
        && report1.error_count() == 0
        && elapsed.as_secs_f64() < 600.0;
    println!(
        "criterion 8: {cells} cells (expected {expected}), {} errors, two runs byte-identical: {}, {elapsed:.1?} — {}",
        report1.error_count(),
        csv1 == csv2 && json1 == json2,
        if pass { "PASS" } else { "FAIL" }
    );
    assert_eq!(cells, expected);
    assert_eq!(report1.error_count(), 0);
    assert_eq!(csv1, csv2, "CSV must be byte-identical across runs");
    assert_eq!(json1, json2, "JSON must be byte-identical across runs");
    assert!(
        elapsed.as_secs_f64() < 600.0,
        "two desk-scale runs took {elapsed:?}"
    );
}

#[test]
fn c9_metric_oracles() {
    let x = test_image(16, 16, 31);
    let y = test_image(16, 16, 32);

    // Naive double-loop oracles, written independently of the library path.
    let mse_oracle = {
        let mut acc = 0.0;
        for r in 0..16 {
            for c in 0..16 {
                acc += (x[(r, c)] - y[(r, c)]).powi(2);
            }
        }
        acc / 256.0
    };
    let nc_oracle = {
        let (mut mx, mut my) = (0.0, 0.0);
        for r in 0..16 {
            for c in 0..16 {
                mx += x[(r, c)];
                my += y[(r, c)];
            }
        }
        mx /= 256.0;
        my /= 256.0;
        let (mut num, mut dx, mut dy) = (0.0, 0.0, 0.0);
        for r in 0..16 {
            for c in 0..16 {
                num += (x[(r, c)] - mx) * (y[(r, c)] - my);
                dx += (x[(r, c)] - mx).powi(2);
                dy += (y[(r, c)] - my).powi(2);
            }
        }
        num / (dx.sqrt() * dy.sqrt())
    };
    let ssim_oracle = {
        // 11x11 Gaussian windows, sigma 1.5, valid positions only.
        let mut kernel = [0.0f64; 11];
        let mut sum = 0.0;
        for (i, k) in kernel.iter_mut().enumerate() {
            let d = i as f64 - 5.0;
            *k = (-d * d / 4.5).exp();
            sum += *k;
        }
        for k in kernel.iter_mut() {
            *k /= sum;
        }
        let c1 = (0.01f64 * 255.0).powi(2);
        let c2 = (0.03f64 * 255.0).powi(2);
        let mut total = 0.0;
        for r0 in 0..6 {
            for c0 in 0..6 {
                let (mut mx, mut my) = (0.0, 0.0);
                let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        let w = kernel[i] * kernel[j];
                        let a = x[(r0 + i, c0 + j)];
                        let b = y[(r0 + i, c0 + j)];
                        mx += w * a;
                        my += w * b;
                        sxx += w * a * a;
                        syy += w * b * b;
                        sxy += w * a * b;
                    }
                }
                total += ((2.0 * mx * my + c1) * (2.0 * (sxy - mx * my) + c2))
                    / ((mx * mx + my * my + c1) * ((sxx - mx * mx) + (syy - my * my) + c2));
            }
        }
        total / 36.0
    };

    let mse_err = (metrics::mse(&x, &y).unwrap() - mse_oracle).abs();
    let psnr_err = (metrics::psnr(&x, &y, Peak::default()).unwrap()
        - 10.0 * (255.0f64 * 255.0 / mse_oracle).log10())
    .abs();
    let nc_err = (metrics::nc(&x, &y).unwrap() - nc_oracle).abs();
    let ssim_err = (metrics::ssim(&x, &y).unwrap() - ssim_oracle).abs();

    let affine = x.map(|v| 2.5 * v + 11.0);
    let nc_affine = (metrics::nc(&x, &affine).unwrap() - 1.0).abs();
    let ssim_self = (metrics::ssim(&x, &x).unwrap() - 1.0).abs();

    let pass = mse_err < 1e-10
        && psnr_err < 1e-10
        && nc_err < 1e-10
        && ssim_err < 1e-10
        && nc_affine < 1e-9
        && ssim_self < 1e-12;
    println!(
        "criterion 9: oracle errors mse {mse_err:.1e} psnr {psnr_err:.1e} ssim {ssim_err:.1e} nc {nc_err:.1e}; nc affine {nc_affine:.1e}, ssim self {ssim_self:.1e} — {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}
