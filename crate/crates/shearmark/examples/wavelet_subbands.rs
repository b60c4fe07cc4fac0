//! One-level wavelet decomposition: saves the four subbands as a mosaic and
//! verifies perfect reconstruction.
//!
//! ```bash
//! cargo run --release --example wavelet_subbands
//! ```

use std::fs;
use std::path::Path;

use shearmark::image_io;
use shearmark::matrix::ImageMatrix;
use shearmark::synth::{self, SynthHost};
use shearmark::wavelet::{self, WaveletFilterPair};

fn normalize_for_view(band: &ImageMatrix) -> ImageMatrix {
    let max = band.max_abs().max(1e-9);
    band.map(|v| (v.abs() / max).sqrt() * 255.0)
}

fn main() -> shearmark::Result<()> {
    let out_dir = Path::new("target/examples/wavelet_subbands");
    fs::create_dir_all(out_dir)?;

    let host = synth::host(SynthHost::Structured, 512);
    for filter in [WaveletFilterPair::haar(), WaveletFilterPair::daubechies4()] {
        let bands = wavelet::dwt_forward(&host, &filter)?;
        let half = bands.ll.rows();

        // 2x2 mosaic: LL | LH over HL | HH, detail bands contrast-stretched.
        let mut mosaic = ImageMatrix::zeros(2 * half, 2 * half);
        let views = [
            (0, 0, bands.ll.scaled(0.5)),
            (0, half, normalize_for_view(&bands.lh)),
            (half, 0, normalize_for_view(&bands.hl)),
            (half, half, normalize_for_view(&bands.hh)),
        ];
        for (r0, c0, view) in &views {
            for r in 0..half {
                for c in 0..half {
                    mosaic[(r0 + r, c0 + c)] = view[(r, c)];
                }
            }
        }
        let path = out_dir.join(format!("subbands_{}.png", filter.name()));
        image_io::save(&path, &mosaic)?;

        let back = wavelet::dwt_inverse(&bands)?;
        let err = back.max_abs_diff(&host);
        println!(
            "{}: subband mosaic -> {}, reconstruction max error {err:.3e}",
            filter.name(),
            path.display()
        );
    }
    Ok(())
}
