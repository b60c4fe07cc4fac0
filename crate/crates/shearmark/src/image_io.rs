//! Gray-scale image file I/O.
//!
//! Accepted formats, chosen by extension:
//! - `.png` — 8-bit grayscale PNG (color or alpha inputs are rejected),
//! - `.pgm` — binary PGM (P5) with maxval 255,
//! - `.smf` — lossless 64-bit real plane (magic `SMF1`, row/col counts as
//!   little-endian u32, then row-major f64), used by the lossless embedding
//!   mode where 8-bit quantization would mask the algebra.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::ImageMatrix;

const SMF_MAGIC: &[u8; 4] = b"SMF1";

fn extension(path: &Path) -> Result<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .ok_or_else(|| {
            Error::UnsupportedImage(format!(
                "cannot determine format of '{}' (expected .png, .pgm or .smf)",
                path.display()
            ))
        })
}

/// Loads a gray-scale image, promoting 8-bit samples to `f64`.
pub fn load(path: &Path) -> Result<ImageMatrix> {
    match extension(path)?.as_str() {
        "png" => load_png(path),
        "pgm" => load_pgm(path),
        "smf" => load_smf(path),
        other => Err(Error::UnsupportedImage(format!(
            "unsupported extension '.{other}'"
        ))),
    }
}

/// Saves an image, quantizing to 8 bits for `.png`/`.pgm` and writing the
/// exact 64-bit values for `.smf`.
pub fn save(path: &Path, img: &ImageMatrix) -> Result<()> {
    match extension(path)?.as_str() {
        "png" => save_png(path, img),
        "pgm" => save_pgm(path, img),
        "smf" => save_smf(path, img),
        other => Err(Error::UnsupportedImage(format!(
            "unsupported extension '.{other}'"
        ))),
    }
}

fn load_png(path: &Path) -> Result<ImageMatrix> {
    let file = fs::File::open(path)?;
    let decoder = png::Decoder::new(file);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::UnsupportedImage(format!("{}: {e}", path.display())))?;
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::UnsupportedImage(format!("{}: {e}", path.display())))?;
    if info.color_type != png::ColorType::Grayscale {
        return Err(Error::UnsupportedImage(format!(
            "{}: only 8-bit grayscale PNG is accepted (got {:?})",
            path.display(),
            info.color_type
        )));
    }
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedImage(format!(
            "{}: only 8-bit depth is accepted (got {:?})",
            path.display(),
            info.bit_depth
        )));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let data = buf[..w * h].iter().map(|&b| b as f64).collect();
    ImageMatrix::from_vec(h, w, data)
}

fn save_png(path: &Path, img: &ImageMatrix) -> Result<()> {
    let q = img.quantize_u8();
    let file = fs::File::create(path)?;
    let w = BufWriter::new(file);
    let mut encoder = png::Encoder::new(w, img.cols() as u32, img.rows() as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let bytes: Vec<u8> = q.as_slice().iter().map(|&v| v as u8).collect();
    writer
        .write_image_data(&bytes)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(())
}

fn load_pgm(path: &Path) -> Result<ImageMatrix> {
    let bytes = fs::read(path)?;
    let bad = |msg: &str| Error::UnsupportedImage(format!("{}: {msg}", path.display()));
    let mut pos = 0usize;

    let token = |bytes: &[u8], pos: &mut usize| -> Result<String> {
        // Skip whitespace and '#' comment lines between header tokens.
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::UnsupportedImage("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    if token(&bytes, &mut pos)? != "P5" {
        return Err(bad("not a binary PGM (P5) file"));
    }
    let cols: usize = token(&bytes, &mut pos)?.parse().map_err(|_| bad("bad width"))?;
    let rows: usize = token(&bytes, &mut pos)?.parse().map_err(|_| bad("bad height"))?;
    let maxval: usize = token(&bytes, &mut pos)?.parse().map_err(|_| bad("bad maxval"))?;
    if maxval != 255 {
        return Err(bad("only maxval 255 is accepted"));
    }
    pos += 1; // single whitespace after maxval
    if bytes.len() < pos + rows * cols {
        return Err(bad("pixel data truncated"));
    }
    let data = bytes[pos..pos + rows * cols]
        .iter()
        .map(|&b| b as f64)
        .collect();
    ImageMatrix::from_vec(rows, cols, data)
}

fn save_pgm(path: &Path, img: &ImageMatrix) -> Result<()> {
    let q = img.quantize_u8();
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write!(w, "P5\n{} {}\n255\n", img.cols(), img.rows())?;
    let bytes: Vec<u8> = q.as_slice().iter().map(|&v| v as u8).collect();
    w.write_all(&bytes)?;
    Ok(())
}

fn load_smf(path: &Path) -> Result<ImageMatrix> {
    let bytes = fs::read(path)?;
    let bad = |msg: &str| Error::UnsupportedImage(format!("{}: {msg}", path.display()));
    if bytes.len() < 12 || &bytes[0..4] != SMF_MAGIC {
        return Err(bad("not an SMF file"));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let needed = 12 + rows * cols * 8;
    if bytes.len() != needed {
        return Err(bad("pixel data truncated"));
    }
    let data: Vec<f64> = bytes[12..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ImageMatrix::from_vec(rows, cols, data)
}

fn save_smf(path: &Path, img: &ImageMatrix) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(SMF_MAGIC)?;
    w.write_all(&(img.rows() as u32).to_le_bytes())?;
    w.write_all(&(img.cols() as u32).to_le_bytes())?;
    for &v in img.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("shearmark-io-tests");
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    fn test_image() -> ImageMatrix {
        ImageMatrix::from_fn(13, 17, |r, c| ((r * 31 + c * 7) % 256) as f64)
    }

    #[test]
    fn png_roundtrip() {
        let path = tmp("roundtrip.png");
        let img = test_image();
        save(&path, &img).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back.dims(), img.dims());
        assert_eq!(back.as_slice(), img.as_slice());
    }

    #[test]
    fn pgm_roundtrip() {
        let path = tmp("roundtrip.pgm");
        let img = test_image();
        save(&path, &img).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back.as_slice(), img.as_slice());
    }

    #[test]
    fn smf_roundtrip_is_lossless() {
        let path = tmp("roundtrip.smf");
        let img = ImageMatrix::from_fn(9, 5, |r, c| (r as f64 + 0.125) / (c as f64 + 3.5));
        save(&path, &img).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back.as_slice(), img.as_slice());
    }

    #[test]
    fn color_png_rejected() {
        let path = tmp("color.png");
        let file = fs::File::create(&path).unwrap();
        let mut enc = png::Encoder::new(BufWriter::new(file), 2, 2);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().unwrap();
        w.write_image_data(&[0u8; 12]).unwrap();
        drop(w);
        match load(&path) {
            Err(Error::UnsupportedImage(msg)) => assert!(msg.contains("grayscale")),
            other => panic!("expected UnsupportedImage, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load(Path::new("/nonexistent/nope.png")),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn unknown_extension_rejected() {
        assert!(load(Path::new("/tmp/file.jpeg2000")).is_err());
    }

    #[test]
    fn truncated_pgm_rejected() {
        let path = tmp("trunc.pgm");
        fs::write(&path, b"P5\n4 4\n255\nab").unwrap();
        assert!(load(&path).is_err());
    }
}
