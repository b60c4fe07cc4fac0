//! Gray-scale image watermarking in the bidiagonal singular values of
//! wavelet/shearlet subbands.
//!
//! The embedding pipeline decomposes a host image with a 1-level discrete
//! wavelet transform, applies a cone-adapted discrete shearlet transform to
//! the low-frequency band, factors one directional subband with a bidiagonal
//! SVD and adds the watermark to the singular values. Extraction reverses the
//! algebra using a key file produced at embedding time. The [`attacks`] and
//! [`bench`] modules evaluate robustness of the recovered watermark under a
//! catalog of image-processing and geometric attacks.
//!
//! Entry points:
//! - [`watermark::embed`] / [`watermark::extract`] — the core pipelines.
//! - [`bench::run_bench`] — the full host × scheme × attack grid.
//! - `examples/` — one runnable example per capability.

pub mod attacks;
pub mod bench;
pub mod bsvd;
pub mod error;
pub mod image_io;
pub mod matrix;
pub mod metrics;
pub mod resample;
pub mod shearlet;
pub mod synth;
pub mod watermark;
pub mod wavelet;

pub use error::{Error, Result};
pub use matrix::ImageMatrix;
