//! Video layering and denoising: split a noisy frame sequence into a
//! low-rank layer and a sparse layer online (batch PCP initialization,
//! then recursive projected compressive sensing with projection-PCA
//! subspace updates), and denoise each layer with a grouping and
//! collaborative-filtering denoiser.

pub mod denoise;
pub mod error;
pub mod noise;
pub mod pcp;
pub mod pipeline;
pub mod reprocs;
pub mod synth;
pub mod tracker;
pub mod video;

mod la;

pub use error::ReldError;


pub fn la_probe_sv() -> error::Result<Vec<f64>> { la::svd_probe() }
pub fn la_probe_erfc(x: f64) -> f64 { la::erfc_probe(x) }
