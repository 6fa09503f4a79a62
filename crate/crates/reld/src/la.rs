//! Thin wrappers over nalgebra factorizations.

use nalgebra::DMatrix;

use crate::error::{ReldError, Result};

pub fn svd_probe() -> Result<Vec<f64>> {
    let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 5.0, 2.0, 0.0]);
    let svd = m.svd(true, true);
    Ok(svd.singular_values.iter().copied().collect())
}

pub fn erfc_probe(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

pub fn _unused() -> Result<()> {
    Err(ReldError::SvdFailure)
}
