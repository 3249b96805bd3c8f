//! Dense linear-algebra helpers (partially pivoted LU from nalgebra).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn solve(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let lu = a.lu();
    lu.solve(&b).ok_or_else(|| Error::SolveFailure("singular matrix".into()))
}

pub fn inverse(a: DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.try_inverse().ok_or_else(|| Error::SolveFailure("singular matrix".into()))
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Total-variation distance between two probability vectors.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * l1_distance(a, b)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
