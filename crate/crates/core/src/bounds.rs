//! Closed-form correlation and operator-norm bounds.
//!
//! All four bounds are a polynomial prefactor in `k` times a power of
//! `sqrt(d-1)`; the power is evaluated once as `exp(j/2 * ln(d-1))`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::sqrt_power;

fn check_degree(d: u32) -> Result<f64> {
    if d < 3 {
        return Err(Error::InvalidDegree(d));
    }
    Ok(d as f64 - 1.0)
}

fn check_positive_k(k: u32) -> Result<()> {
    if k < 1 {
        return Err(invalid("k", "the bound requires a positive distance"));
    }
    Ok(())
}

/// Vertex-pair correlation bound `(k + 1 - 2k/d) (d-1)^(-k/2)`.
pub fn vertex_corr_bound(d: u32, k: u32) -> Result<f64> {
    let base = check_degree(d)?;
    let kf = k as f64;
    Ok((kf + 1.0 - 2.0 * kf / d as f64) * sqrt_power(base, -(k as i64)))
}

/// Correlation bound for functions of two regions whose convex hulls are at
/// distance `k >= 1`: `k (d-1) (d-1)^(-k/2)`.
pub fn hull_corr_bound(d: u32, k: u32) -> Result<f64> {
    let base = check_degree(d)?;
    check_positive_k(k)?;
    Ok(k as f64 * base * sqrt_power(base, -(k as i64)))
}

/// Directed-edge correlation bound `(k+1) (d-1)^(-(k-1)/2)`.
pub fn edge_corr_bound(d: u32, k: u32) -> Result<f64> {
    let base = check_degree(d)?;
    Ok((k as f64 + 1.0) * sqrt_power(base, 1 - k as i64))
}

/// Bound on the norm of the k-th power of the non-backtracking operator,
/// `(k+1) (d-1)^((k+1)/2)`.
pub fn bnorm_bound(d: u32, k: u32) -> Result<f64> {
    let base = check_degree(d)?;
    check_positive_k(k)?;
    Ok((k as f64 + 1.0) * sqrt_power(base, k as i64 + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub d: u32,
    pub k: u32,
    pub vertex_bound: f64,
    pub hull_bound: f64,
    pub edge_bound: f64,
    pub bnorm_bound: f64,
}

impl BoundRow {
    pub const CSV_HEADER: &'static str = "d,k,vertex_bound,hull_bound,edge_bound,bnorm_bound";
}

pub fn bound_row(d: u32, k: u32) -> Result<BoundRow> {
    Ok(BoundRow {
        d,
        k,
        vertex_bound: vertex_corr_bound(d, k)?,
        hull_bound: hull_corr_bound(d, k)?,
        edge_bound: edge_corr_bound(d, k)?,
        bnorm_bound: bnorm_bound(d, k)?,
    })
}

/// Rows for `k = 1..=k_max`.
pub fn bound_table(d: u32, k_max: u32) -> Result<Vec<BoundRow>> {
    check_degree(d)?;
    if k_max < 1 {
        return Err(invalid("k_max", "must be at least 1"));
    }
    (1..=k_max).map(|k| bound_row(d, k)).collect()
}
