//! Bound reports, CSV emission and configuration hashing.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One-sided pointwise bound check on a vertex field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub tau: f64,
    /// Extreme value of the checked field (max for upper bounds, min for lower).
    pub extreme: f64,
    pub vertex: usize,
    pub bound: f64,
    /// Signed distance from the bound, positive on the admissible side.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl BoundReport {
    /// `max <= bound + tol`
    pub fn upper(tau: f64, (vertex, max): (usize, f64), bound: f64, tolerance: f64) -> Self {
        let margin = bound - max;
        Self { tau, extreme: max, vertex, bound, margin, tolerance, pass: margin >= -tolerance }
    }

    /// `min >= bound - tol`
    pub fn lower(tau: f64, (vertex, min): (usize, f64), bound: f64, tolerance: f64) -> Self {
        let margin = min - bound;
        Self { tau, extreme: min, vertex, bound, margin, tolerance, pass: margin >= -tolerance }
    }

    /// Amount by which the bound is violated, zero if it holds exactly.
    pub fn violation(&self) -> f64 {
        (-self.margin).max(0.0)
    }
}

/// The three per-slice bounds checked together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceBounds {
    pub lapse: BoundReport,
    pub sigma: BoundReport,
    pub product: BoundReport,
}

impl SliceBounds {
    pub fn pass(&self) -> bool {
        self.lapse.pass && self.sigma.pass && self.product.pass
    }

    pub const CSV_HEADER: &'static str = "tau,min_sigma,max_lapse,min_product,bound,margin,pass";

    /// `bound` is `1/(1+tau^2)` and `margin` the product-bound margin.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.15e},{:.15e},{:.15e},{:.15e},{:.6e},{}",
            self.lapse.tau,
            self.sigma.extreme,
            self.lapse.extreme,
            self.product.extreme,
            self.product.bound,
            self.product.margin,
            self.pass()
        )
    }
}

pub fn bounds_csv<'a>(rows: impl IntoIterator<Item = &'a SliceBounds>) -> String {
    let mut out = String::from(SliceBounds::CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{}", r.csv_row()).unwrap();
    }
    out
}

/// First 16 hex digits of the SHA-256 of the value's JSON encoding.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("configuration serializes to JSON");
    let digest = Sha256::digest(&json);
    digest[..8].iter().fold(String::new(), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}
