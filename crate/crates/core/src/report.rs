//! Convergence reports shared by the study and comparison harnesses.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub l_values: Vec<f64>,
    pub defects: Vec<f64>,
    pub fitted_rate: Option<f64>,
    pub extra: serde_json::Value,
}

impl ConvergenceReport {
    pub fn fit_rate(l_values: &[f64], defects: &[f64]) -> Option<f64> {
        let pts: Vec<(f64, f64)> = l_values
            .iter()
            .zip(defects)
            .filter(|(_, &d)| d > 0.0)
            .map(|(&l, &d)| (l.ln(), d.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() < 1e-12 {
            return None;
        }
        Some((n * sxy - sx * sy) / denom)
    }
}

/// CSV-friendly complex formatting: "re+imj".
pub fn fmt_complex(z: Complex64) -> String {
    format!("{:+.17e}{:+.17e}j", z.re, z.im)
}
