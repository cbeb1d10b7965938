//! Per-iteration optimizer records and their CSV/JSON forms.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::geometry::WplParams;
use crate::vqe::optimizer::{DriftModel, OptimizerConfig};

/// Fixed column order of [`TraceRecord::to_csv`] (plus one `R_i` per qubit).
pub const TRACE_COLUMNS: [&str; 6] = [
    "iter",
    "energy",
    "exact_energy",
    "abs_error",
    "grad_norm",
    "eta_t",
];

/// Lossless float formatting (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub theta: Vec<f64>,
    /// The estimate the optimizer saw (sampled in shot mode).
    pub energy: f64,
    /// Infinite-shot energy under the same noise model.
    pub exact_energy: f64,
    /// `|exact_energy − E₀|`.
    pub abs_error: f64,
    pub grad_norm: f64,
    /// Curvature of each qubit's WPL in force at this iteration.
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    pub eta_t: f64,
    /// `‖θ_{t+1} − θ_t‖`; zero on the final row.
    pub step_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub config: OptimizerConfig,
    pub wpl: Vec<WplParams>,
    pub drift: Option<DriftModel>,
    pub ground_energy: f64,
    pub rows: Vec<TraceRow>,
    /// Set when a non-finite value stopped the run early.
    pub aborted: Option<String>,
    /// Iterations where the entangler correction was singular and the
    /// block pseudoinverse was used instead.
    pub correction_fallbacks: usize,
}

impl TraceRecord {
    pub fn initial_abs_error(&self) -> Option<f64> {
        self.rows.first().map(|r| r.abs_error)
    }

    pub fn final_abs_error(&self) -> Option<f64> {
        self.rows.last().map(|r| r.abs_error)
    }

    pub fn max_step_norm(&self) -> f64 {
        self.rows.iter().map(|r| r.step_norm).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.rows.iter().all(|r| {
            [
                r.energy,
                r.exact_energy,
                r.abs_error,
                r.grad_norm,
                r.eta_t,
                r.step_norm,
            ]
            .iter()
            .chain(&r.theta)
            .chain(&r.r)
            .all(|x| x.is_finite())
        })
    }

    pub fn csv_header(n_qubits: usize) -> String {
        let mut cols: Vec<String> = TRACE_COLUMNS[..5].iter().map(|s| s.to_string()).collect();
        cols.extend((0..n_qubits).map(|i| format!("R_{i}")));
        cols.push(TRACE_COLUMNS[5].into());
        cols.join(",")
    }

    /// `iter, energy, exact_energy, abs_error, grad_norm, R_0.., eta_t`.
    pub fn to_csv(&self) -> String {
        let mut out = Self::csv_header(self.wpl.len());
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                r.iter,
                fmt_f64(r.energy),
                fmt_f64(r.exact_energy),
                fmt_f64(r.abs_error),
                fmt_f64(r.grad_norm)
            );
            for x in &r.r {
                let _ = write!(out, ",{}", fmt_f64(*x));
            }
            let _ = writeln!(out, ",{}", fmt_f64(r.eta_t));
        }
        out
    }

    /// `iter, step_norm, theta_0..` — the parameter trajectory.
    pub fn params_csv(&self) -> String {
        let p = self.rows.first().map_or(0, |r| r.theta.len());
        let mut out = String::from("iter,step_norm");
        for i in 0..p {
            let _ = write!(out, ",theta_{i}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{}", r.iter, fmt_f64(r.step_norm));
            for x in &r.theta {
                let _ = write!(out, ",{}", fmt_f64(*x));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}
