//! The four optimizer ablations and the static-channel drift experiment.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::WplParams;
use crate::rng::SeedStream;
use crate::stats::{ewma, std_dev};
use crate::tomography::{estimate_wpl, run_tomography, ChannelUnderTest, PipelineConfig, ProbeSet};
use crate::vqe::optimizer::{run_vqe, InverseRule, OptimizerConfig, OptimizerKind};
use crate::vqe::problem::VqeProblem;
use crate::vqe::trace::TraceRecord;

pub const TAU_GRID: [f64; 3] = [1e-4, 1e-3, 1e-2];
pub const SHOT_GRID: [u64; 4] = [1024, 2048, 4096, 8192];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationKind {
    NaiveInverse,
    TauSweep,
    ShotSweep,
    Isotropic,
}

impl AblationKind {
    pub const ALL: [AblationKind; 4] = [
        AblationKind::NaiveInverse,
        AblationKind::TauSweep,
        AblationKind::ShotSweep,
        AblationKind::Isotropic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationKind::NaiveInverse => "naive_inverse",
            AblationKind::TauSweep => "tau_sweep",
            AblationKind::ShotSweep => "shot_sweep",
            AblationKind::Isotropic => "isotropic",
        }
    }
}

impl fmt::Display for AblationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AblationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown ablation {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRun {
    pub label: String,
    pub trace: TraceRecord,
}

/// Runs every variant of `kind` in parallel. All variants are WPL-QNG runs
/// derived from `base`; the isotropic ablation adds a Euclidean reference.
/// Divergence is recorded in the traces, not reported as an error.
pub fn run_ablation(
    kind: AblationKind,
    problem: &VqeProblem,
    base: &OptimizerConfig,
    wpl: &[WplParams],
) -> Result<Vec<AblationRun>> {
    let wpl_base = base.with_kind(OptimizerKind::WplQng);
    let variants: Vec<(String, OptimizerConfig, Vec<WplParams>)> = match kind {
        AblationKind::NaiveInverse => vec![
            ("thresholded".into(), wpl_base.clone(), wpl.to_vec()),
            (
                "naive".into(),
                OptimizerConfig {
                    inverse: InverseRule::Naive,
                    ..wpl_base
                },
                wpl.to_vec(),
            ),
        ],
        AblationKind::TauSweep => TAU_GRID
            .iter()
            .map(|&tau| {
                (
                    format!("tau_{tau:e}"),
                    OptimizerConfig {
                        tau,
                        ..wpl_base.clone()
                    },
                    wpl.to_vec(),
                )
            })
            .collect(),
        AblationKind::ShotSweep => SHOT_GRID
            .iter()
            .map(|&s| {
                (
                    format!("S_{s}"),
                    OptimizerConfig {
                        shots: Some(s),
                        ..wpl_base.clone()
                    },
                    wpl.to_vec(),
                )
            })
            .collect(),
        AblationKind::Isotropic => vec![
            ("full".into(), wpl_base.clone(), wpl.to_vec()),
            (
                "isotropic".into(),
                wpl_base.clone(),
                wpl.iter().map(WplParams::isotropic).collect(),
            ),
            (
                "euclid".into(),
                base.with_kind(OptimizerKind::Euclid),
                wpl.to_vec(),
            ),
        ],
    };
    std::thread::scope(|s| {
        let handles: Vec<_> = variants
            .into_iter()
            .map(|(label, cfg, w)| {
                s.spawn(move || {
                    run_vqe(problem, &cfg, &w, None).map(|trace| AblationRun { label, trace })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("ablation worker panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSample {
    pub run: usize,
    pub a_over_b: f64,
    pub b: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub samples: Vec<DriftSample>,
    pub std_b: f64,
    #[serde(rename = "std_R")]
    pub std_r: f64,
    pub alpha: f64,
    pub ewma_b: Vec<f64>,
    #[serde(rename = "ewma_R")]
    pub ewma_r: Vec<f64>,
}

/// Repeats tomography of a static channel `k` times with fresh sampling
/// noise (run `i` uses `stream.child([i])`) and summarizes `(b, R)`.
pub fn drift_experiment(
    channel: &ChannelUnderTest,
    k: usize,
    shots: Option<u64>,
    alpha: f64,
    cfg: &PipelineConfig,
    stream: &SeedStream,
) -> Result<DriftReport> {
    if k < 2 {
        return Err(Error::Domain(format!(
            "drift experiment needs K >= 2, got {k}"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("EWMA alpha {alpha} outside (0, 1]")));
    }
    let samples = (0..k)
        .map(|i| {
            let rec = run_tomography(
                channel,
                &ProbeSet::minimal(),
                shots,
                &stream.child(&[i as u64]),
            )?;
            let w = estimate_wpl(&rec, cfg)?.wpl;
            Ok(DriftSample {
                run: i,
                a_over_b: w.a_over_b,
                b: w.b,
                r: w.r,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let b: Vec<f64> = samples.iter().map(|s| s.b).collect();
    let r: Vec<f64> = samples.iter().map(|s| s.r).collect();
    Ok(DriftReport {
        std_b: std_dev(&b),
        std_r: std_dev(&r),
        alpha,
        ewma_b: ewma(&b, alpha),
        ewma_r: ewma(&r, alpha),
        samples,
    })
}
