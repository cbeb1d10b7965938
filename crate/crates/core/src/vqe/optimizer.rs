//! Euclidean gradient descent, Bloch-QNG and WPL-QNG on the VQE instance,
//! with optional drifting curvature and recalibration.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fisher::{
    assemble_wpl_qfim, naive_inverse, precondition, pseudo_inverse, LowRankCorrection,
    PseudoInverseConfig, DEFAULT_TAU,
};
use crate::geometry::{Convention, GeometryConfig, WplParams};
use crate::linalg::{norm, Mat};
use crate::quantum::{AffineBlochMap, ChannelKind};
use crate::rng::SeedStream;
use crate::tomography::{estimate_wpl, run_tomography, ChannelUnderTest, PipelineConfig, ProbeSet};
use crate::vqe::problem::{Evaluator, GradientMethod, VqeProblem, FD_STEP};
use crate::vqe::trace::{TraceRecord, TraceRow};

pub const DEFAULT_ETA: f64 = 0.05;
pub const DEFAULT_SHOTS: u64 = 4096;
pub const DEFAULT_T_MAX: usize = 80;
pub const DEFAULT_SEED: u64 = 1337;
/// Per-gate dephasing used by the default experiment.
pub const DEFAULT_NOISE: ChannelKind = ChannelKind::Dephasing(0.05);
/// Diagonal jitter of the naive-inverse ablation.
pub const NAIVE_JITTER: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Euclid,
    BlochQng,
    WplQng,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 3] = [
        OptimizerKind::Euclid,
        OptimizerKind::BlochQng,
        OptimizerKind::WplQng,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Euclid => "euclid",
            OptimizerKind::BlochQng => "bloch_qng",
            OptimizerKind::WplQng => "wpl_qng",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown optimizer {s:?}")))
    }
}

/// How the Fisher matrix is inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseRule {
    /// Blockwise spectral pseudoinverse with threshold `τ`.
    Thresholded,
    /// `(F + 10⁻¹²I)⁻¹`, for the ablation only.
    Naive,
}

/// Which part of the pure-state QFIM Bloch-QNG uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QfimScope {
    Block,
    Full,
}

impl FromStr for QfimScope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block" => Ok(QfimScope::Block),
            "full" => Ok(QfimScope::Full),
            other => Err(Error::Config(format!("unknown QFIM scope {other:?} (expected block or full)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub eta: f64,
    pub tau: f64,
    /// `None` is exact (infinite-shot) mode.
    pub shots: Option<u64>,
    pub t_max: usize,
    pub seed: u64,
    pub gradient: GradientMethod,
    pub fd_step: f64,
    pub convention: Convention,
    /// Applied after every gate; `None` is noiseless.
    pub noise: Option<ChannelKind>,
    pub inverse: InverseRule,
    pub qfim: QfimScope,
    /// Rank of the entangler correction added to the WPL blocks (0 = off).
    pub entangler_rank: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::WplQng,
            eta: DEFAULT_ETA,
            tau: DEFAULT_TAU,
            shots: Some(DEFAULT_SHOTS),
            t_max: DEFAULT_T_MAX,
            seed: DEFAULT_SEED,
            gradient: GradientMethod::ParameterShift,
            fd_step: FD_STEP,
            convention: Convention::Sec5,
            noise: Some(DEFAULT_NOISE),
            inverse: InverseRule::Thresholded,
            qfim: QfimScope::Block,
            entangler_rank: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_kind(&self, kind: OptimizerKind) -> Self {
        Self {
            kind,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!(
                "eta = {} must be positive",
                self.eta
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!(
                "tau = {} must be positive",
                self.tau
            )));
        }
        if self.t_max < 1 {
            return Err(Error::Config("t_max must be at least 1".into()));
        }
        if self.shots == Some(0) {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Error::Config(format!(
                "fd_step = {} must be positive",
                self.fd_step
            )));
        }
        Ok(())
    }
}

/// Synthetic multiplicative drift of each qubit's `(a/b, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftModel {
    pub amplitude: f64,
    /// Recalibrate every `period` iterations.
    pub period: usize,
    /// EWMA weight of the newest estimate.
    pub alpha: f64,
}

impl Default for DriftModel {
    fn default() -> Self {
        Self {
            amplitude: 0.03,
            period: 10,
            alpha: 0.2,
        }
    }
}

impl DriftModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.2).contains(&self.amplitude) {
            return Err(Error::Config(format!(
                "drift amplitude {} outside [0, 0.2]",
                self.amplitude
            )));
        }
        if self.period < 1 {
            return Err(Error::Config("drift period must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!(
                "EWMA alpha {} outside (0, 1]",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// `η₀·min(1, 2/max Rᵢ)` clipped to `[η₀/4, η₀]`.
pub fn curvature_step_size(eta0: f64, wpl: &[WplParams]) -> f64 {
    let r_max = wpl.iter().map(|p| p.r).fold(f64::NEG_INFINITY, f64::max);
    (eta0 * (2.0 / r_max).min(1.0)).clamp(eta0 / 4.0, eta0)
}

/// Perturbs the nominal parameters once per epoch, re-estimates them from a
/// fresh tomography of the drifted map and smooths with an EWMA.
#[derive(Debug, Clone)]
pub struct DriftTracker {
    nominal: Vec<WplParams>,
    model: DriftModel,
    shots: Option<u64>,
    pipeline: PipelineConfig,
    stream: SeedStream,
    smoothed: Option<Vec<(f64, f64)>>,
}

impl DriftTracker {
    pub fn new(
        nominal: &[WplParams],
        model: DriftModel,
        shots: Option<u64>,
        stream: SeedStream,
    ) -> Result<Self> {
        model.validate()?;
        let convention = nominal.first().map_or(Convention::Sec5, |p| p.convention);
        Ok(Self {
            nominal: nominal.to_vec(),
            model,
            shots,
            pipeline: PipelineConfig::new(GeometryConfig::new(convention)),
            stream,
            smoothed: None,
        })
    }

    /// The drifted (true) parameters of epoch `epoch`.
    pub fn drifted(&self, epoch: usize) -> Result<Vec<WplParams>> {
        let a = self.model.amplitude;
        self.nominal
            .iter()
            .enumerate()
            .map(|(q, p)| {
                let mut rng = self.stream.child(&[epoch as u64, q as u64, 0]).rng();
                let (xi_b, xi_ab) = if a > 0.0 {
                    (rng.random_range(-a..=a), rng.random_range(-a..=a))
                } else {
                    (0.0, 0.0)
                };
                WplParams::from_ratio(p.a_over_b * (1.0 + xi_ab), p.b * (1.0 + xi_b), p.convention)
            })
            .collect()
    }

    /// Runs the epoch's tomography and returns the smoothed parameters.
    pub fn recalibrate(&mut self, epoch: usize) -> Result<Vec<WplParams>> {
        let truth = self.drifted(epoch)?;
        let mut estimates = Vec::with_capacity(truth.len());
        for (q, p) in truth.iter().enumerate() {
            let (lp, ll) = p.to_contractions();
            let map = ChannelUnderTest::Map(AffineBlochMap::diagonal([lp, lp, ll], [0.0; 3]));
            let rec = run_tomography(
                &map,
                &ProbeSet::minimal(),
                self.shots,
                &self.stream.child(&[epoch as u64, q as u64, 1]),
            )?;
            let est = estimate_wpl(&rec, &self.pipeline)?.wpl;
            estimates.push((est.a_over_b, est.b));
        }
        let alpha = self.model.alpha;
        let next = match &self.smoothed {
            None => estimates,
            Some(prev) => prev
                .iter()
                .zip(&estimates)
                .map(|(&(pa, pb), &(ea, eb))| {
                    (
                        alpha * ea + (1.0 - alpha) * pa,
                        alpha * eb + (1.0 - alpha) * pb,
                    )
                })
                .collect(),
        };
        let out = next
            .iter()
            .map(|&(ab, b)| WplParams::from_ratio(ab, b, self.pipeline.geometry.convention))
            .collect::<Result<Vec<_>>>()?;
        self.smoothed = Some(next);
        Ok(out)
    }
}

/// Off-block part of the noiseless full QFIM, factored to `rank`.
fn entangler_correction(
    problem: &VqeProblem,
    theta: &[f64],
    rank: usize,
) -> Result<LowRankCorrection> {
    let full = problem.fs_qfim(theta)?;
    let off = Mat::from_fn(full.rows(), full.cols(), |i, j| {
        if i / 2 == j / 2 {
            0.0
        } else {
            0.5 * (full[(i, j)] + full[(j, i)])
        }
    });
    LowRankCorrection::from_symmetric(&off, rank, 1e-10)
}

fn is_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Runs `cfg.t_max` steps from `problem.theta0`. A non-finite energy,
/// gradient or step stops the run; the trace up to that point is returned
/// with `aborted` set.
pub fn run_vqe(
    problem: &VqeProblem,
    cfg: &OptimizerConfig,
    wpl: &[WplParams],
    drift: Option<&DriftModel>,
) -> Result<TraceRecord> {
    cfg.validate()?;
    if wpl.len() != problem.layout.n_qubits {
        return Err(Error::Config(format!(
            "{} WPL parameter sets for {} qubits",
            wpl.len(),
            problem.layout.n_qubits
        )));
    }
    let eval = Evaluator::new(problem, cfg.noise, cfg.shots)?;
    let pcfg = PseudoInverseConfig::new(cfg.tau)?;
    let root = SeedStream::new(cfg.seed);
    let (energy_stream, grad_stream) = (root.named("energy"), root.named("gradient"));
    let mut tracker = drift
        .map(|m| DriftTracker::new(wpl, *m, cfg.shots, root.named("drift")))
        .transpose()?;

    let mut trace = TraceRecord {
        config: cfg.clone(),
        wpl: wpl.to_vec(),
        drift: drift.copied(),
        ground_energy: problem.ground_energy,
        rows: Vec::with_capacity(cfg.t_max + 1),
        aborted: None,
        correction_fallbacks: 0,
    };
    let mut theta = problem.theta0.clone();
    let mut current = wpl.to_vec();

    for t in 0..=cfg.t_max {
        let eta_t = match (&mut tracker, drift) {
            (Some(tr), Some(m)) => {
                if t % m.period == 0 {
                    current = tr.recalibrate(t / m.period)?;
                }
                curvature_step_size(cfg.eta, &current)
            }
            _ => cfg.eta,
        };
        if !is_finite(&theta) {
            trace.aborted = Some(format!("non-finite parameters at iteration {t}"));
            break;
        }
        let energy = eval.energy(&theta, &energy_stream.child(&[t as u64]))?;
        let exact_energy = eval.exact_energy(&theta)?;
        let grad = eval.gradient(
            &theta,
            cfg.gradient,
            cfg.fd_step,
            &grad_stream.child(&[t as u64]),
        )?;
        if !energy.is_finite() || !exact_energy.is_finite() || !is_finite(&grad) {
            trace.aborted = Some(format!("non-finite energy or gradient at iteration {t}"));
            break;
        }
        let mut row = TraceRow {
            iter: t,
            theta: theta.clone(),
            energy,
            exact_energy,
            abs_error: (exact_energy - problem.ground_energy).abs(),
            grad_norm: norm(&grad),
            r: current.iter().map(|p| p.r).collect(),
            eta_t,
            step_norm: 0.0,
        };
        if t == cfg.t_max {
            trace.rows.push(row);
            break;
        }

        let direction = match cfg.kind {
            OptimizerKind::Euclid => grad,
            OptimizerKind::BlochQng => {
                let g = match cfg.qfim {
                    QfimScope::Block => problem.block_fs_qfim(&theta)?,
                    QfimScope::Full => problem.fs_qfim(&theta)?,
                };
                let inv = match cfg.inverse {
                    InverseRule::Thresholded => pseudo_inverse(&g, &pcfg)?,
                    InverseRule::Naive => naive_inverse(&g, NAIVE_JITTER)?,
                };
                precondition(&inv, &grad)?
            }
            OptimizerKind::WplQng => {
                let mut f = assemble_wpl_qfim(&current, &theta, &problem.layout)?;
                let inv = match cfg.inverse {
                    InverseRule::Naive => naive_inverse(&f.dense(), NAIVE_JITTER)?,
                    InverseRule::Thresholded if cfg.entangler_rank > 0 => {
                        f.correction =
                            Some(entangler_correction(problem, &theta, cfg.entangler_rank)?);
                        match f.preconditioner(&pcfg) {
                            Ok(m) => m,
                            Err(Error::CorrectionSingular { .. }) => {
                                trace.correction_fallbacks += 1;
                                f.block_pinv(&pcfg)?
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    InverseRule::Thresholded => f.block_pinv(&pcfg)?,
                };
                precondition(&inv, &grad)?
            }
        };
        let step: Vec<f64> = direction.iter().map(|d| eta_t * d).collect();
        if !is_finite(&step) {
            trace.rows.push(row);
            trace.aborted = Some(format!("non-finite step at iteration {t}"));
            break;
        }
        row.step_norm = norm(&step);
        trace.rows.push(row);
        for (th, s) in theta.iter_mut().zip(&step) {
            *th -= s;
        }
    }
    Ok(trace)
}
