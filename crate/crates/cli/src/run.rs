//! Command execution. Every setting is parsed and validated up front; only
//! then does any computation (or file output) happen.

use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::path::Path;

use wpl_core::geometry::{wpl_report, Convention, GeometryConfig, WplParams, WplReport};
use wpl_core::quantum::{make_channel, AffineBlochMap, ChannelKind, NoiseModel};
use wpl_core::rng::SeedStream;
use wpl_core::tomography::{
    bootstrap_wpl, estimate_wpl, identifiability_check, noise_matched_delta, run_tomography,
    BootstrapReport, ChannelUnderTest, FitKind, Identifiability, PipelineConfig,
    ProbeSet, TomographyRecord,
};
use wpl_core::vqe::problem::REPORTED_GROUND_ENERGY;
use wpl_core::vqe::trace::fmt_f64;
use wpl_core::vqe::{
    drift_experiment, run_ablation, run_vqe, AblationKind, DriftModel, GradientMethod,
    InverseRule, OptimizerConfig, OptimizerKind, QfimScope, TraceRecord, VqeProblem,
};

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::output::{emit, Artifact, Manifest};

/// What a command produced, before anything touches the disk.
#[derive(Debug)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub context: serde_json::Value,
    /// First non-finite abort among the traces, if any.
    pub abort: Option<String>,
}

/// Runs the command and writes its artifacts followed by the manifest.
/// A numeric abort still flushes everything before reporting exit code 3.
pub fn run_and_emit(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let outcome = execute(cfg)?;
    let status = match &outcome.abort {
        Some(m) => format!("aborted: {m}"),
        None => "ok".into(),
    };
    let manifest = Manifest::new(cfg, outcome.context, status, &outcome.artifacts);
    emit(out, &outcome.artifacts, &manifest)?;
    match outcome.abort {
        Some(m) => Err(CliError::NumericAbort(m)),
        None => Ok(()),
    }
}

/// Re-executes the command recorded in a manifest with its full config.
pub fn replay(manifest: &Path, out: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(manifest).map_err(|source| CliError::Io {
        path: manifest.display().to_string(),
        source,
    })?;
    let m: Manifest = serde_json::from_str(&text)
        .map_err(|e| config_err(format!("invalid manifest {}: {e}", manifest.display())))?;
    let command: Command = m.command.parse()?;
    let cfg = RunConfig::resolve(command, &[m.config.into_iter().collect()])?;
    run_and_emit(&cfg, out)
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Tomo => TomoPlan::parse(cfg)?.run(),
        Command::Drift => DriftPlan::parse(cfg)?.run(),
        Command::Vqe => VqePlan::parse(cfg)?.run(),
        Command::Ablate => AblatePlan::parse(cfg)?.run(),
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

struct Common {
    seed: u64,
    shots: Option<u64>,
    convention: Convention,
}

impl Common {
    fn parse(cfg: &RunConfig) -> Result<Self, CliError> {
        Ok(Self {
            seed: cfg.get("seed")?,
            shots: cfg.shots()?,
            convention: cfg.get("convention")?,
        })
    }
}

struct Pipeline {
    channel: ChannelKind,
    probes: ProbeSet,
    cfg: PipelineConfig,
}

impl Pipeline {
    fn parse(cfg: &RunConfig, common: &Common) -> Result<Self, CliError> {
        let channel: ChannelKind = cfg.get("channel")?;
        // Rejects out-of-range parameters before any work starts.
        make_channel(channel)?;
        let probes = match cfg.raw("probes") {
            "minimal" => ProbeSet::minimal(),
            "overcomplete" => ProbeSet::overcomplete(),
            other => return Err(config_err(format!("unknown probe set {other:?} (expected minimal or overcomplete)"))),
        };
        let fit: FitKind = cfg.get("fit")?;
        let epsilon: f64 = cfg.get("epsilon")?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(config_err(format!("epsilon = {epsilon} outside (0, 1)")));
        }
        let delta = match (cfg.raw("delta"), common.shots) {
            ("auto", Some(n)) => noise_matched_delta(n),
            ("auto", None) => wpl_core::geometry::DEFAULT_DELTA,
            _ => cfg.get::<f64>("delta")?,
        };
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(config_err(format!("delta = {delta} must be non-negative")));
        }
        Ok(Self {
            channel,
            probes,
            cfg: PipelineConfig {
                fit,
                geometry: GeometryConfig {
                    epsilon,
                    delta,
                    convention: common.convention,
                },
            },
        })
    }

    fn idle(&self, depth: usize) -> Result<ChannelUnderTest, CliError> {
        Ok(ChannelUnderTest::idle(depth, NoiseModel::IdleOnly(make_channel(self.channel)?)))
    }
}

// ---------------------------------------------------------------- tomo

struct TomoPlan {
    common: Common,
    pipeline: Pipeline,
    depths: Vec<usize>,
    bootstrap: usize,
}

#[derive(Serialize)]
struct DepthReport {
    depth: usize,
    channel: String,
    fit: AffineBlochMap,
    fit_residual: f64,
    identifiability: Option<Identifiability>,
    report: WplReport,
}

#[derive(Serialize)]
struct DepthBootstrap {
    depth: usize,
    #[serde(flatten)]
    report: BootstrapReport,
}

#[derive(Serialize)]
struct DepthRecord {
    depth: usize,
    record: TomographyRecord,
}

impl TomoPlan {
    fn parse(cfg: &RunConfig) -> Result<Self, CliError> {
        let common = Common::parse(cfg)?;
        let pipeline = Pipeline::parse(cfg, &common)?;
        let depths: Vec<usize> = cfg.list("depths")?;
        if depths.contains(&0) {
            return Err(config_err("idle depths must be at least 1"));
        }
        let bootstrap: usize = cfg.get("bootstrap")?;
        if bootstrap == 1 {
            return Err(config_err("bootstrap needs at least 2 replicates (or 0 to skip)"));
        }
        Ok(Self {
            common,
            pipeline,
            depths,
            bootstrap,
        })
    }

    fn run(self) -> Result<Outcome, CliError> {
        let root = SeedStream::new(self.common.seed);
        let mut csv = String::from(
            "depth,lambda_perp,lambda_par,phase_covariant,branch,a_over_b,b,R,fit_residual,identifiability\n",
        );
        let mut reports = Vec::new();
        let mut boots = Vec::new();
        let mut records = Vec::new();
        for &d in &self.depths {
            let tag = [d as u64];
            let rec = run_tomography(
                &self.pipeline.idle(d)?,
                &self.pipeline.probes,
                self.common.shots,
                &root.named("tomo").child(&tag),
            )?;
            let est = estimate_wpl(&rec, &self.pipeline.cfg)?;
            let report = wpl_report(&est.fit.map.t_mat(), &self.pipeline.cfg.geometry)?;
            let ident = match self.common.shots {
                Some(n) => Some(identifiability_check(report.lambda_perp, report.lambda_par, n)?),
                None => None,
            };
            let _ = writeln!(
                csv,
                "{d},{},{},{},{},{},{},{},{},{}",
                fmt_f64(report.lambda_perp),
                fmt_f64(report.lambda_par),
                report.phase_covariant,
                report.branch.number(),
                fmt_f64(report.a_over_b),
                fmt_f64(report.b),
                fmt_f64(report.r),
                fmt_f64(est.fit.residual),
                match ident {
                    Some(Identifiability::Resolved) => "resolved",
                    Some(Identifiability::Marginal) => "marginal",
                    None => "exact",
                }
            );
            if self.bootstrap > 0 {
                let b = bootstrap_wpl(&rec, self.bootstrap, &self.pipeline.cfg, &root.named("bootstrap").child(&tag))?;
                boots.push(DepthBootstrap { depth: d, report: b });
            }
            reports.push(DepthReport {
                depth: d,
                channel: self.pipeline.channel.to_string(),
                fit: est.fit.map.clone(),
                fit_residual: est.fit.residual,
                identifiability: ident,
                report,
            });
            records.push(DepthRecord { depth: d, record: rec });
        }
        let mut artifacts = vec![
            Artifact::text("tomo.csv", csv),
            Artifact::json("wpl_report.json", &reports),
            Artifact::json("tomo_records.json", &records),
        ];
        if self.bootstrap > 0 {
            artifacts.push(Artifact::json("bootstrap.json", &boots));
        }
        Ok(Outcome {
            artifacts,
            context: json!({ "delta": self.pipeline.cfg.geometry.delta }),
            abort: None,
        })
    }
}

// --------------------------------------------------------------- drift

struct DriftPlan {
    common: Common,
    pipeline: Pipeline,
    depth: usize,
    runs: usize,
    alpha: f64,
}

impl DriftPlan {
    fn parse(cfg: &RunConfig) -> Result<Self, CliError> {
        let common = Common::parse(cfg)?;
        let pipeline = Pipeline::parse(cfg, &common)?;
        let depth: usize = cfg.get("depth")?;
        let runs: usize = cfg.get("runs")?;
        let alpha: f64 = cfg.get("alpha")?;
        if depth == 0 {
            return Err(config_err("idle depth must be at least 1"));
        }
        if runs < 2 {
            return Err(config_err(format!("drift needs at least 2 runs, got {runs}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(config_err(format!("EWMA alpha {alpha} outside (0, 1]")));
        }
        Ok(Self {
            common,
            pipeline,
            depth,
            runs,
            alpha,
        })
    }

    fn run(self) -> Result<Outcome, CliError> {
        let root = SeedStream::new(self.common.seed);
        let rep = drift_experiment(
            &self.pipeline.idle(self.depth)?,
            self.runs,
            self.common.shots,
            self.alpha,
            &self.pipeline.cfg,
            &root.named("drift"),
        )?;
        let mut csv = String::from("run,a_over_b,b,R\n");
        for s in &rep.samples {
            let _ = writeln!(csv, "{},{},{},{}", s.run, fmt_f64(s.a_over_b), fmt_f64(s.b), fmt_f64(s.r));
        }
        let mut smooth = String::from("run,ewma_b,ewma_R\n");
        for (i, (b, r)) in rep.ewma_b.iter().zip(&rep.ewma_r).enumerate() {
            let _ = writeln!(smooth, "{i},{},{}", fmt_f64(*b), fmt_f64(*r));
        }
        let summary = json!({
            "channel": self.pipeline.channel.to_string(),
            "depth": self.depth,
            "runs": self.runs,
            "shots": self.common.shots,
            "alpha": rep.alpha,
            "std_b": rep.std_b,
            "std_R": rep.std_r,
        });
        Ok(Outcome {
            artifacts: vec![
                Artifact::text("drift.csv", csv),
                Artifact::text("drift_ewma.csv", smooth),
                Artifact::json("drift_summary.json", &summary),
            ],
            context: json!({ "delta": self.pipeline.cfg.geometry.delta }),
            abort: None,
        })
    }
}

// ----------------------------------------------------------- optimizer

struct OptimizerPlan {
    problem: VqeProblem,
    base: OptimizerConfig,
    wpl: Vec<WplParams>,
}

impl OptimizerPlan {
    fn parse(cfg: &RunConfig) -> Result<Self, CliError> {
        let common = Common::parse(cfg)?;
        let problem = VqeProblem::reference_instance();
        let noise = match cfg.raw("noise") {
            "off" | "none" => None,
            _ => {
                let kind: ChannelKind = cfg.get("noise")?;
                make_channel(kind)?;
                Some(kind)
            }
        };
        let base = OptimizerConfig {
            kind: OptimizerKind::WplQng,
            eta: cfg.get("eta")?,
            tau: cfg.get("tau")?,
            shots: common.shots,
            t_max: cfg.get("t_max")?,
            seed: common.seed,
            gradient: cfg.get::<GradientMethod>("gradient")?,
            fd_step: cfg.get("fd_step")?,
            convention: common.convention,
            noise,
            inverse: InverseRule::Thresholded,
            qfim: cfg.get::<QfimScope>("qfim")?,
            entangler_rank: cfg.get("entangler_rank")?,
        };
        base.validate()?;
        let ratios: Vec<f64> = cfg.list("a_over_b")?;
        let bs: Vec<f64> = cfg.list("b")?;
        let n = problem.layout.n_qubits;
        if ratios.len() != n || bs.len() != n {
            return Err(config_err(format!(
                "a_over_b and b need {n} values each, got {} and {}",
                ratios.len(),
                bs.len()
            )));
        }
        let wpl = ratios
            .iter()
            .zip(&bs)
            .map(|(&ab, &b)| WplParams::from_ratio(ab, b, common.convention))
            .collect::<wpl_core::Result<Vec<_>>>()?;
        Ok(Self { problem, base, wpl })
    }

    fn context(&self) -> serde_json::Value {
        json!({
            "ground_energy": self.problem.ground_energy,
            "reported_ground_energy": REPORTED_GROUND_ENERGY,
            "initial_theta": self.problem.theta0,
            "wpl": self.wpl,
        })
    }
}

fn summary_header() -> &'static str {
    "initial_abs_error,final_abs_error,final_energy,max_step_norm,iterations,all_finite,aborted,correction_fallbacks"
}

fn summary_fields(t: &TraceRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        fmt_f64(t.initial_abs_error().unwrap_or(f64::NAN)),
        fmt_f64(t.final_abs_error().unwrap_or(f64::NAN)),
        fmt_f64(t.rows.last().map_or(f64::NAN, |r| r.exact_energy)),
        fmt_f64(t.max_step_norm()),
        t.rows.len().saturating_sub(1),
        t.all_finite(),
        t.aborted.is_some(),
        t.correction_fallbacks
    )
}

// ----------------------------------------------------------------- vqe

struct VqePlan {
    opt: OptimizerPlan,
    kinds: Vec<OptimizerKind>,
    drift: Option<DriftModel>,
}

impl VqePlan {
    fn parse(cfg: &RunConfig) -> Result<Self, CliError> {
        let opt = OptimizerPlan::parse(cfg)?;
        let kinds: Vec<OptimizerKind> = cfg.list("optimizers")?;
        if kinds.is_empty() {
            return Err(config_err("no optimizers selected"));
        }
        let drift = if cfg.flag("drift")? {
            let m = DriftModel {
                amplitude: cfg.get("drift_amplitude")?,
                period: cfg.get("drift_period")?,
                alpha: cfg.get("drift_alpha")?,
            };
            m.validate()?;
            Some(m)
        } else {
            None
        };
        Ok(Self { opt, kinds, drift })
    }

    fn run(self) -> Result<Outcome, CliError> {
        let OptimizerPlan { problem, base, wpl } = &self.opt;
        let traces: Vec<(OptimizerKind, TraceRecord)> = std::thread::scope(|s| {
            let handles: Vec<_> = self
                .kinds
                .iter()
                .map(|&k| {
                    let cfg = base.with_kind(k);
                    let drift = self.drift.as_ref();
                    s.spawn(move || run_vqe(problem, &cfg, wpl, drift).map(|t| (k, t)))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("optimizer worker panicked"))
                .collect::<wpl_core::Result<Vec<_>>>()
        })?;

        let mut artifacts = Vec::new();
        for (k, t) in &traces {
            artifacts.push(Artifact::text(format!("vqe_{k}.csv"), t.to_csv()));
            artifacts.push(Artifact::text(format!("vqe_{k}_params.csv"), t.params_csv()));
        }

        // Plot-ready: iteration vs |E − E₀| per optimizer.
        let mut conv = String::from("iter");
        for (k, _) in &traces {
            let _ = write!(conv, ",{k}");
        }
        conv.push('\n');
        let rows = traces.iter().map(|(_, t)| t.rows.len()).max().unwrap_or(0);
        for i in 0..rows {
            let _ = write!(conv, "{i}");
            for (_, t) in &traces {
                match t.rows.get(i) {
                    Some(r) => {
                        let _ = write!(conv, ",{}", fmt_f64(r.abs_error));
                    }
                    None => conv.push(','),
                }
            }
            conv.push('\n');
        }
        artifacts.push(Artifact::text("vqe_convergence.csv", conv));

        let mut summary = format!("optimizer,{}\n", summary_header());
        for (k, t) in &traces {
            let _ = writeln!(summary, "{k},{}", summary_fields(t));
        }
        artifacts.push(Artifact::text("vqe_summary.csv", summary));

        let abort = traces
            .iter()
            .find_map(|(k, t)| t.aborted.as_ref().map(|m| format!("{k}: {m}")));
        Ok(Outcome {
            artifacts,
            context: self.opt.context(),
            abort,
        })
    }
}

// -------------------------------------------------------------- ablate

struct AblatePlan {
    opt: OptimizerPlan,
    kinds: Vec<AblationKind>,
}

impl AblatePlan {
    fn parse(cfg: &RunConfig) -> Result<Self, CliError> {
        let opt = OptimizerPlan::parse(cfg)?;
        let kinds: Vec<AblationKind> = cfg.list("kinds")?;
        Ok(Self { opt, kinds })
    }

    fn run(self) -> Result<Outcome, CliError> {
        let OptimizerPlan { problem, base, wpl } = &self.opt;
        let mut artifacts = Vec::new();
        let mut summary = format!("kind,label,{}\n", summary_header());
        let mut abort = None;
        for &kind in &self.kinds {
            let runs = run_ablation(kind, problem, base, wpl)?;
            let mut csv = String::new();
            for (i, run) in runs.iter().enumerate() {
                let body = run.trace.to_csv();
                let mut lines = body.lines();
                let header = lines.next().unwrap_or_default();
                if i == 0 {
                    let _ = writeln!(csv, "label,{header}");
                }
                for line in lines {
                    let _ = writeln!(csv, "{},{line}", run.label);
                }
                let _ = writeln!(summary, "{kind},{},{}", run.label, summary_fields(&run.trace));
                if abort.is_none() {
                    abort = run.trace.aborted.as_ref().map(|m| format!("{kind}/{}: {m}", run.label));
                }
            }
            artifacts.push(Artifact::text(format!("ablate_{kind}.csv"), csv));
        }
        artifacts.push(Artifact::text("ablate_summary.csv", summary));
        Ok(Outcome {
            artifacts,
            context: self.opt.context(),
            abort,
        })
    }
}
