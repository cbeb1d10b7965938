//! Four-probe Bloch tomography, least-squares Bloch-map fits and a
//! parametric bootstrap over the whole estimation pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    wpl_from_bloch_matrix, GeometryConfig, PrincipalContractions, WplParams, DEFAULT_DELTA,
};
use crate::linalg::{pinv, svd, Mat};
use crate::quantum::channel::AffineBlochMap;
use crate::quantum::circuit::{simulate, Circuit, Gate, NoiseModel};
use crate::quantum::pauli::{pauli_expectation, Pauli, PauliString};
use crate::quantum::sampling::{sample_from_expectation, Basis, ShotCounts};
use crate::quantum::state::{bloch_to_density, BlochVector};
use crate::rng::SeedStream;
use crate::stats::{mean, percentile_sorted, std_dev};

/// Singular values of a design matrix at or below this are treated as zero.
pub const DESIGN_RANK_TOL: f64 = 1e-12;

/// Separation, in standard errors, required for `|λ⊥ − λ∥|` to count as
/// resolved.
pub const IDENTIFIABILITY_K: f64 = 5.0;

pub const DEFAULT_BOOTSTRAP_REPLICATES: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub label: String,
    pub r: BlochVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub probes: Vec<Probe>,
}

impl ProbeSet {
    fn from_pairs(pairs: &[(&str, [f64; 3])]) -> Self {
        Self {
            probes: pairs
                .iter()
                .map(|(l, r)| Probe {
                    label: (*l).to_string(),
                    r: BlochVector(*r),
                })
                .collect(),
        }
    }

    /// `{|0⟩, |1⟩, |+⟩, |+y⟩}`.
    pub fn minimal() -> Self {
        Self::from_pairs(&[
            ("0", [0.0, 0.0, 1.0]),
            ("1", [0.0, 0.0, -1.0]),
            ("+", [1.0, 0.0, 0.0]),
            ("+y", [0.0, 1.0, 0.0]),
        ])
    }

    /// `±x̂, ±ŷ, ±ẑ`.
    pub fn overcomplete() -> Self {
        Self::from_pairs(&[
            ("0", [0.0, 0.0, 1.0]),
            ("1", [0.0, 0.0, -1.0]),
            ("+", [1.0, 0.0, 0.0]),
            ("-", [-1.0, 0.0, 0.0]),
            ("+y", [0.0, 1.0, 0.0]),
            ("-y", [0.0, -1.0, 0.0]),
        ])
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }
}

/// The single-qubit process being characterized.
#[derive(Debug, Clone)]
pub enum ChannelUnderTest {
    /// A gate sequence (typically idles) with its noise model.
    Circuit {
        circuit: Circuit,
        noise: Option<NoiseModel>,
    },
    /// A prescribed affine Bloch map; outputs are clamped to the ball.
    Map(AffineBlochMap),
}

impl ChannelUnderTest {
    /// `count` noisy idle steps on one qubit.
    pub fn idle(count: usize, noise: NoiseModel) -> Self {
        let mut circuit = Circuit::new(1);
        circuit.push(Gate::Idle { qubit: 0, count });
        ChannelUnderTest::Circuit {
            circuit,
            noise: Some(noise),
        }
    }

    /// Exact `⟨P⟩` after preparing `input`, running the channel and rotating
    /// into `basis` (H for X, S† then H for Y).
    pub fn exact_expectation(&self, input: &BlochVector, basis: Basis) -> Result<f64> {
        match self {
            ChannelUnderTest::Circuit { circuit, noise } => {
                if circuit.n_qubits() != 1 {
                    return Err(Error::Structural(
                        "tomography needs a 1-qubit circuit".into(),
                    ));
                }
                let rho = simulate(circuit, noise.as_ref(), &bloch_to_density(input)?)?;
                let mut rot = Circuit::new(1);
                match basis {
                    Basis::X => {
                        rot.push(Gate::H { qubit: 0 });
                    }
                    Basis::Y => {
                        rot.push(Gate::Sdg { qubit: 0 }).push(Gate::H { qubit: 0 });
                    }
                    Basis::Z => {}
                }
                let rotated = simulate(&rot, None, &rho)?;
                pauli_expectation(&rotated, &PauliString(vec![Pauli::Z]))
            }
            ChannelUnderTest::Map(m) => {
                let out = m.apply(input);
                let n = out.norm();
                let scale = if n > 1.0 { 1.0 / n } else { 1.0 };
                Ok(out.0[basis.index()] * scale)
            }
        }
    }
}

/// One (probe, basis) measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomoEntry {
    pub label: String,
    pub input: BlochVector,
    pub basis: Basis,
    /// `None` in exact-expectation mode.
    pub n_plus: Option<u64>,
    pub n_minus: Option<u64>,
    pub expectation: f64,
}

impl TomoEntry {
    pub fn counts(&self) -> Option<ShotCounts> {
        match (self.n_plus, self.n_minus) {
            (Some(p), Some(m)) => Some(ShotCounts {
                n_plus: p,
                n_minus: m,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyRecord {
    pub probes: Vec<TomoEntry>,
    /// `None` means exact expectations (infinite shots).
    pub shots: Option<u64>,
    pub seed: u64,
    pub circuits_executed: usize,
}

impl TomographyRecord {
    pub fn is_exact(&self) -> bool {
        self.shots.is_none()
    }

    /// Probe labels in first-seen order.
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.probes {
            if !out.contains(&e.label) {
                out.push(e.label.clone());
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

/// Measures every probe in the three Pauli bases; `shots = None` records
/// exact expectations. Sub-streams are derived per (probe, basis).
pub fn run_tomography(
    channel: &ChannelUnderTest,
    probes: &ProbeSet,
    shots: Option<u64>,
    stream: &SeedStream,
) -> Result<TomographyRecord> {
    if shots == Some(0) {
        return Err(Error::InvalidRecord(
            "shot budget must be at least 1".into(),
        ));
    }
    let mut entries = Vec::with_capacity(3 * probes.len());
    for (i, probe) in probes.probes.iter().enumerate() {
        for basis in Basis::ALL {
            let exact = channel.exact_expectation(&probe.r, basis)?;
            let entry = match shots {
                None => TomoEntry {
                    label: probe.label.clone(),
                    input: probe.r,
                    basis,
                    n_plus: None,
                    n_minus: None,
                    expectation: exact,
                },
                Some(n) => {
                    let mut rng = stream.child(&[i as u64, basis.index() as u64, 0]).rng();
                    let c = sample_from_expectation(exact, n, &mut rng)?;
                    TomoEntry {
                        label: probe.label.clone(),
                        input: probe.r,
                        basis,
                        n_plus: Some(c.n_plus),
                        n_minus: Some(c.n_minus),
                        expectation: c.expectation(),
                    }
                }
            };
            entries.push(entry);
        }
    }
    Ok(TomographyRecord {
        circuits_executed: entries.len(),
        probes: entries,
        shots,
        seed: stream.seed(),
    })
}

/// `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` for one probe.
pub fn estimate_bloch(record: &TomographyRecord, label: &str) -> Result<BlochVector> {
    let mut out = [0.0; 3];
    for basis in Basis::ALL {
        let e = record
            .probes
            .iter()
            .find(|e| e.label == label && e.basis == basis)
            .ok_or_else(|| Error::IncompleteRecord {
                label: label.to_string(),
                basis: basis.as_char(),
            })?;
        out[basis.index()] = e.expectation;
    }
    Ok(BlochVector(out))
}

/// `(input, estimated output)` for every probe in the record.
pub fn probe_pairs(record: &TomographyRecord) -> Result<(Vec<BlochVector>, Vec<BlochVector>)> {
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for label in record.labels() {
        let input = record
            .probes
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.input)
            .expect("label taken from record");
        inputs.push(input);
        outputs.push(estimate_bloch(record, &label)?);
    }
    Ok((inputs, outputs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochMapFit {
    pub map: AffineBlochMap,
    /// `Σ ‖T rᵢ + c − r'ᵢ‖²`.
    pub residual: f64,
}

fn least_squares(
    inputs: &[BlochVector],
    outputs: &[BlochVector],
    affine: bool,
) -> Result<BlochMapFit> {
    let cols = if affine { 4 } else { 3 };
    if inputs.len() != outputs.len() {
        return Err(Error::Dimension {
            expected: inputs.len(),
            found: outputs.len(),
        });
    }
    if inputs.len() < cols {
        return Err(Error::DesignDeficiency {
            rank: inputs.len(),
            needed: cols,
        });
    }
    let design = Mat::from_fn(
        inputs.len(),
        cols,
        |i, j| if j < 3 { inputs[i].0[j] } else { 1.0 },
    );
    let rank = svd(&design).rank(DESIGN_RANK_TOL);
    if rank < cols {
        return Err(Error::DesignDeficiency { rank, needed: cols });
    }
    let response = Mat::from_fn(outputs.len(), 3, |i, j| outputs[i].0[j]);
    // Rows 0..3 hold Tᵀ, row 3 (affine only) holds cᵀ.
    let coef = pinv(&design, DESIGN_RANK_TOL).matmul(&response);
    let t = coef.block(0, 0, 3, 3).transpose();
    let c = if affine {
        [coef[(3, 0)], coef[(3, 1)], coef[(3, 2)]]
    } else {
        [0.0; 3]
    };
    let map = AffineBlochMap::from_mat(&t, c);
    let residual = inputs
        .iter()
        .zip(outputs)
        .map(|(r, o)| {
            let d = map.apply(r).distance(o);
            d * d
        })
        .sum();
    Ok(BlochMapFit { map, residual })
}

/// Least-squares `(T, c)` via the pseudoinverse of the ones-augmented design.
pub fn fit_affine_map(inputs: &[BlochVector], outputs: &[BlochVector]) -> Result<BlochMapFit> {
    least_squares(inputs, outputs, true)
}

/// Least-squares `T` with `c` forced to zero.
pub fn fit_linear_map(inputs: &[BlochVector], outputs: &[BlochVector]) -> Result<BlochMapFit> {
    least_squares(inputs, outputs, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    Affine,
    Linear,
}

impl std::str::FromStr for FitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "affine" => Ok(FitKind::Affine),
            "linear" => Ok(FitKind::Linear),
            other => Err(Error::Config(format!("unknown fit {other:?} (expected affine or linear)"))),
        }
    }
}

/// Configuration of the record → WPL pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub fit: FitKind,
    pub geometry: GeometryConfig,
}

impl PipelineConfig {
    pub fn new(geometry: GeometryConfig) -> Self {
        Self {
            fit: FitKind::Affine,
            geometry,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineEstimate {
    pub fit: BlochMapFit,
    pub contractions: PrincipalContractions,
    pub wpl: WplParams,
}

/// estimate → fit → regularize → extract → map.
pub fn estimate_wpl(record: &TomographyRecord, cfg: &PipelineConfig) -> Result<PipelineEstimate> {
    let (inputs, outputs) = probe_pairs(record)?;
    let fit = match cfg.fit {
        FitKind::Affine => fit_affine_map(&inputs, &outputs)?,
        FitKind::Linear => fit_linear_map(&inputs, &outputs)?,
    };
    let (contractions, wpl) = wpl_from_bloch_matrix(&fit.map.t_mat(), &cfg.geometry)?;
    Ok(PipelineEstimate {
        fit,
        contractions,
        wpl,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WplTriple {
    pub a_over_b: f64,
    pub b: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

impl From<&WplParams> for WplTriple {
    fn from(p: &WplParams) -> Self {
        Self {
            a_over_b: p.a_over_b,
            b: p.b,
            r: p.r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapIntervals {
    pub a_over_b: Interval,
    pub b: Interval,
    #[serde(rename = "R")]
    pub r: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplesSummary {
    pub mean: WplTriple,
    pub std: WplTriple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub point: WplTriple,
    /// Percentile intervals at 2.5% and 97.5%.
    pub ci: BootstrapIntervals,
    #[serde(rename = "B")]
    pub replicates: usize,
    pub samples_summary: SamplesSummary,
    #[serde(skip)]
    pub samples: Vec<WplTriple>,
}

impl BootstrapReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Redraws every count from `Binomial(N, n₊/N)`; exact entries are kept.
pub fn resample_record(record: &TomographyRecord, stream: &SeedStream) -> Result<TomographyRecord> {
    let mut rng = stream.rng();
    let mut out = record.clone();
    for e in &mut out.probes {
        let Some(c) = e.counts() else { continue };
        if c.shots() == 0 {
            return Err(Error::InvalidRecord(format!(
                "probe {} basis {} has zero shots",
                e.label,
                e.basis.as_char()
            )));
        }
        let r = sample_from_expectation(c.expectation(), c.shots(), &mut rng)?;
        e.n_plus = Some(r.n_plus);
        e.n_minus = Some(r.n_minus);
        e.expectation = r.expectation();
    }
    Ok(out)
}

/// Parametric bootstrap of `(a/b, b, R)` with `B` replicates; replicate `k`
/// draws from the sub-stream `stream.child([k])`.
pub fn bootstrap_wpl(
    record: &TomographyRecord,
    replicates: usize,
    cfg: &PipelineConfig,
    stream: &SeedStream,
) -> Result<BootstrapReport> {
    if replicates < 2 {
        return Err(Error::Domain(format!(
            "bootstrap needs B >= 2, got {replicates}"
        )));
    }
    if record
        .probes
        .iter()
        .any(|e| e.counts().is_some_and(|c| c.shots() == 0))
    {
        return Err(Error::InvalidRecord(
            "record contains zero-shot entries".into(),
        ));
    }
    let point = WplTriple::from(&estimate_wpl(record, cfg)?.wpl);
    let samples = (0..replicates)
        .map(|k| {
            let rec = resample_record(record, &stream.child(&[k as u64]))?;
            Ok(WplTriple::from(&estimate_wpl(&rec, cfg)?.wpl))
        })
        .collect::<Result<Vec<_>>>()?;

    let column = |f: fn(&WplTriple) -> f64| -> Vec<f64> {
        let mut v: Vec<f64> = samples.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (ab, b, r) = (column(|s| s.a_over_b), column(|s| s.b), column(|s| s.r));
    let interval = |v: &[f64]| Interval {
        lower: percentile_sorted(v, 0.025),
        upper: percentile_sorted(v, 0.975),
    };
    Ok(BootstrapReport {
        point,
        ci: BootstrapIntervals {
            a_over_b: interval(&ab),
            b: interval(&b),
            r: interval(&r),
        },
        replicates,
        samples_summary: SamplesSummary {
            mean: WplTriple {
                a_over_b: mean(&ab),
                b: mean(&b),
                r: mean(&r),
            },
            std: WplTriple {
                a_over_b: std_dev(&ab),
                b: std_dev(&b),
                r: std_dev(&r),
            },
        },
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Identifiability {
    Resolved,
    Marginal,
}

/// Degeneracy tolerance matched to an `N`-shot record: `max(δ₀, k/√N)`.
///
/// With the default `δ₀ = 0.01`, shot noise at `N ≲ 10⁵` splits a truly
/// degenerate singular-value pair by more than `δ₀`, sending the extraction
/// to the non-phase-covariant surrogate. Widening to the identifiability
/// scale keeps the degenerate pair together.
pub fn noise_matched_delta(shots: u64) -> f64 {
    DEFAULT_DELTA.max(IDENTIFIABILITY_K / (shots.max(1) as f64).sqrt())
}

/// Resolved iff `|λ⊥ − λ∥| > k/√N` with `k = 5`.
pub fn identifiability_check(
    lambda_perp: f64,
    lambda_par: f64,
    shots: u64,
) -> Result<Identifiability> {
    if shots == 0 {
        return Err(Error::Domain("shot budget must be at least 1".into()));
    }
    let threshold = IDENTIFIABILITY_K / (shots as f64).sqrt();
    Ok(if (lambda_perp - lambda_par).abs() > threshold {
        Identifiability::Resolved
    } else {
        Identifiability::Marginal
    })
}
