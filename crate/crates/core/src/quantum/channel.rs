//! Single-qubit noise channels in Kraus form and their affine Bloch maps.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, Mat};
use crate::quantum::pauli::{pauli_matrix, Pauli};
use crate::quantum::state::{BlochVector, DensityMatrix};

/// Tolerance on `Σ K†K = I`.
pub const CPTP_TOL: f64 = 1e-12;

/// Built-in channel families.
///
/// * `Dephasing(p)`: Z flip with probability `p ∈ [0, 1/2]`, `λ⊥ = 1 − 2p`.
/// * `Depolarizing(p)`: `ρ ↦ (1−p)ρ + p·I/2`, `T = (1−p)·I`.
/// * `AmplitudeDamping(γ)`: relaxation to `|0⟩` with probability `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "snake_case")]
pub enum ChannelKind {
    Identity,
    Dephasing(f64),
    Depolarizing(f64),
    AmplitudeDamping(f64),
}

impl ChannelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Identity => "identity",
            ChannelKind::Dephasing(_) => "dephasing",
            ChannelKind::Depolarizing(_) => "depolarizing",
            ChannelKind::AmplitudeDamping(_) => "amplitude_damping",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            ChannelKind::Identity => 0.0,
            ChannelKind::Dephasing(p)
            | ChannelKind::Depolarizing(p)
            | ChannelKind::AmplitudeDamping(p) => p,
        }
    }

    /// Closed-form Bloch map of one application of the channel.
    pub fn analytic_bloch_map(&self) -> AffineBlochMap {
        match *self {
            ChannelKind::Identity => AffineBlochMap::identity(),
            ChannelKind::Dephasing(p) => {
                AffineBlochMap::diagonal([1.0 - 2.0 * p, 1.0 - 2.0 * p, 1.0], [0.0; 3])
            }
            ChannelKind::Depolarizing(p) => AffineBlochMap::diagonal([1.0 - p; 3], [0.0; 3]),
            ChannelKind::AmplitudeDamping(g) => {
                let s = (1.0 - g).sqrt();
                AffineBlochMap::diagonal([s, s, 1.0 - g], [0.0, 0.0, g])
            }
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelKind::Identity => write!(f, "identity"),
            other => write!(f, "{}:{}", other.name(), other.param()),
        }
    }
}

/// Parses `identity`, `dephasing:0.1`, `depolarizing:0.1` or
/// `amplitude_damping:0.2` (also `ad:0.2`).
impl FromStr for ChannelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("identity") || s.eq_ignore_ascii_case("none") {
            return Ok(ChannelKind::Identity);
        }
        let (name, param) = s
            .split_once(':')
            .or_else(|| s.split_once('='))
            .ok_or_else(|| Error::Config(format!("channel {s:?} must be KIND:PARAM")))?;
        let p: f64 = param
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("channel parameter {param:?} is not a number")))?;
        match name.trim().to_ascii_lowercase().as_str() {
            "dephasing" => Ok(ChannelKind::Dephasing(p)),
            "depolarizing" => Ok(ChannelKind::Depolarizing(p)),
            "amplitude_damping" | "ad" => Ok(ChannelKind::AmplitudeDamping(p)),
            other => Err(Error::Config(format!("unknown channel kind {other:?}"))),
        }
    }
}

/// A CPTP single-qubit channel in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseChannel {
    kraus: Vec<CMat>,
    kind: Option<ChannelKind>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Builds the Kraus representation of a built-in channel.
pub fn make_channel(kind: ChannelKind) -> Result<NoiseChannel> {
    let kraus = match kind {
        ChannelKind::Identity => vec![CMat::identity(2)],
        ChannelKind::Dephasing(p) => {
            if !(0.0..=0.5).contains(&p) {
                return Err(Error::Domain(format!("dephasing p={p} outside [0, 1/2]")));
            }
            vec![
                CMat::identity(2).scale(c((1.0 - p).sqrt())),
                pauli_matrix(Pauli::Z).scale(c(p.sqrt())),
            ]
        }
        ChannelKind::Depolarizing(p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("depolarizing p={p} outside [0, 1]")));
            }
            let w = (p / 4.0).sqrt();
            vec![
                CMat::identity(2).scale(c((1.0 - 0.75 * p).sqrt())),
                pauli_matrix(Pauli::X).scale(c(w)),
                pauli_matrix(Pauli::Y).scale(c(w)),
                pauli_matrix(Pauli::Z).scale(c(w)),
            ]
        }
        ChannelKind::AmplitudeDamping(g) => {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::Domain(format!(
                    "amplitude damping gamma={g} outside [0, 1]"
                )));
            }
            vec![
                CMat::from_real(2, &[1.0, 0.0, 0.0, (1.0 - g).sqrt()]),
                CMat::from_real(2, &[0.0, g.sqrt(), 0.0, 0.0]),
            ]
        }
    };
    Ok(NoiseChannel {
        kraus,
        kind: Some(kind),
    })
}

impl NoiseChannel {
    /// Wraps an arbitrary Kraus set after checking trace preservation.
    pub fn from_kraus(kraus: Vec<CMat>) -> Result<Self> {
        let ch = Self { kraus, kind: None };
        ch.check_cptp()?;
        Ok(ch)
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn kind(&self) -> Option<ChannelKind> {
        self.kind
    }

    pub fn check_cptp(&self) -> Result<()> {
        if self.kraus.is_empty() || self.kraus.iter().any(|k| k.dim() != 2) {
            return Err(Error::CptpViolation {
                deviation: f64::INFINITY,
            });
        }
        let sum = self
            .kraus
            .iter()
            .fold(CMat::zeros(2), |acc, k| acc.add(&k.adjoint().matmul(k)));
        let deviation = sum.max_abs_diff(&CMat::identity(2));
        if deviation > CPTP_TOL {
            return Err(Error::CptpViolation { deviation });
        }
        Ok(())
    }

    /// `Σ K X K†` on an arbitrary 2×2 operator.
    pub fn apply_operator(&self, x: &CMat) -> CMat {
        self.kraus
            .iter()
            .fold(CMat::zeros(x.dim()), |acc, k| acc.add(&x.conjugate_by(k)))
    }
}

/// `ρ' = Σ Kᵢ ρ Kᵢ†`, with the Kraus operators embedded on `qubit` for
/// two-qubit states (qubit 0 is the most significant tensor factor).
pub fn apply_channel(
    ch: &NoiseChannel,
    rho: &DensityMatrix,
    qubit: usize,
) -> Result<DensityMatrix> {
    let m = rho.matrix();
    let out = match (rho.dim(), qubit) {
        (2, 0) => ch.apply_operator(m),
        (4, q @ (0 | 1)) => {
            let id = CMat::identity(2);
            ch.kraus.iter().fold(CMat::zeros(4), |acc, k| {
                let big = if q == 0 { k.kron(&id) } else { id.kron(k) };
                acc.add(&m.conjugate_by(&big))
            })
        }
        (d, q) => {
            return Err(Error::Structural(format!(
                "qubit index {q} out of range for dimension {d}"
            )))
        }
    };
    Ok(DensityMatrix::from_cmat_unchecked(out))
}

/// Affine action `r ↦ T r + c` of a qubit channel on Bloch vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineBlochMap {
    pub t: [[f64; 3]; 3],
    pub c: [f64; 3],
}

impl AffineBlochMap {
    pub fn identity() -> Self {
        Self::diagonal([1.0; 3], [0.0; 3])
    }

    pub fn diagonal(d: [f64; 3], c: [f64; 3]) -> Self {
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            t[i][i] = d[i];
        }
        Self { t, c }
    }

    pub fn from_mat(t: &Mat, c: [f64; 3]) -> Self {
        assert_eq!((t.rows(), t.cols()), (3, 3));
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = t[(i, j)];
            }
        }
        Self { t: out, c }
    }

    pub fn t_mat(&self) -> Mat {
        Mat::from_rows(&self.t)
    }

    pub fn apply(&self, r: &BlochVector) -> BlochVector {
        let mut out = self.c;
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..3 {
                *o += self.t[i][j] * r.0[j];
            }
        }
        BlochVector(out)
    }

    /// Map of `self ∘ first` (apply `first`, then `self`).
    pub fn after(&self, first: &AffineBlochMap) -> AffineBlochMap {
        let t = self.t_mat().matmul(&first.t_mat());
        let c = self.apply(&BlochVector(first.c)).0;
        AffineBlochMap::from_mat(&t, c)
    }

    /// Largest absolute entry difference over `T` and `c`.
    pub fn max_abs_diff(&self, other: &AffineBlochMap) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            worst = worst.max((self.c[i] - other.c[i]).abs());
            for j in 0..3 {
                worst = worst.max((self.t[i][j] - other.t[i][j]).abs());
            }
        }
        worst
    }

    pub fn t_frobenius_distance(&self, other: &AffineBlochMap) -> f64 {
        self.t_mat().sub(&other.t_mat()).frobenius_norm()
    }
}

/// `T_ij = ½ tr(σᵢ Φ(σⱼ))`, `cᵢ = ½ tr(σᵢ Φ(I))`.
pub fn channel_to_bloch_map(ch: &NoiseChannel) -> Result<AffineBlochMap> {
    ch.check_cptp()?;
    let paulis = [Pauli::X, Pauli::Y, Pauli::Z];
    let sig: Vec<CMat> = paulis.iter().map(|&p| pauli_matrix(p)).collect();
    let mut t = [[0.0; 3]; 3];
    for (j, sj) in sig.iter().enumerate() {
        let image = ch.apply_operator(sj);
        for (i, si) in sig.iter().enumerate() {
            t[i][j] = 0.5 * si.matmul(&image).trace().re;
        }
    }
    let image_id = ch.apply_operator(&CMat::identity(2));
    let mut cvec = [0.0; 3];
    for (i, si) in sig.iter().enumerate() {
        cvec[i] = 0.5 * si.matmul(&image_id).trace().re;
    }
    Ok(AffineBlochMap { t, c: cvec })
}
