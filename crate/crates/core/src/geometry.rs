//! Weighted-projective-line geometry of a qubit channel.
//!
//! An estimated Bloch matrix `T` is regularized through its SVD (singular
//! values reflected to `|s|` and clipped to `[ε, 1]`), its principal
//! contractions `(λ⊥, λ∥)` are picked out by a degeneracy rule, and those
//! are mapped to the surrogate parameters `(a/b, b, R)` under an explicit
//! [`Convention`]. The metric, curvature and area formulas of the surrogate
//! live here as well.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{svd, Mat};
use crate::quantum::state::BlochVector;

pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_DELTA: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedSvd {
    pub u: Mat,
    pub v: Mat,
    /// Descending, each in `[ε, 1]`.
    pub s: [f64; 3],
    pub epsilon: f64,
}

/// SVD of a 3×3 Bloch matrix with singular values reflected and clipped to
/// `[ε, 1]`.
pub fn svd_regularize(t: &Mat, epsilon: f64) -> Result<RegularizedSvd> {
    if (t.rows(), t.cols()) != (3, 3) {
        return Err(Error::Dimension {
            expected: 3,
            found: t.rows().max(t.cols()),
        });
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("Bloch matrix".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain(format!(
            "clip floor {epsilon} outside (0, 1]"
        )));
    }
    let d = svd(t);
    let mut s = [0.0; 3];
    for (o, x) in s.iter_mut().zip(&d.s) {
        *o = x.abs().clamp(epsilon, 1.0);
    }
    Ok(RegularizedSvd {
        u: d.u,
        v: d.v,
        s,
        epsilon,
    })
}

/// Which pair of singular values was taken as the transversal pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `|s₁ − s₂| ≤ δ`: transversal `(s₁, s₂)`, longitudinal `s₃`.
    LeadingPair,
    /// `|s₂ − s₃| ≤ δ`: transversal `(s₂, s₃)`, longitudinal `s₁`.
    TrailingPair,
    /// No near-degenerate pair; `(s₁, s₂)` / `s₃` used as a coarse surrogate.
    NonPhaseCovariant,
}

impl Branch {
    /// 1 and 2 for the degenerate branches, 0 for the fallback.
    pub fn number(self) -> u8 {
        match self {
            Branch::LeadingPair => 1,
            Branch::TrailingPair => 2,
            Branch::NonPhaseCovariant => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrincipalContractions {
    pub lambda_perp: f64,
    pub lambda_par: f64,
    pub phase_covariant: bool,
    pub branch: Branch,
}

/// Degeneracy rule on descending singular values.
pub fn contractions_from_singular_values(s: [f64; 3], delta: f64) -> PrincipalContractions {
    let [s1, s2, s3] = s;
    if (s1 - s2).abs() <= delta {
        PrincipalContractions {
            lambda_perp: 0.5 * (s1 + s2),
            lambda_par: s3,
            phase_covariant: true,
            branch: Branch::LeadingPair,
        }
    } else if (s2 - s3).abs() <= delta {
        PrincipalContractions {
            lambda_perp: 0.5 * (s2 + s3),
            lambda_par: s1,
            phase_covariant: true,
            branch: Branch::TrailingPair,
        }
    } else {
        PrincipalContractions {
            lambda_perp: 0.5 * (s1 + s2),
            lambda_par: s3,
            phase_covariant: false,
            branch: Branch::NonPhaseCovariant,
        }
    }
}

pub fn extract_contractions(svd: &RegularizedSvd, delta: f64) -> PrincipalContractions {
    contractions_from_singular_values(svd.s, delta)
}

/// The three incompatible channel → WPL identifications in use.
///
/// | tag    | `b`    | `a/b`        | `R`     |
/// |--------|--------|--------------|---------|
/// | SEC5   | `λ⊥`   | `λ∥/λ⊥`      | `2/λ⊥²` |
/// | PROP33 | `1/λ⊥` | `λ∥/λ⊥`      | `2λ⊥²`  |
/// | HW     | `λ⊥`   | `√(λ⊥/λ∥)`   | `2/λ⊥²` |
///
/// In every case `R = 2/b²` holds for the stored `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Sec5,
    Prop33,
    Hw,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Sec5 => "sec5",
            Convention::Prop33 => "prop33",
            Convention::Hw => "hw",
        })
    }
}

impl FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sec5" => Ok(Convention::Sec5),
            "prop33" => Ok(Convention::Prop33),
            "hw" => Ok(Convention::Hw),
            other => Err(Error::Config(format!(
                "unknown convention {other:?} (expected sec5, prop33 or hw)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WplParams {
    pub a_over_b: f64,
    pub b: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// Stored for completeness; never enters a metric.
    pub kappa: f64,
    pub convention: Convention,
}

impl WplParams {
    /// Parameters given directly as `(a/b, b)`, with `R = 2/b²`.
    pub fn from_ratio(a_over_b: f64, b: f64, convention: Convention) -> Result<Self> {
        if !(a_over_b > 0.0 && a_over_b.is_finite()) {
            return Err(Error::Domain(format!("a/b = {a_over_b} must be positive")));
        }
        Ok(Self {
            a_over_b,
            b,
            r: scalar_curvature(b)?,
            kappa: 1.0,
            convention,
        })
    }

    /// Noiseless sphere: `(1, 1, 2)`.
    pub fn sphere(convention: Convention) -> Self {
        Self {
            a_over_b: 1.0,
            b: 1.0,
            r: 2.0,
            kappa: 1.0,
            convention,
        }
    }

    /// Inverse of [`wpl_from_contractions`] under the stored convention.
    pub fn to_contractions(&self) -> (f64, f64) {
        match self.convention {
            Convention::Sec5 => (self.b, self.a_over_b * self.b),
            Convention::Prop33 => (1.0 / self.b, self.a_over_b / self.b),
            Convention::Hw => (self.b, self.b / (self.a_over_b * self.a_over_b)),
        }
    }

    /// Copy with `a/b` forced to 1 (the isotropic ablation).
    pub fn isotropic(&self) -> Self {
        Self {
            a_over_b: 1.0,
            ..*self
        }
    }
}

pub fn wpl_from_contractions(
    c: &PrincipalContractions,
    convention: Convention,
) -> Result<WplParams> {
    let (lp, ll) = (c.lambda_perp, c.lambda_par);
    for (name, v) in [("lambda_perp", lp), ("lambda_par", ll)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Domain(format!("{name} = {v} outside (0, 1]")));
        }
    }
    let (a_over_b, b) = match convention {
        Convention::Sec5 => (ll / lp, lp),
        Convention::Prop33 => (ll / lp, 1.0 / lp),
        Convention::Hw => ((lp / ll).sqrt(), lp),
    };
    let r = match convention {
        Convention::Prop33 => 2.0 * lp * lp,
        _ => 2.0 / (lp * lp),
    };
    Ok(WplParams {
        a_over_b,
        b,
        r,
        kappa: 1.0,
        convention,
    })
}

/// `R = 2/b²`.
pub fn scalar_curvature(b: f64) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!("b = {b} must be positive")));
    }
    Ok(2.0 / (b * b))
}

/// Orbifold area `2πb²(1/a + 1/b)`.
pub fn orbifold_area(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!(
            "weights ({a}, {b}) must be positive"
        )));
    }
    Ok(2.0 * PI * b * b * (1.0 / a + 1.0 / b))
}

/// A 2×2 metric in `(θ, φ)` chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub theta: f64,
    pub phi: f64,
    pub g: [[f64; 2]; 2],
}

impl MetricSample {
    fn diagonal(theta: f64, g_tt: f64, g_pp: f64) -> Self {
        Self {
            theta,
            phi: 0.0,
            g: [[g_tt, 0.0], [0.0, g_pp]],
        }
    }

    pub fn as_mat(&self) -> Mat {
        Mat::from_rows(&self.g)
    }
}

/// Pullback of the Fubini–Study metric through a phase-covariant channel:
/// `diag(¼(λ∥²cos²θ + λ⊥²sin²θ), ¼λ⊥²sin²θ)`.
pub fn noisy_fs_metric(theta: f64, lambda_perp: f64, lambda_par: f64) -> MetricSample {
    let (s, c) = theta.sin_cos();
    let lp2 = lambda_perp * lambda_perp;
    let ll2 = lambda_par * lambda_par;
    MetricSample::diagonal(
        theta,
        0.25 * (ll2 * c * c + lp2 * s * s),
        0.25 * lp2 * s * s,
    )
}

/// Surrogate WPL metric `diag(b², b² sin²θ (a/b)²)`.
pub fn wpl_metric(theta: f64, params: &WplParams) -> MetricSample {
    let b2 = params.b * params.b;
    let s = theta.sin();
    let ab2 = params.a_over_b * params.a_over_b;
    MetricSample::diagonal(theta, b2, (b2 * s * s * ab2).max(0.0))
}

/// Bures metric on the open Bloch ball:
/// `δᵢⱼ/(1−|r|²) + rᵢrⱼ/(1−|r|²)²`.
pub fn bures_metric(r: &BlochVector) -> Result<[[f64; 3]; 3]> {
    let r2: f64 = r.0.iter().map(|x| x * x).sum();
    if r2 >= 1.0 {
        return Err(Error::Domain(format!(
            "Bures metric diverges at |r| = {}",
            r2.sqrt()
        )));
    }
    let d = 1.0 - r2;
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = r.0[i] * r.0[j] / (d * d) + if i == j { 1.0 / d } else { 0.0 };
        }
    }
    Ok(g)
}

/// Regularization and extraction settings shared by every pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub convention: Convention,
}

impl GeometryConfig {
    pub fn new(convention: Convention) -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            delta: DEFAULT_DELTA,
            convention,
        }
    }
}

/// Serialized summary of one channel's geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WplReport {
    pub lambda_perp: f64,
    pub lambda_par: f64,
    pub phase_covariant: bool,
    pub branch: Branch,
    pub convention: Convention,
    pub a_over_b: f64,
    pub b: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub epsilon: f64,
    pub delta: f64,
}

/// regularize → extract → map.
pub fn wpl_from_bloch_matrix(
    t: &Mat,
    cfg: &GeometryConfig,
) -> Result<(PrincipalContractions, WplParams)> {
    let reg = svd_regularize(t, cfg.epsilon)?;
    let c = extract_contractions(&reg, cfg.delta);
    let p = wpl_from_contractions(&c, cfg.convention)?;
    Ok((c, p))
}

pub fn wpl_report(t: &Mat, cfg: &GeometryConfig) -> Result<WplReport> {
    let (c, p) = wpl_from_bloch_matrix(t, cfg)?;
    Ok(WplReport {
        lambda_perp: c.lambda_perp,
        lambda_par: c.lambda_par,
        phase_covariant: c.phase_covariant,
        branch: c.branch,
        convention: cfg.convention,
        a_over_b: p.a_over_b,
        b: p.b,
        r: p.r,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
    })
}
