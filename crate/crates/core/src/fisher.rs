//! Block-diagonal WPL Fisher matrices and their regularized inverses.
//!
//! Each (Ry, Rz) pair of the ansatz owns a 2×2 block obtained by reading
//! the pair as (polar, azimuthal) coordinates on that qubit's WPL. Blocks
//! are inverted spectrally with eigenvalues below `τ` dropped; an optional
//! low-rank entangler correction is folded in with the Woodbury identity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wpl_metric, WplParams};
use crate::linalg::{condition_number, dot, inverse, norm, sym_eigen, Mat};

pub const DEFAULT_TAU: f64 = 1e-3;
/// Symmetry tolerance for matrices handed to [`pseudo_inverse`].
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Woodbury inner matrices at or above this condition number are rejected.
pub const MAX_INNER_CONDITION: f64 = 1e10;

/// Parameter layout of a hardware-efficient ansatz: per layer, an
/// (Ry, Rz) pair on each qubit. Parameter `4·layer + 2·qubit` is the Ry
/// angle and the next index the Rz angle (for two qubits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzLayout {
    pub n_qubits: usize,
    pub n_layers: usize,
}

impl AnsatzLayout {
    pub fn n_params(&self) -> usize {
        2 * self.n_qubits * self.n_layers
    }

    pub fn n_blocks(&self) -> usize {
        self.n_qubits * self.n_layers
    }

    /// Index of the Ry parameter of `(layer, qubit)`; the Rz angle follows.
    pub fn ry_index(&self, layer: usize, qubit: usize) -> usize {
        2 * (layer * self.n_qubits + qubit)
    }

    /// `(layer, qubit)` owning block `i`.
    pub fn block_owner(&self, i: usize) -> (usize, usize) {
        (i / self.n_qubits, i % self.n_qubits)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherBlock {
    pub index: usize,
    pub qubit: usize,
    pub layer: usize,
    /// First parameter covered; the block spans `offset..offset + dim`.
    pub offset: usize,
    pub matrix: Mat,
}

/// `C = U Vᵀ` with `U, V ∈ ℝ^{p×r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankCorrection {
    pub u: Mat,
    pub v: Mat,
}

impl LowRankCorrection {
    pub fn new(u: Mat, v: Mat) -> Result<Self> {
        if (u.rows(), u.cols()) != (v.rows(), v.cols()) {
            return Err(Error::Dimension {
                expected: u.rows() * u.cols(),
                found: v.rows() * v.cols(),
            });
        }
        if u.cols() > u.rows() {
            return Err(Error::Domain(format!(
                "correction rank {} exceeds dimension {}",
                u.cols(),
                u.rows()
            )));
        }
        Ok(Self { u, v })
    }

    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    pub fn dense(&self) -> Mat {
        self.u.matmul(&self.v.transpose())
    }

    /// Factors a symmetric `C` by its `max_rank` largest-magnitude
    /// eigenpairs above `tol`: `U = W Λ`, `V = W`.
    pub fn from_symmetric(c: &Mat, max_rank: usize, tol: f64) -> Result<Self> {
        let asym = c.asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::Symmetry { asymmetry: asym });
        }
        let eig = sym_eigen(c);
        let mut idx: Vec<usize> = (0..eig.values.len())
            .filter(|&i| eig.values[i].abs() > tol)
            .collect();
        idx.sort_by(|&a, &b| eig.values[b].abs().total_cmp(&eig.values[a].abs()));
        idx.truncate(max_rank);
        let p = c.rows();
        let u = Mat::from_fn(p, idx.len(), |i, k| {
            eig.vectors[(i, idx[k])] * eig.values[idx[k]]
        });
        let v = Mat::from_fn(p, idx.len(), |i, k| eig.vectors[(i, idx[k])]);
        Self::new(u, v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagQfim {
    pub blocks: Vec<FisherBlock>,
    pub dim: usize,
    pub correction: Option<LowRankCorrection>,
}

impl BlockDiagQfim {
    /// Dense `F_loc` (without the correction).
    pub fn dense(&self) -> Mat {
        let mut f = Mat::zeros(self.dim, self.dim);
        for b in &self.blocks {
            f.set_block(b.offset, b.offset, &b.matrix);
        }
        f
    }

    /// Blockwise thresholded pseudoinverse `F_loc⁺`, as a dense matrix.
    pub fn block_pinv(&self, cfg: &PseudoInverseConfig) -> Result<Mat> {
        let mut out = Mat::zeros(self.dim, self.dim);
        for b in &self.blocks {
            out.set_block(b.offset, b.offset, &pseudo_inverse(&b.matrix, cfg)?);
        }
        Ok(out)
    }

    /// `(F_loc + UVᵀ)⁺` via Woodbury when a correction is attached.
    pub fn preconditioner(&self, cfg: &PseudoInverseConfig) -> Result<Mat> {
        let base = self.block_pinv(cfg)?;
        match &self.correction {
            Some(c) if c.rank() > 0 => woodbury_pinv(&base, c),
            _ => Ok(base),
        }
    }
}

/// One 2×2 block per (layer, qubit): the WPL metric of that qubit evaluated
/// at the pair's Ry angle, `diag(b², b² sin²θ_y (a/b)²)`.
pub fn assemble_wpl_qfim(
    per_qubit: &[WplParams],
    theta: &[f64],
    layout: &AnsatzLayout,
) -> Result<BlockDiagQfim> {
    if per_qubit.len() != layout.n_qubits {
        return Err(Error::Structural(format!(
            "{} WPL parameter sets for {} qubits",
            per_qubit.len(),
            layout.n_qubits
        )));
    }
    if theta.len() != layout.n_params() {
        return Err(Error::Structural(format!(
            "{} parameters for a layout of {}",
            theta.len(),
            layout.n_params()
        )));
    }
    let blocks = (0..layout.n_blocks())
        .map(|i| {
            let (layer, qubit) = layout.block_owner(i);
            let offset = layout.ry_index(layer, qubit);
            let g = wpl_metric(theta[offset], &per_qubit[qubit]);
            FisherBlock {
                index: i,
                qubit,
                layer,
                offset,
                matrix: g.as_mat(),
            }
        })
        .collect();
    Ok(BlockDiagQfim {
        blocks,
        dim: layout.n_params(),
        correction: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoInverseConfig {
    pub tau: f64,
}

impl Default for PseudoInverseConfig {
    fn default() -> Self {
        Self { tau: DEFAULT_TAU }
    }
}

impl PseudoInverseConfig {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Domain(format!("tau = {tau} must be positive")));
        }
        Ok(Self { tau })
    }
}

/// Spectral decomposition with the threshold decision recorded.
#[derive(Debug, Clone)]
pub struct SpectralPinv {
    pub pinv: Mat,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat,
    pub retained: Vec<bool>,
}

impl SpectralPinv {
    /// Orthogonal projector onto the retained eigenspace.
    pub fn retained_projector(&self) -> Mat {
        let n = self.eigenvalues.len();
        let mut p = Mat::zeros(n, n);
        for k in (0..n).filter(|&k| self.retained[k]) {
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] += self.eigenvectors[(i, k)] * self.eigenvectors[(j, k)];
                }
            }
        }
        p
    }
}

pub fn spectral_pinv(f: &Mat, cfg: &PseudoInverseConfig) -> Result<SpectralPinv> {
    if !f.is_square() {
        return Err(Error::Dimension {
            expected: f.rows(),
            found: f.cols(),
        });
    }
    if !f.is_finite() {
        return Err(Error::NonFinite("Fisher matrix".into()));
    }
    let asym = f.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::Symmetry { asymmetry: asym });
    }
    let eig = sym_eigen(f);
    let n = f.rows();
    let retained: Vec<bool> = eig.values.iter().map(|&l| l >= cfg.tau).collect();
    let mut pinv = Mat::zeros(n, n);
    for k in (0..n).filter(|&k| retained[k]) {
        let inv = 1.0 / eig.values[k];
        for i in 0..n {
            for j in 0..n {
                pinv[(i, j)] += eig.vectors[(i, k)] * inv * eig.vectors[(j, k)];
            }
        }
    }
    Ok(SpectralPinv {
        pinv,
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        retained,
    })
}

/// `W Λ⁺ Wᵀ` with `Λ⁺ᵢᵢ = 1/λᵢ` for `λᵢ ≥ τ` and 0 otherwise.
pub fn pseudo_inverse(f: &Mat, cfg: &PseudoInverseConfig) -> Result<Mat> {
    spectral_pinv(f, cfg).map(|s| s.pinv)
}

/// `(F + jitter·I)⁻¹` with no thresholding; diverges near cone points.
pub fn naive_inverse(f: &Mat, jitter: f64) -> Result<Mat> {
    inverse(&f.add(&Mat::identity(f.rows()).scale(jitter)))
}

/// `F⁺ − F⁺U (I + VᵀF⁺U)⁻¹ VᵀF⁺`.
pub fn woodbury_pinv(f_loc_pinv: &Mat, corr: &LowRankCorrection) -> Result<Mat> {
    if corr.rank() == 0 {
        return Ok(f_loc_pinv.clone());
    }
    if corr.dim() != f_loc_pinv.rows() {
        return Err(Error::Dimension {
            expected: f_loc_pinv.rows(),
            found: corr.dim(),
        });
    }
    let fu = f_loc_pinv.matmul(&corr.u);
    let vt = corr.v.transpose();
    let inner = Mat::identity(corr.rank()).add(&vt.matmul(&fu));
    let condition = condition_number(&inner);
    if !(condition < MAX_INNER_CONDITION) {
        return Err(Error::CorrectionSingular { condition });
    }
    let inner_inv = inverse(&inner).map_err(|_| Error::CorrectionSingular { condition })?;
    let vtf = vt.matmul(f_loc_pinv);
    Ok(f_loc_pinv.sub(&fu.matmul(&inner_inv).matmul(&vtf)))
}

/// `F⁺ g`.
pub fn precondition(f_pinv: &Mat, gradient: &[f64]) -> Result<Vec<f64>> {
    if f_pinv.cols() != gradient.len() {
        return Err(Error::Dimension {
            expected: f_pinv.cols(),
            found: gradient.len(),
        });
    }
    Ok(f_pinv.matvec(gradient))
}

/// Effective step-size window for one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepBounds {
    /// `η / (C·Rᵢ)`.
    pub lower: f64,
    /// `η / τ`.
    pub upper: f64,
    /// Retained eigenvalues outside `[τ, C·Rᵢ]`; the bounds are only
    /// guaranteed when this is empty.
    pub out_of_range: Vec<f64>,
}

impl StepBounds {
    pub fn holds(&self) -> bool {
        self.out_of_range.is_empty()
    }

    /// Whether `‖η F⁺ g‖ / ‖g‖` lies in `[lower, upper]` (with relative slack
    /// for round-off).
    pub fn contains_ratio(&self, ratio: f64) -> bool {
        let slack = 1e-12;
        ratio >= self.lower * (1.0 - slack) && ratio <= self.upper * (1.0 + slack)
    }
}

/// Bounds `η/(C·Rᵢ) ≤ ‖ηF⁺g‖/‖g‖ ≤ η/τ` for gradients in the retained span.
pub fn step_size_bounds(f_block: &Mat, eta: f64, tau: f64, c: f64, r_i: f64) -> Result<StepBounds> {
    let sp = spectral_pinv(f_block, &PseudoInverseConfig::new(tau)?)?;
    let cap = c * r_i;
    let out_of_range = sp
        .eigenvalues
        .iter()
        .zip(&sp.retained)
        .filter(|(&l, &kept)| kept && l > cap * (1.0 + 1e-12))
        .map(|(&l, _)| l)
        .collect();
    Ok(StepBounds {
        lower: eta / cap,
        upper: eta / tau,
        out_of_range,
    })
}

/// `‖η F⁺ g‖ / ‖g‖`.
pub fn effective_step_ratio(f_pinv: &Mat, eta: f64, g: &[f64]) -> f64 {
    let d = f_pinv.matvec(g);
    eta * norm(&d) / norm(g)
}

/// Component of `g` inside the retained eigenspace.
pub fn project_to_retained(sp: &SpectralPinv, g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    for k in (0..n).filter(|&k| sp.retained[k]) {
        let w = sp.eigenvectors.col(k);
        let a = dot(&w, g);
        for i in 0..n {
            out[i] += a * w[i];
        }
    }
    out
}
