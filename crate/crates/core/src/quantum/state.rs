//! Density matrices and Bloch vectors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMat};
use crate::quantum::pauli::{pauli_matrix, Pauli};

/// Slack allowed on `‖r‖ ≤ 1` before a vector is rejected as unphysical.
pub const BLOCH_NORM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self([x, y, z])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Hermitian, unit-trace, positive semidefinite state on one or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: CMat,
}

impl DensityMatrix {
    /// Validates dimension, Hermiticity, trace and positivity.
    pub fn new(rho: CMat) -> Result<Self> {
        let d = rho.dim();
        if d != 2 && d != 4 {
            return Err(Error::Dimension {
                expected: 2,
                found: d,
            });
        }
        let herm = rho.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::Numeric(format!("state not Hermitian ({herm:.3e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Numeric(format!("state trace {tr} != 1")));
        }
        let min_ev = hermitian_eigenvalues(&rho)[0];
        if min_ev < -1e-10 {
            return Err(Error::Numeric(format!("state has eigenvalue {min_ev:.3e}")));
        }
        Ok(Self { rho })
    }

    /// Skips validation; used on outputs of trace-preserving maps.
    pub(crate) fn from_cmat_unchecked(rho: CMat) -> Self {
        Self { rho }
    }

    /// `|0…0⟩⟨0…0|` on `n_qubits` qubits.
    pub fn zero_state(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        let mut rho = CMat::zeros(d);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { rho }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        Self {
            rho: CMat::identity(d).scale(Complex64::new(1.0 / d as f64, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn n_qubits(&self) -> usize {
        if self.dim() == 2 {
            1
        } else {
            2
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Tensor product `self ⊗ other` of two single-qubit states.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.dim() != 2 || other.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: self.dim().max(other.dim()),
            });
        }
        Ok(Self {
            rho: self.rho.kron(&other.rho),
        })
    }
}

/// `ρ = (I + r·σ)/2`.
pub fn bloch_to_density(r: &BlochVector) -> Result<DensityMatrix> {
    let n = r.norm();
    if n > 1.0 + BLOCH_NORM_SLACK || !n.is_finite() {
        return Err(Error::UnphysicalState { norm: n });
    }
    let [x, y, z] = r.0;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let rho = CMat::from_slice(
        2,
        &[
            c(0.5 * (1.0 + z), 0.0),
            c(0.5 * x, -0.5 * y),
            c(0.5 * x, 0.5 * y),
            c(0.5 * (1.0 - z), 0.0),
        ],
    );
    Ok(DensityMatrix { rho })
}

/// `rᵢ = tr(σᵢ ρ)` for a single-qubit state.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: rho.dim(),
        });
    }
    let comp = |p: Pauli| pauli_matrix(p).matmul(rho.matrix()).trace().re;
    Ok(BlochVector([
        comp(Pauli::X),
        comp(Pauli::Y),
        comp(Pauli::Z),
    ]))
}
