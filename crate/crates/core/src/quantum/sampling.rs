//! Finite-shot measurement sampling.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::pauli::{pauli_expectation, Pauli, PauliString};
use crate::quantum::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn pauli(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Y => Pauli::Y,
            Basis::Z => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        self.pauli().as_char()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Two-outcome counts for one measurement setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub n_plus: u64,
    pub n_minus: u64,
}

impl ShotCounts {
    pub fn new(n_plus: u64, n_minus: u64) -> Result<Self> {
        if n_plus + n_minus == 0 {
            return Err(Error::InvalidRecord("zero shots".into()));
        }
        Ok(Self { n_plus, n_minus })
    }

    pub fn shots(&self) -> u64 {
        self.n_plus + self.n_minus
    }

    /// `(n₊ − n₋)/N`.
    pub fn expectation(&self) -> f64 {
        (self.n_plus as f64 - self.n_minus as f64) / self.shots() as f64
    }
}

/// Draws `n₊ ~ Binomial(N, (1 + ⟨P⟩)/2)`.
pub fn sample_from_expectation<R: Rng + ?Sized>(
    expectation: f64,
    shots: u64,
    rng: &mut R,
) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::InvalidRecord("zero shots".into()));
    }
    let p = (0.5 * (1.0 + expectation)).clamp(0.0, 1.0);
    let dist = Binomial::new(shots, p).map_err(|e| Error::Numeric(e.to_string()))?;
    let n_plus = dist.sample(rng);
    Ok(ShotCounts {
        n_plus,
        n_minus: shots - n_plus,
    })
}

/// Samples a single-qubit Pauli measurement.
pub fn sample_counts<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    basis: Basis,
    shots: u64,
    rng: &mut R,
) -> Result<ShotCounts> {
    if rho.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: rho.dim(),
        });
    }
    let e = pauli_expectation(rho, &PauliString(vec![basis.pauli()]))?;
    sample_from_expectation(e, shots, rng)
}

/// Samples the ±1 eigenvalue of an arbitrary Pauli string.
pub fn sample_pauli<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    p: &PauliString,
    shots: u64,
    rng: &mut R,
) -> Result<ShotCounts> {
    let e = pauli_expectation(rho, p)?;
    sample_from_expectation(e, shots, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    #[test]
    fn deterministic_outcome() {
        let zero = DensityMatrix::zero_state(1);
        let mut rng = SeedStream::new(1).rng();
        for n in [1, 17, 4096] {
            let c = sample_counts(&zero, Basis::Z, n, &mut rng).unwrap();
            assert_eq!((c.n_plus, c.n_minus), (n, 0));
        }
    }

    #[test]
    fn mixed_state_is_balanced() {
        let mixed = DensityMatrix::maximally_mixed(1);
        let mut rng = SeedStream::new(7).rng();
        let c = sample_counts(&mixed, Basis::Z, 4096, &mut rng).unwrap();
        assert!((c.n_plus as f64 / 4096.0 - 0.5).abs() < 5.0 / 64.0);
    }

    #[test]
    fn replay_is_identical() {
        let mixed = DensityMatrix::maximally_mixed(1);
        let s = SeedStream::new(99);
        let a = sample_counts(&mixed, Basis::X, 1000, &mut s.rng()).unwrap();
        let b = sample_counts(&mixed, Basis::X, 1000, &mut s.rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn counts_arithmetic() {
        assert_eq!(ShotCounts::new(3000, 1000).unwrap().expectation(), 0.5);
        assert!(ShotCounts::new(0, 0).is_err());
        let two = DensityMatrix::zero_state(2);
        assert!(sample_counts(&two, Basis::Z, 10, &mut SeedStream::new(0).rng()).is_err());
    }
}
