//! Pauli operators, Pauli-sum Hamiltonians and exact ground energies.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMat};
use crate::quantum::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

pub fn pauli_matrix(p: Pauli) -> CMat {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match p {
        Pauli::I => CMat::identity(2),
        Pauli::X => CMat::from_slice(2, &[o, one, one, o]),
        Pauli::Y => CMat::from_slice(2, &[o, -i, i, o]),
        Pauli::Z => CMat::from_slice(2, &[one, o, o, -one]),
    }
}

/// Tensor product of single-qubit Paulis; the first factor acts on qubit 0,
/// the most significant bit of the computational basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    pub fn matrix(&self) -> CMat {
        let mut it = self.0.iter();
        let first = it
            .next()
            .map_or_else(|| CMat::identity(1), |&p| pauli_matrix(p));
        it.fold(first, |acc, &p| acc.kron(&pauli_matrix(p)))
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| Error::Config(format!("bad Pauli letter {c:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub string: PauliString,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliHamiltonian {
    terms: Vec<PauliTerm>,
    n_qubits: usize,
}

impl PauliHamiltonian {
    pub fn new(terms: Vec<(&str, f64)>) -> Result<Self> {
        let terms = terms
            .into_iter()
            .map(|(s, c)| {
                Ok(PauliTerm {
                    string: s.parse()?,
                    coeff: c,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(terms)
    }

    pub fn from_terms(terms: Vec<PauliTerm>) -> Result<Self> {
        let n = terms.first().map_or(0, |t| t.string.len());
        if n == 0 {
            return Err(Error::Config("empty Hamiltonian".into()));
        }
        for t in &terms {
            if t.string.len() != n {
                return Err(Error::Config(format!(
                    "Pauli string {} has length {}, expected {n}",
                    t.string,
                    t.string.len()
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::NonFinite(format!("coefficient of {}", t.string)));
            }
        }
        Ok(Self { terms, n_qubits: n })
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> CMat {
        let d = 1 << self.n_qubits;
        self.terms.iter().fold(CMat::zeros(d), |acc, t| {
            acc.add(&t.string.matrix().scale(Complex64::new(t.coeff, 0.0)))
        })
    }
}

/// `tr(P ρ)` for a single Pauli string.
pub fn pauli_expectation(rho: &DensityMatrix, p: &PauliString) -> Result<f64> {
    let d = 1 << p.len();
    if d != rho.dim() {
        return Err(Error::Dimension {
            expected: d,
            found: rho.dim(),
        });
    }
    Ok(p.matrix().matmul(rho.matrix()).trace().re)
}

/// `Σ coeff · tr(P ρ)`; the imaginary part of each trace is discarded.
pub fn expectation(rho: &DensityMatrix, h: &PauliHamiltonian) -> Result<f64> {
    h.terms()
        .iter()
        .map(|t| pauli_expectation(rho, &t.string).map(|e| t.coeff * e))
        .sum()
}

/// Smallest eigenvalue of the dense Hamiltonian (cyclic Jacobi).
pub fn exact_ground_energy(h: &PauliHamiltonian) -> Result<f64> {
    if h.n_qubits() > 2 {
        return Err(Error::Domain(format!(
            "exact ground energy supports at most 2 qubits, got {}",
            h.n_qubits()
        )));
    }
    Ok(hermitian_eigenvalues(&h.matrix())[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::state::{bloch_to_density, BlochVector};

    #[test]
    fn expectation_examples() {
        let z = PauliHamiltonian::new(vec![("Z", 1.0)]).unwrap();
        let x = PauliHamiltonian::new(vec![("X", 1.0)]).unwrap();
        let zero = DensityMatrix::zero_state(1);
        let mixed = bloch_to_density(&BlochVector::ORIGIN).unwrap();
        assert_eq!(expectation(&zero, &z).unwrap(), 1.0);
        assert_eq!(expectation(&mixed, &x).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let zz = PauliHamiltonian::new(vec![("ZZ", 1.0)]).unwrap();
        let err = expectation(&DensityMatrix::zero_state(1), &zz).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn ground_energy_examples() {
        let zi = PauliHamiltonian::new(vec![("ZI", 1.0)]).unwrap();
        assert!((exact_ground_energy(&zi).unwrap() + 1.0).abs() < 1e-12);
        let x = PauliHamiltonian::new(vec![("X", 1.0)]).unwrap();
        assert!((exact_ground_energy(&x).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_ragged_strings() {
        assert!(PauliHamiltonian::new(vec![("ZI", 1.0), ("Z", 1.0)]).is_err());
        assert!(PauliHamiltonian::new(vec![("ZQ", 1.0)]).is_err());
    }
}
