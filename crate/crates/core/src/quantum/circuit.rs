//! Gate-level circuits and noisy density-matrix simulation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::quantum::channel::{apply_channel, NoiseChannel};
use crate::quantum::pauli::{pauli_matrix, Pauli};
use crate::quantum::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    Ry {
        qubit: usize,
        angle: f64,
    },
    Rz {
        qubit: usize,
        angle: f64,
    },
    X {
        qubit: usize,
    },
    H {
        qubit: usize,
    },
    Sdg {
        qubit: usize,
    },
    Cz {
        control: usize,
        target: usize,
    },
    /// `count` identity gates on `qubit`, each followed by that gate's noise.
    Idle {
        qubit: usize,
        count: usize,
    },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. }
            | Gate::X { qubit }
            | Gate::H { qubit }
            | Gate::Sdg { qubit }
            | Gate::Idle { qubit, .. } => vec![qubit],
            Gate::Cz { control, target } => vec![control, target],
        }
    }

    /// Rotation generator `G` with `U(θ) = exp(−iθG)`, if parameterized.
    pub fn generator(&self) -> Option<(usize, Pauli)> {
        match *self {
            Gate::Ry { qubit, .. } => Some((qubit, Pauli::Y)),
            Gate::Rz { qubit, .. } => Some((qubit, Pauli::Z)),
            _ => None,
        }
    }

    fn single_qubit_unitary(&self) -> Option<CMat> {
        let r = |x: f64| Complex64::new(x, 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match *self {
            Gate::Ry { angle, .. } => {
                let (sn, cs) = (angle / 2.0).sin_cos();
                Some(CMat::from_real(2, &[cs, -sn, sn, cs]))
            }
            Gate::Rz { angle, .. } => {
                let ph = Complex64::from_polar(1.0, -angle / 2.0);
                Some(CMat::from_slice(2, &[ph, r(0.0), r(0.0), ph.conj()]))
            }
            Gate::X { .. } => Some(pauli_matrix(Pauli::X)),
            Gate::H { .. } => Some(CMat::from_real(2, &[s, s, s, -s])),
            Gate::Sdg { .. } => Some(CMat::from_slice(
                2,
                &[r(1.0), r(0.0), r(0.0), Complex64::new(0.0, -1.0)],
            )),
            Gate::Idle { .. } => Some(CMat::identity(2)),
            Gate::Cz { .. } => None,
        }
    }

    /// Unitary on the full `n_qubits` register.
    pub fn unitary(&self, n_qubits: usize) -> CMat {
        match *self {
            Gate::Cz { .. } => {
                let mut u = CMat::identity(4);
                u[(3, 3)] = Complex64::new(-1.0, 0.0);
                u
            }
            _ => {
                let u = self.single_qubit_unitary().expect("single-qubit gate");
                embed(&u, self.qubits()[0], n_qubits)
            }
        }
    }
}

/// Embeds a single-qubit operator on `qubit` of an `n_qubits` register.
pub fn embed(op: &CMat, qubit: usize, n_qubits: usize) -> CMat {
    match (n_qubits, qubit) {
        (1, _) => op.clone(),
        (_, 0) => op.kron(&CMat::identity(2)),
        _ => CMat::identity(2).kron(op),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let c = Self { n_qubits, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.gates.push(g);
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.n_qubits) {
            return Err(Error::Structural(format!(
                "{} qubits unsupported (1 or 2)",
                self.n_qubits
            )));
        }
        for (i, g) in self.gates.iter().enumerate() {
            let qs = g.qubits();
            if qs.iter().any(|&q| q >= self.n_qubits) {
                return Err(Error::Structural(format!(
                    "gate {i} ({g:?}) addresses a missing qubit"
                )));
            }
            if let Gate::Cz { control, target } = *g {
                if control == target {
                    return Err(Error::Structural(format!("gate {i}: CZ on a single qubit")));
                }
            }
            if let Gate::Ry { angle, .. } | Gate::Rz { angle, .. } = *g {
                if !angle.is_finite() {
                    return Err(Error::Structural(format!("gate {i}: non-finite angle")));
                }
            }
        }
        Ok(())
    }
}

/// Which channel follows which gate.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    /// The same channel after every gate (and every idle step).
    Uniform(NoiseChannel),
    /// Only idle steps are noisy.
    IdleOnly(NoiseChannel),
    /// One optional channel per gate, aligned with `Circuit::gates`.
    PerGate(Vec<Option<NoiseChannel>>),
}

impl NoiseModel {
    fn channel_for(&self, index: usize, gate: &Gate) -> Option<&NoiseChannel> {
        match self {
            NoiseModel::Uniform(ch) => Some(ch),
            NoiseModel::IdleOnly(ch) => matches!(gate, Gate::Idle { .. }).then_some(ch),
            NoiseModel::PerGate(v) => v.get(index).and_then(Option::as_ref),
        }
    }
}

fn apply_noise(
    rho: DensityMatrix,
    ch: Option<&NoiseChannel>,
    qubits: &[usize],
) -> Result<DensityMatrix> {
    match ch {
        None => Ok(rho),
        Some(ch) => qubits
            .iter()
            .try_fold(rho, |r, &q| apply_channel(ch, &r, q)),
    }
}

/// Runs `circ` on `initial`, applying each gate by unitary conjugation and
/// then the gate's assigned channel to every qubit it touches.
pub fn simulate(
    circ: &Circuit,
    noise: Option<&NoiseModel>,
    initial: &DensityMatrix,
) -> Result<DensityMatrix> {
    circ.validate()?;
    if initial.n_qubits() != circ.n_qubits() {
        return Err(Error::Dimension {
            expected: 1 << circ.n_qubits(),
            found: initial.dim(),
        });
    }
    if let Some(NoiseModel::PerGate(v)) = noise {
        if v.len() != circ.gates().len() {
            return Err(Error::Structural(format!(
                "{} noise slots for {} gates",
                v.len(),
                circ.gates().len()
            )));
        }
    }
    let n = circ.n_qubits();
    let mut rho = initial.clone();
    for (i, g) in circ.gates().iter().enumerate() {
        let ch = noise.and_then(|m| m.channel_for(i, g));
        let qubits = g.qubits();
        match *g {
            Gate::Idle { count, .. } => {
                for _ in 0..count {
                    rho = apply_noise(rho, ch, &qubits)?;
                }
            }
            _ => {
                let u = g.unitary(n);
                rho = DensityMatrix::from_cmat_unchecked(rho.matrix().conjugate_by(&u));
                rho = apply_noise(rho, ch, &qubits)?;
            }
        }
    }
    Ok(rho)
}

/// Noiseless pure-state evolution of `|0…0⟩`.
pub fn statevector(circ: &Circuit) -> Result<Vec<Complex64>> {
    circ.validate()?;
    let d = 1 << circ.n_qubits();
    let mut psi = vec![Complex64::new(0.0, 0.0); d];
    psi[0] = Complex64::new(1.0, 0.0);
    for g in circ.gates() {
        if matches!(g, Gate::Idle { .. }) {
            continue;
        }
        psi = apply_to_vector(&g.unitary(circ.n_qubits()), &psi);
    }
    Ok(psi)
}

pub fn apply_to_vector(u: &CMat, psi: &[Complex64]) -> Vec<Complex64> {
    let d = psi.len();
    (0..d)
        .map(|i| (0..d).map(|j| u[(i, j)] * psi[j]).sum())
        .collect()
}
