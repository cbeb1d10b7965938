//! Exact density-matrix simulation of one- and two-qubit circuits.

pub mod channel;
pub mod circuit;
pub mod pauli;
pub mod sampling;
pub mod state;

pub use channel::{
    apply_channel, channel_to_bloch_map, make_channel, AffineBlochMap, ChannelKind, NoiseChannel,
};
pub use circuit::{simulate, statevector, Circuit, Gate, NoiseModel};
pub use pauli::{
    exact_ground_energy, expectation, pauli_expectation, Pauli, PauliHamiltonian, PauliString,
};
pub use sampling::{sample_counts, sample_from_expectation, sample_pauli, Basis, ShotCounts};
pub use state::{bloch_to_density, density_to_bloch, BlochVector, DensityMatrix};
