//! Quasi-probabilistic cutting of a single qubit wire using non-maximally
//! entangled (NME) resource pairs.
//!
//! A wire (the identity channel) is replaced by three sub-experiments:
//! teleportation through the NME pair `K(|00⟩ + k|11⟩)` with weight 1, and
//! two measure-and-prepare compensation circuits with weights `+c` and `-c`,
//! where `c = 1 - R` and `R = 2k/(1+k²)` is the robustness of entanglement of
//! the pair. The sampling overhead interpolates between `κ = 3` (no
//! entanglement, the optimal classical wire cut) and `κ = 1` (plain
//! teleportation).
//!
//! Modules:
//!
//! - [`qmath`]: dense complex matrices, pure states and density operators on
//!   one or two qubits.
//! - [`entangle`]: NME pairs, Schmidt decomposition, robustness, Haar sampling.
//! - [`channels`]: cut terms, their circuits, exact channels and shot sampling.
//! - [`estimator`]: shot allocation and quasi-probability recombination.
//! - [`experiment`]: seeded robustness × shot-budget sweeps and record I/O.
//! - [`cli`]: the `nmecut` command line.
//!
//! Qubit ordering is big-endian throughout: the first tensor factor is
//! qubit 0 and the most significant bit of a basis index.

pub mod channels;
pub mod cli;
pub mod entangle;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod qmath;

pub use error::{Error, Result};
