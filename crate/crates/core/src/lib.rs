//! Universal `N → M` quantum cloning machines for qudits.
//!
//! The crate builds the symmetric-projector machine, the explicit
//! occupation-basis transformation and the entangled-pair construction,
//! shows that they produce the same output, and computes arbitrary-copy
//! fidelities both numerically and in exact rational closed form.
//!
//! Fast paths work in the occupation-number basis of the symmetric subspace
//! ([`symmetric_subspace`]). The dense tensor-product oracle in [`hilbert`]
//! is used to cross-check them and is capped at
//! [`hilbert::ORACLE_CAP`] amplitudes.

pub mod combinatorics;
pub mod error;
pub mod fidelity;
pub mod hilbert;
pub mod machines;
pub mod parallel;
pub mod symmetric_subspace;
pub mod verify;

pub use combinatorics::{ExactRational, OccupationVector};
pub use error::{Error, Result};
pub use hilbert::{FullDensity, FullState, PureState, C64};
pub use machines::{CloneSpec, MachineKind, MachineOutput};
pub use fidelity::FidelityReport;
pub use parallel::Execution;
pub use symmetric_subspace::{SymBasis, SymDensity, SymVector};
