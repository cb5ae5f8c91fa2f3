//! Exact arithmetic for the quantum annulus algebra, its derivations and
//! invariant states, plus finite-section probes of the Fourier components of
//! covariant implementations.

pub mod algebra;
pub mod coeffseq;
pub mod component_ops;
pub mod derivations;
pub mod error;
pub mod fixtures;
pub mod sample;
pub mod scalar;
pub mod spectral_lab;
pub mod states_gns;

pub use algebra::{AlgebraElement, PhasedElement, RootOfUnity, UnitPhase, WindowMatrix};
pub use coeffseq::{EcOp, EcSeq, ElSeq};
pub use component_ops::{ComponentOp, MuOption, MuSeq, PerturbationKind, SeqModel};
pub use derivations::{CovariantDerivation, InvariantDerivation};
pub use error::{QalError, Result};
pub use scalar::{Mode, Rational, Scalar};
pub use spectral_lab::{NogoSpec, ParametrixVerdict, TruncatedBidiagonal, VerdictKind};
pub use states_gns::{DerivationKind, GnsModel, ImplementationSpec, Side, StateSpec, WeightSpec};
