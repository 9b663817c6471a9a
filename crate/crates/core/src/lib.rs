//! Verification toolkit for quantum error-correcting codes under correlated
//! Pauli noise: Knill-Laflamme correctability and degeneracy, Choi-rank
//! packing bounds, explicit and generic recovery, and dense simulation.
//!
//! Dense routines are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the certification tolerances are tuned for.

pub mod bounds;
pub mod channels;
pub mod codes;
pub mod error;
pub mod kl;
pub mod limits;
pub mod linalg;
pub mod pauli;
pub mod recovery;
pub mod scalar;

pub use bounds::{BoundKind, BoundReport, BoundVerdict, RankFamily, Verdict, ViolationReport};
pub use channels::{AnyChannel, Assignment, Channel, ChannelSpec, FamilyName, FamilySpec, PauliChannel, PauliTerm};
pub use codes::{CodeSpec, CodeSpace};
pub use error::{Error, Result};
pub use kl::{KlReport, KlSummary};
pub use linalg::DenseMatrix;
pub use pauli::{Letter, PauliString};
pub use recovery::{MonteCarloReport, RecoveryChannel, RoundtripReport, SyndromeTable};
pub use scalar::Real;

pub type Matrix = DenseMatrix<f64>;
pub type Code = CodeSpace<f64>;
pub type Kraus = channels::KrausSet<f64>;
pub type Recovery = RecoveryChannel<f64>;
pub type Table = SyndromeTable<f64>;

pub type Matrix32 = DenseMatrix<f32>;
pub type Code32 = CodeSpace<f32>;
pub type Kraus32 = channels::KrausSet<f32>;
