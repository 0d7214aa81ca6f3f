//! Finite-difference eigenvalue estimation for self-adjoint elliptic operators on a box,
//! a matrix-level simulation of a threshold-projector quantum eigenvalue estimator with
//! oracle query accounting, and spectra of the stochastic-inflation first-passage operator.

pub mod cli;
pub mod eigen;
pub mod error;
pub mod inflation;
pub mod io;
pub mod ledger;
pub mod qsvt;
pub mod sparse;
pub mod sturm_liouville;

pub use error::{Error, Result};
pub use ledger::{LedgerCounts, LevelRecord, QueryLedger};
pub use sparse::{CsrMatrix, SymmetricMatrix};
