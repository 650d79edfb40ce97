//! Noise and disturbance of finite-dimensional quantum measurement apparatuses.
//!
//! A measurement apparatus is modelled as a quantum instrument: an
//! outcome-labelled family of completely positive maps whose sum is
//! trace-preserving. For a pair of system observables this crate computes
//!
//! * the information-theoretic noise `N(M, X) = H(X|M)` of the apparatus as
//!   an `X`-measurement, fed with uniformly random `X`-eigenstates;
//! * a certified two-sided bracket on the information-theoretic disturbance
//!   `D(M, Z)`: an exact quantum lower bound `H(Z|S'M)` obtained from the
//!   Stinespring dilation of the instrument, and a heuristic upper bound
//!   from explicit correction strategies (pretty-good measurement, transpose
//!   channel recovery, and randomised local search over guessing POVMs);
//! * the entropic tradeoff checks `N + D >= -log2 c` that every apparatus
//!   must satisfy, together with their joint-measurement, quantum-memory,
//!   Fano-type and mean-square-deviation companions.
//!
//! All entropies are in bits. Matrices are dense complex double-precision;
//! the intended regime is desk-scale Hilbert dimensions (d <= 8, total
//! dilation dimension <= 64).
//!
//! ```
//! use qnd_core::{disturbance, noise, zoo};
//!
//! // Weakly measure Pauli X on a qubit and bracket the disturbance to Z.
//! let (x, z) = zoo::pauli_xz_pair();
//! let apparatus = zoo::weak_measurement(&x, 0.5)?;
//! let n = noise::noise(&apparatus, &x)?;
//! let bracket = disturbance::optimize_disturbance(&apparatus, &z, 8, 0)?;
//! let c = noise::overlap_constant(&x, &z)?;
//! assert!(bracket.lower() <= bracket.upper());
//! assert!(n + bracket.lower() + c.log2() >= -1e-9);
//! # Ok::<(), qnd_core::QndError>(())
//! ```

pub mod channel;
pub mod checks;
pub mod disturbance;
pub mod entropy;
pub mod error;
pub mod matrix;
pub mod msd;
pub mod noise;
pub mod observable;
pub mod report;
pub mod schema;
pub mod state;
pub mod tol;
pub mod verify;
pub mod zoo;

pub use channel::{CpMap, Isometry, QuantumInstrument};
pub use disturbance::{DisturbanceBracket, GuessPovm};
pub use entropy::{Axis, JointTable};
pub use error::{QndError, Result};
pub use matrix::{CMatrix, CVector};
pub use observable::Observable;
pub use report::{AnalysisReport, CheckRecord, CheckStatus};
pub use state::{DensityOperator, Ket};
