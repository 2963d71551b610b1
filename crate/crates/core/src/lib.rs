//! Training-pattern design and least-squares channel estimation for MISO
//! links assisted by a passive intelligent reflecting surface (IRS).
//!
//! The received training block is `s = X(Φ ⊗ I_M)θ + n` where
//! `θ = [h_d; v₁; …; v_K]` stacks the direct channel and the cascaded
//! channel columns. The crate builds designs `Φ`, synthesizes observations,
//! estimates `θ`, computes the exact estimator covariance, and runs seeded
//! Monte Carlo sweeps comparing the on/off and DFT training schemes.

pub mod channel;
pub mod design;
pub mod error;
pub mod estimate;
pub mod exec;
pub mod linalg;
pub mod report;
pub mod simulate;
pub mod tensor_ops;

pub use channel::{ChannelModelKind, ChannelState, NoiseMode, ObservationBatch, SystemDims};
pub use design::{PhaseConstraint, Scheme, TrainingDesign};
pub use error::{Error, Result};
pub use estimate::{CrlbReport, Estimate, Estimator};
pub use exec::Execution;
pub use num_complex::Complex64;
pub use tensor_ops::{ComplexMatrix, PermutationMatrix};
