//! Steady-state propagation and optimal spatial control of probe-to-signal
//! conversion in a resonant double-Λ atomic medium.
//!
//! The probe/signal pair sees only the mixing angle θ(ζ) of the two control
//! fields. [`protocols`] builds θ profiles (optimal bang-singular-bang,
//! constant-rate, logistic adiabatic, or tabulated), [`propagation`]
//! integrates the fields through the medium, and [`efficiency`] gives the
//! closed-form and numerical conversion efficiencies. [`bloch_steady`] and
//! [`pmp_search`] provide independent checks of the reduced model and of
//! optimality.

pub mod bloch_steady;
pub mod checks;
pub mod efficiency;
pub mod error;
pub mod ode;
pub mod pmp_search;
pub mod propagation;
pub mod protocols;
pub mod simplex;
pub mod table;

pub use error::{Error, Result};
