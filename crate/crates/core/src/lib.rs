//! Analytical design of nth-order lag-lead compensators.
//!
//! Given `n` frequency-domain requirements `(w_k, g_k, p_k)`, the coefficients
//! of
//!
//! ```text
//!          s^n + b1 s^(n-1) + ... + bn
//! Gc(s) = -----------------------------
//!          s^n + a1 s^(n-1) + ... + an
//! ```
//!
//! solve a `2n x 2n` real linear system. This crate builds that system,
//! classifies its feasibility, solves it, checks the resulting denominator
//! with the Routh-Hurwitz criterion, and factors the compensator into
//! first-order lead/lag sections.

pub mod cascade;
pub mod cli;
pub mod design;
pub mod error;
pub mod model;
pub mod roots;
pub mod solver;
pub mod stability;
pub mod system;
pub mod verify;

pub use error::{Error, PolyRole, Result};
pub use model::{Compensator, ComplexValue, MonicPolynomial, RequirementPair};
