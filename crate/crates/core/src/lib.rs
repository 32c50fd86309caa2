//! Simulation and verification of teleported quantum causal structures.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensors`]: dense operators over named spaces, partial traces and
//!   transposes, and the depolarising projector calculus.
//! * [`channels`]: Choi operators, instruments and seeded random generators.
//! * [`linkprod`]: the link product and a greedy factor-network contractor.
//! * [`processes`]: process matrices, the probability rule and validity checks.
//! * [`teleport`]: generalised Bell basis, Bell measurements and corrections.
//! * [`protocols`]: extended processes and end-to-end teleportation runs.

pub mod channels;
pub mod error;
pub mod linkprod;
pub mod processes;
pub mod protocols;
pub mod teleport;
pub mod tensors;

pub use error::{Error, Result};
pub use tensors::{LabeledOperator, SpaceLabel, C64};
