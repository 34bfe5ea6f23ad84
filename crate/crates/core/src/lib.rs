//! Simulation and estimation toolkit for Fock-state quantum metrology in a
//! dispersively coupled qubit-cavity system.
//!
//! * [`fockspace`]: truncated Fock-basis states and operators, displacement,
//!   parity and Wigner values.
//! * [`composite`]: qubit-cavity circuits, photon-number filters, Fock-state
//!   preparation, Ramsey traces, spectroscopy and the adaptive
//!   photon-number-resolving cascade.
//! * [`noise`]: Lindblad integration, first-order perturbation and the
//!   closed-form error models.
//! * [`metrology`]: sensing curves, classical and quantum Fisher information.
//! * [`estimation`]: curve fitting, population reconstruction, bootstrap.

// NaN must fail these checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod composite;
pub mod error;
pub mod estimation;
pub mod fockspace;
pub mod metrology;
pub mod noise;
pub mod special;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
