//! Local-equilibrium thermodynamics of spin-1/2 fermions with a spin
//! chemical potential.
//!
//! A [`FluidState`] fixes temperature, chemical potential, four-velocity and
//! the antisymmetric spin potential `omega`. From it follow per-mode
//! Fermi-Dirac occupations ([`statistics`]), closed-form spin density
//! matrices and polarization ([`polarization`]), momentum integrals of the
//! currents ([`currents`], [`quadrature`]) and numerical checks of their
//! thermodynamic relations ([`thermo`]). The [`spinor`] module rebuilds the
//! same objects from explicit Dirac matrices.
//!
//! Natural units throughout; dimensionful quantities are in GeV.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod currents;
pub mod dilog;
pub mod error;
pub mod polarization;
pub mod quadrature;
pub mod sampling;
pub mod spinor;
pub mod statistics;
pub mod tensor;
pub mod thermo;

pub use currents::{evaluate_currents, evaluate_currents_with, CurrentOptions, CurrentsBundle, CurrentsResult};
pub use error::{Error, Result};
pub use polarization::{averaged_polarization, vortex_state, PolarizationVector, VortexParameters};
pub use quadrature::{integrate_dp, selection_criterion, QuadratureSpec};
pub use statistics::{FluidState, Multipliers, Statistics};
pub use tensor::{eb_compose, Antisym2Tensor, FourVector, LorentzTransform, OnShellMomentum};
pub use thermo::{IdentityReport, PerturbationSpec};
