//! Simulation and analysis toolkit for delay-dependent electron emission
//! asymmetry in XUV–IR dissociative photoionization of H2.
//!
//! The forward model ([`potentials`], [`wkb`], [`pathways`]) predicts the
//! hemisphere asymmetry of electron–proton coincidences from interfering
//! ground-state and bond-softening dissociation paths. [`eventgen`] samples
//! synthetic coincidence events from it, and [`analysis`] plus [`fitting`]
//! run the inverse pipeline that recovers the injected parameters.

// `!(x > 0.0)` also rejects NaN, which is the point of those checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analysis;
pub mod config;
pub mod eventgen;
pub mod fitting;
pub mod format;
pub mod interp;
pub mod model;
pub mod pathways;
pub mod potentials;
pub mod quadrature;
pub mod units;
pub mod wkb;
