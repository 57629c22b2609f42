//! Exchange energy of two laterally coupled single-electron quantum dots in
//! the Heitler-London approximation.
//!
//! [`exchange`] holds the closed form, [`oracle`] an independent quadrature
//! evaluation of the same matrix elements, and [`sweep`] the parameter scans
//! and sign-switch searches built on top of the closed form.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod error;
pub mod exchange;
pub mod figures;
pub mod oracle;
pub mod quadrature;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
pub use exchange::{exchange_energy, exchange_energy_lab, overlap, ExchangeBreakdown};
pub use units::{derive_parameters, to_dimensionless, DerivedParams, Dimensionless, FieldConfig, MaterialParams};
