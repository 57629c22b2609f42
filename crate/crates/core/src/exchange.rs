//! Closed-form Heitler-London exchange energy of two coupled dots.
//!
//! With `s = 2 d^2 (2b - 1/b)` and `z = d^2 (b - 1/b)`,
//!
//! ```text
//! J / hbar w0 = 1/sinh(s) * [ c sqrt(b) (e^{-b d^2} I0(b d^2) - e^{z} I0(z))
//!                             + 3/(4b) (1 + b d^2)
//!                             + 3/2 (eEa / hbar w0)^2 / d^2 ]
//! ```
//!
//! The overlap of the two orbitals is `S = exp(-d^2 (2b - 1/b))`, so the
//! prefactor equals `2 S^2 / (1 - S^4)`.

use serde::{Deserialize, Serialize};

use crate::bessel::bessel_i0e;
use crate::error::{Error, Result};
use crate::units::{derive_parameters, Dimensionless, FieldConfig, MaterialParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeBreakdown {
    /// `1 / sinh(2 d^2 (2b - 1/b))`.
    pub prefactor: f64,
    pub coulomb_term: f64,
    pub quartic_term: f64,
    pub efield_term: f64,
    pub j_dimensionless: f64,
    pub j_mev: f64,
}

impl ExchangeBreakdown {
    pub fn bracket(&self) -> f64 {
        self.coulomb_term + self.quartic_term + self.efield_term
    }
}

/// Overlap `<phi_2|phi_1>` of the two translated ground states.
pub fn overlap(b: f64, d: f64) -> f64 {
    (-d * d * (2.0 * b - 1.0 / b)).exp()
}

/// Evaluates the closed form; `hbar_omega0_mev` only sets `j_mev`.
pub fn exchange_energy(p: &Dimensionless, hbar_omega0_mev: f64) -> Result<ExchangeBreakdown> {
    let Dimensionless { b, d, c, efield_ratio } = *p;
    if !(b >= 1.0) || !b.is_finite() {
        return Err(Error::invalid("b", format!("must be >= 1, got {b}")));
    }
    if !d.is_finite() || d < 0.0 {
        return Err(Error::invalid("d", format!("must be >= 0, got {d}")));
    }
    if d == 0.0 {
        return Err(Error::SingularConfiguration { d });
    }
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::invalid("c", format!("must be finite and >= 0, got {c}")));
    }
    if !efield_ratio.is_finite() {
        return Err(Error::invalid("efield_ratio", "must be finite"));
    }

    let d2 = d * d;
    let s = 2.0 * d2 * (2.0 * b - 1.0 / b);
    let z = d2 * (b - 1.0 / b);
    let amp = c * b.sqrt();

    // e^{-x} I0(x) terms stay O(1); the growing exponential of the second
    // Bessel term is folded into the prefactor below.
    let direct = amp * bessel_i0e(b * d2)?;
    let exchange_scaled = amp * bessel_i0e(z)?;
    let quartic_term = 0.75 / b * (1.0 + b * d2);
    let efield_term = 1.5 * efield_ratio * efield_ratio / d2;

    // 1/sinh(s) = 2 e^{-s} / (1 - e^{-2s})
    let denom = -(-2.0 * s).exp_m1();
    let inv_sinh = 2.0 * (-s).exp() / denom;
    // e^{2z - s} = e^{-2 b d^2}
    let exchange_part = exchange_scaled * 2.0 * (-2.0 * b * d2).exp() / denom;
    let j_dimensionless = inv_sinh * (direct + quartic_term + efield_term) - exchange_part;

    let prefactor = 1.0 / s.sinh();
    let coulomb_term = direct - exchange_scaled * (2.0 * z).exp();

    Ok(ExchangeBreakdown {
        prefactor,
        coulomb_term,
        quartic_term,
        efield_term,
        j_dimensionless,
        j_mev: j_dimensionless * hbar_omega0_mev,
    })
}

pub fn exchange_energy_lab(mat: &MaterialParams, fields: &FieldConfig) -> Result<ExchangeBreakdown> {
    let p = derive_parameters(mat, fields)?;
    exchange_energy(&p.dimensionless(), p.hbar_omega0_mev)
}
