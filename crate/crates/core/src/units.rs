//! Physical constants, material and field parameters, and the map from
//! laboratory units (T, V/m, nm, meV) to the dimensionless model inputs.
//!
//! Lengths are measured internally in units of the effective Bohr radius
//! `a_B = sqrt(hbar / (m omega_0))` and energies in units of `hbar omega_0`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elementary charge (C), exact.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Reduced Planck constant (J s), exact.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Electron rest mass (kg), CODATA 2018.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Vacuum permittivity (F/m), CODATA 2018.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

const MEV: f64 = 1e-3 * ELEMENTARY_CHARGE;
const NM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Effective mass in units of the bare electron mass.
    pub effective_mass: f64,
    /// Relative permittivity.
    pub dielectric_const: f64,
    /// Confinement energy `hbar omega_0` in meV.
    pub confinement_energy_mev: f64,
    /// Dimensionless Coulomb strength used verbatim instead of the derived one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_override: Option<f64>,
}

impl MaterialParams {
    pub const GAAS: MaterialParams = MaterialParams {
        effective_mass: 0.067,
        dielectric_const: 13.1,
        confinement_energy_mev: 3.0,
        c_override: None,
    };

    pub fn gaas() -> Self {
        Self::GAAS
    }

    pub fn with_c_override(mut self, c: f64) -> Self {
        self.c_override = Some(c);
        self
    }

    pub fn validate(&self) -> Result<()> {
        positive("effective_mass", self.effective_mass)?;
        positive("dielectric_const", self.dielectric_const)?;
        positive("confinement_energy_mev", self.confinement_energy_mev)?;
        if let Some(c) = self.c_override {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::invalid(
                    "c_override",
                    format!("must be finite and >= 0, got {c}"),
                ));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let m: MaterialParams = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Built-in preset by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gaas" => Some(Self::GAAS),
            _ => None,
        }
    }

    /// Resolves `spec` as a built-in preset, then as `<preset_dir>/<spec>.json`,
    /// then as a path to a JSON file.
    pub fn resolve(spec: &str, preset_dir: Option<&Path>) -> Result<Self> {
        if let Some(m) = Self::builtin(spec) {
            return Ok(m);
        }
        if let Some(dir) = preset_dir {
            let candidate = dir.join(format!("{spec}.json"));
            if candidate.is_file() {
                return Self::from_json_file(&candidate);
            }
        }
        let path = Path::new(spec);
        if path.is_file() {
            return Self::from_json_file(path);
        }
        Err(Error::UnknownPreset(spec.to_string()))
    }

    pub fn mass_kg(&self) -> f64 {
        self.effective_mass * ELECTRON_MASS
    }

    /// Confinement frequency `omega_0` in rad/s.
    pub fn omega0(&self) -> f64 {
        self.confinement_energy_mev * MEV / HBAR
    }

    /// Effective Bohr radius `sqrt(hbar / (m omega_0))` in nm.
    pub fn bohr_radius_nm(&self) -> f64 {
        (HBAR / (self.mass_kg() * self.omega0())).sqrt() / NM
    }

    /// Coulomb strength `sqrt(pi/2) e^2 / (4 pi eps0 kappa a_B) / (hbar omega_0)`.
    pub fn derived_coulomb_strength(&self) -> f64 {
        let a_b = self.bohr_radius_nm() * NM;
        let coulomb = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE
            / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY * self.dielectric_const * a_b);
        (std::f64::consts::PI / 2.0).sqrt() * coulomb / (self.confinement_energy_mev * MEV)
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self::GAAS
    }
}

/// Applied fields and geometry in laboratory units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    /// Magnetic flux density along z, Tesla.
    pub b_tesla: f64,
    /// Electric field along x, V/m.
    pub e_field: f64,
    /// Half the inter-dot distance, nm.
    pub a_nm: f64,
}

impl FieldConfig {
    pub fn new(b_tesla: f64, e_field: f64, a_nm: f64) -> Self {
        Self { b_tesla, e_field, a_nm }
    }

    /// Geometry given as a multiple of the material's Bohr radius.
    pub fn with_a_over_ab(mat: &MaterialParams, b_tesla: f64, e_field: f64, d: f64) -> Self {
        Self::new(b_tesla, e_field, d * mat.bohr_radius_nm())
    }

    /// Inverse of [`to_dimensionless`]: fields that reproduce `(b, d, efield_ratio)`.
    pub fn from_dimensionless(mat: &MaterialParams, b: f64, d: f64, efield_ratio: f64) -> Result<Self> {
        mat.validate()?;
        if !(b >= 1.0) || !b.is_finite() {
            return Err(Error::invalid("b", format!("must be >= 1, got {b}")));
        }
        positive("d", d)?;
        let larmor = mat.omega0() * (b * b - 1.0).sqrt();
        let b_tesla = 2.0 * mat.mass_kg() * larmor / ELEMENTARY_CHARGE;
        let a_nm = d * mat.bohr_radius_nm();
        let e_field = efield_ratio * mat.confinement_energy_mev * MEV / (ELEMENTARY_CHARGE * a_nm * NM);
        Ok(Self::new(b_tesla, e_field, a_nm))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.b_tesla.is_finite() {
            return Err(Error::invalid("B", "must be finite"));
        }
        if !self.e_field.is_finite() {
            return Err(Error::invalid("E", "must be finite"));
        }
        if !self.a_nm.is_finite() || self.a_nm < 0.0 {
            return Err(Error::invalid("a", format!("must be >= 0, got {}", self.a_nm)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoulombSource {
    Derived,
    Override,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Larmor frequency `e B / 2m`, rad/s.
    pub larmor: f64,
    /// Fock-Darwin frequency `sqrt(omega_0^2 + omega_L^2)`, rad/s.
    pub fock_darwin: f64,
    /// Magnetic compression `Omega / omega_0`.
    pub b: f64,
    /// Half-distance in Bohr radii.
    pub d: f64,
    pub bohr_radius_nm: f64,
    pub c_coulomb: f64,
    pub c_source: CoulombSource,
    /// `e E a / hbar omega_0`.
    pub efield_ratio: f64,
    pub hbar_omega0_mev: f64,
}

impl DerivedParams {
    /// `omega_L / omega_0`; the magnetic translation phase per unit length.
    pub fn larmor_ratio(&self) -> f64 {
        (self.b * self.b - 1.0).max(0.0).sqrt()
    }

    /// Common displacement of both orbitals by the electric field, in Bohr radii.
    pub fn field_shift(&self) -> f64 {
        if self.d > 0.0 {
            self.efield_ratio / self.d
        } else {
            0.0
        }
    }

    /// Strength of `1/|r|` in `hbar omega_0` units with lengths in Bohr radii.
    pub fn coulomb_coupling(&self) -> f64 {
        self.c_coulomb * (2.0 / std::f64::consts::PI).sqrt()
    }

    pub fn overlap(&self) -> f64 {
        crate::exchange::overlap(self.b, self.d)
    }

    pub fn dimensionless(&self) -> Dimensionless {
        Dimensionless {
            b: self.b,
            d: self.d,
            c: self.c_coulomb,
            efield_ratio: self.efield_ratio,
        }
    }
}

/// Inputs of the closed-form exchange energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensionless {
    pub b: f64,
    pub d: f64,
    pub c: f64,
    pub efield_ratio: f64,
}

pub fn derive_parameters(mat: &MaterialParams, fields: &FieldConfig) -> Result<DerivedParams> {
    mat.validate()?;
    fields.validate()?;
    let omega0 = mat.omega0();
    let larmor = ELEMENTARY_CHARGE * fields.b_tesla.abs() / (2.0 * mat.mass_kg());
    let ratio = larmor / omega0;
    let b = ratio.hypot(1.0);
    let fock_darwin = omega0 * b;
    let bohr_radius_nm = mat.bohr_radius_nm();
    let d = fields.a_nm / bohr_radius_nm;
    let (c_coulomb, c_source) = match mat.c_override {
        Some(c) => (c, CoulombSource::Override),
        None => (mat.derived_coulomb_strength(), CoulombSource::Derived),
    };
    let efield_ratio = ELEMENTARY_CHARGE * fields.e_field * fields.a_nm * NM / (mat.confinement_energy_mev * MEV);
    Ok(DerivedParams {
        larmor,
        fock_darwin,
        b,
        d,
        bohr_radius_nm,
        c_coulomb,
        c_source,
        efield_ratio,
        hbar_omega0_mev: mat.confinement_energy_mev,
    })
}

pub fn to_dimensionless(mat: &MaterialParams, fields: &FieldConfig) -> Result<Dimensionless> {
    derive_parameters(mat, fields).map(|p| p.dimensionless())
}

/// `hbar omega` in meV for an angular frequency in rad/s.
pub fn energy_mev(omega: f64) -> f64 {
    HBAR * omega / MEV
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite and > 0, got {v}")))
    }
}
