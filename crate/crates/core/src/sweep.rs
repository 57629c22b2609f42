//! Parameter sweeps of the closed-form exchange energy and bracketing
//! root-finding for the field or distance at which `J` changes sign.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::{exchange_energy_lab, overlap, ExchangeBreakdown};
use crate::units::{derive_parameters, FieldConfig, MaterialParams};

/// Residual accepted at a switch point, meV.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    /// Magnetic field, T.
    B,
    /// Electric field, V/m.
    E,
    /// Dimensionless half-distance `a / a_B`.
    #[serde(rename = "d")]
    D,
}

impl Axis {
    /// Bracket width at which a root is considered located.
    pub fn tolerance(self) -> f64 {
        match self {
            Axis::B => 1e-6,
            Axis::E => 1.0,
            Axis::D => 1e-8,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::B => "B_T",
            Axis::E => "E_V_per_m",
            Axis::D => "d",
        }
    }

    /// `fixed` with this axis set to `x`.
    pub fn apply(self, mat: &MaterialParams, fixed: &FieldConfig, x: f64) -> FieldConfig {
        let mut f = *fixed;
        match self {
            Axis::B => f.b_tesla = x,
            Axis::E => f.e_field = x,
            Axis::D => f.a_nm = x * mat.bohr_radius_nm(),
        }
        f
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" | "b" => Ok(Axis::B),
            "E" | "e" => Ok(Axis::E),
            "d" | "D" => Ok(Axis::D),
            other => Err(Error::InvalidArgument(format!(
                "unknown sweep axis `{other}` (expected B, E or d)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub vary: Axis,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub fixed: FieldConfig,
    pub material: MaterialParams,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        if !(self.from < self.to) || !self.from.is_finite() || !self.to.is_finite() {
            return Err(Error::invalid(
                "from",
                format!("need from < to, got [{}, {}]", self.from, self.to),
            ));
        }
        if self.steps < 2 {
            return Err(Error::invalid("steps", format!("must be >= 2, got {}", self.steps)));
        }
        if self.vary == Axis::D && !(self.from > 0.0) {
            return Err(Error::invalid("from", "a distance sweep must start above d = 0"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..=n)
            .map(|k| {
                if k == n {
                    self.to
                } else {
                    self.from + (self.to - self.from) * k as f64 / n as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub j_mev: Option<f64>,
    pub breakdown: Option<ExchangeBreakdown>,
    pub b: f64,
    pub d: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub singular: bool,
}

pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.grid()
        .into_par_iter()
        .map(|x| {
            let fields = spec.vary.apply(&spec.material, &spec.fixed, x);
            let p = derive_parameters(&spec.material, &fields)?;
            let s = overlap(p.b, p.d);
            match exchange_energy_lab(&spec.material, &fields) {
                Ok(br) => Ok(SweepRow {
                    x,
                    j_mev: Some(br.j_mev),
                    breakdown: Some(br),
                    b: p.b,
                    d: p.d,
                    s,
                    singular: false,
                }),
                Err(Error::SingularConfiguration { .. }) => Ok(SweepRow {
                    x,
                    j_mev: None,
                    breakdown: None,
                    b: p.b,
                    d: p.d,
                    s,
                    singular: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Index pairs `(i, j)` of consecutive non-singular rows where `J` changes sign.
pub fn sign_changes(rows: &[SweepRow]) -> Vec<(usize, usize)> {
    let valid: Vec<(usize, f64)> = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.j_mev.map(|j| (i, j)))
        .collect();
    valid
        .windows(2)
        .filter(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0))
        .map(|w| (w[0].0, w[1].0))
        .collect()
}

/// `J` in meV with `axis` set to `x`.
pub fn j_at(axis: Axis, mat: &MaterialParams, fixed: &FieldConfig, x: f64) -> Result<f64> {
    exchange_energy_lab(mat, &axis.apply(mat, fixed, x)).map(|b| b.j_mev)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AntiferroToFerro,
    FerroToAntiferro,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchPoint {
    pub axis: Axis,
    /// Root location in the axis' lab unit.
    pub value: f64,
    /// Bracket handed to the root finder.
    pub bracket: (f64, f64),
    /// Final bracket around `value`.
    pub final_bracket: (f64, f64),
    /// `|J(value)|`, meV.
    pub residual: f64,
    pub direction: Direction,
}

/// Locates a sign change of `J` inside `bracket` along `axis`.
pub fn find_switch(
    axis: Axis,
    mat: &MaterialParams,
    fixed: &FieldConfig,
    bracket: (f64, f64),
    tol: f64,
) -> Result<SwitchPoint> {
    let (lo, hi) = bracket;
    if !(lo < hi) {
        return Err(Error::invalid("bracket", format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let f = |x: f64| j_at(axis, mat, fixed, x);
    let (j_lo, j_hi) = (f(lo)?, f(hi)?);
    if (j_lo > 0.0) == (j_hi > 0.0) {
        return Err(Error::NoRootInBracket { lo, hi, j_lo, j_hi });
    }
    let direction = if j_lo > 0.0 {
        Direction::AntiferroToFerro
    } else {
        Direction::FerroToAntiferro
    };
    let root = brent(f, (lo, j_lo), (hi, j_hi), axis.tolerance(), tol)?;
    Ok(SwitchPoint {
        axis,
        value: root.x,
        bracket,
        final_bracket: root.bracket,
        residual: root.fx.abs(),
        direction,
    })
}

/// Pre-scans `spec` on its grid and refines every observed sign change.
pub fn find_switches(spec: &SweepSpec, tol: f64) -> Result<Vec<SwitchPoint>> {
    let rows = sweep(spec)?;
    sign_changes(&rows)
        .into_iter()
        .map(|(i, j)| find_switch(spec.vary, &spec.material, &spec.fixed, (rows[i].x, rows[j].x), tol))
        .collect()
}

/// First magnetic-field switch at fixed `E` and `a`, scanning `[0, b_max]`.
pub fn b_star(mat: &MaterialParams, e_field: f64, a_nm: f64, b_max: f64) -> Result<SwitchPoint> {
    let spec = SweepSpec {
        vary: Axis::B,
        from: 0.0,
        to: b_max,
        steps: (b_max * 20.0).ceil().max(2.0) as usize + 1,
        fixed: FieldConfig::new(0.0, e_field, a_nm),
        material: *mat,
    };
    find_switches(&spec, DEFAULT_RESIDUAL_TOL)?
        .into_iter()
        .next()
        .ok_or(Error::NoRootInBracket {
            lo: 0.0,
            hi: b_max,
            j_lo: j_at(Axis::B, mat, &spec.fixed, 0.0)?,
            j_hi: j_at(Axis::B, mat, &spec.fixed, b_max)?,
        })
}

struct Root {
    x: f64,
    fx: f64,
    bracket: (f64, f64),
}

/// Brent's method: inverse quadratic / secant steps inside a bracket that
/// always keeps a sign change, with bisection as the fallback. Stops when
/// the bracket is narrower than `xtol` and `|f| <= ftol`.
fn brent<F>(f: F, lo: (f64, f64), hi: (f64, f64), xtol: f64, ftol: f64) -> Result<Root>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut a, mut fa) = lo;
    let (mut b, mut fb) = hi;
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    let mut xtol = xtol;
    for _ in 0..MAX_ITERATIONS {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let floor = 2.0 * f64::EPSILON * b.abs();
        let tol1 = floor + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        let bracket = (b.min(c), b.max(c));
        if fb == 0.0 || xm.abs() <= floor {
            return Ok(Root { x: b, fx: fb, bracket });
        }
        if xm.abs() <= tol1 {
            if fb.abs() <= ftol {
                return Ok(Root { x: b, fx: fb, bracket });
            }
            xtol *= 1e-3;
            continue;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::Convergence {
        lo: b.min(c),
        hi: b.max(c),
        iterations: MAX_ITERATIONS,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    /// Ramp B through B* at E = 0.
    A,
    /// Ferromagnetic plateau.
    B,
    /// Ramp E at fixed B until the sign returns.
    C,
    /// Antiferromagnetic plateau.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Antiferromagnetic,
    Ferromagnetic,
    Zero,
}

impl Coupling {
    pub fn of(j: f64) -> Self {
        if j > 0.0 {
            Coupling::Antiferromagnetic
        } else if j < 0.0 {
            Coupling::Ferromagnetic
        } else {
            Coupling::Zero
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub material: MaterialParams,
    pub a_nm: f64,
    /// Magnetic field held during phases B-D, T.
    pub b_hold: f64,
    /// Final electric field as a multiple of the located E*.
    pub e_overshoot: f64,
    pub steps_per_phase: usize,
}

impl ScenarioSpec {
    pub fn new(material: MaterialParams, a_nm: f64) -> Self {
        Self {
            material,
            a_nm,
            b_hold: 2.0,
            e_overshoot: 1.5,
            steps_per_phase: 11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStep {
    pub phase: Phase,
    pub step: usize,
    pub b_tesla: f64,
    pub e_field: f64,
    pub j_mev: f64,
    pub sign: Coupling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub b_star: SwitchPoint,
    pub e_star: SwitchPoint,
    pub steps: Vec<ScenarioStep>,
}

/// Antiferro -> ferro by raising B, then back to antiferro by raising E at
/// constant B.
pub fn switching_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    let mat = &spec.material;
    mat.validate()?;
    if spec.steps_per_phase < 2 {
        return Err(Error::invalid("steps_per_phase", "must be >= 2"));
    }
    if !(spec.b_hold > 0.0) {
        return Err(Error::invalid("b_hold", "must be > 0"));
    }
    if !(spec.e_overshoot > 1.0) {
        return Err(Error::invalid("e_overshoot", "must be > 1"));
    }
    let zero = FieldConfig::new(0.0, 0.0, spec.a_nm);
    let scan_b = |to: f64| {
        find_switches(
            &SweepSpec {
                vary: Axis::B,
                from: 0.0,
                to,
                steps: 200,
                fixed: zero,
                material: *mat,
            },
            DEFAULT_RESIDUAL_TOL,
        )
    };

    let j_hold = j_at(Axis::B, mat, &zero, spec.b_hold)?;
    if j_hold >= 0.0 {
        let b_star = scan_b(60.0)?.first().map(|s| s.value).unwrap_or(f64::NAN);
        return Err(Error::BelowThreshold {
            b_hold: spec.b_hold,
            b_star,
        });
    }
    let b_star = *scan_b(spec.b_hold)?.first().ok_or(Error::BelowThreshold {
        b_hold: spec.b_hold,
        b_star: f64::NAN,
    })?;

    let held = FieldConfig::new(spec.b_hold, 0.0, spec.a_nm);
    let mut e_hi = 1e4;
    while j_at(Axis::E, mat, &held, e_hi)? <= 0.0 {
        e_hi *= 2.0;
        if e_hi > 1e10 {
            return Err(Error::Convergence {
                lo: 0.0,
                hi: e_hi,
                iterations: 0,
            });
        }
    }
    let e_star = find_switch(Axis::E, mat, &held, (0.0, e_hi), DEFAULT_RESIDUAL_TOL)?;
    let e_max = spec.e_overshoot * e_star.value;

    let n = spec.steps_per_phase;
    let ramp = |k: usize, to: f64| to * k as f64 / (n - 1) as f64;
    let mut steps = Vec::with_capacity(4 * n);
    let mut push = |phase, step, b_tesla: f64, e_field: f64| -> Result<()> {
        let j_mev = exchange_energy_lab(mat, &FieldConfig::new(b_tesla, e_field, spec.a_nm))?.j_mev;
        steps.push(ScenarioStep {
            phase,
            step,
            b_tesla,
            e_field,
            j_mev,
            sign: Coupling::of(j_mev),
        });
        Ok(())
    };
    for k in 0..n {
        push(Phase::A, k, ramp(k, spec.b_hold), 0.0)?;
    }
    for k in 0..n {
        push(Phase::B, k, spec.b_hold, 0.0)?;
    }
    for k in 0..n {
        push(Phase::C, k, spec.b_hold, ramp(k, e_max))?;
    }
    for k in 0..n {
        push(Phase::D, k, spec.b_hold, e_max)?;
    }
    Ok(Scenario {
        spec: *spec,
        b_star,
        e_star,
        steps,
    })
}

/// `# key: value` provenance lines describing a material and fixed fields.
pub fn provenance_header(mat: &MaterialParams, fixed: &FieldConfig) -> String {
    let mut out = String::new();
    let c = match mat.c_override {
        Some(c) => format!("{c} (override)"),
        None => format!("{} (derived)", mat.derived_coulomb_strength()),
    };
    let _ = writeln!(
        out,
        "# material: effective_mass={} dielectric_const={} confinement_energy_mev={} c={}",
        mat.effective_mass, mat.dielectric_const, mat.confinement_energy_mev, c
    );
    let _ = writeln!(out, "# bohr_radius_nm: {}", mat.bohr_radius_nm());
    let _ = writeln!(
        out,
        "# fixed: B_T={} E_V_per_m={} a_nm={} d={}",
        fixed.b_tesla,
        fixed.e_field,
        fixed.a_nm,
        fixed.a_nm / mat.bohr_radius_nm()
    );
    out
}

pub fn sweep_csv(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let mut out = String::from("# dotx sweep\n");
    out.push_str(&provenance_header(&spec.material, &spec.fixed));
    let _ = writeln!(
        out,
        "# vary: {} from={} to={} steps={}",
        spec.vary.label(),
        spec.from,
        spec.to,
        spec.steps
    );
    out.push_str("x,J_meV,prefactor,coulomb_term,quartic_term,efield_term,b,d,S\n");
    for r in rows {
        match r.breakdown {
            Some(br) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.x, br.j_mev, br.prefactor, br.coulomb_term, br.quartic_term, br.efield_term, r.b, r.d, r.s
                );
            }
            None => {
                let _ = writeln!(out, "{},NaN,NaN,NaN,NaN,NaN,{},{},{}", r.x, r.b, r.d, r.s);
            }
        }
    }
    out
}
