//! Two-dimensional quadrature for Gaussian-dominated integrands.
//!
//! Two rules are provided. The tensor Gauss-Hermite rule is exact for a
//! Gaussian matching the supplied [`GaussianFrame`] times a polynomial and
//! converges super-geometrically when the polynomial is replaced by a plane
//! wave. The adaptive polar rule (Gauss-Kronrod 7/15 in the radius, periodic
//! trapezoid in the angle) handles integrands with an integrable `1/r` point
//! singularity at the polar origin.
//!
//! Every sum is accumulated in a fixed order, so results are bit-identical
//! across runs and thread counts.

use std::collections::HashMap;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest Gauss-Hermite order the refinement loop will reach.
pub const MAX_HERMITE_ORDER: usize = 128;
const MAX_RADIAL_INTERVALS: usize = 400;
const MAX_ANGULAR_POINTS: usize = 16_384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    TensorGaussHermite,
    AdaptivePolar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: Rule,
    /// Points per axis for the tensor rule (the first refinement level).
    pub order: usize,
    pub rel_tol: f64,
    /// Absolute error accepted when the integral itself is near zero.
    pub abs_floor: f64,
    /// Truncation radius in units of the Gaussian width.
    pub domain_cut: f64,
}

impl QuadratureSpec {
    pub fn gauss_hermite(order: usize) -> Self {
        Self {
            rule: Rule::TensorGaussHermite,
            order,
            rel_tol: 1e-10,
            abs_floor: 1e-14,
            domain_cut: 8.0,
        }
    }

    pub fn adaptive_polar(rel_tol: f64) -> Self {
        Self {
            rule: Rule::AdaptivePolar,
            order: 15,
            rel_tol,
            abs_floor: 1e-14,
            domain_cut: 8.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 4 {
            return Err(Error::invalid("order", format!("must be >= 4, got {}", self.order)));
        }
        if self.rule == Rule::TensorGaussHermite && self.order > MAX_HERMITE_ORDER {
            return Err(Error::invalid(
                "order",
                format!("must be <= {MAX_HERMITE_ORDER}, got {}", self.order),
            ));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::invalid(
                "rel_tol",
                format!("must lie in (0, 1), got {}", self.rel_tol),
            ));
        }
        if !(self.abs_floor >= 0.0) {
            return Err(Error::invalid("abs_floor", "must be >= 0"));
        }
        if !(self.domain_cut >= 4.0) || !self.domain_cut.is_finite() {
            return Err(Error::invalid(
                "domain_cut",
                format!("must be >= 4, got {}", self.domain_cut),
            ));
        }
        Ok(())
    }

    fn tolerance(&self, value: f64) -> f64 {
        (self.rel_tol * value).max(self.abs_floor)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::gauss_hermite(64)
    }
}

/// Values a quadrature can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

/// Refinement exhausted before the tolerance was met.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureFailure<T> {
    pub best: Estimate<T>,
}

impl<T: QuadValue> From<QuadratureFailure<T>> for Error {
    fn from(f: QuadratureFailure<T>) -> Self {
        Error::Quadrature {
            best: f.best.value.magnitude(),
            error: f.best.error,
        }
    }
}

pub type QuadResult<T> = std::result::Result<Estimate<T>, QuadratureFailure<T>>;

/// Where an integrand lives: it is assumed to decay like
/// `exp(-|r - center|^2 / width^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFrame {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
}

impl GaussianFrame {
    pub fn new(cx: f64, cy: f64, width: f64) -> Self {
        Self { cx, cy, width }
    }

    /// Frame of an envelope `exp(-alpha |r - c|^2)`.
    pub fn from_exponent(cx: f64, cy: f64, alpha: f64) -> Self {
        Self::new(cx, cy, 1.0 / alpha.sqrt())
    }
}

/// Extent of a polar integration about the origin: the integrand is
/// negligible beyond `offset + domain_cut * width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarDomain {
    pub offset: f64,
    pub width: f64,
}

/// Nodes and `w_i exp(x_i^2)` for the Gauss-Hermite rule of one order.
#[derive(Debug)]
pub struct HermiteRule {
    pub nodes: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

/// Gauss-Hermite rule of order `n`, computed once per order and cached.
pub fn hermite_rule(n: usize) -> Arc<HermiteRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<HermiteRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(compute_hermite_rule(n)))
        .clone()
}

fn compute_hermite_rule(n: usize) -> HermiteRule {
    // Newton iteration on the orthonormal Hermite recurrence with the
    // standard asymptotic initial guesses for the largest roots.
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        let scaled = 2.0 / (pp * pp) * (z * z).exp();
        w[i] = scaled;
        w[n - 1 - i] = scaled;
    }
    // ascending order
    x.reverse();
    w.reverse();
    HermiteRule {
        nodes: x,
        scaled_weights: w,
    }
}

/// Integrates `f` over the plane.
pub fn integrate_2d<T, F>(f: F, frame: &GaussianFrame, spec: &QuadratureSpec) -> QuadResult<T>
where
    T: QuadValue,
    F: Fn(f64, f64) -> T,
{
    match spec.rule {
        Rule::TensorGaussHermite => tensor_hermite(&f, frame, spec),
        Rule::AdaptivePolar => {
            let domain = PolarDomain {
                offset: 0.0,
                width: frame.width,
            };
            polar(
                |r, theta| f(frame.cx + r * theta.cos(), frame.cy + r * theta.sin()) * r,
                &domain,
                spec,
            )
        }
    }
}

/// Integrates `g(r, theta) r dr dtheta` over the plane in polar coordinates
/// about the origin. `g` may carry a `1/r` singularity there.
pub fn integrate_coulomb_relative<T, G>(g: G, domain: &PolarDomain, spec: &QuadratureSpec) -> QuadResult<T>
where
    T: QuadValue,
    G: Fn(f64, f64) -> T,
{
    polar(|r, theta| g(r, theta) * r, domain, spec)
}

fn hermite_sum<T, F>(f: &F, frame: &GaussianFrame, n: usize) -> (T, f64)
where
    T: QuadValue,
    F: Fn(f64, f64) -> T,
{
    let rule = hermite_rule(n);
    let s = frame.width;
    let mut total = T::zero();
    let mut abs_total = 0.0;
    for (&tx, &wx) in rule.nodes.iter().zip(&rule.scaled_weights) {
        let x = frame.cx + s * tx;
        let mut row = T::zero();
        for (&ty, &wy) in rule.nodes.iter().zip(&rule.scaled_weights) {
            let v = f(x, frame.cy + s * ty) * wy;
            abs_total += v.magnitude() * wx;
            row = row + v;
        }
        total = total + row * wx;
    }
    (total * (s * s), abs_total * s * s)
}

fn tensor_hermite<T, F>(f: &F, frame: &GaussianFrame, spec: &QuadratureSpec) -> QuadResult<T>
where
    T: QuadValue,
    F: Fn(f64, f64) -> T,
{
    let mut n = spec.order.max(4);
    let mut coarse = hermite_sum(f, frame, n / 2).0;
    loop {
        let (fine, abs_total) = hermite_sum(f, frame, n);
        let diff = (fine - coarse).magnitude();
        let error = diff.max(rounding_floor(abs_total));
        let best = Estimate { value: fine, error };
        if error <= spec.tolerance(fine.magnitude()) {
            return Ok(best);
        }
        if 2 * n > MAX_HERMITE_ORDER {
            return Err(QuadratureFailure { best });
        }
        coarse = fine;
        n *= 2;
    }
}

/// Rounding uncertainty of a sum whose absolute terms total `abs_total`,
/// rounded up to a power of two so that it does not jitter between orders.
fn rounding_floor(abs_total: f64) -> f64 {
    let raw = 64.0 * f64::EPSILON * abs_total;
    if raw > 0.0 && raw.is_finite() {
        2f64.powi(raw.log2().ceil() as i32)
    } else {
        raw
    }
}

// Gauss-Kronrod 7/15 on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel<T> {
    lo: f64,
    hi: f64,
    value: T,
    error: f64,
}

fn polar<T, H>(h: H, domain: &PolarDomain, spec: &QuadratureSpec) -> QuadResult<T>
where
    T: QuadValue,
    H: Fn(f64, f64) -> T,
{
    let r_max = domain.offset.abs() + spec.domain_cut * domain.width;
    let ang_tol = 1e-3 * spec.rel_tol;
    let radial = |r: f64| angular(&h, r, ang_tol);

    let initial = 8;
    let mut panels: Vec<Panel<T>> = (0..initial)
        .map(|k| {
            let lo = r_max * k as f64 / initial as f64;
            let hi = r_max * (k + 1) as f64 / initial as f64;
            kronrod(&radial, lo, hi)
        })
        .collect();

    loop {
        let value = panels.iter().fold(T::zero(), |acc, p| acc + p.value);
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let best = Estimate { value, error };
        if error <= spec.tolerance(value.magnitude()) {
            return Ok(best);
        }
        if panels.len() >= MAX_RADIAL_INTERVALS {
            return Err(QuadratureFailure { best });
        }
        let worst = panels
            .iter()
            .enumerate()
            .fold(0, |w, (i, p)| if p.error > panels[w].error { i } else { w });
        let p = panels.remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        let left = kronrod(&radial, p.lo, mid);
        let right = kronrod(&radial, mid, p.hi);
        panels.insert(worst, right);
        panels.insert(worst, left);
    }
}

fn kronrod<T, F>(f: &F, lo: f64, hi: f64) -> Panel<T>
where
    T: QuadValue,
    F: Fn(f64) -> (T, f64),
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let (fc, ec) = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut ang_err = ec * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, e1) = f(center - dx);
        let (f2, e2) = f(center + dx);
        let pair = f1 + f2;
        kron = kron + pair * WGK[j];
        ang_err += (e1 + e2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kron * half;
    let error = (kron - gauss).magnitude() * half + ang_err * half;
    Panel { lo, hi, value, error }
}

/// Periodic trapezoid in the angle, doubled until successive levels agree.
/// Returns the integral over `[0, 2 pi)` and the last level difference.
fn angular<T, H>(h: &H, r: f64, rel_tol: f64) -> (T, f64)
where
    T: QuadValue,
    H: Fn(f64, f64) -> T,
{
    use std::f64::consts::TAU;
    let mut m = 16;
    let mut sum = (0..m).fold(T::zero(), |acc, k| acc + h(r, TAU * k as f64 / m as f64));
    let mut level = sum * (TAU / m as f64);
    loop {
        let step = TAU / (2 * m) as f64;
        let mid = (0..m).fold(T::zero(), |acc, k| acc + h(r, step * (2 * k + 1) as f64));
        sum = sum + mid;
        m *= 2;
        let next = sum * (TAU / m as f64);
        let diff = (next - level).magnitude();
        level = next;
        if m >= 64 && diff <= rel_tol * next.magnitude() + 1e-300 || m >= MAX_ANGULAR_POINTS {
            return (level, diff);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gaussian_density(x: f64, y: f64) -> f64 {
        (-(x * x + y * y) / 2.0).exp() / (2.0 * PI)
    }

    #[test]
    fn hermite_rule_integrates_moments() {
        let rule = hermite_rule(20);
        let w: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.scaled_weights)
            .map(|(x, sw)| sw * (-x * x).exp())
            .collect();
        let m0: f64 = w.iter().sum();
        let m2: f64 = rule.nodes.iter().zip(&w).map(|(x, w)| x * x * w).sum();
        assert_relative_eq!(m0, PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(m2, PI.sqrt() / 2.0, max_relative = 1e-14);
        assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn high_order_rules_are_sane() {
        for n in [64, 96, 128] {
            let rule = hermite_rule(n);
            let m0: f64 = rule
                .nodes
                .iter()
                .zip(&rule.scaled_weights)
                .map(|(x, sw)| sw * (-x * x).exp())
                .sum();
            assert_relative_eq!(m0, PI.sqrt(), max_relative = 1e-13);
        }
    }

    #[test]
    fn normalization_and_second_moment() {
        let frame = GaussianFrame::new(0.0, 0.0, 2f64.sqrt());
        let spec = QuadratureSpec::gauss_hermite(16);
        let norm = integrate_2d(gaussian_density, &frame, &spec).unwrap();
        assert!((norm.value - 1.0).abs() < 1e-10);
        let m2 = integrate_2d(|x, y| x * x * gaussian_density(x, y), &frame, &spec).unwrap();
        assert!((m2.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quartic_moment() {
        // (x^2 - a^2)^2 against a unit Gaussian: 3 - 2 a^2 + a^4 = 2 at a = 1
        let frame = GaussianFrame::new(0.0, 0.0, 2f64.sqrt());
        let spec = QuadratureSpec::gauss_hermite(16);
        let v = integrate_2d(|x, y| (x * x - 1.0).powi(2) * gaussian_density(x, y), &frame, &spec).unwrap();
        assert!((v.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn polar_rule_on_shifted_gaussian() {
        let frame = GaussianFrame::new(0.7, -0.3, 2f64.sqrt());
        let spec = QuadratureSpec::adaptive_polar(1e-10);
        let v = integrate_2d(|x, y| gaussian_density(x - 0.7, y + 0.3), &frame, &spec).unwrap();
        assert!((v.value - 1.0).abs() < 1e-9, "{v:?}");
    }

    #[test]
    fn coulomb_kernel_at_origin() {
        let spec = QuadratureSpec::adaptive_polar(1e-10);
        let domain = PolarDomain {
            offset: 0.0,
            width: 1.0,
        };
        let v = integrate_coulomb_relative(|r, _| (-r * r).exp() / r, &domain, &spec).unwrap();
        assert_relative_eq!(v.value, PI.powf(1.5), max_relative = 1e-9);
    }

    #[test]
    fn separable_angle() {
        let spec = QuadratureSpec::adaptive_polar(1e-11);
        let domain = PolarDomain {
            offset: 0.0,
            width: 1.0,
        };
        let g = |r: f64| r * r * (-r * r).exp();
        let v = integrate_coulomb_relative(|r, _| g(r), &domain, &spec).unwrap();
        // radial integral of r^3 exp(-r^2) is 1/2
        assert_relative_eq!(v.value, 2.0 * PI * 0.5, max_relative = 1e-10);
    }

    #[test]
    fn plane_wave_coulomb_integrand() {
        // int e^{-alpha r^2} e^{i beta r cos} / r  =  2 pi int_0^inf e^{-alpha r^2} J0(beta r) dr
        //   = pi sqrt(pi/alpha) e^{-beta^2/(8 alpha)} I0(beta^2/(8 alpha))
        let (alpha, beta): (f64, f64) = (0.6, 1.3);
        let spec = QuadratureSpec::adaptive_polar(1e-10);
        let domain = PolarDomain {
            offset: 0.0,
            width: 1.0 / alpha.sqrt(),
        };
        let v: Estimate<Complex64> = integrate_coulomb_relative(
            |r, t| Complex64::from_polar((-alpha * r * r).exp() / r, beta * r * t.cos()),
            &domain,
            &spec,
        )
        .unwrap();
        let z = beta * beta / (8.0 * alpha);
        let exact = PI * (PI / alpha).sqrt() * crate::bessel::bessel_i0e(z).unwrap();
        assert_relative_eq!(v.value.re, exact, max_relative = 1e-9);
        assert!(v.value.im.abs() < 1e-10);
    }

    #[test]
    fn decays_with_alpha() {
        let spec = QuadratureSpec::adaptive_polar(1e-9);
        let mut last = f64::INFINITY;
        for alpha in [1.0, 4.0, 16.0, 64.0, 256.0] {
            let domain = PolarDomain {
                offset: 0.0,
                width: 1.0 / f64::sqrt(alpha),
            };
            let v = integrate_coulomb_relative(|r, _| (-alpha * r * r).exp() / r, &domain, &spec)
                .unwrap()
                .value;
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn deterministic() {
        let frame = GaussianFrame::new(0.2, 0.1, 1.0);
        let spec = QuadratureSpec::gauss_hermite(32);
        let f = |x: f64, y: f64| Complex64::from_polar((-(x * x + y * y)).exp(), 0.8 * y);
        let a = integrate_2d(f, &frame, &spec).unwrap();
        let b = integrate_2d(f, &frame, &spec).unwrap();
        assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
        assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
    }

    #[test]
    fn error_estimate_does_not_grow_with_order() {
        let frame = GaussianFrame::new(0.0, 0.0, 2f64.sqrt());
        let integrands: [fn(f64, f64) -> f64; 3] = [
            |x, y| gaussian_density(x, y),
            |x, y| x * x * gaussian_density(x, y),
            |x, y| (x * x - 1.0).powi(2) * y * y * gaussian_density(x, y),
        ];
        for f in integrands {
            let mut last = f64::INFINITY;
            for n in [8, 16, 32, 64, 128] {
                let spec = QuadratureSpec::gauss_hermite(n);
                let e = integrate_2d(f, &frame, &spec).unwrap().error;
                assert!(e <= last, "order {n}: {e} > {last}");
                last = e;
            }
        }
    }

    #[test]
    fn failure_carries_best_estimate() {
        // a wildly oscillating integrand the Hermite rule cannot resolve
        let frame = GaussianFrame::new(0.0, 0.0, 1.0);
        let mut spec = QuadratureSpec::gauss_hermite(4);
        spec.rel_tol = 1e-15;
        spec.abs_floor = 0.0;
        let r = integrate_2d(
            |x: f64, y: f64| (-(x * x + y * y)).exp() * (40.0 * x).cos() + 1e-3 * (x * x).sin(),
            &frame,
            &spec,
        );
        let fail = r.unwrap_err();
        assert!(fail.best.error > 0.0);
        let e: Error = fail.into();
        assert!(matches!(e, Error::Quadrature { .. }));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::gauss_hermite(3).validate().is_err());
        assert!(QuadratureSpec::gauss_hermite(256).validate().is_err());
        let s = QuadratureSpec {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(s.validate().is_err());
        let s = QuadratureSpec {
            domain_cut: 3.0,
            ..Default::default()
        };
        assert!(s.validate().is_err());
        assert!(QuadratureSpec::default().validate().is_ok());
    }
}
