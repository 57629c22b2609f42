//! Modified Bessel function of the first kind, order zero.
//!
//! Below [`SPLICE`] the ascending series is summed directly (all terms are
//! positive, so there is no cancellation). Above it the large-argument
//! expansion `e^x / sqrt(2 pi x) * sum ((2k-1)!!)^2 / (k! (8x)^k)` is used; at
//! the splice point its smallest term is below 1e-18, so both branches are at
//! full double precision there.

use crate::error::{Error, Result};

/// Argument at which evaluation switches from the series to the asymptotic branch.
pub const SPLICE: f64 = 20.0;

const MAX_TERMS: usize = 500;

/// `I_0(x)`. Even in `x`; overflows to `+inf` beyond `x ~ 713`.
pub fn bessel_i0(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::InvalidArgument("bessel_i0 of NaN".into()));
    }
    let x = x.abs();
    if x < SPLICE {
        Ok(series(x))
    } else if x > 700.0 {
        // e^x would overflow before the prefactor brings it down.
        let half = (0.5 * x).exp();
        Ok(half * (asymptotic_sum(x) / (2.0 * std::f64::consts::PI * x).sqrt()) * half)
    } else {
        Ok(x.exp() * asymptotic_sum(x) / (2.0 * std::f64::consts::PI * x).sqrt())
    }
}

/// Exponentially scaled `e^{-|x|} I_0(x)`, finite for every finite `x`.
pub fn bessel_i0e(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::InvalidArgument("bessel_i0e of NaN".into()));
    }
    let x = x.abs();
    if x < SPLICE {
        Ok(series(x) * (-x).exp())
    } else {
        Ok(asymptotic_sum(x) / (2.0 * std::f64::consts::PI * x).sqrt())
    }
}

/// Ascending series `sum (x^2/4)^k / (k!)^2`.
pub(crate) fn series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term <= sum * f64::EPSILON * 0.5 {
            break;
        }
    }
    sum
}

/// The bracketed sum of the large-argument expansion, truncated at its smallest term.
pub(crate) fn asymptotic_sum(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..MAX_TERMS {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (8.0 * k as f64 * x);
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term <= sum * f64::EPSILON * 0.5 {
            break;
        }
    }
    sum
}
