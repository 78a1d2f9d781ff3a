//! Modified Bessel function of the first kind, real order `>= -1/2`.
//!
//! Small and moderate arguments use the power series summed from its first
//! term with a running log-scale, so nothing overflows before the final
//! `exp`. Once `y > max(30, 10|order|)` the large-argument expansion takes
//! over: the Hankel series for small orders, and the uniform (Debye)
//! expansion for orders above [`DEBYE_MIN_ORDER`], where the Hankel terms
//! grow before they shrink.

use super::gamma::ln_gamma;
use crate::error::{domain, Result};
use std::f64::consts::PI;

/// Orders above this use the uniform expansion in the asymptotic region.
pub const DEBYE_MIN_ORDER: f64 = 15.0;

const SERIES_REL_TAIL: f64 = 1e-16;
const RESCALE: f64 = 1e280;

/// Argument above which the asymptotic expansions replace the series.
pub fn asymptotic_threshold(order: f64) -> f64 {
    f64::max(30.0, 10.0 * order.abs())
}

/// `e^{-y} I_order(y)`.
pub fn bessel_i_scaled(order: f64, y: f64) -> Result<f64> {
    check(order, y)?;
    Ok(ln_bessel_i_unchecked(order, y).map_or_else(|v| v, |v| (v - y).exp()))
}

/// `ln I_order(y)`; `+inf` at `y = 0` for negative order, `-inf` for positive order.
pub fn ln_bessel_i(order: f64, y: f64) -> Result<f64> {
    check(order, y)?;
    Ok(ln_bessel_i_unchecked(order, y).unwrap_or_else(|v| v.ln()))
}

fn check(order: f64, y: f64) -> Result<()> {
    if !order.is_finite() || order < -0.5 {
        return domain(format!("Bessel order must be >= -1/2, got {order}"));
    }
    if !y.is_finite() || y < 0.0 {
        return domain(format!("Bessel argument must be finite and >= 0, got {y}"));
    }
    Ok(())
}

/// `Ok(ln I)` normally; `Err(scaled value)` for the `y = 0` limits so the
/// scaled wrapper can return `0`, `1` or `inf` without taking logs.
fn ln_bessel_i_unchecked(order: f64, y: f64) -> std::result::Result<f64, f64> {
    if y == 0.0 {
        return Err(if order == 0.0 {
            1.0
        } else if order > 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    Ok(ln_bessel_i_positive(order, y))
}

/// `ln I_order(y)` for `y > 0`, no argument checks.
pub(crate) fn ln_bessel_i_positive(order: f64, y: f64) -> f64 {
    if y > asymptotic_threshold(order) {
        if order > DEBYE_MIN_ORDER {
            ln_debye(order, y)
        } else {
            y + hankel_scaled(order, y).ln()
        }
    } else {
        ln_series(order, y)
    }
}

/// Power series `(y/2)^v sum (y^2/4)^j / (j! Gamma(v+j+1))` in log form.
pub(crate) fn ln_series(order: f64, y: f64) -> f64 {
    let half = 0.5 * y;
    let ln_first = order * half.ln() - ln_gamma(order + 1.0);
    let quarter_sq = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut ln_scale = 0.0;
    let mut j = 0.0;
    loop {
        let ratio = quarter_sq / ((j + 1.0) * (order + j + 1.0));
        term *= ratio;
        sum += term;
        j += 1.0;
        if term > RESCALE {
            term /= RESCALE;
            sum /= RESCALE;
            ln_scale += RESCALE.ln();
        }
        // Ratios decrease in j, so past the peak the tail is geometric.
        if ratio < 1.0 {
            let next = quarter_sq / ((j + 1.0) * (order + j + 1.0));
            if term * next / (1.0 - next) < SERIES_REL_TAIL * sum {
                break;
            }
        }
    }
    ln_first + ln_scale + sum.ln()
}

/// Large-argument expansion `sqrt(2 pi y) e^{-y} I_v(y) ~ sum (-1)^k a_k(v) / y^k`.
pub(crate) fn hankel_scaled(order: f64, y: f64) -> f64 {
    let mu = 4.0 * order * order;
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64 * y);
        if next == 0.0 || next.abs() > term.abs() {
            break;
        }
        sum += next;
        term = next;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * y).sqrt()
}

/// Uniform expansion of `ln I_v(v z)` for large order, `U_0` through `U_5`.
pub(crate) fn ln_debye(order: f64, y: f64) -> f64 {
    let z = y / order;
    let root = (1.0 + z * z).sqrt();
    let p = 1.0 / root;
    // v*sqrt(1+z^2) - y, written to avoid cancellation.
    let excess = order * order / ((order * order + y * y).sqrt() + y);
    let eta_minus_z = excess + order * (z / (1.0 + root)).ln();

    let p2 = p * p;
    let u1 = p * (3.0 - 5.0 * p2) / 24.0;
    let u2 = p2 * (81.0 - 462.0 * p2 + 385.0 * p2 * p2) / 1152.0;
    let u3 = p * p2 * (30375.0 - 369_603.0 * p2 + 765_765.0 * p2 * p2 - 425_425.0 * p2 * p2 * p2)
        / 414_720.0;
    let p4 = p2 * p2;
    let u4 = p4
        * (4_465_125.0 - 94_121_676.0 * p2 + 349_922_430.0 * p4 - 446_185_740.0 * p4 * p2
            + 185_910_725.0 * p4 * p4)
        / 39_813_120.0;
    let u5 = p4
        * p
        * (1_519_035_525.0 - 49_286_948_607.0 * p2 + 284_499_769_554.0 * p4
            - 614_135_872_350.0 * p4 * p2
            + 566_098_157_625.0 * p4 * p4
            - 188_699_385_875.0 * p4 * p4 * p2)
        / 6_688_604_160.0;
    let inv = 1.0 / order;
    let series = 1.0 + inv * (u1 + inv * (u2 + inv * (u3 + inv * (u4 + inv * u5))));

    y + eta_minus_z - 0.5 * (2.0 * PI * order).ln() - 0.5 * root.ln() + series.ln()
}
