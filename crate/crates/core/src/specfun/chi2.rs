//! Noncentral chi-squared density (log space) and distribution function.

use super::bessel::ln_bessel_i_positive;
use super::gamma::{gamma_p, ln_gamma};
use crate::error::{domain, Result};
use std::f64::consts::LN_2;

const POISSON_TAIL: f64 = 1e-14;

fn check(z: f64, dof: u32, lambda: f64) -> Result<()> {
    if dof < 1 {
        return domain("chi-squared degrees of freedom must be >= 1");
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return domain(format!("noncentrality must be finite and >= 0, got {lambda}"));
    }
    if z.is_nan() || z < 0.0 {
        return domain(format!("chi-squared variate must be >= 0, got {z}"));
    }
    Ok(())
}

/// Log-density of the noncentral chi-squared law with `dof` degrees of freedom.
///
/// `lambda = 0` is the central law. At `z = 0` the density limit is returned:
/// `+inf` for one degree of freedom, `ln(1/2) - lambda/2` for two, `-inf` above.
pub fn noncentral_chi2_logpdf(z: f64, dof: u32, lambda: f64) -> Result<f64> {
    check(z, dof, lambda)?;
    Ok(ncx2_logpdf(z, dof, lambda))
}

/// `exp(noncentral_chi2_logpdf)`.
pub fn noncentral_chi2_pdf(z: f64, dof: u32, lambda: f64) -> Result<f64> {
    noncentral_chi2_logpdf(z, dof, lambda).map(f64::exp)
}

/// Unchecked log-density used on hot paths.
pub(crate) fn ncx2_logpdf(z: f64, dof: u32, lambda: f64) -> f64 {
    let k = f64::from(dof);
    if z == 0.0 {
        return match dof {
            1 => f64::INFINITY,
            2 => -LN_2 - 0.5 * lambda,
            _ => f64::NEG_INFINITY,
        };
    }
    if z.is_infinite() {
        return f64::NEG_INFINITY;
    }
    if lambda == 0.0 {
        return central_logpdf(z, k);
    }
    let order = 0.5 * k - 1.0;
    let ln_ratio = z.ln() - lambda.ln();
    let y = (lambda * z).sqrt();
    let ln_bessel = if y > 0.0 {
        ln_bessel_i_positive(order, y)
    } else {
        // sqrt(lambda z) underflowed: leading series term only.
        order * (0.5 * (lambda.ln() + z.ln()) - LN_2) - ln_gamma(order + 1.0)
    };
    -LN_2 - 0.5 * (z + lambda) + 0.5 * order * ln_ratio + ln_bessel
}

fn central_logpdf(z: f64, k: f64) -> f64 {
    (0.5 * k - 1.0) * z.ln() - 0.5 * z - 0.5 * k * LN_2 - ln_gamma(0.5 * k)
}

/// Distribution function, as a Poisson(`lambda/2`) mixture of central laws.
///
/// Summation starts at the Poisson mode and walks outwards until the
/// remaining Poisson mass on each side is below `1e-14`.
pub fn noncentral_chi2_cdf(z: f64, dof: u32, lambda: f64) -> Result<f64> {
    check(z, dof, lambda)?;
    Ok(ncx2_cdf(z, dof, lambda))
}

pub(crate) fn ncx2_cdf(z: f64, dof: u32, lambda: f64) -> f64 {
    let half_k = 0.5 * f64::from(dof);
    let x = 0.5 * z;
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if lambda == 0.0 {
        return gamma_p(half_k, x);
    }
    let h = 0.5 * lambda;
    let mode = h.floor();
    let a0 = half_k + mode;
    let w0 = (-h + mode * h.ln() - ln_gamma(mode + 1.0)).exp();
    let p0 = gamma_p(a0, x);
    // d(a) = x^a e^{-x} / Gamma(a + 1), the step P(a) - P(a + 1).
    let d0 = (a0 * x.ln() - x - ln_gamma(a0 + 1.0)).exp();

    let mut total = w0 * p0;

    let (mut w, mut p, mut d, mut a, mut j) = (w0, p0, d0, a0, mode);
    loop {
        p = (p - d).max(0.0);
        j += 1.0;
        a += 1.0;
        d *= x / a;
        w *= h / j;
        total += w * p;
        if j + 1.0 > h && w * h / (j + 1.0 - h) < POISSON_TAIL {
            break;
        }
        if w == 0.0 && j > h {
            break;
        }
    }

    let (mut w, mut p, mut d, mut a, mut j) = (w0, p0, d0, a0, mode);
    while j > 0.0 {
        // d(a - 1) = d(a) * a / x
        d *= a / x;
        a -= 1.0;
        p += d;
        w *= j / h;
        j -= 1.0;
        total += w * p.min(1.0);
        if j < h && w * j / (h - j) < POISSON_TAIL {
            break;
        }
    }
    total.clamp(0.0, 1.0)
}
