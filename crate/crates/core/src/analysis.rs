//! Theoretical error probabilities, decision regions and split optimization.

use crate::detection::ConditionalLaw;
use crate::error::{domain, Error, Result};
use crate::modulation::{spread, ModulationScheme};
use crate::specfun::{log_binomial, normal_sf, try_integrate};
use rayon::prelude::*;

const GRID_PANELS: usize = 2048;
const QUAD_REL_TOL: f64 = 1e-10;

/// Partition of `[0, z_max]` into intervals won by one symbol each.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRegions {
    /// Interval endpoints, starting at 0 and ending at `z_max`.
    pub breakpoints: Vec<f64>,
    /// `winner[i]` owns `[breakpoints[i], breakpoints[i + 1]]`.
    pub winner: Vec<usize>,
    pub z_max: f64,
}

impl DecisionRegions {
    /// Symbol chosen at `z`.
    pub fn symbol_at(&self, z: f64) -> usize {
        let i = self.breakpoints[1..self.breakpoints.len() - 1].partition_point(|&b| b < z);
        self.winner[i]
    }
}

/// Error probability with its per-symbol breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub p_error: f64,
    /// `confusion[b][c]`: probability of deciding `c` when `b` was sent.
    pub confusion: Vec<Vec<f64>>,
    /// Quadrature error estimate plus probability mass beyond `z_max`.
    pub quadrature_error: f64,
}

fn check_priors(priors: &[f64], q: usize) -> Result<()> {
    if priors.len() != q {
        return domain(format!("expected {q} priors, got {}", priors.len()));
    }
    if priors.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return domain(format!("priors must be finite and >= 0, got {priors:?}"));
    }
    let s: f64 = priors.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return domain(format!("priors must sum to 1, got {s}"));
    }
    Ok(())
}

/// Equal priors for `q` symbols.
pub fn uniform_priors(q: usize) -> Vec<f64> {
    vec![1.0 / q as f64; q]
}

fn laws_for(scheme: &ModulationScheme, m: u32, sigma2: f64) -> Result<Vec<ConditionalLaw>> {
    scheme
        .counts()
        .iter()
        .map(|row| ConditionalLaw::noisy(row, m, scheme.t_e(), sigma2))
        .collect()
}

fn winner_at(laws: &[ConditionalLaw], z: f64) -> usize {
    let mut best = 0;
    let mut best_ll = laws[0].logpdf(z);
    for (b, law) in laws.iter().enumerate().skip(1) {
        let ll = law.logpdf(z);
        if ll > best_ll {
            best = b;
            best_ll = ll;
        }
    }
    best
}

/// Upper end of the region grid: far into every symbol's tail.
fn z_max_for(laws: &[ConditionalLaw]) -> f64 {
    let k = f64::from(laws[0].dof());
    let lmax = laws.iter().map(ConditionalLaw::max_lambda).fold(0.0, f64::max);
    k + lmax + 20.0 * (2.0 * (k + 2.0 * lmax)).sqrt()
}

pub(crate) fn regions_for_laws(laws: &[ConditionalLaw]) -> Result<DecisionRegions> {
    for a in 0..laws.len() {
        for b in a + 1..laws.len() {
            if laws[a].same_as(&laws[b]) {
                return Err(Error::DegenerateScheme(format!(
                    "symbols {a} and {b} induce the same law of the statistic"
                )));
            }
        }
    }
    let z_max = z_max_for(laws);
    let u_max = z_max.sqrt();
    let mut breakpoints = vec![0.0];
    let mut winner = Vec::new();
    let mut prev = {
        let u = u_max / GRID_PANELS as f64;
        u * u
    };
    let mut current = winner_at(laws, prev);
    winner.push(current);
    for i in 2..=GRID_PANELS {
        let u = u_max * i as f64 / GRID_PANELS as f64;
        let z = u * u;
        let w = winner_at(laws, z);
        let mut lo = prev;
        while w != current {
            // Bisect for the first point in (lo, z] not won by `current`.
            let mut hi = z;
            while hi - lo > 4.0 * f64::EPSILON * hi {
                let mid = 0.5 * (lo + hi);
                if winner_at(laws, mid) == current {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            current = winner_at(laws, hi);
            breakpoints.push(0.5 * (lo + hi));
            winner.push(current);
            lo = hi;
        }
        prev = z;
    }
    breakpoints.push(z_max);
    Ok(DecisionRegions { breakpoints, winner, z_max })
}

/// ML decision regions for `M` observed molecules.
pub fn decision_regions(scheme: &ModulationScheme, m: u32, sigma2: f64) -> Result<DecisionRegions> {
    regions_for_laws(&laws_for(scheme, m, sigma2)?)
}

fn report_for_laws(laws: &[ConditionalLaw], priors: &[f64]) -> Result<ErrorReport> {
    let regions = regions_for_laws(laws)?;
    let q = laws.len();
    let mut confusion = vec![vec![0.0; q]; q];
    let mut quadrature_error = 0.0;
    for (b, law) in laws.iter().enumerate() {
        for (i, &w) in regions.winner.iter().enumerate() {
            let (lo, hi) = (regions.breakpoints[i].sqrt(), regions.breakpoints[i + 1].sqrt());
            if hi <= lo {
                continue;
            }
            // u = sqrt(z) removes the z^{-1/2} singularity at the origin.
            let r = try_integrate(|u| Ok(2.0 * u * law.logpdf(u * u).exp()), lo, hi, QUAD_REL_TOL)?;
            confusion[b][w] += r.value;
            quadrature_error += priors[b] * r.abs_error_estimate;
        }
        quadrature_error += priors[b] * (1.0 - law.cdf(regions.z_max)).max(0.0);
    }
    let p_error = (0..q)
        .map(|b| priors[b] * (0..q).filter(|&c| c != b).map(|c| confusion[b][c]).sum::<f64>())
        .sum();
    Ok(ErrorReport { p_error, confusion, quadrature_error })
}

/// Error probability when all `N` molecules arrive.
pub fn error_noiseless(scheme: &ModulationScheme, sigma2: f64, priors: &[f64]) -> Result<ErrorReport> {
    check_priors(priors, scheme.q())?;
    report_for_laws(&laws_for(scheme, scheme.n(), sigma2)?, priors)
}

/// `C(n, m) (1 - p_d)^m p_d^(n - m)`: probability that `m` of `n` molecules survive.
pub fn binomial_pmf(m: u32, n: u32, p_d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_d) {
        return domain(format!("degradation probability must lie in [0, 1], got {p_d}"));
    }
    if m > n {
        return Ok(0.0);
    }
    if p_d == 0.0 {
        return Ok(if m == n { 1.0 } else { 0.0 });
    }
    if p_d == 1.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    let ln = log_binomial(u64::from(n), u64::from(m))
        + f64::from(m) * (-p_d).ln_1p()
        + f64::from(n - m) * p_d.ln();
    Ok(ln.exp())
}

/// Error probability when each molecule is lost independently with
/// probability `p_d`. Fewer than two survivors means a uniform guess.
pub fn error_noisy(scheme: &ModulationScheme, sigma2: f64, p_d: f64, priors: &[f64]) -> Result<ErrorReport> {
    check_priors(priors, scheme.q())?;
    let q = scheme.q();
    let n = scheme.n();
    let mut p_error = 0.0;
    let mut confusion = vec![vec![0.0; q]; q];
    let mut quadrature_error = 0.0;
    for m in 0..=n {
        let w = binomial_pmf(m, n, p_d)?;
        if w == 0.0 {
            continue;
        }
        if m < 2 {
            p_error += w * (q - 1) as f64 / q as f64;
            for row in confusion.iter_mut() {
                for c in row.iter_mut() {
                    *c += w / q as f64;
                }
            }
            continue;
        }
        let r = report_for_laws(&laws_for(scheme, m, sigma2)?, priors)?;
        p_error += w * r.p_error;
        quadrature_error += w * r.quadrature_error;
        for (row, rrow) in confusion.iter_mut().zip(&r.confusion) {
            for (c, rc) in row.iter_mut().zip(rrow) {
                *c += w * rc;
            }
        }
    }
    Ok(ErrorReport { p_error, confusion, quadrature_error })
}

/// Error probability of `scheme`, noiseless when `p_d = 0`.
pub fn error_probability(scheme: &ModulationScheme, sigma2: f64, p_d: f64, priors: &[f64]) -> Result<f64> {
    let r = if p_d == 0.0 {
        error_noiseless(scheme, sigma2, priors)?
    } else {
        error_noisy(scheme, sigma2, p_d, priors)?
    };
    Ok(r.p_error)
}

/// Best binary split found by [`optimize_binary_split`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub n0: u32,
    pub n1: u32,
    pub p_error: f64,
}

/// Search every non-degenerate split with `N0 >= N/2` and `N1 <= N/2`.
///
/// Splits within a relative `1e-9` of the minimum error are tied. Among
/// them the split whose symbol 0 has the smaller noncentrality is
/// preferred, then the larger noncentrality gap, then the smallest pair.
pub fn optimize_binary_split(n: u32, t_e: f64, sigma2: f64, p_d: f64, priors: &[f64]) -> Result<SplitChoice> {
    if n < 2 {
        return domain(format!("N must be >= 2, got {n}"));
    }
    check_priors(priors, 2)?;
    let mut candidates = Vec::new();
    for n0 in n.div_ceil(2)..=n {
        for n1 in 0..=n / 2 {
            if n1 != n0 && n1 != n - n0 {
                candidates.push((n0, n1));
            }
        }
    }
    let scored: Vec<(u32, u32, f64)> = candidates
        .par_iter()
        .map(|&(n0, n1)| {
            let s = ModulationScheme::binary(n, n0, n1, t_e)?;
            Ok((n0, n1, error_probability(&s, sigma2, p_d, priors)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = scored.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    let spread_of = |a: u32| spread(&[a, n - a]);
    let key = |&(n0, n1, _): &(u32, u32, f64)| {
        let (s0, s1) = (spread_of(n0), spread_of(n1));
        (s0 >= s1, std::cmp::Reverse(s0.abs_diff(s1)), n0, n1)
    };
    let (n0, n1, p_error) = scored
        .iter()
        .filter(|c| c.2 - best <= 1e-9 * best + 1e-15)
        .min_by_key(|c| key(c))
        .copied()
        .expect("at least one candidate for N >= 2");
    Ok(SplitChoice { n0, n1, p_error })
}

/// Clock-synchronized ML on binary PPM under the normal model: the mean
/// of `N` arrivals is compared with `mu + t_e / 2`, the receiver clock
/// being off by `theta`.
pub fn ber_sync_ml(n: u32, t_e: f64, sigma2: f64, theta: f64, priors: &[f64]) -> Result<f64> {
    check_priors(priors, 2)?;
    if n < 1 || !(t_e > 0.0 && sigma2 > 0.0) {
        return domain("ber_sync_ml needs N >= 1, t_e > 0 and sigma^2 > 0");
    }
    let sd = (sigma2 / f64::from(n)).sqrt();
    let half = 0.5 * t_e;
    Ok(priors[0] * normal_sf((half - theta) / sd) + priors[1] * normal_sf((half + theta) / sd))
}

/// Two distinguishable molecules, the second delayed by `t_e` for bit 1,
/// each lost with probability `p_d`. The interval threshold sits at `t_e / 2`.
pub fn ber_ti_distinguishable(t_e: f64, sigma2: f64, p_d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_d) || !(t_e > 0.0 && sigma2 > 0.0) {
        return domain("ber_ti_distinguishable needs p_d in [0, 1], t_e > 0 and sigma^2 > 0");
    }
    let both = (1.0 - p_d) * (1.0 - p_d);
    Ok((1.0 - both) * 0.5 + both * normal_sf(t_e / (2.0 * (2.0 * sigma2).sqrt())))
}
