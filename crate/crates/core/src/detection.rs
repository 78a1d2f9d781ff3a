//! Sample-variance statistic, its conditional laws and the receivers.

use crate::channel::{ArrivalSet, DerivedChannel, RngStream};
use crate::error::{domain, Error, Result};
use crate::modulation::{lambda_unchecked, spread, ModulationScheme};
use crate::specfun::{log_binomial, ncx2_cdf, ncx2_logpdf};

/// `(M-1) S^2 / sigma^2` together with the sample it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SufficientStatistic {
    pub z: f64,
    pub m: usize,
    pub s2: f64,
}

/// Output of every receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub symbol: usize,
    /// Per-symbol log-likelihoods, up to a common constant. All zero for a
    /// degenerate decision.
    pub log_likelihoods: Vec<f64>,
    /// Too few arrivals; the symbol was drawn uniformly at random.
    pub degenerate: bool,
}

/// Unbiased sample variance (two-pass).
pub fn sample_variance(y: &[f64]) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::InsufficientSamples { min: 2, got: y.len() });
    }
    let m = y.len() as f64;
    let mean = y.iter().sum::<f64>() / m;
    let ss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok(ss / (m - 1.0))
}

pub fn statistic(y: &[f64], sigma2: f64) -> Result<SufficientStatistic> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return domain(format!("sigma^2 must be finite and > 0, got {sigma2}"));
    }
    let s2 = sample_variance(y)?;
    Ok(SufficientStatistic { z: (y.len() - 1) as f64 * s2 / sigma2, m: y.len(), s2 })
}

/// Probability that `k` of `m` draws without replacement from `n` items
/// come from a group of `group`.
pub fn hypergeom_pmf(k: u32, n: u32, group: u32, m: u32) -> Result<f64> {
    if group > n || m > n {
        return domain(format!("hypergeometric needs group, m <= n; got n={n} group={group} m={m}"));
    }
    if k > group || k > m || m - k > n - group {
        return Ok(0.0);
    }
    Ok(ln_hypergeom(&[k, m - k], &[group, n - group], m).exp())
}

/// Probability of surviving composition `k` when `m` of the molecules in
/// `row` survive, each subset equally likely.
pub fn multivariate_hypergeom_pmf(k: &[u32], row: &[u32], m: u32) -> Result<f64> {
    if k.len() != row.len() {
        return domain("composition and row lengths differ");
    }
    let n: u32 = row.iter().sum();
    if m > n {
        return domain(format!("cannot keep {m} of {n} molecules"));
    }
    if k.iter().sum::<u32>() != m || k.iter().zip(row).any(|(a, b)| a > b) {
        return Ok(0.0);
    }
    Ok(ln_hypergeom(k, row, m).exp())
}

fn ln_hypergeom(k: &[u32], row: &[u32], m: u32) -> f64 {
    let n: u32 = row.iter().sum();
    let num: f64 = k.iter().zip(row).map(|(&a, &b)| log_binomial(u64::from(b), u64::from(a))).sum();
    num - log_binomial(u64::from(n), u64::from(m))
}

/// Law of the statistic given one symbol and `M` observations: a finite
/// mixture of noncentral chi-squared laws with `M - 1` degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalLaw {
    dof: u32,
    /// `(ln weight, lambda)`, one per surviving composition.
    components: Vec<(f64, f64)>,
}

impl ConditionalLaw {
    /// All molecules of `row` observed.
    pub fn noiseless(row: &[u32], t_e: f64, sigma2: f64) -> Result<Self> {
        let m: u32 = row.iter().sum();
        Self::noisy(row, m, t_e, sigma2)
    }

    /// `m` uniformly chosen molecules of `row` observed.
    pub fn noisy(row: &[u32], m: u32, t_e: f64, sigma2: f64) -> Result<Self> {
        let n: u32 = row.iter().sum();
        if m < 2 {
            return Err(Error::InsufficientSamples { min: 2, got: m as usize });
        }
        if m > n {
            return domain(format!("observed {m} molecules but only {n} were released"));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0 && t_e.is_finite() && t_e > 0.0) {
            return domain("sigma^2 and t_e must be finite and > 0");
        }
        let mut components = Vec::new();
        let mut k = vec![0u32; row.len()];
        compositions(row, m, 0, &mut k, &mut |k| {
            let lambda = lambda_unchecked(spread(k), m, t_e, sigma2);
            components.push((ln_hypergeom(k, row, m), lambda));
        });
        Ok(Self { dof: m - 1, components })
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    pub fn max_lambda(&self) -> f64 {
        self.components.iter().map(|c| c.1).fold(0.0, f64::max)
    }

    pub fn logpdf(&self, z: f64) -> f64 {
        if let [(w, lambda)] = self.components[..] {
            return w + ncx2_logpdf(z, self.dof, lambda);
        }
        let terms: Vec<f64> = self.components.iter().map(|&(w, l)| w + ncx2_logpdf(z, self.dof, l)).collect();
        log_sum_exp(&terms)
    }

    pub fn cdf(&self, z: f64) -> f64 {
        self.components
            .iter()
            .map(|&(w, l)| w.exp() * ncx2_cdf(z, self.dof, l))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// Same mixture up to reordering and rounding.
    pub(crate) fn same_as(&self, other: &Self) -> bool {
        if self.dof != other.dof {
            return false;
        }
        let merge = |c: &[(f64, f64)]| {
            let mut v: Vec<(f64, f64)> = c.to_vec();
            v.sort_by(|a, b| a.1.total_cmp(&b.1));
            let mut out: Vec<(f64, f64)> = Vec::new();
            for (w, l) in v {
                match out.last_mut() {
                    Some(last) if close(last.1, l) => last.0 = log_sum_exp(&[last.0, w]),
                    _ => out.push((w, l)),
                }
            }
            out
        };
        let (a, b) = (merge(&self.components), merge(&other.components));
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| close(x.1, y.1) && close(x.0.exp(), y.0.exp()))
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

fn compositions(row: &[u32], left: u32, j: usize, k: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    if j == row.len() - 1 {
        if left <= row[j] {
            k[j] = left;
            f(k);
        }
        return;
    }
    let rest: u32 = row[j + 1..].iter().sum();
    let lo = left.saturating_sub(rest);
    for c in lo..=row[j].min(left) {
        k[j] = c;
        compositions(row, left - c, j + 1, k, f);
    }
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Log-density of the statistic given `symbol`, all `N` molecules observed.
pub fn conditional_logpdf_noiseless(z: f64, scheme: &ModulationScheme, symbol: usize, sigma2: f64) -> Result<f64> {
    check_z(z)?;
    Ok(ConditionalLaw::noiseless(scheme.row(symbol)?, scheme.t_e(), sigma2)?.logpdf(z))
}

/// Log-density of the statistic given `symbol` and `m` surviving molecules.
pub fn conditional_logpdf_noisy(
    z: f64,
    m: usize,
    scheme: &ModulationScheme,
    symbol: usize,
    sigma2: f64,
) -> Result<f64> {
    check_z(z)?;
    Ok(ConditionalLaw::noisy(scheme.row(symbol)?, m as u32, scheme.t_e(), sigma2)?.logpdf(z))
}

fn check_z(z: f64) -> Result<()> {
    if z.is_nan() || z < 0.0 {
        return domain(format!("statistic must be >= 0, got {z}"));
    }
    Ok(())
}

fn argmax(ll: &[f64]) -> usize {
    let mut best = 0;
    for (b, &v) in ll.iter().enumerate().skip(1) {
        if v > ll[best] {
            best = b;
        }
    }
    best
}

/// Uniform guess; one draw from `rng`.
fn guess(q: usize, rng: &mut RngStream) -> Decision {
    Decision { symbol: rng.below(q), log_likelihoods: vec![0.0; q], degenerate: true }
}

fn decide_from(laws: &[ConditionalLaw], z: f64) -> Decision {
    let ll: Vec<f64> = laws.iter().map(|l| l.logpdf(z)).collect();
    Decision { symbol: argmax(&ll), log_likelihoods: ll, degenerate: false }
}

/// Maximum-likelihood symbol for an observed statistic; ties go to the
/// smaller index. Without `noisy`, the statistic must use all `N` molecules.
pub fn ml_decide(stat: &SufficientStatistic, scheme: &ModulationScheme, sigma2: f64, noisy: bool) -> Result<Decision> {
    check_z(stat.z)?;
    let n = scheme.n() as usize;
    if !noisy && stat.m != n {
        return Err(Error::ModeMismatch { expected: n, got: stat.m });
    }
    if stat.m > n {
        return domain(format!("observed {} molecules but only {n} were released", stat.m));
    }
    let laws = (0..scheme.q())
        .map(|b| ConditionalLaw::noisy(&scheme.counts()[b], stat.m as u32, scheme.t_e(), sigma2))
        .collect::<Result<Vec<_>>>()?;
    Ok(decide_from(&laws, stat.z))
}

/// Sample-variance receiver with the mixture laws for every `M` precomputed.
#[derive(Debug, Clone)]
pub struct AdsvReceiver {
    q: usize,
    sigma2: f64,
    /// `laws[m]` holds one law per symbol; empty for `m < 2`.
    laws: Vec<Vec<ConditionalLaw>>,
}

impl AdsvReceiver {
    pub fn new(scheme: &ModulationScheme, sigma2: f64) -> Result<Self> {
        let n = scheme.n();
        let mut laws = vec![Vec::new(), Vec::new()];
        for m in 2..=n {
            laws.push(
                scheme
                    .counts()
                    .iter()
                    .map(|row| ConditionalLaw::noisy(row, m, scheme.t_e(), sigma2))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Self { q: scheme.q(), sigma2, laws })
    }

    /// ML decision from the arrival times, or a uniform guess if fewer than
    /// two molecules arrived. The guess consumes one draw from `rng`.
    pub fn decide(&self, times: &[f64], rng: &mut RngStream) -> Result<Decision> {
        if times.len() < 2 {
            return Ok(guess(self.q, rng));
        }
        let laws = self
            .laws
            .get(times.len())
            .ok_or_else(|| Error::Domain(format!("{} arrivals exceed the {} released", times.len(), self.laws.len() - 1)))?;
        let stat = statistic(times, self.sigma2)?;
        Ok(decide_from(laws, stat.z))
    }
}

/// [`ml_decide`] in noisy mode, with the uniform fallback below two arrivals.
pub fn decide_with_fallback(
    arrivals: &ArrivalSet,
    scheme: &ModulationScheme,
    sigma2: f64,
    rng: &mut RngStream,
) -> Result<Decision> {
    if arrivals.len() < 2 {
        return Ok(guess(scheme.q(), rng));
    }
    let stat = statistic(arrivals.times(), sigma2)?;
    ml_decide(&stat, scheme, sigma2, true)
}

/// Clock-synchronized ML for binary PPM under the normal model: decide 1
/// iff the mean arrival time exceeds `mu + t_e / 2`.
pub fn baseline_sync_ml_decide(arrivals: &ArrivalSet, n: u32, t_e: f64, ch: &DerivedChannel) -> Result<Decision> {
    if arrivals.len() != n as usize {
        return Err(Error::ModeMismatch { expected: n as usize, got: arrivals.len() });
    }
    if arrivals.is_empty() {
        return Err(Error::InsufficientSamples { min: 1, got: 0 });
    }
    let mean = arrivals.times().iter().sum::<f64>() / arrivals.len() as f64;
    let d = mean - ch.mu;
    let scale = f64::from(n) / (2.0 * ch.sigma2);
    let ll = vec![-d * d * scale, -(d - t_e) * (d - t_e) * scale];
    Ok(Decision { symbol: argmax(&ll), log_likelihoods: ll, degenerate: false })
}

/// Two-molecule time-interval baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiVariant {
    /// Molecule types can be told apart: the signed interval is observed.
    Distinguishable,
    /// Only the unsigned interval is observed.
    Indistinguishable,
}

/// Time-interval receiver for a two-molecule binary scheme where symbol 1
/// delays the second molecule by `t_e` relative to symbol 0.
///
/// `labels` gives each arrival's molecule index and is required for the
/// distinguishable variant. With fewer than two arrivals the symbol is
/// guessed uniformly, consuming one draw from `rng`.
pub fn baseline_ti_decide(
    arrivals: &ArrivalSet,
    variant: TiVariant,
    labels: Option<&[usize]>,
    t_e: f64,
    sigma2: f64,
    rng: &mut RngStream,
) -> Result<Decision> {
    if arrivals.len() > 2 {
        return domain(format!("time-interval receivers take at most 2 arrivals, got {}", arrivals.len()));
    }
    if arrivals.len() < 2 {
        return Ok(guess(2, rng));
    }
    let y = arrivals.times();
    let s2 = 2.0 * sigma2;
    let ll = match variant {
        TiVariant::Distinguishable => {
            let labels = labels.ok_or_else(|| Error::Domain("distinguishable receiver needs molecule labels".into()))?;
            if labels.len() != 2 || labels[0] == labels[1] {
                return domain(format!("expected two distinct labels, got {labels:?}"));
            }
            let (first, second) = if labels[0] < labels[1] { (y[0], y[1]) } else { (y[1], y[0]) };
            let delta = second - first;
            vec![-delta * delta / (2.0 * s2), -(delta - t_e) * (delta - t_e) / (2.0 * s2)]
        }
        TiVariant::Indistinguishable => {
            // Folded normal on |Y2 - Y1|; the density at zero offset is 2 phi.
            let d = (y[1] - y[0]).abs();
            let a = -(d - t_e) * (d - t_e) / (2.0 * s2);
            let b = -(d + t_e) * (d + t_e) / (2.0 * s2);
            vec![std::f64::consts::LN_2 - d * d / (2.0 * s2), log_sum_exp(&[a, b])]
        }
    };
    Ok(Decision { symbol: argmax(&ll), log_likelihoods: ll, degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelParams;

    fn sigma2() -> f64 {
        ChannelParams::capillary().derive().sigma2
    }

    #[test]
    fn variance_basics() {
        assert_eq!(sample_variance(&[1.0, 3.0]).unwrap(), 2.0);
        assert!(matches!(sample_variance(&[1.0]), Err(Error::InsufficientSamples { min: 2, got: 1 })));
        let st = statistic(&[1.5, 1.5, 1.6, 1.6], 0.01).unwrap();
        assert_eq!(st.m, 4);
        assert!((st.z - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hypergeometric_values() {
        // C(4,2) C(4,1) / C(8,3)
        assert!((hypergeom_pmf(2, 8, 4, 3).unwrap() - 24.0 / 56.0).abs() < 1e-15);
        assert_eq!(hypergeom_pmf(5, 8, 4, 6).unwrap(), 0.0);
        let total: f64 = (0..=3).map(|k| hypergeom_pmf(k, 8, 4, 3).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(hypergeom_pmf(0, 4, 5, 1).is_err());
        assert_eq!(multivariate_hypergeom_pmf(&[2, 2], &[2, 2], 4).unwrap(), 1.0);
        assert!((multivariate_hypergeom_pmf(&[1, 1, 0], &[1, 2, 1], 2).unwrap() - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn mixture_weights_sum_to_one() {
        for row in [vec![8u32, 8], vec![3, 1, 4], vec![16, 0]] {
            let n: u32 = row.iter().sum();
            for m in 2..=n {
                let law = ConditionalLaw::noisy(&row, m, 0.1, 1e-3).unwrap();
                let s: f64 = law.components().iter().map(|c| c.0.exp()).sum();
                assert!((s - 1.0).abs() < 1e-12, "{row:?} m={m}");
            }
        }
    }

    #[test]
    fn full_observation_is_noiseless() {
        let s = ModulationScheme::binary(4, 4, 2, 0.1).unwrap();
        for z in [0.3, 3.0, 14.0] {
            for b in 0..2 {
                assert_eq!(
                    conditional_logpdf_noisy(z, 4, &s, b, sigma2()).unwrap(),
                    conditional_logpdf_noiseless(z, &s, b, sigma2()).unwrap()
                );
            }
        }
    }

    #[test]
    fn ml_picks_larger_likelihood_and_checks_mode() {
        let s = ModulationScheme::binary(4, 4, 2, 0.1).unwrap();
        let near_zero = SufficientStatistic { z: 1.0, m: 4, s2: 0.0 };
        let large = SufficientStatistic { z: 20.0, m: 4, s2: 0.0 };
        assert_eq!(ml_decide(&near_zero, &s, sigma2(), false).unwrap().symbol, 0);
        assert_eq!(ml_decide(&large, &s, sigma2(), false).unwrap().symbol, 1);
        let three = SufficientStatistic { z: 1.0, m: 3, s2: 0.0 };
        assert_eq!(
            ml_decide(&three, &s, sigma2(), false).unwrap_err(),
            Error::ModeMismatch { expected: 4, got: 3 }
        );
        assert!(ml_decide(&three, &s, sigma2(), true).is_ok());
    }

    #[test]
    fn fallback_is_flagged() {
        let s = ModulationScheme::binary(4, 4, 2, 0.1).unwrap();
        let mut rng = RngStream::new(1, 1);
        let d = decide_with_fallback(&ArrivalSet::from_times(vec![1.0]), &s, sigma2(), &mut rng).unwrap();
        assert!(d.degenerate && d.symbol < 2);
        let r = AdsvReceiver::new(&s, sigma2()).unwrap();
        assert!(r.decide(&[], &mut rng).unwrap().degenerate);
        let d = r.decide(&[1.0, 1.0, 1.1, 1.1], &mut rng).unwrap();
        assert!(!d.degenerate);
        assert_eq!(d.symbol, argmax(&d.log_likelihoods));
    }

    #[test]
    fn receiver_matches_ml_decide() {
        let s = ModulationScheme::binary(8, 8, 4, 0.1).unwrap();
        let r = AdsvReceiver::new(&s, sigma2()).unwrap();
        let mut rng = RngStream::new(4, 0);
        for m in 2..=8usize {
            let y: Vec<f64> = (0..m).map(|i| 1.0 + 0.013 * (i * i) as f64).collect();
            let a = r.decide(&y, &mut rng).unwrap();
            let b = ml_decide(&statistic(&y, sigma2()).unwrap(), &s, sigma2(), true).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sync_threshold() {
        let ch = ChannelParams::capillary().derive();
        let at = |t: f64| ArrivalSet::from_times(vec![t; 3]);
        assert_eq!(baseline_sync_ml_decide(&at(1.049), 3, 0.1, &ch).unwrap().symbol, 0);
        assert_eq!(baseline_sync_ml_decide(&at(1.051), 3, 0.1, &ch).unwrap().symbol, 1);
        assert!(baseline_sync_ml_decide(&at(1.0), 4, 0.1, &ch).is_err());
    }

    #[test]
    fn interval_receivers() {
        let mut rng = RngStream::new(0, 0);
        let a = ArrivalSet::from_times(vec![1.08, 1.0]);
        let d = baseline_ti_decide(&a, TiVariant::Distinguishable, Some(&[1, 0]), 0.1, 1e-3, &mut rng).unwrap();
        assert_eq!(d.symbol, 1);
        let d = baseline_ti_decide(&a, TiVariant::Distinguishable, Some(&[0, 1]), 0.1, 1e-3, &mut rng).unwrap();
        assert_eq!(d.symbol, 0);
        assert!(baseline_ti_decide(&a, TiVariant::Distinguishable, None, 0.1, 1e-3, &mut rng).is_err());
        let d = baseline_ti_decide(&a, TiVariant::Indistinguishable, None, 0.1, 1e-3, &mut rng).unwrap();
        assert_eq!(d.symbol, 1);
        let close = ArrivalSet::from_times(vec![1.0, 1.01]);
        let d = baseline_ti_decide(&close, TiVariant::Indistinguishable, None, 0.1, 1e-3, &mut rng).unwrap();
        assert_eq!(d.symbol, 0);
        let one = ArrivalSet::from_times(vec![1.0]);
        assert!(baseline_ti_decide(&one, TiVariant::Indistinguishable, None, 0.1, 1e-3, &mut rng).unwrap().degenerate);
    }

    #[test]
    fn indistinguishable_interval_equals_two_molecule_variance_receiver() {
        let sigma2 = 1e-3;
        let s = ModulationScheme::binary(2, 2, 1, 0.1).unwrap();
        let mut rng = RngStream::new(0, 0);
        for i in 0..400 {
            let gap = 0.0005 * f64::from(i);
            let a = ArrivalSet::from_times(vec![1.0, 1.0 + gap]);
            let ti = baseline_ti_decide(&a, TiVariant::Indistinguishable, None, 0.1, sigma2, &mut rng).unwrap();
            let v = decide_with_fallback(&a, &s, sigma2, &mut rng).unwrap();
            let margin = (v.log_likelihoods[0] - v.log_likelihoods[1]).abs();
            if margin > 1e-9 {
                assert_eq!(ti.symbol, v.symbol, "gap {gap}");
            }
        }
    }
}
