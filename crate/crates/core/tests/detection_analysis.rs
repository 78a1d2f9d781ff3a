use adsv::analysis::{
    binomial_pmf, decision_regions, error_noiseless, error_noisy, error_probability, optimize_binary_split,
    uniform_priors,
};
use adsv::channel::{ArrivalSet, ChannelParams, RngStream};
use adsv::detection::{
    baseline_sync_ml_decide, baseline_ti_decide, conditional_logpdf_noiseless, conditional_logpdf_noisy,
    hypergeom_pmf, ml_decide, multivariate_hypergeom_pmf, sample_variance, statistic, ConditionalLaw,
    SufficientStatistic, TiVariant,
};
use adsv::modulation::ModulationScheme;
use adsv::specfun::noncentral_chi2_logpdf;
use adsv::Error;

fn sigma2() -> f64 {
    ChannelParams::capillary().derive().sigma2
}

#[test]
fn sample_variance_examples() {
    assert!((sample_variance(&[1.0, 1.0, 1.1, 1.1]).unwrap() - 3.333_333e-3).abs() < 1e-9);
    assert_eq!(sample_variance(&[2.5; 6]).unwrap(), 0.0);
    assert!((sample_variance(&[0.0, 0.1]).unwrap() - 0.005).abs() < 1e-15);
    let st = statistic(&[0.0, 0.1], sigma2()).unwrap();
    assert!((st.z - 0.01 / (2.0 * sigma2())).abs() < 1e-12);
}

#[test]
fn hypergeometric_examples() {
    assert_eq!(hypergeom_pmf(2, 4, 4, 2).unwrap(), 1.0);
    assert!((hypergeom_pmf(1, 4, 2, 3).unwrap() - 0.5).abs() < 1e-15);
    assert!((multivariate_hypergeom_pmf(&[1, 1, 0], &[2, 1, 1], 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(multivariate_hypergeom_pmf(&[2, 1, 1], &[2, 1, 1], 4).unwrap(), 1.0);
    assert_eq!(multivariate_hypergeom_pmf(&[3, 0, 0], &[2, 1, 1], 3).unwrap(), 0.0);
    assert!(multivariate_hypergeom_pmf(&[1, 1], &[2, 1, 1], 2).is_err());
    for n in 1..=12u32 {
        for group in 0..=n {
            for m in 0..=n {
                let s: f64 = (0..=m).map(|k| hypergeom_pmf(k, n, group, m).unwrap()).sum();
                assert!((s - 1.0).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn reversed_rows_share_a_density() {
    let s = ModulationScheme::new_permissive(0.1, vec![vec![4, 0], vec![2, 2], vec![0, 4]]).unwrap();
    for i in 1..50 {
        let z = 0.4 * f64::from(i);
        let a = conditional_logpdf_noiseless(z, &s, 0, sigma2()).unwrap();
        let c = conditional_logpdf_noiseless(z, &s, 2, sigma2()).unwrap();
        assert_eq!(a, c);
    }
}

#[test]
fn two_molecule_density_is_half_integer_bessel() {
    // dof 1: f(z) = (phi(sqrt z - sqrt l) + phi(sqrt z + sqrt l)) / (2 sqrt z)
    let s = ModulationScheme::binary(2, 2, 1, 0.1).unwrap();
    let l = s.noncentrality(1, sigma2()).unwrap().lambda;
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    for &z in &[0.01f64, 0.5, 3.0, 6.4, 12.0, 30.0] {
        let want = (phi(z.sqrt() - l.sqrt()) + phi(z.sqrt() + l.sqrt())) / (2.0 * z.sqrt());
        let got = conditional_logpdf_noiseless(z, &s, 1, sigma2()).unwrap().exp();
        assert!(((got - want) / want).abs() < 1e-12, "z={z}");
    }
}

#[test]
fn two_of_four_mixture() {
    let s = ModulationScheme::binary(4, 4, 2, 0.1).unwrap();
    let l1 = 0.01 / (2.0 * sigma2());
    for &z in &[0.2, 1.0, 5.0, 9.0] {
        let want = (1.0 / 6.0) * 2.0 * noncentral_chi2_logpdf(z, 1, 0.0).unwrap().exp()
            + (4.0 / 6.0) * noncentral_chi2_logpdf(z, 1, l1).unwrap().exp();
        let got = conditional_logpdf_noisy(z, 2, &s, 1, sigma2()).unwrap().exp();
        assert!(((got - want) / want).abs() < 1e-12);
    }
    assert!(matches!(
        conditional_logpdf_noisy(1.0, 1, &s, 1, sigma2()),
        Err(Error::InsufficientSamples { .. })
    ));
    assert!(conditional_logpdf_noisy(1.0, 5, &s, 1, sigma2()).is_err());
}

#[test]
fn ml_examples() {
    let s = ModulationScheme::binary(4, 4, 2, 0.1).unwrap();
    let at = |z| SufficientStatistic { z, m: 4, s2: 0.0 };
    assert_eq!(ml_decide(&at(2.0), &s, sigma2(), false).unwrap().symbol, 0);
    assert_eq!(ml_decide(&at(12.0), &s, sigma2(), false).unwrap().symbol, 1);
    let twin = ModulationScheme::new_permissive(0.1, vec![vec![3, 1], vec![1, 3]]).unwrap();
    let d = ml_decide(&at(5.0), &twin, sigma2(), false).unwrap();
    assert_eq!(d.log_likelihoods[0], d.log_likelihoods[1]);
    assert_eq!(d.symbol, 0);
}

#[test]
fn ml_is_scale_consistent() {
    let s = ModulationScheme::binary(8, 8, 4, 0.1).unwrap();
    let y = [1.0, 1.02, 0.97, 1.11, 1.08, 1.13, 0.99, 1.1];
    let base = ml_decide(&statistic(&y, sigma2()).unwrap(), &s, sigma2(), false).unwrap();
    for c in [0.5, 2.0, 10.0] {
        let scaled: Vec<f64> = y.iter().map(|t| t * c).collect();
        let st = statistic(&scaled, sigma2() * c * c).unwrap();
        let d = ml_decide(&st, &s, sigma2(), false).unwrap();
        assert_eq!(d.symbol, base.symbol);
    }
}

#[test]
fn sync_ml_examples() {
    let ch = ChannelParams::capillary().derive();
    let d = baseline_sync_ml_decide(&ArrivalSet::from_times(vec![1.0, 1.04, 1.01, 1.03]), 4, 0.1, &ch).unwrap();
    assert_eq!(d.symbol, 0);
    let offset = baseline_sync_ml_decide(&ArrivalSet::from_times(vec![1.2; 4]), 4, 0.1, &ch).unwrap();
    assert_eq!(offset.symbol, 1);
}

#[test]
fn distinguishable_interval_example() {
    let mut rng = RngStream::new(0, 0);
    let a = ArrivalSet::from_times(vec![1.0, 1.03]);
    let d = baseline_ti_decide(&a, TiVariant::Distinguishable, Some(&[0, 1]), 0.1, sigma2(), &mut rng).unwrap();
    assert_eq!(d.symbol, 0);
}

#[test]
fn region_examples() {
    let s = ModulationScheme::binary(4, 4, 2, 0.1).unwrap();
    let r = decision_regions(&s, 4, sigma2()).unwrap();
    assert_eq!(r.winner, vec![0, 1]);
    let z_star = r.breakpoints[1];
    assert!(z_star > 0.0 && z_star < 15.85);
    // Relabelled scheme: same boundary, winners swapped.
    let swapped = ModulationScheme::new(0.1, vec![vec![2, 2], vec![4, 0]]).unwrap();
    let rs = decision_regions(&swapped, 4, sigma2()).unwrap();
    assert_eq!(rs.winner, vec![1, 0]);
    assert!((rs.breakpoints[1] - z_star).abs() <= 1e-10 * z_star);
    let a = error_noiseless(&s, sigma2(), &uniform_priors(2)).unwrap().p_error;
    let b = error_noiseless(&swapped, sigma2(), &uniform_priors(2)).unwrap().p_error;
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn boundary_is_a_density_crossing() {
    let s = ModulationScheme::binary(8, 8, 4, 0.12).unwrap();
    for m in 2..=8u32 {
        let r = decision_regions(&s, m, sigma2()).unwrap();
        let laws: Vec<ConditionalLaw> =
            (0..2).map(|b| ConditionalLaw::noisy(&s.counts()[b], m, 0.12, sigma2()).unwrap()).collect();
        for &z in &r.breakpoints[1..r.breakpoints.len() - 1] {
            let gap = laws[0].logpdf(z) - laws[1].logpdf(z);
            assert!(gap.abs() < 1e-8, "m={m} z={z} gap={gap}");
        }
    }
}

#[test]
fn vanishing_spacing_is_a_coin_flip() {
    let s = ModulationScheme::binary(4, 4, 2, 1e-9).unwrap();
    let p = error_noiseless(&s, sigma2(), &uniform_priors(2)).unwrap().p_error;
    assert!((p - 0.5).abs() < 1e-3, "{p}");
}

#[test]
fn binomial_example() {
    assert!((binomial_pmf(4, 4, 0.2).unwrap() - 0.4096).abs() < 1e-15);
}

#[test]
fn noisy_error_limits_for_three_symbols() {
    let s = ModulationScheme::new(0.1, vec![vec![4, 0, 0], vec![1, 2, 1], vec![2, 0, 2]]).unwrap();
    let r = error_noisy(&s, sigma2(), 1.0, &uniform_priors(3)).unwrap();
    assert!((r.p_error - 2.0 / 3.0).abs() < 1e-15);
    let r = error_noisy(&s, sigma2(), 0.1, &uniform_priors(3)).unwrap();
    for row in &r.confusion {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }
    assert!(r.p_error > 0.0 && r.p_error < 2.0 / 3.0);
}

#[test]
fn optimizer_matches_exhaustive_search_for_three() {
    let pri = uniform_priors(2);
    let c = optimize_binary_split(3, 0.1, sigma2(), 0.0, &pri).unwrap();
    let mut best = f64::INFINITY;
    for n0 in 0..=3u32 {
        for n1 in 0..=3u32 {
            if let Ok(s) = ModulationScheme::binary(3, n0, n1, 0.1) {
                best = best.min(error_probability(&s, sigma2(), 0.0, &pri).unwrap());
            }
        }
    }
    assert!(ModulationScheme::binary(3, c.n0, c.n1, 0.1).is_ok());
    assert!((c.p_error - best).abs() <= 1e-9 * best);
}

#[test]
fn optimizer_with_loss_keeps_half_split() {
    let c = optimize_binary_split(8, 0.16, sigma2(), 0.2, &uniform_priors(2)).unwrap();
    assert_eq!((c.n0, c.n1), (8, 4));
}
