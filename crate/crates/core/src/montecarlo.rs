//! Monte Carlo error-rate estimation and parameter sweeps.
//!
//! Trials run in fixed-size blocks; block `i` draws from stream
//! `stream_base + i` of the configured seed, so results do not depend on
//! the number of worker threads.

use crate::analysis::{ber_sync_ml, ber_ti_distinguishable, error_probability, uniform_priors};
use crate::channel::{
    apply_degradation, simulate_arrivals, ChannelParams, Propagation, PropagationModel, RngStream,
};
use crate::detection::{baseline_sync_ml_decide, baseline_ti_decide, AdsvReceiver, TiVariant};
use crate::error::{domain, Error, Result};
use crate::modulation::ModulationScheme;
use rayon::prelude::*;

/// Trials per random stream.
pub const BLOCK_SIZE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    /// Asynchronous sample-variance ML receiver.
    Adsv,
    /// Clock-synchronized ML on binary PPM.
    SyncMl,
    /// Two-molecule time interval, distinguishable molecules.
    TiDistinguishable,
    /// Two-molecule time interval, indistinguishable molecules.
    TiIndistinguishable,
}

impl std::str::FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adsv" => Ok(Self::Adsv),
            "sdml" | "sd-ml" => Ok(Self::SyncMl),
            "tid" | "ti-d" => Ok(Self::TiDistinguishable),
            "tiid" | "ti-id" => Ok(Self::TiIndistinguishable),
            other => domain(format!("unknown detector '{other}' (expected adsv, sdml, tid or tiid)")),
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Adsv => "adsv",
            Self::SyncMl => "sdml",
            Self::TiDistinguishable => "tid",
            Self::TiIndistinguishable => "tiid",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub scheme: ModulationScheme,
    pub channel: ChannelParams,
    pub model: PropagationModel,
    pub detector: DetectorKind,
    pub p_d: f64,
    /// Receiver clock offset added to every arrival.
    pub theta: f64,
    pub n_trials: u64,
    pub seed: u64,
    /// Symbol priors; empty means uniform.
    pub priors: Vec<f64>,
}

impl TrialConfig {
    pub fn new(scheme: ModulationScheme, channel: ChannelParams, detector: DetectorKind) -> Self {
        Self {
            scheme,
            channel,
            model: PropagationModel::NormalApprox,
            detector,
            p_d: 0.0,
            theta: 0.0,
            n_trials: 100_000,
            seed: 1,
            priors: Vec::new(),
        }
    }

    fn resolved_priors(&self) -> Vec<f64> {
        if self.priors.is_empty() {
            uniform_priors(self.scheme.q())
        } else {
            self.priors.clone()
        }
    }

    /// Reject detector and scheme combinations that the receiver cannot handle.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_d) {
            return domain(format!("p_d must lie in [0, 1], got {}", self.p_d));
        }
        if !self.theta.is_finite() {
            return domain("theta must be finite");
        }
        if self.n_trials == 0 {
            return domain("n_trials must be > 0");
        }
        let priors = self.resolved_priors();
        if priors.len() != self.scheme.q() || (priors.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return domain(format!("priors {priors:?} do not fit a {}-ary scheme", self.scheme.q()));
        }
        if priors.iter().any(|p| p.is_nan() || *p < 0.0) {
            return domain("priors must be >= 0");
        }
        let counts = self.scheme.counts();
        let n = self.scheme.n();
        match self.detector {
            DetectorKind::Adsv => Ok(()),
            DetectorKind::SyncMl => {
                if counts != [vec![n, 0], vec![0, n]] {
                    return domain(format!("sync ML needs binary PPM rows [[N,0],[0,N]], got {counts:?}"));
                }
                if self.p_d != 0.0 {
                    return domain("sync ML is defined for p_d = 0 only");
                }
                Ok(())
            }
            DetectorKind::TiDistinguishable | DetectorKind::TiIndistinguishable => {
                let ok = n == 2 && counts[1] == [1, 1] && (counts[0] == [2, 0] || counts[0] == [0, 2]);
                if ok {
                    Ok(())
                } else {
                    domain(format!("time-interval receivers need rows [[2,0],[1,1]], got {counts:?}"))
                }
            }
        }
    }
}

/// Empirical error rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
    /// Binomial standard error `sqrt(rate (1 - rate) / trials)`.
    pub stderr: f64,
    /// Trials decided by a uniform guess.
    pub degenerate_trials: u64,
}

impl ErrorEstimate {
    fn from_counts(errors: u64, trials: u64, degenerate_trials: u64) -> Self {
        let rate = errors as f64 / trials as f64;
        Self { errors, trials, rate, stderr: (rate * (1.0 - rate) / trials as f64).sqrt(), degenerate_trials }
    }
}

/// Monte Carlo estimate of the symbol error rate.
///
/// Per trial the draws are: one uniform for the symbol, the propagation
/// times in release order, one uniform per arrival for degradation, and
/// one more if the receiver has to guess.
pub fn run_trials(cfg: &TrialConfig) -> Result<ErrorEstimate> {
    run_trials_on_streams(cfg, 0)
}

fn run_trials_on_streams(cfg: &TrialConfig, stream_base: u64) -> Result<ErrorEstimate> {
    cfg.validate()?;
    let derived = cfg.channel.derive();
    let prop = Propagation::new(&cfg.channel, cfg.model);
    let receiver = match cfg.detector {
        DetectorKind::Adsv => Some(AdsvReceiver::new(&cfg.scheme, derived.sigma2)?),
        _ => None,
    };
    let cumulative: Vec<f64> = cfg
        .resolved_priors()
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let blocks = cfg.n_trials.div_ceil(BLOCK_SIZE);
    let per_block = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = RngStream::new(cfg.seed, stream_base + block);
            let trials = BLOCK_SIZE.min(cfg.n_trials - block * BLOCK_SIZE);
            let (mut errors, mut degenerate) = (0u64, 0u64);
            for _ in 0..trials {
                let u = rng.uniform();
                let symbol = cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1);
                let sent = simulate_arrivals(&cfg.scheme, symbol, &prop, cfg.theta, &mut rng)?;
                let seen = apply_degradation(&sent, cfg.p_d, &mut rng)?;
                let decision = match cfg.detector {
                    DetectorKind::Adsv => receiver.as_ref().expect("built above").decide(seen.times(), &mut rng)?,
                    DetectorKind::SyncMl => {
                        baseline_sync_ml_decide(&seen, cfg.scheme.n(), cfg.scheme.t_e(), &derived)?
                    }
                    DetectorKind::TiDistinguishable => baseline_ti_decide(
                        &seen,
                        TiVariant::Distinguishable,
                        Some(seen.molecule_tags()),
                        cfg.scheme.t_e(),
                        derived.sigma2,
                        &mut rng,
                    )?,
                    DetectorKind::TiIndistinguishable => baseline_ti_decide(
                        &seen,
                        TiVariant::Indistinguishable,
                        None,
                        cfg.scheme.t_e(),
                        derived.sigma2,
                        &mut rng,
                    )?,
                };
                errors += u64::from(decision.symbol != symbol);
                degenerate += u64::from(decision.degenerate);
            }
            Ok((errors, degenerate))
        })
        .collect::<Result<Vec<_>>>()?;
    let errors = per_block.iter().map(|b| b.0).sum();
    let degenerate = per_block.iter().map(|b| b.1).sum();
    Ok(ErrorEstimate::from_counts(errors, cfg.n_trials, degenerate))
}

/// Theoretical error probability for the configured receiver.
pub fn theory_for(cfg: &TrialConfig) -> Result<f64> {
    cfg.validate()?;
    let sigma2 = cfg.channel.derive().sigma2;
    let priors = cfg.resolved_priors();
    let t_e = cfg.scheme.t_e();
    match cfg.detector {
        // The statistic is shift invariant, so theta plays no role.
        DetectorKind::Adsv | DetectorKind::TiIndistinguishable => {
            error_probability(&cfg.scheme, sigma2, cfg.p_d, &priors)
        }
        DetectorKind::SyncMl => ber_sync_ml(cfg.scheme.n(), t_e, sigma2, cfg.theta, &priors),
        DetectorKind::TiDistinguishable => ber_ti_distinguishable(t_e, sigma2, cfg.p_d),
    }
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Slot spacing `t_e`.
    Te,
    /// Degradation probability.
    Pd,
    /// Clock offset.
    Theta,
    /// Molecules per symbol. The scheme is rebuilt as `(N, N/2)` for the
    /// variance receiver and as binary PPM for sync ML.
    N,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Te" | "te" => Ok(Self::Te),
            "pd" => Ok(Self::Pd),
            "theta" => Ok(Self::Theta),
            "N" | "n" => Ok(Self::N),
            other => domain(format!("unknown sweep axis '{other}' (expected Te, pd, theta or N)")),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Te => "Te",
            Self::Pd => "pd",
            Self::Theta => "theta",
            Self::N => "N",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub estimate: ErrorEstimate,
    /// Present when the sweep was asked for theory.
    pub theory: Option<f64>,
}

/// `base` with one parameter replaced.
pub fn config_at(base: &TrialConfig, axis: SweepAxis, value: f64) -> Result<TrialConfig> {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::Te => cfg.scheme = base.scheme.with_t_e(value)?,
        SweepAxis::Pd => cfg.p_d = value,
        SweepAxis::Theta => cfg.theta = value,
        SweepAxis::N => {
            if !(value >= 2.0 && value.fract() == 0.0 && value <= f64::from(u32::MAX)) {
                return domain(format!("N must be an integer >= 2, got {value}"));
            }
            let n = value as u32;
            let t_e = base.scheme.t_e();
            cfg.scheme = match base.detector {
                DetectorKind::Adsv if base.scheme.q() == 2 => ModulationScheme::binary(n, n, n / 2, t_e)?,
                DetectorKind::SyncMl => ModulationScheme::conventional_ppm(n, t_e)?,
                _ => return domain(format!("an N sweep is not defined for the {} receiver", base.detector)),
            };
        }
    }
    Ok(cfg)
}

/// Run [`run_trials`] at every value; point `i` uses streams `i << 32` onwards.
pub fn sweep(base: &TrialConfig, axis: SweepAxis, values: &[f64], with_theory: bool) -> Result<Vec<SweepRow>> {
    if base.n_trials.div_ceil(BLOCK_SIZE) >= 1 << 32 {
        return domain("too many trials per sweep point");
    }
    values
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let cfg = config_at(base, axis, value)?;
            let estimate = run_trials_on_streams(&cfg, (i as u64) << 32)?;
            let theory = if with_theory { Some(theory_for(&cfg)?) } else { None };
            Ok(SweepRow { value, estimate, theory })
        })
        .collect()
}
