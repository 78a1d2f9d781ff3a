//! One-dimensional diffusion channel with positive drift.
//!
//! A molecule released at `X` arrives at `Y = X + T + theta`, where `T` is
//! the first hitting time (inverse Gaussian with mean `d/v` and shape
//! `d^2/2D`) and `theta` is the unknown receiver clock offset. When
//! `vd >> D` the hitting time is close to normal with variance `2Dd/v^3`.

use crate::error::{domain, Result};
use crate::modulation::ModulationScheme;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Default skewness below which the normal approximation is considered sound.
pub const DEFAULT_NORMAL_SKEW_LIMIT: f64 = 0.3;

/// Physical channel parameters in micrometres and seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Transmitter to receiver distance `d` (um).
    pub distance: f64,
    /// Drift velocity `v` (um/s).
    pub drift: f64,
    /// Diffusion coefficient `D` (um^2/s).
    pub diffusion: f64,
}

/// Propagation-time law derived from [`ChannelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedChannel {
    /// Mean propagation time `d/v` (s).
    pub mu: f64,
    /// Normal-approximation variance `2Dd/v^3` (s^2).
    pub sigma2: f64,
    /// Inverse Gaussian skewness `3 sqrt(2D/(vd))`.
    pub skewness: f64,
    /// Inverse Gaussian shape `d^2/(2D)` (s).
    pub ig_shape: f64,
    /// `skewness` is below the configured limit.
    pub normal_ok: bool,
}

impl ChannelParams {
    pub fn new(distance: f64, drift: f64, diffusion: f64) -> Result<Self> {
        for (name, v) in [("distance d", distance), ("drift v", drift), ("diffusion D", diffusion)] {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        Ok(Self { distance, drift, diffusion })
    }

    /// Hexoses in blood, capillary geometry.
    pub fn capillary() -> Self {
        Self { distance: 7.9e2, drift: 7.9e2, diffusion: 242.78 }
    }

    /// Hexoses in blood, superior vena cava geometry.
    pub fn superior_vena_cava() -> Self {
        Self { distance: 1.2e5, drift: 1.2e5, diffusion: 242.78 }
    }

    /// Look up a preset by name: `capillary` or `svc`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "capillary" => Ok(Self::capillary()),
            "svc" | "superior-vena-cava" => Ok(Self::superior_vena_cava()),
            other => domain(format!("unknown channel preset '{other}' (expected capillary or svc)")),
        }
    }

    pub fn derive(&self) -> DerivedChannel {
        derive_channel_with_limit(self, DEFAULT_NORMAL_SKEW_LIMIT)
    }
}

/// Mean, variance and skewness of the propagation time.
pub fn derive_channel(p: &ChannelParams) -> DerivedChannel {
    p.derive()
}

/// [`derive_channel`] with an explicit skewness limit for `normal_ok`.
pub fn derive_channel_with_limit(p: &ChannelParams, skew_limit: f64) -> DerivedChannel {
    let (d, v, diff) = (p.distance, p.drift, p.diffusion);
    let skewness = 3.0 * (2.0 * diff / (v * d)).sqrt();
    DerivedChannel {
        mu: d / v,
        sigma2: 2.0 * diff * d / (v * v * v),
        skewness,
        ig_shape: d * d / (2.0 * diff),
        normal_ok: skewness < skew_limit,
    }
}

/// Reproducible random stream addressed by `(seed, stream_id)`.
///
/// Backed by ChaCha8; distinct stream ids give independent sequences for
/// the same seed.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Which law the propagation time is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropagationModel {
    InverseGaussian,
    #[default]
    NormalApprox,
}

impl std::str::FromStr for PropagationModel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ig" | "inverse-gaussian" => Ok(Self::InverseGaussian),
            "normal" => Ok(Self::NormalApprox),
            other => domain(format!("unknown propagation model '{other}' (expected normal or ig)")),
        }
    }
}

impl std::fmt::Display for PropagationModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::InverseGaussian => "ig",
            Self::NormalApprox => "normal",
        })
    }
}

/// Source of propagation times.
pub trait PropagationSampler {
    fn sample(&self, rng: &mut RngStream) -> f64;
}

/// Propagation-time sampler for a channel under a chosen model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagation {
    pub model: PropagationModel,
    pub channel: DerivedChannel,
}

impl Propagation {
    pub fn new(params: &ChannelParams, model: PropagationModel) -> Self {
        Self { model, channel: params.derive() }
    }
}

impl PropagationSampler for Propagation {
    fn sample(&self, rng: &mut RngStream) -> f64 {
        sample_propagation_time(&self.channel, self.model, rng)
    }
}

/// One propagation-time draw.
///
/// The normal model is truncated at zero by re-drawing; the inverse
/// Gaussian uses the one-normal, one-uniform transformation method.
pub fn sample_propagation_time(ch: &DerivedChannel, model: PropagationModel, rng: &mut RngStream) -> f64 {
    match model {
        PropagationModel::NormalApprox => {
            let sd = ch.sigma2.sqrt();
            loop {
                let t = ch.mu + sd * rng.standard_normal();
                if t >= 0.0 {
                    return t;
                }
            }
        }
        PropagationModel::InverseGaussian => {
            let (mu, shape) = (ch.mu, ch.ig_shape);
            let n = rng.standard_normal();
            let y = n * n;
            let x = mu + mu * mu * y / (2.0 * shape)
                - mu / (2.0 * shape) * (4.0 * mu * shape * y + mu * mu * y * y).sqrt();
            if rng.uniform() <= mu / (mu + x) {
                x
            } else {
                mu * mu / x
            }
        }
    }
}

/// Arrival timestamps seen by the receiver, plus provenance for oracles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArrivalSet {
    times: Vec<f64>,
    slots: Vec<usize>,
    molecules: Vec<usize>,
}

impl ArrivalSet {
    /// Arrivals without provenance.
    pub fn from_times(times: Vec<f64>) -> Self {
        let n = times.len();
        Self { times, slots: vec![0; n], molecules: (0..n).collect() }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Release slot of each arrival. Oracle bookkeeping; receivers must not use it.
    pub fn released_origin(&self) -> &[usize] {
        &self.slots
    }

    /// Index of each arrival's molecule in the release schedule. Only
    /// meaningful to a receiver when molecules are distinguishable.
    pub fn molecule_tags(&self) -> &[usize] {
        &self.molecules
    }

    /// Every arrival shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            times: self.times.iter().map(|t| t + c).collect(),
            slots: self.slots.clone(),
            molecules: self.molecules.clone(),
        }
    }
}

/// Release the schedule for `symbol` and propagate every molecule.
///
/// Draw order: one propagation draw per molecule, in release order.
pub fn simulate_arrivals<S: PropagationSampler + ?Sized>(
    scheme: &ModulationScheme,
    symbol: usize,
    sampler: &S,
    theta: f64,
    rng: &mut RngStream,
) -> Result<ArrivalSet> {
    let row = scheme.row(symbol)?;
    let n = scheme.n() as usize;
    let mut times = Vec::with_capacity(n);
    let mut slots = Vec::with_capacity(n);
    for (slot, &count) in row.iter().enumerate() {
        let release = scheme.slot_time(slot);
        for _ in 0..count {
            times.push(release + sampler.sample(rng) + theta);
            slots.push(slot);
        }
    }
    Ok(ArrivalSet { times, slots, molecules: (0..n).collect() })
}

/// Drop each arrival independently with probability `p_d`.
///
/// One uniform is drawn per arrival whatever `p_d` is; survivors keep their order.
pub fn apply_degradation(a: &ArrivalSet, p_d: f64, rng: &mut RngStream) -> Result<ArrivalSet> {
    if !(0.0..=1.0).contains(&p_d) {
        return domain(format!("degradation probability must lie in [0, 1], got {p_d}"));
    }
    let mut out = ArrivalSet {
        times: Vec::with_capacity(a.len()),
        slots: Vec::with_capacity(a.len()),
        molecules: Vec::with_capacity(a.len()),
    };
    for i in 0..a.len() {
        if rng.uniform() >= p_d {
            out.times.push(a.times[i]);
            out.slots.push(a.slots[i]);
            out.molecules.push(a.molecules[i]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(f64);

    impl PropagationSampler for Fixed {
        fn sample(&self, _: &mut RngStream) -> f64 {
            self.0
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn capillary_derivation() {
        let ch = derive_channel(&ChannelParams::capillary());
        assert!(rel(ch.mu, 1.0) < 1e-15);
        assert!(rel(ch.sigma2, 7.78017e-4) < 1e-6);
        assert!(rel(ch.skewness, 0.083679) < 1e-5);
        assert!(ch.normal_ok);
    }

    #[test]
    fn svc_derivation() {
        let ch = derive_channel(&ChannelParams::superior_vena_cava());
        assert!(rel(ch.mu, 1.0) < 1e-15);
        assert!(rel(ch.sigma2, 3.37194e-8) < 1e-5);
        assert!(rel(ch.skewness, 5.5094e-4) < 1e-4);
    }

    #[test]
    fn mean_is_one_when_distance_equals_drift() {
        for &(d, diff) in &[(3.0, 0.1), (250.0, 1e3), (1e4, 5.0)] {
            let ch = ChannelParams::new(d, d, diff).unwrap().derive();
            assert_eq!(ch.mu, 1.0);
        }
    }

    #[test]
    fn normal_flag_threshold() {
        let p = ChannelParams::new(1.0, 1.0, 0.1).unwrap();
        let ch = derive_channel_with_limit(&p, 0.3);
        assert!(!ch.normal_ok);
        assert!(derive_channel_with_limit(&p, 2.0).normal_ok);
    }

    #[test]
    fn invalid_params() {
        assert!(ChannelParams::new(1.0, 1.0, 0.0).is_err());
        assert!(ChannelParams::new(-1.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, f64::NAN, 1.0).is_err());
        assert!(ChannelParams::preset("aorta").is_err());
        assert_eq!(ChannelParams::preset("svc").unwrap(), ChannelParams::superior_vena_cava());
    }

    #[test]
    fn streams_reproduce() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        let mut c = RngStream::new(7, 4);
        let xa: Vec<f64> = (0..8).map(|_| a.uniform()).collect();
        let xb: Vec<f64> = (0..8).map(|_| b.uniform()).collect();
        let xc: Vec<f64> = (0..8).map(|_| c.uniform()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn stubbed_arrivals_compose() {
        let s = ModulationScheme::binary(4, 2, 4, 0.1).unwrap();
        let mut rng = RngStream::new(1, 0);
        let a = simulate_arrivals(&s, 0, &Fixed(1.0), 0.5, &mut rng).unwrap();
        assert_eq!(a.times(), &[1.5, 1.5, 1.6, 1.6]);
        assert_eq!(a.released_origin(), &[0, 0, 1, 1]);
    }

    #[test]
    fn arrivals_count_and_shift() {
        let s = ModulationScheme::binary(8, 8, 4, 0.1).unwrap();
        let prop = Propagation::new(&ChannelParams::capillary(), PropagationModel::NormalApprox);
        for symbol in 0..2 {
            let a = simulate_arrivals(&s, symbol, &prop, 0.0, &mut RngStream::new(5, 1)).unwrap();
            let b = simulate_arrivals(&s, symbol, &prop, 0.25, &mut RngStream::new(5, 1)).unwrap();
            assert_eq!(a.len(), 8);
            for (x, y) in a.times().iter().zip(b.times()) {
                assert_eq!(*y, x + 0.25);
            }
        }
        assert!(simulate_arrivals(&s, 2, &prop, 0.0, &mut RngStream::new(5, 1)).is_err());
    }

    #[test]
    fn degradation_extremes() {
        let a = ArrivalSet::from_times(vec![1.0, 2.0, 3.0]);
        let mut rng = RngStream::new(2, 2);
        assert_eq!(apply_degradation(&a, 0.0, &mut rng).unwrap(), a);
        assert!(apply_degradation(&a, 1.0, &mut rng).unwrap().is_empty());
        assert!(apply_degradation(&a, 1.5, &mut rng).is_err());
        assert!(apply_degradation(&a, -0.1, &mut rng).is_err());
    }

    #[test]
    fn degradation_preserves_order() {
        let a = ArrivalSet::from_times((0..50).map(f64::from).collect());
        let b = apply_degradation(&a, 0.5, &mut RngStream::new(9, 0)).unwrap();
        assert!(b.times().windows(2).all(|w| w[0] < w[1]));
        assert!(b.molecule_tags().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ig_sampler_is_positive() {
        let ch = ChannelParams::new(1.0, 1.0, 2.0).unwrap().derive();
        let mut rng = RngStream::new(3, 0);
        for _ in 0..10_000 {
            assert!(sample_propagation_time(&ch, PropagationModel::InverseGaussian, &mut rng) > 0.0);
        }
    }
}
