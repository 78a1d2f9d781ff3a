//! Time-based modulation schemes: how many molecules each symbol releases
//! in each time slot.

use crate::error::{domain, Error, Result};

/// A `q`-ary scheme. Symbol `b` releases `counts[b][j]` molecules at time
/// `j * t_e`; every row releases the same total `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationScheme {
    t_e: f64,
    counts: Vec<Vec<u32>>,
    n: u32,
}

/// Noncentrality and degrees of freedom of the sample-variance statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noncentrality {
    pub lambda: f64,
    pub dof: u32,
}

impl ModulationScheme {
    /// Build a scheme whose symbols are distinguishable by the noiseless
    /// statistic: rows must give pairwise distinct noncentralities, which
    /// rules out repeated rows and time-reversed pairs.
    pub fn new(t_e: f64, counts: Vec<Vec<u32>>) -> Result<Self> {
        let s = Self::new_permissive(t_e, counts)?;
        if s.q() != s.slots() {
            return domain(format!(
                "a {q}-ary scheme needs {q} slots per row, got {}",
                s.slots(),
                q = s.q()
            ));
        }
        let spreads: Vec<u64> = s.counts.iter().map(|r| spread(r)).collect();
        for a in 0..s.q() {
            for b in a + 1..s.q() {
                if spreads[a] == spreads[b] {
                    return Err(Error::DegenerateScheme(format!(
                        "symbols {a} {:?} and {b} {:?} have the same noncentrality",
                        s.counts[a], s.counts[b]
                    )));
                }
            }
        }
        Ok(s)
    }

    /// Structural checks only: at least two rows of equal length (at least
    /// two slots), equal totals of at least two molecules, and `t_e > 0`.
    pub fn new_permissive(t_e: f64, counts: Vec<Vec<u32>>) -> Result<Self> {
        if !(t_e.is_finite() && t_e > 0.0) {
            return domain(format!("slot spacing t_e must be finite and > 0, got {t_e}"));
        }
        if counts.len() < 2 {
            return domain(format!("a scheme needs at least 2 symbols, got {}", counts.len()));
        }
        let slots = counts[0].len();
        if slots < 2 {
            return domain("each row needs at least 2 slots");
        }
        if let Some(r) = counts.iter().find(|r| r.len() != slots) {
            return domain(format!("row {r:?} has {} slots, expected {slots}", r.len()));
        }
        let n: u32 = counts[0].iter().sum();
        if n < 2 {
            return domain(format!("each symbol must release at least 2 molecules, got {n}"));
        }
        if let Some(r) = counts.iter().find(|r| r.iter().sum::<u32>() != n) {
            return domain(format!("row {r:?} does not release {n} molecules"));
        }
        Ok(Self { t_e, counts, n })
    }

    /// Binary scheme `[(n0, n - n0), (n1, n - n1)]`.
    pub fn binary(n: u32, n0: u32, n1: u32, t_e: f64) -> Result<Self> {
        if n0 > n || n1 > n {
            return domain(format!("split ({n0}, {n1}) exceeds N = {n}"));
        }
        if n1 == n0 || n1 == n - n0 {
            return Err(Error::DegenerateScheme(format!(
                "split ({n0}, {n1}) with N = {n} gives equal noncentralities"
            )));
        }
        Self::new(t_e, vec![vec![n0, n - n0], vec![n1, n - n1]])
    }

    /// Binary pulse position modulation: all `n` molecules in slot 0 or slot 1.
    pub fn conventional_ppm(n: u32, t_e: f64) -> Result<Self> {
        Self::new_permissive(t_e, vec![vec![n, 0], vec![0, n]])
    }

    /// Same counts, new slot spacing.
    pub fn with_t_e(&self, t_e: f64) -> Result<Self> {
        Self::new_permissive(t_e, self.counts.clone())
    }

    pub fn q(&self) -> usize {
        self.counts.len()
    }

    pub fn slots(&self) -> usize {
        self.counts[0].len()
    }

    /// Molecules released per symbol.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn t_e(&self) -> f64 {
        self.t_e
    }

    pub fn counts(&self) -> &[Vec<u32>] {
        &self.counts
    }

    pub fn row(&self, symbol: usize) -> Result<&[u32]> {
        self.counts
            .get(symbol)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Domain(format!("symbol {symbol} out of range for q = {}", self.q())))
    }

    /// Release time of slot `j`.
    pub fn slot_time(&self, j: usize) -> f64 {
        j as f64 * self.t_e
    }

    /// Release time of every molecule of `symbol`, slot by slot.
    pub fn release_times(&self, symbol: usize) -> Result<Vec<f64>> {
        let row = self.row(symbol)?;
        Ok(row
            .iter()
            .enumerate()
            .flat_map(|(j, &c)| std::iter::repeat_n(self.slot_time(j), c as usize))
            .collect())
    }

    /// Noiseless noncentrality of `symbol`.
    pub fn noncentrality(&self, symbol: usize, sigma2: f64) -> Result<Noncentrality> {
        noncentrality_from_counts(self.row(symbol)?, self.t_e, sigma2)
    }
}

/// `sum_{i<j} k_i k_j (j - i)^2`, exact.
pub(crate) fn spread(k: &[u32]) -> u64 {
    let mut s = 0u64;
    for j in 1..k.len() {
        for i in 0..j {
            let d = (j - i) as u64;
            s += u64::from(k[j]) * u64::from(k[i]) * d * d;
        }
    }
    s
}

/// Noncentrality of `(M-1) S^2 / sigma^2` when `k[j]` of the `M = sum k`
/// observed molecules were released in slot `j`.
pub fn noncentrality_from_counts(k: &[u32], t_e: f64, sigma2: f64) -> Result<Noncentrality> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return domain(format!("sigma^2 must be finite and > 0, got {sigma2}"));
    }
    if !(t_e.is_finite() && t_e > 0.0) {
        return domain(format!("t_e must be finite and > 0, got {t_e}"));
    }
    let m: u32 = k.iter().sum();
    if m < 2 {
        return Err(Error::InsufficientSamples { min: 2, got: m as usize });
    }
    Ok(Noncentrality { lambda: lambda_unchecked(spread(k), m, t_e, sigma2), dof: m - 1 })
}

pub(crate) fn lambda_unchecked(spread: u64, m: u32, t_e: f64, sigma2: f64) -> f64 {
    spread as f64 * t_e * t_e / (f64::from(m) * sigma2)
}
