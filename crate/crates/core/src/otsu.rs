//! Multilevel Otsu objective: between-class variance of the classes induced by a
//! set of thresholds, plus an exhaustive search used to certify optimizer output.
//!
//! Thresholds are class lower bounds. With `m` thresholds `t_1 < … < t_m`, class
//! `C_k` covers gray levels `[t_k, t_{k+1} - 1]` where `t_0 = 0` and `t_{m+1} = 256`.
//! A class with zero probability mass contributes nothing to the objective.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::{Histogram, LEVELS};

/// Largest threshold count accepted by [`ThresholdSet`].
pub const MAX_THRESHOLDS: usize = 8;
/// Largest threshold count the exhaustive search will attempt.
pub const MAX_EXHAUSTIVE: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OtsuError {
    #[error("invalid threshold set: {0}")]
    InvalidThresholds(String),
    #[error("exhaustive search is limited to m <= {MAX_EXHAUSTIVE}, got m = {0}")]
    MTooLarge(usize),
}

/// Strictly increasing thresholds, each in `[1, 255]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct ThresholdSet(Vec<u8>);

impl ThresholdSet {
    pub fn new(thresholds: Vec<u8>) -> Result<Self, OtsuError> {
        if thresholds.is_empty() || thresholds.len() > MAX_THRESHOLDS {
            return Err(OtsuError::InvalidThresholds(format!(
                "need between 1 and {MAX_THRESHOLDS} thresholds, got {}",
                thresholds.len()
            )));
        }
        if thresholds[0] == 0 {
            return Err(OtsuError::InvalidThresholds("threshold 0 is out of range".into()));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(OtsuError::InvalidThresholds(format!(
                "{thresholds:?} is not strictly increasing"
            )));
        }
        Ok(Self(thresholds))
    }

    /// Maps a continuous search position onto a threshold set: round to the nearest
    /// level, clamp to `[1, 255]`, sort, and collapse duplicates.
    pub fn from_relaxed(position: &[f64]) -> Result<Self, OtsuError> {
        let mut levels: Vec<u8> = position
            .iter()
            .map(|&x| {
                let x = if x.is_nan() { 1.0 } else { x };
                x.round().clamp(1.0, (LEVELS - 1) as f64) as u8
            })
            .collect();
        levels.sort_unstable();
        levels.dedup();
        Self::new(levels)
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Threshold count `m`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.0.len() + 1
    }

    /// Half-open gray-level range `[lo, hi)` of class `k`.
    pub fn class_range(&self, k: usize) -> (usize, usize) {
        let lo = if k == 0 { 0 } else { self.0[k - 1] as usize };
        let hi = self.0.get(k).map_or(LEVELS, |&t| t as usize);
        (lo, hi)
    }

    /// Index of the class containing `level`.
    pub fn class_of(&self, level: u8) -> usize {
        self.0.partition_point(|&t| t <= level)
    }
}

impl TryFrom<Vec<u8>> for ThresholdSet {
    type Error = OtsuError;

    fn try_from(v: Vec<u8>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ThresholdSet> for Vec<u8> {
    fn from(t: ThresholdSet) -> Self {
        t.0
    }
}

impl fmt::Display for ThresholdSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Per-class probability, mean and variance term.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    /// Class probabilities `ω_k`.
    pub weights: Vec<f64>,
    /// Class means `μ_k`; `None` for empty classes.
    pub means: Vec<Option<f64>>,
    /// Whole-image mean `μ_T`.
    pub global_mean: f64,
    /// `ω_k (μ_k - μ_T)^2`, zero for empty classes.
    pub variance_terms: Vec<f64>,
}

impl ClassStats {
    pub fn between_class_variance(&self) -> f64 {
        self.variance_terms.iter().sum()
    }
}

pub fn class_stats(hist: &Histogram, ts: &ThresholdSet) -> ClassStats {
    let p = hist.probabilities();
    let global_mean: f64 = p.iter().enumerate().map(|(i, &pi)| i as f64 * pi).sum();
    let classes = ts.class_count();
    let mut weights = Vec::with_capacity(classes);
    let mut means = Vec::with_capacity(classes);
    let mut variance_terms = Vec::with_capacity(classes);
    for k in 0..classes {
        let (lo, hi) = ts.class_range(k);
        let w: f64 = p[lo..hi].iter().sum();
        let first_moment: f64 = (lo..hi).map(|i| i as f64 * p[i]).sum();
        weights.push(w);
        if w > 0.0 {
            let mu = first_moment / w;
            means.push(Some(mu));
            variance_terms.push(w * (mu - global_mean).powi(2));
        } else {
            means.push(None);
            variance_terms.push(0.0);
        }
    }
    ClassStats { weights, means, global_mean, variance_terms }
}

/// `J = Σ_k ω_k (μ_k - μ_T)^2`.
pub fn between_class_variance(hist: &Histogram, ts: &ThresholdSet) -> f64 {
    class_stats(hist, ts).between_class_variance()
}

/// Cumulative zeroth and first moments of a histogram, for O(m) objective evaluation.
#[derive(Debug, Clone)]
pub struct CumulativeMoments {
    // cum_p[i] = Σ_{j < i} P_j
    cum_p: Vec<f64>,
    // cum_ip[i] = Σ_{j < i} j P_j
    cum_ip: Vec<f64>,
}

impl CumulativeMoments {
    pub fn new(hist: &Histogram) -> Self {
        let p = hist.probabilities();
        let mut cum_p = Vec::with_capacity(LEVELS + 1);
        let mut cum_ip = Vec::with_capacity(LEVELS + 1);
        let (mut a, mut b) = (0.0, 0.0);
        cum_p.push(a);
        cum_ip.push(b);
        for (i, &pi) in p.iter().enumerate() {
            a += pi;
            b += i as f64 * pi;
            cum_p.push(a);
            cum_ip.push(b);
        }
        Self { cum_p, cum_ip }
    }

    pub fn global_mean(&self) -> f64 {
        self.cum_ip[LEVELS]
    }

    /// Variance term of the class covering levels `[lo, hi)`.
    #[inline]
    pub fn class_term(&self, lo: usize, hi: usize) -> f64 {
        let w = self.cum_p[hi] - self.cum_p[lo];
        if w <= 0.0 {
            return 0.0;
        }
        let mu = (self.cum_ip[hi] - self.cum_ip[lo]) / w;
        let d = mu - self.global_mean();
        w * d * d
    }

    /// Between-class variance for strictly increasing thresholds in `[1, 255]`.
    pub fn objective(&self, thresholds: &[u8]) -> f64 {
        let mut lo = 0;
        let mut j = 0.0;
        for &t in thresholds {
            j += self.class_term(lo, t as usize);
            lo = t as usize;
        }
        j + self.class_term(lo, LEVELS)
    }
}

/// Histogram-backed evaluator for the optimizer: a continuous position is mapped
/// through [`ThresholdSet::from_relaxed`] and scored by between-class variance.
#[derive(Debug, Clone)]
pub struct ThresholdObjective {
    moments: CumulativeMoments,
}

impl ThresholdObjective {
    pub fn new(hist: &Histogram) -> Self {
        Self { moments: CumulativeMoments::new(hist) }
    }

    pub fn evaluate(&self, position: &[f64]) -> f64 {
        match ThresholdSet::from_relaxed(position) {
            Ok(ts) => self.moments.objective(ts.as_slice()),
            Err(_) => 0.0,
        }
    }
}

impl crate::bfo::Objective for ThresholdObjective {
    fn evaluate(&self, position: &[f64]) -> f64 {
        ThresholdObjective::evaluate(self, position)
    }
}

/// Enumerates every strictly increasing threshold vector of length `m` and returns the
/// lexicographically smallest one attaining the maximum between-class variance.
pub fn exhaustive_search(hist: &Histogram, m: usize) -> Result<(ThresholdSet, f64), OtsuError> {
    if m == 0 {
        return Err(OtsuError::InvalidThresholds("m must be at least 1".into()));
    }
    if m > MAX_EXHAUSTIVE {
        return Err(OtsuError::MTooLarge(m));
    }
    let moments = CumulativeMoments::new(hist);
    let mut search = Search {
        moments: &moments,
        m,
        current: Vec::with_capacity(m),
        best: Vec::new(),
        best_j: f64::NEG_INFINITY,
    };
    search.descend(1, 0.0);
    let best = ThresholdSet::new(search.best.iter().map(|&t| t as u8).collect())?;
    Ok((best, search.best_j))
}

struct Search<'a> {
    moments: &'a CumulativeMoments,
    m: usize,
    current: Vec<usize>,
    best: Vec<usize>,
    best_j: f64,
}

impl Search<'_> {
    // `partial` holds the terms of every class closed so far.
    fn descend(&mut self, start: usize, partial: f64) {
        let lo = self.current.last().copied().unwrap_or(0);
        let remaining = self.m - self.current.len();
        // leave room for the thresholds still to place
        let last = LEVELS - remaining;
        if remaining == 1 {
            for t in start..=last {
                let j = partial + self.moments.class_term(lo, t) + self.moments.class_term(t, LEVELS);
                // strict comparison keeps the first (lexicographically smallest) maximizer
                if j > self.best_j {
                    self.best_j = j;
                    self.best.clear();
                    self.best.extend_from_slice(&self.current);
                    self.best.push(t);
                }
            }
            return;
        }
        for t in start..=last {
            let closed = partial + self.moments.class_term(lo, t);
            self.current.push(t);
            self.descend(t + 1, closed);
            self.current.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(pairs: &[(usize, u64)]) -> Histogram {
        let mut c = [0u64; LEVELS];
        for &(i, n) in pairs {
            c[i] = n;
        }
        Histogram::from_counts(c).unwrap()
    }

    fn ts(v: &[u8]) -> ThresholdSet {
        ThresholdSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn threshold_set_validation() {
        assert!(ThresholdSet::new(vec![]).is_err());
        assert!(ThresholdSet::new(vec![0]).is_err());
        assert!(ThresholdSet::new(vec![5, 5]).is_err());
        assert!(ThresholdSet::new(vec![9, 5]).is_err());
        assert!(ThresholdSet::new((1..=9).collect()).is_err());
        assert!(ThresholdSet::new(vec![1, 255]).is_ok());
    }

    #[test]
    fn relaxed_positions_round_sort_and_dedup() {
        assert_eq!(ThresholdSet::from_relaxed(&[80.4, 20.6, 21.2]).unwrap(), ts(&[21, 80]));
        assert_eq!(ThresholdSet::from_relaxed(&[-3.0, 400.0]).unwrap(), ts(&[1, 255]));
    }

    #[test]
    fn class_membership_is_lower_inclusive() {
        let t = ts(&[10, 20]);
        assert_eq!(t.class_of(9), 0);
        assert_eq!(t.class_of(10), 1);
        assert_eq!(t.class_of(19), 1);
        assert_eq!(t.class_of(20), 2);
        assert_eq!(t.class_of(255), 2);
        assert_eq!(t.class_range(2), (20, 256));
    }

    #[test]
    fn two_spike_stats() {
        let h = hist(&[(0, 5), (3, 5)]);
        for t in [[2u8], [1]] {
            let s = class_stats(&h, &ts(&t));
            assert_eq!(s.weights, vec![0.5, 0.5]);
            assert_eq!(s.means, vec![Some(0.0), Some(3.0)]);
            assert_eq!(s.global_mean, 1.5);
        }
        assert!((between_class_variance(&h, &ts(&[2])) - 2.25).abs() < 1e-12);
    }

    #[test]
    fn empty_class_contributes_zero() {
        let h = hist(&[(0, 5), (3, 5)]);
        let s = class_stats(&h, &ts(&[1, 2]));
        assert_eq!(s.weights[1], 0.0);
        assert_eq!(s.means[1], None);
        assert_eq!(s.variance_terms[1], 0.0);
        assert!((s.between_class_variance() - 2.25).abs() < 1e-12);
    }

    #[test]
    fn constant_histogram_has_zero_objective() {
        let h = hist(&[(7, 9)]);
        for t in [&[1u8][..], &[7], &[8], &[3, 100, 200]] {
            assert_eq!(between_class_variance(&h, &ts(t)), 0.0);
        }
    }

    #[test]
    fn hand_evaluated_three_bin_case() {
        // P = [0.4, 0.1, 0, 0.5]; μ_T = 1.6
        // t = 2: ω0 = 0.5, μ0 = 0.2; ω1 = 0.5, μ1 = 3
        // J = 0.5 (1.4)^2 + 0.5 (1.4)^2 = 1.96
        let h = hist(&[(0, 4), (1, 1), (3, 5)]);
        assert!((between_class_variance(&h, &ts(&[2])) - 1.96).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_tie_breaks_lexicographically() {
        let (t, j) = exhaustive_search(&hist(&[(0, 5), (3, 5)]), 1).unwrap();
        assert_eq!(t, ts(&[1]));
        assert!((j - 2.25).abs() < 1e-12);

        let (t, j) = exhaustive_search(&hist(&[(0, 4), (1, 1), (3, 5)]), 1).unwrap();
        assert_eq!(t, ts(&[2]));
        assert!((j - 1.96).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_rejects_large_m() {
        let h = hist(&[(0, 1), (9, 1)]);
        assert_eq!(exhaustive_search(&h, 5).unwrap_err(), OtsuError::MTooLarge(5));
        assert!(exhaustive_search(&h, 0).is_err());
    }

    #[test]
    fn cumulative_and_direct_objectives_agree() {
        let h = hist(&[(3, 7), (40, 2), (41, 9), (100, 4), (200, 11), (255, 3)]);
        for t in [&[1u8][..], &[41], &[50, 150], &[4, 41, 101, 255]] {
            let a = between_class_variance(&h, &ts(t));
            let b = CumulativeMoments::new(&h).objective(t);
            assert!((a - b).abs() < 1e-9 * a.max(1.0), "{t:?}: {a} vs {b}");
        }
    }

    #[test]
    fn threshold_set_serde_validates() {
        let t: ThresholdSet = serde_json::from_str("[3, 9]").unwrap();
        assert_eq!(t, ts(&[3, 9]));
        assert!(serde_json::from_str::<ThresholdSet>("[9, 3]").is_err());
        assert_eq!(serde_json::to_string(&t).unwrap(), "[3,9]");
    }
}
