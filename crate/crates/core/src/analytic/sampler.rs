//! Direct Monte Carlo draws of the typical I-segment from its length and
//! birth-time density.

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::AnalyticError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalSegment {
    pub length: f64,
    pub birth: f64,
    /// Interior T vertices induced from the left.
    pub left: u64,
    /// Interior T vertices induced from the right.
    pub right: u64,
}

impl TypicalSegment {
    pub fn t_count(&self) -> u64 {
        self.left + self.right
    }
}

fn poisson(mean: f64, rng: &mut impl Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map_or(0, |d| d.sample(rng) as u64)
}

/// Draws one typical I-segment of a tessellation observed at time `t`.
pub fn sample_typical_segment(t: f64, rng: &mut impl Rng) -> Result<TypicalSegment, AnalyticError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(AnalyticError::InvalidArgument(format!("time {t} must be positive")));
    }
    let u: f64 = rng.random();
    let birth = t * u.cbrt();
    let length = Exp::new(birth / 2.0)
        .map_err(|e| AnalyticError::InvalidArgument(e.to_string()))?
        .sample(rng);
    let mean = length * (t - birth) / 2.0;
    Ok(TypicalSegment {
        length,
        birth,
        left: poisson(mean, rng),
        right: poisson(mean, rng),
    })
}

/// Empirical frequencies collected from repeated draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSampleSummary {
    pub draws: u64,
    /// `t_counts[m]` draws with `m` interior T vertices, the last bin
    /// collecting everything above.
    pub t_counts: Vec<u64>,
    /// `lr_counts[l][r]` for `l, r < lr_counts.len()`.
    pub lr_counts: Vec<Vec<u64>>,
    pub t_total: u64,
    pub t_sq_total: f64,
    pub left_total: u64,
    /// Per-draw left fractions among segments with at least one T vertex.
    pub left_fraction_sum: f64,
    pub left_fraction_sq_sum: f64,
    pub segments_with_t: u64,
    pub length_sum: f64,
    pub birth_sum: f64,
}

impl SegmentSampleSummary {
    pub fn new(max_t: usize, max_lr: usize) -> Self {
        Self {
            draws: 0,
            t_counts: vec![0; max_t + 2],
            lr_counts: vec![vec![0; max_lr + 1]; max_lr + 1],
            t_total: 0,
            t_sq_total: 0.0,
            left_total: 0,
            left_fraction_sum: 0.0,
            left_fraction_sq_sum: 0.0,
            segments_with_t: 0,
            length_sum: 0.0,
            birth_sum: 0.0,
        }
    }

    pub fn record(&mut self, s: &TypicalSegment) {
        self.draws += 1;
        let m = s.t_count() as usize;
        let last = self.t_counts.len() - 1;
        self.t_counts[m.min(last)] += 1;
        let (l, r) = (s.left as usize, s.right as usize);
        if l < self.lr_counts.len() && r < self.lr_counts.len() {
            self.lr_counts[l][r] += 1;
        }
        self.t_total += s.t_count();
        self.t_sq_total += (s.t_count() as f64).powi(2);
        self.left_total += s.left;
        if m > 0 {
            let f = s.left as f64 / m as f64;
            self.segments_with_t += 1;
            self.left_fraction_sum += f;
            self.left_fraction_sq_sum += f * f;
        }
        self.length_sum += s.length;
        self.birth_sum += s.birth;
    }

    /// Proportion of draws in a bin and its binomial standard error.
    pub fn proportion(&self, count: u64) -> (f64, f64) {
        let n = self.draws as f64;
        let p = count as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }

    /// Mean left fraction among segments with interior T vertices and its
    /// standard error.
    pub fn left_fraction(&self) -> (f64, f64) {
        let n = self.segments_with_t as f64;
        let mean = self.left_fraction_sum / n;
        let var = (self.left_fraction_sq_sum / n - mean * mean) * n / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    /// Mean number of interior T vertices and its standard error.
    pub fn mean_t_count(&self) -> (f64, f64) {
        let n = self.draws as f64;
        let mean = self.t_total as f64 / n;
        let var = (self.t_sq_total / n - mean * mean) * n / (n - 1.0);
        (mean, (var / n).sqrt())
    }
}

/// Draws `count` segments and summarizes them.
pub fn sample_summary(
    t: f64,
    count: u64,
    max_t: usize,
    max_lr: usize,
    rng: &mut impl Rng,
) -> Result<SegmentSampleSummary, AnalyticError> {
    let mut s = SegmentSampleSummary::new(max_t, max_lr);
    for _ in 0..count {
        s.record(&sample_typical_segment(t, rng)?);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_non_positive_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_typical_segment(0.0, &mut rng).is_err());
        assert!(sample_typical_segment(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn birth_is_below_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let s = sample_typical_segment(3.0, &mut rng).unwrap();
            assert!(s.birth > 0.0 && s.birth <= 3.0 && s.length > 0.0);
        }
    }

    #[test]
    fn vertex_counts_do_not_depend_on_time() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = sample_typical_segment(1.0, &mut a).unwrap();
            let y = sample_typical_segment(7.0, &mut b).unwrap();
            assert_eq!((x.left, x.right), (y.left, y.right));
        }
    }
}
