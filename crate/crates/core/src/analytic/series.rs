//! Truncated series over the number of interior vertices.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pmf::{ln_binomial, p_n, p_n_with_t_numerator};
use super::quad::QuadratureConfig;
use crate::error::AnalyticError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub n_max: usize,
    pub tail_report: bool,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            n_max: 10_000,
            tail_report: true,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<(), AnalyticError> {
        if self.n_max < 100 {
            return Err(AnalyticError::InvalidArgument(format!(
                "series n_max {} is below 100",
                self.n_max
            )));
        }
        Ok(())
    }
}

/// Tail deficit above which series outputs carry a warning.
pub const TAIL_WARNING: f64 = 1e-2;

/// `p_n` and `p_{T|n}` for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSeries {
    pub n_max: usize,
    /// `p[n] = p_n`.
    pub p: Vec<f64>,
    /// `p_t[n] = p_{T|n}`; `p_t[0]` is unused and set to zero.
    pub p_t: Vec<f64>,
    /// Sum of the quadrature error bounds of all `p_n`.
    pub quadrature_error: f64,
}

/// Evaluates the series terms, in parallel when available; the result does
/// not depend on the thread count.
pub fn segment_series(s: &SeriesConfig, q: &QuadratureConfig) -> Result<SegmentSeries, AnalyticError> {
    s.validate()?;
    q.validate()?;
    let rel = q.relative_only();
    let term = |n: usize| -> Result<(f64, f64, f64), AnalyticError> {
        if n == 0 {
            let e = p_n(0, q)?;
            return Ok((e.value, 0.0, e.error));
        }
        let [pn, num] = p_n_with_t_numerator(n as u32, &rel)?;
        Ok((pn.value, num.value / pn.value, pn.error))
    };
    #[cfg(feature = "parallel")]
    let terms: Vec<_> = (0..=s.n_max).into_par_iter().map(term).collect::<Result<_, _>>()?;
    #[cfg(not(feature = "parallel"))]
    let terms: Vec<_> = (0..=s.n_max).map(term).collect::<Result<_, _>>()?;
    Ok(SegmentSeries {
        n_max: s.n_max,
        p: terms.iter().map(|t| t.0).collect(),
        p_t: terms.iter().map(|t| t.1).collect(),
        quadrature_error: terms.iter().map(|t| t.2).sum(),
    })
}

/// Edge proportions by endpoint type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeTypeEps {
    pub tt: f64,
    pub xx: f64,
    pub tx: f64,
}

/// The P1 class proportions `[class 1, class 2, class 3]` under the two
/// readings of which terms belong to classes 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct P1Assignments {
    /// Boundary and single-vertex terms under class 1, as printed.
    pub as_printed: [f64; 3],
    /// Boundary and single-vertex terms under class 2, as the edge lookup
    /// table gives.
    pub figure_consistent: [f64; 3],
}

impl SegmentSeries {
    /// `sum_{n=2}^{n_max} f(n, p_{T|n}) p_n`, summed in index order.
    pub fn sum_from_two(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        (2..=self.n_max).map(|n| f(n as f64, self.p_t[n]) * self.p[n]).sum()
    }

    /// `1 - sum_{n <= n_max} p_n`.
    pub fn tail_deficit(&self) -> f64 {
        1.0 - self.p.iter().sum::<f64>()
    }

    /// `(1/3) sum (n + 1) p_n`, which tends to 1.
    pub fn edge_completeness(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, p)| (n + 1) as f64 * p).sum::<f64>() / 3.0
    }

    pub fn mean_interior_vertices(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn warning(&self) -> Option<String> {
        let d = self.tail_deficit();
        (d > TAIL_WARNING).then(|| format!("series tail deficit {d:.3e} exceeds {TAIL_WARNING:e}"))
    }

    pub fn eps_edge_types(&self) -> EdgeTypeEps {
        let (p0, p1, pt1) = (self.p[0], self.p[1], self.p_t[1]);
        let tt = p0 / 3.0
            + 2.0 / 3.0 * pt1 * p1
            + self.sum_from_two(|n, pt| 2.0 * pt + (n - 1.0) * pt * pt) / 3.0;
        EdgeTypeEps {
            tt,
            xx: tt - 1.0 / 3.0,
            tx: 4.0 / 3.0 - 2.0 * tt,
        }
    }

    pub fn eps_p1(&self) -> P1Assignments {
        let (p0, p1) = (self.p[0], self.p[1]);
        let with_boundary = 2.0 / 3.0 * p1
            + self.sum_from_two(|n, pt| {
                let px = 1.0 - pt;
                2.0 + (n - 1.0) * pt * pt / 2.0 + (n - 1.0) * px * px
            }) / 3.0;
        let interior_only = self.sum_from_two(|n, pt| {
            let px = 1.0 - pt;
            (n - 1.0) * pt * pt / 2.0 + 2.0 * (n - 1.0) * pt * px
        }) / 3.0;
        let third = p0 / 3.0;
        P1Assignments {
            as_printed: [with_boundary, interior_only, third],
            figure_consistent: [interior_only, with_boundary, third],
        }
    }

    /// `[class 0, class 1, class 2]`.
    pub fn eps_z1(&self) -> [f64; 3] {
        let (p0, p1, pt1) = (self.p[0], self.p[1], self.p_t[1]);
        let z0 = 2.0 / 3.0 * p1 * (1.0 - pt1)
            + self.sum_from_two(|n, pt| {
                let px = 1.0 - pt;
                2.0 * px + (n - 1.0) * px * px + 2.0 * (n - 1.0) * pt * px + (n - 1.0) * pt * pt / 2.0
            }) / 3.0;
        let z1 = 2.0 / 3.0 * p1 * pt1 + self.sum_from_two(|n, pt| 2.0 * pt + (n - 1.0) * pt * pt / 2.0) / 3.0;
        [z0, z1, p0 / 3.0]
    }

    /// `sum_{n>=2} (n - 1) p_{T|n} p_n`.
    pub fn t_pair_sum(&self) -> f64 {
        self.sum_from_two(|n, pt| (n - 1.0) * pt)
    }

    /// `sum_{n>=2} (n - 1) p_{T|n} p_{X|n} p_n`.
    pub fn tx_pair_sum(&self) -> f64 {
        self.sum_from_two(|n, pt| (n - 1.0) * pt * (1.0 - pt))
    }

    /// `sum_{n>=2} (n - 1) (p_{T|n}^2 + 2 p_{T|n} p_{X|n}) p_n`, the mean
    /// number of P1-class-1 edges at the typical T vertex when vertex types
    /// on a segment are treated as independent given `n`.
    pub fn t_class_one_sum(&self) -> f64 {
        self.sum_from_two(|n, pt| (n - 1.0) * (pt * pt + 2.0 * pt * (1.0 - pt)))
    }

    /// Distribution of the number of XX edges on the typical I-segment,
    /// `P(0), ..., P(max_count)`, from the product formula that treats
    /// adjacent XX pairs as independent.
    pub fn nu_exx_pmf(&self, max_count: usize) -> Vec<f64> {
        let mut out = vec![0.0; max_count + 1];
        out[0] = self.p[0] + self.p[1];
        for n in 2..=self.n_max {
            let px2 = (1.0 - self.p_t[n]).powi(2);
            let pairs = (n - 1) as u64;
            for (k, slot) in out.iter_mut().enumerate() {
                let k = k as u64;
                if k > pairs {
                    break;
                }
                let ln = ln_binomial(pairs, k) + k as f64 * px2.ln() + (pairs - k) as f64 * (-px2).ln_1p();
                *slot += ln.exp() * self.p[n];
            }
        }
        out
    }
}

/// Truncated `epsilon_{E[TT]}, epsilon_{E[XX]}, epsilon_{E[TX]}`.
pub fn epsilon_edge_types(s: &SeriesConfig, q: &QuadratureConfig) -> Result<EdgeTypeEps, AnalyticError> {
    Ok(segment_series(s, q)?.eps_edge_types())
}

pub fn epsilon_p1(s: &SeriesConfig, q: &QuadratureConfig) -> Result<P1Assignments, AnalyticError> {
    Ok(segment_series(s, q)?.eps_p1())
}

pub fn epsilon_z1(s: &SeriesConfig, q: &QuadratureConfig) -> Result<[f64; 3], AnalyticError> {
    Ok(segment_series(s, q)?.eps_z1())
}

pub fn nu_exx_pmf(max_count: usize, s: &SeriesConfig, q: &QuadratureConfig) -> Result<Vec<f64>, AnalyticError> {
    Ok(segment_series(s, q)?.nu_exx_pmf(max_count))
}
