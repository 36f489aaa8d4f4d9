//! Interior-vertex distributions of the typical I-segment.
//!
//! All integrals live on the unit square with coordinates `(a, b)` and share
//! the denominators
//! `D = 3 - (1 - a)(2 - b)`, `S = D - (1 - a)` and `c = 1 - (1 - a)(1 - b)`,
//! with `S = 2a + c`. A segment parametrized by `(a, b)` carries a Poisson
//! number of interior vertices with success ratio `S / D`, each of T type
//! with probability `2a / S`.

use serde::{Deserialize, Serialize};

use super::quad::{quad1d, quad2d, quad2d_vec, Estimate, QuadratureConfig};
use crate::error::AnalyticError;

const UNIT: ([f64; 2], [f64; 2]) = ([0.0, 0.0], [1.0, 1.0]);

#[inline]
pub(crate) fn denominators(a: f64, b: f64) -> (f64, f64, f64) {
    let u = 1.0 - a;
    let d = 3.0 - u * (2.0 - b);
    let c = 1.0 - u * (1.0 - b);
    (d, d - u, c)
}

/// `ln C(n, k)` by direct summation.
pub(crate) fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// `x^k` with `0^0 = 1`, in log space.
#[inline]
fn ln_pow(x: f64, k: u64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * x.ln()
    }
}

/// Probability that the typical I-segment has exactly `n` interior vertices.
pub fn p_n(n: u32, q: &QuadratureConfig) -> Result<Estimate, AnalyticError> {
    let n = n as f64;
    quad2d(
        |a, b| {
            let (d, _, _) = denominators(a, b);
            let u = 1.0 - a;
            3.0 * u.powi(3) / d * (n * (-u / d).ln_1p()).exp()
        },
        UNIT.0,
        UNIT.1,
        q,
    )
}

/// `sum_k (k / n) p_{k, n-k}`, the numerator of `p_{T|n}`; together with
/// `p_n` in one adaptive pass.
pub fn p_n_with_t_numerator(n: u32, q: &QuadratureConfig) -> Result<[Estimate; 2], AnalyticError> {
    if n == 0 {
        return Err(AnalyticError::InvalidArgument("n must be at least 1".into()));
    }
    let nf = n as f64;
    quad2d_vec(
        |a, b| {
            let (d, _, _) = denominators(a, b);
            let u = 1.0 - a;
            let base = 3.0 * u.powi(3) / d;
            let ln_r = (-u / d).ln_1p();
            let pn = base * (nf * ln_r).exp();
            let num = base * 2.0 * a / d * ((nf - 1.0) * ln_r).exp();
            [pn, num]
        },
        UNIT.0,
        UNIT.1,
        q,
    )
}

/// Probability of exactly `m` T and `j` X interior vertices.
pub fn p_mj(m: u32, j: u32, q: &QuadratureConfig) -> Result<Estimate, AnalyticError> {
    let (m, j) = (m as u64, j as u64);
    let log_const = 3f64.ln() + m as f64 * 2f64.ln() + ln_binomial(m + j, m);
    quad2d(
        |a, b| {
            let (d, _, c) = denominators(a, b);
            let u = 1.0 - a;
            let ln = log_const + 3.0 * u.ln() + ln_pow(a, m) + ln_pow(c, j) - (m + j + 1) as f64 * d.ln();
            ln.exp()
        },
        UNIT.0,
        UNIT.1,
        q,
    )
}

/// Probability of exactly `l` interior T vertices induced from the left and
/// `r` from the right.
pub fn p_lr(l: u32, r: u32, q: &QuadratureConfig) -> Result<Estimate, AnalyticError> {
    let k = (l + r) as u64;
    let log_const = 3f64.ln() + ln_binomial(k, l as u64);
    quad1d(
        |a| {
            let ln = log_const + 3.0 * (1.0 - a).ln() + ln_pow(a, k) - (k + 1) as f64 * (1.0 + a).ln();
            ln.exp()
        },
        0.0,
        1.0,
        q,
    )
}

/// `p_{T|n}` from the collapsed numerator integral.
pub fn p_t_given_n(n: u32, q: &QuadratureConfig) -> Result<Estimate, AnalyticError> {
    let [pn, num] = p_n_with_t_numerator(n, &q.relative_only())?;
    Ok(ratio(num, pn))
}

/// `p_{T|n}` from the explicit sum over `p_{k, n-k}`; practical for small `n`.
pub fn p_t_given_n_by_sum(n: u32, q: &QuadratureConfig) -> Result<Estimate, AnalyticError> {
    if n == 0 {
        return Err(AnalyticError::InvalidArgument("n must be at least 1".into()));
    }
    let mut num = Estimate { value: 0.0, error: 0.0 };
    let mut den = Estimate { value: 0.0, error: 0.0 };
    for k in 0..=n {
        let p = p_mj(k, n - k, q)?;
        num.value += k as f64 / n as f64 * p.value;
        num.error += p.error;
        den.value += p.value;
        den.error += p.error;
    }
    Ok(ratio(num, den))
}

fn ratio(num: Estimate, den: Estimate) -> Estimate {
    let value = num.value / den.value;
    Estimate {
        value,
        error: (num.error + value.abs() * den.error) / den.value,
    }
}

/// Closed-form constants.
pub mod closed {
    use std::f64::consts::LN_2;

    fn ln3() -> f64 {
        3f64.ln()
    }

    /// Probability of no interior vertex.
    pub fn p0() -> f64 {
        189.0 / 8.0 * ln3() - 26.0 * LN_2 - 7.5
    }

    /// Probability of at least one interior T vertex.
    pub fn p_nu_t_positive() -> f64 {
        17.0 - 24.0 * LN_2
    }

    /// Mean number of P1-class-1 edges at the typical T vertex, as stated.
    pub fn mu_vt_p1_1() -> f64 {
        27.0 * ln3() - 28.0 * LN_2 - 9.5
    }

    /// T fraction among interior vertices from the reduced one-dimensional
    /// integral.
    pub fn p_t_reduced() -> f64 {
        3.0 / (1.0 - p0()) * (3.5 + 28.0 / 3.0 * LN_2 - 9.0 * ln3())
    }

    /// The same fraction as a ratio of logarithmic terms.
    pub fn p_t_ratio_form() -> f64 {
        4.0 * (21.0 + 56.0 * LN_2 - 54.0 * ln3()) / (68.0 + 208.0 * LN_2 - 189.0 * ln3())
    }

    /// The printed constant claimed equal to `p0 / 3`; it is not.
    pub fn eps_p1_3_printed_constant() -> f64 {
        68.0 / 8.0 * ln3() - 26.0 / 3.0 * LN_2 - 2.5
    }
}

/// T and X fractions among interior vertices of the typical I-segment with
/// interior vertices, by two independent routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexTypeFractions {
    pub p_t: f64,
    pub p_x: f64,
    /// From the reduced closed-form integral.
    pub p_t_closed: f64,
    /// From the `p_{m,j}` double sum resummed under the integral and
    /// evaluated by quadrature.
    pub p_t_resummed: f64,
    pub error_bound: f64,
}

/// Agreement required between the two routes of [`p_t_overall`].
pub const ROUTE_AGREEMENT: f64 = 1e-6;

pub fn p_t_overall(q: &QuadratureConfig) -> Result<VertexTypeFractions, AnalyticError> {
    // sum_{m,j} m/(m+j) p_{m,j} = 6 * int (1-a)^2 a / D
    let num = quad2d(
        |a, b| {
            let (d, _, _) = denominators(a, b);
            6.0 * (1.0 - a).powi(2) * a / d
        },
        UNIT.0,
        UNIT.1,
        q,
    )?;
    let p0 = p_n(0, q)?;
    let resummed = num.value / (1.0 - p0.value);
    let closed = closed::p_t_reduced();
    let error_bound = (num.error + resummed * p0.error) / (1.0 - p0.value);
    if (resummed - closed).abs() > ROUTE_AGREEMENT {
        return Err(AnalyticError::Inconsistent(format!(
            "p_T closed form {closed} vs resummed series {resummed}"
        )));
    }
    Ok(VertexTypeFractions {
        p_t: closed,
        p_x: 1.0 - closed,
        p_t_closed: closed,
        p_t_resummed: resummed,
        error_bound,
    })
}

/// `P(nu_T >= 1) = 1 - p^{LR}_{0,0}`.
pub fn p_nu_t_positive(q: &QuadratureConfig) -> Result<Estimate, AnalyticError> {
    let e = p_lr(0, 0, q)?;
    Ok(Estimate {
        value: 1.0 - e.value,
        error: e.error,
    })
}

/// Entries indexed by `n` with their quadrature bounds and the mass not
/// covered by the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfTable {
    pub entries: Vec<Estimate>,
    pub deficit: f64,
}

impl PmfTable {
    pub fn from_entries(entries: Vec<Estimate>) -> Self {
        let deficit = 1.0 - entries.iter().map(|e| e.value).sum::<f64>();
        Self { entries, deficit }
    }
}

/// `p_0, ..., p_{n_max}`.
pub fn p_n_table(n_max: u32, q: &QuadratureConfig) -> Result<PmfTable, AnalyticError> {
    let entries = (0..=n_max)
        .map(|n| p_n(n, &q.relative_only()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PmfTable::from_entries(entries))
}
