//! Edge-class proportions computed without the independence shortcut.
//!
//! Given the segment parameters `(a, b)`, interior vertex types along a
//! segment are independent with T probability `q = 2a / S`, but `q` varies
//! from segment to segment. Averaging powers of `q` over the segment
//! population, instead of squaring the conditional mean `p_{T|n}`, gives the
//! exact class proportions implied by the edge lookup table. The sums over
//! the vertex count are done in closed form under the integral.

use serde::{Deserialize, Serialize};

use super::pmf::{closed, denominators};
use super::quad::{quad2d_vec, QuadratureConfig};
use crate::error::AnalyticError;

/// Exact proportions implied by the edge lookup table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixturePredictions {
    pub eps_tt: f64,
    pub eps_xx: f64,
    pub eps_tx: f64,
    /// `[class 1, class 2, class 3]`.
    pub eps_p1: [f64; 3],
    /// `[class 0, class 1, class 2]`.
    pub eps_z1: [f64; 3],
    /// Mean number of P1-class-1 edges at the typical T vertex.
    pub mu_vt_p1_1: f64,
    /// Mean number of P1-class-1 edges at the typical X vertex.
    pub mu_vx_p1_1: f64,
    /// `sum (n - 1) E[q | n] p_n`, the exact value of `sum (n - 1) p_{T|n} p_n`.
    pub t_pair_sum: f64,
    /// Number of XX edges per segment, `P(0), P(1), ...`.
    pub nu_exx: Vec<f64>,
    /// `(1/3) E[nu + 1]`, equal to 1.
    pub completeness: f64,
    pub error_bound: f64,
}

/// Number of XX-count probabilities returned by [`mixture_predictions`].
pub const NU_EXX_BINS: usize = 8;

/// `sum_{n>=1} z^n P(k adjacent XX pairs | n)` for `n` i.i.d. vertex types
/// with T probability `q`.
///
/// Sequences are X runs separated by single T vertices; a run of length
/// `L` holds `L - 1` pairs, which gives a generating function rational in
/// the pair marker.
pub fn xx_count_series(z: f64, q: f64, k: usize) -> f64 {
    let u = z * (1.0 - q);
    let a = 1.0 - z * q * (1.0 + u);
    let b = u * (1.0 - z * q);
    let ki = k as i32;
    let mut c = (1.0 + u) * b.powi(ki) / a.powi(ki + 1);
    if k == 0 {
        c -= 1.0;
    } else {
        c -= u * b.powi(ki - 1) / a.powi(ki);
    }
    c
}

pub fn mixture_predictions(q: &QuadratureConfig) -> Result<MixturePredictions, AnalyticError> {
    let p0 = closed::p0();
    // w G1 and w G2 with w = 3 (1-a)^3 / D, G1 = sum_{n>=1} r^n and
    // G2 = sum_{n>=2} (n-1) r^n, r = S / D
    let edge = quad2d_vec(
        |a, b| {
            let (d, s, _) = denominators(a, b);
            let u = 1.0 - a;
            let g1 = 3.0 * u * u * s / d;
            let g2 = 3.0 * u * s * s / d;
            let t = 2.0 * a / s;
            let x = 1.0 - t;
            [
                2.0 * t * g1 + t * t * g2,             // TT
                x * x * g2,                            // XX
                2.0 * x * g1 + 2.0 * t * x * g2,       // TX
                (t * t / 2.0 + 2.0 * t * x) * g2,      // P1 class 1
                2.0 * g1 + (t * t / 2.0 + x * x) * g2, // P1 class 2
                2.0 * x * g1 + (x * x + 2.0 * t * x + t * t / 2.0) * g2, // Z1 class 0
                2.0 * t * g1 + t * t / 2.0 * g2,       // Z1 class 1
                (t * t + 2.0 * t * x) * g2,            // T vertex, class-1 edges
                2.0 * t * x * g2,                      // X vertex, class-1 edges
                t * g2,                                // (n - 1) q
                2.0 * g1 + g2,                         // n + 1 over n >= 1
            ]
        },
        [0.0, 0.0],
        [1.0, 1.0],
        q,
    )?;
    let v: Vec<f64> = edge.iter().map(|e| e.value).collect();
    let mut error_bound = edge.iter().map(|e| e.error).fold(0.0, f64::max);

    let exx = quad2d_vec(
        |a, b| {
            let (d, s, _) = denominators(a, b);
            let u = 1.0 - a;
            let w = 3.0 * u.powi(3) / d;
            let mut out = [0.0; NU_EXX_BINS];
            for (k, slot) in out.iter_mut().enumerate() {
                *slot = w * xx_count_series(s / d, 2.0 * a / s, k);
            }
            out
        },
        [0.0, 0.0],
        [1.0, 1.0],
        &q.relative_only(),
    )?;
    error_bound = exx.iter().map(|e| e.error).fold(error_bound, f64::max);
    let mut nu_exx: Vec<f64> = exx.iter().map(|e| e.value).collect();
    nu_exx[0] += p0;

    let third = p0 / 3.0;
    Ok(MixturePredictions {
        eps_tt: (p0 + v[0]) / 3.0,
        eps_xx: v[1] / 3.0,
        eps_tx: v[2] / 3.0,
        eps_p1: [v[3] / 3.0, v[4] / 3.0, third],
        eps_z1: [v[5] / 3.0, v[6] / 3.0, third],
        mu_vt_p1_1: v[7],
        mu_vx_p1_1: 2.0 * v[8],
        t_pair_sum: v[9],
        nu_exx,
        completeness: (p0 + v[10]) / 3.0,
        error_bound,
    })
}
