//! Adaptive Gauss-Kronrod quadrature in one and two dimensions.
//!
//! Both integrators are globally adaptive: the region with the largest error
//! estimate is bisected until the summed estimate meets
//! `max(abs_tol, rel_tol * |I|)`. The 2D rule is the tensor product of the
//! 7-point Gauss / 15-point Kronrod pair; the error of a rectangle is
//! `|K x K - G x G|` and the split axis is the one whose Gauss/Kronrod
//! discrepancy is larger.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::AnalyticError;

/// Kronrod abscissae on `[-1, 1]`, non-negative half, descending.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15 nodes on `[-1, 1]` with Kronrod and Gauss weights (Gauss weight 0
/// for Kronrod-only nodes).
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for i in 0..7 {
        let g = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        out[i] = (-XGK[i], WGK[i], g);
        out[14 - i] = (XGK[i], WGK[i], g);
    }
    out[7] = (0.0, WGK[7], WG[3]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_depth: 30,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), AnalyticError> {
        if !(self.abs_tol > 0.0 || self.rel_tol > 0.0) || self.abs_tol < 0.0 || self.rel_tol < 0.0
        {
            return Err(AnalyticError::InvalidArgument(
                "quadrature tolerances must be non-negative and not both zero".into(),
            ));
        }
        if self.max_depth == 0 || self.max_depth > 30 {
            return Err(AnalyticError::InvalidArgument(format!(
                "max_depth {} outside 1..=30",
                self.max_depth
            )));
        }
        Ok(())
    }

    /// Same limits with a purely relative target; used for series terms that
    /// are far below `abs_tol`.
    pub fn relative_only(&self) -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: self.rel_tol,
            max_depth: self.max_depth,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Upper bound on the number of rule applications per integral.
const MAX_REGIONS: usize = 1 << 18;

struct Region<const N: usize> {
    lo: [f64; 2],
    hi: [f64; 2],
    depth: u32,
    value: [f64; N],
    error: [f64; N],
    split_axis: usize,
    priority: f64,
}

impl<const N: usize> PartialEq for Region<N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl<const N: usize> Eq for Region<N> {}
impl<const N: usize> PartialOrd for Region<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Region<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn apply_rule_2d<const N: usize, F>(f: &F, lo: [f64; 2], hi: [f64; 2]) -> ([f64; N], [f64; N], usize)
where
    F: Fn(f64, f64) -> [f64; N],
{
    let r = rule();
    let ca = 0.5 * (lo[0] + hi[0]);
    let ha = 0.5 * (hi[0] - lo[0]);
    let cb = 0.5 * (lo[1] + hi[1]);
    let hb = 0.5 * (hi[1] - lo[1]);
    let mut kk = [0.0; N];
    let mut gg = [0.0; N];
    let mut gk = [0.0; N];
    let mut kg = [0.0; N];
    for &(xa, wka, wga) in &r {
        let a = ca + ha * xa;
        for &(xb, wkb, wgb) in &r {
            let v = f(a, cb + hb * xb);
            for c in 0..N {
                kk[c] += wka * wkb * v[c];
                gg[c] += wga * wgb * v[c];
                gk[c] += wga * wkb * v[c];
                kg[c] += wka * wgb * v[c];
            }
        }
    }
    let scale = ha * hb;
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let (mut err_a, mut err_b) = (0.0f64, 0.0f64);
    for c in 0..N {
        value[c] = kk[c] * scale;
        error[c] = ((kk[c] - gg[c]) * scale).abs();
        err_a = err_a.max(((kk[c] - gk[c]) * scale).abs());
        err_b = err_b.max(((kk[c] - kg[c]) * scale).abs());
    }
    (value, error, if err_a >= err_b { 0 } else { 1 })
}

/// Integrates a vector-valued `f` over the rectangle `[lo, hi]`, refining
/// until every component meets the tolerance.
pub fn quad2d_vec<const N: usize, F>(
    f: F,
    lo: [f64; 2],
    hi: [f64; 2],
    cfg: &QuadratureConfig,
) -> Result<[Estimate; N], AnalyticError>
where
    F: Fn(f64, f64) -> [f64; N],
{
    cfg.validate()?;
    let (value, error, axis) = apply_rule_2d(&f, lo, hi);
    // per-component scale so that components of different magnitude compete fairly
    let mut scale = [0.0; N];
    for c in 0..N {
        scale[c] = value[c].abs().max(error[c]).max(f64::MIN_POSITIVE);
    }
    let priority = |e: &[f64; N]| (0..N).map(|c| e[c] / scale[c]).fold(0.0, f64::max);
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Region {
        lo,
        hi,
        depth: 0,
        value,
        error,
        split_axis: axis,
        priority: priority(&error),
    });
    let mut evaluations = 1usize;
    loop {
        let converged = (0..N).all(|c| total_err[c] <= cfg.target(total[c]));
        if converged {
            break;
        }
        let worst = heap.pop().expect("heap never empties");
        if worst.depth >= cfg.max_depth || evaluations >= MAX_REGIONS {
            heap.push(worst);
            let (value, bound) = sum_regions(&heap);
            let c = (0..N)
                .max_by(|&i, &j| {
                    (bound[i] / cfg.target(value[i]).max(f64::MIN_POSITIVE))
                        .total_cmp(&(bound[j] / cfg.target(value[j]).max(f64::MIN_POSITIVE)))
                })
                .unwrap_or(0);
            return Err(AnalyticError::DepthExhausted {
                value: value[c],
                bound: bound[c],
            });
        }
        let ax = worst.split_axis;
        let mid = 0.5 * (worst.lo[ax] + worst.hi[ax]);
        let mut hi1 = worst.hi;
        hi1[ax] = mid;
        let mut lo2 = worst.lo;
        lo2[ax] = mid;
        for c in 0..N {
            total[c] -= worst.value[c];
            total_err[c] -= worst.error[c];
        }
        for (l, h) in [(worst.lo, hi1), (lo2, worst.hi)] {
            let (value, error, axis) = apply_rule_2d(&f, l, h);
            evaluations += 1;
            for c in 0..N {
                total[c] += value[c];
                total_err[c] += error[c];
            }
            heap.push(Region {
                lo: l,
                hi: h,
                depth: worst.depth + 1,
                value,
                error,
                split_axis: axis,
                priority: priority(&error),
            });
        }
        // running sums drift; refresh them now and then
        if evaluations.is_multiple_of(512) {
            (total, total_err) = sum_regions(&heap);
        }
    }
    let (value, error) = sum_regions(&heap);
    Ok(std::array::from_fn(|c| Estimate {
        value: value[c],
        error: error[c],
    }))
}

fn sum_regions<const N: usize>(heap: &BinaryHeap<Region<N>>) -> ([f64; N], [f64; N]) {
    let mut v: Vec<&Region<N>> = heap.iter().collect();
    // fixed order keeps results bit-reproducible
    v.sort_by(|a, b| {
        a.lo[0]
            .total_cmp(&b.lo[0])
            .then(a.lo[1].total_cmp(&b.lo[1]))
    });
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for r in v {
        for c in 0..N {
            value[c] += r.value[c];
            error[c] += r.error[c];
        }
    }
    (value, error)
}

/// Integrates a scalar `f(a, b)` over `[lo, hi]`.
pub fn quad2d<F>(f: F, lo: [f64; 2], hi: [f64; 2], cfg: &QuadratureConfig) -> Result<Estimate, AnalyticError>
where
    F: Fn(f64, f64) -> f64,
{
    quad2d_vec(move |a, b| [f(a, b)], lo, hi, cfg).map(|[e]| e)
}

/// Integrates `f` over `[a, b]`.
pub fn quad1d<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate, AnalyticError>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    struct Interval {
        lo: f64,
        hi: f64,
        depth: u32,
        value: f64,
        error: f64,
    }
    let apply = |lo: f64, hi: f64| {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let (mut k, mut g) = (0.0, 0.0);
        for (x, wk, wg) in rule() {
            let v = f(c + h * x);
            k += wk * v;
            g += wg * v;
        }
        (k * h, ((k - g) * h).abs())
    };
    let (value, error) = apply(a, b);
    let mut parts = vec![Interval {
        lo: a,
        hi: b,
        depth: 0,
        value,
        error,
    }];
    loop {
        let total: f64 = parts.iter().map(|p| p.value).sum();
        let total_err: f64 = parts.iter().map(|p| p.error).sum();
        if total_err <= cfg.target(total) {
            return Ok(Estimate {
                value: total,
                error: total_err,
            });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        if parts[worst].depth >= cfg.max_depth || parts.len() >= MAX_REGIONS {
            return Err(AnalyticError::DepthExhausted {
                value: total,
                bound: total_err,
            });
        }
        let p = parts.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        for (lo, hi) in [(p.lo, mid), (mid, p.hi)] {
            let (value, error) = apply(lo, hi);
            parts.push(Interval {
                lo,
                hi,
                depth: p.depth + 1,
                value,
                error,
            });
        }
        parts.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    }
}

/// Fixed composite Gauss-Kronrod rule on `[a, b]` with `pieces` equal panels;
/// returns `(node, weight)` pairs.
pub fn composite_nodes(a: f64, b: f64, pieces: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / pieces as f64;
    let mut out = Vec::with_capacity(15 * pieces);
    for p in 0..pieces {
        let c = a + (p as f64 + 0.5) * h;
        for (x, wk, _) in rule() {
            out.push((c + 0.5 * h * x, 0.5 * h * wk));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rule_weights_sum_to_two() {
        let r = rule();
        assert_abs_diff_eq!(r.iter().map(|x| x.1).sum::<f64>(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.iter().map(|x| x.2).sum::<f64>(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_and_bilinear() {
        let cfg = QuadratureConfig::default();
        let one = quad2d(|_, _| 1.0, [0.0, 0.0], [1.0, 1.0], &cfg).unwrap();
        assert_abs_diff_eq!(one.value, 1.0, epsilon = 1e-14);
        let ab = quad2d(|a, b| a * b, [0.0, 0.0], [1.0, 1.0], &cfg).unwrap();
        assert_abs_diff_eq!(ab.value, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn peaked_integrand_converges() {
        let cfg = QuadratureConfig::default();
        // integral of exp(-1000 (1-a)) over the square
        let e = quad2d(|a, _| (-1000.0 * (1.0 - a)).exp(), [0.0, 0.0], [1.0, 1.0], &cfg).unwrap();
        assert_abs_diff_eq!(e.value, (1.0 - (-1000.0f64).exp()) / 1000.0, epsilon = 1e-13);
    }

    #[test]
    fn one_dimensional_log() {
        let cfg = QuadratureConfig::default();
        let e = quad1d(|x| 1.0 / (1.0 + x), 0.0, 1.0, &cfg).unwrap();
        assert_abs_diff_eq!(e.value, std::f64::consts::LN_2, epsilon = 1e-14);
    }

    #[test]
    fn depth_limit_is_reported() {
        let cfg = QuadratureConfig {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_depth: 2,
        };
        let r = quad1d(|x| x.sqrt(), 0.0, 1.0, &cfg);
        assert!(matches!(r, Err(AnalyticError::DepthExhausted { .. })));
    }

    #[test]
    fn composite_rule_integrates_polynomials() {
        let s: f64 = composite_nodes(0.0, 2.0, 3)
            .iter()
            .map(|(x, w)| w * x.powi(5))
            .sum();
        assert_abs_diff_eq!(s, 64.0 / 6.0, epsilon = 1e-12);
    }
}
