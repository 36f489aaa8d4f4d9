use std::collections::BTreeMap;
use std::path::PathBuf;

use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stit_core::analytic::*;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/golden.json")
}

#[test]
fn marginalizing_the_type_split_gives_p_n() {
    for n in 0..=20u32 {
        let pn = p_n(n, &q()).unwrap().value;
        let sum: f64 = (0..=n).map(|m| p_mj(m, n - m, &q()).unwrap().value).sum();
        assert_abs_diff_eq!(sum, pn, epsilon = 1e-8);
    }
}

#[test]
fn left_right_split_marginalizes_to_t_count() {
    for m in 0..=10u32 {
        let lr: f64 = (0..=m).map(|l| p_lr(l, m - l, &q()).unwrap().value).sum();
        let mj: f64 = (0..=400u32).map(|j| p_mj(m, j, &q()).unwrap().value).sum();
        // the j series has a polynomial tail; bound it by the next block of terms
        let tail: f64 = (401..=800u32).map(|j| p_mj(m, j, &q()).unwrap().value).sum();
        assert!(tail < 1e-6, "m={m} tail {tail}");
        assert_abs_diff_eq!(lr, mj + tail, epsilon = 1e-8 + 2.0 * tail);
    }
}

#[test]
fn t_fraction_given_n_reference_points() {
    assert_abs_diff_eq!(p_t_given_n(1, &q()).unwrap().value, 0.3854, epsilon = 5e-5);
    assert_abs_diff_eq!(p_t_given_n(2, &q()).unwrap().value, 0.4114, epsilon = 5e-5);
    assert_abs_diff_eq!(p_t_given_n(20, &q()).unwrap().value, 0.6058, epsilon = 5e-5);
    let far = p_t_given_n(200, &q()).unwrap().value;
    assert!(far > 0.6058 && far < 2.0 / 3.0);
}

#[test]
fn closed_forms_and_two_routes() {
    let f = p_t_overall(&q()).unwrap();
    assert_abs_diff_eq!(f.p_t, 0.433053, epsilon = 5e-7);
    assert_abs_diff_eq!(f.p_t_resummed, f.p_t_closed, epsilon = 1e-6);
    assert_abs_diff_eq!(f.p_t + f.p_x, 1.0);
    assert_abs_diff_eq!(closed::p_t_ratio_form(), f.p_t, epsilon = 1e-12);
    assert_abs_diff_eq!(p_nu_t_positive(&q()).unwrap().value, closed::p_nu_t_positive(), epsilon = 1e-10);
    assert_abs_diff_eq!(closed::p_nu_t_positive(), 0.3644677, epsilon = 5e-8);
}

#[test]
fn mixed_type_counts_reproduce_t_positive_probability() {
    let mut total = 0.0;
    for m in 1..=60u32 {
        total += (0..=m).map(|l| p_lr(l, m - l, &q()).unwrap().value).sum::<f64>();
    }
    assert!(total < closed::p_nu_t_positive());
    assert_abs_diff_eq!(total, closed::p_nu_t_positive(), epsilon = 1e-3);
}

#[test]
fn series_deficit_shrinks_with_more_terms() {
    let a = segment_series(&SeriesConfig { n_max: 500, tail_report: true }, &q()).unwrap();
    let b = segment_series(&SeriesConfig { n_max: 1000, tail_report: true }, &q()).unwrap();
    assert!(b.tail_deficit() < a.tail_deficit());
    assert!(a.tail_deficit() > 0.0);
    assert!(SeriesConfig { n_max: 99, tail_report: true }.validate().is_err());
}

#[test]
fn sampler_matches_quadrature_on_a_small_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = sample_summary(2.0, 100_000, 5, 3, &mut rng).unwrap();
    for m in 0..=3u32 {
        let exact: f64 = (0..=m).map(|l| p_lr(l, m - l, &q()).unwrap().value).sum();
        let (p, se) = s.proportion(s.t_counts[m as usize]);
        assert!((p - exact).abs() < 4.0 * se, "m={m}: {p} vs {exact}");
    }
    let (f, se) = s.left_fraction();
    assert!((f - 0.5).abs() < 4.0 * se);
}

#[test]
fn tables_match_golden_values() {
    let t = analytic_tables(&SeriesConfig::default(), &q()).unwrap();
    let current: BTreeMap<String, f64> = t.rows.iter().map(|r| (r.quantity.clone(), r.value)).collect();
    if std::env::var_os("STIT_REGENERATE_GOLDEN").is_some() {
        std::fs::write(golden_path(), serde_json::to_string_pretty(&current).unwrap()).unwrap();
        return;
    }
    let golden: BTreeMap<String, f64> =
        serde_json::from_str(&std::fs::read_to_string(golden_path()).unwrap()).unwrap();
    assert_eq!(golden.len(), current.len());
    for (name, v) in &golden {
        let c = current[name];
        assert!((c - v).abs() <= 1e-9 * v.abs().max(1.0), "{name}: {c} vs golden {v}");
    }
    assert!(t.get("eps_E[P1,1] as-printed").is_some());
    assert!(t.get("eps_E[P1,1] figure-consistent").is_some());
    assert_abs_diff_eq!(t.value("eta_V,V[X]").unwrap(), 4.0 / 3.0, epsilon = 1e-12);
}
