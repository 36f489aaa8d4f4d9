//! Acceptance checks. Each test prints one `criterion N: PASS|FAIL` line with
//! the numbers behind the verdict, then asserts it.
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads 1`
//! for the lines in order.

use std::sync::OnceLock;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stit_core::analytic::*;
use stit_core::combinatorics::{
    analyze, edge_class_names, estimate_from_tallies, geometric_kind, tally_replicate, EstimatorReport, Tally,
};
use stit_core::engine::{run_replicates, ConstructionResult, DEFAULT_CELL_CAP};
use stit_core::geom::make_window;
use stit_core::plane_measure::DirectionPreset;
use stit_core::verify::{verify, VerificationReport, Z_LIMIT};

const REPLICATES: usize = 60;
const TIME: f64 = 45.0;
const SEED: u64 = 11;
const MARGIN: f64 = 0.15;
const SAMPLER_SEED: u64 = 20_261_016;
const SAMPLER_DRAWS: u64 = 1_000_000;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn report(n: u32, pass: bool, detail: &str) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn series() -> &'static SegmentSeries {
    static S: OnceLock<SegmentSeries> = OnceLock::new();
    S.get_or_init(|| segment_series(&SeriesConfig::default(), &q()).unwrap())
}

struct Simulation {
    results: Vec<ConstructionResult>,
    tallies: Vec<Tally>,
    estimates: EstimatorReport,
}

fn simulate(preset: DirectionPreset) -> Simulation {
    let window = make_window(1.0).unwrap();
    let d = preset.build().unwrap();
    let results = run_replicates(&window, &d, TIME, SEED, REPLICATES, DEFAULT_CELL_CAP).unwrap();
    let tallies: Vec<Tally> = results.iter().map(|r| tally_replicate(r, MARGIN).unwrap()).collect();
    let estimates = estimate_from_tallies(&tallies, MARGIN).unwrap();
    Simulation {
        results,
        tallies,
        estimates,
    }
}

fn isotropic() -> &'static Simulation {
    static S: OnceLock<Simulation> = OnceLock::new();
    S.get_or_init(|| simulate(DirectionPreset::Isotropic))
}

fn anisotropic() -> &'static Simulation {
    static S: OnceLock<Simulation> = OnceLock::new();
    S.get_or_init(|| simulate(DirectionPreset::AnisoZ2))
}

fn verification() -> &'static VerificationReport {
    static R: OnceLock<VerificationReport> = OnceLock::new();
    R.get_or_init(|| {
        let tables = analytic_tables(&SeriesConfig::default(), &q()).unwrap();
        verify(&tables, &isotropic().estimates, REPLICATES)
    })
}

#[test]
fn criterion_1_closed_forms() {
    let start = Instant::now();
    let p0 = p_n(0, &q()).unwrap().value;
    let nu_t = p_nu_t_positive(&q()).unwrap().value;
    let mix = mixture_predictions(&q()).unwrap();
    let f = p_t_overall(&q()).unwrap();
    let errs = [
        ("p_0", (p0 - closed::p0()).abs()),
        ("P(nu_T>=1)", (nu_t - closed::p_nu_t_positive()).abs()),
        ("mu_V[T],E[P1,1] pair sum", (mix.t_pair_sum - closed::mu_vt_p1_1()).abs()),
    ];
    let routes = (f.p_t_closed - f.p_t_resummed).abs();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = errs.iter().all(|e| e.1 <= 1e-9)
        && routes <= ROUTE_AGREEMENT
        && (f.p_t - 0.433053).abs() < 5e-7;
    let detail = errs.iter().map(|(n, e)| format!("{n} err {e:.1e}")).collect::<Vec<_>>().join(", ");
    report(
        1,
        pass,
        &format!("{detail}; p_T {:.7} routes differ {routes:.1e}; {elapsed:.2} s", f.p_t),
    );
    assert!(pass);
}

#[test]
fn criterion_2_pmf_identities() {
    let mut worst_n: f64 = 0.0;
    for n in 0..=20u32 {
        let pn = p_n(n, &q()).unwrap().value;
        let sum: f64 = (0..=n).map(|m| p_mj(m, n - m, &q()).unwrap().value).sum();
        worst_n = worst_n.max((sum - pn).abs());
    }
    let mut worst_m: f64 = 0.0;
    for m in 0..=10u32 {
        let lr: f64 = (0..=m).map(|l| p_lr(l, m - l, &q()).unwrap().value).sum();
        let mj: f64 = (0..=4000u32).map(|j| p_mj(m, j, &q()).unwrap().value).sum();
        worst_m = worst_m.max((lr - mj).abs());
    }
    let pass = worst_n <= 1e-8 && worst_m <= 1e-8;
    report(
        2,
        pass,
        &format!("max |sum p_mj - p_n| {worst_n:.1e}; max |sum p_lr - sum_j p_mj| {worst_m:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_series() {
    let s = series();
    let e = s.eps_edge_types();
    let z1 = s.eps_z1();
    let mut p1 = s.eps_p1().as_printed;
    p1.sort_by(|a, b| b.total_cmp(a));
    let exx = s.nu_exx_pmf(4);
    let mut checks = vec![("eps_TT", e.tt, 0.442878), ("eps_Z1,0", z1[0], 0.624550), ("eps_Z1,1", z1[1], 0.231154)];
    for (v, want) in p1.iter().zip([0.555046, 0.300657, 0.144296]) {
        checks.push(("P1 set", *v, want));
    }
    for (v, want) in exx.iter().zip([0.795161, 0.131115, 0.046467, 0.016359]) {
        checks.push(("nu_EXX pmf", *v, want));
    }
    let worst = checks.iter().map(|c| (c.1 - c.2).abs()).fold(0.0, f64::max);
    let deficit = s.tail_deficit();
    let pass = worst <= 1e-3 && deficit < 1e-2;
    report(
        3,
        pass,
        &format!("n_max {}; max deviation {worst:.1e} over {} values; tail deficit {deficit:.1e}", s.n_max, checks.len()),
    );
    assert!(pass);
}

/// The epsilon inputs as printed alongside the tables.
fn printed_inputs() -> DerivedInputs {
    DerivedInputs {
        eps_tt: 0.442878,
        eps_p1: [0.555046, 0.300657, 0.144296],
        eps_z1: [0.624550, 0.231154, 0.144296],
        t_pair_sum: 0.754411,
        tx_pair_sum: 0.69968 / 2.0,
    }
}

struct TableCheck {
    worst: (&'static str, f64),
    outside: Vec<&'static str>,
    beyond_last_digit: Vec<&'static str>,
    missing: Vec<&'static str>,
}

fn check_tables(inputs: &DerivedInputs) -> TableCheck {
    let derived = derived_tables(inputs);
    let mut c = TableCheck {
        worst: ("", 0.0),
        outside: Vec::new(),
        beyond_last_digit: Vec::new(),
        missing: Vec::new(),
    };
    for &(name, printed) in REFERENCE_VALUES {
        let Some(r) = derived.iter().find(|r| r.0 == name) else {
            c.missing.push(name);
            continue;
        };
        let err = (r.1 - printed).abs();
        let rel = err / printed.abs().max(1.0);
        if rel > c.worst.1 {
            c.worst = (name, rel);
        }
        if rel > 1e-5 {
            c.outside.push(name);
        }
        // printed entries are rounded or truncated in the last digit
        if err > 2.0 * printed_half_ulp(printed) {
            c.beyond_last_digit.push(name);
        }
    }
    c
}

#[test]
fn criterion_4_derived_tables() {
    let printed = check_tables(&printed_inputs());
    let computed = check_tables(&series_inputs(series()));
    let pass = printed.missing.is_empty() && printed.outside.is_empty();
    report(
        4,
        pass,
        &format!(
            "{} printed values. From the printed inputs: worst {} at {:.1e} (scaled by max(1, |printed|)), \
             beyond 1e-5 {:?}, off by more than one printed digit {:?}. From the series inputs: worst {} at {:.1e}, \
             beyond 1e-5 {}, off by more than one printed digit {:?}",
            REFERENCE_VALUES.len(),
            printed.worst.0,
            printed.worst.1,
            printed.outside,
            printed.beyond_last_digit,
            computed.worst.0,
            computed.worst.1,
            computed.outside.len(),
            computed.beyond_last_digit,
        ),
    );
    assert!(printed.missing.is_empty() && printed.beyond_last_digit.is_empty());
    assert!(pass);
}

#[test]
fn criterion_5_segment_sampler() {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLER_SEED);
    let s = sample_summary(1.0, SAMPLER_DRAWS, 5, 3, &mut rng).unwrap();
    let mut zs = Vec::new();
    for m in 0..=5u32 {
        let exact: f64 = (0..=m).map(|l| p_lr(l, m - l, &q()).unwrap().value).sum();
        let (p, se) = s.proportion(s.t_counts[m as usize]);
        zs.push((format!("P(nu_T={m})"), (p - exact) / se));
    }
    for l in 0..=3u32 {
        for r in 0..=3u32 {
            let exact = p_lr(l, r, &q()).unwrap().value;
            let (p, se) = s.proportion(s.lr_counts[l as usize][r as usize]);
            zs.push((format!("P(nu_L={l},nu_R={r})"), (p - exact) / se));
        }
    }
    let (f, se) = s.left_fraction();
    zs.push(("p_L|T".into(), (f - 0.5) / se));
    let worst = zs.iter().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap();
    let pass = zs.iter().all(|z| z.1.abs() < Z_LIMIT);
    report(
        5,
        pass,
        &format!(
            "{SAMPLER_DRAWS} draws, seed {SAMPLER_SEED}; {} comparisons; largest |z| {:.2} at {}",
            zs.len(),
            worst.1.abs(),
            worst.0
        ),
    );
    assert!(pass);
}

/// Exact checks on one realization; returns the number of interior vertices.
fn exact_invariants(r: &ConstructionResult, t: &Tally) -> Result<usize, String> {
    let comb = analyze(r).map_err(|e| e.to_string())?;
    let mut interior = 0;
    for v in comb.vertices.iter().filter(|v| v.is_interior()) {
        if v.incident_edges.len() != 4 {
            return Err(format!("interior vertex with {} edges", v.incident_edges.len()));
        }
        interior += 1;
    }
    let sums = |keys: &[String]| keys.iter().map(|k| t.get(&format!("E[{k}]"))).sum::<f64>();
    let classes = edge_class_names();
    let e = t.get("E");
    for group in [&classes[0..3], &classes[3..6], &classes[6..9]] {
        let s = sums(group);
        if (s - e).abs() > 1e-9 * e.max(1.0) {
            return Err(format!("edge classes {group:?} sum to {s}, edges {e}"));
        }
    }
    let v = t.get("V");
    if (t.get("V[T]") + t.get("V[X]") - v).abs() > 1e-9 * v.max(1.0) {
        return Err("vertex types do not sum to the vertex count".into());
    }
    Ok(interior)
}

#[test]
fn criterion_6_full_simulation() {
    let start = Instant::now();
    let sim = isotropic();
    let cells: Vec<usize> = sim.results.iter().map(|r| r.final_cells.len()).collect();
    let mean_cells = cells.iter().sum::<usize>() as f64 / cells.len() as f64;
    let mut invariant_errors = Vec::new();
    for (r, t) in sim.results.iter().zip(&sim.tallies) {
        if let Err(e) = exact_invariants(r, t) {
            invariant_errors.push(format!("replicate {}: {e}", r.replicate));
        }
    }
    let v = verification();
    let failures: Vec<String> = v.failures().iter().map(|r| format!("{} z {:.1}", r.quantity, r.z)).collect();
    let mixture_fits = v
        .rows
        .iter()
        .filter(|r| r.corroborated)
        .all(|r| r.z_mixture.map_or(r.pass, |z| z.abs() < Z_LIMIT));
    let sized = cells.iter().all(|&c| (1500..=6000).contains(&c)) && (2000.0..=5000.0).contains(&mean_cells);
    let pass = sized && invariant_errors.is_empty() && v.all_pass();
    report(
        6,
        pass,
        &format!(
            "{REPLICATES} replicates, mean {mean_cells:.0} cells; invariant violations {}; \
             outside 3 SE of the published values: [{}]; all within 3 SE of the mixture-exact values: {mixture_fits}; \
             {:.1} s",
            invariant_errors.len(),
            failures.join(", "),
            start.elapsed().as_secs_f64()
        ),
    );
    for line in v.summary().lines() {
        println!("  {line}");
    }
    assert!(invariant_errors.is_empty(), "{invariant_errors:?}");
    assert!(pass);
}

#[test]
fn criterion_7_label_adjudication() {
    let v = verification();
    let a = v.p1.as_ref().expect("P1 estimates present");
    let fmt = |z: &[f64; 3]| format!("[{:.1}, {:.1}, {:.1}]", z[0], z[1], z[2]);
    let recorded = v.factor_two.is_some() && !v.nu_exx.is_empty();
    let pass = a.winner.is_some() && recorded;
    report(
        7,
        pass,
        &format!(
            "as-printed z {}, figure-consistent z {} -> {}; with mixture-exact values: as-printed z {}, \
             figure-consistent z {} -> {}; factor-2 check recorded: {}, pmf check recorded: {}",
            fmt(&a.as_printed_z),
            fmt(&a.figure_consistent_z),
            a.winner.as_deref().unwrap_or("neither"),
            fmt(&a.mixture_swapped_z),
            fmt(&a.mixture_z),
            a.winner_exact_values.as_deref().unwrap_or("neither"),
            v.factor_two.is_some(),
            !v.nu_exx.is_empty()
        ),
    );
    if let Some(c) = &v.factor_two {
        let cands: Vec<String> = c.candidates.iter().map(|(l, p, z)| format!("{l} {p:.5} (z {z:.1})")).collect();
        println!("  {} = {:.5} +- {:.5}: {}", c.quantity, c.estimate, c.se, cands.join("; "));
    }
    assert!(pass);
}

#[test]
fn criterion_8_direction_invariance() {
    let (iso, aniso) = (&isotropic().estimates, &anisotropic().estimates);
    let mut worst = (String::new(), 0.0f64);
    let mut out = Vec::new();
    for c in edge_class_names() {
        let name = format!("eps_E[{c}]");
        let (a, b) = (iso.get(&name).unwrap(), aniso.get(&name).unwrap());
        let z = (a.estimate - b.estimate) / a.se.hypot(b.se);
        if z.abs() > worst.1 {
            worst = (name.clone(), z.abs());
        }
        if z.abs() >= Z_LIMIT {
            out.push(name);
        }
    }
    let pass = out.is_empty();
    report(
        8,
        pass,
        &format!(
            "9 edge classes, {REPLICATES} replicates each; largest |z| {:.2} at {}; outside 3 pooled SE: {out:?}",
            worst.1, worst.0
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_classifier_cross_check() {
    let sim = isotropic();
    let mut checked = 0usize;
    let mut disagreements = 0usize;
    for r in &sim.results {
        let comb = analyze(r).expect("analysis checks both classifiers");
        let scale = r.policy.merge_eps / 1e-9;
        for (vi, v) in comb.vertices.iter().enumerate().filter(|(_, v)| v.is_interior()) {
            let nb: Vec<_> = v.incident_edges.iter().map(|&e| comb.vertices[comb.across(e, vi)].position).collect();
            checked += 1;
            if geometric_kind(&v.position, &nb, scale, r.policy.angular_eps) != Some(v.kind) {
                disagreements += 1;
            }
        }
    }
    // a relabelled vertex must be rejected
    let mut tampered = sim.results[0].clone();
    let p = tampered
        .polygons
        .iter_mut()
        .find(|p| p.sides.iter().all(|s| !s.on_window()))
        .expect("a polygon away from the window");
    p.sides[0].carrier = p.sides[1].carrier;
    let rejects = analyze(&tampered).is_err();
    let t_count = isotropic().tallies.len();
    let pass = disagreements == 0 && checked > 0 && rejects;
    report(
        9,
        pass,
        &format!(
            "{checked} interior vertices over {t_count} runs, {disagreements} disagreements; tampered run rejected: {rejects}"
        ),
    );
    assert!(pass);
}
