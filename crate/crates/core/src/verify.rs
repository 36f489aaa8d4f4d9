//! Side-by-side comparison of analytic predictions and simulation estimates.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analytic::{derived_tables, AnalyticTables, DerivedInputs, MixturePredictions};
use crate::combinatorics::EstimatorReport;

/// Largest admissible |z| for a corroborated quantity.
pub const Z_LIMIT: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub quantity: String,
    pub analytic: f64,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub mixture: Option<f64>,
    pub z_mixture: Option<f64>,
    /// Whether the row counts toward the overall verdict.
    pub corroborated: bool,
    pub pass: bool,
    pub note: String,
}

/// Which labelling of the P1 classes the simulation supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Adjudication {
    pub estimates: [f64; 3],
    pub se: [f64; 3],
    pub as_printed_z: [f64; 3],
    pub figure_consistent_z: [f64; 3],
    /// z against the mixture-exact proportions under the figure-consistent
    /// labels.
    pub mixture_z: [f64; 3],
    /// z against the mixture-exact proportions with classes 1 and 2 swapped.
    pub mixture_swapped_z: [f64; 3],
    /// The assignment with all three |z| below the limit against the series
    /// values, if exactly one has.
    pub winner: Option<String>,
    /// The same decision against the mixture-exact values.
    pub winner_exact_values: Option<String>,
}

/// Competing predictions for one estimated quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetingCheck {
    pub quantity: String,
    pub estimate: f64,
    pub se: f64,
    /// `(label, prediction, z)`.
    pub candidates: Vec<(String, f64, f64)>,
}

impl CompetingCheck {
    fn new(quantity: &str, est: &EstimatorReport, candidates: &[(&str, f64)]) -> Option<Self> {
        let e = est.get(quantity)?;
        Some(Self {
            quantity: quantity.to_string(),
            estimate: e.estimate,
            se: e.se,
            candidates: candidates
                .iter()
                .map(|(l, v)| (l.to_string(), *v, z_score(e.estimate, e.se, *v)))
                .collect(),
        })
    }

    /// Labels of the candidates within the z limit.
    pub fn consistent(&self) -> Vec<&str> {
        self.candidates
            .iter()
            .filter(|c| c.2.abs() < Z_LIMIT)
            .map(|c| c.0.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub replicates: usize,
    pub rows: Vec<ComparisonRow>,
    pub p1: Option<P1Adjudication>,
    /// Class-1 P1 edges at the typical X vertex: the stated sum, twice it,
    /// and the mixture value.
    pub factor_two: Option<CompetingCheck>,
    /// Class-1 P1 edges at the typical T vertex.
    pub t_vertex_class_one: Option<CompetingCheck>,
    /// XX-edge counts per segment: product formula against the mixture.
    pub nu_exx: Vec<CompetingCheck>,
    pub warnings: Vec<String>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().filter(|r| r.corroborated).all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&ComparisonRow> {
        self.rows.iter().filter(|r| r.corroborated && !r.pass).collect()
    }

    pub fn get(&self, quantity: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "quantity",
            "analytic",
            "estimate",
            "se",
            "z",
            "mixture",
            "z_mixture",
            "corroborated",
            "pass",
            "note",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.quantity.clone(),
                r.analytic.to_string(),
                r.estimate.to_string(),
                r.se.to_string(),
                r.z.to_string(),
                opt(r.mixture),
                opt(r.z_mixture),
                r.corroborated.to_string(),
                r.pass.to_string(),
                r.note.clone(),
            ])?;
        }
        let mut checks: Vec<&CompetingCheck> = self.factor_two.iter().chain(&self.t_vertex_class_one).collect();
        checks.extend(&self.nu_exx);
        for c in checks {
            for (label, v, z) in &c.candidates {
                w.write_record([
                    format!("{} [{label}]", c.quantity),
                    v.to_string(),
                    c.estimate.to_string(),
                    c.se.to_string(),
                    z.to_string(),
                    String::new(),
                    String::new(),
                    "false".into(),
                    (z.abs() < Z_LIMIT).to_string(),
                    "competing prediction".into(),
                ])?;
            }
        }
        if let Some(a) = &self.p1 {
            for (label, winner) in [
                ("P1 label assignment", &a.winner),
                ("P1 label assignment, mixture values", &a.winner_exact_values),
            ] {
                w.write_record([
                    label.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "false".into(),
                    winner.is_some().to_string(),
                    winner.clone().unwrap_or_else(|| "neither assignment within 3 SE".into()),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!("replicates: {}\n", self.replicates);
        s += &format!(
            "{:<34} {:>11} {:>11} {:>9} {:>7} {:>11} {:>7}\n",
            "quantity", "analytic", "estimate", "se", "z", "mixture", "z_mix"
        );
        for r in &self.rows {
            let flag = if !r.corroborated {
                ' '
            } else if r.pass {
                '+'
            } else {
                '!'
            };
            s += &format!(
                "{flag}{:<33} {:>11.6} {:>11.6} {:>9.6} {:>7.2} {:>11} {:>7}\n",
                r.quantity,
                r.analytic,
                r.estimate,
                r.se,
                r.z,
                r.mixture.map(|m| format!("{m:.6}")).unwrap_or_default(),
                r.z_mixture.map(|z| format!("{z:.2}")).unwrap_or_default(),
            );
        }
        if let Some(a) = &self.p1 {
            s += &format!(
                "P1 labels, series values: as-printed z {:?}, figure-consistent z {:?} -> {}\n",
                round2(&a.as_printed_z),
                round2(&a.figure_consistent_z),
                a.winner.as_deref().unwrap_or("no single assignment within 3 SE")
            );
            s += &format!(
                "P1 labels, mixture values: as-printed z {:?}, figure-consistent z {:?} -> {}\n",
                round2(&a.mixture_swapped_z),
                round2(&a.mixture_z),
                a.winner_exact_values.as_deref().unwrap_or("no single assignment within 3 SE")
            );
        }
        let mut checks: Vec<&CompetingCheck> = self.factor_two.iter().chain(&self.t_vertex_class_one).collect();
        checks.extend(&self.nu_exx);
        for c in checks {
            s += &format!("{} = {:.5} +- {:.5}:", c.quantity, c.estimate, c.se);
            for (label, v, z) in &c.candidates {
                s += &format!(" {label} {v:.5} (z {z:.2});");
            }
            s += "\n";
        }
        for w in &self.warnings {
            s += &format!("warning: {w}\n");
        }
        s += &format!(
            "verdict: {}\n",
            if self.all_pass() {
                "all corroborated quantities within 3 SE".to_string()
            } else {
                format!("{} corroborated quantities outside 3 SE", self.failures().len())
            }
        );
        s
    }
}

fn round2(z: &[f64; 3]) -> [f64; 3] {
    z.map(|v| (v * 100.0).round() / 100.0)
}

/// `(estimate - prediction) / se`; estimates whose spread is at rounding
/// level are compared exactly, giving 0 or an infinite z.
pub fn z_score(estimate: f64, se: f64, prediction: f64) -> f64 {
    let d = estimate - prediction;
    let scale = estimate.abs().max(prediction.abs()).max(1.0);
    if se > 1e-12 * scale {
        d / se
    } else if d.abs() <= 1e-9 * scale {
        0.0
    } else {
        f64::INFINITY.copysign(d)
    }
}

/// Derived mean values with mixture-exact inputs and the P1 labels of the
/// lookup table.
pub fn mixture_derived(m: &MixturePredictions) -> Vec<(String, f64)> {
    let inputs = DerivedInputs {
        eps_tt: m.eps_tt,
        eps_p1: m.eps_p1,
        eps_z1: m.eps_z1,
        t_pair_sum: m.t_pair_sum,
        tx_pair_sum: m.mu_vx_p1_1 / 2.0,
    };
    let mut rows = derived_tables(&inputs);
    for (name, v) in rows.iter_mut() {
        match name.as_str() {
            "mu_V[T],E[P1,1]" => *v = m.mu_vt_p1_1,
            "mu_V[T],E[P1,2]" => *v = 4.0 - 6.0 * m.eps_p1[2] - m.mu_vt_p1_1,
            _ => {}
        }
    }
    rows
}

/// Quantities whose agreement decides the verdict.
const CORROBORATED: &[&str] = &[
    "eps_V[T]",
    "lambda_E/lambda_V",
    "lambda_P/lambda_V",
    "eps_E[TT]",
    "eps_E[XX]",
    "eps_E[TX]",
    "eps_E[Z1,0]",
    "eps_E[Z1,1]",
    "eps_E[Z1,2]",
    "eta_V,V[T]",
    "P(nu_EXX=0)",
    "P(nu_EXX=1)",
    "P(nu_EXX=2)",
    "P(nu_EXX=3)",
];

pub fn verify(tables: &AnalyticTables, est: &EstimatorReport, replicates: usize) -> VerificationReport {
    let mix = &tables.mixture;
    let mix_derived = mixture_derived(mix);
    let mixture_of = |name: &str| -> Option<f64> {
        match name {
            "eps_E[TT]" => Some(mix.eps_tt),
            "eps_E[XX]" => Some(mix.eps_xx),
            "eps_E[TX]" => Some(mix.eps_tx),
            "eps_E[Z1,0]" => Some(mix.eps_z1[0]),
            "eps_E[Z1,1]" => Some(mix.eps_z1[1]),
            "eps_E[Z1,2]" => Some(mix.eps_z1[2]),
            "eta_V,V[T]" => Some(8.0 / 3.0),
            "eta_V,V[X]" => Some(4.0 / 3.0),
            _ => {
                if let Some(k) = name.strip_prefix("P(nu_EXX=").and_then(|r| r.strip_suffix(')')) {
                    return k.parse::<usize>().ok().and_then(|k| mix.nu_exx.get(k).copied());
                }
                mix_derived.iter().find(|r| r.0 == name).map(|r| r.1)
            }
        }
    };

    let mut candidates: Vec<(String, f64, String)> = Vec::new();
    let mut add = |name: &str, v: Option<f64>, note: &str| {
        if let Some(v) = v {
            candidates.push((name.to_string(), v, note.to_string()));
        }
    };
    for name in [
        "eps_V[T]",
        "eps_V[X]",
        "lambda_E/lambda_V",
        "lambda_P/lambda_V",
        "eps_E[TT]",
        "eps_E[XX]",
        "eps_E[TX]",
        "eps_E[Z1,0]",
        "eps_E[Z1,1]",
        "eps_E[Z1,2]",
        "p_T",
        "P(nu_T>=1)",
        "p_L|T",
    ] {
        add(name, tables.value(name), "");
    }
    add("lambda_I1/lambda_V", Some(2.0 / 3.0), "exact");
    add("lambda_I/lambda_V", Some(1.0 / 6.0), "exact");
    add("lambda_Z/lambda_V", Some(1.0 / 6.0), "exact");
    add("mean_nu", Some(2.0), "exact");
    add("mean_nu_T", Some(1.0), "exact");
    for k in 0..=3 {
        add(&format!("P(nu_EXX={k})"), tables.value(&format!("P(nu_EXX={k})")), "product formula");
    }
    for k in 0..=5 {
        add(&format!("p_nu={k}"), tables.value(&format!("p_{k}")), "");
    }
    let printed_inputs: Vec<(String, f64)> = tables
        .rows
        .iter()
        .filter(|r| r.quantity.starts_with("mu_") || r.quantity.starts_with("eta_"))
        .map(|r| (r.quantity.clone(), r.value))
        .collect();
    for (name, v) in &printed_inputs {
        add(name, Some(*v), "linear relation, printed labels");
    }

    let mut rows = Vec::new();
    for (name, analytic, note) in candidates {
        let Some(e) = est.get(&name) else { continue };
        let z = z_score(e.estimate, e.se, analytic);
        let mixture = mixture_of(&name);
        let z_mixture = mixture.map(|m| z_score(e.estimate, e.se, m));
        rows.push(ComparisonRow {
            corroborated: CORROBORATED.contains(&name.as_str()),
            pass: z.abs() < Z_LIMIT,
            quantity: name,
            analytic,
            estimate: e.estimate,
            se: e.se,
            z,
            mixture,
            z_mixture,
            note,
        });
    }

    let p1 = (|| {
        let mut estimates = [0.0; 3];
        let mut se = [0.0; 3];
        let mut as_printed_z = [0.0; 3];
        let mut figure_consistent_z = [0.0; 3];
        let mut mixture_z = [0.0; 3];
        let mut mixture_swapped_z = [0.0; 3];
        let swapped = [mix.eps_p1[1], mix.eps_p1[0], mix.eps_p1[2]];
        for i in 0..3 {
            let e = est.get(&format!("eps_E[P1,{}]", i + 1))?;
            estimates[i] = e.estimate;
            se[i] = e.se;
            let printed = tables.value(&format!("eps_E[P1,{}] as-printed", i + 1))?;
            let figure = tables.value(&format!("eps_E[P1,{}] figure-consistent", i + 1))?;
            as_printed_z[i] = z_score(e.estimate, e.se, printed);
            figure_consistent_z[i] = z_score(e.estimate, e.se, figure);
            mixture_z[i] = z_score(e.estimate, e.se, mix.eps_p1[i]);
            mixture_swapped_z[i] = z_score(e.estimate, e.se, swapped[i]);
        }
        let ok = |z: &[f64; 3]| z.iter().all(|v| v.abs() < Z_LIMIT);
        let decide = |printed: &[f64; 3], figure: &[f64; 3]| match (ok(printed), ok(figure)) {
            (true, false) => Some("as-printed".to_string()),
            (false, true) => Some("figure-consistent".to_string()),
            _ => None,
        };
        let winner = decide(&as_printed_z, &figure_consistent_z);
        let winner_exact_values = decide(&mixture_swapped_z, &mixture_z);
        Some(P1Adjudication {
            estimates,
            se,
            as_printed_z,
            figure_consistent_z,
            mixture_z,
            mixture_swapped_z,
            winner,
            winner_exact_values,
        })
    })();

    let tx = tables.value("sum (n-1) p_T|n p_X|n p_n").unwrap_or(f64::NAN);
    let factor_two = CompetingCheck::new(
        "mu_V[X],E[P1,1]",
        est,
        &[
            ("2 sum (n-1) p_T p_X p_n", 2.0 * tx),
            ("4 sum (n-1) p_T p_X p_n", 4.0 * tx),
            ("mixture", mix.mu_vx_p1_1),
        ],
    );
    let t_vertex_class_one = CompetingCheck::new(
        "mu_V[T],E[P1,1]",
        est,
        &[
            ("27 ln3 - 28 ln2 - 19/2", tables.value("mu_V[T],E[P1,1]").unwrap_or(f64::NAN)),
            (
                "sum (n-1) (p_T^2 + 2 p_T p_X) p_n",
                tables
                    .value("sum (n-1) (p_T|n^2 + 2 p_T|n p_X|n) p_n")
                    .unwrap_or(f64::NAN),
            ),
            ("mixture", mix.mu_vt_p1_1),
        ],
    );
    let nu_exx = (0..=3)
        .filter_map(|k| {
            let name = format!("P(nu_EXX={k})");
            CompetingCheck::new(
                &name,
                est,
                &[
                    ("product formula", tables.value(&name).unwrap_or(f64::NAN)),
                    ("mixture", mix.nu_exx[k]),
                ],
            )
        })
        .collect();

    let mut warnings = tables.warnings.clone();
    if replicates < 50 {
        warnings.push(format!("{replicates} replicates; at least 50 are recommended"));
    }
    VerificationReport {
        replicates,
        rows,
        p1,
        factor_two,
        t_vertex_class_one,
        nu_exx,
        warnings,
    }
}
