use std::collections::BTreeMap;
use std::io::Write;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{analyze, extract_plates, Combinatorics, TxClass, VertexKind};
use crate::engine::ConstructionResult;
use crate::error::EstimateError;
use crate::geom::{ConvexPolytope, Point3, SourceTag};

/// Largest count with its own histogram bin; larger counts are pooled.
pub const MAX_HISTOGRAM_BIN: usize = 8;

/// An axis-parallel window shrunk by `margin` times its extent on every side.
///
/// Objects are counted when they are intact (every vertex strictly inside
/// the window) and their reference point lies in the shrunken box. Each
/// counted object is weighted by the inverse of the fraction of reference
/// positions in the shrunken box at which a translate of it would be intact,
/// which makes weighted counts unbiased for every object size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedWindow {
    lo: [f64; 3],
    hi: [f64; 3],
    margin: f64,
}

impl ReducedWindow {
    pub fn new(window: &ConvexPolytope, margin: f64) -> Result<Self, EstimateError> {
        if !(0.0..0.4).contains(&margin) {
            return Err(EstimateError::Margin(margin));
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in window.vertices() {
            for i in 0..3 {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        Ok(Self { lo, hi, margin })
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Weight of an intact object with the given reference point and vertex
    /// positions; zero when the reference point is outside the shrunken box.
    pub fn weight<'a>(&self, reference: &Point3, extent: impl IntoIterator<Item = &'a Point3>) -> f64 {
        let mut lo = [0.0f64; 3];
        let mut hi = [0.0f64; 3];
        for p in extent {
            for i in 0..3 {
                lo[i] = lo[i].min(p[i] - reference[i]);
                hi[i] = hi[i].max(p[i] - reference[i]);
            }
        }
        let mut w = 1.0;
        for i in 0..3 {
            let side = self.hi[i] - self.lo[i];
            let (a, b) = (self.lo[i] + self.margin * side, self.hi[i] - self.margin * side);
            if reference[i] < a || reference[i] > b {
                return 0.0;
            }
            let fit = b.min(self.hi[i] - hi[i]) - a.max(self.lo[i] - lo[i]);
            if fit <= 0.0 {
                return 0.0;
            }
            w *= (b - a) / fit;
        }
        w
    }
}

/// Weighted object counts of one replicate, keyed by counter name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub counts: BTreeMap<String, f64>,
}

impl Tally {
    fn add(&mut self, key: impl Into<String>, w: f64) {
        *self.counts.entry(key.into()).or_insert(0.0) += w;
    }

    pub fn get(&self, key: &str) -> f64 {
        self.counts.get(key).copied().unwrap_or(0.0)
    }
}

fn p1_name(i: u8) -> String {
    format!("P1,{i}")
}

fn z1_name(j: u8) -> String {
    format!("Z1,{j}")
}

/// Names of the nine edge classes, in reporting order.
pub fn edge_class_names() -> Vec<String> {
    let mut v: Vec<String> = TxClass::ALL.iter().map(|c| c.name().to_string()).collect();
    v.extend((1..=3).map(p1_name));
    v.extend((0..=2).map(z1_name));
    v
}

fn vertex_name(k: VertexKind) -> &'static str {
    match k {
        VertexKind::T => "T",
        VertexKind::X => "X",
        VertexKind::Boundary => "B",
    }
}

fn histogram_bin(k: usize) -> String {
    if k > MAX_HISTOGRAM_BIN {
        format!(">{MAX_HISTOGRAM_BIN}")
    } else {
        k.to_string()
    }
}

/// Weighted counts of every object class used by the estimators.
pub fn tally_replicate(r: &ConstructionResult, margin: f64) -> Result<Tally, EstimateError> {
    let rw = ReducedWindow::new(&r.window, margin)?;
    let comb = analyze(r)?;
    let plates = extract_plates(r, &comb)?;
    Ok(tally_structure(r, &comb, &plates, &rw))
}

fn tally_structure(
    r: &ConstructionResult,
    comb: &Combinatorics,
    plates: &[super::Plate],
    rw: &ReducedWindow,
) -> Tally {
    let mut t = Tally::default();
    let pos = |v: usize| &comb.vertices[v].position;

    for (vi, v) in comb.vertices.iter().enumerate() {
        if !v.is_interior() {
            continue;
        }
        let w = rw.weight(&v.position, [&v.position]);
        if w == 0.0 {
            continue;
        }
        let kind = vertex_name(v.kind);
        t.add("V", w);
        t.add(format!("V[{kind}]"), w);

        // vertex stars: all four neighbours genuine vertices
        let neighbours: Vec<usize> = v.incident_edges.iter().map(|&e| comb.across(e, vi)).collect();
        if !neighbours.iter().all(|&u| comb.vertices[u].is_interior()) {
            continue;
        }
        let w = rw.weight(&v.position, neighbours.iter().map(|&u| pos(u)).chain([&v.position]));
        for prefix in ["S".to_string(), format!("S[{kind}]")] {
            t.add(prefix.clone(), w);
            for &e in &v.incident_edges {
                let e = &comb.edges[e];
                t.add(format!("{prefix}:E[{}]", e.class_tx.name()), w);
                t.add(format!("{prefix}:E[{}]", p1_name(e.class_p1)), w);
                t.add(format!("{prefix}:E[{}]", z1_name(e.class_z1)), w);
            }
            for &u in &neighbours {
                t.add(format!("{prefix}:V[{}]", vertex_name(comb.vertices[u].kind)), w);
            }
        }
    }

    for e in comb.edges.iter().filter(|e| e.interior) {
        let (a, b) = (pos(e.endpoints[0]), pos(e.endpoints[1]));
        let mid = Point3::from((a.coords + b.coords) / 2.0);
        let w = rw.weight(&mid, [a, b]);
        if w == 0.0 {
            continue;
        }
        t.add("E", w);
        t.add(format!("E[{}]", e.class_tx.name()), w);
        t.add(format!("E[{}]", p1_name(e.class_p1)), w);
        t.add(format!("E[{}]", z1_name(e.class_z1)), w);
    }

    let mut seg_edges: Vec<Vec<usize>> = vec![Vec::new(); comb.segments.len()];
    for (ei, e) in comb.edges.iter().enumerate() {
        seg_edges[e.segment].push(ei);
    }
    for (si, s) in comb.segments.iter().enumerate() {
        if s.on_window()
            || !comb.vertices[s.start_vertex].is_interior()
            || !comb.vertices[s.end_vertex].is_interior()
        {
            continue;
        }
        let w = rw.weight(&s.midpoint(), [&s.start, &s.end]);
        if w == 0.0 {
            continue;
        }
        let nu = s.marks.len();
        let nu_t = s.marks.iter().filter(|m| m.kind != super::MarkKind::X).count();
        let nu_l = s
            .marks
            .iter()
            .filter(|m| m.kind == super::MarkKind::T(super::Side::Left))
            .count();
        let nu_xx = seg_edges[si]
            .iter()
            .filter(|&&e| comb.edges[e].class_tx == TxClass::XX)
            .count();
        t.add("I1", w);
        t.add(format!("I1:nu={}", histogram_bin(nu)), w);
        t.add(format!("I1:nuXX={}", histogram_bin(nu_xx)), w);
        t.add("I1:nu_sum", w * nu as f64);
        t.add("I1:nuT_sum", w * nu_t as f64);
        if nu >= 1 {
            t.add("I1:nu>=1", w);
            t.add("I1:fracT_sum", w * nu_t as f64 / nu as f64);
        }
        if nu_t >= 1 {
            t.add("I1:nuT>=1", w);
            t.add("I1:fracL_sum", w * nu_l as f64 / nu_t as f64);
        }
    }

    for p in plates.iter().filter(|p| p.interior) {
        let w = rw.weight(&p.centroid(comb), p.vertices.iter().map(|&v| pos(v)));
        t.add("P", w);
    }

    for p in &r.polygons {
        if p.sides.iter().any(|s| s.on_window()) {
            continue;
        }
        t.add("I", rw.weight(&p.centroid(), &p.vertices));
    }

    for cell in &r.final_cells {
        if cell
            .facets()
            .iter()
            .any(|f| matches!(f.tag, SourceTag::WindowFacet(_)))
        {
            continue;
        }
        t.add("Z", rw.weight(&cell.centroid_of_vertices(), cell.vertices()));
    }
    t
}

/// One estimated quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityEstimate {
    pub name: String,
    pub estimate: f64,
    /// Standard error across replicates.
    pub se: f64,
    /// Number of replicates.
    pub n: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub quantities: Vec<QuantityEstimate>,
}

impl EstimatorReport {
    pub fn get(&self, name: &str) -> Option<&QuantityEstimate> {
        self.quantities.iter().find(|q| q.name == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["name", "estimate", "se", "n", "margin"])?;
        for q in &self.quantities {
            w.write_record([
                q.name.clone(),
                q.estimate.to_string(),
                q.se.to_string(),
                q.n.to_string(),
                q.margin.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// Pooled ratio `sum(x) / sum(y)` with its standard error across replicates.
pub fn ratio_estimate(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    let sy: f64 = y.iter().sum();
    if n < 2 || sy <= 0.0 {
        return None;
    }
    let ratio = x.iter().sum::<f64>() / sy;
    let ybar = sy / n as f64;
    let ss: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - ratio * yi).powi(2)).sum();
    let se = (ss / (n as f64 * (n - 1) as f64 * ybar * ybar)).sqrt();
    Some((ratio, se))
}

/// Estimator definitions: (name, numerator counter, denominator counter, scale).
fn definitions() -> Vec<(String, String, String, f64)> {
    let mut d = Vec::new();
    let mut push = |name: String, num: String, den: &str, scale: f64| d.push((name, num, den.to_string(), scale));
    for (obj, key) in [("E", "E"), ("P", "P"), ("I1", "I1"), ("I", "I"), ("Z", "Z")] {
        push(format!("lambda_{obj}/lambda_V"), key.into(), "V", 1.0);
    }
    for k in ["T", "X"] {
        push(format!("eps_V[{k}]"), format!("V[{k}]"), "V", 1.0);
    }
    let classes = edge_class_names();
    for c in &classes {
        push(format!("eps_E[{c}]"), format!("E[{c}]"), "E", 1.0);
    }
    for (vertex, star) in [("V[T]", "S[T]"), ("V[X]", "S[X]"), ("V", "S")] {
        for c in &classes {
            push(format!("mu_{vertex},E[{c}]"), format!("{star}:E[{c}]"), star, 1.0);
        }
        for k in ["T", "X"] {
            push(format!("eta_{vertex},V[{k}]"), format!("{star}:V[{k}]"), star, 1.0);
        }
    }
    for (obj, key, per_edge) in [("P", "P", 3.0), ("I", "I", 2.0), ("Z", "Z", 3.0), ("sk(Z)", "Z", 2.0)] {
        for c in &classes {
            push(format!("mu_{obj},E[{c}]"), format!("E[{c}]"), key, per_edge);
        }
    }
    for k in 0..=MAX_HISTOGRAM_BIN + 1 {
        let bin = histogram_bin(k);
        push(format!("p_nu={bin}"), format!("I1:nu={bin}"), "I1", 1.0);
    }
    push("mean_nu".into(), "I1:nu_sum".into(), "I1", 1.0);
    push("mean_nu_T".into(), "I1:nuT_sum".into(), "I1", 1.0);
    push("p_T".into(), "I1:fracT_sum".into(), "I1:nu>=1", 1.0);
    push("P(nu_T>=1)".into(), "I1:nuT>=1".into(), "I1", 1.0);
    push("p_L|T".into(), "I1:fracL_sum".into(), "I1:nuT>=1", 1.0);
    for k in 0..=MAX_HISTOGRAM_BIN + 1 {
        let bin = histogram_bin(k);
        push(format!("P(nu_EXX={bin})"), format!("I1:nuXX={bin}"), "I1", 1.0);
    }
    d
}

/// Combines per-replicate tallies into ratio estimates; quantities whose
/// denominator is zero in every replicate are omitted.
pub fn estimate_from_tallies(tallies: &[Tally], margin: f64) -> Result<EstimatorReport, EstimateError> {
    if tallies.len() < 2 {
        return Err(EstimateError::TooFewReplicates {
            needed: 2,
            got: tallies.len(),
        });
    }
    for required in ["V", "E", "I1"] {
        if tallies.iter().all(|t| t.get(required) == 0.0) {
            return Err(EstimateError::Empty(required.into()));
        }
    }
    let quantities = definitions()
        .into_iter()
        .filter_map(|(name, num, den, scale)| {
            let x: Vec<f64> = tallies.iter().map(|t| scale * t.get(&num)).collect();
            let y: Vec<f64> = tallies.iter().map(|t| t.get(&den)).collect();
            ratio_estimate(&x, &y).map(|(estimate, se)| QuantityEstimate {
                name,
                estimate,
                se,
                n: tallies.len(),
                margin,
            })
        })
        .collect();
    Ok(EstimatorReport { quantities })
}

/// Per-replicate tallies, in replicate order.
pub fn tally_all(results: &[ConstructionResult], margin: f64) -> Result<Vec<Tally>, EstimateError> {
    #[cfg(feature = "parallel")]
    let iter = results.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = results.iter();
    iter.map(|r| tally_replicate(r, margin)).collect()
}

pub fn estimate_statistics(
    results: &[ConstructionResult],
    margin: f64,
) -> Result<EstimatorReport, EstimateError> {
    if !(0.0..0.4).contains(&margin) {
        return Err(EstimateError::Margin(margin));
    }
    if results.len() < 2 {
        return Err(EstimateError::TooFewReplicates {
            needed: 2,
            got: results.len(),
        });
    }
    estimate_from_tallies(&tally_all(results, margin)?, margin)
}

/// Histogram of the number of XX edges per intact segment.
pub fn nu_exx_histogram(
    results: &[ConstructionResult],
    margin: f64,
) -> Result<Vec<QuantityEstimate>, EstimateError> {
    let report = estimate_statistics(results, margin)?;
    Ok(report
        .quantities
        .into_iter()
        .filter(|q| q.name.starts_with("P(nu_EXX="))
        .collect())
}
