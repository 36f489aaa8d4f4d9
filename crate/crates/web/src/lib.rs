//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string; the plain Rust functions behind them
//! are usable (and tested) natively.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use stit_core::analytic::{p_lr, p_n, p_t_given_n, sample_summary, QuadratureConfig};
use stit_core::combinatorics::{analyze, VertexKind};
use stit_core::engine::{run_construction, RunParams};
use stit_core::geom::make_window;
use stit_core::plane_measure::DirectionPreset;
use wasm_bindgen::prelude::*;

/// Largest time accepted by the demo; keeps a run well under a second.
pub const MAX_TIME: f64 = 25.0;
pub const MAX_SAMPLES: u64 = 2_000_000;
pub const MAX_SEGMENT_N: u32 = 30;

#[derive(Debug, Serialize)]
pub struct Realization {
    pub cells: usize,
    /// Polygon loops as flat `[x, y, z, x, y, z, ...]` arrays, oldest first.
    pub polygons: Vec<Vec<f64>>,
    pub birth_times: Vec<f64>,
    pub t_vertices: Vec<[f64; 3]>,
    pub x_vertices: Vec<[f64; 3]>,
    pub segments: usize,
    pub edges: usize,
}

fn preset(name: &str) -> Result<DirectionPreset, String> {
    name.parse()
}

pub fn realize(time: f64, seed: u64, directions: &str) -> Result<Realization, String> {
    if !(0.0..=MAX_TIME).contains(&time) {
        return Err(format!("time must lie in [0, {MAX_TIME}]"));
    }
    let window = make_window(1.0).map_err(|e| e.to_string())?;
    let d = preset(directions)?.build().map_err(|e| e.to_string())?;
    let r = run_construction(&window, &d, &RunParams::new(time, seed)).map_err(|e| e.to_string())?;
    let comb = analyze(&r).map_err(|e| e.to_string())?;
    let pick = |k: VertexKind| -> Vec<[f64; 3]> {
        comb.vertices
            .iter()
            .filter(|v| v.kind == k)
            .map(|v| [v.position.x, v.position.y, v.position.z])
            .collect()
    };
    Ok(Realization {
        cells: r.final_cells.len(),
        polygons: r
            .polygons
            .iter()
            .map(|p| p.vertices.iter().flat_map(|v| [v.x, v.y, v.z]).collect())
            .collect(),
        birth_times: r.polygons.iter().map(|p| p.birth_time).collect(),
        t_vertices: pick(VertexKind::T),
        x_vertices: pick(VertexKind::X),
        segments: comb.segments.len(),
        edges: comb.edges.len(),
    })
}

#[derive(Debug, Serialize)]
pub struct SegmentRow {
    pub n: u32,
    pub p_n: f64,
    /// T fraction among the interior vertices given `n`; absent for `n = 0`.
    pub p_t_given_n: Option<f64>,
}

pub fn segment_table(max_n: u32) -> Result<Vec<SegmentRow>, String> {
    if max_n > MAX_SEGMENT_N {
        return Err(format!("at most {MAX_SEGMENT_N} rows"));
    }
    let q = QuadratureConfig::default();
    (0..=max_n)
        .map(|n| {
            Ok(SegmentRow {
                n,
                p_n: p_n(n, &q).map_err(|e| e.to_string())?.value,
                p_t_given_n: if n == 0 {
                    None
                } else {
                    Some(p_t_given_n(n, &q).map_err(|e| e.to_string())?.value)
                },
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct SampleRow {
    pub t_count: u32,
    pub empirical: f64,
    pub se: f64,
    pub exact: f64,
}

#[derive(Debug, Serialize)]
pub struct SampleComparison {
    pub draws: u64,
    pub rows: Vec<SampleRow>,
    pub left_fraction: f64,
    pub left_fraction_se: f64,
}

pub fn compare_samples(draws: u64, seed: u64) -> Result<SampleComparison, String> {
    if !(2..=MAX_SAMPLES).contains(&draws) {
        return Err(format!("draws must lie in [2, {MAX_SAMPLES}]"));
    }
    const MAX_T: usize = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = sample_summary(1.0, draws, MAX_T, 0, &mut rng).map_err(|e| e.to_string())?;
    let q = QuadratureConfig::default();
    let mut rows = Vec::new();
    for m in 0..=MAX_T as u32 {
        let mut exact = 0.0;
        for l in 0..=m {
            exact += p_lr(l, m - l, &q).map_err(|e| e.to_string())?.value;
        }
        let (empirical, se) = s.proportion(s.t_counts[m as usize]);
        rows.push(SampleRow {
            t_count: m,
            empirical,
            se,
            exact,
        });
    }
    let (left_fraction, left_fraction_se) = s.left_fraction();
    Ok(SampleComparison {
        draws,
        rows,
        left_fraction,
        left_fraction_se,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

/// Runs one construction in the unit cube. `seed` is a JS number; its
/// integer part is used.
#[wasm_bindgen]
pub fn simulate(time: f64, seed: f64, directions: &str) -> Result<String, JsError> {
    to_js(realize(time, seed as u64, directions))
}

/// Vertex-count distribution of the typical I-segment for `n = 0..=max_n`.
#[wasm_bindgen(js_name = segmentTable)]
pub fn segment_table_js(max_n: u32) -> Result<String, JsError> {
    to_js(segment_table(max_n))
}

/// Direct draws of the typical I-segment against quadrature.
#[wasm_bindgen(js_name = sampleSegments)]
pub fn sample_segments_js(draws: f64, seed: f64) -> Result<String, JsError> {
    to_js(compare_samples(draws as u64, seed as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realization_counts_add_up() {
        let r = realize(6.0, 3, "isotropic").unwrap();
        assert_eq!(r.cells, r.polygons.len() + 1);
        assert!(r.polygons.iter().all(|p| p.len() % 3 == 0 && p.len() >= 9));
        assert!(realize(MAX_TIME + 1.0, 1, "isotropic").is_err());
        assert!(realize(1.0, 1, "cubic").is_err());
    }

    #[test]
    fn segment_table_sums_below_one() {
        let rows = segment_table(10).unwrap();
        let total: f64 = rows.iter().map(|r| r.p_n).sum();
        assert!(total < 1.0 && total > 0.9);
        assert!(rows[0].p_t_given_n.is_none());
    }

    #[test]
    fn samples_track_quadrature() {
        let c = compare_samples(50_000, 2).unwrap();
        for r in &c.rows {
            assert!((r.empirical - r.exact).abs() < 5.0 * r.se.max(1e-4), "{r:?}");
        }
    }
}
