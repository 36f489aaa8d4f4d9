//! The spatio-temporal STIT construction inside a bounded window.
//!
//! Every living cell carries an exponential death time with rate
//! `hitting_weight(cell) / hitting_weight(window)`. Cells die in time order;
//! a dying cell is cut by a plane drawn from the plane measure restricted to
//! planes hitting it, and both children receive fresh lifetimes. The run
//! stops once the next death lies beyond the time threshold.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, GeomError};
use crate::geom::{ConvexPolytope, Plane, Point3, SourceTag, TolerancePolicy};
use crate::plane_measure::{hitting_weight, sample_hitting_plane, DirectionalDistribution};

/// Format tag and version of the serialized construction.
pub const RESULT_FORMAT: &str = "stit-construction";
pub const RESULT_VERSION: u32 = 1;

/// Default cap on the number of simultaneously living cells.
pub const DEFAULT_CELL_CAP: usize = 1_000_000;

/// Consecutive near-tangent rejections tolerated for one split.
const MAX_RESAMPLES: usize = 10_000;

/// One side of an I-polygon and the facet of the parent cell it lies in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideRecord {
    pub start: Point3,
    pub end: Point3,
    pub carrier: SourceTag,
}

impl SideRecord {
    pub fn on_window(&self) -> bool {
        self.carrier.is_window()
    }
}

/// The polygon born when a cell is cut.
///
/// `vertices` run counter-clockwise around `plane.normal`; side `k` joins
/// `vertices[k]` to `vertices[k + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IPolygonRecord {
    pub id: u32,
    pub plane: Plane,
    pub birth_time: f64,
    pub vertices: Vec<Point3>,
    pub sides: Vec<SideRecord>,
}

impl IPolygonRecord {
    pub fn centroid(&self) -> Point3 {
        let n = self.vertices.len() as f64;
        Point3::from(self.vertices.iter().map(|v| v.coords).sum::<crate::geom::Vec3>() / n)
    }
}

/// A finished construction `Y(t, W)` with its provenance log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionResult {
    pub format: String,
    pub version: u32,
    pub window: ConvexPolytope,
    pub final_cells: Vec<ConvexPolytope>,
    pub polygons: Vec<IPolygonRecord>,
    pub t: f64,
    pub seed: u64,
    pub replicate: u64,
    pub direction_dist: String,
    pub policy: TolerancePolicy,
}

impl ConstructionResult {
    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string(self)
    }

    pub fn from_json(s: &str) -> Result<Self, EngineError> {
        let r: Self = serde_json::from_str(s)
            .map_err(|e| EngineError::InvalidArgument(format!("bad construction JSON: {e}")))?;
        if r.format != RESULT_FORMAT || r.version != RESULT_VERSION {
            return Err(EngineError::InvalidArgument(format!(
                "unsupported document {} v{}",
                r.format, r.version
            )));
        }
        Ok(r)
    }

    /// Writes the polygon loops as OBJ faces, one group per polygon.
    pub fn write_obj<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# STIT construction t={} seed={} replicate={}", self.t, self.seed, self.replicate)?;
        let mut next = 1usize;
        for p in &self.polygons {
            writeln!(out, "g polygon_{}", p.id)?;
            for v in &p.vertices {
                writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
            }
            write!(out, "f")?;
            for k in 0..p.vertices.len() {
                write!(out, " {}", next + k)?;
            }
            writeln!(out)?;
            next += p.vertices.len();
        }
        Ok(())
    }

    pub fn total_volume(&self) -> f64 {
        self.final_cells.iter().map(ConvexPolytope::volume).sum()
    }
}

/// Run parameters besides the window and the plane measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub t: f64,
    pub seed: u64,
    pub replicate: u64,
    pub cell_cap: usize,
}

impl RunParams {
    pub fn new(t: f64, seed: u64) -> Self {
        Self {
            t,
            seed,
            replicate: 0,
            cell_cap: DEFAULT_CELL_CAP,
        }
    }

    pub fn replicate(mut self, replicate: u64) -> Self {
        self.replicate = replicate;
        self
    }
}

/// Independent stream for one replicate of a master seed.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Tolerances for a window: `merge_eps` scales with the window size.
pub fn policy_for(window: &ConvexPolytope) -> TolerancePolicy {
    TolerancePolicy::for_window_side(window.diameter() / 3f64.sqrt())
}

struct Death {
    time: f64,
    cell: usize,
}

impl PartialEq for Death {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Death {}
impl PartialOrd for Death {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Death {
    // reversed so that the max-heap yields the earliest death
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.cell.cmp(&self.cell))
    }
}

/// Runs the construction up to time `params.t`.
pub fn run_construction(
    window: &ConvexPolytope,
    d: &DirectionalDistribution,
    params: &RunParams,
) -> Result<ConstructionResult, EngineError> {
    if !(params.t >= 0.0 && params.t.is_finite()) {
        return Err(EngineError::InvalidArgument(format!(
            "time must be finite and non-negative, got {}",
            params.t
        )));
    }
    let policy = policy_for(window);
    window.validate(&policy)?;
    let w0 = hitting_weight(window, d)?;
    let mut rng = replicate_rng(params.seed, params.replicate);
    let lifetime = |cell: &ConvexPolytope, rng: &mut ChaCha8Rng| -> Result<f64, GeomError> {
        let rate = hitting_weight(cell, d)? / w0;
        let e: f64 = rng.sample(Exp1);
        Ok(e / rate)
    };

    let mut cells: Vec<Option<ConvexPolytope>> = vec![Some(window.clone())];
    let mut queue = BinaryHeap::new();
    queue.push(Death {
        time: lifetime(window, &mut rng)?,
        cell: 0,
    });
    let mut polygons: Vec<IPolygonRecord> = Vec::new();
    let mut alive = 1usize;

    while let Some(ev) = queue.pop() {
        if ev.time > params.t {
            break;
        }
        let cell = cells[ev.cell].take().expect("dying cell is alive");
        let id = polygons.len() as u32;
        let mut attempts = 0;
        let split = loop {
            let plane = sample_hitting_plane(&cell, d, &mut rng)?;
            match cell.split(&plane, SourceTag::IPolygon(id), &policy) {
                Ok(s) => break (plane, s),
                Err(GeomError::NearTangent { .. } | GeomError::NoSplit) if attempts < MAX_RESAMPLES => {
                    attempts += 1;
                }
                Err(e) => return Err(e.into()),
            }
        };
        let (plane, split) = split;
        let n = split.section.vertices.len();
        let sides = (0..n)
            .map(|k| SideRecord {
                start: split.section.vertices[k],
                end: split.section.vertices[(k + 1) % n],
                carrier: split.section.carriers[k],
            })
            .collect();
        polygons.push(IPolygonRecord {
            id,
            plane,
            birth_time: ev.time,
            vertices: split.section.vertices,
            sides,
        });
        for child in [split.plus, split.minus] {
            let death = ev.time + lifetime(&child, &mut rng)?;
            cells.push(Some(child));
            queue.push(Death {
                time: death,
                cell: cells.len() - 1,
            });
        }
        alive += 1;
        if alive > params.cell_cap {
            return Err(EngineError::CellCapExceeded {
                count: alive,
                cap: params.cell_cap,
            });
        }
    }

    Ok(ConstructionResult {
        format: RESULT_FORMAT.to_owned(),
        version: RESULT_VERSION,
        window: window.clone(),
        final_cells: cells.into_iter().flatten().collect(),
        polygons,
        t: params.t,
        seed: params.seed,
        replicate: params.replicate,
        direction_dist: d.name().to_owned(),
        policy,
    })
}

/// Runs replicates `0..count` of `seed`, in parallel when available; the
/// output order is the replicate order.
pub fn run_replicates(
    window: &ConvexPolytope,
    d: &DirectionalDistribution,
    t: f64,
    seed: u64,
    count: usize,
    cell_cap: usize,
) -> Result<Vec<ConstructionResult>, EngineError> {
    let one = |r: usize| {
        let params = RunParams {
            t,
            seed,
            replicate: r as u64,
            cell_cap,
        };
        run_construction(window, d, &params)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(one).collect()
    }
}

/// Number of pilot runs used by [`calibrate_time`].
pub const PILOT_RUNS: usize = 5;

/// Finds a time threshold whose mean final cell count over the pilot runs is
/// within 20% of `target_cells`.
///
/// The pilots reuse the same random streams for every candidate time, so the
/// cell count is non-decreasing in `t` and bisection is well defined.
pub fn calibrate_time(
    window: &ConvexPolytope,
    d: &DirectionalDistribution,
    target_cells: usize,
    seed: u64,
    cell_cap: usize,
) -> Result<f64, EngineError> {
    if target_cells <= 1 {
        return Ok(0.0);
    }
    let target = target_cells as f64;
    let pilot_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mean_cells = |t: f64| -> Result<f64, EngineError> {
        let runs = run_replicates(window, d, t, pilot_seed, PILOT_RUNS, cell_cap)?;
        Ok(runs.iter().map(|r| r.final_cells.len() as f64).sum::<f64>() / PILOT_RUNS as f64)
    };
    let close = |m: f64| (m - target).abs() <= 0.2 * target;

    let mut lo = 0.0;
    let mut hi = 1.0;
    loop {
        let m = mean_cells(hi)?;
        if close(m) {
            return Ok(hi);
        }
        if m > target {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let m = mean_cells(mid)?;
        if close(m) {
            return Ok(mid);
        }
        if m < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(EngineError::Sampling(format!(
        "time calibration for {target_cells} cells did not converge"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::make_window;

    fn run(t: f64, seed: u64) -> ConstructionResult {
        let w = make_window(1.0).unwrap();
        run_construction(&w, &DirectionalDistribution::Isotropic, &RunParams::new(t, seed)).unwrap()
    }

    #[test]
    fn zero_time_keeps_the_window() {
        let r = run(0.0, 1);
        assert_eq!(r.final_cells.len(), 1);
        assert!(r.polygons.is_empty());
    }

    #[test]
    fn each_split_adds_a_cell_and_a_polygon() {
        let r = run(15.0, 3);
        assert!(r.polygons.len() > 10);
        assert_eq!(r.final_cells.len(), r.polygons.len() + 1);
        assert!((r.total_volume() - 1.0).abs() < 1e-9);
        for c in &r.final_cells {
            c.validate(&r.policy).unwrap();
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let a = run(5.0, 42);
        let b = run(5.0, 42);
        assert_eq!(a.polygons, b.polygons);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = run(5.0, 43);
        assert_ne!(a.polygons, c.polygons);
    }

    #[test]
    fn sides_lie_on_their_carriers() {
        let r = run(15.0, 11);
        let planes: Vec<Plane> = r.polygons.iter().map(|p| p.plane).collect();
        let window = &r.window;
        for p in &r.polygons {
            for s in &p.sides {
                let carrier = match s.carrier {
                    SourceTag::IPolygon(q) => {
                        assert!(q < p.id);
                        planes[q as usize]
                    }
                    SourceTag::WindowFacet(k) => window.facets()[k as usize].plane,
                };
                for x in [s.start, s.end] {
                    assert!(carrier.signed_distance(&x).abs() < 1e-9);
                    assert!(p.plane.signed_distance(&x).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn birth_times_are_ordered() {
        let r = run(15.0, 5);
        assert!(r.polygons.windows(2).all(|w| w[0].birth_time <= w[1].birth_time));
        assert!(r.polygons.iter().all(|p| p.birth_time > 0.0 && p.birth_time <= 15.0));
    }

    #[test]
    fn json_round_trip() {
        let r = run(3.0, 9);
        let back = ConstructionResult::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back.polygons, r.polygons);
    }

    #[test]
    fn cap_is_enforced() {
        let w = make_window(1.0).unwrap();
        let mut p = RunParams::new(20.0, 1);
        p.cell_cap = 50;
        let e = run_construction(&w, &DirectionalDistribution::Isotropic, &p).unwrap_err();
        assert!(matches!(e, EngineError::CellCapExceeded { .. }));
    }
}
