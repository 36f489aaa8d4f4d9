use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::segments::corner_offsets;
use super::Combinatorics;
use crate::engine::ConstructionResult;
use crate::error::ClassifyError;
use crate::geom::{dedup_points, Point3, SourceTag, TolerancePolicy};

/// A plate: a face of the subdivision of one I-polygon by the segments lying
/// in its plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plate {
    pub polygon: u32,
    /// Boundary cycle, counter-clockwise about the polygon normal.
    pub vertices: Vec<usize>,
    /// `edges[k]` joins `vertices[k]` and `vertices[k + 1]`; `None` for
    /// pieces of polygon sides lying on the window.
    pub edges: Vec<Option<usize>>,
    pub area: f64,
    /// No boundary vertex lies on the window.
    pub interior: bool,
}

impl Plate {
    pub fn centroid(&self, comb: &Combinatorics) -> Point3 {
        let sum = self
            .vertices
            .iter()
            .fold(Point3::origin().coords, |acc, &v| acc + comb.vertices[v].position.coords);
        Point3::from(sum / self.vertices.len() as f64)
    }

    /// Boundary split into maximal straight runs, as lists of edge ids.
    pub fn sides(&self, comb: &Combinatorics, angular_tol: f64) -> Vec<Vec<Option<usize>>> {
        let m = self.edges.len();
        let dir = |k: usize| {
            let a = comb.vertices[self.vertices[k]].position;
            let b = comb.vertices[self.vertices[(k + 1) % m]].position;
            (b - a).normalize()
        };
        let turns: Vec<bool> = (0..m)
            .map(|k| {
                let (u, v) = (dir((k + m - 1) % m), dir(k));
                u.cross(&v).norm() > angular_tol || u.dot(&v) < 0.0
            })
            .collect();
        let Some(first) = turns.iter().position(|&t| t) else {
            return vec![self.edges.clone()];
        };
        let mut sides = Vec::new();
        let mut current = Vec::new();
        for step in 0..m {
            let k = (first + step) % m;
            if turns[k] && !current.is_empty() {
                sides.push(std::mem::take(&mut current));
            }
            current.push(self.edges[k]);
        }
        sides.push(current);
        sides
    }
}

/// Plates of every polygon, by a face traversal of the planar graph formed
/// by the polygon's own edges and the edges of segments it carries.
pub fn extract_plates(
    r: &ConstructionResult,
    comb: &Combinatorics,
) -> Result<Vec<Plate>, ClassifyError> {
    // corners of other polygons lying on a window-carried side of a polygon
    let offsets = corner_offsets(r);
    let mut on_window_side: HashMap<(u32, SourceTag), Vec<usize>> = HashMap::new();
    for p in &r.polygons {
        let m = p.sides.len();
        for k in 0..m {
            let pair = (p.sides[(k + m - 1) % m].carrier, p.sides[k].carrier);
            let key = match pair {
                (SourceTag::IPolygon(a), w @ SourceTag::WindowFacet(_))
                | (w @ SourceTag::WindowFacet(_), SourceTag::IPolygon(a)) => (a, w),
                _ => continue,
            };
            on_window_side.entry(key).or_default().push(offsets[p.id as usize] + k);
        }
    }

    let mut per_polygon: Vec<Vec<GraphEdge>> = vec![Vec::new(); r.polygons.len()];
    for (ei, e) in comb.edges.iter().enumerate() {
        let s = &comb.segments[e.segment];
        let owner = s.seg_id.polygon;
        match s.carrier {
            SourceTag::IPolygon(q) => {
                per_polygon[owner as usize].push((e.endpoints, Some(ei)));
                per_polygon[q as usize].push((e.endpoints, Some(ei)));
            }
            window => {
                let mut chain: Vec<usize> = on_window_side
                    .get(&(owner, window))
                    .cloned()
                    .unwrap_or_default();
                let d = s.end - s.start;
                chain.sort_by(|&a, &b| {
                    let ta = (comb.vertices[a].position - s.start).dot(&d);
                    let tb = (comb.vertices[b].position - s.start).dot(&d);
                    ta.total_cmp(&tb)
                });
                chain.insert(0, s.start_vertex);
                chain.push(s.end_vertex);
                for w in chain.windows(2) {
                    per_polygon[owner as usize].push(([w[0], w[1]], None));
                }
            }
        }
    }
    let mut plates = Vec::new();
    for (pi, edges) in per_polygon.iter().enumerate() {
        plates.extend(polygon_plates(r, comb, pi as u32, edges)?);
    }
    Ok(plates)
}

type GraphEdge = ([usize; 2], Option<usize>);

fn polygon_plates(
    r: &ConstructionResult,
    comb: &Combinatorics,
    polygon: u32,
    graph: &[GraphEdge],
) -> Result<Vec<Plate>, ClassifyError> {
    let err = |detail: String| ClassifyError::Plate { polygon, detail };
    let plane = r.polygons[polygon as usize].plane;
    let (e1, e2) = plane.basis();
    let flat = |v: usize| {
        let p = comb.vertices[v].position.coords;
        [p.dot(&e1), p.dot(&e2)]
    };

    // outgoing half-edges per vertex, sorted counter-clockwise
    let mut out: HashMap<usize, Vec<(f64, usize, usize)>> = HashMap::new();
    for (gi, &([a, b], _)) in graph.iter().enumerate() {
        let (pa, pb) = (flat(a), flat(b));
        out.entry(a)
            .or_default()
            .push(((pb[1] - pa[1]).atan2(pb[0] - pa[0]), b, gi));
        out.entry(b)
            .or_default()
            .push(((pa[1] - pb[1]).atan2(pa[0] - pb[0]), a, gi));
    }
    for list in out.values_mut() {
        list.sort_by(|x, y| x.0.total_cmp(&y.0));
        if list.len() < 2 {
            return Err(err(format!("dangling vertex of degree {}", list.len())));
        }
    }

    let mut visited: HashMap<(usize, usize), bool> = HashMap::new();
    let mut starts: Vec<(usize, usize)> = Vec::new();
    let mut vs: Vec<usize> = out.keys().copied().collect();
    vs.sort_unstable();
    for &v in &vs {
        for &(_, _, ei) in &out[&v] {
            starts.push((v, ei));
            visited.insert((v, ei), false);
        }
    }

    let mut plates = Vec::new();
    let mut outer_faces = 0;
    for &(v0, e0) in &starts {
        if visited[&(v0, e0)] {
            continue;
        }
        let mut verts = Vec::new();
        let mut edges = Vec::new();
        let (mut v, mut e) = (v0, e0);
        loop {
            if visited[&(v, e)] {
                return Err(err("face traversal did not close".into()));
            }
            visited.insert((v, e), true);
            verts.push(v);
            edges.push(graph[e].1);
            let [a, b] = graph[e].0;
            let w = if a == v { b } else { a };
            // next half-edge: the one preceding the twin in counter-clockwise order
            let list = &out[&w];
            let twin = list
                .iter()
                .position(|&(_, _, ee)| ee == e)
                .ok_or_else(|| err("missing twin half-edge".into()))?;
            let (_, _, next) = list[(twin + list.len() - 1) % list.len()];
            v = w;
            e = next;
            if (v, e) == (v0, e0) {
                break;
            }
        }
        let pts: Vec<[f64; 2]> = verts.iter().map(|&v| flat(v)).collect();
        let area = 0.5
            * (0..pts.len())
                .map(|k| {
                    let (p, q) = (pts[k], pts[(k + 1) % pts.len()]);
                    p[0] * q[1] - p[1] * q[0]
                })
                .sum::<f64>();
        if area > 0.0 {
            let interior = verts.iter().all(|&v| comb.vertices[v].is_interior());
            plates.push(Plate {
                polygon,
                vertices: verts,
                edges,
                area,
                interior,
            });
        } else {
            outer_faces += 1;
        }
    }
    let expected = graph.len() as i64 - out.len() as i64 + 1;
    if outer_faces != 1 || plates.len() as i64 != expected {
        return Err(err(format!(
            "{} bounded and {outer_faces} unbounded faces; Euler relation wants {expected} bounded",
            plates.len()
        )));
    }
    Ok(plates)
}

/// For each interior edge, the number of plate sides consisting of exactly
/// that edge; `None` for edges touching the window.
pub fn p1_oracle(comb: &Combinatorics, plates: &[Plate], angular_tol: f64) -> Vec<Option<u8>> {
    let mut counts = vec![0u8; comb.edges.len()];
    for p in plates {
        for side in p.sides(comb, angular_tol) {
            if let [Some(e)] = side[..] {
                counts[e] += 1;
            }
        }
    }
    comb.edges
        .iter()
        .zip(counts)
        .map(|(e, c)| e.interior.then_some(c))
        .collect()
}

/// For each interior edge, the number of ridges of final cells equal to it;
/// `None` for edges touching the window.
pub fn z1_oracle(r: &ConstructionResult, comb: &Combinatorics) -> Vec<Option<u8>> {
    let mut points: Vec<Point3> = comb.vertices.iter().map(|v| v.position).collect();
    let mut ridges = Vec::new();
    for cell in &r.final_cells {
        let base = points.len();
        points.extend_from_slice(cell.vertices());
        ridges.extend(cell.edges().iter().map(|e| (base + e.a as usize, base + e.b as usize)));
    }
    let policy = TolerancePolicy {
        merge_eps: 100.0 * r.policy.merge_eps,
        angular_eps: r.policy.angular_eps,
    };
    let labels = dedup_points(&points, &policy);
    let mut by_pair: HashMap<(usize, usize), usize> = HashMap::new();
    for (ei, e) in comb.edges.iter().enumerate() {
        let (a, b) = (labels[e.endpoints[0]], labels[e.endpoints[1]]);
        by_pair.insert((a.min(b), a.max(b)), ei);
    }
    let mut counts = vec![0u8; comb.edges.len()];
    for (a, b) in ridges {
        let (a, b) = (labels[a], labels[b]);
        if let Some(&ei) = by_pair.get(&(a.min(b), a.max(b))) {
            counts[ei] += 1;
        }
    }
    comb.edges
        .iter()
        .zip(counts)
        .map(|(e, c)| e.interior.then_some(c))
        .collect()
}
