use std::collections::HashMap;

use super::{incidence_tol, ISegmentRecord, Mark, MarkKind, SegId, Side};
use crate::engine::ConstructionResult;
use crate::error::ClassifyError;
use crate::geom::{Plane, Point3, SourceTag, Vec3};

/// Id of the vertex at corner `k` of polygon `p`; corners are numbered
/// polygon by polygon.
pub(crate) fn corner_offsets(r: &ConstructionResult) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(r.polygons.len() + 1);
    let mut acc = 0;
    for p in &r.polygons {
        offsets.push(acc);
        acc += p.vertices.len();
    }
    offsets.push(acc);
    offsets
}

fn carrier_plane(r: &ConstructionResult, tag: SourceTag) -> Plane {
    match tag {
        SourceTag::IPolygon(q) => r.polygons[q as usize].plane,
        SourceTag::WindowFacet(k) => r.window.facets()[k as usize].plane,
    }
}

fn lexicographic_lt(a: &Point3, b: &Point3) -> bool {
    (a.x, a.y, a.z) < (b.x, b.y, b.z)
}

/// One record per polygon side, with empty mark lists.
pub fn extract_segments(r: &ConstructionResult) -> Result<Vec<ISegmentRecord>, ClassifyError> {
    let offsets = corner_offsets(r);
    let tol = incidence_tol(r);
    let mut out = Vec::new();
    for p in &r.polygons {
        let m = p.vertices.len();
        for (k, side) in p.sides.iter().enumerate() {
            let carrier = carrier_plane(r, side.carrier);
            for x in [side.start, side.end] {
                let d = carrier.signed_distance(&x).abs().max(p.plane.signed_distance(&x).abs());
                if d > tol {
                    return Err(ClassifyError::Carrier {
                        polygon: p.id,
                        side: k,
                        detail: format!("endpoint {x:?} is {d:.3e} off its planes"),
                    });
                }
            }
            if let SourceTag::IPolygon(q) = side.carrier {
                if q >= p.id {
                    return Err(ClassifyError::Carrier {
                        polygon: p.id,
                        side: k,
                        detail: format!("carrier polygon {q} is not older"),
                    });
                }
            }
            let (a, b) = (offsets[p.id as usize] + k, offsets[p.id as usize] + (k + 1) % m);
            let (start, end, start_vertex, end_vertex) = if lexicographic_lt(&side.start, &side.end) {
                (side.start, side.end, a, b)
            } else {
                (side.end, side.start, b, a)
            };
            out.push(ISegmentRecord {
                seg_id: SegId {
                    polygon: p.id,
                    side: k as u32,
                },
                carrier: side.carrier,
                start,
                end,
                start_vertex,
                end_vertex,
                parent_plane: p.plane,
                marks: Vec::new(),
            });
        }
    }
    Ok(out)
}

/// Parameter of `x` along `seg`, checking that `x` lies within `tol` of the
/// segment's line and more than `near` from both endpoints.
fn interior_param(seg: &ISegmentRecord, x: &Point3, tol: f64, near: f64) -> Result<f64, String> {
    let d = seg.end - seg.start;
    let len2 = d.norm_squared();
    let t = (x - seg.start).dot(&d) / len2;
    let off = (x - seg.point_at(t)).norm();
    let len = len2.sqrt();
    if off > tol {
        return Err(format!("point {x:?} is {off:.3e} off segment {:?}", seg.seg_id));
    }
    if t * len <= near || (1.0 - t) * len <= near {
        return Err(format!(
            "point {x:?} is not interior to segment {:?} (param {t})",
            seg.seg_id
        ));
    }
    Ok(t)
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Places T and X marks on the segments and sorts them along each segment.
///
/// Returns the positions of the X vertices; X vertex `i` has id
/// `corner count + i`.
pub fn place_marks(
    segments: &mut [ISegmentRecord],
    r: &ConstructionResult,
) -> Result<Vec<Point3>, ClassifyError> {
    let offsets = corner_offsets(r);
    let n_corners = *offsets.last().unwrap_or(&0);
    let tol = incidence_tol(r);
    // genuine vertices can be far closer together than the incidence tolerance
    let near = r.policy.merge_eps;
    let index: HashMap<(u32, SourceTag), usize> = segments
        .iter()
        .enumerate()
        .map(|(i, s)| ((s.seg_id.polygon, s.carrier), i))
        .collect();

    // T marks: corners whose two carriers are both polygons
    for poly in &r.polygons {
        let m = poly.vertices.len();
        for k in 0..m {
            let prev = poly.sides[(k + m - 1) % m].carrier;
            let next = poly.sides[k].carrier;
            let (SourceTag::IPolygon(pa), SourceTag::IPolygon(pb)) = (prev, next) else {
                continue;
            };
            let (older, younger) = (pa.min(pb), pa.max(pb));
            if younger >= poly.id {
                return Err(ClassifyError::Mark(format!(
                    "corner {k} of polygon {} rests on younger polygon {younger}",
                    poly.id
                )));
            }
            let &si = index
                .get(&(younger, SourceTag::IPolygon(older)))
                .ok_or_else(|| {
                    ClassifyError::Mark(format!(
                        "corner {k} of polygon {}: polygon {younger} has no side on {older}",
                        poly.id
                    ))
                })?;
            let c = poly.vertices[k];
            let seg = &segments[si];
            let param = interior_param(seg, &c, tol, near).map_err(|e| {
                ClassifyError::Mark(format!("corner {k} of polygon {}: {e}", poly.id))
            })?;

            // trace of the corner's polygon in the carrier plane
            let trace = if prev == SourceTag::IPolygon(older) {
                poly.vertices[(k + m - 1) % m] - c
            } else {
                poly.vertices[(k + 1) % m] - c
            };
            let carrier_normal = r.polygons[older as usize].plane.normal;
            let owner_normal = seg.parent_plane.normal;
            let d = seg.end - seg.start;
            let lateral: Vec3 = carrier_normal.cross(&d);
            let left = trace.dot(&lateral) > 0.0;
            // equivalent description: the half-space of the owner's plane
            // holding the inducing polygon
            let side_of_owner = owner_normal.dot(&(poly.centroid() - c)).signum();
            let frame_sign = owner_normal.dot(&lateral).signum();
            if left != (side_of_owner * frame_sign > 0.0) {
                return Err(ClassifyError::Mark(format!(
                    "L/R label of corner {k} of polygon {} disagrees with its side of polygon {younger}",
                    poly.id
                )));
            }
            segments[si].marks.push(Mark {
                param,
                kind: MarkKind::T(if left { Side::Left } else { Side::Right }),
                source_polygon: poly.id,
                birth_time: poly.birth_time,
                vertex: offsets[poly.id as usize] + k,
            });
        }
    }

    // X marks: crossings of segments on opposite sides of a common carrier
    let mut by_carrier: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, s) in segments.iter().enumerate() {
        if let SourceTag::IPolygon(q) = s.carrier {
            by_carrier.entry(q).or_default().push(i);
        }
    }
    let mut carriers: Vec<u32> = by_carrier.keys().copied().collect();
    carriers.sort_unstable();
    let mut x_vertices = Vec::new();
    for q in carriers {
        let members = &by_carrier[&q];
        let carrier = &r.polygons[q as usize];
        let (e1, e2) = carrier.plane.basis();
        let origin = carrier.vertices[0];
        let to2 = |x: &Point3| {
            let v = x - origin;
            [v.dot(&e1), v.dot(&e2)]
        };
        struct Flat {
            seg: usize,
            p: [f64; 2],
            q: [f64; 2],
            lo: [f64; 2],
            hi: [f64; 2],
        }
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for &i in members {
            let s = &segments[i];
            let owner = &r.polygons[s.seg_id.polygon as usize];
            let side = carrier.plane.signed_distance(&owner.centroid());
            let (p, qq) = (to2(&s.start), to2(&s.end));
            let f = Flat {
                seg: i,
                p,
                q: qq,
                lo: [p[0].min(qq[0]) - tol, p[1].min(qq[1]) - tol],
                hi: [p[0].max(qq[0]) + tol, p[1].max(qq[1]) + tol],
            };
            if side > 0.0 {
                plus.push(f);
            } else {
                minus.push(f);
            }
        }
        for a in &plus {
            for b in &minus {
                if a.hi[0] < b.lo[0] || b.hi[0] < a.lo[0] || a.hi[1] < b.lo[1] || b.hi[1] < a.lo[1] {
                    continue;
                }
                let da = [a.q[0] - a.p[0], a.q[1] - a.p[1]];
                let db = [b.q[0] - b.p[0], b.q[1] - b.p[1]];
                let w = [b.p[0] - a.p[0], b.p[1] - a.p[1]];
                let denom = cross2(da, db);
                let la = (da[0] * da[0] + da[1] * da[1]).sqrt();
                let lb = (db[0] * db[0] + db[1] * db[1]).sqrt();
                if denom.abs() <= 1e-14 * la * lb {
                    continue;
                }
                let ta = cross2(w, db) / denom;
                let tb = cross2(w, da) / denom;
                let margin_a = near / la;
                let margin_b = near / lb;
                let outside = ta < -margin_a || ta > 1.0 + margin_a || tb < -margin_b || tb > 1.0 + margin_b;
                if outside {
                    continue;
                }
                let inside = ta > margin_a && ta < 1.0 - margin_a && tb > margin_b && tb < 1.0 - margin_b;
                if !inside {
                    return Err(ClassifyError::Mark(format!(
                        "ambiguous crossing of {:?} and {:?} near an endpoint",
                        segments[a.seg].seg_id, segments[b.seg].seg_id
                    )));
                }
                let pa = segments[a.seg].point_at(ta);
                let pb = segments[b.seg].point_at(tb);
                if (pa - pb).norm() > tol {
                    return Err(ClassifyError::Mark(format!(
                        "crossing of {:?} and {:?} is not a common point",
                        segments[a.seg].seg_id, segments[b.seg].seg_id
                    )));
                }
                let vertex = n_corners + x_vertices.len();
                x_vertices.push(pa);
                for (mine, other, t) in [(a.seg, b.seg, ta), (b.seg, a.seg, tb)] {
                    let src = segments[other].seg_id.polygon;
                    segments[mine].marks.push(Mark {
                        param: t,
                        kind: MarkKind::X,
                        source_polygon: src,
                        birth_time: r.polygons[src as usize].birth_time,
                        vertex,
                    });
                }
            }
        }
    }

    for s in segments.iter_mut() {
        s.marks.sort_by(|a, b| a.param.total_cmp(&b.param));
        let len = s.length();
        for w in s.marks.windows(2) {
            if (w[1].param - w[0].param) * len <= r.policy.merge_eps {
                return Err(ClassifyError::Mark(format!(
                    "marks of segment {:?} coincide at param {}",
                    s.seg_id, w[0].param
                )));
            }
        }
    }
    Ok(x_vertices)
}
