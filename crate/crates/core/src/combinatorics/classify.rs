use super::segments::corner_offsets;
use super::{EdgeRecord, EndKind, ISegmentRecord, TxClass, VertexKind, VertexRecord};
use crate::engine::ConstructionResult;
use crate::error::ClassifyError;
use crate::geom::{dedup_points, Point3, SourceTag};

/// Classes of an edge from the kinds of its endpoints:
/// `(endpoint-type class, plate sides equal to it, ridges equal to it)`.
pub fn classify_edge(a: EndKind, b: EndKind) -> (TxClass, u8, u8) {
    use EndKind::*;
    let is_t = |k: EndKind| matches!(k, B | TL | TR);
    let tx = match (is_t(a), is_t(b)) {
        (true, true) => TxClass::TT,
        (false, false) => TxClass::XX,
        _ => TxClass::TX,
    };
    let (p1, z1) = match (a, b) {
        (B, B) => (3, 2),
        (B, X) | (X, B) => (2, 0),
        (B, _) | (_, B) => (2, 1),
        (X, X) => (2, 0),
        (TL, TL) | (TR, TR) => (2, 1),
        (TL, TR) | (TR, TL) => (1, 0),
        // one T and one X
        _ => (1, 0),
    };
    (tx, p1, z1)
}

/// Cuts every segment at its marks; `interior` flags are filled in by
/// [`classify_vertices`].
pub fn build_edges(segments: &[ISegmentRecord]) -> Vec<EdgeRecord> {
    let mut edges = Vec::new();
    for (si, s) in segments.iter().enumerate() {
        let mut ends: Vec<(usize, EndKind)> = Vec::with_capacity(s.marks.len() + 2);
        ends.push((s.start_vertex, EndKind::B));
        ends.extend(s.marks.iter().map(|m| (m.vertex, EndKind::from(m.kind))));
        ends.push((s.end_vertex, EndKind::B));
        for (index, w) in ends.windows(2).enumerate() {
            let (class_tx, class_p1, class_z1) = classify_edge(w[0].1, w[1].1);
            edges.push(EdgeRecord {
                segment: si,
                index,
                endpoints: [w[0].0, w[1].0],
                kinds: [w[0].1, w[1].1],
                class_tx,
                class_p1,
                class_z1,
                interior: false,
            });
        }
    }
    edges
}

/// Geometric vertex type from the positions of the four neighbours:
/// X if the four edges form two straight pairs, T if exactly one straight
/// pair and the other two edges leave the plane of that pair and one of them.
///
/// `tol(i, j)` is the sine threshold for edges `i`, `j`.
pub fn geometric_kind(
    centre: &Point3,
    neighbours: &[Point3],
    scale: f64,
    angular_eps: f64,
) -> Option<VertexKind> {
    if neighbours.len() != 4 {
        return None;
    }
    let dirs: Vec<_> = neighbours.iter().map(|p| p - centre).collect();
    let lens: Vec<f64> = dirs.iter().map(|d| d.norm()).collect();
    let tol = |i: usize, j: usize| 10.0 * angular_eps + 1e3 * f64::EPSILON * scale / lens[i].min(lens[j]);
    let mut straight = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let sine = dirs[i].cross(&dirs[j]).norm() / (lens[i] * lens[j]);
            if sine <= tol(i, j) && dirs[i].dot(&dirs[j]) < 0.0 {
                straight.push((i, j));
            }
        }
    }
    match straight.len() {
        2 if straight[0].0 != straight[1].0 && straight[0].1 != straight[1].1 => Some(VertexKind::X),
        1 => {
            let (i, j) = straight[0];
            let others: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
            let axis = dirs[i] / lens[i];
            let u = dirs[others[0]] / lens[others[0]];
            let v = dirs[others[1]] / lens[others[1]];
            // all four coplanar would be a degenerate junction
            let volume = axis.cross(&u).dot(&v).abs();
            (volume > tol(others[0], others[1])).then_some(VertexKind::T)
        }
        _ => None,
    }
}

/// Builds the vertex table, fills incident edge lists and edge `interior`
/// flags, and checks both vertex classifiers against each other.
pub fn classify_vertices(
    r: &ConstructionResult,
    segments: &[ISegmentRecord],
    x_vertices: &[Point3],
    edges: &mut [EdgeRecord],
) -> Result<Vec<VertexRecord>, ClassifyError> {
    let offsets = corner_offsets(r);
    let mut vertices = Vec::with_capacity(offsets[offsets.len() - 1] + x_vertices.len());
    for p in &r.polygons {
        let m = p.vertices.len();
        for k in 0..m {
            let prev = p.sides[(k + m - 1) % m].carrier;
            let next = p.sides[k].carrier;
            let (kind, provenance) = match (prev, next) {
                (SourceTag::IPolygon(a), SourceTag::IPolygon(b)) => {
                    (VertexKind::T, vec![p.id, a.max(b), a.min(b)])
                }
                _ => (VertexKind::Boundary, vec![p.id]),
            };
            vertices.push(VertexRecord {
                position: p.vertices[k],
                kind,
                incident_edges: Vec::new(),
                provenance,
            });
        }
    }
    for &x in x_vertices {
        vertices.push(VertexRecord {
            position: x,
            kind: VertexKind::X,
            incident_edges: Vec::new(),
            provenance: Vec::new(),
        });
    }
    for s in segments {
        for m in &s.marks {
            let v = &mut vertices[m.vertex];
            if v.kind == VertexKind::X && v.provenance.len() < 3 {
                v.provenance.push(s.seg_id.polygon);
                if v.provenance.len() == 2 {
                    if let SourceTag::IPolygon(q) = s.carrier {
                        v.provenance.push(q);
                    }
                }
            }
        }
    }

    for (ei, e) in edges.iter_mut().enumerate() {
        for &v in &e.endpoints {
            vertices[v].incident_edges.push(ei);
        }
        e.interior = !segments[e.segment].on_window()
            && e.endpoints.iter().all(|&v| vertices[v].is_interior());
    }

    // mark multiplicity: T marks once, X marks twice
    let mut seen = vec![0u8; vertices.len()];
    for s in segments {
        for m in &s.marks {
            seen[m.vertex] += 1;
        }
    }
    let scale = r.policy.merge_eps / 1e-9;
    for (vi, v) in vertices.iter().enumerate() {
        let expected = match v.kind {
            VertexKind::T => 1,
            VertexKind::X => 2,
            VertexKind::Boundary => 0,
        };
        if seen[vi] != expected {
            return Err(ClassifyError::Vertex(format!(
                "vertex {vi} ({:?}) carries {} marks, expected {expected}",
                v.kind, seen[vi]
            )));
        }
        if !v.is_interior() {
            continue;
        }
        if v.incident_edges.len() != 4 {
            return Err(ClassifyError::Vertex(format!(
                "interior vertex {vi} has {} incident edges",
                v.incident_edges.len()
            )));
        }
        let neighbours: Vec<Point3> = v
            .incident_edges
            .iter()
            .map(|&e| {
                let [a, b] = edges[e].endpoints;
                vertices[if a == vi { b } else { a }].position
            })
            .collect();
        let geometric = geometric_kind(&v.position, &neighbours, scale, r.policy.angular_eps);
        if geometric != Some(v.kind) {
            return Err(ClassifyError::Vertex(format!(
                "vertex {vi} at {:?}: provenance says {:?}, geometry says {geometric:?}",
                v.position, v.kind
            )));
        }
    }

    // distinct vertex ids must be distinct points
    let positions: Vec<Point3> = vertices.iter().map(|v| v.position).collect();
    let labels = dedup_points(&positions, &r.policy);
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    if classes != vertices.len() {
        return Err(ClassifyError::Vertex(format!(
            "{} vertex records collapse to {classes} points",
            vertices.len()
        )));
    }
    Ok(vertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use EndKind::*;

    #[test]
    fn lookup_table_rows() {
        assert_eq!(classify_edge(B, B), (TxClass::TT, 3, 2));
        assert_eq!(classify_edge(TL, TR), (TxClass::TT, 1, 0));
        assert_eq!(classify_edge(TR, X), (TxClass::TX, 1, 0));
        assert_eq!(classify_edge(X, X), (TxClass::XX, 2, 0));
        assert_eq!(classify_edge(B, X), (TxClass::TX, 2, 0));
        assert_eq!(classify_edge(B, TL), (TxClass::TT, 2, 1));
        assert_eq!(classify_edge(TR, TR), (TxClass::TT, 2, 1));
    }

    #[test]
    fn table_is_symmetric() {
        let all = [B, X, TL, TR];
        for a in all {
            for b in all {
                assert_eq!(classify_edge(a, b), classify_edge(b, a));
            }
        }
    }

    #[test]
    fn geometric_classifier_on_model_junctions() {
        let c = Point3::new(0.5, 0.5, 0.5);
        let x = [
            Point3::new(0.6, 0.5, 0.5),
            Point3::new(0.3, 0.5, 0.5),
            Point3::new(0.5, 0.7, 0.5),
            Point3::new(0.5, 0.4, 0.5),
        ];
        assert_eq!(geometric_kind(&c, &x, 1.0, 1e-9), Some(VertexKind::X));
        let t = [
            Point3::new(0.6, 0.5, 0.5),
            Point3::new(0.3, 0.5, 0.5),
            Point3::new(0.5, 0.7, 0.5),
            Point3::new(0.5, 0.5, 0.8),
        ];
        assert_eq!(geometric_kind(&c, &t, 1.0, 1e-9), Some(VertexKind::T));
        let flat = [
            Point3::new(0.6, 0.5, 0.5),
            Point3::new(0.3, 0.5, 0.5),
            Point3::new(0.5, 0.7, 0.5),
            Point3::new(0.6, 0.6, 0.5),
        ];
        assert_eq!(geometric_kind(&c, &flat, 1.0, 1e-9), None);
    }
}
