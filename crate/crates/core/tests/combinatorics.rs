use proptest::prelude::*;
use stit_core::combinatorics::{
    analyze, classify_edge, edge_class_names, extract_plates, extract_segments, p1_oracle, tally_replicate,
    z1_oracle, EndKind, MarkKind, Side, TxClass, VertexKind,
};
use stit_core::engine::{
    policy_for, run_construction, ConstructionResult, IPolygonRecord, RunParams, SideRecord, RESULT_FORMAT,
    RESULT_VERSION,
};
use stit_core::geom::{make_window, ConvexPolytope, Plane, Point3, SourceTag, Vec3};
use stit_core::plane_measure::DirectionalDistribution;

fn run(t: f64, seed: u64, replicate: u64) -> stit_core::engine::ConstructionResult {
    let w = make_window(1.0).unwrap();
    run_construction(
        &w,
        &DirectionalDistribution::Isotropic,
        &RunParams::new(t, seed).replicate(replicate),
    )
    .unwrap()
}

#[test]
fn oracles_agree_with_lookup_table() {
    for rep in 0..3 {
        let r = run(20.0, 7, rep);
        let comb = analyze(&r).unwrap();
        let plates = extract_plates(&r, &comb).unwrap();
        let p1 = p1_oracle(&comb, &plates, 1e-7);
        let z1 = z1_oracle(&r, &comb);
        let mut checked = 0;
        for (i, e) in comb.edges.iter().enumerate() {
            if let Some(c) = p1[i] {
                assert_eq!(c, e.class_p1, "P1 class of edge {i} {:?}", e.kinds);
                checked += 1;
            }
            if let Some(c) = z1[i] {
                assert_eq!(c, e.class_z1, "Z1 class of edge {i} {:?}", e.kinds);
            }
        }
        assert!(checked > 50, "only {checked} interior edges");
    }
}

/// Applies `cuts` in order; each cut names the index of a living cell in the
/// current cell list and the plane that splits it.
fn scripted(cuts: &[(usize, Plane)]) -> ConstructionResult {
    let window = make_window(1.0).unwrap();
    let policy = policy_for(&window);
    let mut cells: Vec<ConvexPolytope> = vec![window.clone()];
    let mut polygons = Vec::new();
    for (k, (cell, plane)) in cuts.iter().enumerate() {
        let id = k as u32;
        let split = cells.remove(*cell).split(plane, SourceTag::IPolygon(id), &policy).unwrap();
        let n = split.section.vertices.len();
        let sides = (0..n)
            .map(|i| SideRecord {
                start: split.section.vertices[i],
                end: split.section.vertices[(i + 1) % n],
                carrier: split.section.carriers[i],
            })
            .collect();
        polygons.push(IPolygonRecord {
            id,
            plane: *plane,
            birth_time: k as f64 + 1.0,
            vertices: split.section.vertices,
            sides,
        });
        cells.push(split.plus);
        cells.push(split.minus);
    }
    ConstructionResult {
        format: RESULT_FORMAT.to_owned(),
        version: RESULT_VERSION,
        window,
        final_cells: cells,
        polygons,
        t: cuts.len() as f64,
        seed: 0,
        replicate: 0,
        direction_dist: "scripted".into(),
        policy,
    }
}

fn plane(normal: [f64; 3], point: [f64; 3]) -> Plane {
    Plane::through(Vec3::new(normal[0], normal[1], normal[2]), &Point3::new(point[0], point[1], point[2])).unwrap()
}

/// Cells after the first cut: `[plus, minus]`; the second cut removes the
/// minus cell (index 1) and appends its halves.
fn two_planes() -> ConstructionResult {
    scripted(&[
        (0, plane([1.0, 0.1, 0.05], [0.5, 0.5, 0.5])),
        (1, plane([0.05, 1.0, 0.1], [0.25, 0.4, 0.5])),
    ])
}

#[test]
fn one_split_has_only_window_sides() {
    let r = scripted(&[(0, plane([1.0, 0.1, 0.05], [0.5, 0.5, 0.5]))]);
    let segs = extract_segments(&r).unwrap();
    assert_eq!(segs.len(), r.polygons[0].sides.len());
    assert!(segs.iter().all(|s| s.on_window()));
}

#[test]
fn second_plane_meeting_the_first_polygon_has_one_inner_side() {
    let r = two_planes();
    let segs = extract_segments(&r).unwrap();
    let inner: Vec<_> = segs.iter().filter(|s| !s.on_window()).collect();
    assert_eq!(inner.len(), 1);
    let s = inner[0];
    assert_eq!(s.seg_id.polygon, 1);
    assert_eq!(s.carrier, SourceTag::IPolygon(0));
    // both endpoints lie on both planes and on the window boundary
    for p in [s.start, s.end] {
        assert!(r.polygons[0].plane.signed_distance(&p).abs() < 1e-12);
        assert!(r.polygons[1].plane.signed_distance(&p).abs() < 1e-12);
        assert!(p.coords.iter().any(|&c| c.abs() < 1e-12 || (c - 1.0).abs() < 1e-12));
    }
    let comb = analyze(&r).unwrap();
    assert!(comb.vertices.iter().all(|v| !v.is_interior()));
    assert!(comb.segments.iter().all(|s| s.marks.is_empty()));
}

#[test]
fn third_plane_creates_a_single_t_vertex() {
    // cells after two cuts: [plus0, plus1, minus1]; cut the corner cell on
    // the minus side of both planes
    let mut cuts = vec![
        (0, plane([1.0, 0.1, 0.05], [0.5, 0.5, 0.5])),
        (1, plane([0.05, 1.0, 0.1], [0.25, 0.4, 0.5])),
    ];
    cuts.push((2, plane([0.1, 0.05, 1.0], [0.25, 0.2, 0.5])));
    let r = scripted(&cuts);
    let comb = analyze(&r).unwrap();
    let interior: Vec<_> = comb.vertices.iter().filter(|v| v.is_interior()).collect();
    assert_eq!(interior.len(), 1);
    assert_eq!(interior[0].kind, VertexKind::T);
    assert_eq!(interior[0].incident_edges.len(), 4);

    let marked: Vec<_> = comb.segments.iter().filter(|s| !s.marks.is_empty()).collect();
    assert_eq!(marked.len(), 1);
    let s = marked[0];
    assert_eq!((s.seg_id.polygon, s.carrier), (1, SourceTag::IPolygon(0)));
    assert_eq!(s.marks.len(), 1);
    assert!(matches!(s.marks[0].kind, MarkKind::T(_)));
    assert_eq!(s.marks[0].source_polygon, 2);

    let on_marked: Vec<_> = comb.edges.iter().filter(|e| comb.segments[e.segment].seg_id == s.seg_id).collect();
    assert_eq!(on_marked.len(), 2);
    for e in on_marked {
        assert!(e.kinds.contains(&EndKind::B));
        assert_eq!((e.class_tx, e.class_p1, e.class_z1), (TxClass::TT, 2, 1));
    }
}

#[test]
fn opposite_sides_create_an_x_vertex() {
    // cells after the first cut: [plus0, minus0]; the second cut splits the
    // plus cell, the third the minus cell, both through the same line on
    // the first polygon
    let first = plane([1.0, 0.1, 0.05], [0.5, 0.5, 0.5]);
    let line_point = [0.5, 0.45, 0.5];
    let r = scripted(&[
        (0, first),
        (0, plane([0.05, 1.0, 0.1], line_point)),
        (0, plane([-0.2, 1.0, 0.1], line_point)),
    ]);
    let comb = analyze(&r).unwrap();
    let kinds: Vec<VertexKind> = comb.vertices.iter().filter(|v| v.is_interior()).map(|v| v.kind).collect();
    // two distinct traces on the first polygon cross once in its interior
    assert!(kinds.iter().all(|&k| k == VertexKind::X), "{kinds:?}");
    assert_eq!(kinds.len(), 1);
}

fn side_of(k: MarkKind) -> Option<Side> {
    match k {
        MarkKind::T(s) => Some(s),
        MarkKind::X => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn realization_invariants(seed in 0u64..10_000, t in 4.0f64..14.0) {
        let r = run(t, seed, 0);
        let comb = analyze(&r).unwrap();
        for s in &comb.segments {
            let edges = comb.edges.iter().filter(|e| comb.segments[e.segment].seg_id == s.seg_id).count();
            prop_assert_eq!(edges, s.marks.len() + 1);
            prop_assert!(s.marks.windows(2).all(|w| w[0].param < w[1].param));
            prop_assert!(s.marks.iter().all(|m| m.param > 0.0 && m.param < 1.0));
            for m in &s.marks {
                if side_of(m.kind).is_some() {
                    prop_assert!(r.polygons[m.source_polygon as usize].birth_time > r.polygons[s.seg_id.polygon as usize].birth_time);
                }
            }
        }
        for v in comb.vertices.iter().filter(|v| v.is_interior()) {
            prop_assert_eq!(v.incident_edges.len(), 4);
        }
        for e in &comb.edges {
            prop_assert_eq!(classify_edge(e.kinds[0], e.kinds[1]), (e.class_tx, e.class_p1, e.class_z1));
            if e.class_p1 == 3 {
                prop_assert_eq!(e.class_z1, 2);
                prop_assert_eq!(e.class_tx, TxClass::TT);
            }
        }
        let tally = tally_replicate(&r, 0.15).unwrap();
        let names = edge_class_names();
        let e = tally.get("E");
        for group in names.chunks(3) {
            let sum: f64 = group.iter().map(|c| tally.get(&format!("E[{c}]"))).sum();
            prop_assert!((sum - e).abs() <= 1e-9 * e.max(1.0));
        }
        let v = tally.get("V");
        prop_assert!((tally.get("V[T]") + tally.get("V[X]") - v).abs() <= 1e-9 * v.max(1.0));
    }
}
