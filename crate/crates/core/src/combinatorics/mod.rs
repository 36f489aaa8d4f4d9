//! Combinatorial structure of a finished construction.
//!
//! Every side of every I-polygon is an I-segment. Vertices in the relative
//! interior of a segment are recorded as marks: a T mark where a corner of a
//! younger polygon sits on the segment, an X mark where the segment crosses a
//! segment lying in the same carrier plane on the other side of it. Edges
//! are the pieces between consecutive marks and are classified from the
//! kinds of their two endpoints alone.

mod classify;
mod estimate;
mod plates;
mod segments;

pub use estimate::{
    edge_class_names, estimate_from_tallies, estimate_statistics, nu_exx_histogram, ratio_estimate, tally_all,
    tally_replicate, EstimatorReport, QuantityEstimate, ReducedWindow, Tally, MAX_HISTOGRAM_BIN,
};
pub use classify::{build_edges, classify_edge, classify_vertices, geometric_kind};
pub use plates::{extract_plates, p1_oracle, z1_oracle, Plate};
pub use segments::{extract_segments, place_marks};

use serde::{Deserialize, Serialize};

use crate::engine::ConstructionResult;
use crate::error::ClassifyError;
use crate::geom::{Plane, Point3, SourceTag};

/// Identifies a segment as side `side` of polygon `polygon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegId {
    pub polygon: u32,
    pub side: u32,
}

/// Side of a segment, within its carrier plane, into which a T-inducing
/// polygon extends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MarkKind {
    X,
    T(Side),
}

/// A vertex in the relative interior of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mark {
    /// Position along the segment, in `(0, 1)`.
    pub param: f64,
    pub kind: MarkKind,
    /// The polygon that created the vertex: the polygon whose corner it is
    /// (T) or the owner of the crossing segment (X).
    pub source_polygon: u32,
    pub birth_time: f64,
    pub vertex: usize,
}

/// One side of an I-polygon with its internal marks.
///
/// The orientation `start -> end` is lexicographic in the coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ISegmentRecord {
    pub seg_id: SegId,
    pub carrier: SourceTag,
    pub start: Point3,
    pub end: Point3,
    pub start_vertex: usize,
    pub end_vertex: usize,
    pub parent_plane: Plane,
    pub marks: Vec<Mark>,
}

impl ISegmentRecord {
    pub fn on_window(&self) -> bool {
        self.carrier.is_window()
    }

    pub fn point_at(&self, param: f64) -> Point3 {
        self.start + (self.end - self.start) * param
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn midpoint(&self) -> Point3 {
        self.point_at(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexKind {
    T,
    X,
    /// A polygon corner on the window boundary.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub position: Point3,
    pub kind: VertexKind,
    pub incident_edges: Vec<usize>,
    /// Polygons whose planes meet at the vertex, creator first.
    pub provenance: Vec<u32>,
}

impl VertexRecord {
    pub fn is_interior(&self) -> bool {
        self.kind != VertexKind::Boundary
    }
}

/// Kind of an edge endpoint as seen from the segment carrying the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EndKind {
    /// Extremity of the segment.
    B,
    X,
    TL,
    TR,
}

impl From<MarkKind> for EndKind {
    fn from(k: MarkKind) -> Self {
        match k {
            MarkKind::X => EndKind::X,
            MarkKind::T(Side::Left) => EndKind::TL,
            MarkKind::T(Side::Right) => EndKind::TR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TxClass {
    TT,
    XX,
    TX,
}

impl TxClass {
    pub const ALL: [TxClass; 3] = [TxClass::TT, TxClass::XX, TxClass::TX];

    pub fn name(self) -> &'static str {
        match self {
            TxClass::TT => "TT",
            TxClass::XX => "XX",
            TxClass::TX => "TX",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub segment: usize,
    /// Position of the edge along its segment, from 0.
    pub index: usize,
    pub endpoints: [usize; 2],
    pub kinds: [EndKind; 2],
    pub class_tx: TxClass,
    /// Number of plate sides equal to the edge (1..=3).
    pub class_p1: u8,
    /// Number of cell ridges equal to the edge (0..=2).
    pub class_z1: u8,
    /// Both endpoints are vertices in the interior of the window.
    pub interior: bool,
}

/// Segments, vertices and edges of one construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Combinatorics {
    pub segments: Vec<ISegmentRecord>,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl Combinatorics {
    /// Other endpoint of `edge` seen from `vertex`.
    pub fn across(&self, edge: usize, vertex: usize) -> usize {
        let [a, b] = self.edges[edge].endpoints;
        if a == vertex {
            b
        } else {
            a
        }
    }
}

/// Tolerance for incidence tests (point on line, interior parameters).
pub(crate) fn incidence_tol(r: &ConstructionResult) -> f64 {
    1e3 * r.policy.merge_eps
}

/// Runs the full extraction: segments, marks, edges and vertices, with all
/// per-realization consistency checks.
pub fn analyze(r: &ConstructionResult) -> Result<Combinatorics, ClassifyError> {
    let mut segments = extract_segments(r)?;
    let x_vertices = place_marks(&mut segments, r)?;
    let mut edges = build_edges(&segments);
    let vertices = classify_vertices(r, &segments, &x_vertices, &mut edges)?;
    Ok(Combinatorics {
        segments,
        vertices,
        edges,
    })
}
