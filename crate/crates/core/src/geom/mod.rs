//! Convex-polytope primitives shared by the construction and the analysis.
//!
//! Cells are bounded convex polytopes stored as a facet list with cached
//! vertex loops. Every facet carries a [`SourceTag`] naming the object that
//! created it: one of the six window facets or an I-polygon born during the
//! construction.

mod polytope;
mod tolerance;

pub use polytope::{split_polytope, ConvexPolytope, Edge, Facet, Section, Split};
pub use tolerance::{dedup_points, point_key, PointKey, TolerancePolicy};

use serde::{Deserialize, Serialize};

use crate::error::GeomError;

pub type Point3 = nalgebra::Point3<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;

/// An oriented plane `{x : <normal, x> = offset}` with unit normal.
///
/// The "plus side" is `{x : <normal, x> > offset}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    /// Builds a plane from any non-zero normal, rescaling the offset accordingly.
    pub fn new(normal: Vec3, offset: f64) -> Result<Self, GeomError> {
        let len = normal.norm();
        if !(len.is_finite() && len > 0.0) || !offset.is_finite() {
            return Err(GeomError::InvalidArgument(format!(
                "plane normal {normal:?} / offset {offset} not usable"
            )));
        }
        Ok(Self {
            normal: normal / len,
            offset: offset / len,
        })
    }

    pub fn through(normal: Vec3, point: &Point3) -> Result<Self, GeomError> {
        let len = normal.norm();
        if !(len.is_finite() && len > 0.0) {
            return Err(GeomError::InvalidArgument("zero plane normal".into()));
        }
        let n = normal / len;
        Ok(Self {
            normal: n,
            offset: n.dot(&point.coords),
        })
    }

    #[inline]
    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }

    pub fn flipped(&self) -> Self {
        Self {
            normal: -self.normal,
            offset: -self.offset,
        }
    }

    /// Orthonormal basis `(e1, e2)` of the plane's direction space with
    /// `e1 x e2 = normal`.
    pub fn basis(&self) -> (Vec3, Vec3) {
        let n = self.normal;
        let helper = if n.x.abs() < 0.6 {
            Vec3::x()
        } else if n.y.abs() < 0.6 {
            Vec3::y()
        } else {
            Vec3::z()
        };
        let e1 = helper.cross(&n).normalize();
        let e2 = n.cross(&e1);
        (e1, e2)
    }
}

/// Provenance of a facet: a window facet (by index) or an I-polygon (by id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum SourceTag {
    WindowFacet(u8),
    IPolygon(u32),
}

impl SourceTag {
    pub fn polygon(self) -> Option<u32> {
        match self {
            SourceTag::IPolygon(id) => Some(id),
            SourceTag::WindowFacet(_) => None,
        }
    }

    pub fn is_window(self) -> bool {
        matches!(self, SourceTag::WindowFacet(_))
    }
}

/// Axis-aligned cube `[0, side]^3` with its six facets tagged as window facets.
pub fn make_window(side: f64) -> Result<ConvexPolytope, GeomError> {
    if !(side.is_finite() && side > 0.0) {
        return Err(GeomError::InvalidArgument(format!(
            "window side must be positive, got {side}"
        )));
    }
    ConvexPolytope::cuboid(Point3::origin(), Point3::new(side, side, side))
}
