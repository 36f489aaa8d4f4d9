use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Plane, Point3, SourceTag, TolerancePolicy, Vec3};
use crate::error::GeomError;

/// One facet: the outward supporting plane, its provenance and its vertex
/// loop, ordered counter-clockwise when seen from outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub plane: Plane,
    pub tag: SourceTag,
    pub vertices: Vec<u32>,
}

/// An edge as a vertex-index pair plus the two facets meeting along it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub facets: [u32; 2],
}

/// A bounded convex polytope stored as a boundary representation.
///
/// The half-space description is the facet list: the polytope is the
/// intersection of the minus sides of all facet planes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolytope {
    vertices: Vec<Point3>,
    facets: Vec<Facet>,
}

/// The intersection of a cutting plane with a polytope.
///
/// `vertices` run counter-clockwise around the plane normal. Side `k` joins
/// `vertices[k]` to `vertices[k + 1]` and lies in the facet tagged
/// `carriers[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub vertices: Vec<Point3>,
    pub carriers: Vec<SourceTag>,
}

/// Result of cutting a polytope by a plane.
#[derive(Debug, Clone)]
pub struct Split {
    /// Part on the side the normal points to.
    pub plus: ConvexPolytope,
    pub minus: ConvexPolytope,
    pub section: Section,
}

#[derive(Default)]
struct Builder {
    vertices: Vec<Point3>,
    facets: Vec<Facet>,
}

impl Builder {
    fn push(&mut self, p: Point3) -> u32 {
        self.vertices.push(p);
        (self.vertices.len() - 1) as u32
    }

    fn finish(self) -> ConvexPolytope {
        ConvexPolytope {
            vertices: self.vertices,
            facets: self.facets,
        }
    }
}

impl ConvexPolytope {
    /// Axis-aligned box with facets tagged `WindowFacet(0..6)` in the order
    /// -x, +x, -y, +y, -z, +z.
    pub fn cuboid(min: Point3, max: Point3) -> Result<Self, GeomError> {
        if !(0..3).all(|i| min[i].is_finite() && max[i].is_finite() && max[i] > min[i]) {
            return Err(GeomError::InvalidArgument(format!(
                "empty box {min:?} .. {max:?}"
            )));
        }
        let vertices = (0..8)
            .map(|i| {
                Point3::new(
                    if i & 1 == 0 { min.x } else { max.x },
                    if i & 2 == 0 { min.y } else { max.y },
                    if i & 4 == 0 { min.z } else { max.z },
                )
            })
            .collect();
        let loops: [[u32; 4]; 6] = [
            [0, 4, 6, 2],
            [1, 3, 7, 5],
            [0, 1, 5, 4],
            [2, 6, 7, 3],
            [0, 2, 3, 1],
            [4, 5, 7, 6],
        ];
        let facets = loops
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let axis = k / 2;
                let mut normal = Vec3::zeros();
                let offset = if k % 2 == 0 {
                    normal[axis] = -1.0;
                    -min[axis]
                } else {
                    normal[axis] = 1.0;
                    max[axis]
                };
                Facet {
                    plane: Plane { normal, offset },
                    tag: SourceTag::WindowFacet(k as u8),
                    vertices: l.to_vec(),
                }
            })
            .collect();
        Ok(Self { vertices, facets })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// All edges, sorted by vertex pair.
    pub fn edges(&self) -> Vec<Edge> {
        let mut half: Vec<((u32, u32), u32)> = Vec::new();
        for (fi, f) in self.facets.iter().enumerate() {
            let m = f.vertices.len();
            for k in 0..m {
                let a = f.vertices[k];
                let b = f.vertices[(k + 1) % m];
                half.push(((a.min(b), a.max(b)), fi as u32));
            }
        }
        half.sort_unstable();
        half.chunks(2)
            .map(|c| Edge {
                a: c[0].0 .0,
                b: c[0].0 .1,
                facets: [c[0].1, c.get(1).map_or(u32::MAX, |x| x.1)],
            })
            .collect()
    }

    pub fn centroid_of_vertices(&self) -> Point3 {
        let sum = self
            .vertices
            .iter()
            .fold(Vec3::zeros(), |acc, v| acc + v.coords);
        Point3::from(sum / self.vertices.len() as f64)
    }

    pub fn volume(&self) -> f64 {
        let c = self.centroid_of_vertices();
        let mut vol = 0.0;
        for f in &self.facets {
            let p0 = self.vertices[f.vertices[0] as usize] - c;
            for w in f.vertices[1..].windows(2) {
                let p1 = self.vertices[w[0] as usize] - c;
                let p2 = self.vertices[w[1] as usize] - c;
                vol += p0.dot(&p1.cross(&p2));
            }
        }
        vol / 6.0
    }

    /// `(min, max)` of `<u, x>` over the polytope.
    pub fn support_interval(&self, u: &Vec3) -> (f64, f64) {
        self.vertices
            .iter()
            .map(|v| u.dot(&v.coords))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            })
    }

    /// Width of the polytope in direction `u` (unit vector).
    pub fn width(&self, u: &Vec3) -> f64 {
        let (lo, hi) = self.support_interval(u);
        hi - lo
    }

    pub fn diameter(&self) -> f64 {
        let mut d2: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d2 = d2.max((a - b).norm_squared());
            }
        }
        d2.sqrt()
    }

    /// Exterior dihedral angle along an edge: the angle between the outward
    /// normals of the two adjacent facets.
    pub fn exterior_angle(&self, e: &Edge) -> f64 {
        let n1 = self.facets[e.facets[0] as usize].plane.normal;
        let n2 = self.facets[e.facets[1] as usize].plane.normal;
        n1.cross(&n2).norm().atan2(n1.dot(&n2))
    }

    /// Mean width, `(1/4pi) * sum over edges of length * exterior angle`.
    pub fn mean_width(&self) -> Result<f64, GeomError> {
        let edges = self.edges();
        if self.vertices.len() < 4 || edges.iter().any(|e| e.facets[1] == u32::MAX) {
            return Err(GeomError::InvalidArgument(
                "mean width needs a closed 3-polytope".into(),
            ));
        }
        let sum: f64 = edges
            .iter()
            .map(|e| {
                let len = (self.vertices[e.a as usize] - self.vertices[e.b as usize]).norm();
                len * self.exterior_angle(e)
            })
            .sum();
        Ok(sum / (4.0 * PI))
    }

    /// Whether `p` satisfies every facet constraint up to `eps`.
    pub fn contains(&self, p: &Point3, eps: f64) -> bool {
        self.facets
            .iter()
            .all(|f| f.plane.signed_distance(p) <= eps)
    }

    /// Checks the structural invariants: closed 2-manifold boundary, Euler
    /// relation, vertices on their facet planes and inside every half-space,
    /// consistent outward orientation, positive volume.
    pub fn validate(&self, policy: &TolerancePolicy) -> Result<(), GeomError> {
        let v = self.vertices.len();
        let f = self.facets.len();
        if v < 4 || f < 4 {
            return Err(GeomError::Degenerate(format!("{v} vertices, {f} facets")));
        }
        let edges = self.edges();
        if edges.iter().any(|e| e.facets[1] == u32::MAX) {
            return Err(GeomError::Degenerate("boundary is not closed".into()));
        }
        let mut half: Vec<(u32, u32)> = Vec::new();
        for fc in &self.facets {
            let m = fc.vertices.len();
            for k in 0..m {
                half.push((fc.vertices[k], fc.vertices[(k + 1) % m]));
            }
        }
        half.sort_unstable();
        if half.windows(2).any(|w| w[0] == w[1]) {
            return Err(GeomError::Degenerate("inconsistent facet orientation".into()));
        }
        if v + f != edges.len() + 2 {
            return Err(GeomError::Degenerate(format!(
                "Euler relation fails: V={v}, E={}, F={f}",
                edges.len()
            )));
        }
        let tol = 10.0 * policy.merge_eps;
        for fc in &self.facets {
            if fc.vertices.len() < 3 {
                return Err(GeomError::Degenerate("facet with < 3 vertices".into()));
            }
            for &i in &fc.vertices {
                let d = fc.plane.signed_distance(&self.vertices[i as usize]);
                if d.abs() > tol {
                    return Err(GeomError::Degenerate(format!(
                        "vertex {i} is {d:e} off its facet plane"
                    )));
                }
            }
        }
        if let Some(p) = self.vertices.iter().find(|p| !self.contains(p, tol)) {
            return Err(GeomError::Degenerate(format!("vertex {p:?} violates a facet")));
        }
        if self.volume() <= 0.0 {
            return Err(GeomError::Degenerate("non-positive volume".into()));
        }
        Ok(())
    }

    /// Cuts the polytope by `plane`. The new facet of both parts carries
    /// `new_tag`.
    ///
    /// Fails with [`GeomError::NoSplit`] if the plane misses the interior and
    /// with [`GeomError::NearTangent`] if it passes within `merge_eps` of a
    /// vertex.
    pub fn split(
        &self,
        plane: &Plane,
        new_tag: SourceTag,
        policy: &TolerancePolicy,
    ) -> Result<Split, GeomError> {
        let dist: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| plane.signed_distance(v))
            .collect();
        let any_plus = dist.iter().any(|&d| d > 0.0);
        let any_minus = dist.iter().any(|&d| d < 0.0);
        if !(any_plus && any_minus) {
            return Err(GeomError::NoSplit);
        }
        let closest = dist.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
        if closest <= policy.merge_eps {
            return Err(GeomError::NearTangent {
                distance: closest,
                eps: policy.merge_eps,
            });
        }
        let is_plus: Vec<bool> = dist.iter().map(|&d| d > 0.0).collect();

        let mut plus = Builder::default();
        let mut minus = Builder::default();
        let mut plus_index = vec![u32::MAX; self.vertices.len()];
        let mut minus_index = vec![u32::MAX; self.vertices.len()];
        for (i, v) in self.vertices.iter().enumerate() {
            if is_plus[i] {
                plus_index[i] = plus.push(*v);
            } else {
                minus_index[i] = minus.push(*v);
            }
        }

        // cut point of each crossed edge, as (plus index, minus index, point)
        let mut cuts: HashMap<(u32, u32), (u32, u32, Point3)> = HashMap::new();
        // section side from exit cut point to entry cut point, keyed by exit
        let mut section_next: HashMap<u32, (u32, SourceTag)> = HashMap::new();
        let mut first_exit = None;

        for f in &self.facets {
            let m = f.vertices.len();
            let n_plus = f.vertices.iter().filter(|&&i| is_plus[i as usize]).count();
            if n_plus == m {
                plus.facets.push(Facet {
                    plane: f.plane,
                    tag: f.tag,
                    vertices: f.vertices.iter().map(|&i| plus_index[i as usize]).collect(),
                });
                continue;
            }
            if n_plus == 0 {
                minus.facets.push(Facet {
                    plane: f.plane,
                    tag: f.tag,
                    vertices: f.vertices.iter().map(|&i| minus_index[i as usize]).collect(),
                });
                continue;
            }
            let mut plus_loop = Vec::with_capacity(m + 2);
            let mut minus_loop = Vec::with_capacity(m + 2);
            let mut entry = None;
            let mut exit = None;
            for k in 0..m {
                let a = f.vertices[k];
                let b = f.vertices[(k + 1) % m];
                if is_plus[a as usize] {
                    plus_loop.push(plus_index[a as usize]);
                } else {
                    minus_loop.push(minus_index[a as usize]);
                }
                if is_plus[a as usize] != is_plus[b as usize] {
                    let key = (a.min(b), a.max(b));
                    let (cp, cm, _) = *cuts.entry(key).or_insert_with(|| {
                        let (lo, hi) = (key.0 as usize, key.1 as usize);
                        let s = dist[lo] / (dist[lo] - dist[hi]);
                        let p = self.vertices[lo] + (self.vertices[hi] - self.vertices[lo]) * s;
                        (plus.push(p), minus.push(p), p)
                    });
                    plus_loop.push(cp);
                    minus_loop.push(cm);
                    if is_plus[a as usize] {
                        exit = Some(cm);
                    } else {
                        entry = Some(cm);
                    }
                }
            }
            let (Some(entry), Some(exit)) = (entry, exit) else {
                return Err(GeomError::Degenerate("facet crossed only once".into()));
            };
            if section_next.insert(exit, (entry, f.tag)).is_some() {
                return Err(GeomError::Degenerate("facet crossed more than twice".into()));
            }
            first_exit.get_or_insert(exit);
            plus.facets.push(Facet {
                plane: f.plane,
                tag: f.tag,
                vertices: plus_loop,
            });
            minus.facets.push(Facet {
                plane: f.plane,
                tag: f.tag,
                vertices: minus_loop,
            });
        }

        // chain the section sides into one loop
        let minus_to_plus: HashMap<u32, u32> = cuts.values().map(|&(p, m, _)| (m, p)).collect();
        let start = first_exit.ok_or(GeomError::NoSplit)?;
        let mut minus_loop = Vec::with_capacity(section_next.len());
        let mut carriers = Vec::with_capacity(section_next.len());
        let mut cur = start;
        loop {
            let (next, tag) = *section_next
                .get(&cur)
                .ok_or_else(|| GeomError::Degenerate("section loop is open".into()))?;
            minus_loop.push(cur);
            carriers.push(tag);
            cur = next;
            if cur == start || minus_loop.len() > section_next.len() {
                break;
            }
        }
        if cur != start || minus_loop.len() != section_next.len() {
            return Err(GeomError::Degenerate("section splits into several loops".into()));
        }
        let section = Section {
            vertices: minus_loop
                .iter()
                .map(|&i| minus.vertices[i as usize])
                .collect(),
            carriers,
        };
        let plus_loop: Vec<u32> = minus_loop.iter().rev().map(|i| minus_to_plus[i]).collect();
        plus.facets.push(Facet {
            plane: plane.flipped(),
            tag: new_tag,
            vertices: plus_loop,
        });
        minus.facets.push(Facet {
            plane: *plane,
            tag: new_tag,
            vertices: minus_loop,
        });
        Ok(Split {
            plus: plus.finish(),
            minus: minus.finish(),
            section,
        })
    }

    /// Intersection with the minus side of `plane`; the new facet gets `tag`.
    /// Returns the polytope unchanged if it already lies on the minus side.
    pub fn clip(
        &self,
        plane: &Plane,
        tag: SourceTag,
        policy: &TolerancePolicy,
    ) -> Result<ConvexPolytope, GeomError> {
        if self.vertices.iter().all(|v| plane.signed_distance(v) <= 0.0) {
            return Ok(self.clone());
        }
        self.split(plane, tag, policy).map(|s| s.minus)
    }

    /// The polytope scaled by `factor` about the origin.
    pub fn scaled(&self, factor: f64) -> ConvexPolytope {
        ConvexPolytope {
            vertices: self.vertices.iter().map(|v| v * factor).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    plane: Plane {
                        normal: f.plane.normal,
                        offset: f.plane.offset * factor,
                    },
                    ..f.clone()
                })
                .collect(),
        }
    }

    /// Tetrahedron with the given corners; the facet opposite corner `k` is
    /// tagged `IPolygon(k)`.
    pub fn tetrahedron(corners: [Point3; 4]) -> Result<Self, GeomError> {
        let mut facets = Vec::with_capacity(4);
        for k in 0..4u32 {
            let mut l: Vec<u32> = (0..4).filter(|&j| j != k).collect();
            let [a, b, c] = [l[0], l[1], l[2]].map(|i| corners[i as usize]);
            let mut n = (b - a).cross(&(c - a));
            if n.dot(&(corners[k as usize] - a)) > 0.0 {
                l.swap(1, 2);
                n = -n;
            }
            facets.push(Facet {
                plane: Plane::through(n, &a)?,
                tag: SourceTag::IPolygon(k),
                vertices: l,
            });
        }
        Ok(Self {
            vertices: corners.to_vec(),
            facets,
        })
    }

    /// Regular tetrahedron with the given edge length, centred at `centre`.
    pub fn regular_tetrahedron(centre: Point3, edge: f64) -> Result<Self, GeomError> {
        let s = edge / (2.0 * 2f64.sqrt());
        Self::tetrahedron(
            [
                Vec3::new(1.0, 1.0, 1.0),
                Vec3::new(1.0, -1.0, -1.0),
                Vec3::new(-1.0, 1.0, -1.0),
                Vec3::new(-1.0, -1.0, 1.0),
            ]
            .map(|c| centre + c * s),
        )
    }
}

/// Cuts `p` by `h`, returning `(plus part, minus part)`.
pub fn split_polytope(
    p: &ConvexPolytope,
    h: &Plane,
    new_tag: SourceTag,
    policy: &TolerancePolicy,
) -> Result<(ConvexPolytope, ConvexPolytope), GeomError> {
    p.split(h, new_tag, policy).map(|s| (s.plus, s.minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_cube() -> ConvexPolytope {
        ConvexPolytope::cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0)).unwrap()
    }

    fn policy() -> TolerancePolicy {
        TolerancePolicy::for_window_side(1.0)
    }

    #[test]
    fn cube_counts_and_measures() {
        let c = unit_cube();
        c.validate(&policy()).unwrap();
        assert_eq!(c.vertices().len(), 8);
        assert_eq!(c.edges().len(), 12);
        assert_eq!(c.facets().len(), 6);
        assert_relative_eq!(c.volume(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.mean_width().unwrap(), 1.5, epsilon = 1e-15);
        for e in c.edges() {
            assert_relative_eq!(c.exterior_angle(&e), PI / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn symmetric_cut_gives_two_half_boxes() {
        let plane = Plane::new(Vec3::x(), 0.5).unwrap();
        let s = unit_cube().split(&plane, SourceTag::IPolygon(0), &policy()).unwrap();
        assert_relative_eq!(s.plus.volume(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.minus.volume(), 0.5, epsilon = 1e-15);
        s.plus.validate(&policy()).unwrap();
        s.minus.validate(&policy()).unwrap();
        assert_eq!(s.section.vertices.len(), 4);
        let mut carriers = s.section.carriers.clone();
        carriers.sort();
        assert_eq!(
            carriers,
            (2..6).map(SourceTag::WindowFacet).collect::<Vec<_>>()
        );
    }

    #[test]
    fn section_runs_ccw_and_sides_lie_in_carriers() {
        let plane = Plane::new(Vec3::new(0.3, 0.5, 0.8), 0.7).unwrap();
        let c = unit_cube();
        let s = c.split(&plane, SourceTag::IPolygon(0), &policy()).unwrap();
        let v = &s.section.vertices;
        let m = v.len();
        let mut area = Vec3::zeros();
        for k in 0..m {
            area += v[k].coords.cross(&v[(k + 1) % m].coords);
        }
        assert!(area.dot(&plane.normal) > 0.0);
        for k in 0..m {
            let SourceTag::WindowFacet(w) = s.section.carriers[k] else {
                panic!()
            };
            let fp = c.facets()[w as usize].plane;
            assert!(fp.signed_distance(&v[k]).abs() < 1e-12);
            assert!(fp.signed_distance(&v[(k + 1) % m]).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_plane_is_rejected() {
        let plane = Plane::new(Vec3::x(), 2.0).unwrap();
        assert_eq!(
            unit_cube()
                .split(&plane, SourceTag::IPolygon(0), &policy())
                .unwrap_err(),
            GeomError::NoSplit
        );
    }

    #[test]
    fn plane_through_vertex_is_near_tangent() {
        let plane = Plane::through(Vec3::new(1.0, 1.0, 1.0), &Point3::new(1.0, 0.0, 0.0)).unwrap();
        assert!(matches!(
            unit_cube().split(&plane, SourceTag::IPolygon(0), &policy()),
            Err(GeomError::NearTangent { .. })
        ));
    }

    #[test]
    fn tetrahedron_is_regular() {
        let t = ConvexPolytope::regular_tetrahedron(Point3::new(0.5, 0.5, 0.5), 1.0).unwrap();
        t.validate(&policy()).unwrap();
        assert_eq!(t.vertices().len(), 4);
        assert_eq!(t.facets().len(), 4);
        assert_relative_eq!(t.volume(), 1.0 / (6.0 * 2f64.sqrt()), epsilon = 1e-12);
        let dihedral = (1.0f64 / 3.0).acos();
        let expected = 6.0 * (PI - dihedral) / (4.0 * PI);
        assert_relative_eq!(t.mean_width().unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn mean_width_is_homogeneous() {
        let c = unit_cube().scaled(2.0);
        assert_relative_eq!(c.mean_width().unwrap(), 3.0, epsilon = 1e-14);
    }
}
