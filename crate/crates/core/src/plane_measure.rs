//! Translation-invariant plane measures and sampling of hitting planes.
//!
//! A plane measure is described by its directional distribution on the upper
//! unit hemisphere. The hitting weight of a convex body `K` is
//! `integral of width(K, u) * density(u) du`; with the isotropic density
//! `1 / (2 pi)` this is the mean width.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::quad::composite_nodes;
use crate::error::{EngineError, GeomError};
use crate::geom::{ConvexPolytope, Plane, Vec3};

/// Number of Fibonacci-lattice nodes for custom hitting weights.
pub const HEMISPHERE_NODES: usize = 4096;

/// Cap on rejection attempts per sampled plane.
pub const MAX_REJECTIONS: usize = 1_000_000;

/// Named directional distributions selectable from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionPreset {
    Isotropic,
    AnisoZ2,
}

impl DirectionPreset {
    pub fn name(self) -> &'static str {
        match self {
            DirectionPreset::Isotropic => "isotropic",
            DirectionPreset::AnisoZ2 => "aniso-z2",
        }
    }

    pub fn build(self) -> Result<DirectionalDistribution, GeomError> {
        match self {
            DirectionPreset::Isotropic => Ok(DirectionalDistribution::Isotropic),
            DirectionPreset::AnisoZ2 => CustomDensity::aniso_z2().map(DirectionalDistribution::Custom),
        }
    }
}

impl fmt::Display for DirectionPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DirectionPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "isotropic" => Ok(Self::Isotropic),
            "aniso-z2" => Ok(Self::AnisoZ2),
            other => Err(format!(
                "unknown direction distribution '{other}' (expected isotropic or aniso-z2)"
            )),
        }
    }
}

/// A bounded, strictly positive density on the upper unit hemisphere,
/// normalised to total mass 1.
#[derive(Clone)]
pub struct CustomDensity {
    name: String,
    density: fn(&Vec3) -> f64,
    sup: f64,
    /// Lattice directions with weights `density * area element`.
    nodes: Arc<Vec<(Vec3, f64)>>,
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity")
            .field("name", &self.name)
            .field("sup", &self.sup)
            .finish_non_exhaustive()
    }
}

impl CustomDensity {
    /// Wraps `density`, checking positivity, the supremum bound and unit mass.
    pub fn new(name: &str, density: fn(&Vec3) -> f64, sup: f64) -> Result<Self, GeomError> {
        // z-integration by composite Gauss-Kronrod, trapezoid in the periodic azimuth
        let z_nodes = composite_nodes(0.0, 1.0, 8);
        let n_phi = 256;
        let mut mass = 0.0;
        for &(z, wz) in &z_nodes {
            let rho = (1.0 - z * z).max(0.0).sqrt();
            for k in 0..n_phi {
                let phi = 2.0 * PI * k as f64 / n_phi as f64;
                let u = Vec3::new(rho * phi.cos(), rho * phi.sin(), z);
                let d = density(&u);
                if !(d > 0.0 && d <= sup * (1.0 + 1e-12)) {
                    return Err(GeomError::InvalidArgument(format!(
                        "density '{name}' is {d} at {u:?}; must lie in (0, {sup}]"
                    )));
                }
                mass += wz * (2.0 * PI / n_phi as f64) * d;
            }
        }
        if (mass - 1.0).abs() > 1e-6 {
            return Err(GeomError::InvalidArgument(format!(
                "density '{name}' integrates to {mass}, not 1"
            )));
        }
        let w = 2.0 * PI / HEMISPHERE_NODES as f64;
        let nodes = fibonacci_hemisphere(HEMISPHERE_NODES)
            .into_iter()
            .map(|u| (u, w * density(&u)))
            .collect();
        Ok(Self {
            name: name.to_owned(),
            density,
            sup,
            nodes: Arc::new(nodes),
        })
    }

    /// Density proportional to `1 + u_z^2 / 2`.
    pub fn aniso_z2() -> Result<Self, GeomError> {
        fn f(u: &Vec3) -> f64 {
            3.0 / (7.0 * PI) * (1.0 + 0.5 * u.z * u.z)
        }
        Self::new("aniso-z2", f, 3.0 / (7.0 * PI) * 1.5)
    }

    /// The isotropic density written as a custom density.
    pub fn uniform() -> Result<Self, GeomError> {
        fn f(_: &Vec3) -> f64 {
            1.0 / (2.0 * PI)
        }
        Self::new("uniform", f, 1.0 / (2.0 * PI))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn density(&self, u: &Vec3) -> f64 {
        (self.density)(u)
    }
}

/// Quasi-uniform points on the upper hemisphere: equal-area bands in `z`
/// with golden-angle azimuths.
pub fn fibonacci_hemisphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vec3::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

/// Directional component of a translation-invariant plane measure.
#[derive(Debug, Clone)]
pub enum DirectionalDistribution {
    Isotropic,
    Custom(CustomDensity),
}

impl DirectionalDistribution {
    pub fn name(&self) -> &str {
        match self {
            DirectionalDistribution::Isotropic => "isotropic",
            DirectionalDistribution::Custom(c) => c.name(),
        }
    }

    pub fn density(&self, u: &Vec3) -> f64 {
        match self {
            DirectionalDistribution::Isotropic => 1.0 / (2.0 * PI),
            DirectionalDistribution::Custom(c) => c.density(u),
        }
    }

    fn sup(&self) -> f64 {
        match self {
            DirectionalDistribution::Isotropic => 1.0 / (2.0 * PI),
            DirectionalDistribution::Custom(c) => c.sup,
        }
    }
}

/// Measure of the set of planes hitting `k`.
pub fn hitting_weight(k: &ConvexPolytope, d: &DirectionalDistribution) -> Result<f64, GeomError> {
    match d {
        DirectionalDistribution::Isotropic => k.mean_width(),
        DirectionalDistribution::Custom(c) => {
            if k.vertices().len() < 4 {
                return Err(GeomError::InvalidArgument("degenerate polytope".into()));
            }
            Ok(c.nodes.iter().map(|(u, w)| w * k.width(u)).sum())
        }
    }
}

/// Uniform direction on the upper hemisphere.
fn uniform_hemisphere<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.random();
    let phi = 2.0 * PI * rng.random::<f64>();
    let rho = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(rho * phi.cos(), rho * phi.sin(), z)
}

/// Direction drawn with density proportional to `width(k, u) * density(u)`.
pub fn sample_hitting_direction<R: Rng + ?Sized>(
    k: &ConvexPolytope,
    d: &DirectionalDistribution,
    rng: &mut R,
) -> Result<Vec3, EngineError> {
    let bound = k.diameter() * d.sup();
    for _ in 0..MAX_REJECTIONS {
        let u = uniform_hemisphere(rng);
        let accept = k.width(&u) * d.density(&u) / bound;
        if rng.random::<f64>() < accept {
            return Ok(u);
        }
    }
    Err(EngineError::Sampling(format!(
        "no direction accepted after {MAX_REJECTIONS} proposals"
    )))
}

/// A plane drawn from the plane measure restricted to planes hitting `k`.
pub fn sample_hitting_plane<R: Rng + ?Sized>(
    k: &ConvexPolytope,
    d: &DirectionalDistribution,
    rng: &mut R,
) -> Result<Plane, EngineError> {
    let u = sample_hitting_direction(k, d, rng)?;
    let (lo, hi) = k.support_interval(&u);
    for _ in 0..MAX_REJECTIONS {
        let offset = lo + (hi - lo) * rng.random::<f64>();
        if offset > lo && offset < hi {
            return Ok(Plane { normal: u, offset });
        }
    }
    Err(EngineError::Sampling("empty support interval".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{make_window, Point3};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn isotropic_weight_is_mean_width() {
        let w = make_window(1.0).unwrap();
        let iso = hitting_weight(&w, &DirectionalDistribution::Isotropic).unwrap();
        assert_abs_diff_eq!(iso, 1.5, epsilon = 1e-14);
        let w2 = make_window(2.0).unwrap();
        let iso2 = hitting_weight(&w2, &DirectionalDistribution::Isotropic).unwrap();
        assert_abs_diff_eq!(iso2, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn uniform_custom_density_matches_isotropic() {
        let d = DirectionalDistribution::Custom(CustomDensity::uniform().unwrap());
        let w = make_window(1.0).unwrap();
        assert_abs_diff_eq!(hitting_weight(&w, &d).unwrap(), 1.5, epsilon = 1e-3);
        let t = ConvexPolytope::regular_tetrahedron(Point3::new(0.2, 0.1, 0.0), 1.0).unwrap();
        assert_abs_diff_eq!(
            hitting_weight(&t, &d).unwrap(),
            t.mean_width().unwrap(),
            epsilon = 1e-3
        );
    }

    #[test]
    fn aniso_density_is_normalised() {
        let c = CustomDensity::aniso_z2().unwrap();
        assert_eq!(c.name(), "aniso-z2");
    }

    #[test]
    fn unnormalised_density_is_rejected() {
        fn f(_: &Vec3) -> f64 {
            1.0
        }
        assert!(CustomDensity::new("bad", f, 1.0).is_err());
    }

    #[test]
    fn sampled_planes_hit_the_cube() {
        let w = make_window(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20_000 {
            let p = sample_hitting_plane(&w, &DirectionalDistribution::Isotropic, &mut rng).unwrap();
            let d: Vec<f64> = w.vertices().iter().map(|v| p.signed_distance(v)).collect();
            assert!(d.iter().any(|&x| x > 0.0) && d.iter().any(|&x| x < 0.0));
        }
    }

    #[test]
    fn presets_parse() {
        assert_eq!("aniso-z2".parse::<DirectionPreset>().unwrap(), DirectionPreset::AnisoZ2);
        assert!("bogus".parse::<DirectionPreset>().is_err());
    }
}
