//! Mean values that follow linearly from the edge-class proportions.

use serde::{Deserialize, Serialize};

use super::pmf::closed;

/// Edge-class proportions and the two pair sums the vertex tables need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedInputs {
    pub eps_tt: f64,
    /// `[class 1, class 2, class 3]` under the chosen labelling.
    pub eps_p1: [f64; 3],
    /// `[class 0, class 1, class 2]`.
    pub eps_z1: [f64; 3],
    /// `sum (n - 1) p_{T|n} p_n`.
    pub t_pair_sum: f64,
    /// `sum (n - 1) p_{T|n} p_{X|n} p_n`.
    pub tx_pair_sum: f64,
}

impl DerivedInputs {
    /// All nine edge classes with their proportions, in reporting order.
    pub fn classes(&self) -> [(&'static str, f64); 9] {
        let tt = self.eps_tt;
        [
            ("TT", tt),
            ("XX", tt - 1.0 / 3.0),
            ("TX", 4.0 / 3.0 - 2.0 * tt),
            ("P1,1", self.eps_p1[0]),
            ("P1,2", self.eps_p1[1]),
            ("P1,3", self.eps_p1[2]),
            ("Z1,0", self.eps_z1[0]),
            ("Z1,1", self.eps_z1[1]),
            ("Z1,2", self.eps_z1[2]),
        ]
    }
}

/// Every derived mean value as `(name, value)`.
pub fn derived_tables(e: &DerivedInputs) -> Vec<(String, f64)> {
    let tt = e.eps_tt;
    let [p1, p2, p3] = e.eps_p1;
    let [z0, z1, z2] = e.eps_z1;
    let mut rows: Vec<(String, f64)> = Vec::new();
    let mut put = |name: &str, v: f64| rows.push((name.to_string(), v));

    put("mu_V[T],E[TT]", 6.0 * tt);
    put("mu_V[T],E[XX]", 0.0);
    put("mu_V[T],E[TX]", 4.0 - 6.0 * tt);
    put("mu_V[X],E[TT]", 0.0);
    put("mu_V[X],E[XX]", 12.0 * tt - 4.0);
    put("mu_V[X],E[TX]", 8.0 - 12.0 * tt);
    put("mu_V,E[TT]", 4.0 * tt);
    put("mu_V,E[XX]", 4.0 * tt - 4.0 / 3.0);
    put("mu_V,E[TX]", 16.0 / 3.0 - 8.0 * tt);
    for (i, v) in [p1, p2, p3].into_iter().enumerate() {
        put(&format!("mu_V,E[P1,{}]", i + 1), 4.0 * v);
    }
    for (j, v) in [z0, z1, z2].into_iter().enumerate() {
        put(&format!("mu_V,E[Z1,{j}]"), 4.0 * v);
    }
    put("mu_V[T],E[P1,1]", closed::mu_vt_p1_1());
    put("mu_V[T],E[P1,2]", 4.0 - 6.0 * p3 - e.t_pair_sum);
    put("mu_V[T],E[P1,3]", 6.0 * p3);
    put("mu_V[T],E[Z1,0]", 4.0 - 6.0 * (z1 + z2));
    put("mu_V[T],E[Z1,1]", 6.0 * z1);
    put("mu_V[T],E[Z1,2]", 6.0 * z2);
    put("mu_V[X],E[P1,1]", 2.0 * e.tx_pair_sum);
    put("mu_V[X],E[P1,2]", 4.0 - 2.0 * e.tx_pair_sum);
    put("mu_V[X],E[P1,3]", 0.0);
    put("mu_V[X],E[Z1,0]", 4.0);
    put("mu_V[X],E[Z1,1]", 0.0);
    put("mu_V[X],E[Z1,2]", 0.0);

    put("eta_V[T],V[T]", 6.0 * tt);
    put("eta_V[T],V[X]", 4.0 - 6.0 * tt);
    put("eta_V[X],V[T]", 8.0 - 12.0 * tt);
    put("eta_V[X],V[X]", 12.0 * tt - 4.0);
    put("eta_V,V[T]", 2.0 / 3.0 * 6.0 * tt + 1.0 / 3.0 * (8.0 - 12.0 * tt));
    put("eta_V,V[X]", 2.0 / 3.0 * (4.0 - 6.0 * tt) + 1.0 / 3.0 * (12.0 * tt - 4.0));

    for (class, v) in e.classes() {
        put(&format!("mu_P,E[{class}]"), 36.0 / 7.0 * v);
        put(&format!("mu_Z2,E[{class}]"), 10.0 * v);
        put(&format!("mu_int(Z2),E[{class}]"), 2.0 * v);
        put(&format!("mu_bd(Z2),E[{class}]"), 8.0 * v);
        put(&format!("mu_I,E[{class}]"), 24.0 * v);
        put(&format!("mu_int(I),E[{class}]"), 12.0 * v);
        put(&format!("mu_Z,E[{class}]"), 36.0 * v);
        put(&format!("mu_sk(Z),E[{class}]"), 24.0 * v);
    }

    put("eps_P1[E,1]", 3.0 / 7.0 * (p1 + 2.0 * p2 + 3.0 * p3));
    put("eps_Z1[E,1]", z1 + 2.0 * z2);
    rows
}

/// Published numerical values of the derived tables, with their printed
/// precision implied by the digits.
pub const REFERENCE_VALUES: &[(&str, f64)] = &[
    ("mu_V[T],E[TT]", 2.65727),
    ("mu_V[T],E[XX]", 0.0),
    ("mu_V[T],E[TX]", 1.34273),
    ("mu_V[X],E[TT]", 0.0),
    ("mu_V[X],E[XX]", 1.31454),
    ("mu_V[X],E[TX]", 2.68546),
    ("mu_V,E[TT]", 1.77151),
    ("mu_V,E[XX]", 0.43817),
    ("mu_V,E[TX]", 1.79031),
    ("mu_V,E[P1,1]", 2.22019),
    ("mu_V,E[P1,2]", 1.20263),
    ("mu_V,E[P1,3]", 0.57718),
    ("mu_V,E[Z1,0]", 2.49820),
    ("mu_V,E[Z1,1]", 0.92461),
    ("mu_V,E[Z1,2]", 0.57718),
    ("mu_V[T],E[P1,1]", 0.75441),
    ("mu_V[T],E[P1,2]", 2.37981),
    ("mu_V[T],E[P1,3]", 0.86577),
    ("mu_V[T],E[Z1,0]", 1.74730),
    ("mu_V[T],E[Z1,1]", 1.38692),
    ("mu_V[T],E[Z1,2]", 0.86577),
    ("mu_V[X],E[P1,1]", 0.69968),
    ("mu_V[X],E[P1,2]", 3.30032),
    ("mu_V[X],E[P1,3]", 0.0),
    ("mu_V[X],E[Z1,0]", 4.0),
    ("mu_V[X],E[Z1,1]", 0.0),
    ("mu_V[X],E[Z1,2]", 0.0),
    ("eta_V[T],V[T]", 2.65727),
    ("eta_V[T],V[X]", 1.34273),
    ("eta_V[X],V[T]", 2.68546),
    ("eta_V[X],V[X]", 1.31454),
    ("eta_V,V[T]", 2.66666),
    ("eta_V,V[X]", 1.33333),
    ("mu_P,E[TT]", 2.27766),
    ("mu_P,E[XX]", 0.56337),
    ("mu_P,E[TX]", 2.30182),
    ("mu_P,E[P1,1]", 2.85452),
    ("mu_P,E[P1,2]", 1.54624),
    ("mu_P,E[P1,3]", 0.74209),
    ("mu_P,E[Z1,0]", 3.21197),
    ("mu_P,E[Z1,1]", 1.18879),
    ("mu_P,E[Z1,2]", 0.74209),
    ("mu_Z2,E[TT]", 4.42878),
    ("mu_Z2,E[XX]", 1.09545),
    ("mu_Z2,E[TX]", 4.47577),
    ("mu_int(Z2),E[TT]", 0.88576),
    ("mu_int(Z2),E[XX]", 0.21909),
    ("mu_int(Z2),E[TX]", 0.89515),
    ("mu_bd(Z2),E[TT]", 3.54303),
    ("mu_bd(Z2),E[XX]", 0.87636),
    ("mu_bd(Z2),E[TX]", 3.58062),
    ("mu_Z2,E[P1,1]", 5.55046),
    ("mu_Z2,E[P1,2]", 3.00657),
    ("mu_Z2,E[P1,3]", 1.44296),
    ("mu_Z2,E[Z1,0]", 6.24550),
    ("mu_Z2,E[Z1,1]", 2.31154),
    ("mu_Z2,E[Z1,2]", 1.44296),
    ("mu_int(Z2),E[P1,1]", 1.11009),
    ("mu_int(Z2),E[P1,2]", 0.60132),
    ("mu_int(Z2),E[P1,3]", 0.28859),
    ("mu_int(Z2),E[Z1,0]", 1.24910),
    ("mu_int(Z2),E[Z1,1]", 0.46231),
    ("mu_int(Z2),E[Z1,2]", 0.28859),
    ("mu_bd(Z2),E[P1,1]", 4.44037),
    ("mu_bd(Z2),E[P1,2]", 2.40526),
    ("mu_bd(Z2),E[P1,3]", 1.15437),
    ("mu_bd(Z2),E[Z1,0]", 4.99640),
    ("mu_bd(Z2),E[Z1,1]", 1.84923),
    ("mu_bd(Z2),E[Z1,2]", 1.15437),
    ("mu_I,E[TT]", 10.6291),
    ("mu_I,E[XX]", 2.6291),
    ("mu_I,E[TX]", 10.7418),
    ("mu_int(I),E[TT]", 5.3145),
    ("mu_int(I),E[XX]", 1.3145),
    ("mu_int(I),E[TX]", 5.3709),
    ("mu_I,E[P1,1]", 13.3211),
    ("mu_I,E[P1,2]", 7.2158),
    ("mu_I,E[P1,3]", 3.4631),
    ("mu_I,E[Z1,0]", 14.9892),
    ("mu_I,E[Z1,1]", 5.5477),
    ("mu_I,E[Z1,2]", 3.4631),
    ("mu_int(I),E[P1,1]", 6.6606),
    ("mu_int(I),E[P1,2]", 3.6079),
    ("mu_int(I),E[P1,3]", 1.7316),
    ("mu_int(I),E[Z1,0]", 7.4946),
    ("mu_int(I),E[Z1,1]", 2.7738),
    ("mu_int(I),E[Z1,2]", 1.7316),
    ("mu_Z,E[TT]", 15.9436),
    ("mu_Z,E[XX]", 3.9436),
    ("mu_Z,E[TX]", 16.1128),
    ("mu_sk(Z),E[TT]", 10.6291),
    ("mu_sk(Z),E[XX]", 2.6291),
    ("mu_sk(Z),E[TX]", 10.7418),
    ("mu_Z,E[P1,1]", 19.9817),
    ("mu_Z,E[P1,2]", 10.8237),
    ("mu_Z,E[P1,3]", 5.1947),
    ("mu_Z,E[Z1,0]", 22.4838),
    ("mu_Z,E[Z1,1]", 8.3215),
    ("mu_Z,E[Z1,2]", 5.1947),
    ("mu_sk(Z),E[P1,1]", 13.3211),
    ("mu_sk(Z),E[P1,2]", 7.2158),
    ("mu_sk(Z),E[P1,3]", 3.4631),
    ("mu_sk(Z),E[Z1,0]", 14.9892),
    ("mu_sk(Z),E[Z1,1]", 5.5477),
    ("mu_sk(Z),E[Z1,2]", 3.4631),
    ("eps_P1[E,1]", 0.681106),
    ("eps_Z1[E,1]", 0.519746),
];

/// Half a unit in the last printed decimal of a reference value, read off
/// its shortest decimal representation.
pub fn printed_half_ulp(v: f64) -> f64 {
    let s = format!("{v}");
    let decimals = s.split('.').nth(1).map_or(0, str::len) as i32;
    0.5 * 10f64.powi(-decimals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbourhood_means_of_the_typical_vertex_are_constant() {
        for tt in [0.40, 0.44, 0.45] {
            let e = DerivedInputs {
                eps_tt: tt,
                eps_p1: [0.3, 0.55, 0.15],
                eps_z1: [0.6, 0.25, 0.15],
                t_pair_sum: 0.75,
                tx_pair_sum: 0.35,
            };
            let rows = derived_tables(&e);
            let get = |n: &str| rows.iter().find(|r| r.0 == n).unwrap().1;
            assert!((get("eta_V,V[T]") - 8.0 / 3.0).abs() < 1e-12);
            assert!((get("eta_V,V[X]") - 4.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn every_reference_value_has_a_derived_row() {
        let e = DerivedInputs {
            eps_tt: 0.44,
            eps_p1: [0.55, 0.3, 0.15],
            eps_z1: [0.62, 0.23, 0.15],
            t_pair_sum: 0.75,
            tx_pair_sum: 0.35,
        };
        let rows = derived_tables(&e);
        for (name, _) in REFERENCE_VALUES {
            assert!(rows.iter().any(|r| r.0 == *name), "{name}");
        }
    }

    #[test]
    fn half_ulp_from_digits() {
        assert_eq!(printed_half_ulp(5.1947), 0.00005);
        assert_eq!(printed_half_ulp(2.65727), 0.000005);
        assert_eq!(printed_half_ulp(4.0), 0.5);
    }
}
