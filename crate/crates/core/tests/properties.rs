use std::f64::consts::TAU;

use invmetric::complex::{cayley, cayley_derivative};
use invmetric::densities::{density, poincare_density, pseudohyperbolic, schwarz_pick_gap};
use invmetric::geodesy::disc_distance;
use invmetric::{Complex64, Domain, HolomorphicMap, MetricKind, MobiusTransform};
use proptest::prelude::*;

fn disc_point(max: f64) -> impl Strategy<Value = Complex64> {
    (0.0..1.0f64, 0.0..TAU).prop_map(move |(u, t)| Complex64::from_polar(max * u.sqrt(), t))
}

fn mobius() -> impl Strategy<Value = MobiusTransform> {
    (disc_point(0.9), 0.0..TAU).prop_map(|(a, t)| MobiusTransform::new(a, t).unwrap())
}

fn blaschke() -> impl Strategy<Value = HolomorphicMap> {
    (prop::collection::vec(disc_point(0.9), 1..=4), 0.0..TAU)
        .prop_map(|(zeros, phase)| HolomorphicMap::blaschke(zeros, phase).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mobius_group_laws(m in mobius(), n in mobius(), z in disc_point(0.9)) {
        let mn = m.compose(&n);
        prop_assert!((mn.apply(z).unwrap() - m.apply(n.apply(z).unwrap()).unwrap()).norm() < 1e-11);
        prop_assert!((m.inverse().apply(m.apply(z).unwrap()).unwrap() - z).norm() < 1e-11);
    }

    #[test]
    fn automorphisms_are_isometries(m in mobius(), z in disc_point(0.9), w in disc_point(0.9)) {
        let (mz, mw) = (m.apply(z).unwrap(), m.apply(w).unwrap());
        prop_assert!((pseudohyperbolic(mz, mw).unwrap() - pseudohyperbolic(z, w).unwrap()).abs() < 1e-10);
        let xi = Complex64::new(0.3, -0.7);
        let pushed = poincare_density(mz, m.derivative(z).unwrap() * xi).unwrap();
        let here = poincare_density(z, xi).unwrap();
        prop_assert!((pushed - here).abs() <= 1e-10 * here);
    }

    #[test]
    fn blaschke_products_contract(f in blaschke(), z in disc_point(0.95), w in disc_point(0.95)) {
        let d = disc_distance(z, w).unwrap();
        let fd = disc_distance(f.eval(z).unwrap(), f.eval(w).unwrap()).unwrap();
        prop_assert!(fd <= d + 1e-9);
        prop_assert!(schwarz_pick_gap(&f, z).unwrap() >= -1e-12);
    }

    #[test]
    fn cayley_transports_the_half_plane_density(x in -3.0..3.0f64, y in 0.05..3.0f64, t in 0.0..TAU) {
        let z = Complex64::new(x, y);
        let xi = Complex64::from_polar(1.0, t);
        let half = density(&Domain::UpperHalfPlane, MetricKind::Kobayashi, z, xi).unwrap().upper;
        let disc = poincare_density(cayley(z).unwrap(), cayley_derivative(z).unwrap() * xi).unwrap();
        prop_assert!((half - disc).abs() <= 1e-10 * half);
    }

    #[test]
    fn densities_dominate_on_the_disc(z in disc_point(0.95), t in 0.0..TAU) {
        let xi = Complex64::from_polar(1.0, t);
        let d = Domain::UnitDisc;
        let k = density(&d, MetricKind::Kobayashi, z, xi).unwrap();
        let c = density(&d, MetricKind::Caratheodory, z, xi).unwrap();
        let q = density(&d, MetricKind::Quasihyperbolic, z, xi).unwrap();
        prop_assert_eq!(k.lower, c.lower);
        // 1/(1 - |z|^2) lies between 1/(2 delta) and 1/delta
        prop_assert!(k.upper <= q.upper * (1.0 + 1e-12));
        prop_assert!(2.0 * k.upper >= q.upper * (1.0 - 1e-12));
    }
}
