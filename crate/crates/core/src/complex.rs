//! Complex points, disc automorphisms and the Cayley transform.
//!
//! Every automorphism of the unit disc is stored in the canonical form
//! `z -> e^{i theta} (z - a) / (1 - conj(a) z)` with `|a| < 1` and
//! `theta` in `[0, 2 pi)`. Composition and inversion re-derive `(a, theta)`
//! so that two transforms are equal exactly when their parameters are.

use std::f64::consts::{PI, TAU};

pub use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{fmt_point, Error, Result};

/// A point of the complex plane.
pub type ComplexPoint = Complex64;

/// A tangent vector at an implicit base point.
pub type TangentVector = Complex64;

/// Denominators below this magnitude are reported as numeric failures.
pub const DENOMINATOR_FLOOR: f64 = 1e-300;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub(crate) fn check_finite(z: Complex64, what: &str) -> Result<()> {
    if is_finite(z) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{what} is not finite")))
    }
}

pub(crate) fn checked_div(num: Complex64, den: Complex64) -> Result<Complex64> {
    if den.norm() < DENOMINATOR_FLOOR {
        return Err(Error::Numeric(format!(
            "denominator {} below threshold",
            fmt_point(den)
        )));
    }
    Ok(num / den)
}

fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Disc automorphism `z -> e^{i theta} phi_a(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MobiusParams", into = "MobiusParams")]
pub struct MobiusTransform {
    a: Complex64,
    theta: f64,
}

/// Wire form of a [`MobiusTransform`]; validated on the way in.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct MobiusParams {
    a: Complex64,
    #[serde(default)]
    theta: f64,
}

impl TryFrom<MobiusParams> for MobiusTransform {
    type Error = Error;

    fn try_from(p: MobiusParams) -> Result<Self> {
        MobiusTransform::new(p.a, p.theta)
    }
}

impl From<MobiusTransform> for MobiusParams {
    fn from(m: MobiusTransform) -> Self {
        MobiusParams {
            a: m.a,
            theta: m.theta,
        }
    }
}

impl MobiusTransform {
    pub fn new(a: Complex64, theta: f64) -> Result<Self> {
        check_finite(a, "Mobius center")?;
        if !theta.is_finite() {
            return Err(Error::Precondition("rotation angle is not finite".into()));
        }
        if a.norm() >= 1.0 {
            return Err(Error::Precondition(format!(
                "Mobius center {} must lie in the open unit disc",
                fmt_point(a)
            )));
        }
        Ok(Self {
            a,
            theta: normalize_angle(theta),
        })
    }

    pub fn identity() -> Self {
        Self {
            a: Complex64::new(0.0, 0.0),
            theta: 0.0,
        }
    }

    /// `phi_a(z) = (z - a) / (1 - conj(a) z)`, which sends `a` to 0.
    pub fn phi(a: Complex64) -> Result<Self> {
        Self::new(a, 0.0)
    }

    pub fn rotation(theta: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, 0.0), theta)
    }

    pub fn center(&self) -> Complex64 {
        self.a
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn rot(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    /// Evaluates the transform. The formula is meaningful wherever the
    /// denominator is nonzero; use [`apply_in_disc`](Self::apply_in_disc) to insist on `|z| < 1`.
    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        check_finite(z, "point")?;
        let den = Complex64::new(1.0, 0.0) - self.a.conj() * z;
        Ok(self.rot() * checked_div(z - self.a, den)?)
    }

    pub fn apply_in_disc(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() >= 1.0 {
            return Err(Error::outside(z));
        }
        self.apply(z)
    }

    /// `e^{i theta} (1 - |a|^2) / (1 - conj(a) z)^2`.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        check_finite(z, "point")?;
        let den = Complex64::new(1.0, 0.0) - self.a.conj() * z;
        let num = self.rot() * (1.0 - self.a.norm_sqr());
        checked_div(num, den * den)
    }

    /// The inverse of `e^{i theta} phi_a` is `e^{-i theta} phi_{-e^{i theta} a}`.
    pub fn inverse(&self) -> Self {
        Self {
            a: -(self.rot() * self.a),
            theta: normalize_angle(-self.theta),
        }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        // product of the matrices [[e, -e a], [-conj(a), 1]]
        let (e1, a1) = (self.rot(), self.a);
        let (e2, a2) = (other.rot(), other.a);
        let p = e2 + a1 * a2.conj();
        let a = (e2 * a2 + a1) / p;
        let s = Complex64::new(1.0, 0.0) + a1.conj() * e2 * a2;
        Self {
            a,
            theta: normalize_angle((e1 * p / s).arg()),
        }
    }

    /// Parameter equality up to `tol`, comparing angles modulo `2 pi`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let mut dt = (self.theta - other.theta).abs();
        if dt > PI {
            dt = TAU - dt;
        }
        (self.a - other.a).norm() <= tol && dt <= tol
    }
}

/// Cayley transform `z -> (z - i)/(z + i)` from the upper half-plane onto the disc.
pub fn cayley(z: Complex64) -> Result<Complex64> {
    check_finite(z, "point")?;
    if z.im <= 0.0 {
        return Err(Error::outside(z));
    }
    checked_div(z - I, z + I)
}

/// Derivative `2i / (z + i)^2` of the Cayley transform.
pub fn cayley_derivative(z: Complex64) -> Result<Complex64> {
    check_finite(z, "point")?;
    if z.im <= 0.0 {
        return Err(Error::outside(z));
    }
    let s = z + I;
    checked_div(2.0 * I, s * s)
}

/// Inverse Cayley transform `w -> i (1 + w)/(1 - w)` from the disc onto the upper half-plane.
pub fn cayley_inverse(w: Complex64) -> Result<Complex64> {
    check_finite(w, "point")?;
    if w.norm() >= 1.0 {
        return Err(Error::outside(w));
    }
    checked_div(I * (1.0 + w), 1.0 - w)
}

pub fn cayley_inverse_derivative(w: Complex64) -> Result<Complex64> {
    check_finite(w, "point")?;
    if w.norm() >= 1.0 {
        return Err(Error::outside(w));
    }
    let s = 1.0 - w;
    checked_div(2.0 * I, s * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_disc_point(rng: &mut impl Rng, radius: f64) -> Complex64 {
        let r = radius * rng.gen::<f64>().sqrt();
        Complex64::from_polar(r, rng.gen::<f64>() * TAU)
    }

    fn random_mobius(rng: &mut impl Rng) -> MobiusTransform {
        MobiusTransform::new(random_disc_point(rng, 0.95), rng.gen::<f64>() * TAU).unwrap()
    }

    #[test]
    fn apply_examples() {
        let id = MobiusTransform::identity();
        assert_eq!(id.apply(c(0.3, 0.4)).unwrap(), c(0.3, 0.4));
        let m = MobiusTransform::phi(c(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(m.apply(c(0.5, 0.0)).unwrap().norm(), 0.0);
        let v = m.apply(c(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v.re, -0.5);
        assert_abs_diff_eq!(v.im, 0.0);
    }

    #[test]
    fn strict_disc_mode_rejects_boundary() {
        let m = MobiusTransform::phi(c(0.5, 0.0)).unwrap();
        assert!(matches!(m.apply_in_disc(c(1.0, 0.0)), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn pole_is_numeric_error() {
        // 1 - conj(a) z vanishes at z = 1/conj(a) = 2
        let m = MobiusTransform::phi(c(0.5, 0.0)).unwrap();
        assert!(matches!(m.apply(c(2.0, 0.0)), Err(Error::Numeric(_))));
    }

    #[test]
    fn rejects_center_outside_disc() {
        assert!(MobiusTransform::new(c(1.0, 0.0), 0.0).is_err());
        assert!(MobiusTransform::new(c(f64::NAN, 0.0), 0.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let id = MobiusTransform::identity();
        assert_eq!(id.derivative(c(0.2, -0.7)).unwrap(), c(1.0, 0.0));
        let p = c(0.5, 0.0);
        let m = MobiusTransform::phi(p).unwrap();
        assert_abs_diff_eq!(m.derivative(p).unwrap().re, 4.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.derivative(c(0.0, 0.0)).unwrap().re, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn inverse_examples() {
        assert!(MobiusTransform::identity()
            .inverse()
            .approx_eq(&MobiusTransform::identity(), 0.0));
        let m = MobiusTransform::phi(c(0.5, 0.0)).unwrap();
        assert!(m.inverse().approx_eq(&MobiusTransform::phi(c(-0.5, 0.0)).unwrap(), 1e-15));
        let r = MobiusTransform::rotation(PI / 3.0).unwrap();
        let inv = r.inverse();
        assert_abs_diff_eq!(inv.theta(), TAU - PI / 3.0, epsilon = 1e-15);
        assert_eq!(inv.center(), c(0.0, 0.0));
    }

    #[test]
    fn compose_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_mobius(&mut rng);
        assert!(MobiusTransform::identity().compose(&m).approx_eq(&m, 1e-14));
        assert!(m
            .compose(&m.inverse())
            .approx_eq(&MobiusTransform::identity(), 1e-14));

        let p = MobiusTransform::phi(c(0.3, 0.0)).unwrap();
        let q = MobiusTransform::phi(c(-0.3, 0.0)).unwrap();
        let pq = p.compose(&q);
        assert!(pq.approx_eq(&MobiusTransform::identity(), 1e-14));
        for _ in 0..100 {
            let z = random_disc_point(&mut rng, 0.999);
            let direct = p.apply(q.apply(z).unwrap()).unwrap();
            assert!((direct - z).norm() < 1e-14);
            assert!((pq.apply(z).unwrap() - z).norm() < 1e-14);
        }
    }

    #[test]
    fn inverse_round_trip_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let m = random_mobius(&mut rng);
            let inv = m.inverse();
            for _ in 0..10 {
                let z = random_disc_point(&mut rng, 0.99);
                let back = inv.apply(m.apply(z).unwrap()).unwrap();
                assert!((back - z).norm() < 1e-14, "{back} vs {z}");
            }
        }
    }

    #[test]
    fn composition_matches_pointwise_and_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let (m1, m2, m3) = (
                random_mobius(&mut rng),
                random_mobius(&mut rng),
                random_mobius(&mut rng),
            );
            let m12 = m1.compose(&m2);
            assert!(m12.center().norm() < 1.0);
            let left = m12.compose(&m3);
            let right = m1.compose(&m2.compose(&m3));
            for _ in 0..5 {
                let z = random_disc_point(&mut rng, 0.9);
                let direct = m1.apply(m2.apply(z).unwrap()).unwrap();
                assert!((m12.apply(z).unwrap() - direct).norm() < 1e-13);
                let l = left.apply(z).unwrap();
                let r = right.apply(z).unwrap();
                assert!((l - r).norm() < 1e-13, "{} {} {}", (l - r).norm(), left.center().norm(), right.center().norm());
            }
        }
    }

    #[test]
    fn automorphisms_preserve_the_disc() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10_000 {
            let m = random_mobius(&mut rng);
            let z = random_disc_point(&mut rng, 0.999_999);
            assert!(m.apply(z).unwrap().norm() < 1.0);
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let h = 1e-5;
        for _ in 0..500 {
            let m = random_mobius(&mut rng);
            let z = random_disc_point(&mut rng, 0.8);
            let fd = (m.apply(z + h).unwrap() - m.apply(z - h).unwrap()) / (2.0 * h);
            assert!((fd - m.derivative(z).unwrap()).norm() < 1e-7);
        }
    }

    #[test]
    fn cayley_examples() {
        assert!(cayley(I).unwrap().norm() < 1e-16);
        assert!((cayley_inverse(c(0.0, 0.0)).unwrap() - I).norm() < 1e-16);
        assert!(cayley(c(0.0, -1.0)).is_err());
        assert!(cayley_inverse(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn cayley_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..100 {
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..3.0));
            let w = cayley(z).unwrap();
            assert!(w.norm() < 1.0);
            assert!((cayley_inverse(w).unwrap() - z).norm() < 1e-14 * (1.0 + z.norm_sqr()));
            let h = 1e-5;
            let fd = (cayley(z + h).unwrap() - cayley(z - h).unwrap()) / (2.0 * h);
            assert!((fd - cayley_derivative(z).unwrap()).norm() < 1e-7);
            let chain = cayley_derivative(z).unwrap() * cayley_inverse_derivative(w).unwrap();
            assert!((chain - 1.0).norm() < 1e-12);
        }
    }
}
