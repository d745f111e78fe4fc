//! Holomorphic maps with exact evaluation and exact analytic derivatives.
//!
//! Derivatives are always taken from the representation (Horner, product and
//! chain rules); finite differences only appear in tests.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{check_finite, checked_div, MobiusTransform, DENOMINATOR_FLOOR, I};
use crate::error::{fmt_point, Error, Result};

/// A holomorphic map given by a finite representation.
///
/// `Composition([f, g, h])` is `f ∘ g ∘ h`: the last entry is applied first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HolomorphicMap {
    /// Coefficients in ascending degree.
    Polynomial { coefficients: Vec<Complex64> },
    /// `e^{i phase} prod (z - a_k)/(1 - conj(a_k) z)`.
    Blaschke { zeros: Vec<Complex64>, phase: f64 },
    Rational {
        numerator: Vec<Complex64>,
        denominator: Vec<Complex64>,
    },
    Mobius { transform: MobiusTransform },
    /// `scale * z + offset`.
    Affine { scale: Complex64, offset: Complex64 },
    Composition { maps: Vec<HolomorphicMap> },
    /// Universal covering of the annulus `{r_inner < |w| < 1}` by the disc,
    /// normalized so that 0 maps to `sqrt(r_inner)`.
    AnnulusCovering { r_inner: f64 },
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        deriv = deriv * z + value;
        value = value * z + a;
    }
    (value, deriv)
}

fn pole_check(den: Complex64, z: Complex64) -> Result<()> {
    if den.norm() < DENOMINATOR_FLOOR {
        Err(Error::Pole(fmt_point(z)))
    } else {
        Ok(())
    }
}

/// Strip map of the annulus cover: `log r + (h/pi)(-i) Log(i(1+z)/(1-z))`, `h = -log r`.
fn annulus_strip(r_inner: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
    if z.norm() >= 1.0 {
        return Err(Error::outside(z));
    }
    let h = -r_inner.ln();
    let u = checked_div(I * (1.0 + z), 1.0 - z)?;
    let g = r_inner.ln() + (h / PI) * (-I) * u.ln();
    let dg = checked_div(-2.0 * I * h / PI, 1.0 - z * z)?;
    Ok((g, dg))
}

impl HolomorphicMap {
    pub fn identity() -> Self {
        HolomorphicMap::Affine {
            scale: Complex64::new(1.0, 0.0),
            offset: Complex64::new(0.0, 0.0),
        }
    }

    pub fn polynomial(coefficients: Vec<Complex64>) -> Self {
        HolomorphicMap::Polynomial { coefficients }
    }

    pub fn blaschke(zeros: Vec<Complex64>, phase: f64) -> Result<Self> {
        let map = HolomorphicMap::Blaschke { zeros, phase };
        map.validate()?;
        Ok(map)
    }

    pub fn mobius(transform: MobiusTransform) -> Self {
        HolomorphicMap::Mobius { transform }
    }

    pub fn affine(scale: Complex64, offset: Complex64) -> Self {
        HolomorphicMap::Affine { scale, offset }
    }

    pub fn constant(value: Complex64) -> Self {
        HolomorphicMap::Affine {
            scale: Complex64::new(0.0, 0.0),
            offset: value,
        }
    }

    pub fn rational(numerator: Vec<Complex64>, denominator: Vec<Complex64>) -> Result<Self> {
        let map = HolomorphicMap::Rational {
            numerator,
            denominator,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn annulus_covering(r_inner: f64) -> Result<Self> {
        let map = HolomorphicMap::AnnulusCovering { r_inner };
        map.validate()?;
        Ok(map)
    }

    /// Checks representation-level invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            HolomorphicMap::Polynomial { coefficients } => {
                for &a in coefficients {
                    check_finite(a, "polynomial coefficient")?;
                }
                Ok(())
            }
            HolomorphicMap::Blaschke { zeros, phase } => {
                if !phase.is_finite() {
                    return Err(Error::InvalidMap("Blaschke phase is not finite".into()));
                }
                for &a in zeros {
                    if !crate::complex::is_finite(a) || a.norm() >= 1.0 {
                        return Err(Error::InvalidMap(format!(
                            "Blaschke zero {} is not inside the unit disc",
                            fmt_point(a)
                        )));
                    }
                }
                Ok(())
            }
            HolomorphicMap::Rational {
                numerator,
                denominator,
            } => {
                if denominator.iter().all(|d| d.norm() == 0.0) {
                    return Err(Error::InvalidMap("rational map has zero denominator".into()));
                }
                for &a in numerator.iter().chain(denominator) {
                    check_finite(a, "rational coefficient")?;
                }
                Ok(())
            }
            HolomorphicMap::Mobius { .. } => Ok(()),
            HolomorphicMap::Affine { scale, offset } => {
                check_finite(*scale, "affine scale")?;
                check_finite(*offset, "affine offset")
            }
            HolomorphicMap::Composition { maps } => {
                if maps.is_empty() {
                    return Err(Error::InvalidMap("composition must be non-empty".into()));
                }
                maps.iter().try_for_each(HolomorphicMap::validate)
            }
            HolomorphicMap::AnnulusCovering { r_inner } => {
                if !(r_inner.is_finite() && *r_inner > 0.0 && *r_inner < 1.0) {
                    return Err(Error::InvalidMap(format!(
                        "annulus inner radius {r_inner} not in (0, 1)"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.eval_with_derivative(z).map(|(v, _)| v)
    }

    pub fn eval_derivative(&self, z: Complex64) -> Result<Complex64> {
        self.eval_with_derivative(z).map(|(_, d)| d)
    }

    /// Value and derivative at `z` in one pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        check_finite(z, "point")?;
        match self {
            HolomorphicMap::Polynomial { coefficients } => Ok(horner(coefficients, z)),
            HolomorphicMap::Blaschke { zeros, phase } => {
                self.validate()?;
                let rot = Complex64::from_polar(1.0, *phase);
                // product rule: (prod f_k)' = sum_k f_k' prod_{j != k} f_j
                let factors = zeros
                    .iter()
                    .map(|&a| {
                        let den = 1.0 - a.conj() * z;
                        pole_check(den, z)?;
                        Ok(((z - a) / den, (1.0 - a.norm_sqr()) / (den * den)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let value: Complex64 = factors.iter().map(|f| f.0).product();
                let mut deriv = Complex64::new(0.0, 0.0);
                for k in 0..factors.len() {
                    let mut term = factors[k].1;
                    for (j, f) in factors.iter().enumerate() {
                        if j != k {
                            term *= f.0;
                        }
                    }
                    deriv += term;
                }
                Ok((rot * value, rot * deriv))
            }
            HolomorphicMap::Rational {
                numerator,
                denominator,
            } => {
                let (p, dp) = horner(numerator, z);
                let (q, dq) = horner(denominator, z);
                pole_check(q, z)?;
                Ok((p / q, (dp * q - p * dq) / (q * q)))
            }
            HolomorphicMap::Mobius { transform } => {
                Ok((transform.apply(z)?, transform.derivative(z)?))
            }
            HolomorphicMap::Affine { scale, offset } => Ok((scale * z + offset, *scale)),
            HolomorphicMap::Composition { maps } => {
                if maps.is_empty() {
                    return Err(Error::InvalidMap("composition must be non-empty".into()));
                }
                let mut value = z;
                let mut deriv = Complex64::new(1.0, 0.0);
                for map in maps.iter().rev() {
                    let (v, d) = map.eval_with_derivative(value)?;
                    deriv *= d;
                    value = v;
                }
                Ok((value, deriv))
            }
            HolomorphicMap::AnnulusCovering { r_inner } => {
                self.validate()?;
                let (g, dg) = annulus_strip(*r_inner, z)?;
                let w = g.exp();
                Ok((w, w * dg))
            }
        }
    }

    /// Maximum of `|f|` over `n` equally spaced points of the unit circle.
    ///
    /// For maps holomorphic on a neighborhood of the closed disc this bounds
    /// `sup_D |f|` up to sampling error (maximum principle).
    pub fn disc_image_bound(&self, n_boundary_samples: usize) -> Result<f64> {
        if n_boundary_samples == 0 {
            return Err(Error::Precondition("need at least one boundary sample".into()));
        }
        if let HolomorphicMap::AnnulusCovering { .. } = self {
            return Err(Error::Pole("covering map is singular at ±1".into()));
        }
        let mut best: f64 = 0.0;
        for k in 0..n_boundary_samples {
            let z = Complex64::from_polar(1.0, TAU * k as f64 / n_boundary_samples as f64);
            let v = self.eval(z).map_err(|e| match e {
                Error::Numeric(_) => Error::Pole(fmt_point(z)),
                other => other,
            })?;
            best = best.max(v.norm());
        }
        Ok(best)
    }

    /// Pointwise equality on a fixed 64-point sample of the disc.
    pub fn approx_eq(&self, other: &HolomorphicMap, tol: f64) -> bool {
        sample_points_64().into_iter().all(|z| {
            match (self.eval(z), other.eval(z)) {
                (Ok(a), Ok(b)) => (a - b).norm() <= tol,
                _ => false,
            }
        })
    }
}

/// `f ∘ g`.
pub fn compose(f: HolomorphicMap, g: HolomorphicMap) -> HolomorphicMap {
    let mut maps = Vec::new();
    for m in [f, g] {
        match m {
            HolomorphicMap::Composition { maps: inner } => maps.extend(inner),
            other => maps.push(other),
        }
    }
    HolomorphicMap::Composition { maps }
}

/// Golden-angle spiral of 64 points filling the disc of radius 0.9.
fn sample_points_64() -> Vec<Complex64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..64)
        .map(|k| {
            let r = 0.9 * ((k as f64 + 0.5) / 64.0).sqrt();
            Complex64::from_polar(r, golden * k as f64)
        })
        .collect()
}

/// A point uniformly distributed (by area) in the disc of the given radius.
pub fn random_disc_point<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, rng.gen::<f64>() * TAU)
}

/// Random Blaschke product of degree 1 to 4, zeros uniform in the disc of
/// radius 0.9, uniform phase.
pub fn random_blaschke<R: Rng + ?Sized>(rng: &mut R) -> HolomorphicMap {
    let degree = rng.gen_range(1..=4);
    let zeros = (0..degree).map(|_| random_disc_point(rng, 0.9)).collect();
    HolomorphicMap::Blaschke {
        zeros,
        phase: rng.gen::<f64>() * TAU,
    }
}

/// Random disc self-map: a random Blaschke product, scaled by a factor in
/// `(0, 1]` half of the time.
pub fn random_self_map<R: Rng + ?Sized>(rng: &mut R) -> HolomorphicMap {
    let b = random_blaschke(rng);
    if rng.gen_bool(0.5) {
        let s = 1.0 - rng.gen::<f64>();
        compose(
            HolomorphicMap::affine(Complex64::new(s, 0.0), Complex64::new(0.0, 0.0)),
            b,
        )
    } else {
        b
    }
}
