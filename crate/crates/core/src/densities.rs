//! Infinitesimal metrics: exact closed forms on the disc, half-plane and annulus,
//! certified `[lower, upper]` brackets on smooth domains.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{cayley, cayley_derivative, check_finite, MobiusTransform, I};
use crate::domains::{Domain, SmoothDomain, INTERIOR_MARGIN};
use crate::error::{Error, Result};
use crate::holomaps::HolomorphicMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Poincare,
    Kobayashi,
    Caratheodory,
    Quasihyperbolic,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Poincare => "poincare",
            MetricKind::Kobayashi => "kobayashi",
            MetricKind::Caratheodory => "caratheodory",
            MetricKind::Quasihyperbolic => "quasihyperbolic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBound {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl DensityBound {
    pub fn exact(value: f64) -> Self {
        DensityBound {
            lower: value,
            upper: value,
            exact: true,
        }
    }

    pub fn bracket(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::BracketInversion { lower, upper });
        }
        Ok(DensityBound {
            lower,
            upper,
            exact: false,
        })
    }

    fn scaled(self, s: f64) -> Self {
        DensityBound {
            lower: self.lower * s,
            upper: self.upper * s,
            exact: self.exact,
        }
    }
}

/// Analytic discs `f: D -> Omega`, normalized so `f(0) = z`.
#[derive(Debug, Clone)]
pub enum AnalyticDisc {
    /// Affine maps onto discs inside the domain that contain `z`: the centered
    /// disc of radius `delta(z)` and off-center discs along `directions` rays.
    Inscribed { directions: usize },
    /// An explicit map of the disc into the domain, precomposed with the disc
    /// automorphism sending 0 to a preimage of `z`.
    Map(HolomorphicMap),
    /// Annulus covering discs (deck-transformation normalized).
    Covering,
}

/// Maps `f: Omega -> D`.
#[derive(Debug, Clone)]
pub enum DiscValuedMap {
    /// An explicit map of the domain into the disc.
    Map(HolomorphicMap),
    /// `w` itself, for domains inside the unit disc.
    Identity,
    /// Cayley transform, for the half-plane.
    Cayley,
    /// `(w - c)/M` with `M` a certified radius about `c`, for `c` the query
    /// points and the domain center.
    ScaledCoordinate,
    /// `R/(w - c)` for exterior tangent discs `D(c, R)`.
    ExteriorInversions,
    /// Cayley images of supporting half-planes, for convex boundaries.
    SupportingHalfPlanes,
    /// Annulus maps `w^k`, `(r/w)^k` and `(w + e^{i phi} r/w)/(1 + r)`.
    AnnulusPowers { max_power: u32, phases: usize },
}

#[derive(Debug, Clone)]
pub enum CandidateFamily {
    AnalyticDiscs(Vec<AnalyticDisc>),
    DiscValuedMaps(Vec<DiscValuedMap>),
}

impl CandidateFamily {
    /// Kobayashi-side family used by default on each domain type.
    pub fn analytic_discs_for(domain: &Domain) -> Self {
        let members = match domain {
            Domain::UnitDisc => vec![AnalyticDisc::Map(HolomorphicMap::identity())],
            Domain::UpperHalfPlane => vec![AnalyticDisc::Map(cayley_inverse_map())],
            Domain::Annulus { .. } => vec![AnalyticDisc::Covering],
            Domain::Smooth(_) => vec![AnalyticDisc::Inscribed { directions: 32 }],
        };
        CandidateFamily::AnalyticDiscs(members)
    }

    /// Carathéodory-side family used by default on each domain type.
    pub fn disc_valued_for(domain: &Domain) -> Self {
        let members = match domain {
            Domain::UnitDisc => vec![DiscValuedMap::Identity],
            Domain::UpperHalfPlane => vec![DiscValuedMap::Cayley],
            Domain::Annulus { .. } => vec![
                DiscValuedMap::Identity,
                DiscValuedMap::ScaledCoordinate,
                DiscValuedMap::AnnulusPowers {
                    max_power: 4,
                    phases: 8,
                },
            ],
            Domain::Smooth(_) => vec![
                DiscValuedMap::ScaledCoordinate,
                DiscValuedMap::ExteriorInversions,
                DiscValuedMap::SupportingHalfPlanes,
            ],
        };
        CandidateFamily::DiscValuedMaps(members)
    }

    /// Möbius maps of the disc onto itself: the identity and `count - 1` fixed
    /// automorphisms.
    pub fn mobius_discs(count: usize) -> Self {
        let members = (0..count)
            .map(|k| {
                if k == 0 {
                    return AnalyticDisc::Map(HolomorphicMap::identity());
                }
                let a = Complex64::from_polar(0.7 * k as f64 / count as f64, 2.4 * k as f64);
                let m = MobiusTransform::new(a, 0.9 * k as f64).expect("|a| < 1");
                AnalyticDisc::Map(HolomorphicMap::mobius(m))
            })
            .collect();
        CandidateFamily::AnalyticDiscs(members)
    }
}

fn cayley_inverse_map() -> HolomorphicMap {
    HolomorphicMap::rational(vec![I, I], vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)])
        .expect("valid rational map")
}

/// `|xi| / (1 - |P|^2)` on the unit disc.
pub fn poincare_density(p: Complex64, xi: Complex64) -> Result<f64> {
    check_finite(p, "point")?;
    check_finite(xi, "vector")?;
    if p.norm() >= 1.0 {
        return Err(Error::Precondition(format!("|P| must be < 1, got {}", p.norm())));
    }
    Ok(xi.norm() / (1.0 - p.norm_sqr()))
}

/// `|a - b| / |1 - conj(a) b|`.
pub fn pseudohyperbolic(a: Complex64, b: Complex64) -> Result<f64> {
    check_finite(a, "point")?;
    check_finite(b, "point")?;
    if a.norm() >= 1.0 || b.norm() >= 1.0 {
        return Err(Error::Precondition("points must lie in the open unit disc".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    Ok(((a - b).norm() / (1.0 - a.conj() * b).norm()).min(1.0 - f64::EPSILON))
}

/// Half-plane density `|xi| / (2 Im z)`.
fn halfplane_density(z: Complex64, xi: Complex64) -> f64 {
    xi.norm() / (2.0 * z.im)
}

/// Kobayashi density of `{r < |z| < 1}` pushed down from the strip
/// `{log r < Re w < 0}` by `exp`: with `h = -log r`,
/// `pi |xi| / (2 h |z| sin(pi log(|z|/r) / h))`.
pub fn annulus_kobayashi_density(r_inner: f64, z: Complex64, xi: Complex64) -> f64 {
    let h = -r_inner.ln();
    let x = (z.norm() / r_inner).ln();
    PI * xi.norm() / (2.0 * h * z.norm() * (PI * x / h).sin())
}

pub fn quasihyperbolic_density(domain: &Domain, z: Complex64, xi: Complex64) -> Result<f64> {
    check_finite(xi, "vector")?;
    Ok(xi.norm() / domain.boundary_distance(z)?)
}

/// Constants `(c, C)` with `c |xi|/delta <= F_K <= C |xi|/delta` for
/// `delta(z) <= r`, from the osculating radii.
pub fn boundary_bracket_constants(domain: &Domain) -> Result<(f64, f64)> {
    let radii = domain.osculating_radii()?;
    let c = if radii.big_r.is_infinite() {
        0.5
    } else {
        radii.big_r / (2.0 * radii.big_r + radii.r)
    };
    Ok((c, 1.0))
}

fn is_convex(domain: &Domain) -> bool {
    match domain {
        Domain::UnitDisc | Domain::UpperHalfPlane => true,
        Domain::Annulus { .. } => false,
        Domain::Smooth(s) => s.is_convex(),
    }
}

/// Per unit `|xi|` Kobayashi bracket on a smooth domain.
fn smooth_kobayashi_unit(s: &SmoothDomain, z: Complex64) -> Result<DensityBound> {
    let hit = s.nearest(z);
    if !(crate::complex::is_finite(z) && hit.distance > INTERIOR_MARGIN && s.winding_contains(z)) {
        return Err(Error::outside(z));
    }
    let delta = hit.distance;
    let inward = hit.inward();
    let (r, big_r) = (s.interior_radius(), s.exterior_radius());

    let mut upper = 1.0 / delta;
    if delta < 2.0 * r {
        upper = upper.min(r / (delta * (2.0 * r - delta)));
    }

    // exterior tangent disc D(q, R) at pi(z): Omega sits in {R < |w - q| < Rt}
    let q = hit.point - big_r * inward;
    let d = (z - q).norm();
    let mut lower = big_r / (d * d - big_r * big_r);
    let rt = s.circumradius_bound(q);
    if rt > d {
        let u = (z - q) / rt;
        lower = lower.max(annulus_kobayashi_density(big_r / rt, u, Complex64::new(1.0, 0.0)) / rt);
    }
    let c0 = s.centroid();
    let m = s.circumradius_bound(c0);
    lower = lower.max(m / (m * m - (z - c0).norm_sqr()));
    if s.is_convex() {
        lower = lower.max(1.0 / (2.0 * delta));
    }
    DensityBound::bracket(lower, upper)
}

pub fn kobayashi_density(domain: &Domain, z: Complex64, xi: Complex64) -> Result<DensityBound> {
    check_finite(xi, "vector")?;
    if let Domain::Smooth(s) = domain {
        let unit = smooth_kobayashi_unit(s, z)?;
        if xi.norm() == 0.0 {
            return Ok(DensityBound::exact(0.0));
        }
        return Ok(unit.scaled(xi.norm()));
    }
    domain.require(z)?;
    if xi.norm() == 0.0 {
        return Ok(DensityBound::exact(0.0));
    }
    match domain {
        Domain::UnitDisc => poincare_density(z, xi).map(DensityBound::exact),
        Domain::UpperHalfPlane => Ok(DensityBound::exact(halfplane_density(z, xi))),
        Domain::Annulus { r_inner } => Ok(DensityBound::exact(annulus_kobayashi_density(
            *r_inner, z, xi,
        ))),
        Domain::Smooth(_) => unreachable!("handled above"),
    }
}

pub fn caratheodory_density(
    domain: &Domain,
    z: Complex64,
    xi: Complex64,
    family: &CandidateFamily,
) -> Result<DensityBound> {
    check_finite(xi, "vector")?;
    domain.require(z)?;
    if let CandidateFamily::DiscValuedMaps(m) = family {
        if m.is_empty() {
            return Err(Error::EmptyFamily);
        }
    }
    if xi.norm() == 0.0 {
        return Ok(DensityBound::exact(0.0));
    }
    match domain {
        Domain::UnitDisc | Domain::UpperHalfPlane => kobayashi_density(domain, z, xi),
        _ => {
            let lower = caratheodory_lower_from_family(domain, z, xi, family)?;
            let upper = kobayashi_density(domain, z, xi)?.upper;
            DensityBound::bracket(lower, upper)
        }
    }
}

/// Density of `metric`, dispatching to the exact form or bracket for the domain.
pub fn density(domain: &Domain, metric: MetricKind, z: Complex64, xi: Complex64) -> Result<DensityBound> {
    match metric {
        MetricKind::Poincare => match domain {
            Domain::UnitDisc | Domain::UpperHalfPlane => kobayashi_density(domain, z, xi),
            _ => Err(Error::MetricUnavailable {
                metric: metric.name().into(),
                domain: domain.name().into(),
            }),
        },
        MetricKind::Kobayashi => kobayashi_density(domain, z, xi),
        MetricKind::Caratheodory => {
            caratheodory_density(domain, z, xi, &CandidateFamily::disc_valued_for(domain))
        }
        MetricKind::Quasihyperbolic => quasihyperbolic_density(domain, z, xi).map(DensityBound::exact),
    }
}

/// Upper density only; cheaper than [`density`] for Carathéodory brackets.
pub(crate) fn density_upper(domain: &Domain, metric: MetricKind, z: Complex64, xi: Complex64) -> Result<f64> {
    match metric {
        MetricKind::Caratheodory => Ok(kobayashi_density(domain, z, xi)?.upper),
        _ => Ok(density(domain, metric, z, xi)?.upper),
    }
}

/// `(1 - |f(a)|^2)/(1 - |a|^2) - |f'(a)|`.
pub fn schwarz_pick_gap(f: &HolomorphicMap, a: Complex64) -> Result<f64> {
    check_finite(a, "point")?;
    if a.norm() >= 1.0 {
        return Err(Error::Precondition(format!("|a| must be < 1, got {}", a.norm())));
    }
    let bound = f.disc_image_bound(4096)?;
    if bound > 1.0 + 1e-9 {
        return Err(Error::NotSelfMap(bound));
    }
    let (fa, dfa) = f.eval_with_derivative(a)?;
    Ok((1.0 - fa.norm_sqr()) / (1.0 - a.norm_sqr()) - dfa.norm())
}

/// A concrete disc-valued map with its derivative.
#[derive(Debug, Clone)]
pub(crate) enum ConcreteMap {
    Holo(HolomorphicMap),
    Cayley,
    Affine { center: Complex64, scale: f64 },
    Inversion { center: Complex64, radius: f64 },
    HalfPlane { point: Complex64, inward: Complex64 },
    Power(i32),
    InvPower { r: f64, k: i32 },
    Joukowski { r: f64, rot: Complex64 },
}

impl ConcreteMap {
    pub(crate) fn eval(&self, w: Complex64) -> Result<(Complex64, Complex64)> {
        let one = Complex64::new(1.0, 0.0);
        Ok(match self {
            ConcreteMap::Holo(f) => f.eval_with_derivative(w)?,
            ConcreteMap::Cayley => (cayley(w)?, cayley_derivative(w)?),
            ConcreteMap::Affine { center, scale } => ((w - center) / *scale, one / *scale),
            ConcreteMap::Inversion { center, radius } => {
                let v = w - center;
                (*radius / v, -*radius / (v * v))
            }
            ConcreteMap::HalfPlane { point, inward } => {
                let rot = I * inward.conj();
                let t = (w - point) * rot;
                let den = t + I;
                ((t - I) / den, 2.0 * I * rot / (den * den))
            }
            ConcreteMap::Power(k) => (w.powi(*k), f64::from(*k) * w.powi(k - 1)),
            ConcreteMap::InvPower { r, k } => {
                let u = *r / w;
                (u.powi(*k), -f64::from(*k) * u.powi(*k) / w)
            }
            ConcreteMap::Joukowski { r, rot } => (
                (w + rot * *r / w) / (1.0 + r),
                (one - rot * *r / (w * w)) / (1.0 + r),
            ),
        })
    }
}

/// Instantiates a disc-valued family on `domain`, using `anchors` for the
/// members that adapt to the query points.
pub(crate) fn concrete_maps(
    domain: &Domain,
    members: &[DiscValuedMap],
    anchors: &[Complex64],
) -> Vec<ConcreteMap> {
    let mut out = Vec::new();
    for member in members {
        match (member, domain) {
            (DiscValuedMap::Map(f), _) => out.push(ConcreteMap::Holo(f.clone())),
            (DiscValuedMap::Identity, Domain::UnitDisc | Domain::Annulus { .. }) => {
                out.push(ConcreteMap::Holo(HolomorphicMap::identity()))
            }
            (DiscValuedMap::Cayley, Domain::UpperHalfPlane) => out.push(ConcreteMap::Cayley),
            (DiscValuedMap::ScaledCoordinate, d) if d.is_bounded() => {
                for &c in anchors.iter().chain(std::iter::once(&d.center())) {
                    out.push(ConcreteMap::Affine {
                        center: c,
                        scale: d.circumradius_about(c),
                    });
                }
            }
            (DiscValuedMap::ExteriorInversions, Domain::Annulus { r_inner }) => {
                out.push(ConcreteMap::Inversion {
                    center: Complex64::new(0.0, 0.0),
                    radius: *r_inner,
                })
            }
            (DiscValuedMap::ExteriorInversions, Domain::Smooth(s)) => {
                let big_r = s.exterior_radius();
                for (k, &p) in s.samples().iter().enumerate() {
                    let outward = -I * s.sample_tangent(k);
                    out.push(ConcreteMap::Inversion {
                        center: p + big_r * outward,
                        radius: big_r,
                    });
                }
            }
            (DiscValuedMap::SupportingHalfPlanes, Domain::UnitDisc) => {
                for k in 0..64 {
                    let p = Complex64::from_polar(1.0, TAU * k as f64 / 64.0);
                    out.push(ConcreteMap::HalfPlane { point: p, inward: -p });
                }
            }
            (DiscValuedMap::SupportingHalfPlanes, d @ Domain::Smooth(s)) if is_convex(d) => {
                for (k, &p) in s.samples().iter().enumerate() {
                    out.push(ConcreteMap::HalfPlane {
                        point: p,
                        inward: I * s.sample_tangent(k),
                    });
                }
            }
            (DiscValuedMap::AnnulusPowers { max_power, phases }, Domain::Annulus { r_inner }) => {
                let r = *r_inner;
                for k in 1..=*max_power as i32 {
                    out.push(ConcreteMap::Power(k));
                    out.push(ConcreteMap::InvPower { r, k });
                }
                for j in 0..*phases {
                    let rot = Complex64::from_polar(1.0, TAU * j as f64 / *phases as f64);
                    out.push(ConcreteMap::Joukowski { r, rot });
                }
                // the phase that sends the anchor closest to 0
                for &a in anchors {
                    if a.norm() > 0.0 {
                        let rot = -(a * a) / a.norm_sqr();
                        out.push(ConcreteMap::Joukowski { r, rot });
                    }
                }
            }
            _ => {}
        }
    }
    out
}

fn family_members(family: &CandidateFamily) -> Result<&[DiscValuedMap]> {
    match family {
        CandidateFamily::DiscValuedMaps(m) if m.is_empty() => Err(Error::EmptyFamily),
        CandidateFamily::DiscValuedMaps(m) => Ok(m),
        CandidateFamily::AnalyticDiscs(_) => Err(Error::Precondition(
            "Carathéodory bounds need a disc-valued family".into(),
        )),
    }
}

/// `max |f'(z) xi| / (1 - |f(z)|^2)` over the family: a lower bound for the
/// Carathéodory density.
pub fn caratheodory_lower_from_family(
    domain: &Domain,
    z: Complex64,
    xi: Complex64,
    family: &CandidateFamily,
) -> Result<f64> {
    check_finite(xi, "vector")?;
    domain.require(z)?;
    let maps = concrete_maps(domain, family_members(family)?, &[z]);
    let mut best: Option<f64> = None;
    for f in &maps {
        let Ok((fz, dfz)) = f.eval(z) else { continue };
        if !(fz.norm() < 1.0) {
            continue;
        }
        let v = (dfz * xi).norm() / (1.0 - fz.norm_sqr());
        best = Some(best.map_or(v, |b: f64| b.max(v)));
    }
    best.ok_or(Error::EmptyFamily)
}

/// Disc points `a` with `f(a) = target`, by damped Newton from a fixed seed set.
pub(crate) fn disc_preimages(f: &HolomorphicMap, target: Complex64) -> Vec<Complex64> {
    let mut roots: Vec<Complex64> = Vec::new();
    let tol = 1e-13 * (1.0 + target.norm());
    let mut seeds = vec![Complex64::new(0.0, 0.0)];
    for &rad in &[0.3, 0.6, 0.8, 0.9, 0.95] {
        for j in 0..12 {
            seeds.push(Complex64::from_polar(rad, TAU * (j as f64 + 0.5) / 12.0));
        }
    }
    for seed in seeds {
        let mut a = seed;
        let mut converged = false;
        for _ in 0..80 {
            let Ok((fa, dfa)) = f.eval_with_derivative(a) else { break };
            let res = fa - target;
            if res.norm() <= tol {
                converged = true;
                break;
            }
            if dfa.norm() == 0.0 {
                break;
            }
            // Newton on log f - log target when both are away from 0: far better
            // behaved for exponential-type maps such as coverings
            let mut step = if target.norm() > 1e-3 && fa.norm() > 1e-3 {
                (fa / target).ln() * fa / dfa
            } else {
                res / dfa
            };
            let mut next = a - step;
            let mut tries = 0;
            while next.norm() >= 1.0 && tries < 40 {
                step *= 0.5;
                next = a - step;
                tries += 1;
            }
            if next.norm() >= 1.0 {
                break;
            }
            a = next;
        }
        if converged && !roots.iter().any(|r| (r - a).norm() < 1e-8) {
            roots.push(a);
        }
    }
    roots
}

/// `min |xi| / |(f o m)'(0)|` over the family, with each member normalized so
/// that it sends 0 to `z`: an upper bound for the Kobayashi density.
pub fn kobayashi_upper_from_family(
    domain: &Domain,
    z: Complex64,
    xi: Complex64,
    family: &CandidateFamily,
) -> Result<f64> {
    check_finite(xi, "vector")?;
    domain.require(z)?;
    let members = match family {
        CandidateFamily::AnalyticDiscs(m) if m.is_empty() => return Err(Error::EmptyFamily),
        CandidateFamily::AnalyticDiscs(m) => m,
        CandidateFamily::DiscValuedMaps(_) => {
            return Err(Error::Precondition(
                "Kobayashi bounds need a family of analytic discs".into(),
            ))
        }
    };
    let mut best: Option<f64> = None;
    let mut offer = |v: f64| {
        if v.is_finite() {
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    };
    for member in members {
        match member {
            AnalyticDisc::Inscribed { directions } => {
                let delta = domain.boundary_distance(z)?;
                offer(1.0 / delta);
                for j in 0..*directions {
                    let dir = Complex64::from_polar(1.0, TAU * j as f64 / *directions as f64);
                    for &t in &[0.25, 0.5, 1.0, 2.0, 4.0] {
                        let c = z + dir * (t * delta);
                        if !domain.contains(c) {
                            continue;
                        }
                        let rho = domain.distance_unchecked(c);
                        let s = t * delta;
                        if s < rho {
                            // disc D(c, rho) holds z at offset s from its center
                            offer(rho / (rho * rho - s * s));
                        }
                    }
                }
            }
            AnalyticDisc::Map(f) => {
                for a in disc_preimages(f, z) {
                    let Ok(df) = f.eval_derivative(a) else { continue };
                    offer(1.0 / (df.norm() * (1.0 - a.norm_sqr())));
                }
            }
            AnalyticDisc::Covering => {
                if let Domain::Annulus { r_inner } = domain {
                    offer(annulus_kobayashi_density(*r_inner, z, Complex64::new(1.0, 0.0)));
                }
            }
        }
    }
    best.map(|b| b * xi.norm()).ok_or(Error::EmptyFamily)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::c;
    use crate::holomaps::{random_disc_point, random_self_map};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one() -> Complex64 {
        c(1.0, 0.0)
    }

    #[test]
    fn poincare_examples() {
        assert_eq!(poincare_density(c(0.0, 0.0), one()).unwrap(), 1.0);
        assert_abs_diff_eq!(poincare_density(c(0.5, 0.0), one()).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        let p = c(0.3, -0.4);
        let base = poincare_density(p, one()).unwrap();
        for k in 0..16 {
            let xi = Complex64::from_polar(1.0, k as f64 * 0.4);
            assert_abs_diff_eq!(poincare_density(p, xi).unwrap(), base, epsilon = 1e-15);
        }
        assert!(poincare_density(c(1.0, 0.0), one()).is_err());
    }

    #[test]
    fn pseudohyperbolic_examples() {
        let a = c(0.3, 0.2);
        assert_eq!(pseudohyperbolic(a, a).unwrap(), 0.0);
        assert_abs_diff_eq!(pseudohyperbolic(c(0.0, 0.0), a).unwrap(), a.norm(), epsilon = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = random_disc_point(&mut rng, 0.95);
            let b = random_disc_point(&mut rng, 0.95);
            let m = MobiusTransform::new(random_disc_point(&mut rng, 0.9), rng.gen_range(0.0..TAU)).unwrap();
            let before = pseudohyperbolic(a, b).unwrap();
            let after = pseudohyperbolic(m.apply(a).unwrap(), m.apply(b).unwrap()).unwrap();
            assert_abs_diff_eq!(before, after, epsilon = 1e-12);
            assert_abs_diff_eq!(before, pseudohyperbolic(b, a).unwrap(), epsilon = 1e-15);
            assert!(before < 1.0);
        }
    }

    #[test]
    fn quasihyperbolic_examples() {
        assert_eq!(quasihyperbolic_density(&Domain::UnitDisc, c(0.0, 0.0), one()).unwrap(), 1.0);
        assert_abs_diff_eq!(
            quasihyperbolic_density(&Domain::UnitDisc, c(0.9, 0.0), one()).unwrap(),
            10.0,
            epsilon = 1e-12
        );
        let a = Domain::annulus(0.2).unwrap();
        assert_abs_diff_eq!(quasihyperbolic_density(&a, c(0.5, 0.0), one()).unwrap(), 1.0 / 0.3, epsilon = 1e-12);
    }

    #[test]
    fn kobayashi_examples() {
        let d = kobayashi_density(&Domain::UnitDisc, c(0.5, 0.0), one()).unwrap();
        assert!(d.exact);
        assert_abs_diff_eq!(d.upper, 4.0 / 3.0, epsilon = 1e-15);
        for k in 0..8 {
            let xi = Complex64::from_polar(1.0, k as f64);
            assert_abs_diff_eq!(kobayashi_density(&Domain::UnitDisc, c(0.0, 0.0), xi).unwrap().upper, 1.0, epsilon = 1e-15);
        }
        let a = Domain::annulus(0.2).unwrap();
        let left = kobayashi_density(&a, c(-0.5, 0.0), one()).unwrap();
        let right = kobayashi_density(&a, c(0.5, 0.0), one()).unwrap();
        assert!(right.exact);
        assert_abs_diff_eq!(left.upper, right.upper, epsilon = 1e-14);
        assert_eq!(kobayashi_density(&a, c(0.5, 0.0), c(0.0, 0.0)).unwrap(), DensityBound::exact(0.0));
    }

    #[test]
    fn halfplane_matches_disc_through_cayley() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..3.0));
            let xi = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let h = kobayashi_density(&Domain::UpperHalfPlane, z, xi).unwrap().upper;
            let w = cayley(z).unwrap();
            let d = poincare_density(w, cayley_derivative(z).unwrap() * xi).unwrap();
            assert_abs_diff_eq!(h, d, epsilon = 1e-12 * d.max(1.0));
        }
    }

    /// Oracle: push the strip metric down by a numerical logarithm.
    #[test]
    fn annulus_formula_matches_strip_pushdown() {
        let r: f64 = 0.2;
        let h = -r.ln();
        for k in 0..40 {
            let z = Complex64::from_polar(0.21 + 0.78 * k as f64 / 40.0, k as f64);
            let xi = Complex64::from_polar(1.0, 0.3 * k as f64);
            let w = z.ln();
            // strip {log r < Re w < 0} mapped to the upper half-plane
            let t = (I * PI * (w - r.ln()) / h).exp();
            let dt = t * I * PI / h / z;
            let expected = (dt * xi).norm() / (2.0 * t.im);
            assert_abs_diff_eq!(annulus_kobayashi_density(r, z, xi), expected, epsilon = 1e-10 * expected);
        }
        let center = annulus_kobayashi_density(r, c(r.sqrt(), 0.0), one());
        assert_abs_diff_eq!(center, PI / (2.0 * h * r.sqrt()), epsilon = 1e-12);
    }

    #[test]
    fn annulus_formula_matches_covering_search() {
        let a = Domain::annulus(0.2).unwrap();
        let family = CandidateFamily::AnalyticDiscs(vec![AnalyticDisc::Map(HolomorphicMap::annulus_covering(0.2).unwrap())]);
        for k in 0..8 {
            let z = Complex64::from_polar(0.25 + 0.09 * k as f64, 0.8 * k as f64);
            let search = kobayashi_upper_from_family(&a, z, one(), &family).unwrap();
            let exact = kobayashi_density(&a, z, one()).unwrap().upper;
            assert_abs_diff_eq!(search, exact, epsilon = 1e-8 * exact);
        }
    }

    #[test]
    fn caratheodory_examples() {
        let fam = CandidateFamily::disc_valued_for(&Domain::UnitDisc);
        let d = caratheodory_density(&Domain::UnitDisc, c(0.5, 0.0), one(), &fam).unwrap();
        assert!(d.exact);
        assert_abs_diff_eq!(d.lower, 4.0 / 3.0, epsilon = 1e-15);
        let coord = CandidateFamily::DiscValuedMaps(vec![DiscValuedMap::ScaledCoordinate]);
        let low = caratheodory_lower_from_family(&Domain::UnitDisc, c(0.0, 0.0), one(), &coord).unwrap();
        assert_abs_diff_eq!(low, 1.0, epsilon = 1e-15);
        let a = Domain::annulus(0.2).unwrap();
        let fam = CandidateFamily::disc_valued_for(&a);
        let lower = caratheodory_lower_from_family(&a, c(0.5, 0.0), one(), &fam).unwrap();
        let k = kobayashi_density(&a, c(0.5, 0.0), one()).unwrap().upper;
        assert!(lower > 0.0 && lower <= k);
        assert!(matches!(
            caratheodory_density(&a, c(0.5, 0.0), one(), &CandidateFamily::DiscValuedMaps(vec![])),
            Err(Error::EmptyFamily)
        ));
    }

    #[test]
    fn scaled_coordinate_lower_bound_is_universal() {
        let e = Domain::ellipse(2.0, 1.0, 512).unwrap();
        let coord = CandidateFamily::DiscValuedMaps(vec![DiscValuedMap::ScaledCoordinate]);
        for z in [c(0.0, 0.0), c(1.0, 0.3), c(-1.5, -0.2)] {
            let low = caratheodory_lower_from_family(&e, z, one(), &coord).unwrap();
            let m = e.circumradius_about(z);
            assert!(low >= 1.0 / (2.0 * m));
        }
    }

    #[test]
    fn schwarz_pick_gap_examples() {
        let m = HolomorphicMap::mobius(MobiusTransform::new(c(0.3, -0.5), 1.1).unwrap());
        assert_abs_diff_eq!(schwarz_pick_gap(&m, c(0.2, 0.4)).unwrap(), 0.0, epsilon = 1e-12);
        let sq = HolomorphicMap::polynomial(vec![c(0.0, 0.0), c(0.0, 0.0), one()]);
        assert_abs_diff_eq!(schwarz_pick_gap(&sq, c(0.5, 0.0)).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(schwarz_pick_gap(&sq, c(0.0, 0.0)).unwrap(), 1.0, epsilon = 1e-15);
        let big = HolomorphicMap::affine(c(2.0, 0.0), c(0.0, 0.0));
        assert!(matches!(schwarz_pick_gap(&big, c(0.0, 0.0)), Err(Error::NotSelfMap(_))));
    }

    #[test]
    fn majorization_on_all_domains() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let domains = [
            Domain::UnitDisc,
            Domain::UpperHalfPlane,
            Domain::annulus(0.2).unwrap(),
            Domain::ellipse(2.0, 1.0, 512).unwrap(),
        ];
        for d in &domains {
            let mut n = 0;
            while n < 100 {
                let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.5));
                if !d.contains(z) {
                    continue;
                }
                let xi = Complex64::from_polar(rng.gen_range(0.1..2.0), rng.gen_range(0.0..TAU));
                let fam = CandidateFamily::disc_valued_for(d);
                let carat = caratheodory_density(d, z, xi, &fam).unwrap();
                let kob = kobayashi_density(d, z, xi).unwrap();
                assert!(carat.lower <= kob.upper + 1e-9);
                if matches!(d, Domain::UnitDisc | Domain::UpperHalfPlane) {
                    assert_abs_diff_eq!(carat.lower, kob.upper, epsilon = 1e-12 * kob.upper);
                }
                n += 1;
            }
        }
    }

    #[test]
    fn subdisc_density_dominates() {
        let s = 0.6;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let z = random_disc_point(&mut rng, 0.59);
            let sub = s / (s * s - z.norm_sqr());
            // scaling oracle: w -> w/s maps D(0, s) onto D
            let via_scaling = poincare_density(z / s, one() / s).unwrap();
            assert_abs_diff_eq!(sub, via_scaling, epsilon = 1e-12 * sub);
            assert!(sub >= poincare_density(z, one()).unwrap());
        }
    }

    #[test]
    fn mobius_isometry_and_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..500 {
            let z = random_disc_point(&mut rng, 0.95);
            let xi = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
            let m = MobiusTransform::new(random_disc_point(&mut rng, 0.9), rng.gen_range(0.0..TAU)).unwrap();
            let before = poincare_density(z, xi).unwrap();
            let after = poincare_density(m.apply(z).unwrap(), m.derivative(z).unwrap() * xi).unwrap();
            assert_abs_diff_eq!(before, after, epsilon = 1e-12 * before.max(1.0));
            let k = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let scaled = kobayashi_density(&Domain::UnitDisc, z, k * xi).unwrap();
            assert_abs_diff_eq!(scaled.upper, k.norm() * before, epsilon = 1e-12 * scaled.upper.max(1.0));
        }
        let e = Domain::ellipse(2.0, 1.0, 512).unwrap();
        let b1 = kobayashi_density(&e, c(1.2, 0.3), one()).unwrap();
        let b3 = kobayashi_density(&e, c(1.2, 0.3), c(0.0, 3.0)).unwrap();
        assert_eq!(b3.lower, 3.0 * b1.lower);
        assert_eq!(b3.upper, 3.0 * b1.upper);
    }

    #[test]
    fn self_maps_decrease_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..500 {
            let f = random_self_map(&mut rng);
            let z = random_disc_point(&mut rng, 0.95);
            let xi = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
            let (fz, dfz) = f.eval_with_derivative(z).unwrap();
            assert!(poincare_density(fz, dfz * xi).unwrap() <= poincare_density(z, xi).unwrap() + 1e-12);
        }
    }

    #[test]
    fn ellipse_bracket_near_boundary() {
        let e = Domain::ellipse(2.0, 1.0, 1024).unwrap();
        let (cl, cu) = boundary_bracket_constants(&e).unwrap();
        for p in e.boundary_samples(50) {
            let inward = e.normals(p).unwrap().inward;
            for delta in [0.09, 0.03, 0.01, 0.001] {
                let z = p + inward * delta;
                let b = kobayashi_density(&e, z, one()).unwrap();
                let d = e.boundary_distance(z).unwrap();
                assert!(b.lower <= b.upper);
                assert!(b.lower * d >= cl - 1e-9, "{} at {z}", b.lower * d);
                assert!(b.upper * d <= cu + 1e-9);
            }
        }
    }

    #[test]
    fn inscribed_family_upper_bound() {
        let e = Domain::ellipse(2.0, 1.0, 512).unwrap();
        let fam = CandidateFamily::analytic_discs_for(&e);
        for z in [c(0.0, 0.0), c(1.7, 0.1), c(-0.4, 0.8)] {
            let up = kobayashi_upper_from_family(&e, z, one(), &fam).unwrap();
            let b = kobayashi_density(&e, z, one()).unwrap();
            assert!(up <= 1.0 / e.boundary_distance(z).unwrap() + 1e-12);
            assert!(up >= b.lower);
        }
    }

    #[test]
    fn mobius_disc_family_is_exact() {
        let fam = CandidateFamily::mobius_discs(6);
        for z in [c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.9)] {
            let up = kobayashi_upper_from_family(&Domain::UnitDisc, z, one(), &fam).unwrap();
            assert_abs_diff_eq!(up, 1.0 / (1.0 - z.norm_sqr()), epsilon = 1e-9);
        }
    }
}
