//! Planar domains: membership, boundary distance, nearest boundary points,
//! normals and osculating radii.

mod smooth;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{is_finite, I};
use crate::error::{fmt_point, Error, Result};

pub use smooth::{BoundaryHit, SmoothDomain, MIN_SAMPLES};

/// Boundary membership tolerance.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Points closer than this to the boundary are not interior.
pub const INTERIOR_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DomainSpec", into = "DomainSpec")]
pub enum Domain {
    UnitDisc,
    UpperHalfPlane,
    /// `{r_inner < |z| < 1}`.
    Annulus { r_inner: f64 },
    Smooth(Arc<SmoothDomain>),
}

/// JSON form of a domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<[f64; 2]>,
    /// Semi-axes of an `ellipse`, read only.
    #[serde(default, skip_serializing)]
    pub axes: Option<[f64; 2]>,
}

impl TryFrom<DomainSpec> for Domain {
    type Error = Error;

    fn try_from(spec: DomainSpec) -> Result<Self> {
        match spec.kind.as_str() {
            "disc" => Ok(Domain::UnitDisc),
            "halfplane" => Ok(Domain::UpperHalfPlane),
            "annulus" => {
                let r = spec
                    .r_inner
                    .ok_or_else(|| Error::InvalidDomain("annulus needs r_inner".into()))?;
                Domain::annulus(r)
            }
            "smooth" => {
                let boundary = spec
                    .boundary
                    .ok_or_else(|| Error::InvalidDomain("smooth domain needs boundary".into()))?;
                let base = spec
                    .basepoint
                    .ok_or_else(|| Error::InvalidDomain("smooth domain needs basepoint".into()))?;
                let points = boundary
                    .iter()
                    .map(|[x, y]| Complex64::new(*x, *y))
                    .collect();
                let d = SmoothDomain::new(points, Complex64::new(base[0], base[1]))?;
                Ok(Domain::Smooth(Arc::new(d)))
            }
            "ellipse" => {
                let [a, b] = spec
                    .axes
                    .ok_or_else(|| Error::InvalidDomain("ellipse needs axes".into()))?;
                Domain::ellipse(a, b, 1024)
            }
            other => Err(Error::InvalidDomain(format!("unknown domain type {other:?}"))),
        }
    }
}

impl From<Domain> for DomainSpec {
    fn from(d: Domain) -> Self {
        let mut spec = DomainSpec {
            kind: d.name().to_string(),
            r_inner: None,
            boundary: None,
            basepoint: None,
            axes: None,
        };
        match d {
            Domain::Annulus { r_inner } => spec.r_inner = Some(r_inner),
            Domain::Smooth(s) => {
                spec.boundary = Some(s.samples().iter().map(|p| [p.re, p.im]).collect());
                spec.basepoint = Some([s.basepoint().re, s.basepoint().im]);
            }
            _ => {}
        }
        spec
    }
}

/// Parameters of the boundary approach regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproachRegionParams {
    pub alpha: f64,
    pub beta: f64,
    pub r0: f64,
}

impl ApproachRegionParams {
    pub fn new(alpha: f64, beta: f64, r0: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::Precondition(format!("alpha must exceed 1, got {alpha}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Precondition(format!("beta must be positive, got {beta}")));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::Precondition(format!("r0 must be positive, got {r0}")));
        }
        Ok(ApproachRegionParams { alpha, beta, r0 })
    }
}

/// Outward and inward unit normals at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normals {
    pub outward: Complex64,
    pub inward: Complex64,
}

/// Interior radius `r` and exterior radius `R`; `R` is infinite for the disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OsculatingRadii {
    pub r: f64,
    pub big_r: f64,
}

impl Domain {
    pub fn annulus(r_inner: f64) -> Result<Self> {
        if !(r_inner > 0.0 && r_inner < 1.0) {
            return Err(Error::InvalidDomain(format!(
                "annulus inner radius must lie in (0, 1), got {r_inner}"
            )));
        }
        Ok(Domain::Annulus { r_inner })
    }

    pub fn smooth(d: SmoothDomain) -> Self {
        Domain::Smooth(Arc::new(d))
    }

    pub fn ellipse(a: f64, b: f64, n: usize) -> Result<Self> {
        Ok(Domain::smooth(SmoothDomain::ellipse(a, b, n)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::UnitDisc => "disc",
            Domain::UpperHalfPlane => "halfplane",
            Domain::Annulus { .. } => "annulus",
            Domain::Smooth(_) => "smooth",
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Domain::UpperHalfPlane)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        if !is_finite(z) {
            return false;
        }
        match self {
            Domain::UnitDisc => z.norm() < 1.0 - INTERIOR_MARGIN,
            Domain::UpperHalfPlane => z.im > INTERIOR_MARGIN,
            Domain::Annulus { r_inner } => {
                let m = z.norm();
                m > r_inner + INTERIOR_MARGIN && m < 1.0 - INTERIOR_MARGIN
            }
            Domain::Smooth(s) => s.contains(z),
        }
    }

    pub(crate) fn require(&self, z: Complex64) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(Error::outside(z))
        }
    }

    /// Euclidean distance to the boundary, `delta(z)`.
    pub fn boundary_distance(&self, z: Complex64) -> Result<f64> {
        self.require(z)?;
        Ok(self.distance_unchecked(z))
    }

    pub(crate) fn distance_unchecked(&self, z: Complex64) -> f64 {
        match self {
            Domain::UnitDisc => 1.0 - z.norm(),
            Domain::UpperHalfPlane => z.im,
            Domain::Annulus { r_inner } => (1.0 - z.norm()).min(z.norm() - r_inner),
            Domain::Smooth(s) => s.nearest(z).distance,
        }
    }

    /// Distance to the boundary, positive inside and negative outside.
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        match self {
            Domain::UnitDisc => 1.0 - z.norm(),
            Domain::UpperHalfPlane => z.im,
            Domain::Annulus { r_inner } => (1.0 - z.norm()).min(z.norm() - r_inner),
            Domain::Smooth(s) => s.signed_distance(z),
        }
    }

    /// Nearest boundary point together with the inward normal there. Does not
    /// check uniqueness.
    pub fn boundary_hit(&self, z: Complex64) -> BoundaryHit {
        let radial = |target: f64, toward: f64| {
            let u = if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) };
            BoundaryHit {
                point: u * target,
                distance: (z.norm() - target).abs(),
                tangent: I * u * toward,
                param: 0.0,
            }
        };
        match self {
            Domain::UnitDisc => radial(1.0, 1.0),
            Domain::UpperHalfPlane => BoundaryHit {
                point: Complex64::new(z.re, 0.0),
                distance: z.im.abs(),
                tangent: Complex64::new(1.0, 0.0),
                param: 0.0,
            },
            Domain::Annulus { r_inner } => {
                if 1.0 - z.norm() <= z.norm() - r_inner {
                    radial(1.0, 1.0)
                } else {
                    // inner circle is traversed clockwise
                    radial(*r_inner, -1.0)
                }
            }
            Domain::Smooth(s) => s.nearest(z),
        }
    }

    /// The unique nearest boundary point `pi(z)`.
    pub fn nearest_boundary_point(&self, z: Complex64) -> Result<Complex64> {
        self.nearest_hit(z).map(|h| h.point)
    }

    pub fn nearest_hit(&self, z: Complex64) -> Result<BoundaryHit> {
        self.require(z)?;
        match self {
            Domain::UnitDisc => {
                if z.norm() <= BOUNDARY_TOL {
                    return Err(Error::Ambiguous(fmt_point(z)));
                }
            }
            Domain::Annulus { r_inner } => {
                if ((1.0 - z.norm()) - (z.norm() - r_inner)).abs() <= BOUNDARY_TOL {
                    return Err(Error::Ambiguous(fmt_point(z)));
                }
            }
            Domain::Smooth(s) => return s.nearest_unique(z, BOUNDARY_TOL),
            Domain::UpperHalfPlane => {}
        }
        Ok(self.boundary_hit(z))
    }

    pub fn normals(&self, p: Complex64) -> Result<Normals> {
        let off = || Error::OffBoundary(fmt_point(p));
        if !is_finite(p) {
            return Err(off());
        }
        let outward = match self {
            Domain::UnitDisc => {
                if (p.norm() - 1.0).abs() > BOUNDARY_TOL {
                    return Err(off());
                }
                p / p.norm()
            }
            Domain::UpperHalfPlane => {
                if p.im.abs() > BOUNDARY_TOL {
                    return Err(off());
                }
                -I
            }
            Domain::Annulus { r_inner } => {
                let m = p.norm();
                if (m - 1.0).abs() <= BOUNDARY_TOL {
                    p / m
                } else if (m - r_inner).abs() <= BOUNDARY_TOL {
                    -p / m
                } else {
                    return Err(off());
                }
            }
            Domain::Smooth(s) => {
                let hit = s.nearest(p);
                if hit.distance > BOUNDARY_TOL {
                    return Err(off());
                }
                -hit.inward()
            }
        };
        Ok(Normals {
            outward,
            inward: -outward,
        })
    }

    pub fn osculating_radii(&self) -> Result<OsculatingRadii> {
        match self {
            Domain::UnitDisc => Ok(OsculatingRadii {
                r: 1.0,
                big_r: f64::INFINITY,
            }),
            Domain::UpperHalfPlane => Err(Error::Precondition(
                "osculating radii need a bounded domain".into(),
            )),
            Domain::Annulus { r_inner } => Ok(OsculatingRadii {
                r: r_inner.min((1.0 - r_inner) / 2.0),
                big_r: *r_inner,
            }),
            Domain::Smooth(s) => Ok(OsculatingRadii {
                r: s.interior_radius(),
                big_r: s.exterior_radius(),
            }),
        }
    }

    /// Membership in the nontangential region `|z - p| < alpha delta(z)`.
    pub fn in_nontangential_region(&self, p: Complex64, alpha: f64, z: Complex64) -> Result<bool> {
        if !(alpha > 1.0) {
            return Err(Error::Precondition(format!("alpha must exceed 1, got {alpha}")));
        }
        self.normals(p)?;
        let delta = self.boundary_distance(z)?;
        Ok((z - p).norm() < alpha * delta)
    }

    /// Upper bound for `sup |w - c|` over the closed domain.
    pub fn circumradius_about(&self, c: Complex64) -> f64 {
        match self {
            Domain::UnitDisc | Domain::Annulus { .. } => c.norm() + 1.0,
            Domain::UpperHalfPlane => f64::INFINITY,
            Domain::Smooth(s) => s.circumradius_about(c),
        }
    }

    /// A point comfortably inside, used as a reference center.
    pub fn center(&self) -> Complex64 {
        match self {
            Domain::UnitDisc => Complex64::new(0.0, 0.0),
            Domain::UpperHalfPlane => I,
            Domain::Annulus { r_inner } => Complex64::new((1.0 + r_inner) / 2.0, 0.0),
            Domain::Smooth(s) => s.basepoint(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::UnitDisc | Domain::Annulus { .. } => 2.0,
            Domain::UpperHalfPlane => f64::INFINITY,
            Domain::Smooth(s) => s.diameter(),
        }
    }

    /// Axis-aligned bounding box `(min, max)` of a bounded domain.
    pub fn bounding_box(&self) -> Option<(Complex64, Complex64)> {
        match self {
            Domain::UnitDisc | Domain::Annulus { .. } => {
                Some((Complex64::new(-1.0, -1.0), Complex64::new(1.0, 1.0)))
            }
            Domain::UpperHalfPlane => None,
            Domain::Smooth(s) => {
                let pts = s.samples();
                let mut lo = pts[0];
                let mut hi = pts[0];
                for p in pts {
                    lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
                    hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
                }
                Some((lo, hi))
            }
        }
    }

    /// `n` points on the boundary (both circles for the annulus).
    pub fn boundary_samples(&self, n: usize) -> Vec<Complex64> {
        let circle = |r: f64, m: usize| {
            (0..m)
                .map(move |k| Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / m as f64))
        };
        match self {
            Domain::UnitDisc => circle(1.0, n).collect(),
            Domain::UpperHalfPlane => (0..n)
                .map(|k| Complex64::new(-5.0 + 10.0 * k as f64 / n as f64, 0.0))
                .collect(),
            Domain::Annulus { r_inner } => circle(1.0, n - n / 2).chain(circle(*r_inner, n / 2)).collect(),
            Domain::Smooth(s) => {
                let m = s.samples().len() as f64;
                (0..n).map(|k| s.point_at(m * k as f64 / n as f64)).collect()
            }
        }
    }
}
