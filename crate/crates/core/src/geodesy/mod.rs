//! Curve lengths, integrated distances and geodesic witnesses.

mod curve;
mod grid;
mod refine;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{cayley, cayley_inverse, cayley_inverse_derivative, MobiusTransform};
use crate::densities::{
    concrete_maps, density, density_upper, pseudohyperbolic, CandidateFamily, DiscValuedMap,
    MetricKind,
};
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, DEFAULT_TOL, MAX_DEPTH};

pub use curve::{Curve, Segment};
pub(crate) use grid::{Field, Grid};
pub(crate) use refine::Refiner;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMethod {
    ClosedForm,
    GridRefine,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceResult {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub path: Curve,
    pub method: DistanceMethod,
    /// Dijkstra length on the graded grid, before refinement.
    pub raw_grid: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct DistanceOptions {
    /// Refinement stops once a sweep improves the length by less than this.
    pub tol: f64,
    /// Use the grid even where a closed form exists.
    pub force_grid: bool,
    pub refine: bool,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            tol: 1e-6,
            force_grid: false,
            refine: true,
        }
    }
}

/// Lengths of a curve under the lower and upper densities of a bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthBounds {
    pub lower: f64,
    pub upper: f64,
}

fn integrate_curve<F>(domain: &Domain, curve: &Curve, mut integrand: F) -> Result<f64>
where
    F: FnMut(Complex64, Complex64) -> Result<f64>,
{
    let pieces: usize = curve.segments.iter().map(|s| s.pieces()).sum();
    let tol = DEFAULT_TOL / pieces as f64;
    let mut total = 0.0;
    for seg in &curve.segments {
        for k in 0..seg.pieces() {
            let (a, b) = seg.piece_range(k);
            total += adaptive_simpson(
                |s| {
                    let (p, v) = seg.eval(s);
                    if !domain.contains(p) {
                        return Err(Error::CurveExitsDomain(crate::error::fmt_point(p)));
                    }
                    if v.norm() == 0.0 {
                        return Ok(0.0);
                    }
                    integrand(p, v)
                },
                a,
                b,
                tol,
                MAX_DEPTH,
            )?;
        }
    }
    Ok(total)
}

/// Length of `curve` under `metric`; for bracketed densities this integrates the
/// upper density, see [`curve_length_bounds`].
pub fn curve_length(domain: &Domain, metric: MetricKind, curve: &Curve) -> Result<f64> {
    integrate_curve(domain, curve, |p, v| density_upper(domain, metric, p, v))
}

/// Lengths under the lower and the upper density.
pub fn curve_length_bounds(domain: &Domain, metric: MetricKind, curve: &Curve) -> Result<LengthBounds> {
    let upper = curve_length(domain, metric, curve)?;
    let lower = integrate_curve(domain, curve, |p, v| Ok(density(domain, metric, p, v)?.lower))?;
    Ok(LengthBounds { lower, upper })
}

/// `atanh` of the pseudohyperbolic distance: the integrated disc metric.
pub fn disc_distance(z: Complex64, w: Complex64) -> Result<f64> {
    Ok(pseudohyperbolic(z, w)?.atanh())
}

pub(crate) fn closed_form_available(domain: &Domain, metric: MetricKind) -> bool {
    matches!(domain, Domain::UnitDisc | Domain::UpperHalfPlane) && metric != MetricKind::Quasihyperbolic
}

/// Closed-form distance value on the disc and half-plane, without a witness.
pub(crate) fn closed_form_value(domain: &Domain, z: Complex64, w: Complex64) -> Result<f64> {
    match domain {
        Domain::UnitDisc => disc_distance(z, w),
        Domain::UpperHalfPlane => disc_distance(cayley(z)?, cayley(w)?),
        _ => Err(Error::Precondition(format!("no closed form on {}", domain.name()))),
    }
}

/// Disc geodesic: the image of a radial segment under the automorphism taking
/// `z` to 0.
fn disc_geodesic(z: Complex64, w: Complex64) -> Result<Curve> {
    let m = MobiusTransform::phi(z)?;
    let target = m.apply(w)?;
    let back = m.inverse();
    let mut failure = None;
    let curve = Curve::sampled(65, |t| {
        let q = target * t;
        match (back.apply(q), back.derivative(q)) {
            (Ok(p), Ok(d)) => (p, d * target),
            (Err(e), _) | (_, Err(e)) => {
                failure = Some(e);
                (z, Complex64::new(0.0, 0.0))
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => {
            let mut curve = curve;
            let seg = &mut curve.segments[0];
            seg.points[0] = z;
            *seg.points.last_mut().unwrap() = w;
            Ok(curve)
        }
    }
}

fn closed_form(domain: &Domain, z: Complex64, w: Complex64) -> Result<DistanceResult> {
    let (value, path) = match domain {
        Domain::UnitDisc => (disc_distance(z, w)?, disc_geodesic(z, w)?),
        Domain::UpperHalfPlane => {
            let (cz, cw) = (cayley(z)?, cayley(w)?);
            let disc_path = disc_geodesic(cz, cw)?;
            let seg = &disc_path.segments[0];
            let mut points = Vec::with_capacity(seg.points.len());
            let mut velocities = Vec::with_capacity(seg.points.len());
            for (p, v) in seg.points.iter().zip(&seg.velocities) {
                points.push(cayley_inverse(*p)?);
                velocities.push(cayley_inverse_derivative(*p)? * v);
            }
            points[0] = z;
            *points.last_mut().unwrap() = w;
            (
                disc_distance(cz, cw)?,
                Curve::new(vec![Segment::new(seg.t.clone(), points, velocities)?])?,
            )
        }
        _ => unreachable!("closed forms exist on the disc and half-plane only"),
    };
    Ok(DistanceResult {
        value,
        lower: value,
        upper: value,
        path,
        method: DistanceMethod::ClosedForm,
        raw_grid: None,
    })
}

fn check_metric(domain: &Domain, metric: MetricKind) -> Result<()> {
    if metric == MetricKind::Poincare && !matches!(domain, Domain::UnitDisc | Domain::UpperHalfPlane) {
        return Err(Error::MetricUnavailable {
            metric: metric.name().into(),
            domain: domain.name().into(),
        });
    }
    Ok(())
}

/// Box used for grids: the domain's bounding box, or a window around the
/// endpoints on the half-plane.
pub(crate) fn grid_window(domain: &Domain, anchors: &[Complex64]) -> (Complex64, Complex64) {
    match domain.bounding_box() {
        Some((lo, hi)) => {
            let pad = 0.01 * (hi - lo).norm();
            (lo - Complex64::new(pad, pad), hi + Complex64::new(pad, pad))
        }
        None => {
            let mut lo = anchors[0];
            let mut hi = anchors[0];
            for a in anchors {
                lo = Complex64::new(lo.re.min(a.re), lo.im.min(a.im));
                hi = Complex64::new(hi.re.max(a.re), hi.im.max(a.im));
            }
            let spread = (hi - lo).norm() + hi.im;
            (
                Complex64::new(lo.re - spread, -0.01 * spread),
                Complex64::new(hi.re + spread, hi.im + spread),
            )
        }
    }
}

/// Smallest node distance kept by the grid for a query between points at
/// boundary distances `deltas`.
pub(crate) fn grid_floor(window: (Complex64, Complex64), deltas: &[f64]) -> f64 {
    let diameter = (window.1 - window.0).norm();
    let nearest = deltas.iter().cloned().fold(f64::INFINITY, f64::min);
    (1e-3 * diameter).max(nearest / 4.0)
}

/// Gehring–Palka lower bound for the quasihyperbolic distance.
fn quasihyperbolic_lower(domain: &Domain, z: Complex64, w: Complex64) -> Result<f64> {
    let d = domain.boundary_distance(z)?.min(domain.boundary_distance(w)?);
    Ok((1.0 + (z - w).norm() / d).ln())
}

pub fn distance(domain: &Domain, metric: MetricKind, z: Complex64, w: Complex64) -> Result<DistanceResult> {
    distance_with(domain, metric, z, w, DistanceOptions::default())
}

pub fn distance_with(
    domain: &Domain,
    metric: MetricKind,
    z: Complex64,
    w: Complex64,
    opts: DistanceOptions,
) -> Result<DistanceResult> {
    check_metric(domain, metric)?;
    domain.require(z)?;
    domain.require(w)?;
    // solve in a canonical order so that the result is symmetric
    if (w.re, w.im) < (z.re, z.im) {
        let mut r = distance_with(domain, metric, w, z, opts)?;
        r.path = r.path.reversed();
        return Ok(r);
    }
    if z == w {
        return Ok(DistanceResult {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            path: Curve::point(z),
            method: if closed_form_available(domain, metric) {
                DistanceMethod::ClosedForm
            } else {
                DistanceMethod::GridRefine
            },
            raw_grid: None,
        });
    }
    if closed_form_available(domain, metric) && !opts.force_grid {
        return closed_form(domain, z, w);
    }

    let window = grid_window(domain, &[z, w]);
    let floor = grid_floor(
        window,
        &[domain.boundary_distance(z)?, domain.boundary_distance(w)?],
    );
    let grid = Grid::build(domain, metric, floor, window)?;
    let (raw, chain) = grid.shortest_path(z, w)?;
    let mut path = chain.clone();
    let mut upper = curve_length(domain, metric, &Curve::polyline(&chain))?;
    if opts.refine {
        let refined = Refiner::new(domain, metric).refine(&chain, opts.tol);
        let len = curve_length(domain, metric, &Curve::polyline(&refined))?;
        if len < upper {
            upper = len;
            path = refined;
        }
    }
    let lower = match metric {
        MetricKind::Quasihyperbolic => quasihyperbolic_lower(domain, z, w)?,
        _ => caratheodory_distance_lower(domain, z, w, &CandidateFamily::disc_valued_for(domain))?,
    }
    .min(upper);
    Ok(DistanceResult {
        value: upper,
        lower,
        upper,
        path: Curve::polyline(&path),
        method: DistanceMethod::GridRefine,
        raw_grid: Some(raw),
    })
}

/// The witness path of [`distance`].
pub fn geodesic_witness(domain: &Domain, metric: MetricKind, z: Complex64, w: Complex64) -> Result<Curve> {
    Ok(distance(domain, metric, z, w)?.path)
}

/// `max_f d_P(f(z), f(w))` over a disc-valued family.
pub fn caratheodory_distance_lower(
    domain: &Domain,
    z: Complex64,
    w: Complex64,
    family: &CandidateFamily,
) -> Result<f64> {
    domain.require(z)?;
    domain.require(w)?;
    let members: &[DiscValuedMap] = match family {
        CandidateFamily::DiscValuedMaps(m) if !m.is_empty() => m,
        CandidateFamily::DiscValuedMaps(_) => return Err(Error::EmptyFamily),
        CandidateFamily::AnalyticDiscs(_) => {
            return Err(Error::Precondition(
                "Carathéodory distances need a disc-valued family".into(),
            ))
        }
    };
    if z == w {
        return Ok(0.0);
    }
    let mut best: Option<f64> = None;
    for f in concrete_maps(domain, members, &[z, w]) {
        let (Ok((fz, _)), Ok((fw, _))) = (f.eval(z), f.eval(w)) else {
            continue;
        };
        if let Ok(d) = disc_distance(fz, fw) {
            best = Some(best.map_or(d, |b: f64| b.max(d)));
        }
    }
    best.ok_or(Error::EmptyFamily)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub epsilon: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Lengths of the segments from `z0` to `z0 + (1 - eps)(target - z0)`.
pub fn completeness_probe(
    domain: &Domain,
    metric: MetricKind,
    z0: Complex64,
    boundary_target: Complex64,
    epsilons: &[f64],
) -> Result<Vec<ProbeRow>> {
    check_metric(domain, metric)?;
    domain.require(z0)?;
    domain.normals(boundary_target)?;
    epsilons
        .iter()
        .map(|&eps| {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(Error::Precondition(format!("epsilon must lie in (0, 1], got {eps}")));
            }
            let end = z0 + (boundary_target - z0) * (1.0 - eps);
            let curve = Curve::line(z0, end);
            let b = curve_length_bounds(domain, metric, &curve)?;
            Ok(ProbeRow {
                epsilon: eps,
                lower: b.lower,
                upper: b.upper,
            })
        })
        .collect()
}

/// A grid distance field from a set of source points.
pub(crate) struct MetricField<'a> {
    grid: Grid<'a>,
    field: Field,
}

impl<'a> MetricField<'a> {
    pub fn new(domain: &'a Domain, metric: MetricKind, sources: &[Complex64], floor: f64) -> Result<Self> {
        check_metric(domain, metric)?;
        let window = grid_window(domain, sources);
        let grid = Grid::build(domain, metric, floor, window)?;
        let seeds = grid.seeds(sources)?;
        let field = grid.dijkstra(&seeds);
        Ok(MetricField { grid, field })
    }

    pub fn value(&self, z: Complex64) -> Result<f64> {
        self.grid.field_value(&self.field, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::c;
    use approx::assert_abs_diff_eq;

    #[test]
    fn radial_lengths() {
        let d = Domain::UnitDisc;
        let l = curve_length(&d, MetricKind::Poincare, &Curve::line(c(0.0, 0.0), c(0.5, 0.0))).unwrap();
        assert_abs_diff_eq!(l, 0.549_306_144_3, epsilon = 1e-9);
        let l = curve_length(&d, MetricKind::Poincare, &Curve::line(c(0.0, 0.0), c(0.9, 0.0))).unwrap();
        assert_abs_diff_eq!(l, 1.472_219_489_6, epsilon = 1e-9);
        assert_eq!(curve_length(&d, MetricKind::Kobayashi, &Curve::point(c(0.3, 0.1))).unwrap(), 0.0);
        assert!(matches!(
            curve_length(&d, MetricKind::Poincare, &Curve::line(c(0.0, 0.0), c(1.5, 0.0))),
            Err(Error::CurveExitsDomain(_))
        ));
    }

    #[test]
    fn disc_distance_examples() {
        let d = Domain::UnitDisc;
        let r = distance(&d, MetricKind::Kobayashi, c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(r.value, 0.549_306_144_3, epsilon = 1e-10);
        assert_eq!(r.method, DistanceMethod::ClosedForm);
        assert_eq!(distance(&d, MetricKind::Kobayashi, c(0.2, 0.1), c(0.2, 0.1)).unwrap().value, 0.0);
        let rho: f64 = 0.6 / 1.09;
        let r = distance(&d, MetricKind::Kobayashi, c(0.3, 0.0), c(-0.3, 0.0)).unwrap();
        assert_abs_diff_eq!(r.value, 0.5 * ((1.0 + rho) / (1.0 - rho)).ln(), epsilon = 1e-12);
        // the closed-form witness has the closed-form length
        let l = curve_length(&d, MetricKind::Kobayashi, &r.path).unwrap();
        assert_abs_diff_eq!(l, r.value, epsilon = 1e-8);
    }

    #[test]
    fn halfplane_distance_matches_formula() {
        let h = Domain::UpperHalfPlane;
        let (z, w) = (c(0.0, 1.0), c(0.0, 3.0));
        let r = distance(&h, MetricKind::Kobayashi, z, w).unwrap();
        // with density 1/(2y), vertical distance is log(y2/y1)/2
        assert_abs_diff_eq!(r.value, 0.5 * 3f64.ln(), epsilon = 1e-12);
        let l = curve_length(&h, MetricKind::Kobayashi, &r.path).unwrap();
        assert_abs_diff_eq!(l, r.value, epsilon = 1e-8);
    }

    #[test]
    fn witness_examples() {
        let d = Domain::UnitDisc;
        let wit = geodesic_witness(&d, MetricKind::Kobayashi, c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!(wit.hausdorff_to(&Curve::line(c(0.0, 0.0), c(0.5, 0.0)), 64) < 1e-12);
        assert!(geodesic_witness(&d, MetricKind::Kobayashi, c(0.4, 0.0), c(0.4, 0.0)).unwrap().is_degenerate());
    }

    #[test]
    fn caratheodory_lower_examples() {
        let d = Domain::UnitDisc;
        let fam = CandidateFamily::DiscValuedMaps(vec![DiscValuedMap::Identity]);
        let (z, w) = (c(0.1, 0.2), c(-0.5, 0.4));
        assert_abs_diff_eq!(
            caratheodory_distance_lower(&d, z, w, &fam).unwrap(),
            disc_distance(z, w).unwrap(),
            epsilon = 1e-15
        );
        assert_eq!(caratheodory_distance_lower(&d, z, z, &fam).unwrap(), 0.0);
        assert!(matches!(
            caratheodory_distance_lower(&d, z, w, &CandidateFamily::DiscValuedMaps(vec![])),
            Err(Error::EmptyFamily)
        ));
    }

    #[test]
    fn probe_examples() {
        let rows = completeness_probe(&Domain::UnitDisc, MetricKind::Kobayashi, c(0.0, 0.0), c(1.0, 0.0), &[1.0, 1e-6]).unwrap();
        assert_eq!(rows[0].upper, 0.0);
        assert_abs_diff_eq!(rows[1].upper, 0.5 * (2e6f64 - 1.0).ln(), epsilon = 1e-8);
        assert!(completeness_probe(&Domain::UnitDisc, MetricKind::Kobayashi, c(0.0, 0.0), c(0.5, 0.0), &[0.1]).is_err());
    }

    #[test]
    fn poincare_unavailable_on_annulus() {
        let a = Domain::annulus(0.2).unwrap();
        assert!(matches!(
            distance(&a, MetricKind::Poincare, c(0.5, 0.0), c(0.6, 0.0)),
            Err(Error::MetricUnavailable { .. })
        ));
    }
}
