//! Domains bounded by a sampled closed C² curve.
//!
//! The boundary is a uniform-parameter sample `p_k = gamma(2 pi k / N)`.
//! Derivatives come from 5-point periodic central differences; between samples
//! the curve is the cubic Hermite interpolant of points and first derivatives,
//! which is what nearest-point and distance queries refine against.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{fmt_point, Error, Result};

pub const MIN_SAMPLES: usize = 256;
const CHUNK: usize = 16;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Complex64,
    max: Complex64,
}

impl Aabb {
    fn distance(&self, z: Complex64) -> f64 {
        let dx = (self.min.re - z.re).max(0.0).max(z.re - self.max.re);
        let dy = (self.min.im - z.im).max(0.0).max(z.im - self.max.im);
        dx.hypot(dy)
    }
}

/// Result of a nearest-boundary query.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryHit {
    pub point: Complex64,
    pub distance: f64,
    /// Unit tangent (counterclockwise) at `point`.
    pub tangent: Complex64,
    /// Fractional sample index of `point`.
    pub param: f64,
}

impl BoundaryHit {
    /// Unit normal pointing into the domain.
    pub fn inward(&self) -> Complex64 {
        Complex64::i() * self.tangent
    }
}

#[derive(Debug, Clone)]
pub struct SmoothDomain {
    points: Vec<Complex64>,
    d1: Vec<Complex64>,
    d2: Vec<Complex64>,
    curvature: Vec<f64>,
    basepoint: Complex64,
    chunks: Vec<Aabb>,
    max_segment: f64,
    interior_radius: f64,
    exterior_radius: f64,
    diameter: f64,
    centroid: Complex64,
    radius_about_centroid: f64,
    convex: bool,
}

fn signed_area(points: &[Complex64]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|k| {
            let (a, b) = (points[k], points[(k + 1) % n]);
            a.re * b.im - b.re * a.im
        })
        .sum::<f64>()
        / 2.0
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b - a).re * (c - a).im - (b - a).im * (c - a).re
}

fn segments_intersect(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Complex64, b: Complex64, p: Complex64, d: f64| {
        d == 0.0
            && p.re >= a.re.min(b.re)
            && p.re <= a.re.max(b.re)
            && p.im >= a.im.min(b.im)
            && p.im <= a.im.max(b.im)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Sweep over segments sorted by their left end; non-adjacent overlapping pairs
/// are tested for intersection.
fn first_self_intersection(points: &[Complex64]) -> Option<(usize, usize)> {
    let n = points.len();
    let seg = |k: usize| (points[k], points[(k + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    let xmin = |k: usize| seg(k).0.re.min(seg(k).1.re);
    let xmax = |k: usize| seg(k).0.re.max(seg(k).1.re);
    order.sort_by(|&a, &b| xmin(a).total_cmp(&xmin(b)));
    for (pos, &i) in order.iter().enumerate() {
        let right = xmax(i);
        for &j in &order[pos + 1..] {
            if xmin(j) > right {
                break;
            }
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent || i == j {
                continue;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            if segments_intersect(a, b, c, d) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

impl SmoothDomain {
    /// Builds a domain from uniform-parameter boundary samples. Clockwise input is
    /// reversed to counterclockwise.
    pub fn new(mut points: Vec<Complex64>, basepoint: Complex64) -> Result<Self> {
        let n = points.len();
        if n < MIN_SAMPLES {
            return Err(Error::InvalidDomain(format!(
                "smooth boundary needs at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        if points.iter().any(|p| !crate::complex::is_finite(*p)) {
            return Err(Error::InvalidDomain("boundary sample is not finite".into()));
        }
        if !crate::complex::is_finite(basepoint) {
            return Err(Error::InvalidDomain("basepoint is not finite".into()));
        }
        if let Some((i, j)) = first_self_intersection(&points) {
            return Err(Error::InvalidDomain(format!(
                "boundary is not simple: segments {i} and {j} intersect"
            )));
        }
        if signed_area(&points) < 0.0 {
            points.reverse();
        }

        let h = TAU / n as f64;
        let at = |k: isize| points[k.rem_euclid(n as isize) as usize];
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        let mut curvature = Vec::with_capacity(n);
        for k in 0..n as isize {
            let (pm2, pm1, p0, pp1, pp2) = (at(k - 2), at(k - 1), at(k), at(k + 1), at(k + 2));
            let first = (-pp2 + 8.0 * pp1 - 8.0 * pm1 + pm2) / (12.0 * h);
            let second = (-pp2 + 16.0 * pp1 - 30.0 * p0 + 16.0 * pm1 - pm2) / (12.0 * h * h);
            let speed = first.norm();
            if !(speed > 0.0) {
                return Err(Error::Curvature(format!("zero speed at sample {k}")));
            }
            let kappa = (first.conj() * second).im / speed.powi(3);
            if !kappa.is_finite() {
                return Err(Error::Curvature(format!("non-finite curvature at sample {k}")));
            }
            d1.push(first);
            d2.push(second);
            curvature.push(kappa);
        }

        let chunks = points
            .chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let mut min = chunk[0];
                let mut max = chunk[0];
                // include the closing point of the last segment in the chunk
                let end = points[((c + 1) * CHUNK) % n];
                for &p in chunk.iter().chain(std::iter::once(&end)) {
                    min = Complex64::new(min.re.min(p.re), min.im.min(p.im));
                    max = Complex64::new(max.re.max(p.re), max.im.max(p.im));
                }
                Aabb { min, max }
            })
            .collect::<Vec<_>>();
        let max_segment = (0..n)
            .map(|k| (points[(k + 1) % n] - points[k]).norm())
            .fold(0.0, f64::max);
        // Hermite pieces bulge at most O(len^2 kappa) past the chord
        let sag = max_segment;
        let chunks = chunks
            .into_iter()
            .map(|b| Aabb {
                min: b.min - Complex64::new(sag, sag),
                max: b.max + Complex64::new(sag, sag),
            })
            .collect();

        let centroid = points.iter().sum::<Complex64>() / n as f64;
        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                diameter = diameter.max((points[i] - points[j]).norm());
            }
        }

        let mut domain = SmoothDomain {
            points,
            d1,
            d2,
            curvature,
            basepoint,
            chunks,
            max_segment,
            interior_radius: 0.0,
            exterior_radius: 0.0,
            diameter,
            centroid,
            radius_about_centroid: 0.0,
            convex: false,
        };
        domain.convex = domain.curvature.iter().all(|&k| k > 0.0);
        domain.radius_about_centroid = domain.circumradius_about(centroid);
        let (r, big_r) = domain.tangent_ball_radii();
        if !(r > 0.0 && big_r > 0.0) {
            return Err(Error::Curvature("degenerate osculating radii".into()));
        }
        domain.interior_radius = r;
        domain.exterior_radius = big_r;
        if !domain.contains(basepoint) {
            return Err(Error::InvalidDomain(format!(
                "basepoint {} is not interior",
                fmt_point(basepoint)
            )));
        }
        Ok(domain)
    }

    /// Samples `gamma` at `n` uniform parameters in `[0, 2 pi)`.
    pub fn from_parametrization(
        n: usize,
        gamma: impl Fn(f64) -> Complex64,
        basepoint: Complex64,
    ) -> Result<Self> {
        let points = (0..n).map(|k| gamma(TAU * k as f64 / n as f64)).collect();
        Self::new(points, basepoint)
    }

    /// Ellipse with semi-axes `a` (real) and `b` (imaginary), centered at 0.
    pub fn ellipse(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::from_parametrization(
            n,
            |t| Complex64::new(a * t.cos(), b * t.sin()),
            Complex64::new(0.0, 0.0),
        )
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.points
    }

    pub fn basepoint(&self) -> Complex64 {
        self.basepoint
    }

    pub fn centroid(&self) -> Complex64 {
        self.centroid
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Positive curvature everywhere; a simple closed curve is then convex.
    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvature
    }

    pub fn interior_radius(&self) -> f64 {
        self.interior_radius
    }

    pub fn exterior_radius(&self) -> f64 {
        self.exterior_radius
    }

    fn len(&self) -> usize {
        self.points.len()
    }

    /// Interior radius: the smaller of `1/max curvature` and the largest disc
    /// tangent from inside at every sample. Exterior radius likewise from outside,
    /// defaulting to ten diameters when the boundary has no concave arc.
    fn tangent_ball_radii(&self) -> (f64, f64) {
        let n = self.len();
        let kmax = self.curvature.iter().cloned().fold(f64::MIN, f64::max);
        let kmin = self.curvature.iter().cloned().fold(f64::MAX, f64::min);
        let mut r = if kmax > 0.0 { 1.0 / kmax } else { f64::INFINITY };
        let mut big_r = if kmin < 0.0 { 1.0 / -kmin } else { f64::INFINITY };
        for k in 0..n {
            let p = self.points[k];
            let inward = Complex64::i() * self.d1[k] / self.d1[k].norm();
            for j in 0..n {
                // immediate neighbours only see the local curvature, already covered
                let gap = (j as isize - k as isize).rem_euclid(n as isize) as usize;
                if gap <= 2 || gap >= n - 2 {
                    continue;
                }
                let v = self.points[j] - p;
                let along = v.re * inward.re + v.im * inward.im;
                let t = v.norm_sqr() / (2.0 * along.abs());
                if along > 0.0 {
                    r = r.min(t);
                } else if along < 0.0 {
                    big_r = big_r.min(t);
                }
            }
        }
        if !big_r.is_finite() {
            big_r = 10.0 * self.diameter;
        }
        (r, big_r.min(10.0 * self.diameter))
    }

    fn hermite(&self, k: usize, s: f64) -> (Complex64, Complex64, Complex64) {
        let n = self.len();
        let h = TAU / n as f64;
        let (p0, p1) = (self.points[k], self.points[(k + 1) % n]);
        let (m0, m1) = (self.d1[k] * h, self.d1[(k + 1) % n] * h);
        let (s2, s3) = (s * s, s * s * s);
        let p = (2.0 * s3 - 3.0 * s2 + 1.0) * p0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * p1
            + (s3 - s2) * m1;
        let dp = (6.0 * s2 - 6.0 * s) * p0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * p1
            + (3.0 * s2 - 2.0 * s) * m1;
        let ddp = (12.0 * s - 6.0) * p0
            + (6.0 * s - 4.0) * m0
            + (-12.0 * s + 6.0) * p1
            + (6.0 * s - 2.0) * m1;
        (p, dp, ddp)
    }

    /// Boundary point at fractional sample index `param`.
    pub fn point_at(&self, param: f64) -> Complex64 {
        let n = self.len() as f64;
        let t = param.rem_euclid(n);
        let k = (t.floor() as usize).min(self.len() - 1);
        self.hermite(k, t - k as f64).0
    }

    fn polyline_distance(&self, k: usize, z: Complex64) -> (f64, f64) {
        let a = self.points[k];
        let b = self.points[(k + 1) % self.len()];
        let ab = b - a;
        let s = (((z - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0);
        ((a + s * ab - z).norm(), s)
    }

    /// Newton refinement of `|H_k(s) - z|^2` on piece `k`, clamped to `[0, 1]`.
    fn refine_on_piece(&self, k: usize, mut s: f64, z: Complex64) -> (f64, f64) {
        for _ in 0..8 {
            let (p, dp, ddp) = self.hermite(k, s);
            let r = p - z;
            let g = (r.conj() * dp).re;
            let hss = dp.norm_sqr() + (r.conj() * ddp).re;
            if hss <= 0.0 {
                break;
            }
            let next = (s - g / hss).clamp(0.0, 1.0);
            if (next - s).abs() < 1e-15 {
                s = next;
                break;
            }
            s = next;
        }
        ((self.hermite(k, s).0 - z).norm(), s)
    }

    /// Segments whose polyline distance is within `slack` of the best one.
    fn candidate_segments(&self, z: Complex64, slack: f64) -> (f64, Vec<(usize, f64, f64)>) {
        let n = self.len();
        let bounds: Vec<f64> = self.chunks.iter().map(|b| b.distance(z)).collect();
        let mut visited = vec![false; bounds.len()];
        let mut best = f64::INFINITY;
        let mut hits = Vec::new();
        loop {
            // closest unvisited chunk that can still contribute
            let mut next = None;
            for (c, &lb) in bounds.iter().enumerate() {
                if !visited[c] && lb <= best + slack && next.is_none_or(|(_, b)| lb < b) {
                    next = Some((c, lb));
                }
            }
            let Some((c, _)) = next else { break };
            visited[c] = true;
            for k in (c * CHUNK)..((c + 1) * CHUNK).min(n) {
                let (d, s) = self.polyline_distance(k, z);
                if d <= best + slack {
                    hits.push((k, d, s));
                }
                best = best.min(d);
            }
        }
        hits.retain(|h| h.1 <= best + slack);
        hits.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        (best, hits)
    }

    fn refine_segment(&self, k: usize, s: f64, z: Complex64) -> BoundaryHit {
        let n = self.len();
        let mut best = self.refine_on_piece(k, s, z);
        let mut piece = k;
        if best.1 <= 0.0 {
            let prev = (k + n - 1) % n;
            let cand = self.refine_on_piece(prev, 1.0, z);
            if cand.0 < best.0 {
                best = cand;
                piece = prev;
            }
        } else if best.1 >= 1.0 {
            let next = (k + 1) % n;
            let cand = self.refine_on_piece(next, 0.0, z);
            if cand.0 < best.0 {
                best = cand;
                piece = next;
            }
        }
        let (point, dp, _) = self.hermite(piece, best.1);
        BoundaryHit {
            point,
            distance: best.0,
            tangent: dp / dp.norm(),
            param: piece as f64 + best.1,
        }
    }

    /// Nearest point on the interpolated boundary.
    pub fn nearest(&self, z: Complex64) -> BoundaryHit {
        let (_, hits) = self.candidate_segments(z, 0.0);
        let (k, _, s) = hits[0];
        self.refine_segment(k, s, z)
    }

    /// Nearest point, failing when a second, separate boundary arc realizes the
    /// same distance within `tol`.
    pub fn nearest_unique(&self, z: Complex64, tol: f64) -> Result<BoundaryHit> {
        let n = self.len();
        // polyline and Hermite distances differ by at most the chord sag
        let sag = self.max_segment * self.max_segment;
        let (_, mut hits) = self.candidate_segments(z, 2.0 * sag + tol);
        hits.sort_by_key(|h| h.0);
        // group cyclically contiguous segment indices
        let mut groups: Vec<Vec<(usize, f64, f64)>> = Vec::new();
        for h in hits {
            match groups.last_mut() {
                Some(g) if h.0 - g.last().unwrap().0 <= 2 => g.push(h),
                _ => groups.push(vec![h]),
            }
        }
        if groups.len() > 1 {
            let first = groups[0][0].0;
            let last = groups.last().unwrap().last().unwrap().0;
            if first + n - last <= 2 {
                let tail = groups.pop().unwrap();
                groups[0].extend(tail);
            }
        }
        let mut refined: Vec<BoundaryHit> = groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|&(k, _, s)| self.refine_segment(k, s, z))
                    .min_by(|a, b| a.distance.total_cmp(&b.distance))
                    .unwrap()
            })
            .collect();
        refined.sort_by(|a, b| a.distance.total_cmp(&b.distance));
        if refined.len() > 1 && refined[1].distance - refined[0].distance <= tol {
            return Err(Error::Ambiguous(fmt_point(z)));
        }
        Ok(refined[0])
    }

    /// Crossing-number test against the boundary polyline.
    pub fn winding_contains(&self, z: Complex64) -> bool {
        let n = self.len();
        let mut inside = false;
        for (c, b) in self.chunks.iter().enumerate() {
            if z.im < b.min.im || z.im > b.max.im || z.re > b.max.re {
                continue;
            }
            for k in (c * CHUNK)..((c + 1) * CHUNK).min(n) {
                let a = self.points[k];
                let e = self.points[(k + 1) % n];
                if (a.im > z.im) != (e.im > z.im) {
                    let x = a.re + (z.im - a.im) * (e.re - a.re) / (e.im - a.im);
                    if z.re < x {
                        inside = !inside;
                    }
                }
            }
        }
        inside
    }

    pub fn contains(&self, z: Complex64) -> bool {
        crate::complex::is_finite(z) && self.winding_contains(z) && self.nearest(z).distance > 1e-12
    }

    /// Distance to the boundary, positive inside.
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        let d = self.nearest(z).distance;
        if self.winding_contains(z) {
            d
        } else {
            -d
        }
    }

    /// Cheap, looser form of [`circumradius_about`](Self::circumradius_about).
    pub fn circumradius_bound(&self, c: Complex64) -> f64 {
        (c - self.centroid).norm() + self.radius_about_centroid
    }

    /// Certified upper bound for `sup |w - c|` over the closed domain.
    pub fn circumradius_about(&self, c: Complex64) -> f64 {
        self.points.iter().map(|p| (p - c).norm()).fold(0.0, f64::max) + self.max_segment
    }

    /// Unit tangent at sample `k`.
    pub fn sample_tangent(&self, k: usize) -> Complex64 {
        self.d1[k] / self.d1[k].norm()
    }

    pub fn sample_second_derivative(&self, k: usize) -> Complex64 {
        self.d2[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ellipse_curvature_extremes() {
        let e = SmoothDomain::ellipse(2.0, 1.0, 1024).unwrap();
        // brute-force scan of kappa(t) = ab / (a^2 sin^2 t + b^2 cos^2 t)^{3/2}
        let (a, b) = (2.0f64, 1.0f64);
        let exact: Vec<f64> = (0..100_000)
            .map(|k| {
                let t = TAU * k as f64 / 100_000.0;
                a * b / (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5)
            })
            .collect();
        let kmax = exact.iter().cloned().fold(f64::MIN, f64::max);
        let kmin = exact.iter().cloned().fold(f64::MAX, f64::min);
        assert_abs_diff_eq!(kmax, 2.0, epsilon = 1e-9);
        let est_max = e.curvatures().iter().cloned().fold(f64::MIN, f64::max);
        let est_min = e.curvatures().iter().cloned().fold(f64::MAX, f64::min);
        assert_abs_diff_eq!(est_max, kmax, epsilon = 1e-6);
        assert_abs_diff_eq!(est_min, kmin, epsilon = 1e-6);
        assert_abs_diff_eq!(e.interior_radius(), 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(e.exterior_radius(), 40.0, epsilon = 1e-6);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let e = SmoothDomain::from_parametrization(
            512,
            |t| Complex64::new(2.0 * (-t).cos(), (-t).sin()),
            Complex64::new(0.0, 0.0),
        )
        .unwrap();
        assert!(signed_area(e.samples()) > 0.0);
        assert!(e.curvatures().iter().all(|&k| k > 0.0));
    }

    #[test]
    fn self_intersection_is_rejected() {
        // figure eight
        let r = SmoothDomain::from_parametrization(
            512,
            |t| Complex64::new(t.sin(), (2.0 * t).sin() / 2.0),
            Complex64::new(0.5, 0.0),
        );
        assert!(matches!(r, Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(matches!(
            SmoothDomain::ellipse(2.0, 1.0, 64),
            Err(Error::InvalidDomain(_))
        ));
    }

    #[test]
    fn basepoint_must_be_interior() {
        let r = SmoothDomain::from_parametrization(
            512,
            |t| Complex64::new(2.0 * t.cos(), t.sin()),
            Complex64::new(3.0, 0.0),
        );
        assert!(matches!(r, Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn nearest_point_on_ellipse_axis() {
        let e = SmoothDomain::ellipse(2.0, 1.0, 1024).unwrap();
        let hit = e.nearest_unique(Complex64::new(1.9, 0.0), 1e-9).unwrap();
        assert_abs_diff_eq!(hit.point.re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hit.distance, 0.1, epsilon = 1e-12);
        assert!((hit.inward() - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
        assert!(matches!(
            e.nearest_unique(Complex64::new(0.0, 0.0), 1e-9),
            Err(Error::Ambiguous(_))
        ));
    }

    #[test]
    fn distance_matches_dense_reference() {
        let e = SmoothDomain::ellipse(2.0, 1.0, 512).unwrap();
        let dense: Vec<Complex64> = (0..400_000)
            .map(|k| {
                let t = TAU * k as f64 / 400_000.0;
                Complex64::new(2.0 * t.cos(), t.sin())
            })
            .collect();
        for z in [
            Complex64::new(1.5, 0.2),
            Complex64::new(-0.3, 0.8),
            Complex64::new(1.2, -0.7),
        ] {
            let reference = dense.iter().map(|p| (p - z).norm()).fold(f64::MAX, f64::min);
            assert_abs_diff_eq!(e.nearest(z).distance, reference, epsilon = 1e-7);
        }
    }
}
