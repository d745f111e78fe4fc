//! Fixed points of strict self-maps, approach-region comparison, orbit escape
//! and the decay of metric balls near the boundary.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::MobiusTransform;
use crate::densities::MetricKind;
use crate::domains::{ApproachRegionParams, Domain};
use crate::error::{Error, Result};
use crate::geodesy::{closed_form_available, closed_form_value, disc_distance, grid_floor, grid_window, MetricField};
use crate::holomaps::{random_disc_point, HolomorphicMap};

pub const MAX_ITERATIONS: usize = 10_000;
const IMAGE_SAMPLES: usize = 4096;
const CONTRACTION_PAIRS: usize = 2000;
const CONTRACTION_SEED: u64 = 0x5eed_f1c5;

/// `(1 - sup|f|)/2` with the supremum sampled on the unit circle.
pub fn epsilon_margin(f: &HolomorphicMap, n_samples: usize) -> Result<f64> {
    let bound = f.disc_image_bound(n_samples)?;
    if bound >= 1.0 - 1e-9 {
        return Err(Error::ImageNotCompact(bound));
    }
    Ok((1.0 - bound) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStep {
    pub n: usize,
    pub point: Complex64,
    /// Disc distance from this iterate to its image.
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRun {
    pub start: Complex64,
    pub point: Complex64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub point: Complex64,
    pub iterations: usize,
    pub residual: f64,
    pub epsilon_margin: f64,
    pub observed_contraction: f64,
    /// Runs from every start, the first being the origin.
    pub restarts: Vec<RestartRun>,
    /// Largest distance between the fixed points found from different starts.
    pub spread: f64,
    /// Iterates of the run from the origin.
    pub trace: Vec<IterationStep>,
}

impl FixedPointReport {
    /// Trace with columns `n,x,y,step`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("n,x,y,step\n");
        for s in &self.trace {
            let _ = writeln!(out, "{},{:.16e},{:.16e},{:.16e}", s.n, s.point.re, s.point.im, s.step);
        }
        out
    }
}

fn iterate(f: &HolomorphicMap, start: Complex64, tol: f64) -> Result<(Complex64, usize, Vec<IterationStep>)> {
    let mut z = start;
    let mut trace = Vec::new();
    for n in 0..=MAX_ITERATIONS {
        let fz = f.eval(z)?;
        if !(fz.norm() < 1.0) {
            return Err(Error::NotSelfMap(fz.norm()));
        }
        let step = disc_distance(z, fz)?;
        trace.push(IterationStep { n, point: z, step });
        if step < tol && (fz - z).norm() <= tol {
            return Ok((z, n, trace));
        }
        z = fz;
    }
    Err(Error::IterationCap(MAX_ITERATIONS))
}

fn restart_points() -> Vec<Complex64> {
    let mut starts = vec![Complex64::new(0.0, 0.0)];
    starts.extend((0..8).map(|k| Complex64::from_polar(0.9, TAU * k as f64 / 8.0)));
    starts
}

/// Iterates `f` from the origin and from eight points of the circle of radius
/// 0.9 until successive iterates are within `tol` in the disc metric.
pub fn farkas_ritt_fixed_point(f: &HolomorphicMap, tol: f64) -> Result<FixedPointReport> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let eps = epsilon_margin(f, IMAGE_SAMPLES)?;
    let runs: Vec<_> = restart_points()
        .into_par_iter()
        .map(|s| iterate(f, s, tol).map(|r| (s, r)))
        .collect::<Result<_>>()?;
    let (_, (point, iterations, trace)) = &runs[0];
    let point = *point;
    let mut spread: f64 = 0.0;
    for (_, (p, _, _)) in &runs {
        spread = spread.max((p - point).norm());
    }
    if spread > 10.0 * tol {
        return Err(Error::Numeric(format!(
            "iterations from different starts disagree by {spread:e}"
        )));
    }
    let residual = (f.eval(point)? - point).norm();
    Ok(FixedPointReport {
        point,
        iterations: *iterations,
        residual,
        epsilon_margin: eps,
        observed_contraction: contraction_factor_estimate(f, CONTRACTION_PAIRS)?,
        restarts: runs
            .iter()
            .map(|(s, (p, n, _))| RestartRun {
                start: *s,
                point: *p,
                iterations: *n,
            })
            .collect(),
        spread,
        trace: trace.clone(),
    })
}

/// Largest observed ratio `d(f(z), f(w)) / d(z, w)` in the disc metric over
/// `n_pairs` seeded pairs; half the pairs are close together.
pub fn contraction_factor_estimate(f: &HolomorphicMap, n_pairs: usize) -> Result<f64> {
    epsilon_margin(f, IMAGE_SAMPLES)?;
    let mut rng = ChaCha8Rng::seed_from_u64(CONTRACTION_SEED);
    let mut best: f64 = 0.0;
    for k in 0..n_pairs {
        let z = random_disc_point(&mut rng, 0.99);
        let w = if k % 2 == 0 {
            random_disc_point(&mut rng, 0.99)
        } else {
            let v = z + random_disc_point(&mut rng, 1e-4);
            if v.norm() >= 1.0 {
                continue;
            }
            v
        };
        let d = disc_distance(z, w)?;
        if d < 1e-12 {
            continue;
        }
        best = best.max(disc_distance(f.eval(z)?, f.eval(w)?)? / d);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSample {
    pub point: Complex64,
    pub delta: f64,
    /// `|z - p| / delta(z)`: the point lies in every region with larger aperture.
    pub aperture: f64,
    /// Metric distance to the inward normal segment.
    pub segment_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InclusionCell {
    pub alpha: f64,
    pub beta: f64,
    pub in_gamma: usize,
    pub in_m: usize,
    pub in_both: usize,
    /// Fraction of sampled cone points inside the metric region.
    pub gamma_in_m: f64,
    /// Fraction of sampled metric-region points inside the cone.
    pub m_in_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionComparisonReport {
    pub boundary_point: Complex64,
    pub params: ApproachRegionParams,
    pub n_requested: usize,
    pub n_used: usize,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// For each alpha, the least beta whose region holds every sampled cone point.
    pub beta_for_alpha: Vec<Option<f64>>,
    /// For each beta, the least alpha whose cone holds every sampled region point.
    pub alpha_for_beta: Vec<Option<f64>>,
    pub cells: Vec<InclusionCell>,
    pub samples: Vec<RegionSample>,
}

impl RegionComparisonReport {
    /// Samples with columns `x,y,delta,aperture,segment_distance`.
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("x,y,delta,aperture,segment_distance\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.point.re, s.point.im, s.delta, s.aperture, s.segment_distance
            );
        }
        out
    }
}

fn golden_min(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, iterations: usize) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut best = f(lo).min(f(hi)).min(f1).min(f2);
    for _ in 0..iterations {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
            best = best.min(f1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
            best = best.min(f2);
        }
    }
    best
}

/// Distance from `z` to the inward normal segment `{p + r n : 0 < r <= r0}`
/// in a domain with a closed-form metric.
pub fn normal_segment_distance(domain: &Domain, p: Complex64, r0: f64, z: Complex64) -> Result<f64> {
    if !closed_form_available(domain, MetricKind::Kobayashi) {
        return Err(Error::Precondition(format!(
            "closed-form distances are not available on {}",
            domain.name()
        )));
    }
    let inward = domain.normals(p)?.inward;
    domain.require(z)?;
    let rel = (z - p) / inward;
    if rel.im.abs() <= 1e-15 * (1.0 + rel.re.abs()) && rel.re > 0.0 && rel.re <= r0 {
        return Ok(0.0);
    }
    let d = |r: f64| closed_form_value(domain, z, p + inward * r).unwrap_or(f64::INFINITY);
    Ok(golden_min(d, r0 * 1e-12, r0, 100))
}

fn region_samples(domain: &Domain, p: Complex64, inward: Complex64, r0: f64, n: usize) -> Vec<(Complex64, f64)> {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (0..n)
        .filter_map(|k| {
            let s = r0 * ((k as f64 + 0.5) / n as f64).sqrt();
            let phi = ((k as f64 * golden).fract() - 0.5) * PI;
            let z = p + inward * Complex64::from_polar(s, phi);
            let delta = domain.boundary_distance(z).ok()?;
            (delta >= 1e-3 * r0).then_some((z, delta))
        })
        .collect()
}

/// Samples the half-disc of radius `r0` inside `p` and compares the cones
/// `|z - p| < alpha delta(z)` with the unions of metric balls of radius beta
/// about the inward normal segment of length `r0`.
pub fn lindelof_region_comparison(
    domain: &Domain,
    p: Complex64,
    params: ApproachRegionParams,
    n_samples: usize,
) -> Result<RegionComparisonReport> {
    if n_samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let inward = domain.normals(p)?.inward;
    let r0 = params.r0;
    let raw = region_samples(domain, p, inward, r0, n_samples);
    let distances: Vec<f64> = if closed_form_available(domain, MetricKind::Kobayashi) {
        raw.par_iter()
            .map(|&(z, _)| normal_segment_distance(domain, p, r0, z))
            .collect::<Result<_>>()?
    } else {
        let sources: Vec<Complex64> = (1..=64)
            .map(|k| p + inward * (r0 * k as f64 / 64.0))
            .filter(|q| domain.contains(*q))
            .collect();
        if sources.is_empty() {
            return Err(Error::Precondition("normal segment leaves the domain".into()));
        }
        let mut anchors: Vec<Complex64> = raw.iter().map(|s| s.0).collect();
        anchors.extend(&sources);
        let mut deltas: Vec<f64> = raw.iter().map(|s| s.1).collect();
        for q in &sources {
            deltas.push(domain.boundary_distance(*q)?);
        }
        let floor = grid_floor(grid_window(domain, &anchors), &deltas);
        let field = MetricField::new(domain, MetricKind::Kobayashi, &sources, floor)?;
        raw.iter().map(|&(z, _)| field.value(z)).collect::<Result<_>>()?
    };
    let samples: Vec<RegionSample> = raw
        .iter()
        .zip(distances)
        .map(|(&(z, delta), segment_distance)| RegionSample {
            point: z,
            delta,
            aperture: (z - p).norm() / delta,
            segment_distance,
        })
        .collect();

    let alphas: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|m| m * params.alpha).collect();
    let betas: Vec<f64> = [0.5, 1.0, 2.0, 4.0].iter().map(|m| m * params.beta).collect();
    let sup = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let beta_for_alpha = alphas
        .iter()
        .map(|&a| sup(&mut samples.iter().filter(|s| s.aperture < a).map(|s| s.segment_distance)))
        .collect();
    let alpha_for_beta = betas
        .iter()
        .map(|&b| sup(&mut samples.iter().filter(|s| s.segment_distance < b).map(|s| s.aperture)))
        .collect();
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    let mut cells = Vec::new();
    for &alpha in &alphas {
        for &beta in &betas {
            let in_gamma = samples.iter().filter(|s| s.aperture < alpha).count();
            let in_m = samples.iter().filter(|s| s.segment_distance < beta).count();
            let in_both = samples
                .iter()
                .filter(|s| s.aperture < alpha && s.segment_distance < beta)
                .count();
            cells.push(InclusionCell {
                alpha,
                beta,
                in_gamma,
                in_m,
                in_both,
                gamma_in_m: ratio(in_both, in_gamma),
                m_in_gamma: ratio(in_both, in_m),
            });
        }
    }
    Ok(RegionComparisonReport {
        boundary_point: p,
        params,
        n_requested: n_samples,
        n_used: samples.len(),
        alphas,
        betas,
        beta_for_alpha,
        alpha_for_beta,
        cells,
        samples,
    })
}

/// Boundary circle and concentric interior rings of a closed disc.
pub fn sample_disc(center: Complex64, radius: f64, rings: usize) -> Vec<Complex64> {
    let mut out = vec![center];
    for i in 1..=rings {
        let r = radius * i as f64 / rings as f64;
        let m = 8 * i;
        out.extend((0..m).map(|k| center + Complex64::from_polar(r, TAU * k as f64 / m as f64)));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitStep {
    pub j: usize,
    pub image: Complex64,
    pub diameter: f64,
    pub contained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    /// First index from which every sampled image lies in the target ball.
    pub escape_index: Option<usize>,
    pub steps: Vec<OrbitStep>,
}

impl OrbitReport {
    /// Columns `j,x,y,diameter,contained`.
    pub fn steps_csv(&self) -> String {
        let mut out = String::from("j,x,y,diameter,contained\n");
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{}",
                s.j, s.image.re, s.image.im, s.diameter, s.contained
            );
        }
        out
    }
}

fn euclidean_diameter(pts: &[Complex64]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

/// Images of the sample `k` under `phis[j - 1]`, `j = 1, 2, ...`, and the
/// first index from which they stay inside the ball `(v_center, v_radius)`.
pub fn orbit_boundary_escape(
    domain: &Domain,
    phis: &[MobiusTransform],
    p: Complex64,
    k: &[Complex64],
    v_center: Complex64,
    v_radius: f64,
) -> Result<OrbitReport> {
    if !matches!(domain, Domain::UnitDisc) {
        return Err(Error::Precondition("orbits are computed on the unit disc only".into()));
    }
    if phis.len() < 2 || k.is_empty() {
        return Err(Error::Precondition("need at least two maps and one sample point".into()));
    }
    if !(v_radius > 0.0) {
        return Err(Error::Precondition(format!("ball radius must be positive, got {v_radius}")));
    }
    domain.require(p)?;
    for &z in k {
        domain.require(z)?;
    }
    let moduli: Vec<f64> = phis
        .iter()
        .map(|m| m.apply_in_disc(p).map(|w| w.norm()))
        .collect::<Result<_>>()?;
    let increasing = moduli.windows(2).all(|w| w[1] > w[0]);
    let (first, last) = (moduli[0], moduli[moduli.len() - 1]);
    if !increasing || 1.0 - last > 0.5 * (1.0 - first) {
        return Err(Error::OrbitNotEscaping(format!(
            "|phi_j(P)| goes from {first} to {last}"
        )));
    }
    let steps: Vec<OrbitStep> = phis
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let images: Vec<Complex64> = k.iter().map(|&z| m.apply_in_disc(z)).collect::<Result<_>>()?;
            Ok(OrbitStep {
                j: i + 1,
                image: m.apply_in_disc(p)?,
                diameter: euclidean_diameter(&images),
                contained: images.iter().all(|w| (w - v_center).norm() < v_radius),
            })
        })
        .collect::<Result<_>>()?;
    let tail = steps.iter().rev().take_while(|s| s.contained).count();
    let escape_index = (tail > 0).then(|| steps[steps.len() - tail].j);
    Ok(OrbitReport { escape_index, steps })
}

fn bisect(mut inside: impl FnMut(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Length of the ray from `c` in direction `u` before it leaves the domain,
/// capped at `cap`.
fn ray_extent(domain: &Domain, c: Complex64, u: Complex64, cap: f64) -> f64 {
    if domain.contains(c + u * cap) && matches!(domain, Domain::UpperHalfPlane) {
        return cap;
    }
    let mut hi = cap;
    let mut lo = 0.0;
    // step out in small increments so that a thin gap is not jumped over
    let steps = 256;
    for i in 1..=steps {
        let t = cap * i as f64 / steps as f64;
        if !domain.contains(c + u * t) {
            hi = t;
            break;
        }
        lo = t;
    }
    if lo == cap {
        return cap;
    }
    bisect(|t| domain.contains(c + u * t), lo, hi)
}

/// Euclidean diameter of the Kobayashi ball `{z : d(center, z) <= radius}`,
/// from its extent along `n_directions` rays.
pub fn metric_ball_diameter(domain: &Domain, center: Complex64, radius: f64, n_directions: usize) -> Result<f64> {
    domain.require(center)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Precondition(format!("radius must be positive, got {radius}")));
    }
    if n_directions < 2 {
        return Err(Error::Precondition("need at least two directions".into()));
    }
    let base = if center.norm() > 0.0 { center / center.norm() } else { Complex64::new(1.0, 0.0) };
    let dirs: Vec<Complex64> = (0..n_directions)
        .map(|k| base * Complex64::from_polar(1.0, TAU * k as f64 / n_directions as f64))
        .collect();
    let delta = domain.boundary_distance(center)?;
    let cap = match domain.bounding_box() {
        Some((lo, hi)) => (hi - lo).norm(),
        None => 2.0 * delta * (2.0 * radius).exp() + center.norm() + 1.0,
    };
    let ends: Vec<Complex64> = if closed_form_available(domain, MetricKind::Kobayashi) {
        dirs.par_iter()
            .map(|&u| {
                let hi = ray_extent(domain, center, u, cap);
                let t = bisect(
                    |t| closed_form_value(domain, center, center + u * t).is_ok_and(|d| d <= radius),
                    0.0,
                    hi,
                );
                center + u * t
            })
            .collect()
    } else {
        let window = grid_window(domain, &[center]);
        let floor = grid_floor(window, &[delta * (-2.0 * radius).exp()]);
        let field = MetricField::new(domain, MetricKind::Kobayashi, &[center], floor)?;
        dirs.iter()
            .map(|&u| {
                let hi = ray_extent(domain, center, u, cap);
                let t = bisect(
                    |t| field.value(center + u * t).is_ok_and(|d| d <= radius),
                    0.0,
                    hi,
                );
                center + u * t
            })
            .collect()
    };
    Ok(euclidean_diameter(&ends))
}

/// Exact Euclidean diameter of a disc metric ball: `2t(1 - s^2)/(1 - s^2 t^2)`
/// with `s = |center|`, `t = tanh(radius)`.
pub fn disc_ball_diameter(center: Complex64, radius: f64) -> f64 {
    let s = center.norm();
    let t = radius.tanh();
    2.0 * t * (1.0 - s * s) / (1.0 - s * s * t * t)
}
