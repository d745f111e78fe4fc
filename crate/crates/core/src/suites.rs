//! Seeded randomized checks of the contraction and comparison inequalities.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::MobiusTransform;
use crate::densities::{
    annulus_kobayashi_density, boundary_bracket_constants, caratheodory_lower_from_family, kobayashi_density,
    pseudohyperbolic, schwarz_pick_gap, CandidateFamily,
};
use crate::domains::Domain;
use crate::error::Result;
use crate::geodesy::disc_distance;
use crate::holomaps::{random_blaschke, random_disc_point, random_self_map, HolomorphicMap};

/// Outcome of one suite: `slack` is the margin by which the checked
/// inequality holds (negative when violated beyond `tolerance`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub violations: usize,
    pub worst_slack: f64,
    pub tolerance: f64,
}

impl SuiteReport {
    fn new(name: &str, tolerance: f64) -> Self {
        SuiteReport {
            name: name.into(),
            cases: 0,
            violations: 0,
            worst_slack: f64::INFINITY,
            tolerance,
        }
    }

    fn record(&mut self, slack: f64) {
        self.cases += 1;
        self.worst_slack = self.worst_slack.min(slack);
        if !(slack >= -self.tolerance) {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.cases > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_mobius<R: Rng>(rng: &mut R) -> MobiusTransform {
    MobiusTransform::new(random_disc_point(rng, 0.95), rng.gen::<f64>() * TAU).expect("centre inside the disc")
}

/// Contraction of the pseudohyperbolic distance and of the disc density under
/// random Blaschke products.
pub fn schwarz_pick_suite(seed: u64, n: usize) -> Result<[SuiteReport; 2]> {
    let mut rng = rng_for(seed, 1);
    let mut distance = SuiteReport::new("schwarz-pick distance", 1e-12);
    let mut density = SuiteReport::new("schwarz-pick density", 1e-12);
    for _ in 0..n {
        let f = random_blaschke(&mut rng);
        let a = random_disc_point(&mut rng, 0.95);
        let b = random_disc_point(&mut rng, 0.95);
        distance.record(pseudohyperbolic(a, b)? - pseudohyperbolic(f.eval(a)?, f.eval(b)?)?);
        density.record(schwarz_pick_gap(&f, a)?);
    }
    Ok([distance, density])
}

/// Automorphisms attain equality in both contraction inequalities.
pub fn mobius_equality_suite(seed: u64, n: usize) -> Result<SuiteReport> {
    let mut rng = rng_for(seed, 2);
    let mut report = SuiteReport::new("mobius equality", 1e-10);
    for _ in 0..n {
        let m = random_mobius(&mut rng);
        let f = HolomorphicMap::mobius(m);
        let a = random_disc_point(&mut rng, 0.95);
        let b = random_disc_point(&mut rng, 0.95);
        let d = (pseudohyperbolic(a, b)? - pseudohyperbolic(m.apply(a)?, m.apply(b)?)?).abs();
        let g = schwarz_pick_gap(&f, a)?.abs();
        report.record(-d.max(g));
    }
    Ok(report)
}

/// Closed-form disc distance does not increase under random self-maps.
pub fn distance_decreasing_suite(seed: u64, n: usize) -> Result<SuiteReport> {
    let mut rng = rng_for(seed, 3);
    let mut report = SuiteReport::new("distance decreasing", 1e-9);
    for _ in 0..n {
        let f = random_self_map(&mut rng);
        let z = random_disc_point(&mut rng, 0.95);
        let w = random_disc_point(&mut rng, 0.95);
        report.record(disc_distance(z, w)? - disc_distance(f.eval(z)?, f.eval(w)?)?);
    }
    Ok(report)
}

/// Points of the annulus `{r < |z| < 1}` kept at least `margin` from the boundary.
pub fn annulus_points(seed: u64, r_inner: f64, n: usize) -> Vec<Complex64> {
    let mut rng = rng_for(seed, 4);
    let margin = 0.02 * (1.0 - r_inner);
    (0..n)
        .map(|_| {
            let lo = (r_inner + margin).powi(2);
            let hi = (1.0 - margin).powi(2);
            let rad = (lo + (hi - lo) * rng.gen::<f64>()).sqrt();
            Complex64::from_polar(rad, rng.gen::<f64>() * TAU)
        })
        .collect()
}

/// The Carathéodory family bound stays below the exact Kobayashi density on
/// the annulus.
pub fn majorization_suite(seed: u64, r_inner: f64, n: usize) -> Result<SuiteReport> {
    let domain = Domain::annulus(r_inner)?;
    let family = CandidateFamily::disc_valued_for(&domain);
    let mut rng = rng_for(seed, 5);
    let mut report = SuiteReport::new("caratheodory below kobayashi", 1e-9);
    for z in annulus_points(seed, r_inner, n) {
        let xi = Complex64::from_polar(1.0, rng.gen::<f64>() * TAU);
        let lower = caratheodory_lower_from_family(&domain, z, xi, &family)?;
        report.record(annulus_kobayashi_density(r_inner, z, xi) - lower);
    }
    Ok(report)
}

/// Seeded points on inward normal rays of a smooth domain at boundary
/// distance below `depth`: `(point, boundary distance)`.
pub fn normal_ray_points(domain: &Domain, seed: u64, depth: f64, n: usize) -> Result<Vec<(Complex64, f64)>> {
    let mut rng = rng_for(seed, 6);
    let boundary = domain.boundary_samples(4096);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let b = boundary[rng.gen_range(0..boundary.len())];
        let inward = domain.normals(b)?.inward;
        let s = depth * (1.0 - rng.gen::<f64>());
        let z = b + inward * s;
        out.push((z, domain.boundary_distance(z)?));
    }
    Ok(out)
}

/// Bracket of the Kobayashi density near the boundary, scaled by the boundary
/// distance, against the constants from the osculating radii; the slack is
/// the smaller of the two margins and of `upper - lower`.
pub fn boundary_bracket_suite(domain: &Domain, seed: u64, n: usize) -> Result<SuiteReport> {
    let (c, big_c) = boundary_bracket_constants(domain)?;
    let radius = domain.osculating_radii()?.r;
    let mut report = SuiteReport::new("boundary bracket", 1e-12);
    for (z, delta) in normal_ray_points(domain, seed, 0.1f64.min(radius), n)? {
        let b = kobayashi_density(domain, z, Complex64::new(1.0, 0.0))?;
        let slack = (b.lower * delta - c).min(big_c - b.upper * delta).min(b.upper - b.lower);
        report.record(slack);
    }
    Ok(report)
}

/// Every suite at its standard size.
pub fn run_all(seed: u64) -> Result<VerifyReport> {
    let mut suites = Vec::new();
    suites.extend(schwarz_pick_suite(seed, 1000)?);
    suites.push(mobius_equality_suite(seed, 200)?);
    suites.push(distance_decreasing_suite(seed, 200)?);
    suites.push(majorization_suite(seed, 0.2, 64)?);
    suites.push(boundary_bracket_suite(&Domain::ellipse(2.0, 1.0, 1024)?, seed, 500)?);
    Ok(VerifyReport {
        seed,
        passed: suites.iter().all(SuiteReport::passed),
        suites,
    })
}
