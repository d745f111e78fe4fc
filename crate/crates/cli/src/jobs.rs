use std::f64::consts::TAU;
use std::fmt::Write as _;

use invmetric::applications::{
    farkas_ritt_fixed_point, lindelof_region_comparison, metric_ball_diameter, orbit_boundary_escape, sample_disc,
};
use invmetric::densities::{annulus_kobayashi_density, caratheodory_lower_from_family, density};
use invmetric::domains::ApproachRegionParams;
use invmetric::geodesy::{completeness_probe, distance_with, DistanceOptions};
use invmetric::{suites, CandidateFamily, Domain, Error, HolomorphicMap, MetricKind, MobiusTransform};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Density,
    Distance,
    Geodesic,
    FixedPoint,
    Regions,
    Orbit,
    Balls,
    Completeness,
    AnnulusGap,
    Verify,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ball {
    pub center: Complex64,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledDisc {
    pub center: Complex64,
    pub radius: f64,
    #[serde(default = "default_rings")]
    pub rings: usize,
}

fn default_rings() -> usize {
    6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: Command,
    pub domain: Option<Domain>,
    #[serde(default)]
    pub metric: Option<MetricKind>,
    #[serde(default)]
    pub points: Vec<Complex64>,
    #[serde(default)]
    pub vectors: Vec<Complex64>,
    #[serde(default)]
    pub pairs: Vec<[Complex64; 2]>,
    pub map: Option<HolomorphicMap>,
    #[serde(default)]
    pub transforms: Vec<MobiusTransform>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub boundary_point: Option<Complex64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub r0: Option<f64>,
    pub n_samples: Option<usize>,
    #[serde(default)]
    pub radii: Vec<f64>,
    pub n_directions: Option<usize>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    pub sample: Option<SampledDisc>,
    pub ball: Option<Ball>,
    pub r_inner: Option<f64>,
    pub n_points: Option<usize>,
}

/// Files to write and the exit status of a successful run.
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub code: i32,
}

fn required<T>(v: Option<T>, field: &str, command: Command) -> Result<T, Error> {
    v.ok_or_else(|| Error::Precondition(format!("field `{field}` is required for {command:?}")))
}

fn nonempty<'a, T>(v: &'a [T], field: &str, command: Command) -> Result<&'a [T], Error> {
    if v.is_empty() {
        Err(Error::Precondition(format!("field `{field}` must not be empty for {command:?}")))
    } else {
        Ok(v)
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn e(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn run(job: &JobSpec) -> Result<Outcome, Error> {
    let cmd = job.command;
    let domain = || required(job.domain.clone(), "domain", cmd);
    let metric = job.metric.unwrap_or(MetricKind::Kobayashi);
    let files = match cmd {
        Command::Density => {
            let d = domain()?;
            let points = nonempty(&job.points, "points", cmd)?;
            let vectors: Vec<Complex64> = match job.vectors.len() {
                0 => vec![Complex64::new(1.0, 0.0); points.len()],
                1 => vec![job.vectors[0]; points.len()],
                n if n == points.len() => job.vectors.clone(),
                n => {
                    return Err(Error::Precondition(format!(
                        "{n} vectors for {} points",
                        points.len()
                    )))
                }
            };
            let mut csv = String::from("x,y,xi_x,xi_y,lower,upper\n");
            for (z, xi) in points.iter().zip(&vectors) {
                let b = density(&d, metric, *z, *xi)?;
                let _ = writeln!(csv, "{},{},{},{},{},{}", e(z.re), e(z.im), e(xi.re), e(xi.im), e(b.lower), e(b.upper));
            }
            vec![("density.csv".into(), csv)]
        }
        Command::Distance | Command::Geodesic => {
            let d = domain()?;
            let pairs: Vec<[Complex64; 2]> = if !job.pairs.is_empty() {
                job.pairs.clone()
            } else if job.points.len() == 2 {
                vec![[job.points[0], job.points[1]]]
            } else {
                return Err(Error::Precondition("give `pairs` or exactly two `points`".into()));
            };
            let opts = DistanceOptions {
                tol: job.tol.unwrap_or(DistanceOptions::default().tol),
                ..Default::default()
            };
            let results = pairs
                .iter()
                .map(|[z, w]| distance_with(&d, metric, *z, *w, opts))
                .collect::<Result<Vec<_>, _>>()?;
            if cmd == Command::Distance {
                let mut csv = String::from("z_x,z_y,w_x,w_y,value,lower,upper\n");
                for ([z, w], r) in pairs.iter().zip(&results) {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{}",
                        e(z.re), e(z.im), e(w.re), e(w.im), e(r.value), e(r.lower), e(r.upper)
                    );
                }
                vec![("distance.csv".into(), csv), ("distance.json".into(), json(&results))]
            } else {
                let mut files = Vec::new();
                for (k, r) in results.iter().enumerate() {
                    let per = (64 / r.path.segments.len()).max(1);
                    files.push((format!("geodesic_{k}.csv"), r.path.to_csv(per)));
                }
                files.push(("geodesic.json".into(), json(&results)));
                files
            }
        }
        Command::FixedPoint => {
            let f = required(job.map.clone(), "map", cmd)?;
            f.validate()?;
            let report = farkas_ritt_fixed_point(&f, job.tol.unwrap_or(1e-10))?;
            vec![
                ("fixed_point.json".into(), json(&report)),
                ("fixed_point_trace.csv".into(), report.trace_csv()),
            ]
        }
        Command::Regions => {
            let d = domain()?;
            let p = required(job.boundary_point, "boundary_point", cmd)?;
            let params = ApproachRegionParams::new(
                job.alpha.unwrap_or(2.0),
                job.beta.unwrap_or(1.0),
                job.r0.unwrap_or(0.5),
            )?;
            let report = lindelof_region_comparison(&d, p, params, job.n_samples.unwrap_or(400))?;
            vec![
                ("regions.json".into(), json(&report)),
                ("regions_samples.csv".into(), report.samples_csv()),
            ]
        }
        Command::Orbit => {
            let d = job.domain.clone().unwrap_or(Domain::UnitDisc);
            let phis = nonempty(&job.transforms, "transforms", cmd)?;
            let p = job.points.first().copied().unwrap_or_default();
            let s = required(job.sample, "sample", cmd)?;
            let v = required(job.ball, "ball", cmd)?;
            let k = sample_disc(s.center, s.radius, s.rings);
            let report = orbit_boundary_escape(&d, phis, p, &k, v.center, v.radius)?;
            vec![("orbit.json".into(), json(&report)), ("orbit.csv".into(), report.steps_csv())]
        }
        Command::Balls => {
            let d = domain()?;
            let centers = nonempty(&job.points, "points", cmd)?;
            let radii = nonempty(&job.radii, "radii", cmd)?;
            let n = job.n_directions.unwrap_or(16);
            let mut csv = String::from("x,y,radius,diameter\n");
            for z in centers {
                for &r in radii {
                    let v = metric_ball_diameter(&d, *z, r, n)?;
                    let _ = writeln!(csv, "{},{},{},{}", e(z.re), e(z.im), e(r), e(v));
                }
            }
            vec![("balls.csv".into(), csv)]
        }
        Command::Completeness => {
            let d = domain()?;
            let z0 = job.points.first().copied().unwrap_or_default();
            let target = required(job.boundary_point, "boundary_point", cmd)?;
            let eps = nonempty(&job.epsilons, "epsilons", cmd)?;
            let rows = completeness_probe(&d, metric, z0, target, eps)?;
            let mut csv = String::from("epsilon,lower,upper\n");
            for r in rows {
                let _ = writeln!(csv, "{},{},{}", e(r.epsilon), e(r.lower), e(r.upper));
            }
            vec![("completeness.csv".into(), csv)]
        }
        Command::AnnulusGap => {
            let r = job.r_inner.unwrap_or(0.2);
            let d = Domain::annulus(r)?;
            let family = CandidateFamily::disc_valued_for(&d);
            let n = job.n_points.unwrap_or(64);
            let xi = Complex64::new(1.0, 0.0);
            let mut csv = String::from("x,y,kobayashi,caratheodory_lower,gap\n");
            for k in 0..n {
                let z = Complex64::from_polar(r.sqrt(), TAU * k as f64 / n as f64);
                let kob = annulus_kobayashi_density(r, z, xi);
                let car = caratheodory_lower_from_family(&d, z, xi, &family)?;
                let _ = writeln!(csv, "{},{},{},{},{}", e(z.re), e(z.im), e(kob), e(car), e(kob - car));
            }
            vec![("annulus_gap.csv".into(), csv)]
        }
        Command::Verify => {
            let report = suites::run_all(job.seed.unwrap_or(0))?;
            let code = if report.passed { 0 } else { 3 };
            return Ok(Outcome {
                files: vec![("verify.json".into(), json(&report))],
                code,
            });
        }
    };
    Ok(Outcome { files, code: 0 })
}
