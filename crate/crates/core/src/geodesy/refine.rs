//! Multi-resolution polyline shortening for conformal densities.

use num_complex::Complex64;

use crate::complex::I;
use crate::densities::{density_upper, MetricKind};
use crate::domains::Domain;
use crate::quadrature::gauss_legendre5;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const MAX_SWEEPS: usize = 50;
const MAX_VERTICES: usize = 256;
/// Target metric length of a single polyline segment.
const SEGMENT_TARGET: f64 = 0.02;

pub(crate) struct Refiner<'a> {
    domain: &'a Domain,
    metric: MetricKind,
}

impl<'a> Refiner<'a> {
    pub fn new(domain: &'a Domain, metric: MetricKind) -> Self {
        Refiner { domain, metric }
    }

    fn rho(&self, z: Complex64) -> f64 {
        density_upper(self.domain, self.metric, z, Complex64::new(1.0, 0.0)).unwrap_or(f64::INFINITY)
    }

    /// Gauss–Legendre length of the segment `[a, b]`; infinite if it leaves the domain.
    pub fn segment(&self, a: Complex64, b: Complex64) -> f64 {
        let d = b - a;
        gauss_legendre5(|t| Ok(self.rho(a + d * t)))
            .map(|v| v * d.norm())
            .unwrap_or(f64::INFINITY)
    }

    /// `n + 1` points along the polyline at equal metric arclength.
    fn resample(&self, v: &[Complex64], n: usize) -> Vec<Complex64> {
        let lens: Vec<f64> = v.windows(2).map(|w| self.segment(w[0], w[1])).collect();
        let total: f64 = lens.iter().sum();
        let mut out = vec![v[0]];
        let mut k = 0;
        let mut acc = 0.0;
        for j in 1..n {
            let target = total * j as f64 / n as f64;
            while k + 1 < lens.len() && acc + lens[k] < target {
                acc += lens[k];
                k += 1;
            }
            let frac = if lens[k] > 0.0 { ((target - acc) / lens[k]).clamp(0.0, 1.0) } else { 0.0 };
            out.push(v[k] + (v[k + 1] - v[k]) * frac);
        }
        out.push(*v.last().unwrap());
        out
    }

    /// Golden-section move of vertex `i` along its local normal.
    fn relax_vertex(&self, v: &mut [Complex64], i: usize) -> f64 {
        let (a, p, b) = (v[i - 1], v[i], v[i + 1]);
        let chord = b - a;
        if chord.norm() == 0.0 {
            return 0.0;
        }
        let normal = I * chord / chord.norm();
        let reach = 0.5 * (p - a).norm().min((b - p).norm());
        let f = |t: f64| {
            let q = p + normal * t;
            self.segment(a, q) + self.segment(q, b)
        };
        let start = f(0.0);
        let (mut lo, mut hi) = (-reach, reach);
        let mut x1 = hi - GOLDEN * (hi - lo);
        let mut x2 = lo + GOLDEN * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..30 {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - GOLDEN * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + GOLDEN * (hi - lo);
                f2 = f(x2);
            }
        }
        let (t, best) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        if best < start {
            v[i] = p + normal * t;
            start - best
        } else {
            0.0
        }
    }

    /// Shortens the polyline: relaxes vertices at increasing resolution until
    /// segments are short in the metric and sweeps stop improving by `tol`.
    pub fn refine(&self, path: &[Complex64], tol: f64) -> Vec<Complex64> {
        if path.len() < 2 || path[0] == *path.last().unwrap() {
            return path.to_vec();
        }
        let mut n = 4;
        let mut v = self.resample(path, n);
        let mut sweeps = 0;
        loop {
            loop {
                let mut gain = 0.0;
                for i in 1..v.len() - 1 {
                    gain += self.relax_vertex(&mut v, i);
                }
                sweeps += 1;
                if gain < tol || sweeps >= MAX_SWEEPS {
                    break;
                }
            }
            let longest = v
                .windows(2)
                .map(|w| self.segment(w[0], w[1]))
                .fold(0.0, f64::max);
            if sweeps >= MAX_SWEEPS || n >= MAX_VERTICES || (n >= 16 && longest <= SEGMENT_TARGET) {
                return v;
            }
            n *= 2;
            v = self.resample(&v, n);
        }
    }
}
