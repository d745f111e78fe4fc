use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One piece of a curve: samples `(t_i, point_i, velocity_i)` over `[0, 1]`,
/// interpolated by cubic Hermite pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t: Vec<f64>,
    pub points: Vec<Complex64>,
    pub velocities: Vec<Complex64>,
}

impl Segment {
    pub fn line(from: Complex64, to: Complex64) -> Self {
        Segment {
            t: vec![0.0, 1.0],
            points: vec![from, to],
            velocities: vec![to - from; 2],
        }
    }

    pub fn new(t: Vec<f64>, points: Vec<Complex64>, velocities: Vec<Complex64>) -> Result<Self> {
        if t.len() < 2 || points.len() != t.len() || velocities.len() != t.len() {
            return Err(Error::Precondition(
                "segment needs at least two samples with matching points and velocities".into(),
            ));
        }
        if t[0] != 0.0 || *t.last().unwrap() != 1.0 || t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition(
                "segment parameters must increase from 0 to 1".into(),
            ));
        }
        Ok(Segment { t, points, velocities })
    }

    pub fn start(&self) -> Complex64 {
        self.points[0]
    }

    pub fn end(&self) -> Complex64 {
        *self.points.last().unwrap()
    }

    /// Number of Hermite pieces.
    pub fn pieces(&self) -> usize {
        self.t.len() - 1
    }

    /// Breakpoints `[t_k, t_{k+1}]` of piece `k`.
    pub fn piece_range(&self, k: usize) -> (f64, f64) {
        (self.t[k], self.t[k + 1])
    }

    /// Point and velocity at `s` in `[0, 1]`.
    pub fn eval(&self, s: f64) -> (Complex64, Complex64) {
        let k = match self.t.binary_search_by(|x| x.total_cmp(&s)) {
            Ok(i) => i.min(self.pieces() - 1),
            Err(i) => i.saturating_sub(1).min(self.pieces() - 1),
        };
        let (t0, t1) = self.piece_range(k);
        let h = t1 - t0;
        let u = (s - t0) / h;
        let (p0, p1) = (self.points[k], self.points[k + 1]);
        let (m0, m1) = (self.velocities[k] * h, self.velocities[k + 1] * h);
        let (u2, u3) = (u * u, u * u * u);
        let p = (2.0 * u3 - 3.0 * u2 + 1.0) * p0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * p1
            + (u3 - u2) * m1;
        let dp = ((6.0 * u2 - 6.0 * u) * p0
            + (3.0 * u2 - 4.0 * u + 1.0) * m0
            + (-6.0 * u2 + 6.0 * u) * p1
            + (3.0 * u2 - 2.0 * u) * m1)
            / h;
        (p, dp)
    }
}

/// A piecewise C¹ curve: consecutive segments share endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub segments: Vec<Segment>,
}

impl Curve {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Precondition("curve needs at least one segment".into()));
        }
        for w in segments.windows(2) {
            let gap = (w[0].end() - w[1].start()).norm();
            if gap > 1e-12 * (1.0 + w[0].end().norm()) {
                return Err(Error::Precondition(format!(
                    "segments do not share endpoints (gap {gap})"
                )));
            }
        }
        Ok(Curve { segments })
    }

    /// Constant curve at `p`.
    pub fn point(p: Complex64) -> Self {
        Curve {
            segments: vec![Segment::line(p, p)],
        }
    }

    pub fn line(from: Complex64, to: Complex64) -> Self {
        Curve {
            segments: vec![Segment::line(from, to)],
        }
    }

    pub fn polyline(vertices: &[Complex64]) -> Self {
        match vertices {
            [] => panic!("polyline needs a vertex"),
            [p] => Curve::point(*p),
            _ => Curve {
                segments: vertices.windows(2).map(|w| Segment::line(w[0], w[1])).collect(),
            },
        }
    }

    /// Samples of a smooth parametrization `gamma` on `[0, 1]` with derivative.
    pub fn sampled(n: usize, mut gamma: impl FnMut(f64) -> (Complex64, Complex64)) -> Self {
        let n = n.max(2);
        let t: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        let (points, velocities) = t.iter().map(|&s| gamma(s)).unzip();
        Curve {
            segments: vec![Segment { t, points, velocities }],
        }
    }

    pub fn start(&self) -> Complex64 {
        self.segments[0].start()
    }

    pub fn end(&self) -> Complex64 {
        self.segments.last().unwrap().end()
    }

    /// Point at global parameter `t` in `[0, 1]` (segments share it equally).
    pub fn at(&self, t: f64) -> Complex64 {
        let n = self.segments.len() as f64;
        let x = (t.clamp(0.0, 1.0) * n).min(n - 1e-12);
        let k = x.floor() as usize;
        self.segments[k].eval(x - k as f64).0
    }

    /// All sample points in order, without repeating shared endpoints.
    pub fn vertices(&self) -> Vec<Complex64> {
        let mut out = vec![self.start()];
        for s in &self.segments {
            out.extend_from_slice(&s.points[1..]);
        }
        out
    }

    pub fn is_degenerate(&self) -> bool {
        self.segments
            .iter()
            .all(|s| s.points.iter().all(|p| *p == self.start()) && s.velocities.iter().all(|v| v.norm() == 0.0))
            || self.vertices().iter().all(|p| *p == self.start())
    }

    pub fn reversed(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                t: s.t.iter().rev().map(|t| 1.0 - t).collect(),
                points: s.points.iter().rev().cloned().collect(),
                velocities: s.velocities.iter().rev().map(|v| -v).collect(),
            })
            .collect();
        Curve { segments }
    }

    /// Symmetric Hausdorff distance between polyline samplings of two curves.
    pub fn hausdorff_to(&self, other: &Curve, samples: usize) -> f64 {
        let a: Vec<Complex64> = (0..=samples).map(|k| self.at(k as f64 / samples as f64)).collect();
        let b: Vec<Complex64> = (0..=samples).map(|k| other.at(k as f64 / samples as f64)).collect();
        let one_way = |x: &[Complex64], y: &[Complex64]| {
            x.iter()
                .map(|p| {
                    y.windows(2)
                        .map(|w| point_segment_distance(*p, w[0], w[1]))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        one_way(&a, &b).max(one_way(&b, &a))
    }

    /// CSV polyline with columns `t,x,y`.
    pub fn to_csv(&self, samples_per_segment: usize) -> String {
        let mut out = String::from("t,x,y\n");
        let n = self.segments.len();
        let m = samples_per_segment.max(1);
        for (k, seg) in self.segments.iter().enumerate() {
            let first = if k == 0 { 0 } else { 1 };
            for j in first..=m {
                let s = j as f64 / m as f64;
                let p = seg.eval(s).0;
                let t = (k as f64 + s) / n as f64;
                out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", t, p.re, p.im));
            }
        }
        out
    }
}

pub(crate) fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    if ab.norm_sqr() == 0.0 {
        return (p - a).norm();
    }
    let s = (((p - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0);
    (a + s * ab - p).norm()
}
