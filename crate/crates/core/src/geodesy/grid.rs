//! Graded quadtree grid and Dijkstra shortest paths for conformal densities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::densities::{density_upper, MetricKind};
use crate::domains::Domain;
use crate::error::{Error, Result};

/// Primitive lattice directions with sup-norm at most 3.
const OFFSETS: [(i32, i32); 32] = [
    (1, 0), (0, 1), (-1, 0), (0, -1),
    (1, 1), (-1, 1), (-1, -1), (1, -1),
    (2, 1), (1, 2), (-1, 2), (-2, 1), (-2, -1), (-1, -2), (1, -2), (2, -1),
    (3, 1), (1, 3), (-1, 3), (-3, 1), (-3, -1), (-1, -3), (1, -3), (3, -1),
    (3, 2), (2, 3), (-2, 3), (-3, 2), (-3, -2), (-2, -3), (2, -3), (3, -2),
];

/// Nodes per local boundary distance.
const RESOLUTION: f64 = 8.0;

#[derive(Debug, Clone)]
struct Cell {
    center: Complex64,
    half: f64,
    first_child: u32,
    node: u32,
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub p: Complex64,
    pub side: f64,
    pub rho: f64,
}

pub(crate) struct Grid<'a> {
    domain: &'a Domain,
    metric: MetricKind,
    floor: f64,
    window: (Complex64, Complex64),
    cells: Vec<Cell>,
    pub nodes: Vec<Node>,
    adjacency: Vec<Vec<(u32, f64)>>,
}

#[derive(Copy, Clone, PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra output over grid nodes.
pub(crate) struct Field {
    pub dist: Vec<f64>,
    pub pred: Vec<u32>,
}

impl<'a> Grid<'a> {
    /// Builds the grid over `window` (a box containing the region of interest),
    /// keeping nodes with boundary distance at least `floor`.
    pub fn build(
        domain: &'a Domain,
        metric: MetricKind,
        floor: f64,
        window: (Complex64, Complex64),
    ) -> Result<Self> {
        let (lo, hi) = window;
        let half = 0.5 * (hi.re - lo.re).max(hi.im - lo.im) * 1.001;
        let mut grid = Grid {
            domain,
            metric,
            floor,
            window,
            cells: vec![Cell {
                center: 0.5 * (lo + hi),
                half,
                first_child: NONE,
                node: NONE,
            }],
            nodes: Vec::new(),
            adjacency: Vec::new(),
        };
        let mut level = vec![0usize];
        while !level.is_empty() {
            // classify one tree level in parallel, then split sequentially
            let decisions: Vec<(bool, Option<Node>)> = level
                .par_iter()
                .map(|&i| grid.classify(&grid.cells[i]))
                .collect::<Result<_>>()?;
            let mut next = Vec::new();
            for (&i, (split, node)) in level.iter().zip(decisions) {
                if split {
                    let Cell { center, half, .. } = grid.cells[i];
                    let q = half / 2.0;
                    grid.cells[i].first_child = grid.cells.len() as u32;
                    for k in 0..4 {
                        let dx = if k & 1 == 1 { q } else { -q };
                        let dy = if k & 2 == 2 { q } else { -q };
                        next.push(grid.cells.len());
                        grid.cells.push(Cell {
                            center: center + Complex64::new(dx, dy),
                            half: q,
                            first_child: NONE,
                            node: NONE,
                        });
                    }
                } else if let Some(node) = node {
                    grid.cells[i].node = grid.nodes.len() as u32;
                    grid.nodes.push(node);
                }
            }
            level = next;
        }
        if grid.nodes.is_empty() {
            return Err(Error::DisconnectedGrid);
        }
        grid.connect();
        Ok(grid)
    }

    fn region_distance(&self, z: Complex64) -> f64 {
        let (lo, hi) = self.window;
        let sd = self.domain.signed_distance(z);
        if self.domain.is_bounded() {
            sd
        } else {
            sd.min(z.re - lo.re).min(hi.re - z.re).min(hi.im - z.im)
        }
    }

    fn classify(&self, cell: &Cell) -> Result<(bool, Option<Node>)> {
        let sd = self.region_distance(cell.center);
        let reach = cell.half * std::f64::consts::SQRT_2;
        if sd + reach < self.floor {
            return Ok((false, None));
        }
        let side = 2.0 * cell.half;
        if side > sd.max(self.floor) / RESOLUTION {
            return Ok((true, None));
        }
        if sd >= self.floor && sd > crate::domains::INTERIOR_MARGIN {
            let rho = self.rho(cell.center)?;
            return Ok((
                false,
                Some(Node {
                    p: cell.center,
                    side,
                    rho,
                }),
            ));
        }
        Ok((false, None))
    }

    pub fn rho(&self, z: Complex64) -> Result<f64> {
        density_upper(self.domain, self.metric, z, Complex64::new(1.0, 0.0))
    }

    /// Target spacing at `z`.
    pub fn spacing(&self, z: Complex64) -> f64 {
        self.region_distance(z).max(self.floor) / RESOLUTION
    }

    fn leaf(&self, p: Complex64) -> Option<usize> {
        let root = &self.cells[0];
        if (p.re - root.center.re).abs() > root.half || (p.im - root.center.im).abs() > root.half {
            return None;
        }
        let mut i = 0usize;
        loop {
            let cell = &self.cells[i];
            if cell.first_child == NONE {
                return Some(i);
            }
            let k = usize::from(p.re >= cell.center.re) + 2 * usize::from(p.im >= cell.center.im);
            i = cell.first_child as usize + k;
        }
    }

    /// Simpson length of the straight edge `a -> b` with known endpoint densities.
    fn edge_weight(&self, a: Complex64, ra: f64, b: Complex64, rb: f64) -> Option<f64> {
        let mid = 0.5 * (a + b);
        let rm = self.rho(mid).ok()?;
        Some((b - a).norm() / 6.0 * (ra + 4.0 * rm + rb))
    }

    fn connect(&mut self) {
        let edges: Vec<Vec<(u32, f64)>> = (0..self.nodes.len())
            .into_par_iter()
            .map(|u| {
                let node = &self.nodes[u];
                let mut out = Vec::with_capacity(OFFSETS.len());
                for &(i, j) in &OFFSETS {
                    let q = node.p + Complex64::new(f64::from(i), f64::from(j)) * node.side;
                    let Some(leaf) = self.leaf(q) else { continue };
                    let v = self.cells[leaf].node;
                    if v == NONE || v as usize == u {
                        continue;
                    }
                    let other = &self.nodes[v as usize];
                    // equal cells see each other; keep one copy of the edge
                    if other.side == node.side && (v as usize) < u {
                        continue;
                    }
                    if let Some(w) = self.edge_weight(node.p, node.rho, other.p, other.rho) {
                        out.push((v, w));
                    }
                }
                out
            })
            .collect();
        let mut adjacency: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.nodes.len()];
        for (u, list) in edges.iter().enumerate() {
            for &(v, w) in list {
                adjacency[u].push((v, w));
                adjacency[v as usize].push((u as u32, w));
            }
        }
        self.adjacency = adjacency;
    }

    fn collect_leaves(&self, i: usize, lo: Complex64, hi: Complex64, out: &mut Vec<u32>) {
        let cell = &self.cells[i];
        if cell.center.re + cell.half < lo.re
            || cell.center.re - cell.half > hi.re
            || cell.center.im + cell.half < lo.im
            || cell.center.im - cell.half > hi.im
        {
            return;
        }
        if cell.first_child == NONE {
            if cell.node != NONE {
                out.push(cell.node);
            }
            return;
        }
        for k in 0..4 {
            self.collect_leaves(cell.first_child as usize + k, lo, hi, out);
        }
    }

    /// Edges from an arbitrary interior point to the grid nodes around it.
    pub fn attach(&self, z: Complex64) -> Result<Vec<(u32, f64)>> {
        let rz = self.rho(z)?;
        let mut radius = 4.0 * self.spacing(z);
        for _ in 0..6 {
            let d = Complex64::new(radius, radius);
            let mut found = Vec::new();
            self.collect_leaves(0, z - d, z + d, &mut found);
            found.sort_unstable();
            let links: Vec<(u32, f64)> = found
                .into_iter()
                .filter(|&v| (self.nodes[v as usize].p - z).norm() <= radius)
                .filter_map(|v| {
                    let n = &self.nodes[v as usize];
                    self.edge_weight(z, rz, n.p, n.rho).map(|w| (v, w))
                })
                .collect();
            if !links.is_empty() {
                return Ok(links);
            }
            radius *= 2.0;
        }
        Err(Error::DisconnectedGrid)
    }

    /// Multi-source Dijkstra; `seeds` are `(node, initial distance)` pairs.
    pub fn dijkstra(&self, seeds: &[(u32, f64)]) -> Field {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![NONE; n];
        let mut heap = BinaryHeap::new();
        for &(v, d) in seeds {
            if d < dist[v as usize] {
                dist[v as usize] = d;
                heap.push(Entry(d, v));
            }
        }
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u as usize] {
                continue;
            }
            for &(v, w) in &self.adjacency[u as usize] {
                let nd = d + w;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    pred[v as usize] = u;
                    heap.push(Entry(nd, v));
                }
            }
        }
        Field { dist, pred }
    }

    /// Shortest grid path from `z` to `w`: `(length, polyline)`.
    pub fn shortest_path(&self, z: Complex64, w: Complex64) -> Result<(f64, Vec<Complex64>)> {
        let from = self.attach(z)?;
        let to = self.attach(w)?;
        let field = self.dijkstra(&from);
        let mut best = f64::INFINITY;
        let mut last = NONE;
        for &(v, wt) in &to {
            let d = field.dist[v as usize] + wt;
            if d < best {
                best = d;
                last = v;
            }
        }
        let mut direct = None;
        if (z - w).norm() <= 4.0 * self.spacing(z).min(self.spacing(w)) {
            if let (Ok(rz), Ok(rw)) = (self.rho(z), self.rho(w)) {
                direct = self.edge_weight(z, rz, w, rw);
            }
        }
        if let Some(d) = direct {
            if d <= best {
                return Ok((d, vec![z, w]));
            }
        }
        if !best.is_finite() {
            return Err(Error::DisconnectedGrid);
        }
        let mut chain = Vec::new();
        let mut v = last;
        while v != NONE {
            chain.push(self.nodes[v as usize].p);
            v = field.pred[v as usize];
        }
        chain.push(z);
        chain.reverse();
        chain.push(w);
        Ok((best, chain))
    }

    /// Value of a Dijkstra field at an arbitrary interior point.
    pub fn field_value(&self, field: &Field, z: Complex64) -> Result<f64> {
        let links = self.attach(z)?;
        Ok(links
            .iter()
            .map(|&(v, w)| field.dist[v as usize] + w)
            .fold(f64::INFINITY, f64::min))
    }

    /// Seeds for a field emanating from the given points.
    pub fn seeds(&self, sources: &[Complex64]) -> Result<Vec<(u32, f64)>> {
        let mut seeds = Vec::new();
        for &s in sources {
            seeds.extend(self.attach(s)?);
        }
        Ok(seeds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::c;

    #[test]
    fn offsets_are_distinct_primitive_directions() {
        let mut seen = std::collections::HashSet::new();
        for &(i, j) in &OFFSETS {
            assert!(seen.insert((i, j)));
            let g = (1..=3).rev().find(|d| i % d == 0 && j % d == 0).unwrap();
            assert_eq!(g, 1);
        }
    }

    #[test]
    fn disc_grid_path_close_to_closed_form() {
        let d = Domain::UnitDisc;
        let grid = Grid::build(&d, MetricKind::Kobayashi, 0.05, (c(-1.0, -1.0), c(1.0, 1.0))).unwrap();
        let (z, w) = (c(-0.5, 0.1), c(0.4, 0.3));
        let (len, path) = grid.shortest_path(z, w).unwrap();
        let rho = crate::densities::pseudohyperbolic(z, w).unwrap();
        let exact = rho.atanh();
        assert!((len - exact).abs() < 0.02 * exact, "{len} vs {exact}");
        assert_eq!(path[0], z);
        assert_eq!(*path.last().unwrap(), w);
    }
}
