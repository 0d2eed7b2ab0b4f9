//! Seeded graph generators.
//!
//! All randomness comes from `ChaCha8Rng` (the ChaCha stream cipher with 8
//! rounds, as implemented by `rand_chacha`) seeded with `seed_from_u64`, so a
//! given seed produces the same graph on every platform.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default share of the edge budget spent on uniform long-range links.
pub const DEFAULT_LONG_RANGE: f64 = 0.05;

/// Parameters of a growth-rate-`dim` small-world graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub nodes: usize,
    /// Embedding dimension, which sets the growth rate of local balls.
    pub dim: usize,
    pub edges: usize,
    pub long_range: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(nodes: usize, dim: usize, edges: usize, seed: u64) -> Self {
        GenSpec {
            nodes,
            dim,
            edges,
            long_range: DEFAULT_LONG_RANGE,
            seed,
        }
    }

    pub fn with_long_range(mut self, fraction: f64) -> Self {
        self.long_range = fraction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes;
        if n == 0 {
            return Err(Error::Spec("graph needs at least one node".into()));
        }
        if self.dim == 0 {
            return Err(Error::Spec("dimension must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.long_range) {
            return Err(Error::Spec(format!(
                "long-range fraction must be in [0, 1], got {}",
                self.long_range
            )));
        }
        let max_edges = n * (n - 1) / 2;
        if self.edges > max_edges {
            return Err(Error::Spec(format!(
                "{} edges requested but {n} nodes allow at most {max_edges}",
                self.edges
            )));
        }
        if self.edges + 1 < n {
            return Err(Error::Spec(format!(
                "{} edges cannot connect {n} nodes",
                self.edges
            )));
        }
        Ok(())
    }
}

/// A generated graph and the coordinates its nodes were placed at.
#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: Graph,
    pub coords: Vec<Vec<f64>>,
}

impl Generated {
    /// `node x1 .. xd` lines.
    pub fn format_coords(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.coords.iter().enumerate() {
            let _ = write!(s, "{i}");
            for x in c {
                let _ = write!(s, " {x}");
            }
            s.push('\n');
        }
        s
    }

    pub fn save_coords(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.format_coords()).map_err(|e| Error::io(path, e))
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Uniform grid over the unit cube for k-nearest-neighbor lookups.
struct Grid<'a> {
    points: &'a [Vec<f64>],
    dim: usize,
    side: usize,
    cells: Vec<Vec<usize>>,
}

impl<'a> Grid<'a> {
    fn new(points: &'a [Vec<f64>], dim: usize) -> Self {
        let target = (points.len() as f64 / 2.0).max(1.0);
        let side = (target.powf(1.0 / dim as f64).floor() as usize).max(1);
        let mut grid = Grid {
            points,
            dim,
            side,
            cells: vec![Vec::new(); side.pow(dim as u32)],
        };
        for (i, p) in points.iter().enumerate() {
            let cell = grid.linear(&grid.cell_of(p));
            grid.cells[cell].push(i);
        }
        grid
    }

    fn cell_of(&self, p: &[f64]) -> Vec<usize> {
        p.iter()
            .map(|&x| ((x * self.side as f64) as usize).min(self.side - 1))
            .collect()
    }

    fn linear(&self, c: &[usize]) -> usize {
        c.iter().rev().fold(0, |acc, &x| acc * self.side + x)
    }

    /// Calls `f` for every cell at Chebyshev distance exactly `r` from `center`.
    fn for_ring(&self, center: &[usize], r: usize, f: &mut impl FnMut(usize)) {
        let r = r as isize;
        let mut offset = vec![-r; self.dim];
        loop {
            if offset.iter().any(|o| o.abs() == r) {
                let cell: Option<Vec<usize>> = center
                    .iter()
                    .zip(&offset)
                    .map(|(&c, &o)| {
                        let v = c as isize + o;
                        (v >= 0 && v < self.side as isize).then_some(v as usize)
                    })
                    .collect();
                if let Some(cell) = cell {
                    f(self.linear(&cell));
                }
            }
            let mut k = 0;
            loop {
                if k == self.dim {
                    return;
                }
                offset[k] += 1;
                if offset[k] <= r {
                    break;
                }
                offset[k] = -r;
                k += 1;
            }
        }
    }

    /// The `k` nearest other points of `i`, ascending by (distance, id).
    fn nearest(&self, i: usize, k: usize) -> Vec<usize> {
        let p = &self.points[i];
        let center = self.cell_of(p);
        let mut found: Vec<(f64, usize)> = Vec::new();
        for r in 0..=self.side {
            self.for_ring(&center, r, &mut |cell| {
                for &j in &self.cells[cell] {
                    if j != i {
                        found.push((dist2(p, &self.points[j]), j));
                    }
                }
            });
            if found.len() >= k {
                found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                // unvisited cells are at least r/side away along some axis
                let reach = r as f64 / self.side as f64;
                if found[k - 1].0 <= reach * reach {
                    break;
                }
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        found.truncate(k);
        found.into_iter().map(|(_, j)| j).collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
        true
    }
}

#[derive(Default)]
struct EdgeSet {
    adj: Vec<std::collections::HashSet<usize>>,
    list: Vec<(usize, usize)>,
}

impl EdgeSet {
    fn new(n: usize) -> Self {
        EdgeSet {
            adj: vec![Default::default(); n],
            list: Vec::new(),
        }
    }

    fn has(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    fn add(&mut self, a: usize, b: usize) -> bool {
        if a == b || self.has(a, b) {
            return false;
        }
        self.adj[a].insert(b);
        self.adj[b].insert(a);
        self.list.push((a.min(b), a.max(b)));
        true
    }
}

/// Places `n` nodes uniformly in the unit `dim`-cube and wires them:
/// a minimum spanning tree over nearby pairs for connectivity, then
/// round-robin nearest-neighbor links until the local budget is spent, then
/// uniformly random long-range links. The edge count is exactly `spec.edges`.
pub fn generate(spec: &GenSpec) -> Result<Generated> {
    spec.validate()?;
    let n = spec.nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let coords: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..spec.dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    if n == 1 {
        return Ok(Generated {
            graph: Graph::from_edges(1, false, &[])?,
            coords,
        });
    }

    let tree_edges = n - 1;
    let mut long = (spec.long_range * spec.edges as f64).round() as usize;
    long = long.min(spec.edges - tree_edges);
    let local_budget = spec.edges - long;

    let grid = Grid::new(&coords, spec.dim);
    let avg_degree = 2.0 * spec.edges as f64 / n as f64;
    let mut k = ((2.0 * avg_degree).ceil() as usize + 4).clamp(1, n - 1);
    let mut knn: Vec<Vec<usize>> = (0..n).map(|i| grid.nearest(i, k)).collect();

    let mut edges = EdgeSet::new(n);

    // spanning tree: Kruskal over candidate near pairs, then bridge leftovers
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, list) in knn.iter().enumerate() {
        for &j in list {
            if i < j || !knn[j].contains(&i) {
                cand.push((dist2(&coords[i], &coords[j]), i.min(j), i.max(j)));
            }
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    cand.dedup_by(|a, b| a.1 == b.1 && a.2 == b.2);
    let mut uf = UnionFind((0..n).collect());
    for &(_, a, b) in &cand {
        if uf.union(a, b) {
            edges.add(a, b);
        }
    }
    loop {
        let root0 = uf.find(0);
        let Some(stray) = (0..n).find(|&v| uf.find(v) != root0) else {
            break;
        };
        // closest pair between the stray node's component and the rest
        let comp = uf.find(stray);
        let members: Vec<usize> = (0..n).filter(|&v| uf.find(v) == comp).collect();
        let mut best = (f64::INFINITY, 0, 0);
        for &a in &members {
            for b in 0..n {
                if uf.find(b) != comp {
                    let d = dist2(&coords[a], &coords[b]);
                    if d < best.0 {
                        best = (d, a, b);
                    }
                }
            }
        }
        uf.union(best.1, best.2);
        edges.add(best.1, best.2);
    }

    // local links: every node in turn claims its next-nearest non-neighbor
    let mut cursor = vec![0usize; n];
    while edges.list.len() < local_budget {
        let mut progress = false;
        for u in 0..n {
            if edges.list.len() >= local_budget {
                break;
            }
            while cursor[u] < knn[u].len() && edges.has(u, knn[u][cursor[u]]) {
                cursor[u] += 1;
            }
            if cursor[u] < knn[u].len() {
                edges.add(u, knn[u][cursor[u]]);
                cursor[u] += 1;
                progress = true;
            }
        }
        if !progress {
            if k == n - 1 {
                break;
            }
            k = (2 * k).min(n - 1);
            knn = (0..n).map(|i| grid.nearest(i, k)).collect();
        }
    }

    // long-range links between uniformly random non-adjacent pairs
    while edges.list.len() < spec.edges {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        edges.add(a, b);
    }

    let mut list = edges.list;
    list.sort_unstable();
    let weighted: Vec<_> = list.into_iter().map(|(a, b)| (a, b, 1.0)).collect();
    Ok(Generated {
        graph: Graph::from_edges(n, false, &weighted)?,
        coords,
    })
}

/// What [`inject_noise`] changed.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    pub hub: usize,
    pub added: Vec<usize>,
}

/// Picks one hub uniformly at random and links it to `ceil(fraction * (n-1))`
/// uniformly chosen nodes it is not yet adjacent to (fewer if not enough
/// remain).
pub fn inject_noise(g: &Graph, fraction: f64, seed: u64) -> Result<(Graph, NoiseReport)> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Spec(format!("noise fraction must be in (0, 1], got {fraction}")));
    }
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Spec("cannot add noise to an empty graph".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hub = rng.random_range(0..n);
    let want = (fraction * (n - 1) as f64 - 1e-9).ceil().max(0.0) as usize;
    let open: Vec<usize> = (0..n).filter(|&v| v != hub && !g.has_edge(hub, v)).collect();
    if open.is_empty() {
        log::warn!("hub {hub} is already adjacent to every node; graph unchanged");
        return Ok((
            g.clone(),
            NoiseReport {
                hub,
                added: Vec::new(),
            },
        ));
    }
    let take = want.min(open.len());
    let mut added: Vec<usize> = sample(&mut rng, open.len(), take)
        .into_iter()
        .map(|k| open[k])
        .collect();
    added.sort_unstable();
    let extra: Vec<_> = added.iter().map(|&v| (hub, v, 1.0)).collect();
    Ok((g.with_added_edges(&extra)?, NoiseReport { hub, added }))
}

/// Random connected undirected graph for test fixtures: a random spanning
/// tree plus `extra` random edges. With `weighted`, weights are drawn from
/// `[0.25, 4)`; otherwise all weights are 1.
pub fn random_connected(nodes: usize, extra: usize, weighted: bool, seed: u64) -> Result<Graph> {
    if nodes == 0 {
        return Err(Error::Spec("graph needs at least one node".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = EdgeSet::new(nodes);
    for v in 1..nodes {
        let u = rng.random_range(0..v);
        edges.add(u, v);
    }
    let max = nodes * (nodes - 1) / 2;
    let target = (nodes - 1 + extra).min(max);
    while edges.list.len() < target {
        let a = rng.random_range(0..nodes);
        let b = rng.random_range(0..nodes);
        edges.add(a, b);
    }
    let list: Vec<_> = edges
        .list
        .iter()
        .map(|&(a, b)| {
            let w = if weighted {
                rng.random_range(0.25..4.0)
            } else {
                1.0
            };
            (a, b, w)
        })
        .collect();
    Graph::from_edges(nodes, false, &list)
}

/// Random strongly connected directed graph: a random Hamiltonian cycle plus
/// `extra` random arcs.
pub fn random_strongly_connected(nodes: usize, extra: usize, seed: u64) -> Result<Graph> {
    if nodes < 2 {
        return Err(Error::Spec("need at least two nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..nodes).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let mut arcs = std::collections::BTreeSet::new();
    for k in 0..nodes {
        arcs.insert((order[k], order[(k + 1) % nodes]));
    }
    let target = (arcs.len() + extra).min(nodes * (nodes - 1));
    while arcs.len() < target {
        let a = rng.random_range(0..nodes);
        let b = rng.random_range(0..nodes);
        if a != b {
            arcs.insert((a, b));
        }
    }
    let list: Vec<_> = arcs
        .into_iter()
        .map(|(a, b)| (a, b, rng.random_range(0.5..2.0)))
        .collect();
    Graph::from_edges(nodes, true, &list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::format_edge_list;

    #[test]
    fn table_one_size() {
        let g = generate(&GenSpec::new(1000, 2, 2700, 7)).unwrap().graph;
        assert_eq!(g.node_count(), 1000);
        assert_eq!(g.edge_count(), 2700);
        assert!(g.is_connected());
    }

    #[test]
    fn tiny_path() {
        let spec = GenSpec::new(4, 1, 3, 1).with_long_range(0.0);
        let gen = generate(&spec).unwrap();
        assert_eq!(gen.graph.edge_count(), 3);
        assert!(gen.graph.is_connected());
        // the minimum spanning tree on a line is the path in coordinate order
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| gen.coords[a][0].total_cmp(&gen.coords[b][0]));
        for w in order.windows(2) {
            assert!(gen.graph.has_edge(w[0], w[1]));
        }
    }

    #[test]
    fn deterministic() {
        let spec = GenSpec::new(300, 3, 800, 42);
        let a = format_edge_list(&generate(&spec).unwrap().graph);
        let b = format_edge_list(&generate(&spec).unwrap().graph);
        assert_eq!(a, b);
        let c = format_edge_list(&generate(&GenSpec { seed: 43, ..spec }).unwrap().graph);
        assert_ne!(a, c);
    }

    #[test]
    fn spec_errors() {
        assert!(generate(&GenSpec::new(4, 2, 7, 0)).is_err());
        assert!(generate(&GenSpec::new(4, 2, 2, 0)).is_err());
        assert!(generate(&GenSpec::new(4, 0, 3, 0)).is_err());
        assert!(generate(&GenSpec::new(4, 2, 3, 0).with_long_range(1.5)).is_err());
        // complete graph is reachable
        assert_eq!(generate(&GenSpec::new(5, 2, 10, 0)).unwrap().graph.edge_count(), 10);
    }

    #[test]
    fn grid_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in 1..=4 {
            let pts: Vec<Vec<f64>> = (0..200)
                .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
                .collect();
            let grid = Grid::new(&pts, dim);
            for i in (0..200).step_by(17) {
                let mut brute: Vec<(f64, usize)> = (0..200)
                    .filter(|&j| j != i)
                    .map(|j| (dist2(&pts[i], &pts[j]), j))
                    .collect();
                brute.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let want: Vec<usize> = brute.iter().take(9).map(|x| x.1).collect();
                assert_eq!(grid.nearest(i, 9), want, "dim {dim} node {i}");
            }
        }
    }

    #[test]
    fn noise_hub() {
        let g = generate(&GenSpec::new(100, 2, 270, 5)).unwrap().graph;
        let (noisy, report) = inject_noise(&g, 0.2, 9).unwrap();
        assert_eq!(report.added.len(), 20);
        assert_eq!(noisy.edge_count(), g.edge_count() + 20);
        for &v in &report.added {
            assert!(!g.has_edge(report.hub, v));
            assert!(noisy.has_edge(report.hub, v));
        }
        for (a, b, _) in g.edges() {
            assert!(noisy.has_edge(a, b));
        }
        let (again, report2) = inject_noise(&g, 0.2, 9).unwrap();
        assert_eq!(report, report2);
        assert_eq!(again, noisy);
    }

    #[test]
    fn noise_saturated_hub_is_noop() {
        let k4 = Graph::from_edges(
            4,
            false,
            &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)],
        )
        .unwrap();
        let (same, report) = inject_noise(&k4, 0.5, 1).unwrap();
        assert!(report.added.is_empty());
        assert_eq!(same, k4);
        assert!(inject_noise(&k4, 0.0, 1).is_err());
    }

    #[test]
    fn fixtures_are_connected() {
        for seed in 0..10 {
            let g = random_connected(30, 20, true, seed).unwrap();
            assert!(g.is_connected());
            assert_eq!(g.edge_count(), 49);
            let d = random_strongly_connected(20, 15, seed).unwrap();
            for v in 0..20 {
                assert_eq!(d.reverse_ball(v, 20).len(), 20);
            }
        }
    }
}
