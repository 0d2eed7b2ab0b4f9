//! Immutable weighted sparse graph in compressed sparse row form.
//!
//! Nodes are dense ids `0..n`. Each adjacency row is sorted by neighbor id, so
//! every traversal in the crate visits neighbors in the same order.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl Csr {
    fn from_sorted(n: usize, mut arcs: Vec<(usize, usize, f64)>) -> Self {
        arcs.sort_by_key(|a| (a.0, a.1));
        let mut offsets = vec![0usize; n + 1];
        for &(s, _, _) in &arcs {
            offsets[s + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = arcs.iter().map(|a| a.1).collect();
        let weights = arcs.iter().map(|a| a.2).collect();
        Csr {
            offsets,
            targets,
            weights,
        }
    }

    #[inline]
    fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }
}

/// Weighted graph with per-node degrees `d(i) = sum_j w_ij` and volume `sum_i d(i)`.
///
/// For directed graphs the degree is the out-weight and an additional reverse
/// adjacency is kept so that in-neighbors can be enumerated.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    directed: bool,
    out: Csr,
    rev: Option<Csr>,
    degrees: Vec<f64>,
    volume: f64,
}

impl Graph {
    /// Builds a graph from an edge list. Undirected edges are given once and
    /// stored in both directions.
    pub fn from_edges(n: usize, directed: bool, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut arcs = Vec::with_capacity(if directed { edges.len() } else { 2 * edges.len() });
        for &(s, t, w) in edges {
            if s >= n || t >= n {
                return Err(Error::Validation(format!(
                    "edge ({s}, {t}) references a node >= n = {n}"
                )));
            }
            if s == t {
                return Err(Error::Validation(format!("self-loop on node {s}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Validation(format!(
                    "edge ({s}, {t}) has non-positive or non-finite weight {w}"
                )));
            }
            arcs.push((s, t, w));
            if !directed {
                arcs.push((t, s, w));
            }
        }
        let out = Csr::from_sorted(n, arcs);
        for i in 0..n {
            let r = out.range(i);
            if let Some(pair) = out.targets[r].windows(2).find(|p| p[0] == p[1]) {
                return Err(Error::Validation(format!(
                    "duplicate edge ({i}, {})",
                    pair[0]
                )));
            }
        }
        let rev = directed.then(|| {
            let mut back = Vec::with_capacity(out.targets.len());
            for i in 0..n {
                for e in out.range(i) {
                    back.push((out.targets[e], i, out.weights[e]));
                }
            }
            Csr::from_sorted(n, back)
        });
        let degrees: Vec<f64> = (0..n)
            .map(|i| out.weights[out.range(i)].iter().sum())
            .collect();
        let volume = degrees.iter().sum();
        Ok(Graph {
            n,
            directed,
            out,
            rev,
            degrees,
            volume,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Number of edges; each undirected edge counts once.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.out.targets.len()
        } else {
            self.out.targets.len() / 2
        }
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Out-neighbors of `i`, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.out.targets[self.out.range(i)]
    }

    /// Weights aligned with [`Graph::neighbors`].
    pub fn weights(&self, i: usize) -> &[f64] {
        &self.out.weights[self.out.range(i)]
    }

    /// Nodes with an edge into `i`, ascending. Same as `neighbors` when undirected.
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        match &self.rev {
            Some(rev) => &rev.targets[rev.range(i)],
            None => self.neighbors(i),
        }
    }

    /// `(neighbor, p_ij)` pairs for the walk leaving `i`. Empty for isolated nodes.
    pub fn transitions(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let d = self.degrees[i];
        self.neighbors(i)
            .iter()
            .zip(self.weights(i))
            .map(move |(&j, &w)| (j, w / d))
    }

    pub fn edge_weight(&self, i: usize, j: usize) -> Option<f64> {
        let nbs = self.neighbors(i);
        nbs.binary_search(&j).ok().map(|k| self.weights(i)[k])
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Edge list with each undirected edge reported once as `(min, max, w)`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n {
            for (&j, &w) in self.neighbors(i).iter().zip(self.weights(i)) {
                if self.directed || i < j {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub(crate) fn check_node(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: i, n: self.n })
        }
    }

    /// `w_ij / d(i)`, zero when there is no edge.
    pub fn transition_prob(&self, i: usize, j: usize) -> Result<f64> {
        self.check_node(i)?;
        self.check_node(j)?;
        if self.degrees[i] <= 0.0 {
            return Err(Error::DegenerateNode(i));
        }
        Ok(self.edge_weight(i, j).map_or(0.0, |w| w / self.degrees[i]))
    }

    /// Hop distance from `src` to every node reachable within `max_hops`
    /// along out-edges. Nodes farther away are absent.
    pub fn bfs_hops(&self, src: usize, max_hops: usize) -> Result<BTreeMap<usize, usize>> {
        self.check_node(src)?;
        let mut dist = BTreeMap::new();
        for (v, h) in self.bfs_ball(src, max_hops) {
            dist.insert(v, h);
        }
        Ok(dist)
    }

    /// Same as [`Graph::bfs_hops`] but returns `(node, hops)` in visit order.
    pub fn bfs_ball(&self, src: usize, max_hops: usize) -> Vec<(usize, usize)> {
        self.ball(src, max_hops, false)
    }

    /// Nodes that reach `dst` within `max_hops` steps (BFS over in-edges).
    pub fn reverse_ball(&self, dst: usize, max_hops: usize) -> Vec<(usize, usize)> {
        self.ball(dst, max_hops, true)
    }

    fn ball(&self, src: usize, max_hops: usize, reverse: bool) -> Vec<(usize, usize)> {
        let mut seen = vec![false; self.n];
        let mut order = vec![(src, 0)];
        let mut queue = VecDeque::from([(src, 0usize)]);
        seen[src] = true;
        while let Some((v, h)) = queue.pop_front() {
            if h == max_hops {
                continue;
            }
            let nbs = if reverse {
                self.in_neighbors(v)
            } else {
                self.neighbors(v)
            };
            for &u in nbs {
                if !seen[u] {
                    seen[u] = true;
                    order.push((u, h + 1));
                    queue.push_back((u, h + 1));
                }
            }
        }
        order
    }

    /// Component label per node (weak components for directed graphs).
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &u in self.neighbors(v).iter().chain(self.in_neighbors(v)) {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.components().iter().all(|&c| c == 0)
    }

    /// Returns a copy with the given extra edges added.
    pub fn with_added_edges(&self, extra: &[(usize, usize, f64)]) -> Result<Graph> {
        let mut edges = self.edges();
        edges.extend_from_slice(extra);
        Graph::from_edges(self.n, self.directed, &edges)
    }

    /// Returns a copy without the given edges (matched by endpoints).
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Result<Graph> {
        let key = |a: usize, b: usize| {
            if self.directed || a < b {
                (a, b)
            } else {
                (b, a)
            }
        };
        let drop: std::collections::HashSet<(usize, usize)> =
            removed.iter().map(|&(a, b)| key(a, b)).collect();
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .filter(|&(a, b, _)| !drop.contains(&key(a, b)))
            .collect();
        Graph::from_edges(self.n, self.directed, &edges)
    }
}

/// Parses the edge-list text format: `src dst [weight]` per line, `#`
/// comments, and an optional first line `# nodes=N`.
pub fn parse_edge_list(text: &str, directed: bool) -> Result<Graph> {
    let mut declared_n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut max_id: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if idx == 0 {
                if let Some(v) = comment.trim().strip_prefix("nodes=") {
                    let n = v.trim().parse::<usize>().map_err(|e| Error::Parse {
                        line: line_no,
                        msg: format!("bad node count '{v}': {e}"),
                    })?;
                    declared_n = Some(n);
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 'src dst [weight]', got {} fields", fields.len()),
            });
        }
        let id = |s: &str, what: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad {what} '{s}': {e}"),
            })
        };
        let s = id(fields[0], "src")?;
        let t = id(fields[1], "dst")?;
        let w = match fields.get(2) {
            Some(f) => f.parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad weight '{f}': {e}"),
            })?,
            None => 1.0,
        };
        if s == t {
            return Err(Error::Validation(format!("line {line_no}: self-loop on node {s}")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::Validation(format!(
                "line {line_no}: weight must be positive, got {w}"
            )));
        }
        max_id = Some(max_id.map_or(s.max(t), |m| m.max(s).max(t)));
        edges.push((s, t, w));
    }
    let needed = max_id.map_or(0, |m| m + 1);
    let n = match declared_n {
        Some(n) if n < needed => {
            return Err(Error::Validation(format!(
                "header declares {n} nodes but id {} appears",
                needed - 1
            )))
        }
        Some(n) => n,
        None => needed,
    };
    Graph::from_edges(n, directed, &edges)
}

pub fn load_edge_list(path: impl AsRef<Path>, directed: bool) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, directed)
}

/// Renders a graph in the edge-list format, always with a `# nodes=N` header.
pub fn format_edge_list(g: &Graph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# nodes={}", g.node_count());
    for (a, b, w) in g.edges() {
        let _ = writeln!(s, "{a} {b} {w}");
    }
    s
}

pub fn save_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(format_edge_list(g).as_bytes())
        .map_err(|e| Error::io(path, e))
}
