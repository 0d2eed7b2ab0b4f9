//! Optimistic and pessimistic truncated hitting times inside one bounded
//! neighborhood.
//!
//! For a destination `dst` with neighborhood `N`, every source in `N` gets a
//! lower bound `ho` and an upper bound `hp` on `h^T(src, dst)`. Probability
//! mass that leaves `N` is charged the remaining horizon for `hp` and the
//! cheapest possible return through the boundary for `ho`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Initial contents of a neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApInit {
    /// The destination and every node with an edge into it.
    #[default]
    OneHop,
    /// Every node within `p` hops of the destination (along edges toward it).
    Hops(usize),
}

/// `AP(*, dst)`: the nodes whose hitting times to `dst` are tracked.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    dst: usize,
    members: Vec<usize>,
    index: HashMap<usize, usize>,
    boundary: Vec<usize>,
}

impl Neighborhood {
    pub fn new(g: &Graph, dst: usize, init: ApInit) -> Result<Self> {
        g.check_node(dst)?;
        let hops = match init {
            ApInit::OneHop => 1,
            ApInit::Hops(p) => p.max(1),
        };
        let members = g.reverse_ball(dst, hops).into_iter().map(|(v, _)| v).collect();
        Ok(Self::from_members(g, dst, members))
    }

    /// Builds a neighborhood from an explicit member list (`dst` is added if
    /// missing).
    pub fn from_members(g: &Graph, dst: usize, mut members: Vec<usize>) -> Self {
        members.push(dst);
        members.sort_unstable();
        members.dedup();
        let mut nb = Neighborhood {
            dst,
            members,
            index: HashMap::new(),
            boundary: Vec::new(),
        };
        nb.reindex(g);
        nb
    }

    fn reindex(&mut self, g: &Graph) {
        self.index = self
            .members
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, k))
            .collect();
        self.boundary = self.recompute_boundary(g);
    }

    /// Members that can be entered from outside: some node outside the set
    /// has an edge into them. For undirected graphs these are exactly the
    /// members with a neighbor outside.
    pub fn recompute_boundary(&self, g: &Graph) -> Vec<usize> {
        self.members
            .iter()
            .copied()
            .filter(|&v| g.in_neighbors(v).iter().any(|u| !self.index.contains_key(u)))
            .collect()
    }

    pub fn dst(&self) -> usize {
        self.dst
    }

    /// Sorted member ids.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.index.contains_key(&v)
    }

    /// Local position of `v` in [`Neighborhood::members`].
    pub fn position(&self, v: usize) -> Option<usize> {
        self.index.get(&v).copied()
    }

    /// Sorted boundary ids.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    fn is_boundary(&self, v: usize) -> bool {
        self.boundary.binary_search(&v).is_ok()
    }

    /// Adds `nodes` to the set. Returns the ids that were not already members.
    pub fn insert(&mut self, g: &Graph, nodes: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut added: Vec<usize> = nodes
            .into_iter()
            .filter(|v| !self.index.contains_key(v))
            .collect();
        added.sort_unstable();
        added.dedup();
        if !added.is_empty() {
            self.members.extend_from_slice(&added);
            self.members.sort_unstable();
            self.reindex(g);
        }
        added
    }
}

/// Final bounds for one destination, aligned with its sorted members.
#[derive(Debug, Clone, PartialEq)]
pub struct DestinationBounds {
    pub dst: usize,
    pub horizon: usize,
    pub members: Vec<usize>,
    pub ho: Vec<f64>,
    pub hp: Vec<f64>,
    /// Smallest `ho` over the boundary at horizon `T-1` (infinite when the
    /// boundary is empty).
    pub boundary_min_tm1: f64,
    /// Same at horizon `T-2`.
    pub boundary_min_tm2: f64,
}

impl DestinationBounds {
    /// `lb(dst) = 1 + min_{p in boundary} ho^{T-1}(p, dst)`, capped at `T`.
    /// Lower bound on `h^T` from any node outside the neighborhood.
    pub fn lb(&self) -> f64 {
        (1.0 + self.boundary_min_tm1).min(self.horizon as f64)
    }

    pub fn position(&self, src: usize) -> Option<usize> {
        self.members.binary_search(&src).ok()
    }

    /// Lower bound on `h^T(src, dst)` for any source.
    pub fn ho(&self, src: usize) -> f64 {
        if src == self.dst {
            return 0.0;
        }
        match self.position(src) {
            Some(k) => self.ho[k],
            None => self.lb(),
        }
    }

    /// Upper bound on `h^T(src, dst)` for any source.
    pub fn hp(&self, src: usize) -> f64 {
        if src == self.dst {
            return 0.0;
        }
        match self.position(src) {
            Some(k) => self.hp[k],
            None => self.horizon as f64,
        }
    }
}

/// Result of one bound sweep. Besides the final bounds it keeps `ho` at
/// horizon `T-1` for boundary members, which drives neighborhood expansion.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub bounds: DestinationBounds,
    /// `(boundary node, ho^{T-1})`, ascending by node id.
    pub boundary_ho_prev: Vec<(usize, f64)>,
}

impl Sweep {
    /// Boundary nodes ordered by `ho^{T-1}` ascending, ties by smallest id.
    pub fn expansion_order(&self) -> Vec<usize> {
        let mut order = self.boundary_ho_prev.clone();
        order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        order.into_iter().map(|(v, _)| v).collect()
    }
}

struct LocalRow {
    // (local index, p) for neighbors inside the neighborhood
    inside: Vec<(usize, f64)>,
    leaks: bool,
    prob: f64,
}

/// Runs the two-array bound sweep over `AP(*, dst)` for horizons `2..=T`.
///
/// `ho`/`hp` start at 1 (0 at `dst`). At every horizon `t` each source reads
/// the previous horizon's values of its in-neighborhood successors; mass that
/// escapes is charged `1 + minvals[t-2]` (optimistic) or `t-1` (pessimistic),
/// where `minvals[t]` is the smallest `ho^t` over boundary members.
pub fn compute_bounds(g: &Graph, nb: &Neighborhood, horizon: usize) -> Result<Sweep> {
    if horizon < 2 {
        return Err(Error::Spec(format!("horizon must be >= 2, got {horizon}")));
    }
    let dst = nb.dst();
    let m = nb.len();
    let dst_local = nb.position(dst).expect("destination is always a member");
    let mut rows = Vec::with_capacity(m);
    for &src in nb.members() {
        if src != dst && g.degree(src) <= 0.0 {
            return Err(Error::DegenerateNode(src));
        }
        let mut inside = Vec::new();
        let mut prob = 0.0;
        let mut leaks = false;
        for (k, p) in g.transitions(src) {
            match nb.position(k) {
                Some(local) => {
                    inside.push((local, p));
                    prob += p;
                }
                None => leaks = true,
            }
        }
        rows.push(LocalRow {
            inside,
            leaks,
            prob,
        });
    }
    let on_boundary: Vec<bool> = nb.members().iter().map(|&v| nb.is_boundary(v)).collect();

    let mut ho = vec![1.0; m];
    let mut hp = vec![1.0; m];
    ho[dst_local] = 0.0;
    hp[dst_local] = 0.0;
    let mut ho_last = ho.clone();
    let mut hp_last = hp.clone();
    let mut minvals = vec![0.0f64; horizon + 1];
    minvals[1] = 1.0;
    let mut ho_prev = ho.clone();

    for t in 2..=horizon {
        // a walk outside the set at horizon t-1 needs at least one step to
        // re-enter through the boundary, and never more than t-1 steps total
        let outside_lo = (1.0 + minvals[t - 2]).min((t - 1) as f64);
        let outside_hi = (t - 1) as f64;
        let tm1 = (t - 1) as f64;
        let mut min = f64::INFINITY;
        for (k, row) in rows.iter().enumerate() {
            if k == dst_local {
                continue;
            }
            // same deficit form as the exact DP: t - sum p (t-1 - h)
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for &(local, p) in &row.inside {
                s1 += p * (tm1 - ho_last[local]);
                s2 += p * (tm1 - hp_last[local]);
            }
            let leak = if row.leaks { 1.0 - row.prob } else { 0.0 };
            ho[k] = t as f64 - s1 - leak * (tm1 - outside_lo);
            hp[k] = t as f64 - s2 - leak * (tm1 - outside_hi);
            if on_boundary[k] && ho[k] <= min {
                min = ho[k];
            }
        }
        if on_boundary[dst_local] {
            min = min.min(0.0);
        }
        minvals[t] = min;
        if t == horizon {
            ho_prev.copy_from_slice(&ho_last);
        }
        ho_last.copy_from_slice(&ho);
        hp_last.copy_from_slice(&hp);
    }

    let boundary_ho_prev = nb
        .boundary()
        .iter()
        .map(|&v| (v, ho_prev[nb.position(v).unwrap()]))
        .collect();
    Ok(Sweep {
        bounds: DestinationBounds {
            dst,
            horizon,
            members: nb.members().to_vec(),
            ho,
            hp,
            boundary_min_tm1: minvals[horizon - 1],
            boundary_min_tm2: minvals[horizon - 2],
        },
        boundary_ho_prev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;
    use crate::oracle::hitting_column_dp;

    fn p4() -> Graph {
        parse_edge_list("0 1\n1 2\n2 3\n", false).unwrap()
    }

    #[test]
    fn path4_hand_sweep() {
        let g = p4();
        let nb = Neighborhood::new(&g, 3, ApInit::OneHop).unwrap();
        assert_eq!(nb.members(), &[2, 3]);
        assert_eq!(nb.boundary(), &[2]);
        let sw = compute_bounds(&g, &nb, 3).unwrap();
        let b = &sw.bounds;
        assert_eq!(b.ho(2), 2.0);
        assert_eq!(b.hp(2), 2.0);
        assert_eq!(b.boundary_min_tm1, 1.5);
        assert_eq!(b.boundary_min_tm2, 1.0);
        assert_eq!(b.lb(), 2.5);
        assert_eq!(b.ho(1), 2.5);
        assert_eq!(b.hp(1), 3.0);
        assert_eq!(b.ho(3), 0.0);
        assert_eq!(b.hp(3), 0.0);
        assert_eq!(sw.boundary_ho_prev, vec![(2, 1.5)]);
    }

    #[test]
    fn full_coverage_matches_dp_exactly() {
        let g = parse_edge_list("0 1 2\n1 2 1\n2 3 0.5\n3 0 1\n0 2 3\n3 4 1\n", false).unwrap();
        for dst in 0..g.node_count() {
            let nb = Neighborhood::new(&g, dst, ApInit::Hops(10)).unwrap();
            assert!(nb.boundary().is_empty());
            let sw = compute_bounds(&g, &nb, 7).unwrap();
            let exact = hitting_column_dp(&g, dst, 7).unwrap();
            for i in 0..g.node_count() {
                assert_eq!(sw.bounds.ho(i), exact.get(i));
                assert_eq!(sw.bounds.hp(i), exact.get(i));
            }
            assert_eq!(sw.bounds.lb(), 7.0);
        }
    }

    #[test]
    fn directed_boundary_uses_entry_edges() {
        // 0 -> 1 -> 2 -> 0, plus 3 -> 2
        let g = parse_edge_list("0 1\n1 2\n2 0\n3 2\n", true).unwrap();
        let nb = Neighborhood::new(&g, 2, ApInit::OneHop).unwrap();
        assert_eq!(nb.members(), &[1, 2, 3]);
        assert_eq!(nb.boundary(), &[1]);
    }

    #[test]
    fn degenerate_member_is_an_error() {
        // 0 -> 1 and 2 -> 1; nothing reaches 0 and 1 is a sink
        let g = parse_edge_list("0 1\n2 1\n", true).unwrap();
        let nb = Neighborhood::new(&g, 0, ApInit::Hops(3)).unwrap();
        assert_eq!(nb.members(), &[0]);
        let nb = Neighborhood::from_members(&g, 0, vec![1]);
        assert!(matches!(compute_bounds(&g, &nb, 3), Err(Error::DegenerateNode(1))));
    }

    #[test]
    fn insert_keeps_sorted_and_recomputes_boundary() {
        let g = p4();
        let mut nb = Neighborhood::new(&g, 3, ApInit::OneHop).unwrap();
        let added = nb.insert(&g, [1, 3, 2]);
        assert_eq!(added, vec![1]);
        assert_eq!(nb.members(), &[1, 2, 3]);
        assert_eq!(nb.boundary(), &[1]);
        assert_eq!(nb.boundary(), nb.recompute_boundary(&g).as_slice());
    }
}
