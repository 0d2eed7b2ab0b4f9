//! ε-approximate k-nearest neighbors from hitting/commute bound intervals.
//!
//! A node is *guaranteed* when its upper bound is at most `X(1+ε)`, where `X`
//! never exceeds the true distance of the k-th nearest neighbor in range.
//! Nodes whose interval straddles that line are reported as undecided.

use rayon::prelude::*;

use crate::ap::{BoundsTable, GranchIndex};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Hitting,
    Commute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryStatus {
    Complete,
    /// The round budget ran out with undecided nodes left.
    Undecided,
}

/// A neighbor with its distance interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub node: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Neighbor {
    /// Point estimate used for ranking: interval midpoint.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Orders by midpoint, then upper bound, then node id.
pub fn ranking_order(a: &Neighbor, b: &Neighbor) -> std::cmp::Ordering {
    a.midpoint()
        .total_cmp(&b.midpoint())
        .then(a.upper.total_cmp(&b.upper))
        .then(a.node.cmp(&b.node))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnParams {
    pub k: usize,
    pub epsilon: f64,
    /// Re-expansion rounds allowed per commute query.
    pub max_rounds: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            k: 10,
            epsilon: 0.1,
            max_rounds: 25,
        }
    }
}

impl KnnParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Spec("k must be >= 1".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Spec(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborResult {
    pub query: usize,
    pub metric: Metric,
    /// Guaranteed neighbors, ascending by lower bound then id.
    pub entries: Vec<Neighbor>,
    /// Undecided set `B`: lower bound `<= X` but upper bound `> X(1+ε)`.
    pub undecided: Vec<Neighbor>,
    /// Threshold `X` in effect.
    pub threshold: f64,
    pub k: usize,
    pub epsilon: f64,
    pub horizon: usize,
    pub range: f64,
    pub rounds: usize,
    pub status: QueryStatus,
}

impl NeighborResult {
    pub fn guaranteed_ids(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.node).collect()
    }
}

fn by_lower(a: &Neighbor, b: &Neighbor) -> std::cmp::Ordering {
    a.lower.total_cmp(&b.lower).then(a.node.cmp(&b.node))
}

/// Splits sorted candidates into guaranteed and undecided for threshold `x`.
fn classify(cands: &[Neighbor], x: f64, epsilon: f64) -> (Vec<Neighbor>, Vec<Neighbor>) {
    let cut = x * (1.0 + epsilon);
    let guaranteed = cands.iter().copied().filter(|c| c.upper <= cut).collect();
    let undecided = cands
        .iter()
        .copied()
        .filter(|c| c.lower <= x && c.upper > cut)
        .collect();
    (guaranteed, undecided)
}

/// k nearest neighbors of `query` under truncated hitting time.
///
/// Candidates are nodes with `ho <= T'`. With candidates sorted by `ho`, the
/// threshold is `X = min(T', ho of the k-th candidate)`, or `T'` when there
/// are fewer than `k` candidates.
pub fn knn_hitting(
    bounds: &BoundsTable,
    query: usize,
    k: usize,
    epsilon: f64,
    range: f64,
) -> Result<NeighborResult> {
    KnnParams {
        k,
        epsilon,
        max_rounds: 0,
    }
    .validate()?;
    let n = bounds.node_count();
    if query >= n {
        return Err(Error::NodeOutOfRange { node: query, n });
    }
    let mut cands: Vec<Neighbor> = (0..n)
        .filter(|&j| j != query)
        .map(|j| Neighbor {
            node: j,
            lower: bounds.global_ho(query, j),
            upper: bounds.global_hp(query, j),
        })
        .filter(|c| c.lower <= range)
        .collect();
    cands.sort_by(by_lower);
    let x = if cands.len() >= k {
        cands[k - 1].lower.min(range)
    } else {
        range
    };
    let (entries, undecided) = classify(&cands, x, epsilon);
    let status = if undecided.is_empty() {
        QueryStatus::Complete
    } else {
        QueryStatus::Undecided
    };
    Ok(NeighborResult {
        query,
        metric: Metric::Hitting,
        entries,
        undecided,
        threshold: x,
        k,
        epsilon,
        horizon: bounds.horizon(),
        range,
        rounds: 0,
        status,
    })
}

/// One read-only pass of the commute query over the current bounds.
pub fn knn_commute_snapshot(index: &GranchIndex, query: usize, params: &KnnParams) -> NeighborResult {
    let range = index.params().range;
    let bounds = index.bounds();
    let mut cands: Vec<Neighbor> = index
        .ap()
        .commute_candidates(query)
        .into_iter()
        .map(|j| {
            let (co, cp) = bounds.commute_bounds(query, j);
            Neighbor {
                node: j,
                lower: co,
                upper: cp,
            }
        })
        .collect();
    cands.sort_by(by_lower);
    let cap = 2.0 * range;
    let x = if cands.len() < params.k {
        cap
    } else {
        cands[params.k - 1].lower.min(cap)
    };
    let (entries, undecided) = classify(&cands, x, params.epsilon);
    let status = if undecided.is_empty() {
        QueryStatus::Complete
    } else {
        QueryStatus::Undecided
    };
    NeighborResult {
        query,
        metric: Metric::Commute,
        entries,
        undecided,
        threshold: x,
        k: params.k,
        epsilon: params.epsilon,
        horizon: bounds.horizon(),
        range,
        rounds: 0,
        status,
    }
}

/// k nearest neighbors of `query` under truncated commute time.
///
/// Candidates are `AP(i,*) ∪ AP(*,i)`; nodes outside have `co >= 2T'`. While
/// undecided nodes remain and rounds are left, the neighborhoods of the query
/// and of every undecided node take one expansion step and the answer is
/// recomputed.
pub fn knn_commute(
    g: &Graph,
    index: &mut GranchIndex,
    query: usize,
    params: &KnnParams,
) -> Result<NeighborResult> {
    params.validate()?;
    g.check_node(query)?;
    let mut result = knn_commute_snapshot(index, query, params);
    let mut rounds = 0;
    while !result.undecided.is_empty() && rounds < params.max_rounds {
        let mut grew = false;
        let targets: Vec<usize> = std::iter::once(query)
            .chain(result.undecided.iter().map(|b| b.node))
            .collect();
        for x in targets {
            grew |= index.expand_step(g, x)?;
        }
        rounds += 1;
        result = knn_commute_snapshot(index, query, params);
        if !grew {
            break;
        }
    }
    result.rounds = rounds;
    Ok(result)
}

/// Answers the commute query for every node.
///
/// All queries are first answered read-only in parallel; queries left with
/// undecided nodes are then re-run with re-expansion one at a time in id
/// order, so the output does not depend on scheduling.
pub fn knn_commute_all(
    g: &Graph,
    index: &mut GranchIndex,
    params: &KnnParams,
) -> Result<Vec<NeighborResult>> {
    params.validate()?;
    let mut results: Vec<NeighborResult> = (0..g.node_count())
        .into_par_iter()
        .map(|i| knn_commute_snapshot(index, i, params))
        .collect();
    if params.max_rounds > 0 {
        for i in 0..results.len() {
            if !results[i].undecided.is_empty() {
                results[i] = knn_commute(g, index, i, params)?;
            }
        }
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ap::{expand_ap, GranchParams};
    use crate::bounds::ApInit;
    use crate::graph::parse_edge_list;
    use crate::oracle::TruncatedMatrix;

    fn k3() -> Graph {
        parse_edge_list("0 1\n1 2\n0 2\n", false).unwrap()
    }

    #[test]
    fn triangle_commute_exact() {
        let g = k3();
        let mut idx = expand_ap(&g, &GranchParams::new(3, 2.9)).unwrap();
        let params = KnnParams {
            k: 1,
            epsilon: 0.0,
            max_rounds: 5,
        };
        for i in 0..3 {
            let r = knn_commute(&g, &mut idx, i, &params).unwrap();
            assert_eq!(r.status, QueryStatus::Complete);
            // symmetric triangle: both other nodes tie
            assert_eq!(r.entries.len(), 2);
            for e in &r.entries {
                assert_eq!(e.lower, e.upper);
            }
        }
    }

    #[test]
    fn full_coverage_hitting_is_exact() {
        let g = parse_edge_list("0 1\n1 2\n2 3\n3 4\n4 0\n1 3\n", false).unwrap();
        let idx = expand_ap(&g, &GranchParams::new(5, 4.9).with_init(ApInit::Hops(10))).unwrap();
        let exact = TruncatedMatrix::compute(&g, 5).unwrap();
        for i in 0..5 {
            let r = knn_hitting(idx.bounds(), i, 2, 0.0, 4.9).unwrap();
            assert!(r.undecided.is_empty());
            let mut dists: Vec<f64> = (0..5).filter(|&j| j != i).map(|j| exact.get(i, j)).collect();
            dists.sort_by(f64::total_cmp);
            let x = dists[1].min(4.9);
            let want: Vec<usize> = (0..5)
                .filter(|&j| j != i && exact.get(i, j) <= x)
                .collect();
            let mut got = r.guaranteed_ids();
            got.sort_unstable();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn zero_epsilon_straddlers_are_undecided() {
        use crate::ap::BoundsTable;
        use crate::bounds::DestinationBounds;
        // query 0; destinations 1,2,3 with hand-set intervals for source 0
        let mk = |dst: usize, ho: f64, hp: f64| DestinationBounds {
            dst,
            horizon: 6,
            members: if dst == 0 { vec![0] } else { vec![0, dst] },
            ho: if dst == 0 { vec![0.0] } else { vec![ho, 0.0] },
            hp: if dst == 0 { vec![0.0] } else { vec![hp, 0.0] },
            boundary_min_tm1: 5.5,
            boundary_min_tm2: 4.5,
        };
        let table = BoundsTable::from_destinations(
            6,
            vec![mk(0, 0.0, 0.0), mk(1, 2.0, 2.0), mk(2, 3.0, 3.5), mk(3, 2.5, 4.0)],
        );
        let r = knn_hitting(&table, 0, 2, 0.0, 5.95).unwrap();
        assert_eq!(r.threshold, 2.5);
        assert_eq!(r.guaranteed_ids(), vec![1]);
        assert_eq!(r.undecided.iter().map(|b| b.node).collect::<Vec<_>>(), vec![3]);
        assert_eq!(r.status, QueryStatus::Undecided);
    }

    #[test]
    fn large_k_uses_range_cap() {
        let g = k3();
        let idx = expand_ap(&g, &GranchParams::new(3, 2.9)).unwrap();
        let params = KnnParams {
            k: 10,
            epsilon: 0.1,
            max_rounds: 0,
        };
        let r = knn_commute_snapshot(&idx, 0, &params);
        assert_eq!(r.threshold, 5.8);
        assert_eq!(r.entries.len(), 2);
    }

    #[test]
    fn parameter_errors() {
        let g = k3();
        let idx = expand_ap(&g, &GranchParams::new(3, 2.9)).unwrap();
        assert!(knn_hitting(idx.bounds(), 0, 0, 0.1, 2.9).is_err());
        assert!(knn_hitting(idx.bounds(), 0, 1, -0.1, 2.9).is_err());
        assert!(knn_hitting(idx.bounds(), 7, 1, 0.1, 2.9).is_err());
    }

    #[test]
    fn ranking_prefers_smaller_midpoint() {
        let a = Neighbor { node: 5, lower: 1.0, upper: 3.0 };
        let b = Neighbor { node: 1, lower: 1.0, upper: 2.6 };
        assert_eq!(ranking_order(&b, &a), std::cmp::Ordering::Less);
    }
}
