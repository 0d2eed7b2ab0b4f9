//! Link-prediction evaluation: hold out edges, score candidate pairs with a
//! proximity measure, and average per-node AUC.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ap::{expand_ap, GranchIndex, GranchParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::knn::{knn_commute, KnnParams};
use crate::oracle::{StuckWalk, TruncatedMatrix, DENSE_CAP};

/// Candidate pairs are drawn from this many hops around each evaluated node.
pub const CANDIDATE_HOPS: usize = 4;

/// Range thresholds `T'` used for the standard horizons.
pub fn default_range(horizon: usize) -> f64 {
    match horizon {
        3 => 2.9,
        6 => 5.95,
        10 => 9.75,
        t => t as f64 - 0.05 * t as f64,
    }
}

/// A training graph and the edges removed from it.
#[derive(Debug, Clone)]
pub struct HoldoutSplit {
    pub train: Graph,
    pub held: Vec<(usize, usize)>,
    pub fraction: f64,
    pub seed: u64,
}

/// Removes `floor(fraction * |E|)` edges chosen uniformly without replacement.
pub fn holdout(g: &Graph, fraction: f64, seed: u64) -> Result<HoldoutSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Spec(format!("holdout fraction must be in (0, 1), got {fraction}")));
    }
    let edges = g.edges();
    let m = edges.len();
    let count = (fraction * m as f64 + 1e-9).floor() as usize;
    if count >= m {
        return Err(Error::Spec(format!(
            "holding out {count} of {m} edges leaves nothing to train on"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = sample(&mut rng, m, count).into_vec();
    picked.sort_unstable();
    let held: Vec<(usize, usize)> = picked.iter().map(|&k| (edges[k].0, edges[k].1)).collect();
    Ok(HoldoutSplit {
        train: g.without_edges(&held)?,
        held,
        fraction,
        seed,
    })
}

/// One scored candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub node: usize,
    pub score: f64,
    pub positive: bool,
}

/// How a positive and a negative with equal scores are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// One half (Mann-Whitney).
    #[default]
    Half,
    /// Zero: the negative is assumed to rank first.
    Against,
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. `None` without at least one of each.
pub fn auc(scores: &[Scored]) -> Option<f64> {
    auc_with(scores, TiePolicy::Half)
}

pub fn auc_with(scores: &[Scored], ties: TiePolicy) -> Option<f64> {
    let n_pos = scores.iter().filter(|s| s.positive).count();
    let n_neg = scores.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut sorted: Vec<&Scored> = scores.iter().collect();
    sorted.sort_by(|a, b| a.score.total_cmp(&b.score));
    // sum over positives of the credit earned against negatives, one tie
    // group at a time, ascending score
    let mut wins = 0.0;
    let mut neg_below = 0usize;
    let mut k = 0;
    while k < sorted.len() {
        let mut end = k;
        while end + 1 < sorted.len() && sorted[end + 1].score == sorted[k].score {
            end += 1;
        }
        let pos = sorted[k..=end].iter().filter(|s| s.positive).count();
        let neg = end + 1 - k - pos;
        let tie = match ties {
            TiePolicy::Half => 0.5 * neg as f64,
            TiePolicy::Against => 0.0,
        };
        wins += pos as f64 * (neg_below as f64 + tie);
        neg_below += neg;
        k = end + 1;
    }
    Some(wins / (n_pos as f64 * n_neg as f64))
}

/// Proximity measure being evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Commute-time bounds from expanded neighborhoods. With `knn`, every
    /// evaluated node's commute query runs first, which may expand
    /// neighborhoods further.
    Granch {
        params: GranchParams,
        knn: Option<KnnParams>,
    },
    /// Hop distance up to 4, everything farther counted as 5.
    Baseline,
    /// Exact truncated commute time from the full `h^T` table.
    Exact { horizon: usize },
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Granch { params, .. } => format!("granch_T{}", params.horizon),
            Method::Baseline => "baseline".into(),
            Method::Exact { horizon } => format!("exact_T{horizon}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeAuc {
    pub node: usize,
    pub auc: f64,
    /// Same ranking scored with [`TiePolicy::Against`].
    pub auc_ties_against: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub method: String,
    pub per_node: Vec<NodeAuc>,
    pub mean_auc: f64,
    pub mean_auc_ties_against: f64,
    /// Nodes with at least one held-out edge.
    pub eligible: usize,
    /// Eligible nodes without an in-range positive or without a negative.
    pub skipped: usize,
    /// Active pairs for GRANCH, candidate pairs for the baseline, `n^2` for
    /// the exact method.
    pub pair_count: usize,
    pub timings: Vec<(String, Duration)>,
}

impl EvalReport {
    pub fn evaluated(&self) -> usize {
        self.per_node.len()
    }

    /// `node auc n_pos n_neg` rows with a header.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("node\tauc\tn_pos\tn_neg\n");
        for r in &self.per_node {
            let _ = writeln!(s, "{}\t{}\t{}\t{}", r.node, r.auc, r.n_pos, r.n_neg);
        }
        s
    }

    /// Flat `key=value` lines.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "method={}", self.method);
        let _ = writeln!(s, "mean_auc={}", self.mean_auc);
        let _ = writeln!(s, "mean_auc_ties_against={}", self.mean_auc_ties_against);
        let _ = writeln!(s, "eligible={}", self.eligible);
        let _ = writeln!(s, "evaluated={}", self.evaluated());
        let _ = writeln!(s, "skipped={}", self.skipped);
        let _ = writeln!(s, "pairs={}", self.pair_count);
        for (phase, d) in &self.timings {
            let _ = writeln!(s, "seconds_{phase}={:.6}", d.as_secs_f64());
        }
        s
    }
}

struct Task {
    node: usize,
    candidates: Vec<usize>,
    positives: HashSet<usize>,
}

fn tasks(split: &HoldoutSplit, original: &Graph) -> (Vec<Task>, usize) {
    let n = original.node_count();
    let mut held_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &split.held {
        held_of[a].push(b);
        if !original.is_directed() {
            held_of[b].push(a);
        }
    }
    let eligible: Vec<usize> = (0..n).filter(|&v| !held_of[v].is_empty()).collect();
    let count = eligible.len();
    let tasks = eligible
        .into_par_iter()
        .map(|v| {
            let candidates: Vec<usize> = original
                .bfs_ball(v, CANDIDATE_HOPS)
                .into_iter()
                .map(|(u, _)| u)
                .filter(|&u| u != v && !split.train.has_edge(v, u))
                .collect();
            let positives = held_of[v]
                .iter()
                .copied()
                .filter(|u| candidates.contains(u))
                .collect();
            Task {
                node: v,
                candidates,
                positives,
            }
        })
        .collect();
    (tasks, count)
}

fn granch_score(index: &GranchIndex, v: usize, u: usize) -> f64 {
    let ap = index.ap();
    if ap.contains(v, u) || ap.contains(u, v) {
        let (co, cp) = index.bounds().commute_bounds(v, u);
        -0.5 * (co + cp)
    } else {
        -2.0 * index.params().horizon as f64
    }
}

fn baseline_scores(train: &Graph, v: usize) -> std::collections::HashMap<usize, usize> {
    train.bfs_ball(v, CANDIDATE_HOPS).into_iter().collect()
}

/// Runs the link-prediction protocol for one method.
///
/// Every node with a held-out edge is evaluated over the nodes within four
/// hops of it in `original`, minus itself and its training neighbors. Held-out
/// partners are the positives. Scores are computed on the training graph.
pub fn evaluate(split: &HoldoutSplit, original: &Graph, method: &Method) -> Result<EvalReport> {
    let t0 = Instant::now();
    let (tasks, eligible) = tasks(split, original);
    let t_tasks = t0.elapsed();
    let train = &split.train;
    let mut timings = vec![("candidates".to_string(), t_tasks)];

    let t1 = Instant::now();
    let per_node: Vec<Option<NodeAuc>>;
    let pair_count;
    match method {
        Method::Granch { params, knn } => {
            let mut index = expand_ap(train, params)?;
            timings.push(("build".into(), t1.elapsed()));
            if let Some(kp) = knn {
                let t = Instant::now();
                for task in &tasks {
                    knn_commute(train, &mut index, task.node, kp)?;
                }
                timings.push(("refine".into(), t.elapsed()));
            }
            pair_count = index.pair_count();
            per_node = score_all(&tasks, |v, u| granch_score(&index, v, u));
        }
        Method::Baseline => {
            pair_count = tasks.iter().map(|t| t.candidates.len()).sum();
            per_node = tasks
                .par_iter()
                .map(|task| {
                    let hops = baseline_scores(train, task.node);
                    score_task(task, |_, u| -(hops.get(&u).copied().unwrap_or(CANDIDATE_HOPS + 1) as f64))
                })
                .collect();
        }
        Method::Exact { horizon } => {
            let table = TruncatedMatrix::compute_with(train, *horizon, StuckWalk::Stay, DENSE_CAP)?;
            timings.push(("build".into(), t1.elapsed()));
            let n = train.node_count();
            pair_count = n * n;
            per_node = score_all(&tasks, |v, u| -table.commute(v, u));
        }
    }
    timings.push(("total".into(), t0.elapsed()));

    let skipped = per_node.iter().filter(|r| r.is_none()).count();
    let per_node: Vec<NodeAuc> = per_node.into_iter().flatten().collect();
    let mean = |f: fn(&NodeAuc) -> f64| {
        if per_node.is_empty() {
            f64::NAN
        } else {
            per_node.iter().map(f).sum::<f64>() / per_node.len() as f64
        }
    };
    let mean_auc = mean(|r| r.auc);
    let mean_auc_ties_against = mean(|r| r.auc_ties_against);
    Ok(EvalReport {
        method: method.name(),
        per_node,
        mean_auc,
        mean_auc_ties_against,
        eligible,
        skipped,
        pair_count,
        timings,
    })
}

fn score_task(task: &Task, score: impl Fn(usize, usize) -> f64) -> Option<NodeAuc> {
    let scored: Vec<Scored> = task
        .candidates
        .iter()
        .map(|&u| Scored {
            node: u,
            score: score(task.node, u),
            positive: task.positives.contains(&u),
        })
        .collect();
    let value = auc(&scored)?;
    let against = auc_with(&scored, TiePolicy::Against)?;
    let n_pos = task.positives.len();
    Some(NodeAuc {
        node: task.node,
        auc: value,
        auc_ties_against: against,
        n_pos,
        n_neg: scored.len() - n_pos,
    })
}

fn score_all(tasks: &[Task], score: impl Fn(usize, usize) -> f64 + Sync) -> Vec<Option<NodeAuc>> {
    tasks.par_iter().map(|t| score_task(t, &score)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;

    fn sc(score: f64, positive: bool) -> Scored {
        Scored {
            node: 0,
            score,
            positive,
        }
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[sc(3.0, true), sc(2.0, true), sc(1.0, false)]), Some(1.0));
        assert_eq!(auc(&[sc(1.0, true), sc(1.0, false), sc(1.0, false)]), Some(0.5));
        // 3 of 4 pairs ordered correctly
        let v = auc(&[sc(3.0, true), sc(1.0, true), sc(2.0, false), sc(0.0, false)]);
        assert_eq!(v, Some(0.75));
        assert_eq!(auc(&[sc(1.0, true)]), None);
        assert_eq!(auc(&[sc(1.0, false)]), None);
        assert_eq!(auc(&[]), None);
    }

    #[test]
    fn auc_matches_pair_count() {
        let scores = [
            sc(0.3, true),
            sc(0.3, false),
            sc(0.9, false),
            sc(0.1, true),
            sc(0.5, true),
            sc(0.5, false),
        ];
        let mut wins = 0.0;
        let mut total = 0.0;
        for p in scores.iter().filter(|s| s.positive) {
            for q in scores.iter().filter(|s| !s.positive) {
                total += 1.0;
                if p.score > q.score {
                    wins += 1.0;
                } else if p.score == q.score {
                    wins += 0.5;
                }
            }
        }
        assert!((auc(&scores).unwrap() - wins / total).abs() < 1e-15);
    }

    #[test]
    fn ties_against_counts_no_credit() {
        let all_tied = [sc(1.0, true), sc(1.0, false), sc(1.0, false)];
        assert_eq!(auc_with(&all_tied, TiePolicy::Against), Some(0.0));
        let mixed = [sc(0.5, true), sc(0.5, false), sc(0.2, false), sc(0.9, true)];
        // pos 0.5 beats 0.2 only; pos 0.9 beats both
        assert_eq!(auc_with(&mixed, TiePolicy::Against), Some(0.75));
        assert_eq!(auc(&mixed), Some(0.875));
    }

    #[test]
    fn triangle_holdout() {
        let k3 = parse_edge_list("0 1\n1 2\n0 2\n", false).unwrap();
        let split = holdout(&k3, 1.0 / 3.0, 1).unwrap();
        assert_eq!(split.held.len(), 1);
        assert_eq!(split.train.edge_count(), 2);
        let (a, b) = split.held[0];
        assert!(!split.train.has_edge(a, b));
        let again = holdout(&k3, 1.0 / 3.0, 1).unwrap();
        assert_eq!(again.held, split.held);
        assert!(holdout(&k3, 1.0, 1).is_err());
        assert!(holdout(&k3, 0.0, 1).is_err());
    }

    #[test]
    fn default_ranges() {
        assert_eq!(default_range(3), 2.9);
        assert_eq!(default_range(6), 5.95);
        assert_eq!(default_range(10), 9.75);
    }
}
