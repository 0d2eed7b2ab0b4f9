use granch::ap::GranchParams;
use granch::bounds::ApInit;
use granch::eval::{auc, auc_with, evaluate, holdout, Method, Scored, TiePolicy, CANDIDATE_HOPS};
use granch::simgen::{generate, random_connected, GenSpec};
use proptest::prelude::*;

fn scored() -> impl Strategy<Value = Vec<Scored>> {
    proptest::collection::vec((-5i32..5, any::<bool>()), 2..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(node, (s, positive))| Scored { node, score: s as f64, positive })
            .collect()
    })
}

proptest! {
    #[test]
    fn auc_is_rank_based(v in scored(), a in 0.1f64..10.0, b in -10.0f64..10.0) {
        let moved: Vec<Scored> = v.iter().map(|s| Scored { score: (a * s.score + b).exp(), ..*s }).collect();
        prop_assert_eq!(auc(&v).map(|x| (x * 1e12).round()), auc(&moved).map(|x| (x * 1e12).round()));
    }

    #[test]
    fn auc_matches_pair_enumeration(v in scored()) {
        let mut half = 0.0;
        let mut strict = 0.0;
        let mut total = 0.0;
        for p in v.iter().filter(|s| s.positive) {
            for q in v.iter().filter(|s| !s.positive) {
                total += 1.0;
                if p.score > q.score {
                    half += 1.0;
                    strict += 1.0;
                } else if p.score == q.score {
                    half += 0.5;
                }
            }
        }
        match auc(&v) {
            None => prop_assert_eq!(total, 0.0),
            Some(x) => {
                prop_assert!((x - half / total).abs() < 1e-12);
                let y = auc_with(&v, TiePolicy::Against).unwrap();
                prop_assert!((y - strict / total).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&x));
            }
        }
    }
}

#[test]
fn full_coverage_matches_exact() {
    for seed in 0..4 {
        let g = random_connected(40, 50, false, seed).unwrap();
        let split = holdout(&g, 0.3, seed).unwrap();
        let params = GranchParams::new(6, 5.95).with_init(ApInit::Hops(40));
        let a = evaluate(&split, &g, &Method::Granch { params, knn: None }).unwrap();
        let b = evaluate(&split, &g, &Method::Exact { horizon: 6 }).unwrap();
        assert_eq!(a.evaluated(), b.evaluated());
        assert!((a.mean_auc - b.mean_auc).abs() < 1e-12, "{} vs {}", a.mean_auc, b.mean_auc);
    }
}

#[test]
fn pair_accounting() {
    let g = generate(&GenSpec::new(300, 2, 810, 5)).unwrap().graph;
    let split = holdout(&g, 0.3, 5).unwrap();
    let base = evaluate(&split, &g, &Method::Baseline).unwrap();
    let mut expect = 0;
    let mut eligible = 0;
    for v in 0..g.node_count() {
        if !split.held.iter().any(|&(a, b)| a == v || b == v) {
            continue;
        }
        eligible += 1;
        expect += g
            .bfs_ball(v, CANDIDATE_HOPS)
            .iter()
            .filter(|&&(u, _)| u != v && !split.train.has_edge(v, u))
            .count();
    }
    assert_eq!(base.eligible, eligible);
    assert_eq!(base.pair_count, expect);
    assert_eq!(base.evaluated() + base.skipped, eligible);
    let params = GranchParams::new(6, 5.95);
    let gr = evaluate(&split, &g, &Method::Granch { params: params.clone(), knn: None }).unwrap();
    let index = granch::expand_ap(&split.train, &params).unwrap();
    assert_eq!(gr.pair_count, index.pair_count());
    let mean = gr.per_node.iter().map(|r| r.auc).sum::<f64>() / gr.evaluated() as f64;
    assert!((mean - gr.mean_auc).abs() < 1e-12);
}

#[test]
fn holdout_partitions_edges() {
    let g = generate(&GenSpec::new(1000, 2, 2700, 1)).unwrap().graph;
    let split = holdout(&g, 0.3, 9).unwrap();
    assert_eq!(split.held.len(), 810);
    assert_eq!(split.train.edge_count() + split.held.len(), g.edge_count());
    for &(a, b) in &split.held {
        assert!(g.has_edge(a, b) && !split.train.has_edge(a, b));
    }
    assert_eq!(holdout(&g, 0.3, 9).unwrap().held, split.held);
}
