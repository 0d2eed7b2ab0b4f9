//! Nearest neighbors under truncated commute time, checked against the
//! exact table.

use granch::ap::{expand_ap, GranchParams};
use granch::knn::{knn_commute, KnnParams};
use granch::oracle::TruncatedMatrix;
use granch::simgen::{generate, GenSpec};

fn main() -> granch::Result<()> {
    let g = generate(&GenSpec::new(500, 2, 1350, 8))?.graph;
    let params = GranchParams::new(6, 5.95);
    let mut index = expand_ap(&g, &params)?;
    let exact = TruncatedMatrix::compute(&g, 6)?;
    let kp = KnnParams { k: 5, epsilon: 0.1, max_rounds: 25 };
    for q in [0, 100, 250] {
        let res = knn_commute(&g, &mut index, q, &kp)?;
        println!("query {q}: X = {:.3}, rounds {}, status {:?}", res.threshold, res.rounds, res.status);
        for e in &res.entries {
            println!(
                "  {:>4}  [{:.3}, {:.3}]  exact {:.3}",
                e.node,
                e.lower,
                e.upper,
                exact.commute(q, e.node)
            );
        }
        for b in &res.undecided {
            println!("  {:>4}  [{:.3}, {:.3}]  undecided", b.node, b.lower, b.upper);
        }
    }
    Ok(())
}
