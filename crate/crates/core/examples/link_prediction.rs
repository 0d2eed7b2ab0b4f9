//! Hold out 30% of the links of a 1000-node graph and compare methods.

use granch::ap::GranchParams;
use granch::eval::{default_range, evaluate, holdout, Method};
use granch::simgen::{generate, GenSpec};

fn main() -> granch::Result<()> {
    let g = generate(&GenSpec::new(1000, 2, 2700, 0))?.graph;
    let split = holdout(&g, 0.3, 0)?;
    println!("held out {} of {} links", split.held.len(), g.edge_count());
    println!("{:<12} {:>8} {:>14} {:>9} {:>9}", "method", "auc", "ties-against", "nodes", "pairs");
    let mut methods = vec![Method::Baseline];
    for t in [3, 6, 10] {
        methods.push(Method::Granch { params: GranchParams::new(t, default_range(t)), knn: None });
        methods.push(Method::Exact { horizon: t });
    }
    for m in &methods {
        let r = evaluate(&split, &g, m)?;
        println!(
            "{:<12} {:>8.3} {:>14.3} {:>9} {:>9}",
            r.method,
            r.mean_auc,
            r.mean_auc_ties_against,
            r.evaluated(),
            r.pair_count
        );
    }
    Ok(())
}
