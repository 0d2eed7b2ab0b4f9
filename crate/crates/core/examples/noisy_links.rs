//! Link prediction on a 100-node graph after one node is linked to 20% of
//! the others.

use granch::ap::GranchParams;
use granch::eval::{evaluate, holdout, Method};
use granch::simgen::{generate, inject_noise, GenSpec};

fn main() -> granch::Result<()> {
    for seed in 0..5 {
        let g = generate(&GenSpec::new(100, 2, 270, seed))?.graph;
        let (noisy, report) = inject_noise(&g, 0.2, seed)?;
        let split = holdout(&noisy, 0.3, seed)?;
        let granch = evaluate(&split, &noisy, &Method::Granch { params: GranchParams::new(6, 5.95), knn: None })?;
        let base = evaluate(&split, &noisy, &Method::Baseline)?;
        println!(
            "seed {seed}: hub {:>2} +{} links  granch {:.3}  baseline {:.3}",
            report.hub,
            report.added.len(),
            granch.mean_auc,
            base.mean_auc
        );
    }
    Ok(())
}
