//! Run every invariant family against the oracles on a few random graphs,
//! directed and undirected.

use granch::ap::GranchParams;
use granch::knn::KnnParams;
use granch::simgen::{random_connected, random_strongly_connected};
use granch::verify::{run_suite, SuiteConfig};

fn main() -> granch::Result<()> {
    let graphs = [
        ("undirected, weighted", random_connected(60, 60, true, 1)?),
        ("undirected, unit", random_connected(60, 30, false, 2)?),
        ("directed", random_strongly_connected(40, 80, 3)?),
    ];
    for (name, g) in &graphs {
        for (t, tp) in [(3, 2.9), (6, 5.95), (10, 9.75)] {
            let cfg = SuiteConfig {
                params: GranchParams::new(t, tp),
                knn: KnnParams { k: 5, epsilon: 0.1, max_rounds: 25 },
                ..Default::default()
            };
            println!("{name}, T={t}:");
            for f in run_suite(g, &cfg)? {
                println!("  {f}");
            }
        }
    }
    Ok(())
}
