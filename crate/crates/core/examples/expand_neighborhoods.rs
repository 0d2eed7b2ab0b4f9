//! Build neighborhoods for every node of a generated graph and summarize them.

use std::time::Instant;

use granch::ap::{expand_ap, GranchParams};
use granch::bounds::ApInit;
use granch::dump::format_ap_dump;
use granch::simgen::{generate, GenSpec};

fn main() -> granch::Result<()> {
    let g = generate(&GenSpec::new(2000, 2, 5400, 1))?.graph;
    for (t, tp) in [(3, 2.9), (6, 5.95), (10, 9.75)] {
        for init in [ApInit::OneHop, ApInit::Hops(2)] {
            let start = Instant::now();
            let idx = expand_ap(&g, &GranchParams::new(t, tp).with_init(init))?;
            let sizes: Vec<usize> = (0..g.node_count()).map(|j| idx.ap().neighborhood(j).len()).collect();
            let max = sizes.iter().max().unwrap();
            println!(
                "T={t:<2} T'={tp:<5} init={init:?}: |AP| = {:>6} ({:.1} per node, max {max}), {} sweeps, {:.2?}",
                idx.pair_count(),
                idx.pair_count() as f64 / g.node_count() as f64,
                idx.sweeps(),
                start.elapsed()
            );
        }
    }
    let idx = expand_ap(&g, &GranchParams::default())?;
    let dump = format_ap_dump(&idx);
    println!("dump: {} lines, first pair rows:", dump.lines().count());
    for l in dump.lines().take(5) {
        println!("  {l}");
    }
    Ok(())
}
