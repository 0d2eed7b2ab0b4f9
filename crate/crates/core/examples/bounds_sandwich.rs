//! Watch the optimistic and pessimistic bounds close in on the exact value as
//! one destination's neighborhood grows.

use granch::ap::{expand_destination, GranchParams};
use granch::oracle::hitting_column_dp;
use granch::simgen::{generate, GenSpec};

fn main() -> granch::Result<()> {
    let g = generate(&GenSpec::new(400, 2, 1080, 3))?.graph;
    let (dst, horizon) = (17, 6);
    let exact = hitting_column_dp(&g, dst, horizon)?;
    let params = GranchParams::new(horizon, 5.95);
    let probe = g.bfs_ball(dst, 2).into_iter().find(|&(_, h)| h == 2).map(|(v, _)| v).unwrap();
    println!("destination {dst}, source {probe}, exact h^{horizon} = {:.4}", exact.get(probe));
    println!("{:>6} {:>8} {:>8} {:>8}", "|AP|", "ho", "hp", "lb");
    let (_, last, outcome) = expand_destination(&g, dst, &params, |nb, sweep| {
        let b = &sweep.bounds;
        println!("{:>6} {:>8.4} {:>8.4} {:>8.4}", nb.len(), b.ho(probe), b.hp(probe), b.lb());
    })?;
    println!("{:?} after {} sweeps, lb = {:.4}", outcome.stop, outcome.sweeps, last.bounds.lb());
    Ok(())
}
