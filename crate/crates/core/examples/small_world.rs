//! Generated graphs: ball growth by hop radius for d = 1, 2, 4, and the
//! effect of hub noise on distances.

use granch::simgen::{generate, inject_noise, GenSpec};

fn main() -> granch::Result<()> {
    for d in [1, 2, 4] {
        let g = generate(&GenSpec::new(3000, d, 8100, 5))?.graph;
        let sizes: Vec<String> = (1..=5)
            .map(|r| {
                let mean = (0..g.node_count()).step_by(30).map(|v| g.bfs_ball(v, r).len()).sum::<usize>() as f64
                    / 100.0;
                format!("{mean:7.1}")
            })
            .collect();
        println!("d={d}: mean ball size r=1..5: {}", sizes.join(""));
    }

    let g = generate(&GenSpec::new(100, 2, 270, 5))?.graph;
    let (noisy, report) = inject_noise(&g, 0.2, 5)?;
    let mean_hops = |g: &granch::Graph| {
        let mut total = 0usize;
        for v in 0..g.node_count() {
            total += g.bfs_ball(v, usize::MAX).iter().map(|&(_, h)| h).sum::<usize>();
        }
        total as f64 / (g.node_count() * (g.node_count() - 1)) as f64
    };
    println!(
        "hub {} gained {} links; mean hop distance {:.2} -> {:.2}",
        report.hub,
        report.added.len(),
        mean_hops(&g),
        mean_hops(&noisy)
    );
    Ok(())
}
