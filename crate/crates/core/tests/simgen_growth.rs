use granch::simgen::{generate, inject_noise, GenSpec};

/// Least-squares slope of log(mean ball size) against log(r) for r = 1..=4.
fn growth_exponent(spec: &GenSpec) -> f64 {
    let g = generate(spec).unwrap().graph;
    let n = g.node_count();
    let sample: Vec<usize> = (0..n).step_by((n / 200).max(1)).collect();
    let pts: Vec<(f64, f64)> = (1..=4)
        .map(|r| {
            let mean = sample.iter().map(|&v| g.bfs_ball(v, r).len() as f64).sum::<f64>() / sample.len() as f64;
            ((r as f64).ln(), mean.ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 4.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 4.0;
    let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    cov / var
}

#[test]
fn growth_rate_tracks_dimension() {
    for seed in 0..3 {
        let d2 = growth_exponent(&GenSpec::new(4000, 2, 10800, seed));
        let d4 = growth_exponent(&GenSpec::new(4000, 4, 10800, seed));
        assert!((1.5..=2.8).contains(&d2), "d=2 exponent {d2}");
        assert!(d4 > d2, "d=4 exponent {d4} <= d=2 exponent {d2}");
    }
}

#[test]
fn generated_graphs_are_connected_with_exact_size() {
    for (n, d, e) in [(1000, 2, 2700), (500, 3, 1500), (50, 1, 49), (30, 2, 435)] {
        for seed in 0..3 {
            let g = generate(&GenSpec::new(n, d, e, seed)).unwrap().graph;
            assert_eq!(g.node_count(), n);
            assert_eq!(g.edge_count(), e);
            assert!(g.is_connected());
        }
    }
}

#[test]
fn noise_on_generated_graph() {
    let g = generate(&GenSpec::new(100, 2, 270, 4)).unwrap().graph;
    let (noisy, report) = inject_noise(&g, 0.2, 4).unwrap();
    // ceil(0.2 * 99) partners, all previously non-adjacent
    assert_eq!(report.added.len(), 20);
    assert_eq!(noisy.edge_count(), g.edge_count() + report.added.len());
    for &v in &report.added {
        assert!(!g.has_edge(report.hub, v) && noisy.has_edge(report.hub, v));
    }
    let (_, empty) = inject_noise(&g, 0.001, 4).unwrap();
    assert_eq!(empty.added.len(), 1);
}
