use granch::ap::GranchParams;
use granch::bounds::{compute_bounds, ApInit, Neighborhood};
use granch::oracle::{
    commute_via_pseudoinverse, hitting_column_dp, hitting_column_matrix_power, true_hitting_column,
    TruncatedMatrix,
};
use granch::simgen::{random_connected, random_strongly_connected};
use granch::verify::{check_monotonicity, check_sandwich};
use proptest::prelude::*;

fn fixture() -> impl Strategy<Value = (usize, usize, bool, u64)> {
    (4usize..30, 0usize..40, any::<bool>(), any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dp_matches_matrix_power((n, extra, weighted, seed) in fixture(), t in 1usize..12) {
        let g = random_connected(n, extra, weighted, seed).unwrap();
        for j in 0..n {
            let a = hitting_column_dp(&g, j, t).unwrap();
            let b = hitting_column_matrix_power(&g, j, t).unwrap();
            for i in 0..n {
                prop_assert!((a.get(i) - b.get(i)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn range_and_monotone_in_horizon((n, extra, weighted, seed) in fixture()) {
        let g = random_connected(n, extra, weighted, seed).unwrap();
        let j = (seed % n as u64) as usize;
        let truth = true_hitting_column(&g, j).unwrap();
        let mut prev = hitting_column_dp(&g, j, 1).unwrap();
        for t in 2..15 {
            let cur = hitting_column_dp(&g, j, t).unwrap();
            for i in 0..n {
                let h = cur.get(i);
                if i == j {
                    prop_assert_eq!(h, 0.0);
                    continue;
                }
                prop_assert!((1.0..=t as f64).contains(&h));
                prop_assert!(h >= prev.get(i) - 1e-12);
                prop_assert!(h <= truth[i] + 1e-9);
                // exactly T iff j is unreachable within T-1 steps
                let far = !g.bfs_hops(i, t - 1).unwrap().contains_key(&j);
                prop_assert_eq!(far, h == t as f64);
            }
            prev = cur;
        }
    }

    #[test]
    fn commute_identity((n, extra, weighted, seed) in fixture()) {
        let g = random_connected(n, extra, weighted, seed).unwrap();
        let cols: Vec<_> = (0..n).map(|j| true_hitting_column(&g, j).unwrap()).collect();
        for i in 0..n {
            for j in 0..n {
                let c = commute_via_pseudoinverse(&g, i, j).unwrap();
                let expect = cols[j][i] + cols[i][j];
                prop_assert!((c - expect).abs() <= 1e-6 * expect.max(1.0));
            }
        }
    }

    #[test]
    fn directed_bounds_sandwich(n in 3usize..25, extra in 0usize..40, seed in any::<u64>()) {
        let g = random_strongly_connected(n, extra, seed).unwrap();
        for (t, tp) in [(3, 2.9), (6, 5.95)] {
            let oracle = TruncatedMatrix::compute(&g, t).unwrap();
            let params = GranchParams::new(t, tp);
            let r = check_sandwich(&g, &params, &oracle).unwrap();
            prop_assert!(r.passed(), "{}", r);
            let m = check_monotonicity(&g, &params).unwrap();
            prop_assert!(m.passed(), "{}", m);
        }
    }

    #[test]
    fn any_neighborhood_brackets_the_oracle(
        (n, extra, weighted, seed) in fixture(),
        t in 2usize..10,
        hops in 1usize..4,
        batch in 1usize..4,
    ) {
        let g = random_connected(n, extra, weighted, seed).unwrap();
        let oracle = TruncatedMatrix::compute(&g, t).unwrap();
        for j in 0..n {
            let nb = Neighborhood::new(&g, j, ApInit::Hops(hops)).unwrap();
            let b = compute_bounds(&g, &nb, t).unwrap().bounds;
            for i in 0..n {
                let h = oracle.get(i, j);
                prop_assert!(b.ho(i) <= h + 1e-9 && h <= b.hp(i) + 1e-9);
            }
        }
        let params = GranchParams::new(t, t as f64 - 0.5).with_batch(batch);
        prop_assert!(check_sandwich(&g, &params, &oracle).unwrap().passed());
    }
}
