//! Exact truncated and true hitting times on a small weighted graph.

use granch::graph::parse_edge_list;
use granch::oracle::{
    commute_via_pseudoinverse, hitting_column_dp, hitting_column_matrix_power, true_hitting_column,
};

fn main() -> granch::Result<()> {
    // a square with one diagonal, the diagonal twice as heavy
    let g = parse_edge_list("0 1\n1 2\n2 3\n3 0\n0 2 2.0\n", false)?;
    let dst = 3;
    let truth = true_hitting_column(&g, dst)?;
    println!("h^T(i, {dst}) by horizon, true hitting time last");
    for t in [1, 2, 3, 6, 10, 50] {
        let dp = hitting_column_dp(&g, dst, t)?;
        let mp = hitting_column_matrix_power(&g, dst, t)?;
        let row: Vec<String> = (0..4).map(|i| format!("{:8.4}", dp.get(i))).collect();
        let gap = (0..4).map(|i| (dp.get(i) - mp.get(i)).abs()).fold(0.0, f64::max);
        println!("T={t:<3} {}   (|dp - matrix power| = {gap:.1e})", row.join(""));
    }
    let row: Vec<String> = truth.iter().map(|h| format!("{h:8.4}")).collect();
    println!("true  {}", row.join(""));

    for (i, j) in [(0, 2), (1, 3)] {
        println!("commute({i},{j}) = {:.4}", commute_via_pseudoinverse(&g, i, j)?);
    }
    Ok(())
}
