//! Exact reference computations for hitting and commute times.
//!
//! Everything here is meant for small graphs and serves as ground truth for
//! the bounds engine: truncated hitting times by backward dynamic programming
//! and, independently, by forward propagation of first-passage mass; true
//! hitting times by a dense linear solve; commute times from the Laplacian
//! pseudoinverse.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest graph the dense oracles accept by default.
pub const DENSE_CAP: usize = 2000;

const PIVOT_EPS: f64 = 1e-12;

/// How a walk that reaches a node with no outgoing edges is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StuckWalk {
    /// Zero-degree sources are an error.
    #[default]
    Reject,
    /// The walk stays put and never reaches the destination, so it is charged
    /// the full horizon.
    Stay,
}

/// `h^T(., dst)` for every source.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingColumn {
    pub dst: usize,
    pub horizon: usize,
    pub values: Vec<f64>,
}

impl HittingColumn {
    pub fn get(&self, src: usize) -> f64 {
        self.values[src]
    }
}

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::Spec("horizon must be at least 1".into()));
    }
    Ok(())
}

fn check_sources(g: &Graph, dst: usize, stuck: StuckWalk) -> Result<()> {
    if stuck == StuckWalk::Reject {
        if let Some(i) = (0..g.node_count()).find(|&i| i != dst && g.degree(i) <= 0.0) {
            return Err(Error::DegenerateNode(i));
        }
    }
    Ok(())
}

/// Truncated hitting times to `dst` by iterating
/// `h^t(i) = 1 + sum_k p_ik h^{t-1}(k)` from `h^1 = 1` (and `0` at `dst`).
pub fn hitting_column_dp(g: &Graph, dst: usize, horizon: usize) -> Result<HittingColumn> {
    hitting_column_dp_with(g, dst, horizon, StuckWalk::Reject)
}

pub fn hitting_column_dp_with(
    g: &Graph,
    dst: usize,
    horizon: usize,
    stuck: StuckWalk,
) -> Result<HittingColumn> {
    g.check_node(dst)?;
    check_horizon(horizon)?;
    check_sources(g, dst, stuck)?;
    let n = g.node_count();
    let mut prev = vec![1.0; n];
    prev[dst] = 0.0;
    let mut cur = prev.clone();
    for t in 2..=horizon {
        for i in 0..n {
            if i == dst {
                continue;
            }
            if g.degree(i) <= 0.0 {
                cur[i] = t as f64;
                continue;
            }
            // 1 + sum_k p h(k) written as t - sum_k p (t-1 - h(k)), which is
            // exactly t when dst is out of reach
            let tm1 = (t - 1) as f64;
            let mut s = 0.0;
            for (k, p) in g.transitions(i) {
                s += p * (tm1 - prev[k]);
            }
            cur[i] = t as f64 - s;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(HittingColumn {
        dst,
        horizon,
        values: prev,
    })
}

/// Truncated hitting times via first-passage probabilities:
/// `h^T = sum_{t<T} t f_t + (1 - sum_{t<T} f_t) T`, where `f_t(i)` is the mass
/// that a walk started at `i` first deposits on `dst` at step `t`. Mass is
/// pushed forward from every source simultaneously and removed once it lands
/// on `dst`.
pub fn hitting_column_matrix_power(g: &Graph, dst: usize, horizon: usize) -> Result<HittingColumn> {
    g.check_node(dst)?;
    check_horizon(horizon)?;
    check_sources(g, dst, StuckWalk::Reject)?;
    let n = g.node_count();
    if n > DENSE_CAP {
        return Err(Error::TooLarge { n, cap: DENSE_CAP });
    }
    // row i: distribution over current positions of walks started at i that
    // have not yet visited dst.
    let mut mass = DMatrix::<f64>::identity(n, n);
    mass[(dst, dst)] = 0.0;
    let mut expected = vec![0.0; n];
    let mut absorbed = vec![0.0; n];
    let mut next = DMatrix::<f64>::zeros(n, n);
    for t in 1..horizon {
        next.fill(0.0);
        for src in 0..n {
            for pos in 0..n {
                let m = mass[(src, pos)];
                if m == 0.0 || pos == dst {
                    continue;
                }
                for (k, p) in g.transitions(pos) {
                    next[(src, k)] += m * p;
                }
            }
        }
        for src in 0..n {
            let f = next[(src, dst)];
            expected[src] += t as f64 * f;
            absorbed[src] += f;
            next[(src, dst)] = 0.0;
        }
        std::mem::swap(&mut mass, &mut next);
    }
    let values = (0..n)
        .map(|i| {
            if i == dst {
                0.0
            } else {
                expected[i] + (1.0 - absorbed[i]) * horizon as f64
            }
        })
        .collect();
    Ok(HittingColumn {
        dst,
        horizon,
        values,
    })
}

/// Dense `n x n` table of `h^T(i, j)` computed column by column.
#[derive(Debug, Clone)]
pub struct TruncatedMatrix {
    horizon: usize,
    n: usize,
    // column-major: columns[j][i] = h^T(i, j)
    columns: Vec<Vec<f64>>,
}

impl TruncatedMatrix {
    pub fn compute(g: &Graph, horizon: usize) -> Result<Self> {
        Self::compute_with(g, horizon, StuckWalk::Reject, DENSE_CAP)
    }

    pub fn compute_with(g: &Graph, horizon: usize, stuck: StuckWalk, cap: usize) -> Result<Self> {
        let n = g.node_count();
        if n > cap {
            return Err(Error::TooLarge { n, cap });
        }
        let columns = (0..n)
            .into_par_iter()
            .map(|j| hitting_column_dp_with(g, j, horizon, stuck).map(|c| c.values))
            .collect::<Result<Vec<_>>>()?;
        Ok(TruncatedMatrix {
            horizon,
            n,
            columns,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// `h^T(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.columns[j][i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    /// Truncated commute time `h^T(i, j) + h^T(j, i)`.
    pub fn commute(&self, i: usize, j: usize) -> f64 {
        self.get(i, j) + self.get(j, i)
    }
}

fn lu_checked(m: DMatrix<f64>, what: &str) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let lu = m.lu();
    let u = lu.u();
    if let Some(k) = (0..u.nrows()).find(|&k| u[(k, k)].abs() < PIVOT_EPS) {
        return Err(Error::Singular(format!("{what}: pivot {k} below {PIVOT_EPS:e}")));
    }
    Ok(lu)
}

/// Untruncated expected hitting times to `dst` from every source, solving
/// `h(i) = 1 + sum_k p_ik h(k)` for `i != dst`.
pub fn true_hitting_column(g: &Graph, dst: usize) -> Result<Vec<f64>> {
    g.check_node(dst)?;
    let n = g.node_count();
    if n > DENSE_CAP {
        return Err(Error::TooLarge { n, cap: DENSE_CAP });
    }
    let mut reaches = vec![false; n];
    for (v, _) in g.reverse_ball(dst, n) {
        reaches[v] = true;
    }
    if let Some(src) = (0..n).find(|&i| !reaches[i]) {
        return Err(Error::Unreachable { src, dst });
    }
    // unknowns are all nodes except dst, packed in id order
    let idx = |i: usize| if i < dst { i } else { i - 1 };
    let m = n - 1;
    if m == 0 {
        return Ok(vec![0.0]);
    }
    let mut a = DMatrix::<f64>::identity(m, m);
    for i in (0..n).filter(|&i| i != dst) {
        for (k, p) in g.transitions(i) {
            if k != dst {
                a[(idx(i), idx(k))] -= p;
            }
        }
    }
    let b = DVector::<f64>::from_element(m, 1.0);
    let lu = lu_checked(a, "hitting-time system")?;
    let x = lu
        .solve(&b)
        .ok_or_else(|| Error::Singular("hitting-time system".into()))?;
    Ok((0..n)
        .map(|i| if i == dst { 0.0 } else { x[idx(i)] })
        .collect())
}

/// `L^+ = (L - 11^T/n)^{-1} + 11^T/n` for a connected undirected graph.
#[derive(Debug, Clone)]
pub struct LaplacianPseudoinverse {
    volume: f64,
    pinv: DMatrix<f64>,
}

impl LaplacianPseudoinverse {
    pub fn new(g: &Graph) -> Result<Self> {
        let n = g.node_count();
        if g.is_directed() {
            return Err(Error::Spec("pseudoinverse commute times need an undirected graph".into()));
        }
        if n > DENSE_CAP {
            return Err(Error::TooLarge { n, cap: DENSE_CAP });
        }
        if !g.is_connected() {
            return Err(Error::Singular("graph is disconnected".into()));
        }
        let shift = 1.0 / n as f64;
        let mut l = DMatrix::<f64>::from_element(n, n, -shift);
        for i in 0..n {
            l[(i, i)] += g.degree(i);
            for (&j, &w) in g.neighbors(i).iter().zip(g.weights(i)) {
                l[(i, j)] -= w;
            }
        }
        let lu = lu_checked(l, "shifted Laplacian")?;
        let mut pinv = lu
            .try_inverse()
            .ok_or_else(|| Error::Singular("shifted Laplacian".into()))?;
        pinv.add_scalar_mut(shift);
        Ok(LaplacianPseudoinverse {
            volume: g.volume(),
            pinv,
        })
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.pinv[(i, j)]
    }

    /// `V(G) (l+_ii + l+_jj - 2 l+_ij)`.
    pub fn commute(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.volume * (self.pinv[(i, i)] + self.pinv[(j, j)] - 2.0 * self.pinv[(i, j)])
    }
}

pub fn commute_via_pseudoinverse(g: &Graph, i: usize, j: usize) -> Result<f64> {
    g.check_node(i)?;
    g.check_node(j)?;
    Ok(LaplacianPseudoinverse::new(g)?.commute(i, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;

    fn p3() -> Graph {
        parse_edge_list("0 1\n1 2\n", false).unwrap()
    }
    fn k2() -> Graph {
        parse_edge_list("0 1\n", false).unwrap()
    }
    fn k3() -> Graph {
        parse_edge_list("0 1\n1 2\n0 2\n", false).unwrap()
    }

    #[test]
    fn dp_path() {
        // h^2(1,2) = 1.5, h^3(0,2) = 1 + h^2(1,2)
        let c = hitting_column_dp(&p3(), 2, 3).unwrap();
        assert_eq!(c.values, vec![2.5, 2.0, 0.0]);
    }

    #[test]
    fn dp_base_case() {
        let c = hitting_column_dp(&k3(), 1, 1).unwrap();
        assert_eq!(c.values, vec![1.0, 0.0, 1.0]);
        for t in 1..6 {
            assert_eq!(hitting_column_dp(&k2(), 1, t).unwrap().get(0), 1.0);
        }
    }

    #[test]
    fn dp_rejects_isolated_source() {
        let g = parse_edge_list("# nodes=3\n0 1\n", false).unwrap();
        assert!(matches!(hitting_column_dp(&g, 0, 3), Err(Error::DegenerateNode(2))));
        let c = hitting_column_dp_with(&g, 0, 3, StuckWalk::Stay).unwrap();
        assert_eq!(c.values, vec![0.0, 1.0, 3.0]);
    }

    #[test]
    fn matrix_power_examples() {
        let c = hitting_column_matrix_power(&p3(), 2, 3).unwrap();
        assert!((c.get(0) - 2.5).abs() < 1e-12);
        assert_eq!(c.get(2), 0.0);
        // 1/2 + 2/4 + 3/8 + 4/8
        let c = hitting_column_matrix_power(&k3(), 2, 4).unwrap();
        assert!((c.get(0) - 1.875).abs() < 1e-12);
    }

    #[test]
    fn true_hitting_examples() {
        let h = true_hitting_column(&p3(), 2).unwrap();
        assert!((h[0] - 4.0).abs() < 1e-10 && (h[1] - 3.0).abs() < 1e-10);
        assert!((true_hitting_column(&k2(), 1).unwrap()[0] - 1.0).abs() < 1e-12);
        let h = true_hitting_column(&k3(), 2).unwrap();
        assert!((h[0] - 2.0).abs() < 1e-10 && (h[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn true_hitting_unreachable() {
        let g = parse_edge_list("0 1\n2 3\n", false).unwrap();
        assert!(matches!(
            true_hitting_column(&g, 0),
            Err(Error::Unreachable { src: 2, dst: 0 })
        ));
    }

    #[test]
    fn pseudoinverse_examples() {
        let lp = LaplacianPseudoinverse::new(&k2()).unwrap();
        assert!((lp.entry(0, 0) - 0.25).abs() < 1e-12);
        assert!((lp.entry(0, 1) + 0.25).abs() < 1e-12);
        assert!((lp.commute(0, 1) - 2.0).abs() < 1e-12);
        assert_eq!(lp.commute(1, 1), 0.0);
        assert!((commute_via_pseudoinverse(&p3(), 0, 2).unwrap() - 8.0).abs() < 1e-9);
        let split = parse_edge_list("0 1\n2 3\n", false).unwrap();
        assert!(matches!(LaplacianPseudoinverse::new(&split), Err(Error::Singular(_))));
    }
}
