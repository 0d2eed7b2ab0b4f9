//! Invariant checks of the bounds engine against the exact oracles.
//!
//! Each check returns a [`FamilyReport`] with the number of comparisons made
//! and the largest violation seen (0 when every comparison held exactly).

use std::fmt;

use crate::ap::{expand_ap, expand_destination, GranchParams};
use crate::bounds::{compute_bounds, ApInit, DestinationBounds, Neighborhood};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::knn::{knn_commute_all, KnnParams};
use crate::oracle::{hitting_column_dp, hitting_column_matrix_power, TruncatedMatrix};

pub const SANDWICH_SLACK: f64 = 1e-9;
pub const COLLAPSE_SLACK: f64 = 1e-12;
pub const MONOTONE_SLACK: f64 = 1e-12;
pub const ORACLE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub name: &'static str,
    pub checks: usize,
    pub max_violation: f64,
    pub slack: f64,
    /// First failing comparison, if any.
    pub example: Option<String>,
}

impl FamilyReport {
    fn new(name: &'static str, slack: f64) -> Self {
        FamilyReport {
            name,
            checks: 0,
            max_violation: 0.0,
            slack,
            example: None,
        }
    }

    /// Records `violation = observed excess over the allowed value`; values
    /// at or below zero count as satisfied.
    fn record(&mut self, violation: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        let v = violation.max(0.0);
        if v > self.max_violation || v.is_nan() {
            self.max_violation = if v.is_nan() { f64::INFINITY } else { v };
        }
        if (v > self.slack || v.is_nan()) && self.example.is_none() {
            self.example = Some(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.example.is_none()
    }

    /// Folds another report of the same family into this one.
    pub fn merge(&mut self, other: FamilyReport) {
        self.checks += other.checks;
        self.max_violation = self.max_violation.max(other.max_violation);
        if self.example.is_none() {
            self.example = other.example;
        }
    }
}

impl fmt::Display for FamilyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} checks={} max_violation={:e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.checks,
            self.max_violation
        )?;
        if let Some(e) = &self.example {
            write!(f, " first_failure=\"{e}\"")?;
        }
        Ok(())
    }
}

/// Per-column DP against first-passage mass propagation, all destinations.
pub fn check_dp_matrix_power(g: &Graph, horizon: usize) -> Result<FamilyReport> {
    let mut r = FamilyReport::new("dp_matrix_power", ORACLE_SLACK);
    for j in 0..g.node_count() {
        let dp = hitting_column_dp(g, j, horizon)?;
        let mp = hitting_column_matrix_power(g, j, horizon)?;
        for i in 0..g.node_count() {
            let (a, b) = (dp.get(i), mp.get(i));
            r.record((a - b).abs(), || format!("h({i},{j}): dp={a} matrix_power={b}"));
        }
    }
    Ok(r)
}

fn sandwich_into(r: &mut FamilyReport, b: &DestinationBounds, oracle: &TruncatedMatrix) {
    let j = b.dst;
    for i in 0..oracle.node_count() {
        let (lo, hi, h) = (b.ho(i), b.hp(i), oracle.get(i, j));
        r.record((lo - h).max(h - hi), || {
            format!("h({i},{j})={h} outside [{lo}, {hi}] at |AP|={}", b.members.len())
        });
    }
}

/// `ho <= h^T <= hp` for every pair after every expansion step of every
/// destination.
pub fn check_sandwich(g: &Graph, params: &GranchParams, oracle: &TruncatedMatrix) -> Result<FamilyReport> {
    let mut r = FamilyReport::new("sandwich", SANDWICH_SLACK);
    for j in 0..g.node_count() {
        expand_destination(g, j, params, |_, sweep| sandwich_into(&mut r, &sweep.bounds, oracle))?;
    }
    Ok(r)
}

/// With every node that can reach the destination inside its neighborhood,
/// the bounds must coincide with the oracle.
pub fn check_collapse(g: &Graph, horizon: usize, oracle: &TruncatedMatrix) -> Result<FamilyReport> {
    let mut r = FamilyReport::new("full_coverage", COLLAPSE_SLACK);
    let n = g.node_count();
    for j in 0..n {
        let nb = Neighborhood::new(g, j, ApInit::Hops(n))?;
        let b = compute_bounds(g, &nb, horizon)?.bounds;
        for i in 0..n {
            let h = oracle.get(i, j);
            let dev = (b.ho(i) - h).abs().max((b.hp(i) - h).abs());
            r.record(dev, || format!("h({i},{j})={h} ho={} hp={}", b.ho(i), b.hp(i)));
        }
    }
    Ok(r)
}

/// Across consecutive expansion steps: `ho` never decreases, `hp` never
/// increases, `lb` never decreases.
pub fn check_monotonicity(g: &Graph, params: &GranchParams) -> Result<FamilyReport> {
    let mut r = FamilyReport::new("monotonicity", MONOTONE_SLACK);
    let n = g.node_count();
    for j in 0..n {
        let mut prev: Option<DestinationBounds> = None;
        expand_destination(g, j, params, |_, sweep| {
            let cur = &sweep.bounds;
            if let Some(p) = &prev {
                for i in 0..n {
                    r.record(p.ho(i) - cur.ho(i), || {
                        format!("ho({i},{j}) fell {} -> {}", p.ho(i), cur.ho(i))
                    });
                    r.record(cur.hp(i) - p.hp(i), || {
                        format!("hp({i},{j}) rose {} -> {}", p.hp(i), cur.hp(i))
                    });
                }
                r.record(p.lb() - cur.lb(), || format!("lb({j}) fell {} -> {}", p.lb(), cur.lb()));
            }
            prev = Some(cur.clone());
        })?;
    }
    Ok(r)
}

/// Every pair left out of the final neighborhoods has `h^T >= T'`.
pub fn check_exclusion(g: &Graph, params: &GranchParams, oracle: &TruncatedMatrix) -> Result<FamilyReport> {
    let mut r = FamilyReport::new("exclusion", ORACLE_SLACK);
    let index = expand_ap(g, params)?;
    for j in 0..g.node_count() {
        if index.unresolved().contains(&j) {
            continue;
        }
        for i in 0..g.node_count() {
            if !index.ap().contains(i, j) {
                let h = oracle.get(i, j);
                r.record(params.range - h, || format!("excluded ({i},{j}) has h={h} < T'"));
            }
        }
    }
    if let Err(e) = index.ap().audit(g) {
        r.record(f64::INFINITY, || e);
    }
    Ok(r)
}

/// Reference radius for the query `i`: the k-th smallest exact `c^T(i, .)`
/// among nodes within `2T'`, or `2T'` when fewer than `k` qualify.
pub fn reference_radius(oracle: &TruncatedMatrix, i: usize, k: usize, range: f64) -> f64 {
    let cap = 2.0 * range;
    let mut c: Vec<f64> = (0..oracle.node_count())
        .filter(|&j| j != i)
        .map(|j| oracle.commute(i, j))
        .filter(|&c| c <= cap)
        .collect();
    if c.len() < k {
        return cap;
    }
    c.sort_by(f64::total_cmp);
    c[k - 1]
}

/// Every guaranteed commute neighbor is within `(1+ε)` of the reference
/// radius.
pub fn check_epsilon(
    g: &Graph,
    params: &GranchParams,
    knn: &KnnParams,
    oracle: &TruncatedMatrix,
) -> Result<FamilyReport> {
    let mut r = FamilyReport::new("epsilon_guarantee", ORACLE_SLACK);
    let mut index = expand_ap(g, params)?;
    let results = knn_commute_all(g, &mut index, knn)?;
    for res in &results {
        let i = res.query;
        let radius = reference_radius(oracle, i, knn.k, params.range);
        let allowed = radius * (1.0 + knn.epsilon);
        for e in &res.entries {
            let c = oracle.commute(i, e.node);
            r.record(c - allowed, || {
                format!("query {i}: neighbor {} has c={c} > {allowed}", e.node)
            });
            r.record(e.lower - c, || format!("co({i},{})={} > c={c}", e.node, e.lower));
            r.record(c - e.upper, || format!("cp({i},{})={} < c={c}", e.node, e.upper));
        }
    }
    Ok(r)
}

/// Settings for [`run_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub params: GranchParams,
    pub knn: KnnParams,
    /// Largest graph the dense oracles will accept.
    pub cap: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            params: GranchParams::default(),
            knn: KnnParams::default(),
            cap: crate::oracle::DENSE_CAP,
        }
    }
}

/// Runs every family on `g`.
pub fn run_suite(g: &Graph, cfg: &SuiteConfig) -> Result<Vec<FamilyReport>> {
    let n = g.node_count();
    if n > cfg.cap {
        return Err(Error::TooLarge { n, cap: cfg.cap });
    }
    cfg.params.validate()?;
    cfg.knn.validate()?;
    let horizon = cfg.params.horizon;
    let oracle = TruncatedMatrix::compute_with(g, horizon, Default::default(), cfg.cap)?;
    let mut out = vec![check_dp_matrix_power(g, horizon)?];
    let mut sandwich = check_sandwich(g, &cfg.params, &oracle)?;
    sandwich.merge(check_collapse(g, horizon, &oracle)?);
    out.push(sandwich);
    out.push(check_monotonicity(g, &cfg.params)?);
    out.push(check_exclusion(g, &cfg.params, &oracle)?);
    out.push(check_epsilon(g, &cfg.params, &cfg.knn, &oracle)?);
    Ok(out)
}
