//! Neighborhood expansion over all destinations and global bound lookup.

use rayon::prelude::*;

use crate::bounds::{compute_bounds, ApInit, DestinationBounds, Neighborhood, Sweep};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Parameters of the bounded-neighborhood build.
#[derive(Debug, Clone, PartialEq)]
pub struct GranchParams {
    /// Truncation horizon `T`.
    pub horizon: usize,
    /// Range threshold `T'`; neighborhoods grow until `lb > T'`.
    pub range: f64,
    pub init: ApInit,
    /// Number of lowest-`ho` boundary nodes whose neighbors are added per step.
    pub batch: usize,
    /// Upper limit on a neighborhood's size (defaults to `n`).
    pub size_cap: Option<usize>,
}

impl GranchParams {
    pub fn new(horizon: usize, range: f64) -> Self {
        GranchParams {
            horizon,
            range,
            init: ApInit::OneHop,
            batch: 1,
            size_cap: None,
        }
    }

    pub fn with_init(mut self, init: ApInit) -> Self {
        self.init = init;
        self
    }

    pub fn with_batch(mut self, batch: usize) -> Self {
        self.batch = batch;
        self
    }

    pub fn with_size_cap(mut self, cap: usize) -> Self {
        self.size_cap = Some(cap);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(Error::Spec(format!("T must be >= 2, got {}", self.horizon)));
        }
        if !(self.range >= 1.0 && self.range < self.horizon as f64) {
            return Err(Error::Spec(format!(
                "T' must satisfy 1 <= T' < T, got T'={} T={}",
                self.range, self.horizon
            )));
        }
        if self.batch == 0 {
            return Err(Error::Spec("batch must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for GranchParams {
    fn default() -> Self {
        GranchParams::new(6, 5.95)
    }
}

/// Active pairs: every destination's neighborhood plus the reverse index
/// `AP(i, *)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApSet {
    neighborhoods: Vec<Neighborhood>,
    reverse: Vec<Vec<usize>>,
    pairs: usize,
}

impl ApSet {
    fn assemble(neighborhoods: Vec<Neighborhood>) -> Self {
        let n = neighborhoods.len();
        let mut reverse = vec![Vec::new(); n];
        let mut pairs = 0;
        // destinations visited in ascending order, so each list ends up sorted
        for nb in &neighborhoods {
            pairs += nb.len();
            for &src in nb.members() {
                reverse[src].push(nb.dst());
            }
        }
        ApSet {
            neighborhoods,
            reverse,
            pairs,
        }
    }

    pub fn node_count(&self) -> usize {
        self.neighborhoods.len()
    }

    /// `AP(*, dst)`.
    pub fn neighborhood(&self, dst: usize) -> &Neighborhood {
        &self.neighborhoods[dst]
    }

    /// `AP(src, *)`: destinations whose neighborhood contains `src`, ascending.
    pub fn destinations_of(&self, src: usize) -> &[usize] {
        &self.reverse[src]
    }

    pub fn contains(&self, src: usize, dst: usize) -> bool {
        self.neighborhoods[dst].contains(src)
    }

    /// Total number of active pairs `(i, j)`, self pairs included.
    pub fn pair_count(&self) -> usize {
        self.pairs
    }

    /// `S_i = AP(i, *) ∪ AP(*, i)` without `i`, ascending.
    pub fn commute_candidates(&self, i: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self.reverse[i]
            .iter()
            .chain(self.neighborhoods[i].members())
            .copied()
            .filter(|&j| j != i)
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    fn grow(&mut self, g: &Graph, dst: usize, nodes: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let added = self.neighborhoods[dst].insert(g, nodes);
        for &src in &added {
            let list = &mut self.reverse[src];
            let at = list.binary_search(&dst).unwrap_err();
            list.insert(at, dst);
        }
        self.pairs += added.len();
        added
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn audit(&self, g: &Graph) -> std::result::Result<(), String> {
        let mut pairs = 0;
        for (j, nb) in self.neighborhoods.iter().enumerate() {
            if nb.dst() != j || !nb.contains(j) {
                return Err(format!("neighborhood {j} does not contain its destination"));
            }
            if nb.boundary() != nb.recompute_boundary(g).as_slice() {
                return Err(format!("stale boundary for destination {j}"));
            }
            for &i in nb.members() {
                if self.reverse[i].binary_search(&j).is_err() {
                    return Err(format!("reverse index misses ({i}, {j})"));
                }
            }
            pairs += nb.len();
        }
        for (i, dsts) in self.reverse.iter().enumerate() {
            for &j in dsts {
                if !self.neighborhoods[j].contains(i) {
                    return Err(format!("reverse index has extra ({i}, {j})"));
                }
            }
        }
        if pairs != self.pairs {
            return Err(format!("pair counter {} != {}", self.pairs, pairs));
        }
        Ok(())
    }
}

/// Final-horizon bounds for every destination.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTable {
    horizon: usize,
    per_dst: Vec<DestinationBounds>,
}

impl BoundsTable {
    pub fn from_destinations(horizon: usize, per_dst: Vec<DestinationBounds>) -> Self {
        BoundsTable { horizon, per_dst }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn node_count(&self) -> usize {
        self.per_dst.len()
    }

    pub fn destination(&self, dst: usize) -> &DestinationBounds {
        &self.per_dst[dst]
    }

    pub fn destinations(&self) -> &[DestinationBounds] {
        &self.per_dst
    }

    pub fn lb(&self, dst: usize) -> f64 {
        self.per_dst[dst].lb()
    }

    /// Lower bound on `h^T(i, j)`: the stored value inside `AP(*, j)`,
    /// otherwise `lb(j)`.
    pub fn global_ho(&self, i: usize, j: usize) -> f64 {
        self.per_dst[j].ho(i)
    }

    /// Upper bound on `h^T(i, j)`: the stored value inside `AP(*, j)`,
    /// otherwise `T`.
    pub fn global_hp(&self, i: usize, j: usize) -> f64 {
        self.per_dst[j].hp(i)
    }

    /// `(co, cp)` bounds on the truncated commute time between `i` and `j`.
    pub fn commute_bounds(&self, i: usize, j: usize) -> (f64, f64) {
        if i == j {
            return (0.0, 0.0);
        }
        (
            self.global_ho(i, j) + self.global_ho(j, i),
            self.global_hp(i, j) + self.global_hp(j, i),
        )
    }
}

/// How expansion of a single destination ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionStop {
    /// `lb > T'`: every outside node is provably out of range.
    Converged,
    /// The size cap was reached while `lb <= T'`.
    Capped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DestinationOutcome {
    pub stop: ExpansionStop,
    /// Number of bound sweeps performed.
    pub sweeps: usize,
}

/// Grows `AP(*, dst)` until `lb(dst) > T'`. `observe` sees the neighborhood
/// and its bounds after every sweep, including the final one.
pub fn expand_destination<F>(
    g: &Graph,
    dst: usize,
    params: &GranchParams,
    mut observe: F,
) -> Result<(Neighborhood, Sweep, DestinationOutcome)>
where
    F: FnMut(&Neighborhood, &Sweep),
{
    params.validate()?;
    let cap = params.size_cap.unwrap_or(g.node_count());
    let mut nb = Neighborhood::new(g, dst, params.init)?;
    let mut sweeps = 0;
    loop {
        let sweep = compute_bounds(g, &nb, params.horizon)?;
        sweeps += 1;
        observe(&nb, &sweep);
        let stop = if sweep.bounds.lb() > params.range {
            Some(ExpansionStop::Converged)
        } else if nb.len() >= cap {
            Some(ExpansionStop::Capped)
        } else {
            None
        };
        if let Some(stop) = stop {
            return Ok((nb, sweep, DestinationOutcome { stop, sweeps }));
        }
        let picks: Vec<usize> = sweep.expansion_order().into_iter().take(params.batch).collect();
        let added = nb.insert(
            g,
            picks.iter().flat_map(|&q| g.in_neighbors(q).iter().copied()),
        );
        if added.is_empty() {
            // only reachable when the boundary is empty, where lb = T > T'
            return Ok((
                nb,
                sweep,
                DestinationOutcome {
                    stop: ExpansionStop::Capped,
                    sweeps,
                },
            ));
        }
    }
}

/// Neighborhoods, their bounds, and build statistics.
#[derive(Debug, Clone)]
pub struct GranchIndex {
    params: GranchParams,
    ap: ApSet,
    bounds: BoundsTable,
    unresolved: Vec<usize>,
    sweeps: usize,
}

/// Builds the neighborhood of every destination (in parallel over
/// destinations) and assembles the reverse index afterwards.
pub fn expand_ap(g: &Graph, params: &GranchParams) -> Result<GranchIndex> {
    params.validate()?;
    let per_dst = (0..g.node_count())
        .into_par_iter()
        .map(|dst| expand_destination(g, dst, params, |_, _| {}))
        .collect::<Result<Vec<_>>>()?;
    let mut neighborhoods = Vec::with_capacity(per_dst.len());
    let mut bounds = Vec::with_capacity(per_dst.len());
    let mut unresolved = Vec::new();
    let mut sweeps = 0;
    for (nb, sweep, outcome) in per_dst {
        if outcome.stop == ExpansionStop::Capped {
            log::warn!(
                "destination {} hit the size cap with lb = {} <= T'",
                nb.dst(),
                sweep.bounds.lb()
            );
            unresolved.push(nb.dst());
        }
        sweeps += outcome.sweeps;
        neighborhoods.push(nb);
        bounds.push(sweep.bounds);
    }
    Ok(GranchIndex {
        params: params.clone(),
        ap: ApSet::assemble(neighborhoods),
        bounds: BoundsTable::from_destinations(params.horizon, bounds),
        unresolved,
        sweeps,
    })
}

impl GranchIndex {
    /// Builds an index from explicit neighborhoods without expanding them.
    pub fn from_neighborhoods(
        g: &Graph,
        params: &GranchParams,
        neighborhoods: Vec<Neighborhood>,
    ) -> Result<Self> {
        params.validate()?;
        if neighborhoods.len() != g.node_count()
            || neighborhoods.iter().enumerate().any(|(j, nb)| nb.dst() != j)
        {
            return Err(Error::Spec("one neighborhood per destination, in id order".into()));
        }
        let bounds = neighborhoods
            .par_iter()
            .map(|nb| compute_bounds(g, nb, params.horizon).map(|s| s.bounds))
            .collect::<Result<Vec<_>>>()?;
        let unresolved = bounds
            .iter()
            .filter(|b| b.lb() <= params.range)
            .map(|b| b.dst)
            .collect();
        Ok(GranchIndex {
            params: params.clone(),
            ap: ApSet::assemble(neighborhoods),
            bounds: BoundsTable::from_destinations(params.horizon, bounds),
            unresolved,
            sweeps: g.node_count(),
        })
    }

    /// Reassembles an index from stored neighborhoods and bounds, e.g. a
    /// checkpoint. Bounds must line up with the neighborhoods' members.
    pub fn from_parts(
        params: &GranchParams,
        neighborhoods: Vec<Neighborhood>,
        bounds: Vec<DestinationBounds>,
    ) -> Result<Self> {
        params.validate()?;
        if neighborhoods.len() != bounds.len() {
            return Err(Error::Spec("neighborhood and bounds counts differ".into()));
        }
        for (j, (nb, b)) in neighborhoods.iter().zip(&bounds).enumerate() {
            if nb.dst() != j || b.dst != j || nb.members() != b.members.as_slice() {
                return Err(Error::Spec(format!("bounds for destination {j} do not match its members")));
            }
            if b.horizon != params.horizon {
                return Err(Error::Spec(format!(
                    "bounds for destination {j} use T={}, expected {}",
                    b.horizon, params.horizon
                )));
            }
        }
        let unresolved = bounds
            .iter()
            .filter(|b| b.lb() <= params.range)
            .map(|b| b.dst)
            .collect();
        Ok(GranchIndex {
            params: params.clone(),
            ap: ApSet::assemble(neighborhoods),
            bounds: BoundsTable::from_destinations(params.horizon, bounds),
            unresolved,
            sweeps: 0,
        })
    }

    pub fn params(&self) -> &GranchParams {
        &self.params
    }

    pub fn ap(&self) -> &ApSet {
        &self.ap
    }

    pub fn bounds(&self) -> &BoundsTable {
        &self.bounds
    }

    /// Destinations whose neighborhood still has `lb <= T'` (size cap reached).
    pub fn unresolved(&self) -> &[usize] {
        &self.unresolved
    }

    /// Total bound sweeps run so far.
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn pair_count(&self) -> usize {
        self.ap.pair_count()
    }

    /// One expansion step of `AP(*, dst)`: add the neighbors of the boundary
    /// node(s) with smallest `ho^{T-1}` and recompute the bounds. Returns
    /// `false` when the boundary is empty and nothing can be added.
    pub fn expand_step(&mut self, g: &Graph, dst: usize) -> Result<bool> {
        g.check_node(dst)?;
        let sweep = compute_bounds(g, self.ap.neighborhood(dst), self.params.horizon)?;
        let picks: Vec<usize> = sweep
            .expansion_order()
            .into_iter()
            .take(self.params.batch)
            .collect();
        let added = self.ap.grow(
            g,
            dst,
            picks.iter().flat_map(|&q| g.in_neighbors(q).iter().copied()),
        );
        self.sweeps += 1;
        if added.is_empty() {
            return Ok(false);
        }
        let sweep = compute_bounds(g, self.ap.neighborhood(dst), self.params.horizon)?;
        self.sweeps += 1;
        if sweep.bounds.lb() > self.params.range {
            self.unresolved.retain(|&c| c != dst);
        }
        self.bounds.per_dst[dst] = sweep.bounds;
        Ok(true)
    }
}
