//! Text formats for checkpoints and query output.
//!
//! AP dump layout, fields tab separated:
//!
//! ```text
//! # granch-ap n=<n> T=<T> T'=<T'>
//! [pairs]
//! i j ho hp
//! ...
//! [destinations]
//! j lb boundary_min_Tm1 boundary_min_Tm2
//! ...
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so reading a dump
//! back reproduces the stored bounds bit for bit.

use std::fmt::Write as _;

use crate::ap::{GranchIndex, GranchParams};
use crate::bounds::{DestinationBounds, Neighborhood};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::knn::NeighborResult;

pub fn format_ap_dump(index: &GranchIndex) -> String {
    let p = index.params();
    let bounds = index.bounds();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# granch-ap n={} T={} T'={}",
        bounds.node_count(),
        p.horizon,
        p.range
    );
    s.push_str("[pairs]\n");
    for b in bounds.destinations() {
        for (k, &i) in b.members.iter().enumerate() {
            let _ = writeln!(s, "{i}\t{}\t{}\t{}", b.dst, b.ho[k], b.hp[k]);
        }
    }
    s.push_str("[destinations]\n");
    for b in bounds.destinations() {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}",
            b.dst,
            b.lb(),
            b.boundary_min_tm1,
            b.boundary_min_tm2
        );
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn header_value<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
}

/// Parses an AP dump against the graph it was built on. `base` supplies the
/// build parameters not recorded in the dump (init, batch, size cap).
pub fn parse_ap_dump(text: &str, g: &Graph, base: &GranchParams) -> Result<GranchIndex> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty dump"))?;
    if !header.starts_with("# granch-ap") {
        return Err(perr(1, "missing '# granch-ap' header"));
    }
    let n: usize = header_value(header, "n")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| perr(1, "bad n"))?;
    let horizon: usize = header_value(header, "T")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| perr(1, "bad T"))?;
    let range: f64 = header_value(header, "T'")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| perr(1, "bad T'"))?;
    if n != g.node_count() {
        return Err(Error::Spec(format!(
            "dump has {n} nodes but the graph has {}",
            g.node_count()
        )));
    }

    let mut members: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); n];
    let mut minima: Vec<Option<(f64, f64)>> = vec![None; n];
    let mut section = "";
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "[pairs]" || line == "[destinations]" {
            section = if line == "[pairs]" { "pairs" } else { "destinations" };
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(perr(line_no, format!("expected 4 fields, got {}", f.len())));
        }
        let id = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| perr(line_no, format!("bad id '{s}'")))?;
            if v >= n {
                return Err(perr(line_no, format!("id {v} out of range")));
            }
            Ok(v)
        };
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| perr(line_no, format!("bad number '{s}'")))
        };
        match section {
            "pairs" => {
                let (i, j) = (id(f[0])?, id(f[1])?);
                members[j].push((i, num(f[2])?, num(f[3])?));
            }
            "destinations" => {
                let j = id(f[0])?;
                minima[j] = Some((num(f[2])?, num(f[3])?));
            }
            _ => return Err(perr(line_no, "record outside a section")),
        }
    }

    let mut neighborhoods = Vec::with_capacity(n);
    let mut bounds = Vec::with_capacity(n);
    for (j, mut rows) in members.into_iter().enumerate() {
        rows.sort_by_key(|r| r.0);
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Spec(format!("duplicate pair for destination {j}")));
        }
        if rows.iter().all(|r| r.0 != j) {
            return Err(Error::Spec(format!("destination {j} missing from its own set")));
        }
        let (m1, m2) = minima[j]
            .ok_or_else(|| Error::Spec(format!("no destination record for {j}")))?;
        let ids: Vec<usize> = rows.iter().map(|r| r.0).collect();
        neighborhoods.push(Neighborhood::from_members(g, j, ids.clone()));
        bounds.push(DestinationBounds {
            dst: j,
            horizon,
            members: ids,
            ho: rows.iter().map(|r| r.1).collect(),
            hp: rows.iter().map(|r| r.2).collect(),
            boundary_min_tm1: m1,
            boundary_min_tm2: m2,
        });
    }
    let params = GranchParams {
        horizon,
        range,
        ..base.clone()
    };
    GranchIndex::from_parts(&params, neighborhoods, bounds)
}

/// Neighbor table: `query rank neighbor co cp guaranteed`, guaranteed rows
/// ranked from 1, undecided rows appended with rank -1.
pub fn format_neighbors(results: &[NeighborResult]) -> String {
    let mut s = String::from("query\trank\tneighbor\tco\tcp\tguaranteed\n");
    for r in results {
        for (rank, e) in r.entries.iter().enumerate() {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t1",
                r.query,
                rank + 1,
                e.node,
                e.lower,
                e.upper
            );
        }
        for b in &r.undecided {
            let _ = writeln!(s, "{}\t-1\t{}\t{}\t{}\t0", r.query, b.node, b.lower, b.upper);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ap::expand_ap;
    use crate::knn::{knn_commute_all, KnnParams};
    use crate::simgen::random_connected;

    #[test]
    fn dump_round_trip() {
        let g = random_connected(25, 15, true, 4).unwrap();
        let params = GranchParams::new(6, 5.95);
        let idx = expand_ap(&g, &params).unwrap();
        let text = format_ap_dump(&idx);
        let back = parse_ap_dump(&text, &g, &params).unwrap();
        assert_eq!(back.bounds(), idx.bounds());
        assert_eq!(back.ap(), idx.ap());
        assert_eq!(format_ap_dump(&back), text);
    }

    #[test]
    fn dump_errors() {
        let g = random_connected(5, 2, false, 1).unwrap();
        let params = GranchParams::new(3, 2.9);
        assert!(parse_ap_dump("", &g, &params).is_err());
        assert!(parse_ap_dump("hello\n", &g, &params).is_err());
        let idx = expand_ap(&g, &params).unwrap();
        let text = format_ap_dump(&idx);
        let other = random_connected(6, 2, false, 1).unwrap();
        assert!(parse_ap_dump(&text, &other, &params).is_err());
        let truncated: String = text.lines().filter(|l| !l.starts_with("4\t")).map(|l| format!("{l}\n")).collect();
        assert!(parse_ap_dump(&truncated, &g, &params).is_err());
    }

    #[test]
    fn neighbor_table_layout() {
        let g = random_connected(12, 6, false, 2).unwrap();
        let mut idx = expand_ap(&g, &GranchParams::new(6, 5.95)).unwrap();
        let res = knn_commute_all(&g, &mut idx, &KnnParams { k: 2, epsilon: 0.0, max_rounds: 0 }).unwrap();
        let tsv = format_neighbors(&res);
        let mut lines = tsv.lines();
        assert_eq!(lines.next(), Some("query\trank\tneighbor\tco\tcp\tguaranteed"));
        for l in lines {
            let f: Vec<&str> = l.split('\t').collect();
            assert_eq!(f.len(), 6);
            assert_eq!(f[1] == "-1", f[5] == "0");
        }
    }
}
