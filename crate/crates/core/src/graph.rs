//! Attack graphs over host nodes: classical generation from a vulnerability
//! inventory, alert-derived generation, simple-path enumeration, reachability
//! queries, risk scoring, noise injection, and serialization.
//!
//! Edges carry the exploited vulnerability and a weight in [0,1]
//! (cvss_base / 10 for real edges). Path risk is the product of edge weights
//! and victim risk the mean over all enumerated paths into a victim.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{fraction_count, seeded_rng, seeded_shuffle};
use crate::threat::{Alert, NetworkInventory};

/// Default maximum number of edges per enumerated path.
pub const DEFAULT_L_MAX: usize = 4;
/// Default enumeration cap; hitting it is an error, never a silent truncation.
pub const DEFAULT_PATH_CAP: usize = 1_000_000;
/// Weight carried by injected synthetic edges.
pub const SYNTHETIC_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeProvenance {
    Scraped,
    AlertDerived,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: String,
    pub dst: String,
    pub vuln_id: String,
    pub weight: f64,
    pub provenance: EdgeProvenance,
}

impl Edge {
    fn triple(&self) -> (&str, &str, &str) {
        (&self.src, &self.dst, &self.vuln_id)
    }
}

/// Host-based attack graph. Edges are kept sorted by (src, dst, vuln_id) and
/// deduplicated at the triple level; the graph is immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackGraph {
    pub variant_tag: String,
    pub nodes: BTreeSet<String>,
    edges: Vec<Edge>,
}

impl AttackGraph {
    pub fn new(variant_tag: &str, nodes: BTreeSet<String>, mut edges: Vec<Edge>) -> AttackGraph {
        let mut nodes = nodes;
        for e in &edges {
            nodes.insert(e.src.clone());
            nodes.insert(e.dst.clone());
        }
        edges.sort_by(|a, b| a.triple().cmp(&b.triple()));
        edges.dedup_by(|a, b| a.triple() == b.triple());
        AttackGraph {
            variant_tag: variant_tag.to_string(),
            nodes,
            edges,
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges with real provenance (Scraped or AlertDerived).
    pub fn real_edge_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| e.provenance != EdgeProvenance::Synthetic)
            .count()
    }

    /// Out-edges grouped per source node, preserving the global ordering.
    fn adjacency(&self) -> BTreeMap<&str, Vec<&Edge>> {
        let mut adj: BTreeMap<&str, Vec<&Edge>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(e.src.as_str()).or_default().push(e);
        }
        adj
    }

    /// Distinct (src, dst) successor pairs, node level.
    fn node_successors(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(e.src.as_str())
                .or_default()
                .insert(e.dst.as_str());
        }
        adj
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<AttackGraph> {
        let parsed: AttackGraph = serde_json::from_str(text)?;
        // renormalize so hand-edited files keep the ordering invariant
        Ok(AttackGraph::new(
            &parsed.variant_tag,
            parsed.nodes,
            parsed.edges,
        ))
    }

    /// Graphviz rendering; synthetic edges dashed, alert-derived bold.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph attack_graph {\n  rankdir=LR;\n");
        let _ = writeln!(out, "  label=\"{}\";", self.variant_tag);
        for n in &self.nodes {
            let _ = writeln!(out, "  \"{n}\";");
        }
        for e in &self.edges {
            let style = match e.provenance {
                EdgeProvenance::Scraped => "solid",
                EdgeProvenance::AlertDerived => "bold",
                EdgeProvenance::Synthetic => "dashed",
            };
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{} ({:.2})\", style={}];",
                e.src, e.dst, e.vuln_id, e.weight, style
            );
        }
        out.push_str("}\n");
        out
    }
}

/// One simple attack path: a chained edge list plus its product risk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackPath {
    pub edges: Vec<Edge>,
    pub risk: f64,
}

impl AttackPath {
    pub fn node_sequence(&self) -> Vec<&str> {
        let mut seq = Vec::with_capacity(self.edges.len() + 1);
        if let Some(first) = self.edges.first() {
            seq.push(first.src.as_str());
        }
        for e in &self.edges {
            seq.push(e.dst.as_str());
        }
        seq
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Path-level summary of a generated graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgStats {
    pub variant_tag: String,
    pub node_count: usize,
    pub edge_count: usize,
    pub path_count: usize,
    pub generation_seconds: f64,
    pub avg_risk: f64,
}

/// Classical generation: one edge per (reachable pair, vulnerability on the
/// destination host) — an attacker at `src` can exploit anything hosted on a
/// directly reachable `dst`.
pub fn generate_classical(inventory: &NetworkInventory) -> AttackGraph {
    let table = inventory.vuln_table();
    let nodes: BTreeSet<String> = inventory.hosts.iter().map(|h| h.ip.clone()).collect();
    let mut edges = Vec::new();
    for (src, dst) in &inventory.reachability {
        let Some(host) = inventory.host(dst) else {
            continue;
        };
        for vid in &host.vulns {
            let Some(vuln) = table.get(vid.as_str()) else {
                continue;
            };
            edges.push(Edge {
                src: src.clone(),
                dst: dst.clone(),
                vuln_id: vid.clone(),
                weight: vuln.cvss_base / 10.0,
                provenance: EdgeProvenance::Scraped,
            });
        }
    }
    AttackGraph::new("Scrape", nodes, edges)
}

/// Alert-derived generation: keep only (src, dst, vuln) triples witnessed by
/// at least one alert, consistent with inventory reachability, and placed on
/// the destination host. The edge set is therefore always a subset of the
/// classical graph's.
pub fn generate_from_alerts(inventory: &NetworkInventory, alerts: &[Alert]) -> Result<AttackGraph> {
    let table = inventory.vuln_table();
    let reach = inventory.reachability_set();
    let nodes: BTreeSet<String> = inventory.hosts.iter().map(|h| h.ip.clone()).collect();

    let mut triples: BTreeSet<(String, String, String)> = BTreeSet::new();
    for alert in alerts {
        if !table.contains_key(alert.vuln_id.as_str()) {
            return Err(Error::UnknownVulnerability(alert.vuln_id.clone()));
        }
        if !reach.contains(&(alert.src_ip.as_str(), alert.dst_ip.as_str())) {
            continue;
        }
        let hosted = inventory
            .host(&alert.dst_ip)
            .is_some_and(|h| h.vulns.iter().any(|v| v == &alert.vuln_id));
        if hosted {
            triples.insert((
                alert.src_ip.clone(),
                alert.dst_ip.clone(),
                alert.vuln_id.clone(),
            ));
        }
    }

    let edges = triples
        .into_iter()
        .map(|(src, dst, vuln_id)| {
            let weight = table[vuln_id.as_str()].cvss_base / 10.0;
            Edge {
                src,
                dst,
                vuln_id,
                weight,
                provenance: EdgeProvenance::AlertDerived,
            }
        })
        .collect();
    Ok(AttackGraph::new("ET", nodes, edges))
}

/// Product of edge weights; monotonically non-increasing in path length.
pub fn path_risk(edges: &[Edge]) -> f64 {
    edges.iter().map(|e| e.weight).product()
}

/// All simple paths from any source to any target with at most `l_max`
/// edges, in lexicographic order of (node sequence, vuln ids). Parallel
/// edges between the same hosts yield distinct paths.
pub fn enumerate_paths(
    ag: &AttackGraph,
    sources: &BTreeSet<String>,
    targets: &BTreeSet<String>,
    l_max: usize,
) -> Result<Vec<AttackPath>> {
    enumerate_paths_capped(ag, sources, targets, l_max, DEFAULT_PATH_CAP)
}

pub fn enumerate_paths_capped(
    ag: &AttackGraph,
    sources: &BTreeSet<String>,
    targets: &BTreeSet<String>,
    l_max: usize,
    cap: usize,
) -> Result<Vec<AttackPath>> {
    assert!(l_max >= 1, "l_max must be at least 1");
    let adj = ag.adjacency();
    let mut paths = Vec::new();

    struct Dfs<'a> {
        adj: &'a BTreeMap<&'a str, Vec<&'a Edge>>,
        targets: &'a BTreeSet<String>,
        l_max: usize,
        cap: usize,
    }

    impl<'a> Dfs<'a> {
        fn walk(
            &self,
            node: &'a str,
            visited: &mut Vec<&'a str>,
            stack: &mut Vec<&'a Edge>,
            out: &mut Vec<AttackPath>,
        ) -> Result<()> {
            if stack.len() >= self.l_max {
                return Ok(());
            }
            let Some(out_edges) = self.adj.get(node) else {
                return Ok(());
            };
            for edge in out_edges {
                let next = edge.dst.as_str();
                if visited.contains(&next) {
                    continue; // simple paths only
                }
                stack.push(edge);
                if self.targets.contains(next) {
                    if out.len() >= self.cap {
                        return Err(Error::LimitExceeded(self.cap));
                    }
                    let edges: Vec<Edge> = stack.iter().map(|e| (*e).clone()).collect();
                    let risk = path_risk(&edges);
                    out.push(AttackPath { edges, risk });
                }
                visited.push(next);
                self.walk(next, visited, stack, out)?;
                visited.pop();
                stack.pop();
            }
            Ok(())
        }
    }

    let dfs = Dfs {
        adj: &adj,
        targets,
        l_max,
        cap,
    };
    for source in sources {
        if !ag.nodes.contains(source) {
            continue;
        }
        let mut visited = vec![source.as_str()];
        let mut stack = Vec::new();
        dfs.walk(source.as_str(), &mut visited, &mut stack, &mut paths)?;
    }
    Ok(paths)
}

/// Directed reachability over the edge set, any path length >= 1. Unknown
/// ips answer false; (x, x) answers true only when a cycle through x exists.
pub fn has_attack_path(ag: &AttackGraph, src_ip: &str, dst_ip: &str) -> bool {
    if !ag.nodes.contains(src_ip) || !ag.nodes.contains(dst_ip) {
        return false;
    }
    let adj = ag.node_successors();
    let mut visited: BTreeSet<&str> = BTreeSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    queue.push_back(src_ip);
    while let Some(node) = queue.pop_front() {
        if let Some(succ) = adj.get(node) {
            for &next in succ {
                if next == dst_ip {
                    return true;
                }
                if visited.insert(next) {
                    queue.push_back(next);
                }
            }
        }
    }
    false
}

/// Precomputed transitive reachability for batch queries. Built once per
/// graph, then shared read-only.
#[derive(Debug, Clone)]
pub struct ReachabilityIndex {
    index: BTreeMap<String, usize>,
    reach: Vec<Vec<bool>>,
}

impl ReachabilityIndex {
    pub fn build(ag: &AttackGraph) -> ReachabilityIndex {
        let index: BTreeMap<String, usize> = ag
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let n = index.len();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (src, dsts) in ag.node_successors() {
            let si = index[src];
            for d in dsts {
                succ[si].push(index[d]);
            }
        }
        let mut reach = vec![vec![false; n]; n];
        for start in 0..n {
            let mut queue: VecDeque<usize> = succ[start].iter().copied().collect();
            while let Some(node) = queue.pop_front() {
                if !reach[start][node] {
                    reach[start][node] = true;
                    queue.extend(succ[node].iter().copied());
                }
            }
        }
        ReachabilityIndex { index, reach }
    }

    pub fn query(&self, src_ip: &str, dst_ip: &str) -> bool {
        match (self.index.get(src_ip), self.index.get(dst_ip)) {
            (Some(&s), Some(&d)) => self.reach[s][d],
            _ => false,
        }
    }
}

/// Mean path risk over all enumerated paths ending at `victim`; 0 when no
/// path reaches it.
pub fn victim_risk(
    ag: &AttackGraph,
    victim_ip: &str,
    sources: &BTreeSet<String>,
    l_max: usize,
) -> Result<f64> {
    let targets = BTreeSet::from([victim_ip.to_string()]);
    let paths = enumerate_paths(ag, sources, &targets, l_max)?;
    if paths.is_empty() {
        return Ok(0.0);
    }
    Ok(paths.iter().map(|p| p.risk).sum::<f64>() / paths.len() as f64)
}

/// Degrade the graph by adding one synthetic edge per missing ordered node
/// pair with independent probability `p`. Existing edges are untouched;
/// p = 0 returns an identical edge set.
pub fn inject_noise(ag: &AttackGraph, p: f64, seed: u64) -> AttackGraph {
    assert!(
        (0.0..=1.0).contains(&p),
        "noise probability must lie in [0,1]"
    );
    let connected: BTreeSet<(&str, &str)> = ag
        .edges
        .iter()
        .map(|e| (e.src.as_str(), e.dst.as_str()))
        .collect();

    let mut rng = seeded_rng(seed);
    let mut edges = ag.edges.clone();
    let mut synthetic = 0usize;
    for src in &ag.nodes {
        for dst in &ag.nodes {
            if src == dst || connected.contains(&(src.as_str(), dst.as_str())) {
                continue;
            }
            if rng.gen::<f64>() < p {
                synthetic += 1;
                edges.push(Edge {
                    src: src.clone(),
                    dst: dst.clone(),
                    vuln_id: format!("SYN-{synthetic}"),
                    weight: SYNTHETIC_WEIGHT,
                    provenance: EdgeProvenance::Synthetic,
                });
            }
        }
    }
    AttackGraph::new(&ag.variant_tag, ag.nodes.clone(), edges)
}

/// Node union plus triple-level edge union.
pub fn combine(a: &AttackGraph, b: &AttackGraph, tag: &str) -> AttackGraph {
    let nodes: BTreeSet<String> = a.nodes.union(&b.nodes).cloned().collect();
    let mut edges = a.edges.clone();
    edges.extend(b.edges.iter().cloned());
    AttackGraph::new(tag, nodes, edges)
}

/// Keep round(fraction * |edges|) edges chosen by seeded shuffle; nodes are
/// preserved. Tagged "Sub(<parent tag>)".
pub fn subset(ag: &AttackGraph, fraction: f64, seed: u64) -> AttackGraph {
    debug_assert!(fraction > 0.0 && fraction <= 1.0);
    let mut edges = ag.edges.clone();
    seeded_shuffle(&mut edges, seed);
    edges.truncate(fraction_count(fraction.clamp(0.0, 1.0), edges.len()));
    AttackGraph::new(&format!("Sub({})", ag.variant_tag), ag.nodes.clone(), edges)
}

/// Path-count / risk summary for a generated graph. `generation_seconds` is
/// supplied by the caller that timed the build.
pub fn compute_stats(
    ag: &AttackGraph,
    sources: &BTreeSet<String>,
    targets: &BTreeSet<String>,
    l_max: usize,
    generation_seconds: f64,
) -> Result<AgStats> {
    compute_stats_capped(
        ag,
        sources,
        targets,
        l_max,
        generation_seconds,
        DEFAULT_PATH_CAP,
    )
}

pub fn compute_stats_capped(
    ag: &AttackGraph,
    sources: &BTreeSet<String>,
    targets: &BTreeSet<String>,
    l_max: usize,
    generation_seconds: f64,
    cap: usize,
) -> Result<AgStats> {
    let paths = enumerate_paths_capped(ag, sources, targets, l_max, cap)?;
    let avg_risk = if paths.is_empty() {
        0.0
    } else {
        paths.iter().map(|p| p.risk).sum::<f64>() / paths.len() as f64
    };
    Ok(AgStats {
        variant_tag: ag.variant_tag.clone(),
        node_count: ag.nodes.len(),
        edge_count: ag.edge_count(),
        path_count: paths.len(),
        generation_seconds,
        avg_risk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::threat::{Host, Service, Vulnerability};

    fn graph(tag: &str, nodes: &[&str], edges: &[(&str, &str, &str, f64)]) -> AttackGraph {
        AttackGraph::new(
            tag,
            nodes.iter().map(|s| s.to_string()).collect(),
            edges
                .iter()
                .map(|(s, d, v, w)| Edge {
                    src: s.to_string(),
                    dst: d.to_string(),
                    vuln_id: v.to_string(),
                    weight: *w,
                    provenance: EdgeProvenance::Scraped,
                })
                .collect(),
        )
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn two_host_inventory() -> NetworkInventory {
        NetworkInventory {
            hosts: vec![
                Host {
                    ip: "A".into(),
                    services: vec![],
                    vulns: vec![],
                    external: true,
                },
                Host {
                    ip: "B".into(),
                    services: vec![Service {
                        name: "ftp".into(),
                        port: 21,
                    }],
                    vulns: vec!["v1".into(), "v2".into()],
                    external: false,
                },
            ],
            vulnerabilities: vec![
                Vulnerability {
                    id: "v1".into(),
                    service: "ftp".into(),
                    cvss_base: 9.0,
                    description: String::new(),
                },
                Vulnerability {
                    id: "v2".into(),
                    service: "ftp".into(),
                    cvss_base: 5.0,
                    description: String::new(),
                },
            ],
            reachability: vec![("A".into(), "B".into())],
        }
    }

    #[test]
    fn classical_enumerates_pair_times_vuln() {
        let ag = generate_classical(&two_host_inventory());
        assert_eq!(ag.variant_tag, "Scrape");
        assert_eq!(ag.edge_count(), 2);
        let triples: Vec<_> = ag
            .edges()
            .iter()
            .map(|e| (e.src.as_str(), e.vuln_id.as_str()))
            .collect();
        assert_eq!(triples, vec![("A", "v1"), ("A", "v2")]);
        assert_eq!(ag.edges()[0].weight, 0.9);
    }

    #[test]
    fn classical_with_empty_reachability_has_no_edges() {
        let mut inv = two_host_inventory();
        inv.reachability.clear();
        let ag = generate_classical(&inv);
        assert_eq!(ag.nodes.len(), 2);
        assert_eq!(ag.edge_count(), 0);
    }

    #[test]
    fn alert_graph_keeps_only_witnessed_triples() {
        let inv = two_host_inventory();
        let alert = |vuln: &str| Alert {
            sid: 1,
            vuln_id: vuln.into(),
            src_ip: "A".into(),
            dst_ip: "B".into(),
            flow_id: "f".into(),
        };

        let empty = generate_from_alerts(&inv, &[]).unwrap();
        assert_eq!(empty.edge_count(), 0);
        assert_eq!(empty.nodes.len(), 2);

        let ag = generate_from_alerts(&inv, &[alert("v1"), alert("v1")]).unwrap();
        assert_eq!(ag.variant_tag, "ET");
        assert_eq!(ag.edge_count(), 1);
        assert_eq!(ag.edges()[0].vuln_id, "v1");
        assert_eq!(ag.edges()[0].provenance, EdgeProvenance::AlertDerived);

        // endpoints outside reachability contribute nothing
        let off = Alert {
            sid: 1,
            vuln_id: "v1".into(),
            src_ip: "B".into(),
            dst_ip: "A".into(),
            flow_id: "f".into(),
        };
        let ag = generate_from_alerts(&inv, &[off]).unwrap();
        assert_eq!(ag.edge_count(), 0);

        // unknown vulnerability is an error
        let bad = Alert {
            sid: 1,
            vuln_id: "v404".into(),
            src_ip: "A".into(),
            dst_ip: "B".into(),
            flow_id: "f".into(),
        };
        assert!(matches!(
            generate_from_alerts(&inv, &[bad]),
            Err(Error::UnknownVulnerability(_))
        ));
    }

    #[test]
    fn alert_edges_are_subset_of_classical() {
        let inv = two_host_inventory();
        let alerts = vec![Alert {
            sid: 1,
            vuln_id: "v2".into(),
            src_ip: "A".into(),
            dst_ip: "B".into(),
            flow_id: "f".into(),
        }];
        let et = generate_from_alerts(&inv, &alerts).unwrap();
        let scrape = generate_classical(&inv);
        for e in et.edges() {
            assert!(scrape.edges().iter().any(|s| s.triple() == e.triple()));
        }
    }

    #[test]
    fn enumerate_chain_and_diamond() {
        let chain = graph(
            "t",
            &["A", "B", "C"],
            &[("A", "B", "v1", 0.9), ("B", "C", "v2", 0.8)],
        );
        let paths = enumerate_paths(&chain, &set(&["A"]), &set(&["C"]), 3).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].len(), 2);
        assert!((paths[0].risk - 0.72).abs() < 1e-12);

        let diamond = graph(
            "t",
            &["A", "B", "C", "D"],
            &[
                ("A", "B", "v1", 0.5),
                ("B", "D", "v2", 0.5),
                ("A", "C", "v3", 0.5),
                ("C", "D", "v4", 0.5),
            ],
        );
        let paths = enumerate_paths(&diamond, &set(&["A"]), &set(&["D"]), 3).unwrap();
        assert_eq!(paths.len(), 2);
        // lexicographic by node sequence: A,B,D then A,C,D
        assert_eq!(paths[0].node_sequence(), vec!["A", "B", "D"]);
        assert_eq!(paths[1].node_sequence(), vec!["A", "C", "D"]);

        let none = enumerate_paths(&diamond, &set(&["A"]), &set(&["D"]), 1).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn parallel_edges_yield_distinct_paths() {
        let ag = graph(
            "t",
            &["A", "B"],
            &[("A", "B", "v1", 0.9), ("A", "B", "v2", 0.5)],
        );
        let paths = enumerate_paths(&ag, &set(&["A"]), &set(&["B"]), 2).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].edges[0].vuln_id, "v1");
        assert_eq!(paths[1].edges[0].vuln_id, "v2");
    }

    #[test]
    fn enumeration_cap_is_an_error_not_truncation() {
        let ag = graph(
            "t",
            &["A", "B", "C", "D"],
            &[
                ("A", "B", "v1", 0.5),
                ("A", "C", "v2", 0.5),
                ("B", "D", "v3", 0.5),
                ("C", "D", "v4", 0.5),
            ],
        );
        let err =
            enumerate_paths_capped(&ag, &set(&["A"]), &set(&["B", "C", "D"]), 3, 2).unwrap_err();
        assert!(matches!(err, Error::LimitExceeded(2)));
    }

    #[test]
    fn reachability_basics() {
        let ag = graph("t", &["A", "B"], &[("A", "B", "v1", 0.5)]);
        assert!(has_attack_path(&ag, "A", "B"));
        assert!(!has_attack_path(&ag, "B", "A"));
        assert!(!has_attack_path(&ag, "A", "A")); // acyclic: no self path
        assert!(!has_attack_path(&ag, "A", "Z")); // unknown ip

        let cycle = graph(
            "t",
            &["A", "B"],
            &[("A", "B", "v1", 0.5), ("B", "A", "v2", 0.5)],
        );
        assert!(has_attack_path(&cycle, "A", "A"));

        let idx = ReachabilityIndex::build(&cycle);
        assert!(idx.query("A", "A"));
        assert!(idx.query("A", "B"));
        assert!(!idx.query("A", "Z"));
    }

    #[test]
    fn index_agrees_with_bfs_on_random_graphs() {
        use rand::Rng;
        let mut rng = seeded_rng(77);
        for _ in 0..50 {
            let n = rng.gen_range(2..=8);
            let names: Vec<String> = (0..n).map(|i| format!("h{i}")).collect();
            let mut edges = Vec::new();
            for s in 0..n {
                for d in 0..n {
                    if s != d && rng.gen::<f64>() < 0.3 {
                        edges.push((names[s].as_str(), names[d].as_str(), "v", 0.5));
                    }
                }
            }
            let refs: Vec<(&str, &str, &str, f64)> = edges.clone();
            let node_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            let ag = graph("t", &node_refs, &refs);
            let idx = ReachabilityIndex::build(&ag);
            for s in &names {
                for d in &names {
                    assert_eq!(idx.query(s, d), has_attack_path(&ag, s, d));
                }
            }
        }
    }

    #[test]
    fn risk_products_and_means() {
        let one = graph("t", &["A", "B"], &[("A", "B", "v", 0.77)]);
        let paths = enumerate_paths(&one, &set(&["A"]), &set(&["B"]), 4).unwrap();
        assert_eq!(paths[0].risk, 0.77);
        assert_eq!(victim_risk(&one, "B", &set(&["A"]), 4).unwrap(), 0.77);

        let zero = graph(
            "t",
            &["A", "B", "C"],
            &[("A", "B", "v1", 0.0), ("B", "C", "v2", 0.9)],
        );
        let paths = enumerate_paths(&zero, &set(&["A"]), &set(&["C"]), 4).unwrap();
        assert_eq!(paths[0].risk, 0.0);

        // two incident paths with risks 0.4 and 0.8 average to 0.6
        let two = graph(
            "t",
            &["A", "B", "C"],
            &[("A", "C", "v1", 0.4), ("B", "C", "v2", 0.8)],
        );
        let risk = victim_risk(&two, "C", &set(&["A", "B"]), 4).unwrap();
        assert!((risk - 0.6).abs() < 1e-12);

        // unreachable victim scores zero
        assert_eq!(victim_risk(&two, "A", &set(&["B"]), 4).unwrap(), 0.0);
    }

    #[test]
    fn noise_p0_is_identity_and_p1_is_total() {
        let ag = graph("t", &["A", "B", "C"], &[("A", "B", "v1", 0.9)]);
        let same = inject_noise(&ag, 0.0, 1);
        assert_eq!(same.edges(), ag.edges());

        let isolated = graph("t", &["A", "B", "C"], &[]);
        let full = inject_noise(&isolated, 1.0, 1);
        assert_eq!(full.edge_count(), 6); // all ordered pairs of 3 nodes
        assert!(full
            .edges()
            .iter()
            .all(|e| e.provenance == EdgeProvenance::Synthetic));
        assert!(full.edges().iter().all(|e| e.weight == SYNTHETIC_WEIGHT));
    }

    #[test]
    fn noise_count_tracks_binomial() {
        // 1000 candidate pairs at p=0.2: expect within 3 sigma of np
        let nodes: Vec<String> = (0..100).map(|i| format!("h{i:03}")).collect();
        let node_refs: Vec<&str> = nodes.iter().map(|s| s.as_str()).collect();
        let mut edges = Vec::new();
        // connect h000 -> everything and everything -> h000 except 1000 chosen pairs
        for s in 0..100 {
            for d in 0..100 {
                if s == d {
                    continue;
                }
                // leave pairs with s in 10..20 and d in 0..100 missing: 10*99 = 990... use explicit count
                edges.push((s, d));
            }
        }
        // carve out exactly 1000 candidate pairs
        let mut missing = 0;
        edges.retain(|&(s, d)| {
            if missing < 1000 && s < d {
                missing += 1;
                false
            } else {
                true
            }
        });
        assert_eq!(missing, 1000);
        let edge_specs: Vec<(String, String)> = edges
            .iter()
            .map(|&(s, d)| (nodes[s].clone(), nodes[d].clone()))
            .collect();
        let edge_refs: Vec<(&str, &str, &str, f64)> = edge_specs
            .iter()
            .map(|(s, d)| (s.as_str(), d.as_str(), "v", 0.5))
            .collect();
        let ag = graph("t", &node_refs, &edge_refs);

        let noisy = inject_noise(&ag, 0.2, 99);
        let added = noisy.edge_count() - ag.edge_count();
        let (mean, sigma) = (200.0, (1000.0_f64 * 0.2 * 0.8).sqrt());
        assert!(
            (added as f64 - mean).abs() <= 3.0 * sigma,
            "added {added} outside 3 sigma"
        );

        // deterministic per seed
        let again = inject_noise(&ag, 0.2, 99);
        assert_eq!(noisy.edges(), again.edges());
    }

    #[test]
    fn combine_union_and_idempotence() {
        let g = graph("g", &["A", "B"], &[("A", "B", "v1", 0.5)]);
        let empty = graph("e", &["A"], &[]);
        assert_eq!(combine(&g, &empty, "x").edges(), g.edges());
        assert_eq!(combine(&g, &g, "x").edges(), g.edges());

        let scrape = graph(
            "s",
            &["A", "B", "C"],
            &[
                ("A", "B", "v1", 0.5),
                ("A", "B", "v2", 0.5),
                ("A", "C", "v3", 0.5),
                ("B", "C", "v4", 0.5),
                ("B", "C", "v5", 0.5),
            ],
        );
        let et = graph(
            "e",
            &["A", "B", "C"],
            &[
                ("A", "B", "v1", 0.5),
                ("A", "B", "v9", 0.5),
                ("B", "C", "v8", 0.5),
            ],
        );
        let merged = combine(&scrape, &et, "Scrape+ET");
        assert_eq!(merged.edge_count(), 7); // 5 + 3 - 1 shared
        assert_eq!(merged.variant_tag, "Scrape+ET");
    }

    #[test]
    fn subset_counts_and_determinism() {
        let g = graph(
            "ET",
            &["A", "B", "C"],
            &[
                ("A", "B", "v1", 0.5),
                ("A", "B", "v2", 0.5),
                ("A", "C", "v3", 0.5),
                ("B", "C", "v4", 0.5),
                ("A", "B", "v5", 0.5),
                ("A", "C", "v6", 0.5),
                ("B", "C", "v7", 0.5),
                ("A", "B", "v8", 0.5),
                ("A", "C", "v9", 0.5),
                ("B", "C", "v10", 0.5),
            ],
        );
        assert_eq!(subset(&g, 1.0, 3).edges(), g.edges());
        let half = subset(&g, 0.5, 3);
        assert_eq!(half.edge_count(), 5);
        assert_eq!(half.nodes, g.nodes);
        assert_eq!(half.variant_tag, "Sub(ET)");
        assert_eq!(subset(&g, 0.5, 3).edges(), half.edges());
    }

    #[test]
    fn json_round_trip() {
        let g = graph(
            "Scrape",
            &["A", "B", "C"],
            &[("A", "B", "v1", 0.9), ("B", "C", "v2", 0.35)],
        );
        let text = g.to_json().unwrap();
        let back = AttackGraph::from_json(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn dot_output_mentions_every_edge() {
        let g = graph("Scrape", &["A", "B"], &[("A", "B", "v1", 0.9)]);
        let dot = g.to_dot();
        assert!(dot.contains("digraph"));
        assert!(dot.contains("\"A\" -> \"B\""));
        assert!(dot.contains("v1"));
    }
}
