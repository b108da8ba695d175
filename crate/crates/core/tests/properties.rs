//! Property tests for the cross-cutting invariants.

use std::collections::BTreeSet;

use proptest::prelude::*;

use agids_core::flow::{sanitize_features, split, ClassLabel, Dataset, FlowRecord, Protocol};
use agids_core::graph::{
    enumerate_paths, inject_noise, path_risk, AttackGraph, Edge, EdgeProvenance, ReachabilityIndex,
};
use agids_core::integrate::refine_predictions;
use agids_core::threat::{limit_alerts, match_rules, Alert, MatchSpec, SignatureRule};

fn flow(i: usize, src: u8, dst: u8, port: u16, features: Vec<f64>) -> FlowRecord {
    FlowRecord {
        flow_id: format!("f{i}"),
        src_ip: format!("10.0.0.{src}"),
        dst_ip: format!("10.0.0.{dst}"),
        src_port: 40_000,
        dst_port: port,
        protocol: Protocol::Tcp,
        features,
        label: ClassLabel::from_index(i % 3),
    }
}

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (2usize..60).prop_flat_map(|n| {
        proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 3), n).prop_map(
            move |rows| {
                let records = rows
                    .into_iter()
                    .enumerate()
                    .map(|(i, features)| flow(i, (i % 5) as u8, ((i + 1) % 5) as u8, 443, features))
                    .collect();
                Dataset::new(records, vec!["a".into(), "b".into(), "c".into()])
            },
        )
    })
}

fn arb_graph() -> impl Strategy<Value = AttackGraph> {
    (
        2usize..8,
        proptest::collection::vec((0usize..8, 0usize..8, 0.0f64..=1.0), 0..24),
    )
        .prop_map(|(n, raw)| {
            let nodes: BTreeSet<String> = (0..n).map(|i| format!("10.0.0.{i}")).collect();
            let edges = raw
                .into_iter()
                .enumerate()
                .filter(|(_, (s, d, _))| s % n != d % n)
                .map(|(k, (s, d, w))| Edge {
                    src: format!("10.0.0.{}", s % n),
                    dst: format!("10.0.0.{}", d % n),
                    vuln_id: format!("v{k}"),
                    weight: w,
                    provenance: EdgeProvenance::Scraped,
                })
                .collect();
            AttackGraph::new("t", nodes, edges)
        })
}

proptest! {
    #[test]
    fn split_is_a_partition_and_deterministic(ds in arb_dataset(), frac in 0.05f64..0.95, seed: u64) {
        let (tr1, te1) = split(&ds, frac, seed).unwrap();
        let (tr2, te2) = split(&ds, frac, seed).unwrap();
        prop_assert_eq!(&tr1, &tr2);
        prop_assert_eq!(&te1, &te2);
        prop_assert!(!tr1.is_empty() && !te1.is_empty());

        let mut combined: Vec<&str> = tr1.records.iter().chain(&te1.records).map(|r| r.flow_id.as_str()).collect();
        combined.sort_unstable();
        let mut all: Vec<&str> = ds.records.iter().map(|r| r.flow_id.as_str()).collect();
        all.sort_unstable();
        prop_assert_eq!(combined, all);

        let train_ids: BTreeSet<&str> = tr1.records.iter().map(|r| r.flow_id.as_str()).collect();
        prop_assert!(te1.records.iter().all(|r| !train_ids.contains(r.flow_id.as_str())));
    }

    #[test]
    fn sanitization_is_idempotent(mut values in proptest::collection::vec(
        prop_oneof![Just(f64::NAN), Just(f64::INFINITY), Just(f64::NEG_INFINITY), -1e12f64..1e12],
        0..40,
    )) {
        sanitize_features(&mut values);
        let once = values.clone();
        let repaired_again = sanitize_features(&mut values);
        prop_assert!(!repaired_again);
        prop_assert_eq!(values, once);
    }

    #[test]
    fn graph_serialization_round_trips(ag in arb_graph()) {
        let back = AttackGraph::from_json(&ag.to_json().unwrap()).unwrap();
        prop_assert_eq!(ag, back);
    }

    #[test]
    fn path_risk_never_increases_with_length(ag in arb_graph()) {
        let sources: BTreeSet<String> = ag.nodes.iter().take(2).cloned().collect();
        let targets: BTreeSet<String> = ag.nodes.iter().cloned().collect();
        if let Ok(paths) = enumerate_paths(&ag, &sources, &targets, 4) {
            for p in paths {
                prop_assert!((0.0..=1.0).contains(&p.risk));
                for k in 1..=p.edges.len() {
                    prop_assert!(path_risk(&p.edges[..k]) + 1e-12 >= p.risk);
                }
            }
        }
    }

    #[test]
    fn noise_p0_is_identity_and_p1_totalizes(ag in arb_graph(), seed: u64) {
        let same = inject_noise(&ag, 0.0, seed);
        prop_assert_eq!(same.edges(), ag.edges());

        let full = inject_noise(&ag, 1.0, seed);
        let index = ReachabilityIndex::build(&full);
        for s in &full.nodes {
            for d in &full.nodes {
                if s != d {
                    prop_assert!(index.query(s, d), "{} cannot reach {}", s, d);
                }
            }
        }
    }

    #[test]
    fn refinement_is_idempotent_and_never_flips_benign(
        ag in arb_graph(),
        picks in proptest::collection::vec((0usize..8, 0usize..8, 0usize..3), 1..50),
    ) {
        let n = ag.nodes.len();
        let nodes: Vec<&String> = ag.nodes.iter().collect();
        let flows: Vec<FlowRecord> = picks
            .iter()
            .enumerate()
            .map(|(i, &(s, d, _))| flow(i, (s % n) as u8, (d % n) as u8, 443, vec![0.0; 3]))
            .collect();
        let preds: Vec<ClassLabel> = picks.iter().map(|&(_, _, c)| ClassLabel::from_index(c)).collect();
        prop_assert_eq!(nodes.len(), n);

        let (refined, report) = refine_predictions(&preds, &flows, &ag).unwrap();
        for (i, (&before, &after)) in preds.iter().zip(&refined).enumerate() {
            if before == ClassLabel::Benign {
                prop_assert_eq!(after, ClassLabel::Benign);
            }
            if before != after {
                prop_assert_eq!(after, ClassLabel::Benign);
                prop_assert!(report.flipped_indices.contains(&i));
            }
        }
        let (twice, second) = refine_predictions(&refined, &flows, &ag).unwrap();
        prop_assert_eq!(twice, refined);
        prop_assert_eq!(second.flipped_count, 0);
    }

    #[test]
    fn limited_alerts_grow_with_the_fraction(n in 0usize..80, f1 in 0.0f64..=1.0, f2 in 0.0f64..=1.0, seed: u64) {
        let alerts: Vec<Alert> = (0..n)
            .map(|i| Alert {
                sid: i as u32,
                vuln_id: format!("v{}", i % 7),
                src_ip: "a".into(),
                dst_ip: "b".into(),
                flow_id: format!("f{i}"),
            })
            .collect();
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let small = limit_alerts(&alerts, lo, seed);
        let large = limit_alerts(&alerts, hi, seed);
        prop_assert!(small.len() <= large.len());
        // same seed means prefixes of one permutation
        prop_assert_eq!(&large[..small.len()], &small[..]);
    }

    #[test]
    fn alert_count_is_bounded_by_rule_flow_pairs(
        n_rules in 0usize..6,
        n_flows in 0usize..30,
        port_match in proptest::bool::ANY,
    ) {
        let rules: Vec<SignatureRule> = (0..n_rules)
            .map(|i| SignatureRule {
                sid: i as u32,
                message: String::new(),
                attack_class: ClassLabel::Dos,
                vuln_id: "v".into(),
                match_spec: MatchSpec {
                    protocol: Some(Protocol::Tcp),
                    dst_ports: Some(if port_match { (0, 65535) } else { (1, 1) }),
                    ..MatchSpec::default()
                },
            })
            .collect();
        let flows: Vec<FlowRecord> = (0..n_flows).map(|i| flow(i, 1, 2, 443, vec![0.0; 3])).collect();
        let alerts = match_rules(&rules, &flows);
        prop_assert!(alerts.len() <= n_rules * n_flows);
        if port_match {
            prop_assert_eq!(alerts.len(), n_rules * n_flows); // every pair matches
        } else {
            prop_assert!(alerts.is_empty());
        }
    }
}
