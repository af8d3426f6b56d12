//! Property tests for the library-level invariants.

use copnet_core::blockmodel::structural_dissimilarity;
use copnet_core::ingest::{
    slice_periods, ActivityLog, ActivityRecord, DanglingPolicy, PeriodSpec, RecordKind,
};
use copnet_core::netmodel::{
    read_pajek_net, read_partition_clu, write_pajek_net, write_partition_clu, OneModeNetwork,
    Partition,
};
use copnet_core::stability::modified_rand;
use copnet_core::transform::log_normalize;
use chrono::DateTime;
use proptest::prelude::*;

fn arb_weight() -> impl Strategy<Value = f64> {
    prop_oneof![
        (1u32..100).prop_map(|w| w as f64),
        (0.01f64..50.0).prop_filter("positive", |w| *w > 0.0),
    ]
}

prop_compose! {
    fn arb_network()(n in 0usize..10)(
        n in Just(n),
        arcs in proptest::collection::btree_map(
            (0..10usize, 0..10usize),
            arb_weight(),
            0..30,
        ),
    ) -> OneModeNetwork {
        let actors: Vec<String> = (0..n).map(|i| format!("actor{i:02}")).collect();
        let mut net = OneModeNetwork::new(actors.clone()).unwrap();
        for ((s, t), w) in arcs {
            if s < n && t < n && s != t {
                net.add_arc(&actors[s], &actors[t], w).unwrap();
            }
        }
        net
    }
}

prop_compose! {
    fn arb_partition()(n in 1usize..30)(
        n in Just(n),
        raw in proptest::collection::vec(1usize..6, 30),
    ) -> Partition {
        let units: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        Partition::new(units, &raw[..n]).unwrap()
    }
}

proptest! {
    #[test]
    fn pajek_net_round_trip(net in arb_network()) {
        let text = write_pajek_net(&net);
        let back = read_pajek_net(&text).unwrap();
        prop_assert_eq!(&back, &net);
        // write is canonical: a second trip is byte-identical
        prop_assert_eq!(write_pajek_net(&back), text);
    }

    #[test]
    fn pajek_clu_round_trip(p in arb_partition()) {
        let text = write_partition_clu(&p);
        let back = read_partition_clu(&text).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn equal_networks_serialize_identically(net in arb_network()) {
        let copy = net.clone();
        prop_assert_eq!(write_pajek_net(&net), write_pajek_net(&copy));
    }

    #[test]
    fn dissimilarity_is_symmetric(net in arb_network()) {
        prop_assume!(net.n_actors() >= 2);
        let d = structural_dissimilarity(&net, 1).unwrap();
        for i in 0..d.n() {
            prop_assert_eq!(d.get(i, i), 0.0);
            for j in 0..d.n() {
                prop_assert_eq!(d.get(i, j), d.get(j, i));
                prop_assert!(d.get(i, j) >= 0.0);
            }
        }
    }

    #[test]
    fn log_normalize_is_monotone(w1 in 0.01f64..1000.0, w2 in 0.01f64..1000.0) {
        prop_assume!(w1 < w2);
        let mut net = OneModeNetwork::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        net.add_arc("a", "b", w1).unwrap();
        net.add_arc("a", "c", w2).unwrap();
        let out = log_normalize(&net).unwrap();
        prop_assert!(out.weight("a", "b") < out.weight("a", "c"));
        prop_assert_eq!(out.n_arcs(), 2);
    }

    #[test]
    fn modified_rand_is_symmetric_and_relabel_invariant(
        p1 in arb_partition(),
        p2 in arb_partition(),
        shift in 1usize..5,
    ) {
        let shared = p1.units().iter().filter(|u| p2.cluster_of(u).is_some()).count();
        prop_assume!(shared >= 2);
        let ab = modified_rand(&p1, &p2).unwrap();
        let ba = modified_rand(&p2, &p1).unwrap();
        prop_assert!((ab.value - ba.value).abs() < 1e-12);

        // permute cluster ids of p2
        let relabeled: Vec<usize> =
            p2.assignment().iter().map(|&c| (c + shift - 1) % p2.k() + 1).collect();
        let p2r = Partition::new(p2.units().to_vec(), &relabeled).unwrap();
        let abr = modified_rand(&p1, &p2r).unwrap();
        prop_assert!((ab.value - abr.value).abs() < 1e-12);
    }

    #[test]
    fn identical_partitions_score_exactly_one(p in arb_partition()) {
        prop_assume!(p.n_units() >= 2);
        let s = modified_rand(&p, &p).unwrap();
        prop_assert_eq!(s.value, 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slices_preserve_record_multiset(
        stamps in proptest::collection::vec(0u32..365, 1..40),
    ) {
        let records: Vec<ActivityRecord> = stamps
            .iter()
            .enumerate()
            .map(|(i, &day)| ActivityRecord {
                record_id: format!("p{i:03}"),
                kind: RecordKind::Post,
                parent_id: None,
                author_id: format!("u{}", i % 5),
                timestamp: DateTime::parse_from_rfc3339("2015-01-01T00:00:00Z").unwrap()
                    + chrono::Duration::days(day as i64),
                reaction_kind: None,
            })
            .collect();
        let log = ActivityLog::new(records, DanglingPolicy::Error).unwrap();
        let spec = PeriodSpec::new(vec![
            ("T1".into(),
             DateTime::parse_from_rfc3339("2015-01-01T00:00:00Z").unwrap(),
             DateTime::parse_from_rfc3339("2015-06-30T23:59:59Z").unwrap()),
            ("T2".into(),
             DateTime::parse_from_rfc3339("2015-07-01T00:00:00Z").unwrap(),
             DateTime::parse_from_rfc3339("2016-12-31T23:59:59Z").unwrap()),
        ]).unwrap();
        let slices = slice_periods(&log, &spec).unwrap();
        let mut merged: Vec<ActivityRecord> = slices
            .iter()
            .flat_map(|s| s.records().iter().cloned())
            .collect();
        merged.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then(a.record_id.cmp(&b.record_id)));
        prop_assert_eq!(merged, log.records().to_vec());
    }
}
