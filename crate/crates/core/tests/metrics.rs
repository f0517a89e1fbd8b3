use percept_core::dataset::{build_dataset, BuildOptions, ExampleId};
use percept_core::metrics::{
    aggregate_task_report, mlae, mlae_values, rank_tasks, ci95, Aggregation, PredictionMeta,
    PredictionSet, Producer, Truths, PREDICTION_FORMAT_VERSION,
};
use percept_core::stimuli::{Elementary, Split, TaskKind, Variant};
use percept_core::{Error, Exec};
use proptest::prelude::*;

fn meta(checksum: &str, label_dim: usize) -> PredictionMeta {
    PredictionMeta {
        format_version: PREDICTION_FORMAT_VERSION,
        dataset_checksum: checksum.to_string(),
        split: Split::Test,
        label_dim,
        producer: Producer {
            model: "oracle".into(),
            seed: 0,
            config_hash: String::new(),
        },
    }
}

#[test]
fn prediction_files_round_trip_and_pair_with_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let task = TaskKind::Elementary(Elementary::Length);
    let ds = build_dataset(task, Variant::Base, 10, 4, &dir.path().join("d"), BuildOptions::default()).unwrap();
    let truths = Truths::load(&ds, Split::Test).unwrap();
    assert_eq!(truths.labels.len(), 2);

    let mut exact = PredictionSet::new(meta(&ds.checksum(), 1));
    for (i, l) in truths.labels.iter().enumerate() {
        exact.insert(ExampleId { split: Split::Test, index: i }, l.clone()).unwrap();
    }
    let path = dir.path().join("p/exact.csv");
    exact.write(&path).unwrap();
    assert!(dir.path().join("p/exact.meta.json").exists());
    let back = PredictionSet::read(&path).unwrap();
    assert_eq!(back, exact);
    assert_eq!(mlae(&back, &truths).unwrap(), -3.0);
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 3);

    let mut missing = exact.clone();
    missing.entries.remove(&ExampleId { split: Split::Test, index: 1 });
    match mlae(&missing, &truths) {
        Err(Error::Pairing(msg)) => assert!(msg.contains("test:1"), "{msg}"),
        other => panic!("{other:?}"),
    }
    let mut extra = exact.clone();
    extra.entries.insert(ExampleId { split: Split::Test, index: 9 }, vec![0.0]);
    assert!(matches!(mlae(&extra, &truths), Err(Error::Pairing(_))));

    let mut other = exact.clone();
    other.meta.dataset_checksum = "0".repeat(64);
    assert!(matches!(
        aggregate_task_report("length", &[exact.clone(), other], &truths, Exec::auto()),
        Err(Error::MixedDatasets(..))
    ));
    let s = aggregate_task_report("length", &vec![exact.clone(); 4], &truths, Exec::auto()).unwrap();
    assert_eq!((s.n_runs, s.mean, s.std), (4, -3.0, Some(0.0)));
}

#[test]
fn malformed_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.csv");
    let m = meta("abc", 2);
    let mut set = PredictionSet::new(m);
    set.insert(ExampleId { split: Split::Test, index: 0 }, vec![0.1, 0.2]).unwrap();
    set.write(&p).unwrap();
    std::fs::write(&p, "example_id,dim,value\ntest:0,0,0.1\n").unwrap();
    assert!(matches!(PredictionSet::read(&p), Err(Error::Shape(_))));
    std::fs::write(&p, "example_id,dim,value\ntest:0,0,0.1\ntest:0,0,0.2\n").unwrap();
    assert!(matches!(PredictionSet::read(&p), Err(Error::Format(_))));
    std::fs::write(&p, "example_id,dim,value\ntrain:0,0,0.1\n").unwrap();
    assert!(matches!(PredictionSet::read(&p), Err(Error::Pairing(_))));
    assert!(matches!(
        set.insert(ExampleId { split: Split::Test, index: 1 }, vec![0.1]),
        Err(Error::Shape(_))
    ));
}

fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((0.0f64..1.0, -0.5f64..1.5), 1..60)
        .prop_map(|v| v.into_iter().unzip())
}

proptest! {
    #[test]
    fn mlae_lower_bound((t, p) in pairs()) {
        let v = mlae_values(&p, &t, Aggregation::Mean).unwrap();
        prop_assert!(v >= -3.0);
        prop_assert_eq!(mlae_values(&t, &t, Aggregation::Mean).unwrap(), -3.0);
    }

    #[test]
    fn mlae_monotone_in_one_error((t, p) in pairs(), i in any::<prop::sample::Index>(), bump in 0.001f64..1.0) {
        let i = i.index(t.len());
        let mut q = p.clone();
        q[i] = if p[i] >= t[i] { p[i] + bump } else { p[i] - bump };
        let a = mlae_values(&p, &t, Aggregation::Mean).unwrap();
        let b = mlae_values(&q, &t, Aggregation::Mean).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn mlae_permutation_invariant((t, p) in pairs(), seed in any::<u64>()) {
        let mut idx: Vec<usize> = (0..t.len()).collect();
        let mut s = seed;
        for i in (1..idx.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            idx.swap(i, (s >> 33) as usize % (i + 1));
        }
        let tp: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
        let pp: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
        let a = mlae_values(&p, &t, Aggregation::Mean).unwrap();
        let b = mlae_values(&pp, &tp, Aggregation::Mean).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn ci_is_symmetric_and_shift_equivariant(v in prop::collection::vec(-5.0f64..5.0, 2..10), c in -10.0f64..10.0) {
        let a = ci95(&v).unwrap();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        prop_assert!(((m - a.lo) - (a.hi - m)).abs() < 1e-12);
        prop_assert!(a.lo <= m && m <= a.hi);
        let moved: Vec<f64> = v.iter().map(|x| x + c).collect();
        let b = ci95(&moved).unwrap();
        prop_assert!((b.lo - a.lo - c).abs() < 1e-9 && (b.hi - a.hi - c).abs() < 1e-9);
    }

    #[test]
    fn ranking_invariant_under_monotone_maps(scores in prop::collection::vec(-3.0f64..6.0, 2..9), c in -5.0f64..5.0) {
        let named: Vec<(String, f64)> = scores.iter().enumerate().map(|(i, &s)| (format!("t{i}"), s)).collect();
        let shifted: Vec<(String, f64)> = named.iter().map(|(n, s)| (n.clone(), s + c)).collect();
        let cubed: Vec<(String, f64)> = named.iter().map(|(n, s)| (n.clone(), s.powi(3))).collect();
        let order = |r: Vec<percept_core::metrics::RankEntry>| r.into_iter().map(|e| e.task).collect::<Vec<_>>();
        let base = order(rank_tasks(&named));
        prop_assert_eq!(&base, &order(rank_tasks(&shifted)));
        prop_assert_eq!(&base, &order(rank_tasks(&cubed)));
    }
}
