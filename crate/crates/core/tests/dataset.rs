use std::fs;

use percept_core::dataset::{
    build_dataset, load_split, read_dataset, read_split_params, rewrite_example_params,
    verify_split_disjointness, BuildOptions, Dataset, TensorReader, ViolationKind,
};
use percept_core::stimuli::{split_of, Elementary, Split, TaskKind, Variant};
use percept_core::{Error, Exec};

const LENGTH: TaskKind = TaskKind::Elementary(Elementary::Length);

fn opts(exec: Exec) -> BuildOptions {
    BuildOptions {
        unique_params: false,
        exec,
    }
}

#[test]
fn build_is_byte_identical_and_exec_independent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let da = build_dataset(LENGTH, Variant::PosSize, 60, 7, a.path(), opts(Exec::Parallel)).unwrap();
    let db = build_dataset(LENGTH, Variant::PosSize, 60, 7, b.path(), opts(Exec::Sequential)).unwrap();
    assert_eq!(da.checksum(), db.checksum());
    for name in ["manifest.json", "train.pbt", "test.params.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
    let c = tempfile::tempdir().unwrap();
    let dc = build_dataset(LENGTH, Variant::PosSize, 60, 8, c.path(), opts(Exec::Parallel)).unwrap();
    assert_ne!(da.checksum(), dc.checksum());
}

#[test]
fn split_counts_and_reading() {
    let dir = tempfile::tempdir().unwrap();
    let ds = build_dataset(LENGTH, Variant::Base, 10, 1, dir.path(), BuildOptions::default()).unwrap();
    let c = ds.manifest.split_counts;
    assert_eq!((c.train, c.val, c.test), (6, 2, 2));
    let reopened = Dataset::open(dir.path()).unwrap();
    assert_eq!(reopened.checksum(), ds.checksum());
    let test = load_split(&reopened, Split::Test).unwrap();
    assert_eq!(test.len(), 2);
    assert_eq!(test[1].id.to_string(), "test:1");
    assert_eq!(test[1].image.values.len(), 100 * 100);
    let params = read_split_params(&reopened, Split::Test).unwrap();
    for (rec, p) in test.iter().zip(&params) {
        assert_eq!(rec.labels, vec![(p.params[0] as f64 / 92.0) as f32]);
        assert_eq!(split_of(LENGTH, &p.params), Split::Test);
    }
}

#[test]
fn clean_dataset_verifies_and_injected_leak_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let mut ds = build_dataset(LENGTH, Variant::Pos, 200, 3, dir.path(), BuildOptions::default()).unwrap();
    let report = verify_split_disjointness(&ds).unwrap();
    assert_eq!(report.examples_checked, 200);
    assert!(report.is_clean(), "{:?}", report.violations);

    // move train example 5 into the test subset (length 4 has residue 4)
    let mut params = read_split_params(&ds, Split::Train).unwrap()[5].params.clone();
    params[0] = 4;
    rewrite_example_params(&mut ds, Split::Train, 5, params).unwrap();
    let report = verify_split_disjointness(&ds).unwrap();
    assert_eq!(report.violations.len(), 1);
    let v = &report.violations[0];
    assert_eq!(v.id.to_string(), "train:5");
    assert!(v
        .kinds
        .contains(&ViolationKind::WrongSubset { belongs_to: Split::Test }));
}

#[test]
fn unique_mode_replays() {
    let dir = tempfile::tempdir().unwrap();
    let o = BuildOptions {
        unique_params: true,
        exec: Exec::auto(),
    };
    let ds = build_dataset(LENGTH, Variant::Base, 90, 11, dir.path(), o).unwrap();
    let train = read_split_params(&ds, Split::Train).unwrap();
    let mut values: Vec<i32> = train.iter().map(|e| e.params[0]).collect();
    values.sort_unstable();
    values.dedup();
    assert_eq!(values.len(), train.len());
    assert!(verify_split_disjointness(&ds).unwrap().is_clean());

    let err = build_dataset(LENGTH, Variant::Base, 100, 11, tempfile::tempdir().unwrap().path(), o);
    assert!(matches!(err, Err(Error::Capacity { .. })));
}

#[test]
fn tampering_is_an_integrity_error() {
    let dir = tempfile::tempdir().unwrap();
    let ds = build_dataset(LENGTH, Variant::Base, 20, 2, dir.path(), BuildOptions::default()).unwrap();
    let path = dir.path().join("val.pbt");
    let mut bytes = fs::read(&path).unwrap();
    bytes[100] ^= 1;
    fs::write(&path, &bytes).unwrap();
    assert!(matches!(
        verify_split_disjointness(&ds),
        Err(Error::Integrity { .. })
    ));
    assert!(matches!(read_dataset(&ds, Split::Val), Err(Error::Integrity { .. })));

    // truncation reports expected and actual record counts
    bytes.truncate(bytes.len() - 10);
    fs::write(&path, &bytes).unwrap();
    match TensorReader::open(&path) {
        Err(Error::LengthMismatch { expected: 4, actual: 3, .. }) => {}
        Err(e) => panic!("{e}"),
        Ok(_) => panic!("truncated file opened"),
    }
}
