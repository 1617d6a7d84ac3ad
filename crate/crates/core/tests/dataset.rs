use std::collections::HashSet;
use std::path::PathBuf;

use smootherlab::dataset::{load_csv, load_idx, one_vs_all, subsample, train_test_split, LabelKind};
use smootherlab::Dataset64;

fn bundled() -> Dataset64 {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist5k");
    load_idx(&dir.join("images-idx3-ubyte.gz"), &dir.join("labels-idx1-ubyte.gz")).unwrap()
}

fn row_key(ds: &Dataset64, i: usize) -> Vec<u64> {
    ds.features().row(i).iter().map(|v| v.to_bits()).collect()
}

#[test]
fn bundled_mnist_subset() {
    let ds = bundled();
    assert_eq!((ds.len(), ds.dim()), (5000, 784));
    assert_eq!(ds.num_classes(), Some(10));
    let px = ds.features().as_slice();
    assert!(px.iter().all(|&v| (0.0..=1.0).contains(&v)));
    assert!(px.contains(&1.0));
    let tasks = one_vs_all(&ds).unwrap();
    assert_eq!(tasks.len(), 10);
    for t in &tasks {
        assert_eq!(t.binary_targets.iter().sum::<f64>(), 500.0);
    }
}

#[test]
fn split_is_disjoint_and_seeded() {
    let ds = bundled();
    let (a, b) = train_test_split(&ds, 1000, 2000, 0).unwrap();
    let (a2, _) = train_test_split(&ds, 1000, 2000, 0).unwrap();
    let (c, _) = train_test_split(&ds, 1000, 2000, 1).unwrap();
    assert_eq!(a.features(), a2.features());
    assert_ne!(a.features(), c.features());
    let train_rows: HashSet<Vec<u64>> = (0..a.len()).map(|i| row_key(&a, i)).collect();
    let overlap = (0..b.len()).filter(|&i| train_rows.contains(&row_key(&b, i))).count();
    // Only exact duplicate images in the source could collide.
    assert!(overlap <= 2, "{overlap} test rows also in train");
    assert!(train_test_split(&ds, 4000, 1001, 0).is_err());
}

#[test]
fn balanced_subsample_counts() {
    let ds = bundled();
    let s = subsample(&ds, 103, 5, true).unwrap();
    let mut counts = [0usize; 10];
    for &c in s.class_labels().unwrap() {
        counts[c] += 1;
    }
    assert!(counts.iter().all(|&c| c == 10 || c == 11));
}

#[test]
fn csv_labels_are_detected() {
    let dir = tempfile::tempdir().unwrap();
    let classes = dir.path().join("classes.csv");
    std::fs::write(&classes, "a,b,label\n0.5,1,0\n0.25,2,1\n1.5,0,2\n").unwrap();
    let ds: Dataset64 = load_csv(&classes, LabelKind::Auto).unwrap();
    assert_eq!(ds.num_classes(), Some(3));
    assert_eq!(ds.dim(), 2);

    let cont = dir.path().join("cont.csv");
    std::fs::write(&cont, "x,y\n0.5,1.25\n0.25,-2\n").unwrap();
    let ds: Dataset64 = load_csv(&cont, LabelKind::Auto).unwrap();
    assert!(ds.class_labels().is_none());
    assert_eq!(ds.targets(), &[1.25, -2.0]);

    std::fs::write(&cont, "x,y\n0.5,1.25\n0.25\n").unwrap();
    assert!(load_csv::<f64>(&cont, LabelKind::Auto).is_err());
}
