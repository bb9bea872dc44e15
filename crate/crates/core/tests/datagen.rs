use entcat::datagen::{
    build_selfcat_eval_set, generate_dataset, histogram::mean_and_median, read_csv, sample_vectors,
    selfcat_row, split, write_csv, Histogram, SamplingMode,
};
use entcat::majorization::{pad, ProbVector};

#[test]
fn entries_are_right_skewed_in_every_small_dimension() {
    for dim in 3..=8 {
        let vs = sample_vectors(dim, 100_000, dim as u64).unwrap();
        let mut entries: Vec<f64> = vs.iter().flat_map(|v| v.entries().to_vec()).collect();
        let (mean, median) = mean_and_median(&mut entries).unwrap();
        assert!((mean - 1.0 / dim as f64).abs() < 1e-9);
        assert!(median < mean, "dim {dim}: median {median} >= mean {mean}");
    }
}

#[test]
fn three_entry_histogram_peaks_near_zero() {
    let vs = sample_vectors(3, 1_000_000, 0).unwrap();
    let h = Histogram::from_values(vs.iter().flat_map(|v| v.entries().to_vec()), 50).unwrap();
    assert_eq!(h.total(), 3_000_000);
    assert!(h.bin_edges[h.modal_bin()] < 0.2, "modal bin {}", h.modal_bin());
    assert!(h.counts[0] > h.counts[49]);
}

#[test]
fn dataset_file_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let ds = generate_dataset(5, 300, SamplingMode::Paired, 99).unwrap();
    write_csv(&ds, &path).unwrap();
    let back = read_csv(&path).unwrap();
    assert_eq!(back, ds);
    let first = std::fs::read(&path).unwrap();
    write_csv(&generate_dataset(5, 300, SamplingMode::Paired, 99).unwrap(), &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn labels_match_the_oracle_and_split_is_four_to_one() {
    let ds = generate_dataset(4, 1000, SamplingMode::Paired, 3).unwrap();
    assert!(ds.rows.iter().all(|r| r.labels_sound().unwrap()));
    let (train, test) = split(&ds, 0.8, 1).unwrap();
    assert_eq!((train.len(), test.len()), (800, 200));
}

#[test]
fn all_pairs_mode_crosses_every_alpha_with_every_beta() {
    let ds = generate_dataset(3, 7, SamplingMode::AllPairs, 2).unwrap();
    assert_eq!(ds.len(), 49);
    assert_eq!(ds.rows[0].alpha, ds.rows[6].alpha);
    assert_eq!(ds.rows[0].beta, ds.rows[7].beta);
}

#[test]
fn known_self_catalytic_pair_is_labelled_convertible() {
    let a = ProbVector::new(vec![0.900, 0.081, 0.010, 0.009]).unwrap();
    let b = ProbVector::new(vec![0.950, 0.030, 0.020, 0.0]).unwrap();
    let row = selfcat_row(&a, &b).unwrap();
    assert_eq!(row.dim(), 16);
    assert!(row.maj_ab);

    let slow = ProbVector::new(vec![0.928, 0.060, 0.006, 0.006]).unwrap();
    let target = pad(&ProbVector::new(vec![0.950, 0.030, 0.020]).unwrap(), 4).unwrap();
    assert!(!selfcat_row(&slow, &target).unwrap().maj_ab);
}

#[test]
fn self_catalysis_sets_hold_only_incomparable_bases() {
    let ds = build_selfcat_eval_set(4, 100, 8).unwrap();
    assert_eq!(ds.len(), 100);
    assert_eq!(ds.dim, 16);
}
