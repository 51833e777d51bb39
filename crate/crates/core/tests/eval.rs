use proptest::prelude::*;
use smart_hands::eval::published::PublishedMatrix;
use smart_hands::eval::{
    compose_throughput, fleet_impact, split_dataset, CompositionMode, ConfusionMatrix, EvalError, StageProfile,
};

#[test]
fn left_location_matrix_by_hand() {
    let m = PublishedMatrix::LeftLocation.matrix();
    assert_eq!(m.trace(), 4699 + 2322 + 2106);
    assert_eq!(m.total(), 9193);
    assert_eq!(m.accuracy().unwrap(), 9127.0 / 9193.0);
}

#[test]
fn identity_and_swapped_matrices() {
    let labels: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
    let diag = ConfusionMatrix::new(labels.clone(), vec![vec![5, 0, 0], vec![0, 7, 0], vec![0, 0, 1]]).unwrap();
    assert_eq!(diag.accuracy().unwrap(), 1.0);
    let swapped = ConfusionMatrix::new(labels, vec![vec![0, 5, 0], vec![7, 0, 0], vec![0, 0, 0]]).unwrap();
    assert_eq!(swapped.accuracy().unwrap(), 0.0);
    let metrics = swapped.per_class_metrics().unwrap();
    assert_eq!(metrics[2].precision, None);
    assert_eq!(metrics[2].recall, None);
}

#[test]
fn empty_and_ragged_matrices_are_errors() {
    assert_eq!(ConfusionMatrix::zeros(vec!["A".into()]).accuracy(), Err(EvalError::EmptyMatrix));
    assert!(ConfusionMatrix::new(vec!["A".into(), "B".into()], vec![vec![1, 2], vec![3]]).is_err());
    assert!(ConfusionMatrix::from_csv("true\\predicted,A,B\nA,1\n".as_bytes()).is_err());
}

#[test]
fn csv_round_trip_with_separators() {
    let text = "true\\predicted,Wheel,Lap\nWheel,\"4,699\",2\nLap,,2322\n";
    let m = ConfusionMatrix::from_csv(text.as_bytes()).unwrap();
    assert_eq!(m.get(0, 0), 4699);
    assert_eq!(m.get(1, 0), 0);
    let mut out = Vec::new();
    m.to_csv(&mut out).unwrap();
    assert_eq!(ConfusionMatrix::from_csv(out.as_slice()).unwrap(), m);
}

#[test]
fn throughput_examples() {
    let p = StageProfile::from_rates(&[28.8, 22.7]).unwrap();
    assert!((compose_throughput(&p, CompositionMode::Sequential) - 12.69).abs() < 0.01);
    assert_eq!(compose_throughput(&p, CompositionMode::Pipelined), 22.7);
    let single = StageProfile::from_rates(&[30.0]).unwrap();
    assert_eq!(compose_throughput(&single, CompositionMode::Sequential), 30.0);
    assert!(StageProfile::from_rates(&[30.0, 0.0]).is_err());
}

#[test]
fn fleet_examples() {
    let i = fleet_impact(4_300_000, 287_000_000, 0.027, 680_000).unwrap();
    assert!((i.penetration - 0.015).abs() < 0.0005);
    assert_eq!(i.prevented, 18_360);
    assert_eq!(fleet_impact(0, 1, 0.0, 680_000).unwrap().prevented, 0);
    assert!(fleet_impact(1, 0, 0.1, 1).is_err());
}

#[test]
fn split_of_nineteen_subjects() {
    let lengths: Vec<u64> = (0..19).map(|i| 4_000 + (i * 313) % 1_700).collect();
    let s = split_dataset(&lengths, [0.8, 0.1, 0.1]).unwrap();
    let fr = s.frame_fractions(&lengths);
    assert!(fr.iter().all(|&f| f > 0.0));
    assert!((fr[0] - 0.8).abs() < 0.06);
    assert!(matches!(split_dataset(&[10, 20], [0.8, 0.1, 0.1]), Err(EvalError::InsufficientData(2))));
}

proptest! {
    /// Permuting classes permutes rows and columns; accuracy is unchanged.
    #[test]
    fn accuracy_is_permutation_invariant(
        counts in proptest::collection::vec(0u64..1000, 16),
        perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let labels: Vec<String> = (0..4).map(|i| format!("c{i}")).collect();
        let grid: Vec<Vec<u64>> = counts.chunks(4).map(|c| c.to_vec()).collect();
        let m = ConfusionMatrix::new(labels, grid).unwrap();
        prop_assume!(m.total() > 0);
        let p = m.permuted(&perm).unwrap();
        prop_assert_eq!(p.trace(), m.trace());
        prop_assert_eq!(p.accuracy().unwrap(), m.accuracy().unwrap());
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(p.get(i, j), m.get(perm[i], perm[j]));
            }
        }
    }

    /// Splits partition the sequences into contiguous, non-empty, disjoint parts.
    #[test]
    fn split_partitions_sequences(lengths in proptest::collection::vec(1u64..10_000, 3..40)) {
        let s = split_dataset(&lengths, [0.8, 0.1, 0.1]).unwrap();
        let all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
        prop_assert_eq!(all, (0..lengths.len()).collect::<Vec<_>>());
        prop_assert!(!s.train.is_empty() && !s.validation.is_empty() && !s.test.is_empty());
        let fr = s.frame_fractions(&lengths);
        prop_assert!((fr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
