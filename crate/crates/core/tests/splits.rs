use std::collections::{BTreeMap, BTreeSet};

use archpred_core::dataset::{split_ids, SplitSize};
use archpred_core::metrics::{build_adversarial_split, CorrelationMatrix};
use archpred_core::Error;
use proptest::prelude::*;

proptest! {
    #[test]
    fn random_splits_partition_the_ids(n in 0usize..200, frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let ids: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
        let split = split_ids(ids.clone(), SplitSize::Fraction(frac), seed).unwrap();
        prop_assert_eq!(split.train.len(), (frac * n as f64).floor() as usize);
        let train: BTreeSet<&String> = split.train.iter().collect();
        let eval: BTreeSet<&String> = split.eval.iter().collect();
        prop_assert!(train.is_disjoint(&eval));
        prop_assert_eq!(train.len() + eval.len(), n);
        let again = split_ids(ids, SplitSize::Fraction(frac), seed).unwrap();
        prop_assert_eq!(again, split);
    }

    #[test]
    fn adversarial_splits_respect_their_threshold(
        columns in prop::collection::vec(prop::collection::vec(0i32..5, 8), 3..9),
        n_test in 1usize..3,
        threshold in 0.05f64..=1.0,
    ) {
        let labels: Vec<String> = (0..columns.len()).map(|i| format!("d{i}")).collect();
        let maps: Vec<BTreeMap<String, f64>> = columns
            .iter()
            .map(|c| c.iter().enumerate().map(|(i, &v)| (format!("a{i}"), f64::from(v))).collect())
            .collect();
        let matrix = CorrelationMatrix::from_columns(labels.clone(), &maps).unwrap();
        let test: Vec<String> = labels[..n_test.min(labels.len() - 1)].to_vec();
        let admissible = |d: &String| {
            !test.contains(d)
                && test.iter().all(|t| match matrix.get_by_label(d, t).unwrap() {
                    Some(r) => threshold >= 1.0 || r < threshold,
                    None => false,
                })
        };
        match build_adversarial_split(&matrix, &test, threshold) {
            Ok(split) => {
                let want: Vec<String> = labels.iter().filter(|d| admissible(d)).cloned().collect();
                prop_assert_eq!(&split.train, &want);
                for (t, max) in &split.max_train_rho {
                    let max = max.unwrap();
                    prop_assert!(threshold >= 1.0 || max < threshold, "{} {}", t, max);
                }
            }
            Err(Error::InfeasibleSplit { .. }) => {
                prop_assert!(!labels.iter().any(admissible));
            }
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }
}
