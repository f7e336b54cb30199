use std::collections::BTreeMap;

use archpred_core::embedding::{init_new_device, EmbeddingTable};
use archpred_core::metrics::spearman_rho;
use archpred_core::rng::seeded;
use proptest::prelude::*;

fn device_set() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>)> {
    (3usize..15, 1usize..8).prop_flat_map(|(k, d)| {
        let col = prop::collection::vec((1i32..6).prop_map(f64::from), k);
        (col.clone(), prop::collection::vec(col, d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn donor_is_the_lowest_ordinal_maximizer((target, columns) in device_set()) {
        prop_assume!(spearman_rho(&target, &target).is_ok());
        let ids: Vec<String> = (0..columns.len()).map(|i| format!("dev{i}")).collect();
        let mut table = EmbeddingTable::random(&ids, 4, &mut seeded(1)).unwrap();
        let before = table.clone();
        let samples: Vec<(String, f64)> = target.iter().enumerate().map(|(i, &v)| (format!("a{i}"), v)).collect();
        let lookup: BTreeMap<(String, String), f64> = columns
            .iter()
            .enumerate()
            .flat_map(|(d, col)| col.iter().enumerate().map(move |(a, &v)| ((format!("dev{d}"), format!("a{a}")), v)))
            .collect();

        // exhaustive scan over every device
        let scores: Vec<Option<f64>> = columns.iter().map(|c| spearman_rho(c, &target).ok()).collect();
        let best = scores.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        let result = init_new_device(&mut table, "new", &samples, |d, a| lookup.get(&(d.to_string(), a.to_string())).copied());

        if best == f64::NEG_INFINITY {
            prop_assert!(result.is_err());
            prop_assert_eq!(table, before);
        } else {
            let choice = result.unwrap();
            let want = scores.iter().position(|s| *s == Some(best)).unwrap();
            prop_assert_eq!(choice.donor_ordinal, want);
            prop_assert_eq!(choice.rho, best);
            prop_assert_eq!(choice.new_ordinal, columns.len());
            prop_assert_eq!(table.row(choice.new_ordinal), before.row(want));
            prop_assert_eq!(table.lookup("new").unwrap(), before.row(want));
        }
    }
}

#[test]
fn exact_ties_resolve_to_first_device() {
    let ids: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let mut table = EmbeddingTable::random(&ids, 2, &mut seeded(0)).unwrap();
    let samples: Vec<(String, f64)> = (0..4).map(|i| (format!("x{i}"), i as f64)).collect();
    // b and c are both perfectly correlated with the target; a is reversed
    let choice = init_new_device(&mut table, "new", &samples, |d, a| {
        let i: f64 = a[1..].parse().unwrap();
        Some(if d == "a" { -i } else { i * 2.0 })
    })
    .unwrap();
    assert_eq!(choice.donor, "b");
    assert_eq!(choice.rho, 1.0);
}
