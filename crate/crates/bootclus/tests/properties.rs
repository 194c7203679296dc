//! Property-based invariants: p-value ranges, index bounds, dissimilarity
//! axioms, and tree-cut cluster counts on randomly generated inputs.

use proptest::prelude::*;

use bootclus::clustering::{cut_tree, linkage_cluster, Linkage};
use bootclus::data::{DissimilarityMatrix, Partition, PresenceAbsenceData};
use bootclus::dissimilarity::kulczynski_matrix;
use bootclus::validation::asw;
use bootclus::{aggregate_pvalue, per_k_pvalue, AggregationMode};

fn symmetric_matrix(n: usize) -> impl Strategy<Value = DissimilarityMatrix> {
    proptest::collection::vec(0.01f64..10.0, n * (n - 1) / 2).prop_map(move |upper| {
        let mut it = upper.into_iter();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = it.next().unwrap();
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        DissimilarityMatrix::new(n, values).unwrap()
    })
}

proptest! {
    #[test]
    fn per_k_pvalue_is_in_unit_interval(
        obs in -10.0f64..10.0,
        reps in proptest::collection::vec(-10.0f64..10.0, 1..200),
    ) {
        let p = per_k_pvalue(obs, &reps);
        prop_assert!(p > 0.0 && p <= 1.0);
        // Smallest attainable value is 1/(m+1).
        prop_assert!(p >= 1.0 / (reps.len() as f64 + 1.0) - 1e-12);
    }

    #[test]
    fn aggregate_pvalues_are_in_unit_interval(
        table in proptest::collection::vec(
            proptest::collection::vec(-5.0f64..5.0, 3),
            4..30,
        ),
    ) {
        // Last row plays the observed vector, the rest are replicates.
        let k_values = [2usize, 3, 4];
        let observed: std::collections::BTreeMap<usize, f64> = k_values
            .iter()
            .zip(&table[table.len() - 1])
            .map(|(&k, &v)| (k, v))
            .collect();
        let reps: Vec<Vec<f64>> = table[..table.len() - 1].to_vec();
        for mode in [
            AggregationMode::MeanRank,
            AggregationMode::MeanRaw,
            AggregationMode::Bonferroni,
        ] {
            let p = aggregate_pvalue(&k_values, &observed, &reps, mode);
            prop_assert!(p > 0.0 && p <= 1.0, "{:?}: {}", mode, p);
        }
    }

    #[test]
    fn asw_is_bounded(
        d in symmetric_matrix(12),
        labels in proptest::collection::vec(0usize..3, 12),
    ) {
        // Relabel so that every cluster index up to k-1 is non-empty.
        let mut present: Vec<usize> = labels.clone();
        present.sort_unstable();
        present.dedup();
        let relabeled: Vec<Option<usize>> = labels
            .iter()
            .map(|l| Some(present.iter().position(|p| p == l).unwrap()))
            .collect();
        let part = Partition::new(relabeled, present.len(), None).unwrap();
        let s = asw(&d, &part).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s), "asw {}", s);
    }

    #[test]
    fn kulczynski_is_a_bounded_symmetric_dissimilarity(
        rows in proptest::collection::vec(
            proptest::collection::vec(any::<bool>(), 6),
            2..10,
        ),
    ) {
        // Every species must be present somewhere.
        let rows: Vec<Vec<bool>> = rows
            .into_iter()
            .map(|mut r| {
                if r.iter().all(|&b| !b) {
                    r[0] = true;
                }
                r
            })
            .collect();
        let n = rows.len();
        let species = (0..n).map(|i| format!("s{}", i)).collect();
        let regions = (0..6).map(|r| format!("r{}", r)).collect();
        let pairs: Vec<(usize, usize)> = (0..5).map(|r| (r, r + 1)).collect();
        let data = PresenceAbsenceData::new(rows, &pairs, species, regions).unwrap();
        let d = kulczynski_matrix(&data).unwrap();
        for i in 0..n {
            prop_assert_eq!(d.get(i, i), 0.0);
            for j in 0..n {
                prop_assert!((0.0..=1.0).contains(&d.get(i, j)));
                prop_assert_eq!(d.get(i, j).to_bits(), d.get(j, i).to_bits());
            }
        }
    }

    #[test]
    fn cut_tree_yields_exactly_k_nonempty_clusters(
        d in symmetric_matrix(10),
        k in 1usize..=10,
        complete in any::<bool>(),
    ) {
        let linkage = if complete { Linkage::Complete } else { Linkage::Average };
        let tree = linkage_cluster(&d, linkage).unwrap();
        let part = cut_tree(&tree, k).unwrap();
        prop_assert_eq!(part.k(), k);
        let clusters = part.clusters();
        prop_assert_eq!(clusters.len(), k);
        prop_assert!(clusters.iter().all(|c| !c.is_empty()));
        prop_assert_eq!(clusters.iter().map(Vec::len).sum::<usize>(), 10);
    }
}
