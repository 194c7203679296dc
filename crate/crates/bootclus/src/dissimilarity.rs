//! Dissimilarity measures: weighted mixed-type Euclidean distance,
//! Kulczynski dissimilarity on presence-absence ranges, and a categorical
//! series distance that treats missingness as an extra category.

use serde::{Deserialize, Serialize};

use crate::data::{
    CategoricalSeriesDataset, DissimilarityMatrix, MixedDataset, PresenceAbsenceData, Value,
    VarKind,
};
use crate::error::{Error, Result};

/// Per-level dummy weights for nominal variables; variable weights come from
/// the dataset schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixedDistanceConfig {
    /// For each variable (schema order): `Some(weights)` with one entry per
    /// level for nominal variables, `None` otherwise.
    pub dummy_weights: Vec<Option<Vec<f64>>>,
}

impl MixedDistanceConfig {
    /// Unit dummy weights for every nominal variable.
    pub fn unit(data: &MixedDataset) -> Self {
        let dummy_weights = data
            .specs()
            .iter()
            .map(|s| match s.kind {
                VarKind::Nominal => Some(vec![1.0; s.levels.len()]),
                _ => None,
            })
            .collect();
        MixedDistanceConfig { dummy_weights }
    }

    fn validate(&self, data: &MixedDataset) -> Result<()> {
        if self.dummy_weights.len() != data.p() {
            return Err(Error::config("dummy weight list length must equal p"));
        }
        for (spec, dw) in data.specs().iter().zip(&self.dummy_weights) {
            match (spec.kind, dw) {
                (VarKind::Nominal, Some(w)) => {
                    if w.len() != spec.levels.len() {
                        return Err(Error::config(format!(
                            "variable '{}': {} dummy weights for {} levels",
                            spec.name,
                            w.len(),
                            spec.levels.len()
                        )));
                    }
                    if w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                        return Err(Error::config(format!(
                            "variable '{}': dummy weights must be finite and >= 0",
                            spec.name
                        )));
                    }
                }
                (VarKind::Nominal, None) => {
                    return Err(Error::config(format!(
                        "variable '{}': nominal variable needs dummy weights",
                        spec.name
                    )))
                }
                (_, Some(_)) => {
                    return Err(Error::config(format!(
                        "variable '{}': dummy weights only apply to nominal variables",
                        spec.name
                    )))
                }
                (_, None) => {}
            }
        }
        Ok(())
    }
}

/// Weighted Euclidean distance over mixed-type rows.
///
/// Continuous variables contribute their raw difference, ordinal and binary
/// variables the difference of Likert codes (1, 2, 3, ...), and nominal
/// variables the weighted difference of their dummy coding.
pub fn mixed_type_distance(
    data: &MixedDataset,
    cfg: &MixedDistanceConfig,
) -> Result<DissimilarityMatrix> {
    cfg.validate(data)?;
    let specs = data.specs();
    DissimilarityMatrix::from_fn(data.n(), |i, j| {
        let mut sum = 0.0;
        for (v, spec) in specs.iter().enumerate() {
            let delta_sq = match (data.value(i, v), data.value(j, v)) {
                (Value::Real(a), Value::Real(b)) => (a - b) * (a - b),
                (Value::Level(a), Value::Level(b)) => match spec.kind {
                    VarKind::Nominal => {
                        if a == b {
                            0.0
                        } else {
                            let w = cfg.dummy_weights[v].as_ref().unwrap();
                            w[a] + w[b]
                        }
                    }
                    // Likert coding: difference of level positions.
                    _ => {
                        let d = a as f64 - b as f64;
                        d * d
                    }
                },
                _ => unreachable!("validated on construction"),
            };
            sum += spec.weight * delta_sq;
        }
        sum.sqrt()
    })
}

/// Kulczynski dissimilarity between species ranges:
/// `1 - (|a ∩ b|/|a| + |a ∩ b|/|b|) / 2`, in [0, 1].
pub fn kulczynski_matrix(data: &PresenceAbsenceData) -> Result<DissimilarityMatrix> {
    let ranges: Vec<Vec<usize>> = (0..data.n_species()).map(|i| data.range_of(i)).collect();
    DissimilarityMatrix::from_fn(data.n_species(), |i, j| {
        let a = &ranges[i];
        let b = &ranges[j];
        let mut inter = 0usize;
        let (mut ia, mut ib) = (0, 0);
        while ia < a.len() && ib < b.len() {
            match a[ia].cmp(&b[ib]) {
                std::cmp::Ordering::Less => ia += 1,
                std::cmp::Ordering::Greater => ib += 1,
                std::cmp::Ordering::Equal => {
                    inter += 1;
                    ia += 1;
                    ib += 1;
                }
            }
        }
        let d = 1.0 - 0.5 * (inter as f64 / a.len() as f64 + inter as f64 / b.len() as f64);
        // Guard against tiny negative round-off at identical ranges.
        d.max(0.0)
    })
}

/// Symmetric per-day substitution costs over categories 1..=h plus the
/// missing pseudo-category at index h.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesCostMatrix {
    h: usize,
    /// (h+1) x (h+1), row-major.
    costs: Vec<f64>,
}

impl SeriesCostMatrix {
    pub fn new(h: usize, costs: Vec<f64>) -> Result<Self> {
        let m = h + 1;
        if costs.len() != m * m {
            return Err(Error::config("cost matrix must be (h+1) x (h+1)"));
        }
        for i in 0..m {
            if costs[i * m + i] != 0.0 {
                return Err(Error::config("cost matrix must have zero diagonal"));
            }
            for j in 0..i {
                let c = costs[i * m + j];
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::config("cost matrix entries must be finite and >= 0"));
                }
                if c != costs[j * m + i] {
                    return Err(Error::config("cost matrix must be symmetric"));
                }
            }
        }
        Ok(SeriesCostMatrix { h, costs })
    }

    /// Cost 1 between any two distinct categories and to/from missing.
    pub fn all_ones(h: usize) -> Self {
        let m = h + 1;
        let mut costs = vec![1.0; m * m];
        for i in 0..m {
            costs[i * m + i] = 0.0;
        }
        SeriesCostMatrix { h, costs }
    }

    pub fn h(&self) -> usize {
        self.h
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> f64 {
        self.costs[a * (self.h + 1) + b]
    }

    #[inline]
    fn index_of(value: Option<usize>, h: usize) -> usize {
        match value {
            Some(c) => c - 1,
            None => h,
        }
    }
}

/// Mean per-day substitution cost between series.
pub fn series_distance(
    data: &CategoricalSeriesDataset,
    costs: &SeriesCostMatrix,
) -> Result<DissimilarityMatrix> {
    if costs.h() != data.h() {
        return Err(Error::config(format!(
            "cost matrix is for h = {}, data has h = {}",
            costs.h(),
            data.h()
        )));
    }
    let h = data.h();
    let t_len = data.t_len() as f64;
    let series = data.series();
    DissimilarityMatrix::from_fn(data.n(), |i, j| {
        let total: f64 = series[i]
            .iter()
            .zip(&series[j])
            .map(|(&a, &b)| costs.get(SeriesCostMatrix::index_of(a, h), SeriesCostMatrix::index_of(b, h)))
            .sum();
        total / t_len
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{PresenceAbsenceData, VariableSpec};

    fn two_rows(specs: Vec<VariableSpec>, a: Vec<Value>, b: Vec<Value>) -> MixedDataset {
        MixedDataset::new(specs, vec![a, b]).unwrap()
    }

    #[test]
    fn mixed_identity_and_1d() {
        let data = two_rows(
            vec![VariableSpec::continuous("x", 1.0)],
            vec![Value::Real(1.0)],
            vec![Value::Real(4.0)],
        );
        let d = mixed_type_distance(&data, &MixedDistanceConfig::unit(&data)).unwrap();
        assert_eq!(d.get(0, 1), 3.0);
        let data = two_rows(
            vec![VariableSpec::continuous("x", 1.0)],
            vec![Value::Real(2.0)],
            vec![Value::Real(2.0)],
        );
        let d = mixed_type_distance(&data, &MixedDistanceConfig::unit(&data)).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
    }

    #[test]
    fn nominal_dummy_distance() {
        let data = two_rows(
            vec![VariableSpec::categorical("c", VarKind::Nominal, &["a", "b", "c"], 1.0)],
            vec![Value::Level(0)],
            vec![Value::Level(1)],
        );
        let d = mixed_type_distance(&data, &MixedDistanceConfig::unit(&data)).unwrap();
        assert!((d.get(0, 1) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn uniform_weight_scaling() {
        let specs = vec![
            VariableSpec::continuous("x", 1.0),
            VariableSpec::categorical("o", VarKind::Ordinal, &["l", "m", "h"], 1.0),
        ];
        let rows = vec![
            vec![Value::Real(0.3), Value::Level(0)],
            vec![Value::Real(1.9), Value::Level(2)],
            vec![Value::Real(-0.5), Value::Level(1)],
        ];
        let data = MixedDataset::new(specs.clone(), rows.clone()).unwrap();
        let d1 = mixed_type_distance(&data, &MixedDistanceConfig::unit(&data)).unwrap();
        let mut scaled = specs;
        for s in &mut scaled {
            s.weight = 4.0;
        }
        let data4 = MixedDataset::new(scaled, rows).unwrap();
        let d4 = mixed_type_distance(&data4, &MixedDistanceConfig::unit(&data4)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((d4.get(i, j) - 2.0 * d1.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kulczynski_values() {
        // Ranges over 4 regions: {0,1}, {1,2,3}, {0,1}, {2,3}.
        let data = PresenceAbsenceData::new(
            vec![
                vec![true, true, false, false],
                vec![false, true, true, true],
                vec![true, true, false, false],
                vec![false, false, true, true],
            ],
            &[],
            vec!["s1".into(), "s2".into(), "s3".into(), "s4".into()],
            vec!["A".into(), "B".into(), "C".into(), "D".into()],
        )
        .unwrap();
        let d = kulczynski_matrix(&data).unwrap();
        assert_eq!(d.get(0, 2), 0.0); // identical ranges
        assert_eq!(d.get(0, 3), 1.0); // disjoint ranges
        assert!((d.get(0, 1) - 7.0 / 12.0).abs() < 1e-15);
        for i in 0..4 {
            for j in 0..4 {
                assert!(d.get(i, j) >= 0.0 && d.get(i, j) <= 1.0);
            }
        }
    }

    #[test]
    fn series_distance_examples() {
        let data = CategoricalSeriesDataset::new(
            vec![
                vec![Some(1), Some(2)],
                vec![Some(1), Some(3)],
                vec![Some(1), Some(2)],
            ],
            6,
            7,
        )
        .unwrap();
        let costs = SeriesCostMatrix::all_ones(6);
        let d = series_distance(&data, &costs).unwrap();
        assert_eq!(d.get(0, 2), 0.0);
        assert_eq!(d.get(0, 1), 0.5);
    }

    #[test]
    fn series_missing_days_count() {
        let data = CategoricalSeriesDataset::new(
            vec![
                vec![Some(1), Some(2), Some(3), Some(4)],
                vec![Some(1), None, Some(3), None],
            ],
            6,
            7,
        )
        .unwrap();
        let d = series_distance(&data, &SeriesCostMatrix::all_ones(6)).unwrap();
        assert_eq!(d.get(0, 1), 2.0 / 4.0);
    }

    #[test]
    fn all_ones_equals_normalized_hamming() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let series: Vec<Vec<Option<usize>>> = (0..6)
            .map(|_| {
                (0..30)
                    .map(|_| {
                        if rng.gen_bool(0.15) {
                            None
                        } else {
                            Some(rng.gen_range(1..=4))
                        }
                    })
                    .collect()
            })
            .collect();
        let data = CategoricalSeriesDataset::new(series.clone(), 4, 7).unwrap();
        let d = series_distance(&data, &SeriesCostMatrix::all_ones(4)).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let hamming = series[i]
                    .iter()
                    .zip(&series[j])
                    .filter(|(a, b)| a != b)
                    .count() as f64
                    / 30.0;
                assert!((d.get(i, j) - hamming).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cost_matrix_validation() {
        assert!(SeriesCostMatrix::new(1, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(SeriesCostMatrix::new(1, vec![0.5, 1.0, 1.0, 0.0]).is_err());
        assert!(SeriesCostMatrix::new(1, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
    }
}
