use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Share of all records held out for testing, in percent.
pub const TEST_PERCENT: usize = 20;
/// Share of the remaining pool held out for per-epoch validation, in percent.
pub const VALIDATION_PERCENT: usize = 10;

/// Disjoint train / validation / test index lists over a record set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub seed: u64,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// `round(n * percent / 100)` with halves rounded up, in exact integer arithmetic.
fn percent_half_up(n: usize, percent: usize) -> usize {
    (n * percent * 2 + 100) / 200
}

/// Seeded 80/20 train/test split with 10% of the train pool set aside for validation.
pub fn split_dataset(n: usize, seed: u64) -> Result<DatasetSplit, CorpusError> {
    let n_test = percent_half_up(n, TEST_PERCENT);
    let pool = n - n_test;
    let n_val = percent_half_up(pool, VALIDATION_PERCENT);
    let n_train = pool - n_val;
    if n_test == 0 || n_val == 0 || n_train == 0 {
        return Err(CorpusError::InsufficientRecords {
            n,
            train: n_train,
            validation: n_val,
            test: n_test,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = order[..n_test].to_vec();
    let validation = order[n_test..n_test + n_val].to_vec();
    let train = order[n_test + n_val..].to_vec();
    Ok(DatasetSplit {
        seed,
        train,
        validation,
        test,
    })
}

impl DatasetSplit {
    /// Builds a split from explicit index lists, checking that they are
    /// non-empty, pairwise disjoint and within `0..n`.
    pub fn from_parts(
        n: usize,
        seed: u64,
        train: Vec<usize>,
        validation: Vec<usize>,
        test: Vec<usize>,
    ) -> Result<Self, CorpusError> {
        let s = Self {
            seed,
            train,
            validation,
            test,
        };
        s.check(n, false)?;
        Ok(s)
    }

    /// Verifies disjointness and range; with `complete`, also that every
    /// index in `0..n` is covered.
    pub fn check(&self, n: usize, complete: bool) -> Result<(), CorpusError> {
        if self.train.is_empty() || self.validation.is_empty() || self.test.is_empty() {
            return Err(CorpusError::InsufficientRecords {
                n,
                train: self.train.len(),
                validation: self.validation.len(),
                test: self.test.len(),
            });
        }
        let mut seen = vec![false; n];
        for &i in self.train.iter().chain(&self.validation).chain(&self.test) {
            match seen.get_mut(i) {
                None => {
                    return Err(CorpusError::Split(format!(
                        "index {i} out of range for {n} records"
                    )))
                }
                Some(true) => {
                    return Err(CorpusError::Split(format!(
                        "index {i} appears in more than one split"
                    )))
                }
                Some(s) => *s = true,
            }
        }
        if complete && seen.iter().any(|s| !s) {
            return Err(CorpusError::Split(
                "split does not cover every record".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ten_records() {
        let s = split_dataset(10, 42).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (7, 1, 2));
    }

    #[test]
    fn full_corpus_test_size() {
        let s = split_dataset(50_778, 0).unwrap();
        assert_eq!(s.test.len(), 10_156);
        assert_eq!(s.validation.len(), 4_062);
        assert_eq!(s.train.len(), 50_778 - 10_156 - 4_062);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(
            split_dataset(100, 7).unwrap(),
            split_dataset(100, 7).unwrap()
        );
        assert_ne!(
            split_dataset(100, 7).unwrap().test,
            split_dataset(100, 8).unwrap().test
        );
    }

    #[test]
    fn too_few_records() {
        assert!(matches!(
            split_dataset(3, 0),
            Err(CorpusError::InsufficientRecords { .. })
        ));
        assert!(split_dataset(0, 0).is_err());
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(percent_half_up(5, 10), 1); // 0.5 -> 1
        assert_eq!(percent_half_up(14, 10), 1); // 1.4 -> 1
        assert_eq!(percent_half_up(15, 10), 2); // 1.5 -> 2
        assert_eq!(percent_half_up(12, 20), 2); // 2.4 -> 2
    }

    #[test]
    fn from_parts_rejects_overlap() {
        assert!(DatasetSplit::from_parts(5, 0, vec![0, 1], vec![2], vec![2]).is_err());
        assert!(DatasetSplit::from_parts(5, 0, vec![0, 1], vec![2], vec![9]).is_err());
        assert!(DatasetSplit::from_parts(5, 0, vec![0, 1], vec![2], vec![3]).is_ok());
    }

    proptest! {
        #[test]
        fn partition_property(n in 10usize..3000, seed in any::<u64>()) {
            let s = split_dataset(n, seed).unwrap();
            s.check(n, true).unwrap();
            prop_assert_eq!(s.len(), n);
            let expect_test = (n as f64 / 5.0).round() as usize;
            prop_assert_eq!(s.test.len(), expect_test);
            let pool = n - expect_test;
            prop_assert_eq!(s.validation.len(), (pool as f64 / 10.0).round() as usize);
        }
    }
}
