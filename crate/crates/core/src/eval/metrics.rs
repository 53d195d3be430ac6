use serde::{Deserialize, Serialize};

use super::{ConfusionMatrix, EvalError};

/// Which ratios hit a zero denominator and were set to 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degenerate {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

impl Degenerate {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.f1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    #[serde(default)]
    pub degenerate: Degenerate,
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

impl ClassMetrics {
    /// Metrics from already-known values, with `f1` taken as given.
    pub fn new(
        name: impl Into<String>,
        precision: f64,
        recall: f64,
        f1: f64,
        support: u64,
    ) -> Self {
        Self {
            name: name.into(),
            precision,
            recall,
            f1,
            support,
            degenerate: Degenerate::default(),
        }
    }
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn class_metrics(cm: &ConfusionMatrix) -> Vec<ClassMetrics> {
    (0..cm.n_classes())
        .map(|k| {
            let tp = cm.counts[k][k];
            let (precision, dp) = ratio(tp, cm.col_sum(k));
            let (recall, dr) = ratio(tp, cm.row_sum(k));
            let df = precision + recall == 0.0;
            ClassMetrics {
                name: cm.class_names[k].clone(),
                precision,
                recall,
                f1: f1_score(precision, recall),
                support: cm.row_sum(k),
                degenerate: Degenerate {
                    precision: dp,
                    recall: dr,
                    f1: df,
                },
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub total_support: u64,
}

/// Unweighted and support-weighted means of the per-class metrics.
pub fn aggregate(per_class: &[ClassMetrics]) -> Result<Aggregate, EvalError> {
    if per_class.is_empty() {
        return Err(EvalError::Empty);
    }
    let total_support: u64 = per_class.iter().map(|c| c.support).sum();
    if total_support == 0 {
        return Err(EvalError::NoSupport);
    }
    let k = per_class.len() as f64;
    let n = total_support as f64;
    let mut macro_avg = Averages::default();
    let mut weighted_avg = Averages::default();
    for c in per_class {
        let w = c.support as f64;
        macro_avg.precision += c.precision;
        macro_avg.recall += c.recall;
        macro_avg.f1 += c.f1;
        weighted_avg.precision += w * c.precision;
        weighted_avg.recall += w * c.recall;
        weighted_avg.f1 += w * c.f1;
    }
    for (a, d) in [(&mut macro_avg, k), (&mut weighted_avg, n)] {
        a.precision /= d;
        a.recall /= d;
        a.f1 /= d;
    }
    Ok(Aggregate {
        macro_avg,
        weighted_avg,
        total_support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::confusion_matrix;
    use proptest::prelude::*;

    fn from_counts(counts: Vec<Vec<u64>>) -> ConfusionMatrix {
        let names = (0..counts.len()).map(|i| format!("c{i}")).collect();
        ConfusionMatrix {
            class_names: names,
            counts,
        }
    }

    #[test]
    fn perfect_and_hand_examples() {
        let m = class_metrics(&from_counts(vec![vec![5, 0], vec![0, 5]]));
        for c in &m {
            assert_eq!((c.precision, c.recall, c.f1, c.support), (1.0, 1.0, 1.0, 5));
        }
        let m = class_metrics(&from_counts(vec![vec![1, 1], vec![1, 2]]));
        assert_eq!((m[0].precision, m[0].recall), (0.5, 0.5));
        assert_eq!((m[1].precision, m[1].recall), (2.0 / 3.0, 2.0 / 3.0));
    }

    #[test]
    fn zero_division_is_flagged() {
        let m = class_metrics(&from_counts(vec![
            vec![3, 0, 0],
            vec![0, 0, 0],
            vec![1, 0, 2],
        ]));
        assert_eq!(
            (m[1].precision, m[1].recall, m[1].f1, m[1].support),
            (0.0, 0.0, 0.0, 0)
        );
        assert_eq!(
            m[1].degenerate,
            Degenerate {
                precision: true,
                recall: true,
                f1: true
            }
        );
        assert!(!m[0].degenerate.any());
    }

    #[test]
    fn aggregate_edge_cases() {
        assert!(matches!(aggregate(&[]), Err(EvalError::Empty)));
        assert!(matches!(
            aggregate(&[ClassMetrics::new("a", 0.0, 0.0, 0.0, 0)]),
            Err(EvalError::NoSupport)
        ));
        let one = ClassMetrics::new("a", 0.3, 0.6, 0.4, 7);
        let a = aggregate(std::slice::from_ref(&one)).unwrap();
        assert_eq!(
            a.macro_avg,
            Averages {
                precision: 0.3,
                recall: 0.6,
                f1: 0.4
            }
        );
        assert_eq!(a.macro_avg, a.weighted_avg);
        assert_eq!(a.total_support, 7);
    }

    fn instance() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (1usize..=6).prop_flat_map(|k| (Just(k), proptest::collection::vec((0..k, 0..k), 0..=1000)))
    }

    proptest! {
        #[test]
        fn matches_pairwise_recount((k, pairs) in instance()) {
            let (t, p): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
            let names: Vec<String> = (0..k).map(|i| i.to_string()).collect();
            let cm = confusion_matrix(&t, &p, &names).unwrap();
            prop_assert_eq!(cm.total() as usize, pairs.len());
            let m = class_metrics(&cm);
            for (c, cls) in m.iter().enumerate() {
                let tp = pairs.iter().filter(|&&(a, b)| a == c && b == c).count();
                let pred = pairs.iter().filter(|&&(_, b)| b == c).count();
                let truth = pairs.iter().filter(|&&(a, _)| a == c).count();
                prop_assert_eq!(cls.support as usize, truth);
                let p = if pred == 0 { 0.0 } else { tp as f64 / pred as f64 };
                let r = if truth == 0 { 0.0 } else { tp as f64 / truth as f64 };
                prop_assert!((cls.precision - p).abs() <= 1e-12);
                prop_assert!((cls.recall - r).abs() <= 1e-12);
                prop_assert!((0.0..=1.0).contains(&cls.f1));
                prop_assert!(cls.f1 <= (cls.precision + cls.recall) / 2.0 + 1e-12);
            }
            let correct = pairs.iter().filter(|&&(a, b)| a == b).count();
            if !pairs.is_empty() {
                prop_assert_eq!(cm.accuracy(), correct as f64 / pairs.len() as f64);
            }
        }

        #[test]
        fn equal_supports_make_weighted_equal_macro(
            vals in proptest::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 1..8),
            s in 1u64..500,
        ) {
            let per: Vec<ClassMetrics> = vals.iter().enumerate()
                .map(|(i, &(p, r))| ClassMetrics::new(i.to_string(), p, r, f1_score(p, r), s))
                .collect();
            let a = aggregate(&per).unwrap();
            prop_assert!((a.macro_avg.precision - a.weighted_avg.precision).abs() <= 1e-12);
            prop_assert!((a.macro_avg.recall - a.weighted_avg.recall).abs() <= 1e-12);
            prop_assert!((a.macro_avg.f1 - a.weighted_avg.f1).abs() <= 1e-12);
        }
    }
}
