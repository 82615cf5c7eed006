//! Scores used both as rewards and as evaluation metrics.
//!
//! All F1 values are computed from counts as `2·matched / (predicted + actual)`,
//! which equals `2PR / (P + R)` whenever `P + R > 0`. Two empty inputs score
//! 0.0, so a dense reward that starts from an empty prediction telescopes
//! from zero.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Breakdown {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl F1Breakdown {
    pub const ZERO: F1Breakdown = F1Breakdown {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };
}

pub fn f1_from_counts(matched: usize, predicted: usize, actual: usize) -> F1Breakdown {
    if matched == 0 {
        return F1Breakdown {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        };
    }
    let m = matched as f64;
    F1Breakdown {
        precision: m / predicted as f64,
        recall: m / actual as f64,
        f1: 2.0 * m / (predicted + actual) as f64,
    }
}

/// Number of positions (over the shorter sequence) where both labels agree.
pub fn positional_matches<A: AsRef<str>, B: AsRef<str>>(truth: &[A], pred: &[B]) -> usize {
    truth
        .iter()
        .zip(pred)
        .filter(|(t, p)| t.as_ref() == p.as_ref())
        .count()
}

/// Token-level micro F1 between two label sequences.
pub fn token_f1<A: AsRef<str>, B: AsRef<str>>(truth: &[A], pred: &[B]) -> F1Breakdown {
    f1_from_counts(positional_matches(truth, pred), pred.len(), truth.len())
}

/// (|truth ∩ pred|, |pred|, |truth|) after de-duplicating both sides.
pub fn set_overlap<A: AsRef<str>, B: AsRef<str>>(truth: &[A], pred: &[B]) -> (usize, usize, usize) {
    let truth: HashSet<&str> = truth.iter().map(AsRef::as_ref).collect();
    let pred: HashSet<&str> = pred.iter().map(AsRef::as_ref).collect();
    (truth.intersection(&pred).count(), pred.len(), truth.len())
}

/// F1 between label sets; order and duplicates in `pred` are ignored.
pub fn set_f1<A: AsRef<str>, B: AsRef<str>>(truth: &[A], pred: &[B]) -> F1Breakdown {
    let (m, p, t) = set_overlap(truth, pred);
    f1_from_counts(m, p, t)
}

pub fn accuracy(predictions: &[bool]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let hits = predictions.iter().filter(|&&p| p).count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// Pools overlap counts across samples for micro-averaged F1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MicroCounts {
    pub matched: usize,
    pub predicted: usize,
    pub actual: usize,
}

impl MicroCounts {
    pub fn add(&mut self, matched: usize, predicted: usize, actual: usize) {
        self.matched += matched;
        self.predicted += predicted;
        self.actual += actual;
    }

    pub fn f1(&self) -> F1Breakdown {
        f1_from_counts(self.matched, self.predicted, self.actual)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn perfect_tagging() {
        let t = labels("LOC O");
        assert_eq!(token_f1(&t, &t).f1, 1.0);
    }

    #[test]
    fn one_mismatch_in_27() {
        let truth = labels(&format!("PER PER {}", "O ".repeat(25)));
        let mut pred = truth.clone();
        pred[6] = "ORG".into();
        assert_eq!(truth.len(), 27);
        assert_eq!(token_f1(&truth, &pred).f1, 0.9629629629629629);
    }

    #[test]
    fn three_mismatches_in_13() {
        let truth = labels("AUX NOUN VERB DET NOUN NOUN ADV SCONJ PRON AUX VERB ADP PUNCT");
        let pred = labels("AUX ADJ NOUN DET NOUN NOUN ADV CCONJ PRON AUX VERB ADP PUNCT");
        assert_eq!(token_f1(&truth, &pred).f1, 0.7692307692307693);
    }

    #[test]
    fn empty_sequences_score_zero() {
        let e: Vec<String> = vec![];
        assert_eq!(token_f1(&e, &e), F1Breakdown::ZERO);
        assert_eq!(set_f1(&e, &e), F1Breakdown::ZERO);
        assert_eq!(set_f1(&labels("a"), &e).f1, 0.0);
    }

    #[test]
    fn prefix_lengths_differ() {
        let b = token_f1(&labels("A B C"), &labels("A"));
        assert_eq!(b.precision, 1.0);
        assert!((b.recall - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(b.f1, 0.5);
    }

    #[test]
    fn set_scores() {
        assert_eq!(
            set_f1(&labels("interest money-fx"), &labels("money-fx interest")).f1,
            1.0
        );
        assert_eq!(set_f1(&labels("acq crude nat-gas"), &labels("crude")).f1, 0.5);
        assert_eq!(
            set_f1(&labels("quant-ph cs.IT math.IT"), &labels("cs.IT math.IT")).f1,
            0.8
        );
        assert_eq!(set_f1(&labels("cpi"), &labels("money-supply")).f1, 0.0);
    }

    #[test]
    fn accuracy_fraction() {
        assert_eq!(accuracy(&[true, true, false, false]).unwrap(), 0.5);
        assert_eq!(accuracy(&[true, true]).unwrap(), 1.0);
        assert_eq!(accuracy(&[false]).unwrap(), 0.0);
        assert!(matches!(accuracy(&[]), Err(Error::EmptyEvaluation)));
    }

    // Independent oracle: brute-force precision/recall from definitions.
    fn oracle_token_f1(truth: &[usize], pred: &[usize]) -> f64 {
        let mut m = 0;
        for i in 0..truth.len() {
            if i < pred.len() && truth[i] == pred[i] {
                m += 1;
            }
        }
        if m == 0 {
            return 0.0;
        }
        let p = m as f64 / pred.len() as f64;
        let r = m as f64 / truth.len() as f64;
        2.0 * p * r / (p + r)
    }

    fn all_sequences(max_len: usize, alphabet: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 0..max_len {
            let mut next = vec![];
            for s in &frontier {
                for a in 0..alphabet {
                    let mut t: Vec<usize> = s.clone();
                    t.push(a);
                    next.push(t);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn token_f1_matches_brute_force_oracle() {
        let names = ["X", "Y", "Z"];
        let seqs = all_sequences(4, 3);
        assert_eq!(seqs.len(), 1 + 3 + 9 + 27 + 81);
        for t in &seqs {
            let ts: Vec<&str> = t.iter().map(|&i| names[i]).collect();
            for p in &seqs {
                let ps: Vec<&str> = p.iter().map(|&i| names[i]).collect();
                let got = token_f1(&ts, &ps).f1;
                let want = oracle_token_f1(t, p);
                assert!((got - want).abs() < 1e-15, "{t:?} {p:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn equal_length_is_accuracy() {
        for t in all_sequences(4, 3).iter().filter(|s| s.len() == 4) {
            for p in all_sequences(4, 3).iter().filter(|s| s.len() == 4) {
                let m = t.iter().zip(p).filter(|(a, b)| a == b).count();
                let ts: Vec<String> = t.iter().map(|i| i.to_string()).collect();
                let ps: Vec<String> = p.iter().map(|i| i.to_string()).collect();
                assert_eq!(token_f1(&ts, &ps).f1, m as f64 / 4.0);
            }
        }
    }

    proptest! {
        #[test]
        fn set_f1_ignores_order_and_duplicates(
            truth in proptest::collection::vec(0u8..6, 0..6),
            pred in proptest::collection::vec(0u8..6, 0..8),
            seed in any::<u64>(),
        ) {
            let t: Vec<String> = truth.iter().map(|x| x.to_string()).collect();
            let p: Vec<String> = pred.iter().map(|x| x.to_string()).collect();
            let mut shuffled = p.clone();
            shuffled.extend(p.iter().take((seed % 3) as usize).cloned());
            let n = shuffled.len();
            if n > 1 {
                shuffled.rotate_left((seed as usize) % n);
                shuffled.reverse();
            }
            prop_assert_eq!(set_f1(&t, &p), set_f1(&t, &shuffled));
        }

        #[test]
        fn symmetric_on_sets_and_equal_length(
            a in proptest::collection::vec(0u8..4, 0..6),
            b in proptest::collection::vec(0u8..4, 0..6),
        ) {
            prop_assert_eq!(set_f1(&strs(&a), &strs(&b)).f1, set_f1(&strs(&b), &strs(&a)).f1);
            let n = a.len().min(b.len());
            prop_assert_eq!(
                token_f1(&strs(&a[..n]), &strs(&b[..n])).f1,
                token_f1(&strs(&b[..n]), &strs(&a[..n])).f1
            );
        }

        #[test]
        fn breakdown_in_unit_interval(
            a in proptest::collection::vec(0u8..4, 0..6),
            b in proptest::collection::vec(0u8..4, 0..6),
        ) {
            for x in [token_f1(&strs(&a), &strs(&b)), set_f1(&strs(&a), &strs(&b))] {
                for v in [x.precision, x.recall, x.f1] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
                if x.precision + x.recall > 0.0 {
                    let h = 2.0 * x.precision * x.recall / (x.precision + x.recall);
                    prop_assert!((h - x.f1).abs() < 1e-12);
                }
            }
        }
    }

    fn strs(v: &[u8]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }
}
