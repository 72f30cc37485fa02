use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::ScoringError;
use crate::catalog::{BinaryLabels, Finding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Counts {
    /// `2TP / (2TP + FP + FN)` on a 0–100 scale, 0 when undefined.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            100.0 * (2 * self.tp) as f64 / denom as f64
        }
    }

    /// Gold positives.
    pub fn support(&self) -> u64 {
        self.tp + self.fn_
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelF1 {
    pub micro: f64,
    pub macro_: f64,
    pub per_label: Vec<(Finding, f64)>,
    pub counts: Vec<(Finding, Counts)>,
}

/// Per-label, micro and macro F1 over `subset`. Macro averages every label
/// in the subset, including those without gold or predicted positives.
pub fn label_f1(pred: &[BinaryLabels], gold: &[BinaryLabels], subset: &[Finding]) -> Result<LabelF1, ScoringError> {
    if pred.len() != gold.len() {
        return Err(ScoringError::MisalignedCases(format!("{} predictions but {} gold rows", pred.len(), gold.len())));
    }
    let counts: Vec<(Finding, Counts)> = subset
        .iter()
        .map(|&f| {
            let mut c = Counts::default();
            for (p, g) in pred.iter().zip(gold) {
                match (p.get(f), g.get(f)) {
                    (true, true) => c.tp += 1,
                    (true, false) => c.fp += 1,
                    (false, true) => c.fn_ += 1,
                    (false, false) => {}
                }
            }
            (f, c)
        })
        .collect();
    let pooled = counts.iter().fold(Counts::default(), |acc, (_, c)| Counts {
        tp: acc.tp + c.tp,
        fp: acc.fp + c.fp,
        fn_: acc.fn_ + c.fn_,
    });
    let per_label: Vec<(Finding, f64)> = counts.iter().map(|(f, c)| (*f, c.f1())).collect();
    let macro_ =
        if per_label.is_empty() { 0.0 } else { per_label.iter().map(|(_, v)| v).sum::<f64>() / per_label.len() as f64 };
    Ok(LabelF1 { micro: pooled.f1(), macro_, per_label, counts })
}

/// Pairs keyed label rows by case id, ordered as in `gold`. Both sides must
/// cover the same ids.
pub fn align_by_case(
    pred: &[(String, BinaryLabels)],
    gold: &[(String, BinaryLabels)],
) -> Result<(Vec<BinaryLabels>, Vec<BinaryLabels>), ScoringError> {
    let pmap: BTreeMap<&str, &BinaryLabels> = pred.iter().map(|(k, v)| (k.as_str(), v)).collect();
    let gset: BTreeSet<&str> = gold.iter().map(|(k, _)| k.as_str()).collect();
    let missing_pred: Vec<&str> = gset.iter().filter(|k| !pmap.contains_key(*k)).copied().collect();
    let extra_pred: Vec<&str> = pmap.keys().filter(|k| !gset.contains(*k)).copied().collect();
    if !missing_pred.is_empty() || !extra_pred.is_empty() || pmap.len() != pred.len() || gset.len() != gold.len() {
        return Err(ScoringError::MisalignedCases(format!(
            "case ids differ (missing from predictions: {:?}; not in gold: {:?})",
            &missing_pred[..missing_pred.len().min(5)],
            &extra_pred[..extra_pred.len().min(5)]
        )));
    }
    Ok(gold.iter().map(|(k, g)| (*pmap[k.as_str()], *g)).unzip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ABC: [Finding; 3] = [Finding::Atelectasis, Finding::Cardiomegaly, Finding::Edema];

    fn bits(fs: &[Finding]) -> BinaryLabels {
        BinaryLabels::from_findings(fs)
    }

    #[test]
    fn worked_example() {
        let [a, b, c] = ABC;
        let gold = [bits(&[a, b, c]), bits(&[])];
        let pred = [bits(&[a, c]), bits(&[a])];
        let r = label_f1(&pred, &gold, &ABC).unwrap();
        let per: Vec<f64> = r.per_label.iter().map(|x| x.1).collect();
        assert!((per[0] - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(per[1], 0.0);
        assert_eq!(per[2], 100.0);
        assert!((r.macro_ - 55.555_555_555).abs() < 1e-6);
        assert!((r.micro - 66.666_666_666).abs() < 1e-6);
    }

    #[test]
    fn identity_and_zero_support() {
        let rows = [bits(&ABC), bits(&[Finding::Atelectasis])];
        let r = label_f1(&rows, &rows, &ABC).unwrap();
        assert_eq!((r.micro, r.macro_), (100.0, 100.0));
        // Edema never appears: contributes 0 to macro
        let rows = [bits(&[Finding::Atelectasis, Finding::Cardiomegaly])];
        let r = label_f1(&rows, &rows, &ABC).unwrap();
        assert_eq!(r.per_label[2].1, 0.0);
        assert!((r.macro_ - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(r.micro, 100.0);
    }

    #[test]
    fn alignment() {
        let g = vec![("a".to_string(), bits(&[])), ("b".to_string(), bits(&ABC))];
        let p = vec![("b".to_string(), bits(&ABC)), ("a".to_string(), bits(&[]))];
        let (pp, gg) = align_by_case(&p, &g).unwrap();
        assert_eq!(pp, gg);
        assert!(align_by_case(&p[..1], &g).is_err());
        assert!(label_f1(&pp[..1], &gg, &ABC).is_err());
    }

    proptest! {
        #[test]
        fn micro_matches_pooled_brute_force(rows in proptest::collection::vec((any::<u16>(), any::<u16>()), 0..20)) {
            let to_bits = |x: u16| {
                let mut b = [false; 14];
                for (i, v) in b.iter_mut().enumerate() { *v = x >> i & 1 == 1; }
                BinaryLabels::new(b)
            };
            let pred: Vec<_> = rows.iter().map(|r| to_bits(r.0)).collect();
            let gold: Vec<_> = rows.iter().map(|r| to_bits(r.1)).collect();
            let r = label_f1(&pred, &gold, &Finding::ALL).unwrap();
            let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
            for (p, g) in pred.iter().zip(&gold) {
                for i in 0..14 {
                    let (x, y) = (p.bits()[i], g.bits()[i]);
                    if x && y { tp += 1.0 } else if x { fp += 1.0 } else if y { fn_ += 1.0 }
                }
            }
            let want = if tp + fp + fn_ == 0.0 { 0.0 } else { 100.0 * 2.0 * tp / (2.0 * tp + fp + fn_) };
            prop_assert!((r.micro - want).abs() < 1e-9);
            prop_assert!(r.macro_ <= 100.0 && r.macro_ >= 0.0);
        }
    }
}
