use std::collections::BTreeMap;

use serde::Serialize;

use super::dataset::{StudyDataset, StudyError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RaterVotes {
    pub rater_id: u32,
    pub for_a: usize,
    pub for_b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreferenceTally {
    pub a: String,
    pub b: String,
    pub k: usize,
    pub raters: usize,
    /// Cases with a full set of votes for this comparison.
    pub n_cases: usize,
    /// Cases where at least `k` raters preferred `a`.
    pub count: usize,
    pub proportion: f64,
    pub cases_below: usize,
    pub per_rater: Vec<RaterVotes>,
}

/// Counts cases where at least `k` raters preferred `a` over `b`. Votes
/// recorded as `b|a` count the same way.
pub fn tally_preferences(dataset: &StudyDataset, a: &str, b: &str, k: usize) -> Result<PreferenceTally, StudyError> {
    let r = dataset.rater_count();
    if k == 0 || k > r {
        return Err(StudyError::Invalid(format!("preference threshold {k} must lie in 1..={r}")));
    }
    let mut per_case: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut per_rater: BTreeMap<u32, RaterVotes> =
        dataset.raters().iter().map(|&id| (id, RaterVotes { rater_id: id, for_a: 0, for_b: 0 })).collect();
    for asmt in dataset.assessments() {
        let Some(p) = &asmt.preference else { continue };
        let matches = (p.report_a == a && p.report_b == b) || (p.report_a == b && p.report_b == a);
        if !matches {
            continue;
        }
        let entry = per_case.entry(asmt.case_id.as_str()).or_default();
        let rater = per_rater.get_mut(&asmt.rater_id).expect("rater set covers every assessment");
        if p.chosen() == a {
            entry.0 += 1;
            rater.for_a += 1;
        } else {
            entry.1 += 1;
            rater.for_b += 1;
        }
    }
    if per_case.is_empty() {
        return Err(StudyError::NoVotes(a.to_string(), b.to_string()));
    }
    let incomplete: Vec<(String, usize)> =
        per_case.iter().filter(|(_, (x, y))| x + y != r).map(|(c, (x, y))| (c.to_string(), x + y)).collect();
    if !incomplete.is_empty() {
        return Err(StudyError::IncompleteVotes { a: a.into(), b: b.into(), expected: r, cases: incomplete });
    }
    let n_cases = per_case.len();
    let count = per_case.values().filter(|(for_a, _)| *for_a >= k).count();
    Ok(PreferenceTally {
        a: a.to_string(),
        b: b.to_string(),
        k,
        raters: r,
        n_cases,
        count,
        proportion: count as f64 / n_cases as f64,
        cases_below: n_cases - count,
        per_rater: per_rater.into_values().collect(),
    })
}

/// Every comparison present in the dataset as `(a, b)` in recorded order,
/// deduplicated regardless of orientation and sorted.
pub fn comparisons(dataset: &StudyDataset) -> Vec<(String, String)> {
    let mut seen: BTreeMap<(String, String), (String, String)> = BTreeMap::new();
    for p in dataset.assessments().filter_map(|a| a.preference.as_ref()) {
        let (x, y) = (p.report_a.clone(), p.report_b.clone());
        let key = if x <= y { (x.clone(), y.clone()) } else { (y.clone(), x.clone()) };
        seen.entry(key).or_insert((x, y));
    }
    seen.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assessment::{Preference, PreferenceChoice, ReaderAssessment, StudyRecord};
    use proptest::prelude::*;

    /// `votes[c]` is how many of five raters prefer `a` on case `c`.
    fn dataset(votes: &[usize]) -> StudyDataset {
        let records = votes
            .iter()
            .enumerate()
            .map(|(c, &n_a)| {
                let id = format!("case{c:03}");
                let mut rec = StudyRecord::new(&id);
                for rater in 1..=5u32 {
                    let mut asmt = ReaderAssessment::new(&id, rater, "a|b");
                    let choice =
                        if (rater as usize) <= n_a { PreferenceChoice::ReportA } else { PreferenceChoice::ReportB };
                    asmt.preference = Some(Preference { report_a: "a".into(), report_b: "b".into(), choice });
                    rec.assessments.push(asmt);
                }
                rec
            })
            .collect();
        StudyDataset::new(records, None, 3).unwrap()
    }

    #[test]
    fn unanimity_and_counting() {
        let t = tally_preferences(&dataset(&[5; 4]), "a", "b", 3).unwrap();
        assert_eq!((t.count, t.proportion), (4, 1.0));

        let votes = [3, 4, 5, 3, 0, 1, 2, 2, 1, 0];
        let t = tally_preferences(&dataset(&votes), "a", "b", 3).unwrap();
        assert_eq!(t.n_cases, 10);
        assert_eq!(t.count, 4);
        assert!((t.proportion - 0.40).abs() < 1e-15);
        assert_eq!(t.per_rater[0], RaterVotes { rater_id: 1, for_a: 8, for_b: 2 });
        assert_eq!(t.per_rater[4], RaterVotes { rater_id: 5, for_a: 1, for_b: 9 });
    }

    #[test]
    fn two_of_five_does_not_count() {
        let t = tally_preferences(&dataset(&[2]), "a", "b", 3).unwrap();
        assert_eq!((t.count, t.cases_below), (0, 1));
    }

    #[test]
    fn reversed_orientation_counts_for_b() {
        let ds = dataset(&[4, 1]);
        let t = tally_preferences(&ds, "b", "a", 3).unwrap();
        assert_eq!(t.count, 1);
        assert_eq!(comparisons(&ds), vec![("a".to_string(), "b".to_string())]);
    }

    #[test]
    fn incomplete_votes_listed() {
        let mut records = dataset(&[3, 3, 3]).records().to_vec();
        records[1].assessments.pop();
        let ds = StudyDataset::new(records, None, 3).unwrap();
        let err = tally_preferences(&ds, "a", "b", 3).unwrap_err();
        match err {
            StudyError::IncompleteVotes { cases, expected, .. } => {
                assert_eq!(expected, 5);
                assert_eq!(cases, vec![("case001".to_string(), 4)]);
            }
            other => panic!("{other}"),
        }
        assert!(matches!(tally_preferences(&ds, "a", "c", 3), Err(StudyError::NoVotes(..))));
        assert!(tally_preferences(&ds, "a", "b", 6).is_err());
    }

    proptest! {
        #[test]
        fn count_and_below_partition_cases(votes in proptest::collection::vec(0usize..=5, 1..60), k in 1usize..=5) {
            let t = tally_preferences(&dataset(&votes), "a", "b", k).unwrap();
            prop_assert_eq!(t.count + t.cases_below, votes.len());
            prop_assert_eq!(t.count, votes.iter().filter(|&&v| v >= k).count());
        }
    }
}
