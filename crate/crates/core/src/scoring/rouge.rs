use rayon::prelude::*;

/// Longest common subsequence length, O(|a|·|b|) time and O(|b|) space.
pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// ROUGE-L F-measure (β = 1) on a 0–100 scale.
pub fn rouge_l(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let l = lcs_len(candidate, reference) as f64;
    let p = l / candidate.len() as f64;
    let r = l / reference.len() as f64;
    if p + r == 0.0 {
        0.0
    } else {
        100.0 * 2.0 * p * r / (p + r)
    }
}

/// Mean of per-pair ROUGE-L; 0 for an empty corpus. Pairs beyond the
/// shorter list are ignored, so callers check alignment first.
pub fn rouge_l_corpus(candidates: &[Vec<String>], references: &[Vec<String>]) -> f64 {
    let scores: Vec<f64> = candidates.par_iter().zip(references).map(|(c, r)| rouge_l(c, r)).collect();
    if scores.is_empty() {
        0.0
    } else {
        scores.iter().sum::<f64>() / scores.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;
    use proptest::prelude::*;

    fn lcs_recursive(a: &[String], b: &[String]) -> usize {
        match (a.split_first(), b.split_first()) {
            (Some((x, ra)), Some((y, rb))) => {
                if x == y {
                    1 + lcs_recursive(ra, rb)
                } else {
                    lcs_recursive(ra, b).max(lcs_recursive(a, rb))
                }
            }
            _ => 0,
        }
    }

    #[test]
    fn worked_examples() {
        let t = tokenize;
        assert!((rouge_l(&t("the cat"), &t("the cat sat")) - 80.0).abs() < 1e-12);
        assert_eq!(rouge_l(&t("a b c"), &t("a b c")), 100.0);
        assert_eq!(rouge_l(&t("a b"), &t("c d")), 0.0);
        assert_eq!(rouge_l(&[], &t("c d")), 0.0);
        assert!((rouge_l_corpus(&[t("a b"), t("x")], &[t("a b"), t("y")]) - 50.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn dp_matches_recursive(a in proptest::collection::vec("[abc]", 0..=6), b in proptest::collection::vec("[abc]", 0..=6)) {
            prop_assert_eq!(lcs_len(&a, &b), lcs_recursive(&a, &b));
            let s = rouge_l(&a, &b);
            prop_assert!((0.0..=100.0).contains(&s));
            prop_assert!((s - rouge_l(&b, &a)).abs() < 1e-12);
        }
    }
}
