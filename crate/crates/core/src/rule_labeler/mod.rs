//! Lexicon-driven labeler with NegEx-style negation and uncertainty cues.
//!
//! Each trigger-phrase mention is classified by scanning at most
//! `scope_window` tokens to its left, within its sentence. The nearest cue
//! wins; a negation and an uncertainty cue ending at the same token resolve
//! to the longer phrase, then to negation. Mentions of one finding are then
//! merged by precedence (positive > uncertain > negative by default).

mod lexicon;

pub use lexicon::{Lexicon, LexiconError, Phrase, DEFAULT_LEXICON, DEFAULT_SCOPE_WINDOW};

use rayon::prelude::*;

use crate::catalog::{Finding, LabelState, LabelVector};
use crate::ingest::sections::{parse_report, SectionScanner};
use crate::report::{Report, ReportError, ReportSource};
use crate::text::{sentences, tokenize};

/// Order in which mention states override each other, strongest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precedence(pub [LabelState; 3]);

impl Default for Precedence {
    fn default() -> Self {
        Precedence([LabelState::Positive, LabelState::Uncertain, LabelState::Negative])
    }
}

impl Precedence {
    fn rank(&self, state: LabelState) -> usize {
        self.0.iter().position(|s| *s == state).unwrap_or(usize::MAX)
    }

    /// The stronger of two states; `Blank` always loses.
    pub fn merge(&self, a: LabelState, b: LabelState) -> LabelState {
        match (a, b) {
            (LabelState::Blank, x) | (x, LabelState::Blank) => x,
            _ if self.rank(a) <= self.rank(b) => a,
            _ => b,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuleLabeler {
    lexicon: Lexicon,
    precedence: Precedence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cue {
    Negation,
    Uncertainty,
}

fn ends_at(tokens: &[String], end: usize, phrase: &[String], floor: usize) -> bool {
    let len = phrase.len();
    end + 1 >= len && end + 1 - len >= floor && tokens[end + 1 - len..=end] == *phrase
}

fn find_occurrences<'a>(tokens: &'a [String], phrase: &'a [String]) -> impl Iterator<Item = usize> + 'a {
    let n = phrase.len();
    (0..(tokens.len() + 1).saturating_sub(n)).filter(move |&i| tokens[i..i + n] == *phrase)
}

impl RuleLabeler {
    pub fn new(lexicon: Lexicon) -> Self {
        RuleLabeler { lexicon, precedence: Precedence::default() }
    }

    pub fn with_precedence(mut self, precedence: Precedence) -> Self {
        self.precedence = precedence;
        self
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Nearest cue within the window left of `start`, if any.
    fn cue_before(&self, tokens: &[String], start: usize) -> Option<Cue> {
        let floor = start.saturating_sub(self.lexicon.scope_window());
        for end in (floor..start).rev() {
            let longest =
                |phrases: &[Phrase]| phrases.iter().filter(|p| ends_at(tokens, end, p, floor)).map(Vec::len).max();
            match (longest(self.lexicon.negation()), longest(self.lexicon.uncertainty())) {
                (None, None) => continue,
                (Some(_), None) => return Some(Cue::Negation),
                (None, Some(_)) => return Some(Cue::Uncertainty),
                (Some(n), Some(u)) => return Some(if u > n { Cue::Uncertainty } else { Cue::Negation }),
            }
        }
        None
    }

    fn classify_sentence(&self, tokens: &[String], out: &mut LabelVector) {
        for finding in Finding::pathologies() {
            for phrase in self.lexicon.triggers(finding) {
                for start in find_occurrences(tokens, phrase) {
                    let state = match self.cue_before(tokens, start) {
                        Some(Cue::Negation) => LabelState::Negative,
                        Some(Cue::Uncertainty) => LabelState::Uncertain,
                        None => LabelState::Positive,
                    };
                    out.set(finding, self.precedence.merge(out.get(finding), state));
                }
            }
        }
    }

    /// Labels free text. Empty text yields an all-blank vector.
    pub fn label_text(&self, text: &str) -> LabelVector {
        let mut labels = LabelVector::blank();
        if text.trim().is_empty() {
            return labels;
        }
        for sentence in sentences(text) {
            self.classify_sentence(&tokenize(sentence), &mut labels);
        }
        let abnormal =
            Finding::pathologies().any(|f| matches!(labels.get(f), LabelState::Positive | LabelState::Uncertain));
        if !abnormal {
            labels.set(Finding::NoFinding, LabelState::Positive);
        }
        labels
    }

    pub fn label_report(&self, report: &Report) -> LabelVector {
        self.label_text(&report.full_text())
    }

    /// Parses and labels each `(case_id, raw_text)` row, preserving input
    /// order. Parse failures are returned per row.
    pub fn label_corpus(&self, rows: &[(String, String)], scanner: &SectionScanner) -> Vec<LabeledRow> {
        rows.par_iter()
            .map(|(id, raw)| LabeledRow {
                case_id: id.clone(),
                labels: parse_report(id, raw, scanner, ReportSource::Published).map(|r| self.label_report(&r)),
            })
            .collect()
    }
}

/// Result of labeling one corpus row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRow {
    pub case_id: String,
    pub labels: Result<LabelVector, ReportError>,
}

/// Labels a report with the given lexicon and default precedence.
pub fn label_report(report: &Report, lexicon: &Lexicon) -> LabelVector {
    RuleLabeler::new(lexicon.clone()).label_report(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::sections::HeaderAliases;
    use proptest::prelude::*;

    fn label(text: &str) -> LabelVector {
        RuleLabeler::default().label_text(text)
    }

    #[test]
    fn negated_effusion_and_pneumothorax() {
        let v = label("No pleural effusion or pneumothorax.");
        assert_eq!(v.get(Finding::PleuralEffusion), LabelState::Negative);
        assert_eq!(v.get(Finding::Pneumothorax), LabelState::Negative);
        assert_eq!(v.get(Finding::NoFinding), LabelState::Positive);
        for f in [Finding::Cardiomegaly, Finding::Pneumonia, Finding::Edema] {
            assert_eq!(v.get(f), LabelState::Blank);
        }
    }

    #[test]
    fn uncertain_pneumonia() {
        let v = label("Possible right lower lobe pneumonia.");
        assert_eq!(v.get(Finding::Pneumonia), LabelState::Uncertain);
        assert_eq!(v.get(Finding::NoFinding), LabelState::Blank);
    }

    #[test]
    fn empty_text_is_all_blank() {
        assert_eq!(label(""), LabelVector::blank());
        assert_eq!(label("   "), LabelVector::blank());
    }

    #[test]
    fn cue_outside_window_does_not_apply() {
        // "no" is 7 tokens before "pneumonia"
        let v = label("no a b c d e f pneumonia");
        assert_eq!(v.get(Finding::Pneumonia), LabelState::Positive);
        let v = label("no a b c d e pneumonia");
        assert_eq!(v.get(Finding::Pneumonia), LabelState::Negative);
    }

    #[test]
    fn negation_does_not_cross_sentences() {
        for sep in [". ", "; ", ": ", "\n"] {
            let v = label(&format!("No effusion{sep}pneumothorax present"));
            assert_eq!(v.get(Finding::PleuralEffusion), LabelState::Negative, "{sep:?}");
            assert_eq!(v.get(Finding::Pneumothorax), LabelState::Positive, "{sep:?}");
        }
    }

    #[test]
    fn nearest_cue_wins_and_longer_phrase_breaks_ties() {
        // "cannot exclude" ends right before the mention
        let v = label("cannot exclude pneumonia");
        assert_eq!(v.get(Finding::Pneumonia), LabelState::Uncertain);
        let v = label("not possible pneumonia");
        assert_eq!(v.get(Finding::Pneumonia), LabelState::Uncertain);
        let v = label("possibly no pneumonia");
        assert_eq!(v.get(Finding::Pneumonia), LabelState::Negative);
    }

    #[test]
    fn precedence_merges_mentions() {
        let v = label("No pneumonia on the left. Right pneumonia.");
        assert_eq!(v.get(Finding::Pneumonia), LabelState::Positive);
        let v = label("No pneumonia. Possible pneumonia.");
        assert_eq!(v.get(Finding::Pneumonia), LabelState::Uncertain);
        let neg_first = RuleLabeler::default().with_precedence(Precedence([
            LabelState::Negative,
            LabelState::Uncertain,
            LabelState::Positive,
        ]));
        assert_eq!(neg_first.label_text("No pneumonia. Pneumonia.").get(Finding::Pneumonia), LabelState::Negative);
    }

    #[test]
    fn corpus_preserves_order_and_flags_errors() {
        let scanner = HeaderAliases::default().compile();
        let lab = RuleLabeler::default();
        assert!(lab.label_corpus(&[], &scanner).is_empty());
        let rows = vec![
            ("b".to_string(), "FINDINGS: cardiomegaly. IMPRESSION: no effusion".to_string()),
            ("a".to_string(), "  ".to_string()),
            ("c".to_string(), "Possible pneumonia".to_string()),
        ];
        let out = lab.label_corpus(&rows, &scanner);
        assert_eq!(out.iter().map(|r| r.case_id.as_str()).collect::<Vec<_>>(), ["b", "a", "c"]);
        assert!(out[1].labels.is_err());
        for (row, single) in rows.iter().zip(&out) {
            let alone = lab.label_corpus(std::slice::from_ref(row), &scanner);
            assert_eq!(&alone[0], single);
        }
        assert_eq!(out[0].labels.as_ref().unwrap().get(Finding::Cardiomegaly), LabelState::Positive);
    }

    fn arb_sentence() -> impl Strategy<Value = String> {
        let word = prop_oneof![
            Just("no"),
            Just("possible"),
            Just("pneumonia"),
            Just("effusion"),
            Just("pleural"),
            Just("cardiomegaly"),
            Just("without"),
            Just("left"),
            Just("."),
            Just(";"),
            Just("mass"),
        ];
        proptest::collection::vec(word, 0..20).prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn deterministic_and_no_finding_exclusive(text in arb_sentence()) {
            let a = label(&text);
            prop_assert_eq!(a, label(&text));
            let any_pos = Finding::pathologies().any(|f| a.get(f) == LabelState::Positive);
            prop_assert!(!(any_pos && a.get(Finding::NoFinding) == LabelState::Positive));
        }

        #[test]
        fn adding_positive_mention_keeps_positive(text in arb_sentence()) {
            let before = label(&text);
            let after = label(&format!("{text}. pneumonia"));
            prop_assert_eq!(after.get(Finding::Pneumonia), LabelState::Positive);
            for f in Finding::pathologies() {
                if before.get(f) == LabelState::Positive {
                    prop_assert_eq!(after.get(f), LabelState::Positive);
                }
            }
        }
    }
}
