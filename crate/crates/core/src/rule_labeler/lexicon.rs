use std::collections::BTreeMap;

use crate::catalog::Finding;
use crate::text::tokenize;

/// The lexicon that ships with the crate.
pub const DEFAULT_LEXICON: &str = include_str!("../../data/default_lexicon.txt");

pub const DEFAULT_SCOPE_WINDOW: usize = 6;

/// A phrase as a token sequence.
pub type Phrase = Vec<String>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: unknown section `{name}`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: phrase appears before any section header")]
    PhraseOutsideSection { line: usize },
    #[error("line {line}: invalid scope window `{value}`")]
    BadScopeWindow { line: usize, value: String },
    #[error("line {line}: phrase has no tokens")]
    EmptyPhrase { line: usize },
    #[error("finding `{0}` has no trigger phrases")]
    MissingTriggers(&'static str),
    #[error("`no_finding` is derived from the other findings and takes no triggers")]
    NoFindingTriggers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SectionKind {
    Negation,
    Uncertainty,
    Finding(Finding),
}

/// Trigger phrases per finding plus negation and uncertainty cues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    triggers: BTreeMap<Finding, Vec<Phrase>>,
    negation: Vec<Phrase>,
    uncertainty: Vec<Phrase>,
    scope_window: usize,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::parse(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }
}

fn normalize_phrase(raw: &str) -> Phrase {
    tokenize(raw)
}

impl Lexicon {
    /// Parses the sectioned text format: `NAME:` opens a section, following
    /// lines are phrases, `#` starts a comment, and `SCOPE_WINDOW: n` sets
    /// the window.
    pub fn parse(source: &str) -> Result<Self, LexiconError> {
        let mut triggers: BTreeMap<Finding, Vec<Phrase>> = BTreeMap::new();
        let mut negation = Vec::new();
        let mut uncertainty = Vec::new();
        let mut scope_window = DEFAULT_SCOPE_WINDOW;
        let mut section: Option<SectionKind> = None;

        for (i, raw_line) in source.lines().enumerate() {
            let line = i + 1;
            let text = raw_line.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            if let Some((key, value)) = text.split_once(':') {
                let key = key.trim();
                let value = value.trim();
                if key.eq_ignore_ascii_case("scope_window") {
                    scope_window = value
                        .parse()
                        .ok()
                        .filter(|w: &usize| *w > 0)
                        .ok_or_else(|| LexiconError::BadScopeWindow { line, value: value.to_string() })?;
                    continue;
                }
                if value.is_empty() {
                    section = Some(if key.eq_ignore_ascii_case("negation") {
                        SectionKind::Negation
                    } else if key.eq_ignore_ascii_case("uncertainty") {
                        SectionKind::Uncertainty
                    } else {
                        match Finding::lookup(key) {
                            Some(Finding::NoFinding) => return Err(LexiconError::NoFindingTriggers),
                            Some(f) => SectionKind::Finding(f),
                            None => return Err(LexiconError::UnknownSection { line, name: key.to_string() }),
                        }
                    });
                    continue;
                }
            }
            let phrase = normalize_phrase(text);
            if phrase.is_empty() {
                return Err(LexiconError::EmptyPhrase { line });
            }
            match section {
                None => return Err(LexiconError::PhraseOutsideSection { line }),
                Some(SectionKind::Negation) => negation.push(phrase),
                Some(SectionKind::Uncertainty) => uncertainty.push(phrase),
                Some(SectionKind::Finding(f)) => triggers.entry(f).or_default().push(phrase),
            }
        }

        let lex = Lexicon { triggers, negation, uncertainty, scope_window };
        lex.validate()?;
        Ok(lex)
    }

    fn validate(&self) -> Result<(), LexiconError> {
        for f in Finding::pathologies() {
            if self.triggers.get(&f).is_none_or(|t| t.is_empty()) {
                return Err(LexiconError::MissingTriggers(f.id()));
            }
        }
        Ok(())
    }

    pub fn triggers(&self, finding: Finding) -> &[Phrase] {
        self.triggers.get(&finding).map_or(&[], Vec::as_slice)
    }

    pub fn negation(&self) -> &[Phrase] {
        &self.negation
    }

    pub fn uncertainty(&self) -> &[Phrase] {
        &self.uncertainty
    }

    pub fn scope_window(&self) -> usize {
        self.scope_window
    }

    pub fn with_scope_window(mut self, window: usize) -> Self {
        self.scope_window = window.max(1);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lexicon_parses_and_is_normalized() {
        let lex = Lexicon::default();
        assert_eq!(lex.scope_window(), 6);
        for f in Finding::pathologies() {
            assert!(!lex.triggers(f).is_empty(), "{f}");
            for p in lex.triggers(f) {
                assert!(p.iter().all(|t| t.chars().all(|c| !c.is_uppercase())));
            }
        }
        assert!(lex.negation().contains(&vec!["negative".to_string(), "for".to_string()]));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert_eq!(Lexicon::parse("stray phrase\n"), Err(LexiconError::PhraseOutsideSection { line: 1 }));
        assert_eq!(
            Lexicon::parse("\nBOGUS:\nx\n"),
            Err(LexiconError::UnknownSection { line: 2, name: "BOGUS".into() })
        );
        assert_eq!(
            Lexicon::parse("SCOPE_WINDOW: zero\n"),
            Err(LexiconError::BadScopeWindow { line: 1, value: "zero".into() })
        );
        assert_eq!(Lexicon::parse("no finding:\nnormal\n"), Err(LexiconError::NoFindingTriggers));
        assert_eq!(
            Lexicon::parse("cardiomegaly:\nbig heart\n"),
            Err(LexiconError::MissingTriggers("enlarged_cardiomediastinum"))
        );
    }
}
