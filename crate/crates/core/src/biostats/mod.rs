//! Agreement, concordance, ROC, t-tests and sample-size arithmetic.

pub mod dist;
mod kappa;
mod kendall;
mod power;
#[cfg(test)]
pub(crate) mod quadrature;
mod roc;
mod sample_size;
mod ttest;

pub use kappa::{cohens_kappa, cohens_kappa_from_table, AgreementResult, KappaError};
pub use kendall::{kendalls_w, mid_ranks, ConcordanceBand, ConcordanceError, ConcordanceResult};
pub use power::{power_simulation, PowerError, PowerResult};
pub use roc::{roc_auc, RocCurve, RocError, RocPoint};
pub use sample_size::{sample_size, Rounding, SampleSizeError, SampleSizeResult, SampleSizeSpec};
pub use ttest::{
    one_way_anova, paired_t, paired_t_with_confidence, two_sample_t, two_sample_t_with_confidence, AnovaError,
    AnovaResult, TTestError, TTestResult, TTestVariant,
};
