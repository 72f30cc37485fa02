//! Dataset preparation: report sections, seeded splits, image letterboxing
//! and corpus files.

pub mod corpus;
pub mod image;
pub mod sections;
pub mod split;

pub use corpus::{read_corpus, split_corpus, CorpusError, CorpusManifest, CorpusRow, ManifestEntry, RowDiagnostic};
pub use image::{letterbox, preprocess_file, preprocess_image, ImageError, ImageSpec, Letterbox};
pub use sections::{canonicalize_report, parse_report, HeaderAliases, SectionScanner};
pub use split::{split_assignments, SplitAssignment, SplitError, SPLIT_ALGORITHM};
