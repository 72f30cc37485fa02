//! Client for an external LLM labeling service: request/response contract,
//! a resumable batch job, a local stub service and labeler agreement.

mod agreement;
mod job;
mod response;
mod service;
pub mod stub;

pub use agreement::{labeler_agreement, FindingAgreement};
pub use job::{
    load_checkpoint, read_checkpoint_entries, read_job_input, run_label_job, write_results_csv, CheckpointEntry,
    JobConfig, JobError, JobRow, LabelJobState, QuarantineEntry,
};
pub use response::{
    format_labels_json, parse_labeler_bytes, parse_labeler_response, ParseFailure, ParseWarning, ParsedResponse,
};
pub use service::{
    default_instruction, wrap_completion, HttpLabelService, LabelService, LabelerRequest, ServiceError, API_KEY_ENV,
    DEFAULT_MODEL,
};
pub use stub::{ScriptedService, StubRule, StubServer};
