use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::hash::{Hash, Hasher};
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::response::{parse_labeler_response, ParseWarning};
use super::service::{LabelService, LabelerRequest, ServiceError, DEFAULT_MODEL};
use crate::catalog::{BinaryLabels, UncertainPolicy};
use crate::ingest::corpus::{read_corpus, CorpusError};
use crate::labels_io::{write_binary_csv, LabelFileError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobRow {
    pub case_id: String,
    pub report_text: String,
}

/// Reads `case_id,report_text` rows (other columns ignored).
pub fn read_job_input<R: Read>(input: R) -> Result<Vec<JobRow>, CorpusError> {
    Ok(read_corpus(input)?.into_iter().map(|r| JobRow { case_id: r.case_id, report_text: r.report_text }).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub model: String,
    /// Maximum requests in flight.
    pub concurrency: usize,
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub backoff_base: Duration,
    pub backoff_cap: Duration,
    pub checkpoint: PathBuf,
    pub quarantine: PathBuf,
}

impl JobConfig {
    pub fn new(checkpoint: impl Into<PathBuf>, quarantine: impl Into<PathBuf>) -> Self {
        JobConfig {
            model: DEFAULT_MODEL.to_string(),
            concurrency: 4,
            max_retries: 3,
            backoff_base: Duration::from_millis(250),
            backoff_cap: Duration::from_secs(8),
            checkpoint: checkpoint.into(),
            quarantine: quarantine.into(),
        }
    }

    /// Delay before retry `attempt` (1-based): doubling from the base,
    /// capped, plus up to one base interval of jitter derived from the case
    /// id so runs are reproducible.
    pub fn backoff(&self, case_id: &str, attempt: u32) -> Duration {
        let exp = self.backoff_base.saturating_mul(1u32 << (attempt.saturating_sub(1)).min(16));
        let mut h = DefaultHasher::new();
        (case_id, attempt).hash(&mut h);
        let base_ns = self.backoff_base.as_nanos() as u64;
        let jitter = if base_ns == 0 { 0 } else { h.finish() % base_ns };
        exp.min(self.backoff_cap) + Duration::from_nanos(jitter)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointEntry {
    pub case_id: String,
    pub row: usize,
    pub labels: BTreeMap<String, u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantineEntry {
    pub case_id: String,
    pub row: usize,
    pub kind: String,
    pub reason: String,
    pub attempts: u32,
    pub raw: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelJobState {
    pub checkpoint: PathBuf,
    pub rows_total: usize,
    /// Rows persisted in the checkpoint.
    pub rows_done: usize,
    /// Of those, rows already present when the job started.
    pub resumed: usize,
    pub quarantined: Vec<QuarantineEntry>,
    /// Completed rows in input order.
    pub results: Vec<(String, BinaryLabels)>,
    /// Responses that parsed but carried surrounding prose.
    pub prose_warnings: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error("invalid job configuration: {0}")]
    Config(String),
    #[error("duplicate case_id `{0}` in job input")]
    DuplicateCase(String),
    #[error("checkpoint {path}: {source}")]
    Checkpoint { path: PathBuf, source: io::Error },
    #[error("checkpoint line {line} is corrupt: {message}")]
    CorruptCheckpoint { line: usize, message: String },
    #[error("checkpoint row `{0}` is not part of this input")]
    ForeignCheckpointRow(String),
    #[error("quarantine file {path}: {source}")]
    Quarantine { path: PathBuf, source: io::Error },
    #[error("labeling service unreachable: all {attempted} attempted row(s) failed; last error: {last_error}")]
    Unreachable { attempted: usize, last_error: String },
    #[error("job cancelled after {rows_done} row(s) were checkpointed")]
    Cancelled { rows_done: usize },
}

fn parse_entry(line: &str) -> Result<(String, BinaryLabels), String> {
    let entry: CheckpointEntry = serde_json::from_str(line.trim()).map_err(|e| e.to_string())?;
    let labels = BinaryLabels::from_keyed_map(&entry.labels).map_err(|e| e.to_string())?;
    Ok((entry.case_id, labels))
}

/// Reads a checkpoint, dropping a torn final line left by a crash and
/// truncating the file back to the last complete entry.
pub fn load_checkpoint(path: &Path) -> Result<Vec<(String, BinaryLabels)>, JobError> {
    let io_err = |source| JobError::Checkpoint { path: path.to_path_buf(), source };
    let mut file = match OpenOptions::new().read(true).write(true).open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(e)),
    };
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(io_err)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut good_len = 0usize;
    let mut offset = 0usize;
    for (i, chunk) in bytes.split_inclusive(|&b| b == b'\n').enumerate() {
        let complete = chunk.ends_with(b"\n");
        let text = String::from_utf8_lossy(chunk);
        offset += chunk.len();
        if text.trim().is_empty() {
            if complete {
                good_len = offset;
            }
            continue;
        }
        // a final line without its newline is a torn write
        if !complete {
            break;
        }
        let (id, labels) =
            parse_entry(&text).map_err(|message| JobError::CorruptCheckpoint { line: i + 1, message })?;
        if !seen.insert(id.clone()) {
            return Err(JobError::CorruptCheckpoint { line: i + 1, message: format!("duplicate case_id `{id}`") });
        }
        out.push((id, labels));
        good_len = offset;
    }
    if good_len < bytes.len() {
        file.set_len(good_len as u64).map_err(io_err)?;
        file.seek(SeekFrom::End(0)).map_err(io_err)?;
        file.sync_data().map_err(io_err)?;
    }
    Ok(out)
}

enum Outcome {
    Done { index: usize, labels: BinaryLabels, prose: bool },
    Failed { entry: QuarantineEntry, unreachable: bool },
}

fn label_one(row: &JobRow, index: usize, service: &dyn LabelService, cfg: &JobConfig) -> Outcome {
    let fail = |kind: &str, reason: String, attempts: u32, raw: Option<String>, unreachable: bool| Outcome::Failed {
        entry: QuarantineEntry { case_id: row.case_id.clone(), row: index, kind: kind.into(), reason, attempts, raw },
        unreachable,
    };
    if row.report_text.trim().is_empty() {
        return fail("empty_report", "report text is empty".into(), 0, None, false);
    }
    let request = LabelerRequest::new(&cfg.model, &row.report_text);
    let mut last = None;
    let mut attempts = 0;
    for attempt in 0..=cfg.max_retries {
        if attempt > 0 {
            std::thread::sleep(cfg.backoff(&row.case_id, attempt));
        }
        attempts += 1;
        match service.complete(&request) {
            Ok(raw) => match parse_labeler_response(&raw) {
                Ok(parsed) => {
                    let prose = parsed.warnings.contains(&ParseWarning::ExtraProse);
                    return Outcome::Done { index, labels: parsed.labels, prose };
                }
                Err(f) => last = Some((f.kind().to_string(), f.to_string(), Some(raw), false)),
            },
            Err(e) => {
                let retry = e.is_retryable();
                let kind = match e {
                    ServiceError::Transport(_) => "transport",
                    ServiceError::Status { .. } => "http_status",
                    ServiceError::Envelope(_) => "envelope",
                };
                last = Some((kind.to_string(), e.to_string(), None, e.is_unreachable()));
                if !retry {
                    break;
                }
            }
        }
    }
    let (kind, reason, raw, unreachable) = last.expect("at least one attempt");
    fail(&kind, reason, attempts, raw, unreachable)
}

fn append_line(file: &mut File, value: &impl Serialize) -> io::Result<()> {
    let mut line = serde_json::to_vec(value).map_err(io::Error::other)?;
    line.push(b'\n');
    file.write_all(&line)?;
    file.flush()?;
    file.sync_data()
}

/// Labels every row not yet in the checkpoint.
///
/// Workers call the service concurrently; a single writer appends each
/// success to the checkpoint (synced) before counting it, and each final
/// failure to the quarantine file, which is rewritten per run. Setting
/// `cancel` stops new work and returns [`JobError::Cancelled`].
pub fn run_label_job(
    rows: &[JobRow],
    service: &dyn LabelService,
    cfg: &JobConfig,
    cancel: Option<&AtomicBool>,
) -> Result<LabelJobState, JobError> {
    if cfg.concurrency == 0 {
        return Err(JobError::Config("concurrency must be at least 1".into()));
    }
    let mut index_of = HashMap::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        if index_of.insert(r.case_id.as_str(), i).is_some() {
            return Err(JobError::DuplicateCase(r.case_id.clone()));
        }
    }
    let prior = load_checkpoint(&cfg.checkpoint)?;
    let mut done: HashMap<String, BinaryLabels> = HashMap::with_capacity(rows.len());
    for (id, labels) in prior {
        if !index_of.contains_key(id.as_str()) {
            return Err(JobError::ForeignCheckpointRow(id));
        }
        done.insert(id, labels);
    }
    let resumed = done.len();
    let pending: Vec<usize> = (0..rows.len()).filter(|&i| !done.contains_key(&rows[i].case_id)).collect();

    let ck_err = |source| JobError::Checkpoint { path: cfg.checkpoint.clone(), source };
    let q_err = |source| JobError::Quarantine { path: cfg.quarantine.clone(), source };
    let mut checkpoint = OpenOptions::new().create(true).append(true).open(&cfg.checkpoint).map_err(ck_err)?;
    let mut quarantine = File::create(&cfg.quarantine).map_err(q_err)?;

    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let stopped = || abort.load(Ordering::SeqCst) || cancel.is_some_and(|c| c.load(Ordering::SeqCst));
    let mut quarantined = Vec::new();
    let mut unreachable_failures = 0usize;
    let mut attempted = 0usize;
    let mut prose_warnings = 0usize;
    let mut write_error: Option<JobError> = None;

    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<Outcome>();
        for _ in 0..cfg.concurrency.min(pending.len()) {
            let tx = tx.clone();
            let (next, pending, stopped) = (&next, &pending, &stopped);
            scope.spawn(move || loop {
                if stopped() {
                    break;
                }
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(&index) = pending.get(k) else { break };
                if tx.send(label_one(&rows[index], index, service, cfg)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for outcome in rx {
            if write_error.is_some() {
                continue;
            }
            attempted += 1;
            match outcome {
                Outcome::Done { index, labels, prose } => {
                    let row = &rows[index];
                    let entry = CheckpointEntry {
                        case_id: row.case_id.clone(),
                        row: index,
                        labels: labels.to_keyed_map().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                    };
                    if let Err(e) = append_line(&mut checkpoint, &entry) {
                        write_error = Some(ck_err(e));
                        abort.store(true, Ordering::SeqCst);
                        continue;
                    }
                    prose_warnings += usize::from(prose);
                    done.insert(row.case_id.clone(), labels);
                }
                Outcome::Failed { entry, unreachable } => {
                    if let Err(e) = append_line(&mut quarantine, &entry) {
                        write_error = Some(q_err(e));
                        abort.store(true, Ordering::SeqCst);
                        continue;
                    }
                    unreachable_failures += usize::from(unreachable);
                    quarantined.push(entry);
                }
            }
        }
    });

    if let Some(e) = write_error {
        return Err(e);
    }
    if attempted < pending.len() {
        return Err(JobError::Cancelled { rows_done: done.len() });
    }
    if attempted > 0 && unreachable_failures == attempted {
        let last_error = quarantined.last().map(|q| q.reason.clone()).unwrap_or_default();
        return Err(JobError::Unreachable { attempted, last_error });
    }
    quarantined.sort_by_key(|q| q.row);
    let results: Vec<(String, BinaryLabels)> =
        rows.iter().filter_map(|r| done.get(&r.case_id).map(|l| (r.case_id.clone(), *l))).collect();
    Ok(LabelJobState {
        checkpoint: cfg.checkpoint.clone(),
        rows_total: rows.len(),
        rows_done: results.len(),
        resumed,
        quarantined,
        results,
        prose_warnings,
    })
}

/// Writes completed rows as a 0/1 label CSV in input order.
pub fn write_results_csv<W: Write>(out: W, state: &LabelJobState) -> Result<(), LabelFileError> {
    let rows: Vec<_> = state.results.iter().map(|(id, l)| (id.clone(), l.to_label_vector())).collect();
    write_binary_csv(out, &rows, UncertainPolicy::UncertainAsPositive)
}

/// Reads a checkpoint file's non-empty lines as raw entries (for tests and
/// inspection).
pub fn read_checkpoint_entries(path: &Path) -> io::Result<Vec<CheckpointEntry>> {
    let file = File::open(path)?;
    BufReader::new(file)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| l.and_then(|l| serde_json::from_str(&l).map_err(io::Error::other)))
        .collect()
}
