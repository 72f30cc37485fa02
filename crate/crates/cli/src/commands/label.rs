use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use serde::Serialize;

use cxreval::catalog::LabelVector;
use cxreval::ingest::{read_corpus, CorpusError, HeaderAliases};
use cxreval::labels_io::{write_binary_csv, write_state_csv};
use cxreval::llm_labeler::{
    read_job_input, run_label_job, write_results_csv, HttpLabelService, JobConfig, JobError, LabelService,
    ScriptedService,
};
use cxreval::rule_labeler::{Lexicon, RuleLabeler};

use super::{create_dir, open_input, parse_flag, to_json_line, write_output};
use crate::config::{Engine, LabelFormat, PipelineConfig};
use crate::failure::{self, CmdResult, Failure};
use crate::LabelArgs;

#[derive(Debug, Serialize)]
struct RuleReport {
    engine: &'static str,
    rows: usize,
    labeled: usize,
    failed: Vec<(String, String)>,
}

#[derive(Debug, Serialize)]
struct LlmReport {
    engine: &'static str,
    rows_total: usize,
    rows_done: usize,
    resumed: usize,
    quarantined: usize,
    prose_warnings: usize,
}

fn corpus_failure(what: &str, e: CorpusError) -> Failure {
    match e {
        CorpusError::Rows(d) => failure::rows(what, &d),
        other => Failure::input(other),
    }
}

pub fn run(mut cfg: PipelineConfig, args: LabelArgs) -> CmdResult {
    let label = &mut cfg.label;
    if let Some(e) = args.engine {
        label.engine = e;
    }
    if let Some(p) = &args.lexicon {
        label.lexicon = Some(p.clone());
    }
    if let Some(f) = args.format {
        label.format = f;
    }
    if let Some(p) = &args.policy {
        label.policy = parse_flag("policy", p)?;
    }
    let llm = &mut label.llm;
    if let Some(e) = &args.endpoint {
        llm.endpoint = Some(e.clone());
    }
    llm.dry_run |= args.dry_run;
    if let Some(s) = &args.stub_script {
        llm.stub_script = Some(s.clone());
    }
    if let Some(c) = args.concurrency {
        llm.concurrency = c;
    }
    if let Some(r) = args.max_retries {
        llm.max_retries = r;
    }
    if let Some(b) = args.backoff_ms {
        llm.backoff_base_ms = b;
    }
    match cfg.label.engine {
        Engine::Rule => run_rule(&cfg, &args),
        Engine::Llm => run_llm(&cfg, &args),
    }
}

fn run_rule(cfg: &PipelineConfig, args: &LabelArgs) -> CmdResult {
    let lexicon = match &cfg.label.lexicon {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read lexicon {}", path.display()))
                .map_err(Failure::input)?;
            Lexicon::parse(&text)
                .with_context(|| format!("invalid lexicon {}", path.display()))
                .map_err(Failure::input)?
        }
        None => Lexicon::default(),
    };
    let corpus =
        read_corpus(open_input(&args.corpus)?).map_err(|e| corpus_failure(&args.corpus.display().to_string(), e))?;
    let mut aliases = HeaderAliases::default();
    cfg.prep.findings_aliases.iter().for_each(|a| aliases.add_findings_alias(a.clone()));
    cfg.prep.impression_aliases.iter().for_each(|a| aliases.add_impression_alias(a.clone()));
    let rows: Vec<(String, String)> = corpus.into_iter().map(|r| (r.case_id, r.report_text)).collect();

    let labeled = RuleLabeler::new(lexicon).label_corpus(&rows, &aliases.compile());
    let mut ok: Vec<(String, LabelVector)> = Vec::new();
    let mut failed = Vec::new();
    for row in labeled {
        match row.labels {
            Ok(v) => ok.push((row.case_id, v)),
            Err(e) => {
                log::warn!("case {}: {e}", row.case_id);
                failed.push((row.case_id, e.to_string()));
            }
        }
    }

    create_dir(&args.out)?;
    let mut csv = Vec::new();
    match cfg.label.format {
        LabelFormat::Binary => write_binary_csv(&mut csv, &ok, cfg.label.policy),
        LabelFormat::States => write_state_csv(&mut csv, &ok),
    }
    .map_err(Failure::internal)?;
    write_output(&args.out.join("labels.csv"), csv)?;
    let report = RuleReport { engine: "rule", rows: rows.len(), labeled: ok.len(), failed };
    write_output(&args.out.join("label_report.json"), to_json_line(&report))?;
    cfg.write_snapshot(&args.out).map_err(Failure::internal)?;
    println!("labeled {} of {} reports, {} failed", report.labeled, report.rows, report.failed.len());
    Ok(())
}

fn run_llm(cfg: &PipelineConfig, args: &LabelArgs) -> CmdResult {
    let llm = &cfg.label.llm;
    if cfg.label.format == LabelFormat::States {
        return Err(Failure::input(anyhow::anyhow!("the llm engine produces binary labels only")));
    }
    let service: Arc<dyn LabelService> = if llm.dry_run {
        let scripted = match &llm.stub_script {
            Some(p) => ScriptedService::from_jsonl(open_input(p)?)
                .with_context(|| format!("invalid stub script {}", p.display()))
                .map_err(Failure::input)?,
            None => ScriptedService::new(Vec::new()),
        };
        Arc::new(scripted)
    } else if let Some(endpoint) = &llm.endpoint {
        Arc::new(HttpLabelService::from_env(endpoint, Duration::from_secs(llm.timeout_s)))
    } else {
        return Err(Failure::input(anyhow::anyhow!("the llm engine needs --endpoint or --dry-run")));
    };
    let rows =
        read_job_input(open_input(&args.corpus)?).map_err(|e| corpus_failure(&args.corpus.display().to_string(), e))?;

    create_dir(&args.out)?;
    let mut job = JobConfig::new(args.out.join("checkpoint.jsonl"), args.out.join("quarantine.jsonl"));
    job.model = llm.model.clone();
    job.concurrency = llm.concurrency;
    job.max_retries = llm.max_retries;
    job.backoff_base = Duration::from_millis(llm.backoff_base_ms);
    job.backoff_cap = Duration::from_millis(llm.backoff_cap_ms);
    cfg.write_snapshot(&args.out).map_err(Failure::internal)?;

    let state = run_label_job(&rows, service.as_ref(), &job, None).map_err(|e| match e {
        JobError::Unreachable { .. } => Failure::service(e),
        JobError::Config(_)
        | JobError::DuplicateCase(_)
        | JobError::CorruptCheckpoint { .. }
        | JobError::ForeignCheckpointRow(_) => Failure::input(e),
        other => Failure::internal(other),
    })?;

    let mut csv = Vec::new();
    write_results_csv(&mut csv, &state).map_err(Failure::internal)?;
    write_output(&args.out.join("labels.csv"), csv)?;
    let report = LlmReport {
        engine: "llm",
        rows_total: state.rows_total,
        rows_done: state.rows_done,
        resumed: state.resumed,
        quarantined: state.quarantined.len(),
        prose_warnings: state.prose_warnings,
    };
    write_output(&args.out.join("label_report.json"), to_json_line(&report))?;
    if report.quarantined > 0 {
        log::warn!("{} row(s) quarantined; see {}", report.quarantined, job.quarantine.display());
    }
    println!(
        "labeled {} of {} reports ({} resumed), {} quarantined",
        report.rows_done, report.rows_total, report.resumed, report.quarantined
    );
    Ok(())
}
