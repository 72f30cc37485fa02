use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use cxreval::ingest::{
    preprocess_file, read_corpus, split_corpus, CorpusError, HeaderAliases, ImageSpec, SplitAssignment, SPLIT_ALGORITHM,
};

use super::{create_dir, open_input, to_json_line, write_output};
use crate::config::PipelineConfig;
use crate::failure::{self, CmdResult, Failure};
use crate::PrepArgs;

#[derive(Debug, Serialize)]
struct Flagged {
    case_id: String,
    reason: String,
}

#[derive(Debug, Serialize)]
struct SplitReport {
    rows: usize,
    entries: usize,
    finetune: usize,
    test: usize,
    ratio: f64,
    seed: u64,
    algorithm: &'static str,
    images_written: usize,
    rejected_reports: Vec<Flagged>,
    image_errors: Vec<Flagged>,
}

/// File name for a case's image; anything outside `[A-Za-z0-9._-]`
/// becomes `_`.
fn image_name(case_id: &str) -> String {
    let safe: String =
        case_id.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect();
    format!("{safe}.png")
}

pub fn run(mut cfg: PipelineConfig, args: PrepArgs) -> CmdResult {
    if let Some(r) = args.ratio {
        cfg.prep.split_ratio = r;
    }
    let rows = read_corpus(open_input(&args.corpus)?).map_err(|e| match e {
        CorpusError::Rows(d) => failure::rows(&args.corpus.display().to_string(), &d),
        other => Failure::input(other),
    })?;
    let mut aliases = HeaderAliases::default();
    cfg.prep.findings_aliases.iter().for_each(|a| aliases.add_findings_alias(a.clone()));
    cfg.prep.impression_aliases.iter().for_each(|a| aliases.add_impression_alias(a.clone()));
    let mut manifest =
        split_corpus(&rows, &aliases.compile(), cfg.prep.split_ratio, cfg.seed).map_err(Failure::input)?;

    // Outputs are only created once the input has validated.
    create_dir(&args.out)?;
    let image_root: PathBuf =
        args.images.clone().unwrap_or_else(|| args.corpus.parent().map(Path::to_path_buf).unwrap_or_default());
    let spec = ImageSpec { target_side: cfg.prep.image_side, pad_color: cfg.prep.pad_color };
    if manifest.entries.iter().any(|e| e.image_path.is_some()) {
        create_dir(&args.out.join("images"))?;
    }
    // Names are assigned in input order so a collision always flags the later case.
    let mut seen = std::collections::HashSet::new();
    let names: Vec<Option<String>> = manifest
        .entries
        .iter()
        .map(|e| e.image_path.as_ref().map(|_| image_name(&e.case_id)).filter(|n| seen.insert(n.clone())))
        .collect();
    manifest.entries.par_iter_mut().zip(names).for_each(|(e, name)| {
        let Some(src) = &e.image_path else { return };
        let Some(name) = name else {
            e.image_error = Some(format!("output name {} collides with another case", image_name(&e.case_id)));
            return;
        };
        let rel = format!("images/{name}");
        match preprocess_file(&image_root.join(src), &args.out.join(&rel), &spec) {
            Ok(_) => e.image_output = Some(rel),
            Err(err) => e.image_error = Some(err.to_string()),
        }
    });

    let mut manifest_bytes = Vec::new();
    manifest.write_jsonl(&mut manifest_bytes).map_err(Failure::internal)?;
    write_output(&args.out.join("manifest.jsonl"), manifest_bytes)?;

    let report = SplitReport {
        rows: rows.len(),
        entries: manifest.entries.len(),
        finetune: manifest.count(SplitAssignment::Finetune),
        test: manifest.count(SplitAssignment::Test),
        ratio: cfg.prep.split_ratio,
        seed: cfg.seed,
        algorithm: SPLIT_ALGORITHM,
        images_written: manifest.entries.iter().filter(|e| e.image_output.is_some()).count(),
        rejected_reports: manifest
            .rejected
            .iter()
            .map(|(id, err)| Flagged { case_id: id.clone(), reason: err.to_string() })
            .collect(),
        image_errors: manifest
            .entries
            .iter()
            .filter_map(|e| e.image_error.as_ref().map(|r| Flagged { case_id: e.case_id.clone(), reason: r.clone() }))
            .collect(),
    };
    write_output(&args.out.join("split_report.json"), to_json_line(&report))?;
    cfg.write_snapshot(&args.out).map_err(Failure::internal)?;

    for f in report.rejected_reports.iter().chain(&report.image_errors) {
        log::warn!("case {}: {}", f.case_id, f.reason);
    }
    let warnings = report.rejected_reports.len() + report.image_errors.len();
    println!(
        "prepared {} entries ({} finetune, {} test), {} image(s) written, {warnings} warning(s)",
        report.entries, report.finetune, report.test, report.images_written
    );
    Ok(())
}
