use std::collections::BTreeSet;
use std::path::Path;

use anyhow::anyhow;

use cxreval::biostats::{power_simulation, roc_auc, sample_size};
use cxreval::study::{read_study_csv, read_study_jsonl, summarize, StudyDataset, StudyError, SummaryOptions};

use super::stats::n_pairs_for;
use super::{create_dir, open_input, parse_flag, to_json_line, write_output};
use crate::config::{OutputFormat, PipelineConfig};
use crate::failure::{self, CmdResult, Failure};
use crate::StudyArgs;

fn load(path: &Path, cfg: &PipelineConfig) -> Result<StudyDataset, Failure> {
    let raters = (!cfg.study.raters.is_empty()).then(|| cfg.study.raters.iter().copied().collect::<BTreeSet<_>>());
    let k = cfg.study.preference_threshold;
    let jsonl = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("jsonl") || e.eq_ignore_ascii_case("json"));
    let input = open_input(path)?;
    let loaded = if jsonl { read_study_jsonl(input, raters, k) } else { read_study_csv(input, raters, k) };
    loaded.map_err(|e| study_failure(path, e))
}

fn study_failure(path: &Path, e: StudyError) -> Failure {
    match e {
        StudyError::Rows(d) => failure::rows(&path.display().to_string(), &d),
        StudyError::Io(_) => Failure::internal(e),
        other => Failure::input(anyhow::Error::new(other).context(path.display().to_string())),
    }
}

/// Reads `score,truth` rows; truth is `1`/`0` or `true`/`false`.
fn read_roc_input(path: &Path) -> Result<(Vec<f64>, Vec<bool>), Failure> {
    let mut rdr = csv::Reader::from_reader(open_input(path)?);
    let headers = rdr.headers().map_err(Failure::input)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| Failure::input(anyhow!("{}: missing column `{name}`", path.display())))
    };
    let (si, ti) = (col("score")?, col("truth")?);
    let (mut scores, mut truth) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(Failure::input)?;
        let line = i + 2;
        let s: f64 = rec[si]
            .trim()
            .parse()
            .map_err(|_| Failure::input(anyhow!("{} line {line}: bad score `{}`", path.display(), &rec[si])))?;
        let t = match rec[ti].trim().to_ascii_lowercase().as_str() {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(Failure::input(anyhow!("{} line {line}: bad truth `{other}`", path.display()))),
        };
        scores.push(s);
        truth.push(t);
    }
    Ok((scores, truth))
}

pub fn run(mut cfg: PipelineConfig, args: StudyArgs) -> CmdResult {
    if let Some(f) = &args.format {
        cfg.study.formats = f.clone();
    }
    if let Some(k) = args.threshold {
        cfg.study.preference_threshold = k;
    }
    if let Some(m) = &args.mean_mode {
        cfg.study.mean_mode = parse_flag("mean-mode", m)?;
    }
    let dataset = load(&args.data, &cfg)?;
    let options = SummaryOptions {
        mean_mode: cfg.study.mean_mode,
        variant: cfg.study.ttest,
        comparisons: (!cfg.study.comparisons.is_empty())
            .then(|| cfg.study.comparisons.iter().map(|[a, b]| (a.clone(), b.clone())).collect()),
    };
    let summary = summarize(&dataset, &options).map_err(|e| study_failure(&args.data, e))?;
    let empty = summary.quality.is_empty()
        && summary.agreement.is_empty()
        && summary.preferences.is_empty()
        && summary.style.is_none()
        && summary.reading_time.is_none();
    if empty {
        return Err(Failure::input(anyhow!(
            "{}: nothing to summarize ({})",
            args.data.display(),
            summary.notes.join("; ")
        )));
    }
    let roc = match &args.roc {
        Some(p) => {
            let (scores, truth) = read_roc_input(p)?;
            Some(
                roc_auc(&scores, &truth)
                    .map_err(|e| Failure::input(anyhow::Error::new(e).context(p.display().to_string())))?,
            )
        }
        None => None,
    };

    create_dir(&args.out)?;
    for format in &cfg.study.formats {
        let (name, body) = match format {
            OutputFormat::Json => ("summary.json", summary.to_json()),
            OutputFormat::Csv => ("summary.csv", summary.to_csv()),
            OutputFormat::Markdown => ("summary.md", summary.to_markdown()),
        };
        write_output(&args.out.join(name), body)?;
    }
    if let Some(roc) = roc {
        let mut csv = Vec::new();
        roc.write_csv(&mut csv).map_err(Failure::internal)?;
        write_output(&args.out.join("roc.csv"), csv)?;
        write_output(&args.out.join("roc.svg"), roc.to_svg(&format!("ROC (AUC {:.3})", roc.auc)))?;
    }
    if args.sample_size || args.power {
        let spec = cfg.sample_size.spec();
        let ss = sample_size(&spec, cfg.sample_size.rounding).map_err(Failure::input)?;
        if args.sample_size {
            write_output(&args.out.join("sample_size.json"), to_json_line(&ss))?;
        }
        if args.power {
            let n = n_pairs_for(&cfg, &ss);
            let p = power_simulation(&spec, n, cfg.power.trials, cfg.seed).map_err(Failure::input)?;
            write_output(&args.out.join("power.json"), to_json_line(&p))?;
        }
    }
    cfg.write_snapshot(&args.out).map_err(Failure::internal)?;
    for n in &summary.notes {
        log::info!("{n}");
    }
    println!("summarized {} case(s) from {} rater(s)", summary.n_cases, summary.raters.len());
    Ok(())
}
