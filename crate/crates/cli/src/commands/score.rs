use std::path::Path;

use cxreval::catalog::{BinaryLabels, UncertainPolicy};
use cxreval::labels_io::{read_label_csv, LabelFileError};
use cxreval::scoring::{read_annotations, read_report_pairs, score_corpus, ScoringInput, ScoringInputError};

use super::{create_dir, open_input, parse_flag, write_output};
use crate::config::PipelineConfig;
use crate::failure::{self, CmdResult, Failure};
use crate::ScoreArgs;

fn input_failure(path: &Path, e: ScoringInputError) -> Failure {
    match e {
        ScoringInputError::Rows(d) => failure::rows(&path.display().to_string(), &d),
        other => Failure::input(anyhow::Error::new(other).context(path.display().to_string())),
    }
}

fn labels(path: &Path, policy: UncertainPolicy) -> Result<Vec<(String, BinaryLabels)>, Failure> {
    let rows = read_label_csv(open_input(path)?).map_err(|e| match e {
        LabelFileError::Rows(d) => failure::rows(&path.display().to_string(), &d),
        other => Failure::input(anyhow::Error::new(other).context(path.display().to_string())),
    })?;
    Ok(rows.into_iter().map(|(id, v)| (id, v.project_binary(policy))).collect())
}

pub fn run(mut cfg: PipelineConfig, args: ScoreArgs) -> CmdResult {
    if let Some(b) = &args.bleu {
        cfg.score.bleu_aggregation = parse_flag("bleu", b)?;
    }
    let pairs = read_report_pairs(open_input(&args.pairs)?).map_err(|e| input_failure(&args.pairs, e))?;
    let label_pair = match (&args.pred_labels, &args.gold_labels) {
        (Some(p), Some(g)) => Some((labels(p, cfg.score.policy)?, labels(g, cfg.score.policy)?)),
        _ => None,
    };
    let graphs = match (&args.hyp_graphs, &args.ref_graphs) {
        (Some(h), Some(r)) => Some((
            read_annotations(open_input(h)?).map_err(|e| input_failure(h, e))?,
            read_annotations(open_input(r)?).map_err(|e| input_failure(r, e))?,
        )),
        _ => None,
    };
    let input = ScoringInput { pairs, labels: label_pair, graphs };
    let report = score_corpus(&input, &cfg.score.scoring()).map_err(Failure::input)?;

    create_dir(&args.out)?;
    let mut json = report.to_json();
    json.push('\n');
    write_output(&args.out.join("metrics.json"), json)?;
    let mut csv = Vec::new();
    report.write_csv_row(&mut csv).map_err(Failure::internal)?;
    write_output(&args.out.join("metrics.csv"), csv)?;
    cfg.write_snapshot(&args.out).map_err(Failure::internal)?;
    println!("scored {} case(s); wrote {}", report.n_cases, args.out.join("metrics.json").display());
    Ok(())
}
