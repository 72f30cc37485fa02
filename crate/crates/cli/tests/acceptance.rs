//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the report is always printed.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use cxreval::biostats::{
    cohens_kappa_from_table, kendalls_w, power_simulation, roc_auc, sample_size, ConcordanceBand, Rounding,
    SampleSizeSpec,
};
use cxreval::ingest::split::{split_assignments, SplitAssignment};
use cxreval::ingest::{preprocess_image, ImageSpec};
use cxreval::llm_labeler::{
    parse_labeler_bytes, read_checkpoint_entries, run_label_job, write_results_csv, JobConfig, JobError, JobRow,
    LabelService, LabelerRequest, ScriptedService, ServiceError, StubRule,
};
use cxreval::scoring::{bleu, label_f1, rouge_l, rouge_l_corpus, BleuAggregation, DEFAULT_EPSILON};
use cxreval::study::{read_study_csv, summarize, MeanMode, SummaryOptions};
use cxreval::{BinaryLabels, Finding, NUM_FINDINGS};
use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Files = Vec<(String, Vec<u8>)>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// 1
fn sample_size_design() -> Check {
    let start = Instant::now();
    let spec = SampleSizeSpec { delta: 0.207, sigma_diff: 0.872, alpha: 0.05, power: 0.90, dropout_rate: 0.30 };
    let ceil10 = sample_size(&spec, Rounding::CeilTo10).map_err(|e| e.to_string())?;
    let exact = sample_size(&spec, Rounding::ExactCeil).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let got = (ceil10.n_base, ceil10.n_enrolled, exact.n_enrolled);
    ensure(got == (187, 270, 268), || format!("got {got:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("n_base 187, enrolled 270 / 268 in {elapsed:.2?}"))
}

/// Standard normal CDF by composite Simpson integration of the density.
fn phi(x: f64) -> f64 {
    let (a, steps) = (-12.0, 200_000);
    let h = (x - a) / steps as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut sum = pdf(a) + pdf(x);
    for i in 1..steps {
        sum += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

// 2
fn power_check() -> Check {
    let spec = SampleSizeSpec::default();
    let start = Instant::now();
    let r = power_simulation(&spec, 187, 10_000, 42).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    const Z_975: f64 = 1.959_963_984_540_054;
    let oracle = phi(spec.delta * 187f64.sqrt() / spec.sigma_diff - Z_975);
    ensure(close(oracle, 0.901, 0.001), || format!("oracle {oracle}"))?;
    ensure(close(r.power, oracle, 0.02), || format!("power {} vs oracle {oracle}", r.power))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("power {:.4} vs oracle {oracle:.4} in {elapsed:.2?}", r.power))
}

fn random_tokens(rng: &mut ChaCha8Rng) -> Vec<String> {
    const VOCAB: [&str; 4] = ["a", "b", "c", "d"];
    let len = rng.random_range(1..=6);
    (0..len).map(|_| VOCAB[rng.random_range(0..VOCAB.len())].to_string()).collect()
}

fn ngrams(tokens: &[String], n: usize) -> Vec<&[String]> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| &tokens[i..i + n]).collect()
}

/// Corpus BLEU from first principles: clipped counts by linear scan.
fn bleu_oracle(cands: &[Vec<String>], refs: &[Vec<String>], max_n: usize) -> f64 {
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let (mut matched, mut total) = (0u64, 0u64);
        for (c, r) in cands.iter().zip(refs) {
            let cg = ngrams(c, n);
            let rg = ngrams(r, n);
            total += cg.len() as u64;
            let distinct: BTreeSet<&[String]> = cg.iter().copied().collect();
            for g in distinct {
                let in_c = cg.iter().filter(|x| **x == g).count();
                let in_r = rg.iter().filter(|x| **x == g).count();
                matched += in_c.min(in_r) as u64;
            }
        }
        let m = if matched == 0 { DEFAULT_EPSILON } else { matched as f64 };
        log_sum += (m / total.max(1) as f64).ln();
    }
    let c: usize = cands.iter().map(Vec::len).sum();
    let r: usize = refs.iter().map(Vec::len).sum();
    let bp = if c >= r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    (100.0 * bp * (log_sum / max_n as f64).exp()).clamp(0.0, 100.0)
}

fn lcs_recursive(a: &[String], b: &[String]) -> usize {
    match (a.split_first(), b.split_first()) {
        (Some((x, ra)), Some((y, rb))) => {
            if x == y {
                1 + lcs_recursive(ra, rb)
            } else {
                lcs_recursive(ra, b).max(lcs_recursive(a, rb))
            }
        }
        _ => 0,
    }
}

fn rouge_oracle(c: &[String], r: &[String]) -> f64 {
    let l = lcs_recursive(c, r) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let (p, rec) = (l / c.len() as f64, l / r.len() as f64);
    100.0 * 2.0 * p * rec / (p + rec)
}

fn random_labels(rng: &mut ChaCha8Rng, p: f64) -> BinaryLabels {
    let mut bits = [false; NUM_FINDINGS];
    for b in &mut bits {
        *b = rng.random_bool(p);
    }
    BinaryLabels::new(bits)
}

/// F1 on 0–100 from explicit per-cell enumeration.
fn f1_oracle(pred: &[BinaryLabels], gold: &[BinaryLabels], subset: &[Finding]) -> (f64, f64) {
    let f1 = |tp: u64, fp: u64, fn_: u64| {
        if tp + fp + fn_ == 0 {
            0.0
        } else {
            200.0 * tp as f64 / (2 * tp + fp + fn_) as f64
        }
    };
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let mut macro_sum = 0.0;
    for &f in subset {
        let (mut t, mut p, mut n) = (0, 0, 0);
        for i in 0..pred.len() {
            match (pred[i].get(f), gold[i].get(f)) {
                (true, true) => t += 1,
                (true, false) => p += 1,
                (false, true) => n += 1,
                _ => {}
            }
        }
        macro_sum += f1(t, p, n);
        tp += t;
        fp += p;
        fn_ += n;
    }
    (f1(tp, fp, fn_), macro_sum / subset.len() as f64)
}

// 3
fn metric_oracles() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let subset_5 =
        [Finding::Atelectasis, Finding::Cardiomegaly, Finding::Consolidation, Finding::Edema, Finding::PleuralEffusion];
    let mut worst = 0.0f64;
    for corpus in 0..1000 {
        let n = rng.random_range(1..=5);
        let cands: Vec<Vec<String>> = (0..n).map(|_| random_tokens(&mut rng)).collect();
        let refs: Vec<Vec<String>> = (0..n).map(|_| random_tokens(&mut rng)).collect();
        for max_n in [1, 4] {
            let got =
                bleu(&cands, &refs, max_n, BleuAggregation::Corpus, DEFAULT_EPSILON).map_err(|e| e.to_string())?;
            let want = bleu_oracle(&cands, &refs, max_n);
            worst = worst.max((got - want).abs());
            ensure(close(got, want, 1e-12), || format!("corpus {corpus} BLEU-{max_n}: {got} vs {want}"))?;
        }
        for (c, r) in cands.iter().zip(&refs) {
            let (got, want) = (rouge_l(c, r), rouge_oracle(c, r));
            ensure(close(got, want, 1e-12), || format!("corpus {corpus} ROUGE-L: {got} vs {want}"))?;
        }
        let mean = refs.iter().zip(&cands).map(|(r, c)| rouge_oracle(c, r)).sum::<f64>() / n as f64;
        let got = rouge_l_corpus(&cands, &refs);
        worst = worst.max((got - mean).abs());
        ensure(close(got, mean, 1e-12), || format!("corpus {corpus} ROUGE-L mean: {got} vs {mean}"))?;

        let rows = rng.random_range(1..=8);
        let pred: Vec<BinaryLabels> = (0..rows).map(|_| random_labels(&mut rng, 0.3)).collect();
        let gold: Vec<BinaryLabels> = (0..rows).map(|_| random_labels(&mut rng, 0.3)).collect();
        for subset in [&Finding::ALL[..], &subset_5[..]] {
            let got = label_f1(&pred, &gold, subset).map_err(|e| e.to_string())?;
            let (micro, macro_) = f1_oracle(&pred, &gold, subset);
            ensure(got.micro == micro && got.macro_ == macro_, || {
                format!("corpus {corpus} F1: ({}, {}) vs ({micro}, {macro_})", got.micro, got.macro_)
            })?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 corpora, max text-metric deviation {worst:.1e}, in {elapsed:.2?}"))
}

// 4
fn auc_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut done = 0;
    while done < 1000 {
        let n = rng.random_range(2..=50);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..10) as f64 / 10.0).collect();
        let truth: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let pos: Vec<f64> = scores.iter().zip(&truth).filter(|(_, t)| **t).map(|(s, _)| *s).collect();
        let neg: Vec<f64> = scores.iter().zip(&truth).filter(|(_, t)| !**t).map(|(s, _)| *s).collect();
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let mut wins = 0.0;
        for p in &pos {
            for q in &neg {
                wins += if p > q {
                    1.0
                } else if p == q {
                    0.5
                } else {
                    0.0
                };
            }
        }
        let want = wins / (pos.len() * neg.len()) as f64;
        let got = roc_auc(&scores, &truth).map_err(|e| e.to_string())?.auc;
        ensure(close(got, want, 1e-9), || format!("instance {done}: {got} vs {want}"))?;
        done += 1;
    }
    Ok("1000 tied instances agree with pair counting".into())
}

// 5
fn kappa_and_w() -> Check {
    let k = cohens_kappa_from_table(&[vec![20, 5], vec![10, 15]]).map_err(|e| e.to_string())?;
    ensure(close(k.p_o, 0.7, 1e-12) && close(k.p_e, 0.5, 1e-12) && close(k.kappa, 0.4, 1e-12), || format!("{k:?}"))?;
    let w = kendalls_w(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]]).map_err(|e| e.to_string())?;
    ensure(w.s == 2.0 && close(w.w, 1.0 / 9.0, 1e-12) && w.band == ConcordanceBand::Poor, || format!("{w:?}"))?;
    use ConcordanceBand::*;
    let cases = [
        (0.1999999, Poor),
        (0.2, Fair),
        (0.3999999, Fair),
        (0.4, Moderate),
        (0.5999999, Moderate),
        (0.6, Strong),
        (0.626, Strong),
        (0.7999999, Strong),
        (0.8, Super),
        (1.0, Super),
    ];
    for (w, band) in cases {
        ensure(ConcordanceBand::of(w) == band, || format!("W={w} banded {:?}", ConcordanceBand::of(w)))?;
    }
    Ok("kappa 0.4, W 1/9 poor, bands closed below at 0.2/0.4/0.6/0.8".into())
}

// 6
fn macro_zero_support() -> Check {
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    for i in 0..4 {
        let mut p = BinaryLabels::from_findings(&[Finding::Cardiomegaly, Finding::PleuralEffusion]);
        p.set(Finding::Atelectasis, i % 2 == 0);
        pred.push(p);
        gold.push(BinaryLabels::from_findings(&[Finding::Cardiomegaly, Finding::Atelectasis]));
    }
    let subset = [Finding::Cardiomegaly, Finding::Atelectasis, Finding::PleuralEffusion, Finding::Edema];
    let r = label_f1(&pred, &gold, &subset).map_err(|e| e.to_string())?;
    let edema = r.per_label.iter().find(|(f, _)| *f == Finding::Edema).map(|(_, v)| *v);
    ensure(edema == Some(0.0), || format!("edema F1 {edema:?}"))?;
    // cardiomegaly 100, atelectasis 2/3, effusion 0, edema 0
    let want = (100.0 + 200.0 / 3.0) / 4.0;
    ensure(close(r.macro_, want, 1e-12), || format!("macro {} vs {want}", r.macro_))?;
    Ok(format!("edema F1 0 counted, macro {:.2}", r.macro_))
}

// 7
fn preprocessing() -> Check {
    let spec = ImageSpec::default();
    let colour = Rgb([200, 30, 60]);
    for (w, h, pad_rows, pad_cols) in [(1000, 500, 96, 0), (500, 1000, 0, 96), (384, 384, 0, 0), (37, 11, 0, 0)] {
        let out = preprocess_image(&RgbImage::from_pixel(w, h, colour), &spec).map_err(|e| e.to_string())?;
        ensure(out.dimensions() == (384, 384), || format!("{w}x{h} gave {:?}", out.dimensions()))?;
        for (x, y, px) in out.enumerate_pixels() {
            let in_pad = if pad_rows > 0 {
                y < pad_rows || y >= 384 - pad_rows
            } else if pad_cols > 0 {
                x < pad_cols || x >= 384 - pad_cols
            } else {
                false
            };
            if in_pad {
                ensure(*px == Rgb([127, 127, 127]), || format!("{w}x{h}: pad pixel ({x},{y}) = {px:?}"))?;
            } else if (w, h) != (37, 11) {
                ensure(*px == colour, || format!("{w}x{h}: content pixel ({x},{y}) = {px:?}"))?;
            }
        }
    }
    let split = split_assignments(6584, 0.8, 42).map_err(|e| e.to_string())?;
    let finetune = split.iter().filter(|a| **a == SplitAssignment::Finetune).count();
    ensure((finetune, split.len() - finetune) == (5267, 1317), || {
        format!("split {finetune}/{}", split.len() - finetune)
    })?;
    Ok("pixel-exact 384x384 letterbox, 96-row pads, 5267/1317 split".into())
}

/// Raises the cancel flag after `limit` calls, as if the process died.
struct KillAfter {
    inner: ScriptedService,
    calls: AtomicUsize,
    limit: usize,
    flag: Arc<AtomicBool>,
}

impl LabelService for KillAfter {
    fn complete(&self, request: &LabelerRequest) -> Result<String, ServiceError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) + 1 >= self.limit {
            self.flag.store(true, Ordering::SeqCst);
        }
        self.inner.complete(request)
    }
}

fn job_rows(n: usize) -> Vec<JobRow> {
    let texts = [
        "FINDINGS: Small left pleural effusion. IMPRESSION: Mild cardiomegaly.",
        "IMPRESSION: No acute process.",
        "FINDINGS: Possible consolidation at the right base. ET tube in place.",
        "FINDINGS: Pneumothorax is not seen. Fracture of the left sixth rib.",
    ];
    (0..n).map(|i| JobRow { case_id: format!("job{i:03}"), report_text: format!("{} [{i}]", texts[i % 4]) }).collect()
}

fn job_config(dir: &Path, concurrency: usize) -> JobConfig {
    let mut cfg = JobConfig::new(dir.join("checkpoint.jsonl"), dir.join("quarantine.jsonl"));
    cfg.concurrency = concurrency;
    cfg.backoff_base = Duration::ZERO;
    cfg
}

fn checkpoint_rows(cfg: &JobConfig) -> Result<BTreeSet<String>, String> {
    let entries = read_checkpoint_entries(&cfg.checkpoint).map_err(|e| e.to_string())?;
    let ids: BTreeSet<&str> = entries.iter().map(|e| e.case_id.as_str()).collect();
    ensure(ids.len() == entries.len(), || "duplicate case ids in checkpoint".into())?;
    Ok(entries.iter().map(|e| serde_json::to_string(e).unwrap()).collect())
}

// 8
fn labeler_robustness() -> Check {
    let input = job_rows(30);
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let malformed = || {
        ScriptedService::new(vec![StubRule {
            contains: "[7]".into(),
            response: Some("{\"Edema\": ".into()),
            fail_times: 0,
            status: 503,
            always_fail: false,
        }])
    };
    let full_dir = tmp.path().join("full");
    std::fs::create_dir(&full_dir).unwrap();
    let cfg = job_config(&full_dir, 4);
    let reference = run_label_job(&input, &malformed(), &cfg, None).map_err(|e| e.to_string())?;
    let reference_rows = checkpoint_rows(&cfg)?;
    ensure(reference.quarantined.len() == 1 && reference.quarantined[0].case_id == "job007", || {
        format!("quarantine {:?}", reference.quarantined)
    })?;
    let qtext = std::fs::read_to_string(&cfg.quarantine).map_err(|e| e.to_string())?;
    ensure(qtext.contains("job007"), || "malformed row missing from quarantine file".into())?;
    let mut reference_csv = Vec::new();
    write_results_csv(&mut reference_csv, &reference).unwrap();

    for (k, concurrency) in [(1, 1), (6, 2), (13, 5), (29, 8)] {
        let dir = tmp.path().join(format!("kill{k}"));
        std::fs::create_dir(&dir).unwrap();
        let cfg = job_config(&dir, concurrency);
        let flag = Arc::new(AtomicBool::new(false));
        let killer = KillAfter { inner: malformed(), calls: AtomicUsize::new(0), limit: k, flag: flag.clone() };
        match run_label_job(&input, &killer, &cfg, Some(&flag)) {
            Err(JobError::Cancelled { .. }) => {}
            other => return Err(format!("k={k}: expected cancellation, got {other:?}")),
        }
        let mut f = std::fs::OpenOptions::new().append(true).open(&cfg.checkpoint).unwrap();
        std::io::Write::write_all(&mut f, b"{\"case_id\":\"job0").unwrap();
        drop(f);
        let resumed = run_label_job(&input, &malformed(), &cfg, None).map_err(|e| e.to_string())?;
        ensure(checkpoint_rows(&cfg)? == reference_rows, || format!("k={k}: checkpoint rows differ"))?;
        let mut csv = Vec::new();
        write_results_csv(&mut csv, &resumed).unwrap();
        ensure(csv == reference_csv, || format!("k={k}: labels differ after resume"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let seeds: [&[u8]; 3] = [b"{\"Edema\": 1, \"Fracture\": 0}", b"```json\n{\"No Finding\": 1}\n```", b"[1,2,{}]"];
    let mut fuzzed = 0;
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        for i in 0..100_000 {
            let bytes: Vec<u8> = if i % 2 == 0 {
                let len = rng.random_range(0..64);
                (0..len).map(|_| rng.random()).collect()
            } else {
                let mut b = seeds[i % 3].to_vec();
                for _ in 0..rng.random_range(1..4) {
                    let at = rng.random_range(0..b.len());
                    b[at] = rng.random();
                }
                b
            };
            let _ = parse_labeler_bytes(&bytes);
            fuzzed += 1;
        }
    }));
    ensure(outcome.is_ok(), || format!("parser panicked after {fuzzed} inputs"))?;
    Ok(format!("resume equivalence at 4 kill points, malformed row quarantined, {fuzzed} fuzz inputs"))
}

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn output_files(dir: &Path) -> Files {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().is_some_and(|n| n != "resolved_config.toml"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

// 9
fn end_to_end_determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let f = |name: &str| fixture(&format!("tests/fixtures/{name}")).to_string_lossy().into_owned();
    let study = fixture("../core/tests/fixtures/prospective_study.csv").to_string_lossy().into_owned();
    let mut seen: Vec<(&str, Files, Files)> = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "1"), ("c", "8"), ("d", "8")] {
        let score_out = tmp.path().join(format!("score-{run}"));
        let study_out = tmp.path().join(format!("study-{run}"));
        let runs: [Vec<String>; 2] = [
            vec![
                "--config".into(),
                f("toy_score.toml"),
                "--threads".into(),
                threads.into(),
                "score".into(),
                "--pairs".into(),
                f("toy_pairs.csv"),
                "--pred-labels".into(),
                f("toy_pred_labels.csv"),
                "--gold-labels".into(),
                f("toy_gold_labels.csv"),
                "--hyp-graphs".into(),
                f("toy_hyp_graphs.jsonl"),
                "--ref-graphs".into(),
                f("toy_ref_graphs.jsonl"),
                "--out".into(),
                score_out.to_string_lossy().into(),
            ],
            vec![
                "--threads".into(),
                threads.into(),
                "study".into(),
                "--data".into(),
                study.clone(),
                "--out".into(),
                study_out.to_string_lossy().into(),
            ],
        ];
        for args in &runs {
            let out = Command::new(env!("CARGO_BIN_EXE_cxreval")).args(args).output().map_err(|e| e.to_string())?;
            ensure(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))?;
        }
        seen.push((threads, output_files(&score_out), output_files(&study_out)));
    }
    let (_, score0, study0) = &seen[0];
    ensure(score0.len() == 2 && study0.len() == 3, || "unexpected output file set".into())?;
    for (threads, score, study) in &seen[1..] {
        ensure(score == score0, || format!("score output differs at --threads {threads}"))?;
        ensure(study == study0, || format!("study output differs at --threads {threads}"))?;
    }
    Ok("score and study outputs byte-identical over 2 runs each at 1 and 8 threads".into())
}

// 10
fn table_rendering() -> Check {
    let text =
        std::fs::read_to_string(fixture("../core/tests/fixtures/prospective_study.csv")).map_err(|e| e.to_string())?;
    let ds = read_study_csv(text.as_bytes(), None, 3).map_err(|e| e.to_string())?;
    let summary = summarize(&ds, &SummaryOptions { mean_mode: MeanMode::Pooled, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let markdown = summary.to_markdown();
    let mut checked = 0;
    for (field, rows) in [("likert", &summary.quality), ("radpeer", &summary.agreement)] {
        let mut cells = Vec::new();
        for row in rows.iter() {
            // spreadsheet-style: filter raw lines, then mean and n-1 SD by hand
            let xs: Vec<f64> = text
                .lines()
                .skip(1)
                .map(|l| l.split(',').collect::<Vec<_>>())
                .filter(|c| c[3] == field && c[2] == row.condition)
                .map(|c| c[4].parse().unwrap())
                .collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let got_sd = row.sd.ok_or("missing SD")?;
            ensure(close(row.mean, mean, 1e-9) && close(got_sd, sd, 1e-9), || {
                format!("{field}/{}: {}±{got_sd} vs {mean}±{sd}", row.condition, row.mean)
            })?;
            cells.push(format!("{mean:.2}±{sd:.2}"));
            checked += 1;
        }
        let label = if field == "likert" { "Report Quality Score" } else { "Agreement Score" };
        let line = format!("| {label} | Score | {} |", cells.join(" | "));
        ensure(markdown.contains(&line), || format!("markdown lacks `{line}`"))?;
    }
    Ok(format!("{checked} mean±SD cells match recomputation and render to 2 decimals"))
}

fn main() {
    let checks: [Criterion; 10] = [
        ("sample size", sample_size_design),
        ("power simulation", power_check),
        ("text and label metric oracles", metric_oracles),
        ("ROC AUC", auc_oracle),
        ("kappa and Kendall's W", kappa_and_w),
        ("macro-F1 zero support", macro_zero_support),
        ("image and split preprocessing", preprocessing),
        ("labeler fault injection", labeler_robustness),
        ("end-to-end determinism", end_to_end_determinism),
        ("study table rendering", table_rendering),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let result = catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
