use std::fmt::Write as _;
use std::io::{self, Write};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RocError {
    #[error("need at least one positive and one negative case")]
    SingleClass,
    #[error("{0} scores but {1} truth values")]
    LengthMismatch(usize, usize),
    #[error("score at index {0} is not finite")]
    NonFinite(usize),
}

/// One operating point. `threshold` is the minimum score called positive;
/// the first point uses +∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub auc: f64,
    pub positives: usize,
    pub negatives: usize,
    pub points: Vec<RocPoint>,
}

/// Sweeps every distinct score as a threshold (descending) and integrates
/// with the trapezoid rule.
pub fn roc_auc(scores: &[f64], truth: &[bool]) -> Result<RocCurve, RocError> {
    if scores.len() != truth.len() {
        return Err(RocError::LengthMismatch(scores.len(), truth.len()));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(RocError::NonFinite(i));
    }
    let positives = truth.iter().filter(|&&t| t).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(RocError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (pf, nf) = (positives as f64, negatives as f64);
    let mut points = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc2 = 0.0; // twice the area in count units
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == threshold {
            if truth[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        auc2 += ((fp - fp0) * (tp + tp0)) as f64;
        points.push(RocPoint { threshold, fpr: fp as f64 / nf, tpr: tp as f64 / pf });
    }
    Ok(RocCurve { auc: auc2 / (2.0 * pf * nf), positives, negatives, points })
}

impl RocCurve {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "threshold,fpr,tpr")?;
        for p in &self.points {
            let t = if p.threshold.is_infinite() { "inf".to_string() } else { p.threshold.to_string() };
            writeln!(out, "{t},{},{}", p.fpr, p.tpr)?;
        }
        Ok(())
    }

    /// A minimal standalone SVG: unit square, chance diagonal, curve.
    pub fn to_svg(&self, title: &str) -> String {
        const SIZE: f64 = 400.0;
        const PAD: f64 = 40.0;
        let x = |v: f64| PAD + v * SIZE;
        let y = |v: f64| PAD + (1.0 - v) * SIZE;
        let mut poly = String::new();
        for p in &self.points {
            let _ = write!(poly, "{:.2},{:.2} ", x(p.fpr), y(p.tpr));
        }
        let total = SIZE + 2.0 * PAD;
        let title = title.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        format!(
            concat!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{t}\" height=\"{t}\" viewBox=\"0 0 {t} {t}\">\n",
                "<rect x=\"{p}\" y=\"{p}\" width=\"{s}\" height=\"{s}\" fill=\"none\" stroke=\"black\"/>\n",
                "<line x1=\"{p}\" y1=\"{e}\" x2=\"{e}\" y2=\"{p}\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n",
                "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"{poly}\"/>\n",
                "<text x=\"{p}\" y=\"{ty}\" font-size=\"14\">{title} (AUC = {auc:.3})</text>\n",
                "<text x=\"{cx}\" y=\"{by}\" font-size=\"12\" text-anchor=\"middle\">False positive rate</text>\n",
                "<text x=\"12\" y=\"{cx}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 12 {cx})\">True positive rate</text>\n",
                "</svg>\n"
            ),
            t = total,
            p = PAD,
            s = SIZE,
            e = PAD + SIZE,
            poly = poly.trim_end(),
            ty = PAD - 12.0,
            title = title,
            auc = self.auc,
            cx = total / 2.0,
            by = total - 8.0,
        )
    }
}
