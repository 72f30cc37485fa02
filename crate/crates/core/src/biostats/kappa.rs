use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KappaError {
    #[error("no ratings supplied")]
    EmptyInput,
    #[error("rater lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("contingency table must be square and non-empty")]
    BadTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgreementResult {
    pub kappa: f64,
    pub p_o: f64,
    pub p_e: f64,
    pub n: usize,
}

fn from_counts(agree: u64, marginal_products: u128, n: u64) -> AgreementResult {
    let nf = n as f64;
    let p_o = agree as f64 / nf;
    let p_e = marginal_products as f64 / (nf * nf);
    let kappa = if marginal_products == (n as u128) * (n as u128) {
        // every rating in one shared category
        if agree == n {
            1.0
        } else {
            0.0
        }
    } else {
        ((p_o - p_e) / (1.0 - p_e)).clamp(-1.0, 1.0)
    };
    AgreementResult { kappa, p_o, p_e, n: n as usize }
}

/// Cohen's kappa for two aligned rating lists over any category type.
pub fn cohens_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<AgreementResult, KappaError> {
    if a.len() != b.len() {
        return Err(KappaError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(KappaError::EmptyInput);
    }
    let mut ma: HashMap<&T, u64> = HashMap::new();
    let mut mb: HashMap<&T, u64> = HashMap::new();
    let mut agree = 0u64;
    for (x, y) in a.iter().zip(b) {
        *ma.entry(x).or_default() += 1;
        *mb.entry(y).or_default() += 1;
        agree += u64::from(x == y);
    }
    // integer marginal products keep p_e independent of hash order
    let products: u128 = ma.iter().map(|(c, &na)| na as u128 * mb.get(c).copied().unwrap_or(0) as u128).sum();
    Ok(from_counts(agree, products, a.len() as u64))
}

/// Kappa from a square contingency table; `table[i][j]` counts rater A
/// choosing `i` and rater B choosing `j`.
pub fn cohens_kappa_from_table(table: &[Vec<u64>]) -> Result<AgreementResult, KappaError> {
    let k = table.len();
    if k == 0 || table.iter().any(|r| r.len() != k) {
        return Err(KappaError::BadTable);
    }
    let n: u64 = table.iter().flatten().sum();
    if n == 0 {
        return Err(KappaError::EmptyInput);
    }
    let agree: u64 = (0..k).map(|i| table[i][i]).sum();
    let products: u128 = (0..k)
        .map(|i| {
            let row: u64 = table[i].iter().sum();
            let col: u64 = table.iter().map(|r| r[i]).sum();
            row as u128 * col as u128
        })
        .sum();
    Ok(from_counts(agree, products, n))
}
