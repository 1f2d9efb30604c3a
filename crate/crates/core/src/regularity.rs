//! Exact `(s, eta)`-column/row regularity checking for sign matrices.
//!
//! A matrix is `(s, eta)`-column regular when, for every tuple of `s`
//! distinct columns and every `{-1,+1}` pattern of length `s`, the number
//! of rows matching the pattern on those columns deviates from `m / 2^s`
//! by at most `eta * m / 2^s`. The checker enumerates the full tuple and
//! pattern space, so it is exact; a work cap guards against combinatorial
//! blowup. Column tuples are enumerated unordered: reordering a tuple
//! permutes the patterns with it, so the deviation maximum is unchanged.

use alloc::vec::Vec;

use crate::math::{exp, powf, sqrt};
use crate::rng::Stream;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegularityError {
    #[error("column index out of range or repeated")]
    IndexOutOfRange,
    #[error("cols and pattern lengths differ")]
    LengthMismatch,
    #[error("enumeration work {work} exceeds cap {cap}")]
    CombinatorialBlowup { work: u64, cap: u64 },
    #[error("matrix entries must be -1 or +1 and fill m*n")]
    MalformedMatrix,
}

/// Dense `{-1,+1}` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    m: usize,
    n: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn new(m: usize, n: usize, entries: Vec<i8>) -> Result<Self, RegularityError> {
        if entries.len() != m * n || entries.iter().any(|&x| x != 1 && x != -1) {
            return Err(RegularityError::MalformedMatrix);
        }
        Ok(SignMatrix { m, n, entries })
    }

    pub fn random(m: usize, n: usize, stream: &mut Stream) -> Self {
        SignMatrix {
            m,
            n,
            entries: (0..m * n).map(|_| stream.sign()).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.n + j]
    }

    pub fn transpose(&self) -> SignMatrix {
        let mut entries = Vec::with_capacity(self.m * self.n);
        for j in 0..self.n {
            for i in 0..self.m {
                entries.push(self.get(i, j));
            }
        }
        SignMatrix {
            m: self.n,
            n: self.m,
            entries,
        }
    }
}

/// Number of rows whose restriction to `cols` equals `pattern`. An empty
/// tuple matches every row.
pub fn lambda_count(
    a: &SignMatrix,
    cols: &[usize],
    pattern: &[i8],
) -> Result<u64, RegularityError> {
    if cols.len() != pattern.len() {
        return Err(RegularityError::LengthMismatch);
    }
    for (k, &j) in cols.iter().enumerate() {
        if j >= a.n || cols[..k].contains(&j) {
            return Err(RegularityError::IndexOutOfRange);
        }
    }
    let mut count = 0;
    for i in 0..a.m {
        if cols.iter().zip(pattern).all(|(&j, &x)| a.get(i, j) == x) {
            count += 1;
        }
    }
    Ok(count)
}

/// Worst deviation found by the exhaustive check.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityWitness {
    pub cols: Vec<usize>,
    pub pattern: Vec<i8>,
    pub count: u64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityOutcome {
    pub regular: bool,
    /// Maximizing (cols, pattern, count); absent only for `s = 0`.
    pub witness: Option<RegularityWitness>,
}

/// Default cap on `C(n, s) * 2^s` enumeration cells.
pub const DEFAULT_WORK_CAP: u64 = 1 << 24;

pub fn is_column_regular(
    a: &SignMatrix,
    s: u32,
    eta: f64,
) -> Result<RegularityOutcome, RegularityError> {
    is_column_regular_capped(a, s, eta, DEFAULT_WORK_CAP)
}

pub fn is_column_regular_capped(
    a: &SignMatrix,
    s: u32,
    eta: f64,
    cap: u64,
) -> Result<RegularityOutcome, RegularityError> {
    assert!(eta > 0.0, "eta must be positive");
    let s = s as usize;
    if s > a.n {
        return Err(RegularityError::IndexOutOfRange);
    }
    if s == 0 {
        // Every matrix is (0, eta)-regular by convention.
        return Ok(RegularityOutcome {
            regular: true,
            witness: None,
        });
    }
    let work = binomial(a.n as u64, s as u64).saturating_mul(1 << s);
    if work > cap {
        return Err(RegularityError::CombinatorialBlowup { work, cap });
    }

    let target = a.m as f64 / (1u64 << s) as f64;
    let allowed = eta * target;
    let mut worst: Option<RegularityWitness> = None;

    let mut cols: Vec<usize> = (0..s).collect();
    let mut counts = alloc::vec![0u64; 1 << s];
    loop {
        counts.iter_mut().for_each(|c| *c = 0);
        for i in 0..a.m {
            let mut idx = 0usize;
            for (k, &j) in cols.iter().enumerate() {
                if a.get(i, j) == 1 {
                    idx |= 1 << k;
                }
            }
            counts[idx] += 1;
        }
        for (idx, &count) in counts.iter().enumerate() {
            let deviation = (count as f64 - target).abs();
            if worst.as_ref().is_none_or(|w| deviation > w.deviation) {
                let pattern = (0..s)
                    .map(|k| if idx & (1 << k) != 0 { 1 } else { -1 })
                    .collect();
                worst = Some(RegularityWitness {
                    cols: cols.clone(),
                    pattern,
                    count,
                    deviation,
                });
            }
        }
        if !next_combination(&mut cols, a.n) {
            break;
        }
    }
    let worst = worst.expect("s >= 1 enumerates at least one cell");
    Ok(RegularityOutcome {
        regular: worst.deviation <= allowed,
        witness: Some(worst),
    })
}

pub fn is_row_regular(
    a: &SignMatrix,
    s: u32,
    eta: f64,
) -> Result<RegularityOutcome, RegularityError> {
    is_column_regular(&a.transpose(), s, eta)
}

/// Advance `cols` to the next lexicographic s-combination of `0..n`.
fn next_combination(cols: &mut [usize], n: usize) -> bool {
    let s = cols.len();
    let mut k = s;
    while k > 0 {
        k -= 1;
        if cols[k] < n - (s - k) {
            cols[k] += 1;
            for j in k + 1..s {
                cols[j] = cols[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Analytic lower bound on the probability that a uniform random `m x n`
/// sign matrix is `(s, eta)`-column regular:
/// `1 - 2 (2n)^s exp(-(eta^2 / 3) m / 2^s)`, clamped to `[0, 1]`.
pub fn regularity_prob_bound(m: u64, n: u64, s: u32, eta: f64) -> f64 {
    let raw = 1.0
        - 2.0
            * powf(2.0 * n as f64, s as f64)
            * exp(-(eta * eta / 3.0) * m as f64 / powf(2.0, s as f64));
    raw.clamp(0.0, 1.0)
}

/// Monte Carlo estimate of the regularity probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityEstimate {
    pub trials: u64,
    pub regular: u64,
    pub rate: f64,
    /// Binomial standard error of `rate`.
    pub stderr: f64,
    pub bound: f64,
    /// `rate >= bound - 3 * stderr`.
    pub consistent_with_bound: bool,
}

pub fn estimate_regularity_prob(
    m: usize,
    n: usize,
    s: u32,
    eta: f64,
    trials: u64,
    seed: u64,
) -> Result<RegularityEstimate, RegularityError> {
    assert!(trials >= 1);
    let root = Stream::new(seed);
    let mut regular = 0u64;
    for k in 0..trials {
        let mut sub = root.substream(k);
        let a = SignMatrix::random(m, n, &mut sub);
        if is_column_regular(&a, s, eta)?.regular {
            regular += 1;
        }
    }
    let rate = regular as f64 / trials as f64;
    let stderr = sqrt(rate * (1.0 - rate) / trials as f64);
    let bound = regularity_prob_bound(m as u64, n as u64, s, eta);
    Ok(RegularityEstimate {
        trials,
        regular,
        rate,
        stderr,
        bound,
        consistent_with_bound: rate >= bound - 3.0 * stderr,
    })
}
