//! Excursion decomposition of nonnegative paths and the Lambda_t probability
//! estimates for the iteration inequality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{besq_pathwise, BesqOrientation, PathSign, RealPath};
use crate::driver::{mix_seed, BrownianPath, TimeGrid};
use crate::{Error, Result};

/// Default discrete zero set threshold, in BESQ units.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-4;

/// One maximal positive excursion; `complete` is false when cut by the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcursionRecord {
    pub start_idx: usize,
    pub end_idx: usize,
    pub duration: f64,
    pub max_height: f64,
    pub complete: bool,
}

/// Maximal index intervals on which the path exceeds `zero_threshold`,
/// bracketed by sub-threshold values or the horizon.
pub fn decompose(path: &RealPath, zero_threshold: f64) -> Result<Vec<ExcursionRecord>> {
    if path.sign() != PathSign::NonNegative {
        return Err(Error::NotNonNegative);
    }
    let v = path.values();
    let dt = path.grid().dt();
    let n = v.len() - 1;
    let mut records = Vec::new();
    let mut k = 0;
    while k <= n {
        if v[k] > zero_threshold {
            // start of a run; the excursion starts at the bracketing index
            let start_idx = k.saturating_sub(usize::from(k > 0));
            let mut j = k;
            let mut max_height = v[k];
            while j < n && v[j + 1] > zero_threshold {
                j += 1;
                max_height = max_height.max(v[j]);
            }
            let complete = j < n; // v[j+1] <= threshold brackets the run
            let end_idx = if complete { j + 1 } else { n };
            records.push(ExcursionRecord {
                start_idx,
                end_idx,
                duration: (end_idx - start_idx) as f64 * dt,
                max_height,
                complete,
            });
            k = j + 1;
        } else {
            k += 1;
        }
    }
    Ok(records)
}

/// Records with duration >= m, order preserved.
pub fn filter_macroscopic(records: &[ExcursionRecord], m: f64) -> Result<Vec<ExcursionRecord>> {
    if !(m > 0.0) {
        return Err(Error::NonPositive { name: "m", value: m });
    }
    Ok(records.iter().filter(|r| r.duration >= m).copied().collect())
}

/// Start times of m-macroscopic excursions; seeds the hull experiment restarts.
pub fn macroscopic_start_times(path: &RealPath, m: f64, zero_threshold: f64) -> Result<Vec<f64>> {
    let grid = path.grid();
    Ok(filter_macroscopic(&decompose(path, zero_threshold)?, m)?
        .iter()
        .map(|r| grid.time(r.start_idx))
        .collect())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub t: f64,
    pub m: f64,
    pub p_hat: f64,
    pub n: usize,
    pub se: f64,
}

/// P(Lambda_t): all complete excursions with right endpoint before t have
/// length <= m, estimated over n independent reflecting BESQ paths from 0.
pub fn estimate_lambda(
    t: f64,
    m: f64,
    delta: f64,
    n: usize,
    seed: u64,
    dt: f64,
    zero_threshold: f64,
) -> Result<LambdaEstimate> {
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::InvalidDimension(delta));
    }
    if n < 100 {
        return Err(Error::Underpowered { min: 100, got: n });
    }
    let n_steps = (t / dt).round().max(1.0) as usize;
    let grid = TimeGrid::new(t, n_steps)?;
    let hits: usize = (0..n)
        .into_par_iter()
        .map(|i| {
            let b = BrownianPath::sample(mix_seed(seed, 0x4C41_4D42, i as u64), grid);
            let z = besq_pathwise(0.0, delta, &b, BesqOrientation::Upper);
            let recs = decompose(&z, zero_threshold).expect("nonnegative");
            let ok = recs
                .iter()
                .filter(|r| r.complete && r.end_idx < n_steps)
                .all(|r| r.duration <= m);
            usize::from(ok)
        })
        .sum();
    let p_hat = hits as f64 / n as f64;
    Ok(LambdaEstimate { t, m, p_hat, n, se: (p_hat * (1.0 - p_hat) / n as f64).sqrt() })
}
