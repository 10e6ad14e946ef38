//! Retained posterior draws and their summaries.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linear_sampler::SamplerSettings;

/// Default credible level for HPD intervals.
pub const HPD_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Linear,
    Gam,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Gam => "gam",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrawsMeta {
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub tau: f64,
    pub model: ModelKind,
    pub fixed_alpha: Option<f64>,
}

/// Proposal bookkeeping for one Metropolis block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BlockAcceptance {
    pub accepted: u64,
    pub proposed: u64,
}

impl BlockAcceptance {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub names: Vec<String>,
    /// One row per retained iteration, one column per parameter.
    pub draws: DMatrix<f64>,
    /// Log-likelihood at each retained iteration.
    pub log_likelihood: Vec<f64>,
    /// Per-block counts over the whole run, in update order.
    pub acceptance: Vec<(String, BlockAcceptance)>,
    pub meta: DrawsMeta,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.draws.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.nrows() == 0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        self.index_of(name)
            .map(|j| self.draws.column(j).iter().copied().collect())
    }

    /// Posterior mean of every parameter.
    pub fn means(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.draws.column_iter().map(|c| c.sum() / n).collect()
    }

    pub fn mean_of(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|j| self.draws.column(j).mean())
    }
}

/// Incremental construction of [`PosteriorDraws`] inside a sampler loop.
#[derive(Debug)]
pub(crate) struct DrawsBuilder {
    names: Vec<String>,
    rows: Vec<f64>,
    log_likelihood: Vec<f64>,
    acceptance: Vec<(String, BlockAcceptance)>,
    meta: DrawsMeta,
}

impl DrawsBuilder {
    pub(crate) fn new(names: Vec<String>, settings: &SamplerSettings, tau: f64, model: ModelKind) -> Self {
        let retained = settings.retained();
        Self {
            rows: Vec::with_capacity(retained * names.len()),
            log_likelihood: Vec::with_capacity(retained),
            names,
            acceptance: Vec::new(),
            meta: DrawsMeta {
                iterations: settings.iterations,
                burn_in: settings.burn_in,
                seed: settings.seed,
                tau,
                model,
                fixed_alpha: settings.fixed_alpha,
            },
        }
    }

    pub(crate) fn count(&mut self, block: &str, accepted: bool) {
        let entry = match self.acceptance.iter_mut().position(|(b, _)| b == block) {
            Some(i) => &mut self.acceptance[i].1,
            None => {
                self.acceptance.push((block.to_string(), BlockAcceptance::default()));
                &mut self.acceptance.last_mut().expect("just pushed").1
            }
        };
        entry.proposed += 1;
        entry.accepted += accepted as u64;
    }

    pub(crate) fn push(&mut self, row: Vec<f64>, log_likelihood: f64) {
        debug_assert_eq!(row.len(), self.names.len());
        self.rows.extend(row);
        self.log_likelihood.push(log_likelihood);
    }

    pub(crate) fn finish(self) -> PosteriorDraws {
        let n = self.log_likelihood.len();
        PosteriorDraws {
            draws: DMatrix::from_row_slice(n, self.names.len(), &self.rows),
            names: self.names,
            log_likelihood: self.log_likelihood,
            acceptance: self.acceptance,
            meta: self.meta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub ess: f64,
}

/// Mean, standard deviation, 95% HPD interval and effective sample size of
/// every parameter.
pub fn summarize(draws: &PosteriorDraws) -> Result<Vec<ParameterSummary>> {
    if draws.len() < 2 {
        return Err(Error::Empty("summaries need at least two retained draws"));
    }
    draws
        .names
        .iter()
        .zip(draws.draws.column_iter())
        .map(|(name, col)| {
            let v: Vec<f64> = col.iter().copied().collect();
            summarize_column(name, &v, HPD_LEVEL)
        })
        .collect()
}

pub fn summarize_column(name: &str, values: &[f64], level: f64) -> Result<ParameterSummary> {
    if values.len() < 2 {
        return Err(Error::Empty("summaries need at least two retained draws"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let (hpd_low, hpd_high) = hpd_interval(values, level)?;
    Ok(ParameterSummary {
        name: name.to_string(),
        mean,
        sd: var.sqrt(),
        hpd_low,
        hpd_high,
        ess: effective_sample_size(values),
    })
}

/// Shortest interval holding `ceil(level n)` of the sorted draws; the first
/// such window wins ties.
pub fn hpd_interval(values: &[f64], level: f64) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("HPD interval of no draws"));
    }
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::Domain(format!("credible level must lie in (0, 1], got {level}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let k = ((level * n as f64).ceil() as usize).clamp(1, n);
    let mut best = 0;
    let mut width = f64::INFINITY;
    for i in 0..=n - k {
        let w = sorted[i + k - 1] - sorted[i];
        if w < width {
            width = w;
            best = i;
        }
    }
    Ok((sorted[best], sorted[best + k - 1]))
}

/// Effective sample size with Geyer's initial positive sequence: sums of
/// adjacent autocorrelation pairs are accumulated until the first
/// non-positive pair. Capped at the number of draws; NaN for a constant
/// series.
pub fn effective_sample_size(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let autocov = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let c0 = autocov(0);
    if !(c0 > 0.0) {
        return f64::NAN;
    }
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocov(lag) + autocov(lag + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    (n as f64 / tau.max(1.0 / n as f64)).min(n as f64)
}

/// Acceptance rate of every Metropolis block.
pub fn acceptance_report(draws: &PosteriorDraws) -> BTreeMap<String, f64> {
    draws
        .acceptance
        .iter()
        .map(|(b, a)| (b.clone(), a.rate()))
        .collect()
}
