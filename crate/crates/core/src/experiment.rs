//! Repeated-interval and error-decay experiments built on [`crate::estimate`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{
    bootstrap_t_interval, estimate_error, median_estimate, nominal_coverage, quantile_interval,
    replicate_seed, replicate_trial, t_interval, Interval, IntervalMethod, DEFAULT_BOOTSTRAP,
};
use crate::integrands::Integrand;
use crate::netgen::{randomize_seeded, SchemeFactory, SchemeKind};
use crate::streams::{substream, Purpose};

/// Settings shared by every trial of an interval experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalConfig {
    pub m: usize,
    #[serde(rename = "E")]
    pub e: usize,
    pub r: usize,
    pub ell: usize,
    pub u: usize,
    pub methods: Vec<IntervalMethod>,
    pub bootstrap: usize,
}

impl IntervalConfig {
    /// All three methods, the t and bootstrap-t levels matched to the
    /// quantile interval's nominal coverage.
    pub fn new(m: usize, e: usize, r: usize, ell: usize, u: usize) -> Self {
        Self {
            m,
            e,
            r,
            ell,
            u,
            methods: vec![
                IntervalMethod::Quantile,
                IntervalMethod::T,
                IntervalMethod::BootstrapT,
            ],
            bootstrap: DEFAULT_BOOTSTRAP,
        }
    }

    pub fn nominal(&self) -> Result<f64> {
        nominal_coverage(self.r, self.ell, self.u)
    }
}

/// One trial: `r` replicates and the intervals built from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalTrial {
    pub trial: u64,
    pub median: f64,
    pub mean: f64,
    pub intervals: Vec<Interval>,
}

impl IntervalTrial {
    pub fn interval(&self, method: IntervalMethod) -> Option<&Interval> {
        self.intervals.iter().find(|i| i.method == method)
    }
}

/// Runs `trials` independent interval constructions. Trial `t` draws its
/// replicates from the replicate substreams of `t` and its bootstrap
/// resamples from the bootstrap substream of `t`.
pub fn interval_trials(
    factory: &SchemeFactory,
    f: &Integrand,
    cfg: &IntervalConfig,
    trials: u64,
    seed: u64,
) -> Result<Vec<IntervalTrial>> {
    let level = cfg.nominal()?;
    if cfg.methods.is_empty() {
        return Err(Error::invalid("no interval method selected"));
    }
    let scheme = factory.build(f.dim(), cfg.m)?;
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let reps = replicate_trial(&scheme, f, cfg.m, cfg.e, cfg.r, seed, trial)?;
            let intervals = cfg
                .methods
                .iter()
                .map(|method| match method {
                    IntervalMethod::Quantile => quantile_interval(&reps, cfg.ell, cfg.u),
                    IntervalMethod::T => t_interval(&reps, level),
                    IntervalMethod::BootstrapT => {
                        let mut rng = substream(seed, Purpose::Bootstrap, trial, 0);
                        bootstrap_t_interval(&reps, level, cfg.bootstrap, &mut rng)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(IntervalTrial {
                trial,
                median: median_estimate(&reps),
                mean: reps.mean(),
                intervals,
            })
        })
        .collect()
}

/// Type-7 (linear interpolation) sample quantile; `values` need not be sorted.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let i = h.floor() as usize;
    if i + 1 < v.len() {
        v[i] + (h - i as f64) * (v[i + 1] - v[i])
    } else {
        v[i]
    }
}

/// Hit count and length quantiles of one method across trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: IntervalMethod,
    pub hits: u64,
    pub trials: u64,
    pub nominal: f64,
    pub p90_length: f64,
    pub median_length: f64,
}

impl MethodSummary {
    pub fn hit_rate(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }
}

pub fn summarize(records: &[IntervalTrial], mu: f64) -> Vec<MethodSummary> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    first
        .intervals
        .iter()
        .map(|template| {
            let chosen: Vec<&Interval> = records
                .iter()
                .filter_map(|r| r.interval(template.method))
                .collect();
            let lengths: Vec<f64> = chosen.iter().map(|i| i.length()).collect();
            MethodSummary {
                method: template.method,
                hits: chosen.iter().filter(|i| i.contains(mu)).count() as u64,
                trials: chosen.len() as u64,
                nominal: template.nominal,
                p90_length: quantile(&lengths, 0.9),
                median_length: quantile(&lengths, 0.5),
            }
        })
        .collect()
}

/// Errors `mu_hat - mu` of single randomizations, one per trial.
pub fn error_samples(
    factory: &SchemeFactory,
    f: &Integrand,
    m: usize,
    e: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let scheme = factory.build(f.dim(), m)?;
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let net = randomize_seeded(&scheme, f.dim(), m, e, replicate_seed(seed, trial, 0))?;
            estimate_error(&net, f)
        })
        .collect()
}

/// Typical error of the median of `r` replicates at one `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MedianErrorRow {
    pub m: usize,
    pub scheme: SchemeKind,
    pub r: usize,
    pub groups: usize,
    /// Median over groups of `|median of r replicates - mu|`.
    pub median_abs_error: f64,
}

/// Group count cap so group ids fit below the `m` tag in the trial field.
const MAX_GROUPS: usize = 1 << 20;

/// For each `m`, `groups` independent medians of `r` replicates each; the row
/// reports the median over groups of the median's absolute error. Errors are
/// measured with [`estimate_error`], so values far below `f64` resolution of
/// `mu` are still meaningful.
pub fn median_error_curve(
    factory: &SchemeFactory,
    f: &Integrand,
    m_list: &[usize],
    e: usize,
    r: usize,
    groups: usize,
    seed: u64,
) -> Result<Vec<MedianErrorRow>> {
    if r == 0 || groups == 0 || groups > MAX_GROUPS {
        return Err(Error::invalid(format!(
            "need r >= 1 and 1 <= groups <= {MAX_GROUPS}, got r = {r}, groups = {groups}"
        )));
    }
    m_list
        .iter()
        .map(|&m| {
            let scheme = factory.build(f.dim(), m)?;
            let errors = (0..groups as u64)
                .into_par_iter()
                .map(|g| {
                    let trial = ((m as u64) << 20) | g;
                    let mut values = (0..r as u64)
                        .map(|rep| {
                            let net = randomize_seeded(
                                &scheme,
                                f.dim(),
                                m,
                                e,
                                replicate_seed(seed, trial, rep),
                            )?;
                            estimate_error(&net, f)
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    values.sort_by(f64::total_cmp);
                    let mid = values.len() / 2;
                    let median = if values.len() % 2 == 1 {
                        values[mid]
                    } else {
                        0.5 * (values[mid - 1] + values[mid])
                    };
                    Ok(median.abs())
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(MedianErrorRow {
                m,
                scheme: factory.kind,
                r,
                groups,
                median_abs_error: quantile(&errors, 0.5),
            })
        })
        .collect()
}

/// Ratios of consecutive entries of a decay curve.
pub fn decay_ratios(rows: &[MedianErrorRow]) -> Vec<f64> {
    rows.windows(2)
        .map(|w| w[1].median_abs_error / w[0].median_abs_error)
        .collect()
}
