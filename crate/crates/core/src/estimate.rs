//! The net-average estimator, replicate sets and confidence intervals.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::integrands::Integrand;
use crate::netgen::{
    randomize_seeded, word_split, word_to_unit, RandomizedNet, SchemeKind, ScrambleScheme,
};
use crate::numeric::NeumaierSum;
use crate::streams::{stream_id, Purpose, SeedRecord};

/// Default number of bootstrap resamples.
pub const DEFAULT_BOOTSTRAP: usize = 1000;

/// `2^-m sum_i f(x_i)` with compensated summation.
pub fn estimate(net: &RandomizedNet, f: &Integrand) -> Result<f64> {
    if f.dim() != net.dim() {
        return Err(Error::Dimension {
            op: "estimate",
            expected: net.dim(),
            got: f.dim(),
        });
    }
    let mut x = vec![0.0; net.dim()];
    let mut acc = NeumaierSum::new();
    net.for_each_point_words_gray(|_, words| {
        for (xj, &w) in x.iter_mut().zip(words) {
            *xj = word_to_unit(w);
        }
        acc.add(f.eval(&x));
    });
    Ok(acc.value() / net.len() as f64)
}

/// `mu_hat - mu` resolved below the rounding unit of `mu`: each value is
/// centered on `mu` before compensated summation, digits below the `f64`
/// mantissa enter through the integrand's derivative when it has one, and the
/// reference's residual is subtracted at the end.
pub fn estimate_error(net: &RandomizedNet, f: &Integrand) -> Result<f64> {
    if f.dim() != net.dim() {
        return Err(Error::Dimension {
            op: "estimate_error",
            expected: net.dim(),
            got: f.dim(),
        });
    }
    let reference = f.reference().ok_or_else(|| {
        Error::invalid(format!("integrand `{}` has no reference value", f.name()))
    })?;
    let mut x = vec![0.0; net.dim()];
    let mut h = vec![0.0; net.dim()];
    let mut acc = NeumaierSum::new();
    net.for_each_point_words_gray(|_, words| {
        for ((xj, hj), &w) in x.iter_mut().zip(h.iter_mut()).zip(words) {
            (*xj, *hj) = word_split(w);
        }
        acc.add(f.eval(&x) - reference.mu);
        if let Some(d) = f.derivative() {
            acc.add(d(&x, &h));
        }
    });
    Ok(acc.value() / net.len() as f64 - reference.mu_residual)
}

/// `r` estimates from independent randomizations, sorted ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSet {
    values: Vec<f64>,
    pub m: usize,
    #[serde(rename = "E")]
    pub e: usize,
    pub scheme: Option<SchemeKind>,
    pub seeds: Vec<SeedRecord>,
}

impl ReplicateSet {
    /// Wraps externally produced replicates; NaNs are rejected.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("a replicate set needs at least one value"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::invalid("replicate values must not be NaN"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            values,
            m: 0,
            e: 0,
            scheme: None,
            seeds: Vec::new(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Order statistic `i` (1-based).
    pub fn order(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().copied().collect::<NeumaierSum>().value() / self.len() as f64
    }

    /// Sample standard deviation with divisor `r - 1`.
    pub fn std_dev(&self) -> f64 {
        sample_sd(&self.values)
    }
}

fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().copied().collect::<NeumaierSum>().value() / n;
    let ss = values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .collect::<NeumaierSum>()
        .value();
    (ss / (n - 1.0)).sqrt()
}

/// Seed record of replicate `rep` in `trial`.
pub fn replicate_seed(master_seed: u64, trial: u64, rep: u64) -> SeedRecord {
    SeedRecord::new(master_seed, stream_id(Purpose::Replicate, trial, rep))
}

/// `r` independent replicates for `trial`, each on its own substream.
pub fn replicate_trial(
    scheme: &ScrambleScheme,
    f: &Integrand,
    m: usize,
    e: usize,
    r: usize,
    master_seed: u64,
    trial: u64,
) -> Result<ReplicateSet> {
    if r == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    let seeds: Vec<SeedRecord> = (0..r as u64)
        .map(|rep| replicate_seed(master_seed, trial, rep))
        .collect();
    let values = seeds
        .par_iter()
        .map(|&seed| {
            let net = randomize_seeded(scheme, f.dim(), m, e, seed)?;
            estimate(&net, f)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut set = ReplicateSet::from_values(values)?;
    set.m = m;
    set.e = e;
    set.scheme = Some(scheme.kind());
    set.seeds = seeds;
    Ok(set)
}

pub fn replicate(
    scheme: &ScrambleScheme,
    f: &Integrand,
    m: usize,
    e: usize,
    r: usize,
    master_seed: u64,
) -> Result<ReplicateSet> {
    replicate_trial(scheme, f, m, e, r, master_seed, 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    Quantile,
    T,
    BootstrapT,
}

impl IntervalMethod {
    pub fn label(&self) -> &'static str {
        match self {
            IntervalMethod::Quantile => "quantile",
            IntervalMethod::T => "t",
            IntervalMethod::BootstrapT => "bootstrap_t",
        }
    }
}

impl fmt::Display for IntervalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for IntervalMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quantile" => Ok(IntervalMethod::Quantile),
            "t" => Ok(IntervalMethod::T),
            "boot" | "bootstrap" | "bootstrap_t" | "bootstrap-t" => Ok(IntervalMethod::BootstrapT),
            other => Err(Error::invalid(format!("unknown interval method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub method: IntervalMethod,
    pub nominal: f64,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, mu: f64) -> bool {
        self.lo <= mu && mu <= self.hi
    }
}

fn check_order_indices(r: usize, ell: usize, u: usize) -> Result<()> {
    if ell < 1 || ell >= u || u > r {
        return Err(Error::invalid(format!(
            "order statistics need 1 <= ell < u <= r, got ell = {ell}, u = {u}, r = {r}"
        )));
    }
    Ok(())
}

/// `sum_{j=ell}^{u-1} C(r, j)` and `2^r`, the exact coverage fraction.
pub fn nominal_coverage_fraction(r: usize, ell: usize, u: usize) -> Result<(u128, u128)> {
    check_order_indices(r, ell, u)?;
    if r > 120 {
        return Err(Error::invalid(format!("r = {r} exceeds 120")));
    }
    let mut binom = vec![1u128; r + 1];
    for j in 1..=r {
        binom[j] = binom[j - 1] * (r + 1 - j) as u128 / j as u128;
    }
    Ok((binom[ell..u].iter().sum(), 1u128 << r))
}

/// `F(u - 1) - F(ell - 1)` for the Bin(r, 1/2) distribution function `F`.
pub fn nominal_coverage(r: usize, ell: usize, u: usize) -> Result<f64> {
    let (num, den) = nominal_coverage_fraction(r, ell, u)?;
    Ok(num as f64 / den as f64)
}

/// `[ell-th, u-th]` order statistics.
pub fn quantile_interval(reps: &ReplicateSet, ell: usize, u: usize) -> Result<Interval> {
    let nominal = nominal_coverage(reps.len(), ell, u)?;
    Ok(Interval {
        lo: reps.order(ell),
        hi: reps.order(u),
        method: IntervalMethod::Quantile,
        nominal,
    })
}

/// Student t distribution function with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * beta_reg(0.5 * df, 0.5, df / (df + t * t));
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Critical value `t` with `P(|T| <= t) = level`, by bisection.
pub fn student_t_quantile(level: f64, df: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&level) || df <= 0.0 {
        return Err(Error::invalid(format!(
            "need 0 <= level < 1 and df > 0, got level = {level}, df = {df}"
        )));
    }
    let target = 0.5 * (1.0 + level);
    let mut hi = 1.0;
    while student_t_cdf(hi, df) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if student_t_cdf(mid, df) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `mean +- t sd / sqrt(r)` at two-sided `level`.
pub fn t_interval(reps: &ReplicateSet, level: f64) -> Result<Interval> {
    let r = reps.len();
    if r < 2 {
        return Err(Error::invalid("t interval needs r >= 2"));
    }
    let t = student_t_quantile(level, (r - 1) as f64)?;
    let mean = reps.mean();
    let half = t * reps.std_dev() / (r as f64).sqrt();
    Ok(Interval {
        lo: mean - half,
        hi: mean + half,
        method: IntervalMethod::T,
        nominal: level,
    })
}

/// Linear-interpolation empirical quantile of sorted data.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let i = h.floor() as usize;
    let frac = h - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Bootstrap-t interval from `b` resamples. Resamples with zero spread have
/// no studentized value and are dropped.
pub fn bootstrap_t_interval<R: Rng + ?Sized>(
    reps: &ReplicateSet,
    level: f64,
    b: usize,
    rng: &mut R,
) -> Result<Interval> {
    let r = reps.len();
    if r < 2 {
        return Err(Error::invalid("bootstrap-t interval needs r >= 2"));
    }
    if b < 100 {
        return Err(Error::invalid(format!(
            "need at least 100 resamples, got {b}"
        )));
    }
    if !(0.0..1.0).contains(&level) {
        return Err(Error::invalid(format!("level {level} outside [0, 1)")));
    }
    let mean = reps.mean();
    let se = reps.std_dev() / (r as f64).sqrt();
    let point = Interval {
        lo: mean,
        hi: mean,
        method: IntervalMethod::BootstrapT,
        nominal: level,
    };
    if se == 0.0 {
        return Ok(point);
    }
    let values = reps.values();
    let mut sample = vec![0.0; r];
    let mut stats = Vec::with_capacity(b);
    for _ in 0..b {
        for slot in sample.iter_mut() {
            *slot = values[rng.random_range(0..r)];
        }
        let se_star = sample_sd(&sample) / (r as f64).sqrt();
        if se_star > 0.0 {
            let mean_star = sample.iter().sum::<f64>() / r as f64;
            stats.push((mean_star - mean) / se_star);
        }
    }
    if stats.is_empty() {
        return Ok(point);
    }
    stats.sort_by(f64::total_cmp);
    let q_lo = sorted_quantile(&stats, 0.5 * (1.0 - level));
    let q_hi = sorted_quantile(&stats, 0.5 * (1.0 + level));
    Ok(Interval {
        lo: mean - q_hi * se,
        hi: mean - q_lo * se,
        method: IntervalMethod::BootstrapT,
        nominal: level,
    })
}

/// Middle order statistic; the average of the two middle values for even `r`.
pub fn median_estimate(reps: &ReplicateSet) -> f64 {
    let v = reps.values();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
