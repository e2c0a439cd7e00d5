use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use rqmc::estimate::{
    bootstrap_t_interval, median_estimate, nominal_coverage, quantile_interval, replicate_trial,
    student_t_quantile, t_interval, IntervalMethod, DEFAULT_BOOTSTRAP,
};
use rqmc::integrands;
use rqmc::netgen::SchemeKind;
use rqmc::streams::{substream, Purpose};
use serde_json::json;

use crate::args::{factories, usage, warn_precision, DirsArg};

#[derive(Args, Debug)]
pub struct IntervalArgs {
    #[arg(long, default_value = "x33exp")]
    pub integrand: String,
    #[arg(long, default_value = "rls")]
    pub scheme: SchemeKind,
    #[arg(long)]
    pub m: usize,
    #[arg(long = "E", default_value_t = 64)]
    pub e: usize,
    #[arg(long, default_value_t = 9)]
    pub r: usize,
    /// Lower order statistic (1-based).
    #[arg(long, default_value_t = 2)]
    pub ell: usize,
    /// Upper order statistic (1-based).
    #[arg(long, default_value_t = 8)]
    pub u: usize,
    /// quantile, t or boot.
    #[arg(long, default_value = "quantile")]
    pub method: IntervalMethod,
    /// Two-sided level for t and boot; defaults to the nominal coverage of (r, ell, u).
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trial number; selects the replicate substreams under the master seed.
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    #[command(flatten)]
    pub dirs: DirsArg,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: &IntervalArgs) -> anyhow::Result<()> {
    let f = integrands::get(&a.integrand).map_err(|e| usage(e.to_string()))?;
    let order_ok = a.ell >= 1 && a.ell < a.u && a.u <= a.r;
    let level = match (a.method, a.level) {
        (IntervalMethod::Quantile, _) if !order_ok => {
            return Err(usage(format!(
                "quantile intervals need 1 <= ell < u <= r, got ell = {}, u = {}, r = {}",
                a.ell, a.u, a.r
            )))
        }
        (IntervalMethod::Quantile, _) => nominal_coverage(a.r, a.ell, a.u)?,
        (_, Some(level)) if (0.0..1.0).contains(&level) => level,
        (_, Some(level)) => return Err(usage(format!("--level {level} outside [0, 1)"))),
        (_, None) if order_ok => nominal_coverage(a.r, a.ell, a.u)?,
        (_, None) => return Err(usage("give --level or a valid (ell, u) pair to match")),
    };
    if a.method != IntervalMethod::Quantile && a.r < 2 {
        return Err(usage("t and bootstrap-t intervals need r >= 2"));
    }
    if a.method == IntervalMethod::BootstrapT && a.bootstrap < 100 {
        return Err(usage("--bootstrap must be at least 100"));
    }
    if a.m > 40 || a.e < a.m || a.e > 64 {
        return Err(usage(format!(
            "need m <= 40 and m <= E <= 64, got m = {}, E = {}",
            a.m, a.e
        )));
    }
    warn_precision(a.e, a.m, f.dim());
    let factory = factories(&[a.scheme], &a.dirs)?.remove(0);
    let scheme = factory.build(f.dim(), a.m)?;
    let reps = replicate_trial(&scheme, &f, a.m, a.e, a.r, a.seed, a.trial)?;
    let (interval, t_critical) = match a.method {
        IntervalMethod::Quantile => (quantile_interval(&reps, a.ell, a.u)?, None),
        IntervalMethod::T => (
            t_interval(&reps, level)?,
            Some(student_t_quantile(level, (a.r - 1) as f64)?),
        ),
        IntervalMethod::BootstrapT => {
            let mut rng = substream(a.seed, Purpose::Bootstrap, a.trial, 0);
            (
                bootstrap_t_interval(&reps, level, a.bootstrap, &mut rng)?,
                None,
            )
        }
    };
    let reference = f.reference().cloned();
    let report = json!({
        "integrand": f.name(),
        "scheme": a.scheme,
        "dirs": factory.source.label(),
        "m": a.m,
        "E": a.e,
        "r": a.r,
        "ell": a.ell,
        "u": a.u,
        "method": a.method,
        "seed": a.seed,
        "trial": a.trial,
        "replicates": reps.values(),
        "median": median_estimate(&reps),
        "mean": reps.mean(),
        "interval": interval,
        "nominal": interval.nominal,
        "t_critical": t_critical,
        "bootstrap": (a.method == IntervalMethod::BootstrapT).then_some(a.bootstrap),
        "reference_mu": reference.as_ref().map(|r| r.mu),
        "hit": reference.as_ref().map(|r| interval.contains(r.mu)),
    });
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(out) = &a.out {
        fs::write(out, text + "\n").with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}
