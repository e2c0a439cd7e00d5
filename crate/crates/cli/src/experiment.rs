use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rqmc::diagnose::sign_quantile_curve;
use rqmc::estimate::{nominal_coverage, IntervalMethod, DEFAULT_BOOTSTRAP};
use rqmc::experiment::{
    error_samples, interval_trials, quantile, summarize, IntervalConfig, MethodSummary,
};
use rqmc::integrands::{self, Integrand};
use rqmc::netgen::{SchemeFactory, SchemeKind};
use serde::Serialize;
use serde_json::json;

use crate::args::{factories, parse_m_list, usage, warn_precision, DirsArg};
use crate::run::{report, RunOutput, Table, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    /// Pr(mu_hat > mu) against m.
    SignCurve,
    /// 90th-percentile interval lengths against m.
    Lengths,
    /// Interval hit counts against m.
    Coverage,
    /// Per-trial interval lengths and hits at one m.
    RobotLengths,
    /// Per-trial errors of single estimates.
    RobotErrors,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub fig: Figure,
    /// Defaults to x33exp, or robotarm for the robot figures.
    #[arg(long)]
    pub integrand: Option<String>,
    /// Comma-separated schemes; defaults to rls,crd (rls for the robot figures).
    #[arg(long, value_delimiter = ',')]
    pub scheme: Vec<SchemeKind>,
    /// `a..b`, `a..b:step` or `m1,m2,...`.
    #[arg(long)]
    pub m_range: Option<String>,
    /// Digits per coordinate; defaults to 64, or 32 for the robot figures.
    #[arg(long = "E")]
    pub e: Option<usize>,
    #[arg(long, default_value_t = 9)]
    pub r: usize,
    #[arg(long, default_value_t = 2)]
    pub ell: usize,
    #[arg(long, default_value_t = 8)]
    pub u: usize,
    /// Comma-separated interval methods (quantile, t, boot).
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<IntervalMethod>,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    pub bootstrap: usize,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub dirs: DirsArg,
    /// Run directory to create.
    #[arg(long)]
    pub out: PathBuf,
    /// Exit with status 3 when a statistical verdict fails.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Serialize)]
struct ExperimentConfig {
    fig: Figure,
    integrand: String,
    schemes: Vec<SchemeKind>,
    dirs: String,
    m: Vec<usize>,
    #[serde(rename = "E")]
    e: usize,
    r: usize,
    ell: usize,
    u: usize,
    methods: Vec<IntervalMethod>,
    bootstrap: usize,
    trials: u64,
    seed: u64,
}

fn resolve(
    a: &ExperimentArgs,
) -> anyhow::Result<(ExperimentConfig, Integrand, Vec<SchemeFactory>)> {
    let robot = matches!(a.fig, Figure::RobotLengths | Figure::RobotErrors);
    let integrand = a
        .integrand
        .clone()
        .unwrap_or_else(|| if robot { "robotarm" } else { "x33exp" }.into());
    let f = integrands::get(&integrand).map_err(|e| usage(e.to_string()))?;
    if f.reference().is_none() {
        return Err(usage(format!(
            "integrand `{integrand}` has no reference value"
        )));
    }
    let schemes = match (&a.scheme[..], robot) {
        ([], true) => vec![SchemeKind::Rls],
        ([], false) => vec![SchemeKind::Rls, SchemeKind::Crd],
        (given, _) => given.to_vec(),
    };
    let default_m = match a.fig {
        Figure::SignCurve => "0..8",
        Figure::Lengths | Figure::Coverage => "1..10",
        Figure::RobotLengths | Figure::RobotErrors => "12",
    };
    let m = parse_m_list(a.m_range.as_deref().unwrap_or(default_m)).map_err(usage)?;
    let e = a.e.unwrap_or(if robot { 32 } else { 64 });
    let trials = a.trials.unwrap_or(match a.fig {
        Figure::SignCurve => 10_000,
        Figure::RobotLengths => 300,
        _ => 1000,
    });
    let methods = match (&a.methods[..], a.fig) {
        ([], Figure::RobotLengths) => vec![
            IntervalMethod::Quantile,
            IntervalMethod::T,
            IntervalMethod::BootstrapT,
        ],
        ([], _) => vec![IntervalMethod::Quantile, IntervalMethod::T],
        (given, _) => given.to_vec(),
    };
    let min_m = if a.fig == Figure::SignCurve { 0 } else { 1 };
    if m.iter().any(|&m| m < min_m || m > 40 || m > e) || e > 64 || e == 0 {
        return Err(usage(format!(
            "need {min_m} <= m <= min(E, 40) and E <= 64"
        )));
    }
    if trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    if matches!(
        a.fig,
        Figure::Lengths | Figure::Coverage | Figure::RobotLengths
    ) {
        if !(a.ell >= 1 && a.ell < a.u && a.u <= a.r) {
            return Err(usage(format!(
                "need 1 <= ell < u <= r, got ell = {}, u = {}, r = {}",
                a.ell, a.u, a.r
            )));
        }
        if a.bootstrap < 100 {
            return Err(usage("--bootstrap must be at least 100"));
        }
    }
    if a.fig == Figure::RobotLengths && (m.len() != 1 || schemes.len() != 1) {
        return Err(usage("robot-lengths takes a single m and a single scheme"));
    }
    for &mm in &m {
        warn_precision(e, mm, f.dim());
    }
    let factories = factories(&schemes, &a.dirs)?;
    let config = ExperimentConfig {
        fig: a.fig,
        integrand: f.name().to_string(),
        schemes,
        dirs: factories[0].source.label().to_string(),
        m,
        e,
        r: a.r,
        ell: a.ell,
        u: a.u,
        methods,
        bootstrap: a.bootstrap,
        trials,
        seed: a.seed,
    };
    Ok((config, f, factories))
}

fn interval_config(c: &ExperimentConfig, m: usize) -> IntervalConfig {
    let mut cfg = IntervalConfig::new(m, c.e, c.r, c.ell, c.u);
    cfg.methods = c.methods.clone();
    cfg.bootstrap = c.bootstrap;
    cfg
}

/// `hits` against a Bin(trials, nominal) band of three standard deviations.
fn coverage_verdict(name: String, s: &MethodSummary) -> Verdict {
    let n = s.trials as f64;
    let sd = (n * s.nominal * (1.0 - s.nominal)).sqrt();
    let (lo, hi) = (n * s.nominal - 3.0 * sd, n * s.nominal + 3.0 * sd);
    let h = s.hits as f64;
    Verdict::new(
        name,
        lo <= h && h <= hi,
        format!(
            "{} hits in {} trials, band [{lo:.1}, {hi:.1}]",
            s.hits, s.trials
        ),
    )
}

pub fn run(a: &ExperimentArgs) -> anyhow::Result<bool> {
    let (c, f, factories) = resolve(a)?;
    let mu = f.reference_mu()?;
    let mut verdicts = Vec::new();
    let mut summary = Vec::new();
    let table = match c.fig {
        Figure::SignCurve => {
            let mut t = Table::new(
                "sign-curve",
                &["m", "scheme", "p_gt", "p_eq", "stderr", "trials"],
            );
            for factory in &factories {
                let rows = sign_quantile_curve(factory, &f, &c.m, c.e, c.trials, c.seed)?;
                for r in &rows {
                    t.push(vec![
                        r.m.to_string(),
                        r.scheme.to_string(),
                        r.p_gt.to_string(),
                        r.p_eq.to_string(),
                        r.stderr.to_string(),
                        r.trials.to_string(),
                    ]);
                }
                if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
                    if rows.len() > 1 {
                        let gap = (first.p_gt - 0.5).abs() - (last.p_gt - 0.5).abs();
                        let sep = 3.0 * (first.stderr.powi(2) + last.stderr.powi(2)).sqrt();
                        verdicts.push(Verdict::new(
                            format!("{} drift toward 1/2", factory.kind),
                            gap > sep,
                            format!(
                                "|p - 1/2| falls from {:.4} at m = {} to {:.4} at m = {} (3 sigma = {sep:.4})",
                                (first.p_gt - 0.5).abs(),
                                first.m,
                                (last.p_gt - 0.5).abs(),
                                last.m
                            ),
                        ));
                    }
                }
            }
            t
        }
        Figure::Lengths | Figure::Coverage => {
            let mut t = if c.fig == Figure::Lengths {
                Table::new("lengths", &["m", "scheme", "method", "p90_length"])
            } else {
                Table::new(
                    "coverage",
                    &["m", "scheme", "method", "hits", "trials", "nominal"],
                )
            };
            for factory in &factories {
                let mut last = Vec::new();
                for &m in &c.m {
                    let records =
                        interval_trials(factory, &f, &interval_config(&c, m), c.trials, c.seed)?;
                    let sums = summarize(&records, mu);
                    for s in &sums {
                        t.push(if c.fig == Figure::Lengths {
                            vec![
                                m.to_string(),
                                factory.kind.to_string(),
                                s.method.to_string(),
                                s.p90_length.to_string(),
                            ]
                        } else {
                            vec![
                                m.to_string(),
                                factory.kind.to_string(),
                                s.method.to_string(),
                                s.hits.to_string(),
                                s.trials.to_string(),
                                s.nominal.to_string(),
                            ]
                        });
                        summary.push(json!({"m": m, "scheme": factory.kind, "summary": s}));
                    }
                    last = sums;
                }
                let m_last = c.m.last().copied().unwrap_or(0);
                let pick = |k| last.iter().find(|s: &&MethodSummary| s.method == k);
                match (
                    c.fig,
                    pick(IntervalMethod::Quantile),
                    pick(IntervalMethod::T),
                ) {
                    (Figure::Lengths, Some(q), Some(tt)) => verdicts.push(Verdict::new(
                        format!("{} quantile shorter than t at m = {m_last}", factory.kind),
                        q.p90_length < tt.p90_length,
                        format!("p90 {:.3e} vs {:.3e}", q.p90_length, tt.p90_length),
                    )),
                    (Figure::Coverage, Some(q), _) => verdicts.push(coverage_verdict(
                        format!("{} quantile coverage at m = {m_last}", factory.kind),
                        q,
                    )),
                    _ => {}
                }
            }
            t
        }
        Figure::RobotLengths => {
            let mut t = Table::new("robot", &["method", "trial", "length", "hit"]);
            let factory = &factories[0];
            let records =
                interval_trials(factory, &f, &interval_config(&c, c.m[0]), c.trials, c.seed)?;
            for method in &c.methods {
                for rec in &records {
                    let i = rec.interval(*method).expect("method was run");
                    t.push(vec![
                        method.to_string(),
                        rec.trial.to_string(),
                        i.length().to_string(),
                        i.contains(mu).to_string(),
                    ]);
                }
            }
            let sums = summarize(&records, mu);
            for s in &sums {
                summary.push(json!({"m": c.m[0], "scheme": factory.kind, "summary": s}));
            }
            if let Some(q) = sums.iter().find(|s| s.method == IntervalMethod::Quantile) {
                let n = q.trials as f64;
                let floor = q.nominal - 3.0 * (q.nominal * (1.0 - q.nominal) / n).sqrt();
                verdicts.push(Verdict::new(
                    "quantile hit rate",
                    q.hit_rate() >= floor,
                    format!("{}/{} hits, floor {:.3}", q.hits, q.trials, floor),
                ));
            }
            t
        }
        Figure::RobotErrors => {
            let mut t = Table::new("robot-errors", &["m", "scheme", "trial", "error"]);
            for factory in &factories {
                for &m in &c.m {
                    let errors = error_samples(factory, &f, m, c.e, c.trials, c.seed)?;
                    for (trial, err) in errors.iter().enumerate() {
                        t.push(vec![
                            m.to_string(),
                            factory.kind.to_string(),
                            trial.to_string(),
                            err.to_string(),
                        ]);
                    }
                    summary
                        .push(json!({"m": m, "scheme": factory.kind, "moments": moments(&errors)}));
                }
            }
            t
        }
    };
    if matches!(
        c.fig,
        Figure::Lengths | Figure::Coverage | Figure::RobotLengths
    ) {
        summary.push(json!({"nominal": nominal_coverage(c.r, c.ell, c.u)?}));
    }
    let inputs = a.dirs.input_file().cloned().into_iter().collect();
    RunOutput {
        command: "experiment",
        config: &c,
        table: &table,
        summary: json!(summary),
        verdicts: &verdicts,
        inputs,
    }
    .write(&a.out)?;
    println!(
        "wrote {} rows to {}",
        table.rows.len(),
        a.out.join("data.csv").display()
    );
    Ok(report(&verdicts))
}

/// Mean, standard deviation, median and excess kurtosis of a sample.
fn moments(x: &[f64]) -> serde_json::Value {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    json!({
        "mean": mean,
        "sd": m2.sqrt(),
        "median": quantile(x, 0.5),
        "excess_kurtosis": if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 },
    })
}
