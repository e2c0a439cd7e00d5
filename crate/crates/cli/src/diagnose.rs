use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rqmc::diagnose::{
    kappa_concentration, marginal_order_check, profile_probability, rank_deficiency_r1,
    xor_closure_exact, xor_closure_prob, z_joint_counts,
};
use rqmc::kindex::{count_qn, KIndex, QSampler};
use rqmc::netgen::{randomize_seeded, SchemeKind, ScrambleScheme};
use rqmc::streams::{substream, Purpose, SeedRecord};
use rqmc::walsh::z_unchecked;
use serde::Serialize;
use serde_json::json;

use crate::args::{factories, usage, DirsArg};
use crate::run::{report, RunOutput, Table, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Aliasing probability Pr(Z(k) = 1) per index.
    Zprob,
    /// Exact one-way rank deficiency of a generator under RLS.
    Rankdef,
    /// Row-wise uniformity of the randomized matrices.
    Marginal,
    /// Pr(k1 xor k2 in Q_N) for uniform k1, k2 in Q_N.
    XorClosure,
    /// Distribution of |kappa_1| over Q_N.
    Kappa,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub check: Check,
    #[arg(long, default_value = "crd")]
    pub scheme: SchemeKind,
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    /// Digits per coordinate; defaults to 2m, raised to cover the indices.
    #[arg(long = "E")]
    pub e: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// zprob: explicit index, coordinates separated by `;`, digit positions by `,`
    /// (for example `1,3;2`). Repeatable.
    #[arg(long = "k")]
    pub k: Vec<String>,
    /// zprob: number of random indices drawn from Q_N when no --k is given.
    #[arg(long, default_value_t = 20)]
    pub indices: usize,
    /// Q_N levels: one for zprob (default 2m), a list for xor-closure and kappa.
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Vec<u32>,
    /// kappa: half-width of the window around 2.
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    /// marginal: first row to test.
    #[arg(long, default_value_t = 1)]
    pub first_row: usize,
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
struct DiagnoseConfig {
    check: Check,
    scheme: SchemeKind,
    dirs: String,
    s: usize,
    m: usize,
    #[serde(rename = "E")]
    e: usize,
    trials: u64,
    seed: u64,
    n: Vec<u32>,
    indices: Vec<String>,
    eps: f64,
    first_row: usize,
}

fn parse_index(text: &str, s: usize) -> anyhow::Result<KIndex> {
    let sets = text
        .split(';')
        .map(|coord| {
            coord
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| usage(format!("bad digit position `{t}` in `{text}`")))
                })
                .collect::<anyhow::Result<Vec<u32>>>()
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    if sets.len() != s {
        return Err(usage(format!(
            "index `{text}` has {} coordinates, expected s = {s}",
            sets.len()
        )));
    }
    let refs: Vec<&[u32]> = sets.iter().map(Vec::as_slice).collect();
    KIndex::from_sets(&refs).map_err(|e| usage(e.to_string()))
}

/// Inverse of [`parse_index`].
fn fmt_index(k: &KIndex) -> String {
    (0..k.dim())
        .map(|j| {
            k.positions(j)
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn fmt_profile(p: &[u32]) -> String {
    p.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}

pub fn run(a: &DiagnoseArgs) -> anyhow::Result<bool> {
    if a.s == 0 || a.m == 0 || a.m > 40 {
        return Err(usage("need s >= 1 and 1 <= m <= 40"));
    }
    let factory = factories(&[a.scheme], &a.dirs)?.remove(0);
    let default_e = (2 * a.m).min(64);
    let mut c = DiagnoseConfig {
        check: a.check,
        scheme: a.scheme,
        dirs: factory.source.label().to_string(),
        s: a.s,
        m: a.m,
        e: a.e.unwrap_or(default_e),
        trials: 0,
        seed: a.seed,
        n: a.n.clone(),
        indices: Vec::new(),
        eps: a.eps,
        first_row: a.first_row,
    };
    let mut verdicts = Vec::new();
    let summary;
    let table = match a.check {
        Check::Zprob => {
            c.trials = a.trials.unwrap_or(100_000);
            if c.trials < 1000 {
                return Err(usage("zprob needs at least 1000 trials"));
            }
            let indices = if a.k.is_empty() {
                let n = match a.n[..] {
                    [] => 2 * a.m as u32,
                    [n] => n,
                    _ => return Err(usage("zprob takes a single --N")),
                };
                c.n = vec![n];
                let sampler = QSampler::new(a.s, n).map_err(|e| usage(e.to_string()))?;
                let mut rng = substream(a.seed, Purpose::Diagnostic, 0, 0xff_0001);
                (0..a.indices)
                    .map(|_| sampler.sample(&mut rng))
                    .collect::<Vec<_>>()
            } else {
                a.k.iter()
                    .map(|t| parse_index(t, a.s))
                    .collect::<anyhow::Result<Vec<_>>>()?
            };
            let need = indices.iter().map(KIndex::ceil).max().unwrap_or(0) as usize;
            if a.e.is_some_and(|e| e < need) {
                return Err(usage(format!(
                    "--E must be at least {need} to resolve the indices"
                )));
            }
            c.e = c.e.max(need).max(a.m);
            if c.e > 64 {
                return Err(usage("indices need more than 64 digits"));
            }
            c.indices = indices.iter().map(fmt_index).collect();
            let scheme = factory.build(a.s, a.m)?;
            let counts = z_joint_counts(&scheme, a.s, a.m, c.e, &indices, &[], c.trials, a.seed)?;
            let uniform = (-(a.m as f64)).exp2();
            let mut t = Table::new(
                "zprob",
                &[
                    "index", "scheme", "m", "E", "hits", "trials", "p_hat", "stderr", "expected",
                    "z",
                ],
            );
            let mut worst = 0.0f64;
            for (i, k) in indices.iter().enumerate() {
                let expected = if k.is_zero() {
                    1.0
                } else {
                    match &scheme {
                        ScrambleScheme::Crd => uniform,
                        ScrambleScheme::Rls(gen) => {
                            let profile: Vec<u32> = (0..a.s)
                                .map(|j| k.positions(j).max().unwrap_or(0))
                                .collect();
                            if profile.iter().any(|&t| t as usize > a.m) {
                                uniform
                            } else {
                                profile_probability(gen, &profile)?.probability
                            }
                        }
                        // Only the shift is random, and Z ignores it.
                        ScrambleScheme::ShiftOnly(_) => {
                            let net = randomize_seeded(
                                &scheme,
                                a.s,
                                a.m,
                                c.e,
                                SeedRecord::new(a.seed, 0),
                            )?;
                            z_unchecked(&net, k) as u8 as f64
                        }
                    }
                };
                let p = counts.single(i);
                let z = p.z_score(expected);
                worst = worst.max(z.abs());
                t.push(vec![
                    fmt_index(k),
                    a.scheme.to_string(),
                    a.m.to_string(),
                    c.e.to_string(),
                    p.hits.to_string(),
                    p.trials.to_string(),
                    p.p_hat.to_string(),
                    p.stderr.to_string(),
                    expected.to_string(),
                    z.to_string(),
                ]);
            }
            verdicts.push(Verdict::new(
                "aliasing probability within 4 sigma",
                worst <= 4.0,
                format!("max |z| = {worst:.2} over {} indices", indices.len()),
            ));
            summary = json!({"max_abs_z": worst});
            t
        }
        Check::Rankdef => {
            let gen = factory.source.matrices(a.s, a.m)?;
            let rd = rank_deficiency_r1(&gen)?;
            let mut t = Table::new("rankdef", &["profile", "probability", "rank", "consistent"]);
            for p in &rd.profiles {
                t.push(vec![
                    fmt_profile(&p.profile),
                    p.probability.to_string(),
                    p.rank.to_string(),
                    p.consistent.to_string(),
                ]);
            }
            println!(
                "R_(m,1) = {} (m = {}, s = {}, {})",
                rd.r,
                rd.m,
                a.s,
                gen.provenance()
            );
            verdicts.push(Verdict::new(
                "finite nonnegative rank deficiency",
                rd.r.is_finite() && rd.r >= 0.0,
                format!("R = {}", rd.r),
            ));
            summary = json!({
                "R": rd.r,
                "max_probability": rd.max_probability,
                "argmax": rd.argmax.as_deref().map(fmt_profile),
                "nonsingular": gen.nonsingular(),
            });
            t
        }
        Check::Marginal => {
            c.trials = a.trials.unwrap_or(10_000);
            if c.e <= a.m || c.e > 64 {
                return Err(usage("marginal needs m < E <= 64"));
            }
            let scheme = factory.build(a.s, a.m)?;
            let rep = marginal_order_check(&scheme, a.s, a.m, c.e, a.first_row, c.trials, a.seed)?;
            let mut t = Table::new("marginal", &["coordinate", "row", "max_abs_z", "flagged"]);
            for r in &rep.rows {
                t.push(vec![
                    (r.coordinate + 1).to_string(),
                    r.row.to_string(),
                    r.max_abs_z.to_string(),
                    r.flagged.to_string(),
                ]);
            }
            let expected_from = match a.scheme {
                SchemeKind::Crd => Some(1),
                SchemeKind::Rls => Some(a.m + 1),
                SchemeKind::Shift => None,
            };
            if let Some(from) = expected_from {
                verdicts.push(Verdict::new(
                    format!("rows from {from} uniform"),
                    rep.passes_from(from.max(a.first_row)),
                    format!(
                        "marginal order {:?}, |z| limit {}",
                        rep.marginal_order(),
                        rep.z_limit
                    ),
                ));
            }
            summary = json!({"marginal_order": rep.marginal_order(), "z_limit": rep.z_limit});
            t
        }
        Check::XorClosure => {
            c.trials = a.trials.unwrap_or(100_000);
            if c.n.is_empty() {
                c.n = vec![10, 20, 40];
            }
            let mut t = Table::new(
                "xor-closure",
                &["s", "N", "hits", "trials", "p_hat", "stderr", "exact"],
            );
            let mut props = Vec::new();
            for &n in &c.n {
                let p =
                    xor_closure_prob(a.s, n, c.trials, a.seed).map_err(|e| usage(e.to_string()))?;
                let exact = if count_qn(a.s, n) <= 2000 {
                    xor_closure_exact(a.s, n)?.to_string()
                } else {
                    String::new()
                };
                t.push(vec![
                    a.s.to_string(),
                    n.to_string(),
                    p.hits.to_string(),
                    p.trials.to_string(),
                    p.p_hat.to_string(),
                    p.stderr.to_string(),
                    exact,
                ]);
                props.push((n, p));
            }
            for w in props.windows(2) {
                let ((n0, p0), (n1, p1)) = (&w[0], &w[1]);
                let sep = 3.0 * (p0.stderr.powi(2) + p1.stderr.powi(2)).sqrt();
                verdicts.push(Verdict::new(
                    format!("decrease from N = {n0} to N = {n1}"),
                    p0.p_hat - p1.p_hat > sep,
                    format!("{:.5} -> {:.5} (3 sigma = {sep:.5})", p0.p_hat, p1.p_hat),
                ));
            }
            summary = json!(props
                .iter()
                .map(|(n, p)| json!({"N": n, "p_hat": p.p_hat}))
                .collect::<Vec<_>>());
            t
        }
        Check::Kappa => {
            c.trials = a.trials.unwrap_or(100_000);
            if c.n.is_empty() {
                c.n = vec![10, 40];
            }
            let mut t = Table::new(
                "kappa",
                &["s", "N", "size", "count", "total", "scaled_size"],
            );
            let mut masses = Vec::new();
            for &n in &c.n {
                let h = kappa_concentration(a.s, n, c.trials, a.seed)
                    .map_err(|e| usage(e.to_string()))?;
                for (&size, &count) in &h.counts {
                    t.push(vec![
                        a.s.to_string(),
                        n.to_string(),
                        size.to_string(),
                        count.to_string(),
                        h.total.to_string(),
                        (size as f64 / h.scale).to_string(),
                    ]);
                }
                masses.push((n, h.mass_near_two(a.eps)));
            }
            if let (Some((n0, p0)), Some((n1, p1))) = (masses.first(), masses.last()) {
                if masses.len() > 1 {
                    let sep = 3.0 * (p0.stderr.powi(2) + p1.stderr.powi(2)).sqrt();
                    verdicts.push(Verdict::new(
                        format!("mass near 2 grows from N = {n0} to N = {n1}"),
                        p1.p_hat - p0.p_hat > sep,
                        format!("{:.4} -> {:.4} (3 sigma = {sep:.4})", p0.p_hat, p1.p_hat),
                    ));
                }
            }
            summary = json!(masses
                .iter()
                .map(|(n, p)| json!({"N": n, "mass_near_two": p.p_hat, "stderr": p.stderr}))
                .collect::<Vec<_>>());
            t
        }
    };
    let inputs = a.dirs.input_file().cloned().into_iter().collect();
    RunOutput {
        command: "diagnose",
        config: &c,
        table: &table,
        summary,
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
