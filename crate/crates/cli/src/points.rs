use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use rqmc::netgen::{randomize_seeded, SchemeKind};
use rqmc::streams::{stream_id, Purpose, SeedRecord};
use serde::Serialize;

use crate::args::{factories, usage, warn_precision, DirsArg};
use crate::run::Table;

/// Larger nets are better consumed through the library than as CSV.
const MAX_POINTS_M: usize = 24;

#[derive(Args, Debug)]
pub struct PointsArgs {
    #[arg(long)]
    pub scheme: SchemeKind,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub m: usize,
    /// Digits per coordinate, at most 64.
    #[arg(long = "E", default_value_t = 32)]
    pub e: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub dirs: DirsArg,
    /// Zero the digital shift (deterministic nets for the shift scheme).
    #[arg(long)]
    pub no_shift: bool,
    /// CSV destination; the net dump goes beside it with a `.json` extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct PointsConfig<'a> {
    scheme: SchemeKind,
    s: usize,
    m: usize,
    #[serde(rename = "E")]
    e: usize,
    seed: u64,
    dirs: &'a str,
    no_shift: bool,
}

pub fn run(a: &PointsArgs) -> anyhow::Result<()> {
    if a.s == 0 || a.m == 0 || a.m > MAX_POINTS_M {
        return Err(usage(format!("need s >= 1 and 1 <= m <= {MAX_POINTS_M}")));
    }
    if a.e < a.m || a.e > 64 {
        return Err(usage(format!(
            "need m <= E <= 64, got m = {}, E = {}",
            a.m, a.e
        )));
    }
    warn_precision(a.e, a.m, a.s);
    let factory = factories(&[a.scheme], &a.dirs)?.remove(0);
    let scheme = factory.build(a.s, a.m)?;
    let seed = SeedRecord::new(a.seed, stream_id(Purpose::Points, 0, 0));
    let mut net = randomize_seeded(&scheme, a.s, a.m, a.e, seed)?;
    if a.no_shift {
        net = net.with_zero_shift();
    }
    let config = PointsConfig {
        scheme: a.scheme,
        s: a.s,
        m: a.m,
        e: a.e,
        seed: a.seed,
        dirs: factory.source.label(),
        no_shift: a.no_shift,
    };
    let mut header = vec!["i".to_string()];
    header.extend((1..=a.s).map(|j| format!("x{j}")));
    let mut table = Table::new("points", &[]);
    table.header = header;
    for (i, point) in net.points().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(point.iter().map(|x| x.to_unit().to_string()));
        table.push(row);
    }
    fs::write(&a.out, table.to_bytes(&config)?)
        .with_context(|| format!("writing {}", a.out.display()))?;
    let mut sidecar = a.out.with_extension("json");
    if sidecar == a.out {
        sidecar = a.out.with_extension("net.json");
    }
    let dump = serde_json::json!({"config": config, "net": net.dump()});
    fs::write(&sidecar, serde_json::to_vec_pretty(&dump)?)
        .with_context(|| format!("writing {}", sidecar.display()))?;
    Ok(())
}
