use clap::Args;
use rqmc::estimate::{median_estimate, replicate};
use rqmc::integrands::{self, ROBOT_ARM_SEED};
use rqmc::netgen::SchemeKind;
use serde_json::json;

use crate::args::{factories, usage, DirsArg};

#[derive(Args, Debug)]
pub struct ReferenceArgs {
    /// Integrand name, e.g. x33exp, expsum(3), robotarm.
    pub name: String,
    /// Recompute as the median of r RLS replicates (the Robot Arm protocol).
    #[arg(long)]
    pub recompute: bool,
    #[arg(long, default_value_t = 24)]
    pub m: usize,
    #[arg(long = "E", default_value_t = 32)]
    pub e: usize,
    #[arg(long, default_value_t = 9)]
    pub r: usize,
    #[arg(long, default_value_t = ROBOT_ARM_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub dirs: DirsArg,
}

pub fn run(a: &ReferenceArgs) -> anyhow::Result<()> {
    let f = integrands::get(&a.name).map_err(|e| usage(e.to_string()))?;
    let mut out = json!({
        "name": f.name(),
        "s": f.dim(),
        "reference": f.reference(),
    });
    if a.recompute {
        if a.m == 0 || a.m > 32 || a.e < a.m || a.e > 64 || a.r == 0 {
            return Err(usage("need 1 <= m <= 32, m <= E <= 64 and r >= 1"));
        }
        let factory = factories(&[SchemeKind::Rls], &a.dirs)?.remove(0);
        let scheme = factory.build(f.dim(), a.m)?;
        let reps = replicate(&scheme, &f, a.m, a.e, a.r, a.seed)?;
        let values = reps.values();
        out["recomputed"] = json!({
            "median": median_estimate(&reps),
            "replicates": values,
            "spread": values[values.len() - 1] - values[0],
            "m": a.m,
            "E": a.e,
            "r": a.r,
            "seed": a.seed,
            "dirs": factory.source.label(),
        });
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}
