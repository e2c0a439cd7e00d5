//! Shared flag types and parsing helpers.

use std::fmt;
use std::path::PathBuf;

use clap::Args;
use rqmc::kindex::LAMBDA;
use rqmc::netgen::{DirectionSource, SchemeFactory, SchemeKind};
use serde::Serialize;

/// A bad flag combination; reported like a clap usage error (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Where generating matrices come from, as given on the command line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirsSpec {
    Builtin,
    Identity,
    File(PathBuf),
}

impl std::str::FromStr for DirsSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "" => Err("empty direction source".into()),
            "builtin" => Ok(DirsSpec::Builtin),
            "identity" => Ok(DirsSpec::Identity),
            path => Ok(DirsSpec::File(PathBuf::from(path))),
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct DirsArg {
    /// Direction numbers: `builtin` (8 bundled dimensions), `identity`, or a
    /// Joe-Kuo style file. Required for rls and shift.
    #[arg(long, env = "RQMC_DIRECTION_FILE")]
    pub dirs: Option<DirsSpec>,
}

impl DirsArg {
    /// Resolves the direction source; CRD needs none.
    pub fn source(&self, kinds: &[SchemeKind]) -> anyhow::Result<DirectionSource> {
        let needs = kinds.iter().any(|k| *k != SchemeKind::Crd);
        match &self.dirs {
            None if needs => Err(usage(
                "rls and shift need direction numbers: pass --dirs builtin|identity|FILE \
                 or set RQMC_DIRECTION_FILE",
            )),
            None | Some(DirsSpec::Builtin) => Ok(DirectionSource::Builtin),
            Some(DirsSpec::Identity) => Ok(DirectionSource::Identity),
            Some(DirsSpec::File(path)) => DirectionSource::from_file(path).map_err(|e| {
                usage(format!(
                    "cannot read direction file {}: {e}",
                    path.display()
                ))
            }),
        }
    }

    pub fn input_file(&self) -> Option<&PathBuf> {
        match &self.dirs {
            Some(DirsSpec::File(p)) => Some(p),
            _ => None,
        }
    }
}

pub fn factories(kinds: &[SchemeKind], dirs: &DirsArg) -> anyhow::Result<Vec<SchemeFactory>> {
    let source = dirs.source(kinds)?;
    Ok(kinds
        .iter()
        .map(|&k| SchemeFactory::new(k, source.clone()))
        .collect())
}

/// Parses `a..b` (inclusive), `a..b:step` or a comma list such as `2,4,8`.
pub fn parse_m_list(text: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("bad m list `{text}`; use e.g. 1..8, 0..12:2 or 2,4,8");
    let list = if let Some((lo, rest)) = text.split_once("..") {
        let (hi, step) = rest.split_once(':').unwrap_or((rest, "1"));
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        let step: usize = step.trim().parse().map_err(|_| bad())?;
        if step == 0 || hi < lo {
            return Err(bad());
        }
        (lo..=hi).step_by(step).collect()
    } else {
        text.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?
    };
    if list.is_empty() {
        return Err(bad());
    }
    Ok(list)
}

/// Prints a warning when `E` is below `lambda m^2 / s`, the precision the
/// median convergence theory asks for.
pub fn warn_precision(e: usize, m: usize, s: usize) {
    let need = LAMBDA * (m * m) as f64 / s as f64;
    if (e as f64) < need {
        eprintln!(
            "warning: E = {e} is below lambda m^2 / s = {need:.1} for m = {m}, s = {s}; \
             truncation error may dominate"
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_lists() {
        assert_eq!(parse_m_list("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_m_list("0..12:4").unwrap(), vec![0, 4, 8, 12]);
        assert_eq!(parse_m_list("2, 8").unwrap(), vec![2, 8]);
        assert!(parse_m_list("4..1").is_err());
        assert!(parse_m_list("x").is_err());
    }

    #[test]
    fn dirs_resolution() {
        let none = DirsArg { dirs: None };
        assert!(none.source(&[SchemeKind::Crd]).is_ok());
        assert!(none.source(&[SchemeKind::Rls]).is_err());
        let id = DirsArg {
            dirs: Some("identity".parse().unwrap()),
        };
        assert_eq!(id.source(&[SchemeKind::Shift]).unwrap().label(), "identity");
    }
}
