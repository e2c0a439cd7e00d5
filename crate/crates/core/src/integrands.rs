//! Test integrands with reference values.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::DoubleDouble;

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Directional derivative `(x, h) -> grad f(x) . h`.
pub type Derivative = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Quadrature,
    HighMMedian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub mu: f64,
    /// `mu_true - mu` where known to better than double precision, else 0.
    #[serde(default)]
    pub mu_residual: f64,
    pub provenance: Provenance,
    pub note: String,
}

#[derive(Clone)]
pub struct Integrand {
    name: String,
    s: usize,
    eval: Evaluator,
    derivative: Option<Derivative>,
    reference: Option<Reference>,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("name", &self.name)
            .field("s", &self.s)
            .field("reference", &self.reference)
            .finish()
    }
}

impl Integrand {
    /// Registers an in-process integrand.
    pub fn new<F>(name: impl Into<String>, s: usize, f: F, reference: Option<Reference>) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        assert!(s >= 1, "integrand dimension must be positive");
        Self {
            name: name.into(),
            s,
            eval: Arc::new(f),
            derivative: None,
            reference,
        }
    }

    /// Attaches a directional derivative, used to carry point digits below
    /// the `f64` mantissa into error measurements.
    pub fn with_derivative<D>(mut self, d: D) -> Self
    where
        D: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn derivative(&self) -> Option<&Derivative> {
        self.derivative.as_ref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.eval
    }

    pub fn reference(&self) -> Option<&Reference> {
        self.reference.as_ref()
    }

    pub fn reference_mu(&self) -> Result<f64> {
        self.reference.as_ref().map(|r| r.mu).ok_or_else(|| {
            Error::invalid(format!("integrand `{}` has no reference value", self.name))
        })
    }
}

/// `int_0^1 x^n e^x dx` by the recurrence `I_n = e - n I_{n-1}` run backward
/// (`I_{n-1} = (e - I_n) / n`) in double-double arithmetic from a crude start
/// far above `n`; the start error shrinks by a factor `n` per step.
pub fn xn_exp_moment(n: u32) -> DoubleDouble {
    let start = n + 60;
    let mut i = DoubleDouble::E.div_f64(start as f64 + 1.0);
    for k in (n + 1..=start).rev() {
        i = (DoubleDouble::E - i).div_f64(k as f64);
    }
    i
}

fn reference(mu: DoubleDouble, provenance: Provenance, note: &str) -> Option<Reference> {
    Some(Reference {
        mu: mu.hi,
        mu_residual: mu.lo,
        provenance,
        note: note.into(),
    })
}

/// Robot Arm end-effector distance with link lengths in `[l_min, l_max]`.
pub fn robot_arm(x: &[f64], l_min: f64, l_max: f64) -> f64 {
    let (mut u, mut v, mut angle) = (0.0, 0.0, 0.0);
    for i in 0..4 {
        let length = l_min * (1.0 - x[i]) + l_max * x[i];
        angle += 2.0 * PI * x[i + 4];
        u += length * angle.cos();
        v += length * angle.sin();
    }
    u.hypot(v)
}

pub const ROBOT_ARM_L_MIN: f64 = 1.0;
pub const ROBOT_ARM_L_MAX: f64 = 2.0;

/// Median of 9 RLS replicates at `m = 24`, `E = 32`, builtin direction numbers,
/// master seed 20240917 (replicate streams 0..9); regenerate with
/// `rqmc reference robotarm --recompute --dirs builtin`.
pub const ROBOT_ARM_MU: f64 = 2.744_858_839_838_865_4;

pub const ROBOT_ARM_SEED: u64 = 20240917;

/// Names accepted by [`get`]; `(s)` marks a required dimension argument.
pub const NAMES: &[&str] = &["x33exp", "prodxexp8", "expsum(s)", "prodinv(s)", "robotarm"];

fn parse_dim(name: &str, prefix: &str) -> Option<Result<usize>> {
    let rest = name.strip_prefix(prefix)?;
    let arg = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .or_else(|| rest.strip_prefix(':'))?;
    Some(
        arg.trim()
            .parse::<usize>()
            .ok()
            .filter(|&s| s >= 1)
            .ok_or_else(|| Error::invalid(format!("bad dimension in `{name}`"))),
    )
}

/// Looks up a registered integrand: `x33exp`, `prodxexp8`, `expsum(s)`,
/// `prodinv(s)` or `robotarm`. Dimensions may also be written `expsum:3`.
pub fn get(name: &str) -> Result<Integrand> {
    let key = name.trim().to_ascii_lowercase();
    match key.as_str() {
        "x33exp" => {
            return Ok(Integrand::new(
                "x33exp",
                1,
                |x| x[0].powi(33) * x[0].exp(),
                reference(
                    xn_exp_moment(33),
                    Provenance::Quadrature,
                    "backward recurrence I_n = e - n I_(n-1), cross-checked by Gauss-Legendre",
                ),
            )
            .with_derivative(|x, h| x[0].powi(32) * x[0].exp() * (33.0 + x[0]) * h[0]))
        }
        "prodxexp8" => {
            return Ok(Integrand::new(
                "prodxexp8",
                8,
                |x| x.iter().map(|&t| t * t.exp()).product(),
                reference(
                    DoubleDouble::from_f64(1.0),
                    Provenance::ClosedForm,
                    "int_0^1 x e^x dx = 1 per factor",
                ),
            )
            .with_derivative(|x, h| {
                (0..x.len())
                    .map(|j| {
                        let rest: f64 = (0..x.len()).filter(|&i| i != j).map(|i| x[i] * x[i].exp()).product();
                        h[j] * (1.0 + x[j]) * x[j].exp() * rest
                    })
                    .sum()
            }))
        }
        "robotarm" => {
            return Ok(Integrand::new(
                "robotarm",
                8,
                |x| robot_arm(x, ROBOT_ARM_L_MIN, ROBOT_ARM_L_MAX),
                Some(Reference {
                    mu: ROBOT_ARM_MU,
                    mu_residual: 0.0,
                    provenance: Provenance::HighMMedian,
                    note: format!(
                        "median of 9 RLS replicates, m = 24, E = 32, builtin directions, seed {ROBOT_ARM_SEED}"
                    ),
                }),
            ))
        }
        _ => {}
    }
    if let Some(s) = parse_dim(&key, "expsum") {
        let s = s?;
        return Ok(Integrand::new(
            format!("expsum({s})"),
            s,
            |x| x.iter().sum::<f64>().exp(),
            reference(
                (DoubleDouble::E - DoubleDouble::from_f64(1.0)).powi(s as u32),
                Provenance::ClosedForm,
                "(e - 1)^s",
            ),
        )
        .with_derivative(|x, h| x.iter().sum::<f64>().exp() * h.iter().sum::<f64>()));
    }
    if let Some(s) = parse_dim(&key, "prodinv") {
        let s = s?;
        return Ok(Integrand::new(
            format!("prodinv({s})"),
            s,
            |x| x.iter().map(|&t| 1.0 / (1.0 - 0.5 * t)).product(),
            reference(
                (DoubleDouble::LN_2 * DoubleDouble::from_f64(2.0)).powi(s as u32),
                Provenance::ClosedForm,
                "(2 ln 2)^s",
            ),
        )
        .with_derivative(|x, h| {
            let f: f64 = x.iter().map(|&t| 1.0 / (1.0 - 0.5 * t)).product();
            f * x
                .iter()
                .zip(h)
                .map(|(&t, &d)| 0.5 * d / (1.0 - 0.5 * t))
                .sum::<f64>()
        }));
    }
    Err(Error::UnknownIntegrand(name.to_string()))
}
