//! TOML run configuration.
//!
//! Every matrix invariant is checked at load time. Validation errors carry
//! the `file:line:column` of the offending key and name the violated
//! invariant together with its residual.

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use oqw_core::walk::VALIDATION_TOL;
use oqw_core::{ComplexMatrix, DensityBlock, LineCoin, C64};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Analytic,
    Classify,
    Compare,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simulate => "simulate",
            Mode::Analytic => "analytic",
            Mode::Classify => "classify",
            Mode::Compare => "compare",
        })
    }
}

/// Numeric engine used by `simulate` and `compare`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Line,
    Graph,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Line => "line",
            Engine::Graph => "graph",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Pass/fail bound on the compare-mode discrepancy.
    pub compare: f64,
    /// Bound on `|B†B + C†C - I|` and on `|Tr ρ₀ - 1|`.
    pub normalization: f64,
    /// Bound on the commutator and normality residuals in analytic modes.
    pub commutation: f64,
    /// Eigenvalue clustering in the joint diagonalization.
    pub cluster: f64,
    /// `|λ|` grouping in the classifier.
    pub grouping: f64,
    /// Distance of `|λ|²` from 0 or 1 that still counts as a soliton.
    pub soliton: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            compare: 1e-10,
            normalization: VALIDATION_TOL,
            commutation: 1e-10,
            cluster: 1e-8,
            grouping: 1e-8,
            soliton: 1e-12,
        }
    }
}

/// A fully validated run description.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub steps: Option<u64>,
    pub engine: Engine,
    pub coin: LineCoin,
    pub node: i64,
    pub initial: DensityBlock,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}:{line}:{column}: {field}: {message}")]
    Invalid {
        path: String,
        line: usize,
        column: usize,
        field: &'static str,
        message: String,
    },
}

type Entries = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    steps: Option<u64>,
    #[serde(default)]
    engine: Engine,
    coin: Spanned<RawCoin>,
    initial: Spanned<RawInitial>,
    #[serde(default)]
    tolerances: RawTolerances,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoin {
    preset: Option<Spanned<String>>,
    theta: Option<Spanned<f64>>,
    theta_pi_fraction: Option<Spanned<[i64; 2]>>,
    b: Option<Spanned<Entries>>,
    c: Option<Spanned<Entries>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(default)]
    node: i64,
    p: Option<f64>,
    q: Option<f64>,
    z: Option<[f64; 2]>,
    rho: Option<Spanned<Entries>>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    compare: Option<Spanned<f64>>,
    normalization: Option<Spanned<f64>>,
    commutation: Option<Spanned<f64>>,
    cluster: Option<Spanned<f64>>,
    grouping: Option<Spanned<f64>>,
    soliton: Option<Spanned<f64>>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
    #[serde(default)]
    format: Format,
}

/// Maps byte spans back to `line:column` for diagnostics.
struct Locator<'a> {
    name: &'a str,
    text: &'a str,
}

impl Locator<'_> {
    fn error(
        &self,
        span: Range<usize>,
        field: &'static str,
        message: impl Into<String>,
    ) -> ConfigError {
        let before = &self.text[..span.start.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
        ConfigError::Invalid {
            path: self.name.to_string(),
            line,
            column,
            field,
            message: message.into(),
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, &path.display().to_string())
}

/// Parse and validate configuration text; `name` labels diagnostics.
pub fn parse_config(text: &str, name: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: name.to_string(),
        message: e.to_string().trim_end().to_string(),
    })?;
    let loc = Locator { name, text };

    let tolerances = tolerances(&raw.tolerances, &loc)?;
    let coin = coin(&raw.coin, tolerances.normalization, &loc)?;
    let (node, initial) = initial(&raw.initial, coin.dim(), tolerances.normalization, &loc)?;

    Ok(RunConfig {
        mode: raw.mode,
        steps: raw.steps,
        engine: raw.engine,
        coin,
        node,
        initial,
        tolerances,
        output: raw.output.path,
        format: raw.output.format,
    })
}

fn tolerances(raw: &RawTolerances, loc: &Locator) -> Result<Tolerances, ConfigError> {
    let mut t = Tolerances::default();
    let fields = [
        (&raw.compare, &mut t.compare, "tolerances.compare"),
        (
            &raw.normalization,
            &mut t.normalization,
            "tolerances.normalization",
        ),
        (
            &raw.commutation,
            &mut t.commutation,
            "tolerances.commutation",
        ),
        (&raw.cluster, &mut t.cluster, "tolerances.cluster"),
        (&raw.grouping, &mut t.grouping, "tolerances.grouping"),
        (&raw.soliton, &mut t.soliton, "tolerances.soliton"),
    ];
    for (value, slot, field) in fields {
        if let Some(v) = value {
            let x = *v.get_ref();
            if !(x.is_finite() && x > 0.0) {
                return Err(loc.error(
                    v.span(),
                    field,
                    format!("tolerance must be positive and finite, got {x}"),
                ));
            }
            *slot = x;
        }
    }
    Ok(t)
}

fn matrix(
    entries: &Spanned<Entries>,
    field: &'static str,
    loc: &Locator,
) -> Result<ComplexMatrix, ConfigError> {
    let rows: Vec<Vec<C64>> = entries
        .get_ref()
        .iter()
        .map(|row| row.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| loc.error(entries.span(), field, e.to_string()))
}

fn coin(raw: &Spanned<RawCoin>, tol: f64, loc: &Locator) -> Result<LineCoin, ConfigError> {
    let c = raw.get_ref();
    match (&c.preset, &c.b, &c.c) {
        (Some(preset), None, None) => {
            if preset.get_ref() != "eq12" {
                return Err(loc.error(
                    preset.span(),
                    "coin.preset",
                    format!(
                        "unknown preset {:?}; the only preset is \"eq12\"",
                        preset.get_ref()
                    ),
                ));
            }
            let theta = match (&c.theta, &c.theta_pi_fraction) {
                (Some(t), None) => *t.get_ref(),
                (None, Some(f)) => {
                    let [num, den] = *f.get_ref();
                    if den == 0 {
                        return Err(loc.error(
                            f.span(),
                            "coin.theta_pi_fraction",
                            "denominator is zero",
                        ));
                    }
                    std::f64::consts::PI * num as f64 / den as f64
                }
                _ => {
                    return Err(loc.error(
                        raw.span(),
                        "coin",
                        "preset \"eq12\" needs exactly one of `theta` or `theta_pi_fraction`",
                    ))
                }
            };
            if !theta.is_finite() {
                return Err(loc.error(raw.span(), "coin.theta", "angle must be finite"));
            }
            Ok(LineCoin::two_level(theta))
        }
        (None, Some(b), Some(cm)) => {
            if c.theta.is_some() || c.theta_pi_fraction.is_some() {
                return Err(loc.error(
                    raw.span(),
                    "coin",
                    "an angle is only meaningful with a preset",
                ));
            }
            let right = matrix(b, "coin.b", loc)?;
            let left = matrix(cm, "coin.c", loc)?;
            if right.dim() != left.dim() {
                return Err(loc.error(
                    cm.span(),
                    "coin.c",
                    format!(
                        "dimension {} does not match coin.b dimension {}",
                        left.dim(),
                        right.dim()
                    ),
                ));
            }
            LineCoin::with_tolerance(right, left, tol).map_err(|e| match e {
                oqw_core::line::LineError::Unnormalized { residual } => loc.error(
                    raw.span(),
                    "coin",
                    format!(
                        "violates B†B + C†C = I: normalization residual {residual:.3e} exceeds tolerance {tol:.1e}"
                    ),
                ),
                other => loc.error(raw.span(), "coin", other.to_string()),
            })
        }
        _ => Err(loc.error(
            raw.span(),
            "coin",
            "give either `preset` or both matrices `b` and `c`",
        )),
    }
}

fn initial(
    raw: &Spanned<RawInitial>,
    dim: usize,
    tol: f64,
    loc: &Locator,
) -> Result<(i64, DensityBlock), ConfigError> {
    let init = raw.get_ref();
    let (matrix, span, field) = match (&init.rho, init.p, init.q) {
        (Some(rho), None, None) if init.z.is_none() => {
            (matrix(rho, "initial.rho", loc)?, rho.span(), "initial.rho")
        }
        (None, Some(p), Some(q)) => {
            let [re, im] = init.z.unwrap_or([0.0, 0.0]);
            let z = C64::new(re, im);
            let rows = vec![vec![C64::new(p, 0.0), z], vec![z.conj(), C64::new(q, 0.0)]];
            let m = ComplexMatrix::from_rows(&rows)
                .map_err(|e| loc.error(raw.span(), "initial", e.to_string()))?;
            (m, raw.span(), "initial")
        }
        _ => {
            return Err(loc.error(
                raw.span(),
                "initial",
                "give either `rho` or the two-level triple `p`, `q` (and optional `z`)",
            ))
        }
    };
    if matrix.dim() != dim {
        return Err(loc.error(
            span,
            field,
            format!(
                "dimension {} does not match coin dimension {dim}",
                matrix.dim()
            ),
        ));
    }
    let trace = matrix.trace();
    let residual = (trace.re - 1.0).abs().max(trace.im.abs());
    if residual > tol {
        return Err(loc.error(
            span,
            field,
            format!(
                "trace {} violates Tr ρ = 1: trace residual {residual:.3e}",
                trace.re
            ),
        ));
    }
    let block = DensityBlock::new(matrix)
        .map_err(|v| loc.error(span, field, format!("not a valid density matrix: {v}")))?;
    Ok((init.node, block))
}
