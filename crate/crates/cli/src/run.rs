//! Mode dispatch over the numeric and closed-form engines.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use oqw_core::analytic::AnalyticError;
use oqw_core::linalg::{joint_eigendecomposition_with, LinalgError, SpectralConfig};
use oqw_core::line::{evolve_line, LineError};
use oqw_core::walk::WalkError;
use oqw_core::{
    analytic_distribution, classify_spectrum, evolve, initial_projections, position_distribution,
    ClassifyTolerances, ComponentKind, LineOptions, LineState, NodeId, WalkState,
};
use serde::Serialize;
use thiserror::Error;

use crate::config::{Engine, Mode, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("mode {0} needs `steps` (in the config or via --steps)")]
    MissingSteps(Mode),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Line(#[from] LineError),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

/// One classified component with its moments at the reported `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub weight: f64,
    pub lambda_abs2: f64,
    pub phi_abs2: f64,
    pub mean_per_step: f64,
    pub mean: f64,
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub rows: Vec<(i64, f64, f64)>,
    pub discrepancy: f64,
    pub tolerance: f64,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.discrepancy <= self.tolerance
    }
}

/// Everything a run produced. Fields not computed by a mode are `None`.
#[derive(Clone, Debug)]
pub struct Report {
    pub mode: Mode,
    pub n: u64,
    pub engine: Option<Engine>,
    pub probabilities: Option<BTreeMap<i64, f64>>,
    pub components: Option<Vec<Component>>,
    pub comparison: Option<Comparison>,
    pub total_trace: Option<f64>,
    pub elapsed: Duration,
}

pub fn run(cfg: &RunConfig, mode: Mode) -> Result<Report, RunError> {
    let n = match (mode, cfg.steps) {
        (_, Some(n)) => n,
        (Mode::Classify, None) => 1,
        (m, None) => return Err(RunError::MissingSteps(m)),
    };
    let started = Instant::now();
    let mut report = Report {
        mode,
        n,
        engine: None,
        probabilities: None,
        components: None,
        comparison: None,
        total_trace: None,
        elapsed: Duration::ZERO,
    };
    match mode {
        Mode::Simulate => {
            let (p, trace) = numeric(cfg, n)?;
            report.engine = Some(cfg.engine);
            report.probabilities = Some(p);
            report.total_trace = Some(trace);
        }
        Mode::Analytic => {
            let (p, comps) = analytic(cfg, n)?;
            report.total_trace = Some(p.values().sum());
            report.probabilities = Some(p);
            report.components = Some(comps);
        }
        Mode::Classify => {
            report.components = Some(analytic_components(cfg, n)?);
        }
        Mode::Compare => {
            let (analytic_p, comps) = analytic(cfg, n)?;
            let (numeric_p, trace) = numeric(cfg, n)?;
            report.engine = Some(cfg.engine);
            report.total_trace = Some(trace);
            report.components = Some(comps);
            report.comparison = Some(compare(&numeric_p, &analytic_p, cfg.tolerances.compare));
        }
    }
    report.elapsed = started.elapsed();
    Ok(report)
}

/// Distribution on every parity-allowed site of `[node - n, node + n]`.
fn numeric(cfg: &RunConfig, n: u64) -> Result<(BTreeMap<i64, f64>, f64), RunError> {
    match cfg.engine {
        Engine::Line => {
            let state = LineState::new(cfg.node, &cfg.initial)?;
            let state = evolve_line(&state, &cfg.coin, n, &LineOptions::default())?;
            Ok((state.position_distribution(), state.total_trace()))
        }
        Engine::Graph => {
            let reach = n as i64;
            let t = cfg
                .coin
                .to_transition_set(cfg.node - reach, cfg.node + reach);
            let state = WalkState::localized(NodeId(cfg.node), cfg.initial.clone())?;
            let state = evolve(&state, &t, n)?;
            let occupied = position_distribution(&state);
            let p = (0..=reach)
                .map(|m| {
                    let k = cfg.node - reach + 2 * m;
                    (k, occupied.get(&NodeId(k)).copied().unwrap_or(0.0))
                })
                .collect();
            Ok((p, state.total_trace()))
        }
    }
}

fn spectral_config(cfg: &RunConfig) -> SpectralConfig {
    SpectralConfig {
        tol: cfg.tolerances.commutation,
        cluster_tol: cfg.tolerances.cluster,
        ..SpectralConfig::default()
    }
}

fn classify_tolerances(cfg: &RunConfig) -> ClassifyTolerances {
    ClassifyTolerances {
        grouping: cfg.tolerances.grouping,
        soliton: cfg.tolerances.soliton,
        ..ClassifyTolerances::default()
    }
}

fn analytic(cfg: &RunConfig, n: u64) -> Result<(BTreeMap<i64, f64>, Vec<Component>), RunError> {
    let decomp =
        joint_eigendecomposition_with(cfg.coin.right(), cfg.coin.left(), &spectral_config(cfg))?;
    let weights = initial_projections(&decomp, &cfg.initial)?;
    let profile = analytic_distribution(&decomp, &weights, n)?;
    let specs = classify_spectrum(&decomp, &weights, &classify_tolerances(cfg))?;
    let p = profile
        .probabilities
        .into_iter()
        .map(|(k, v)| (k + cfg.node, v))
        .collect();
    Ok((p, components(&specs, n)))
}

fn analytic_components(cfg: &RunConfig, n: u64) -> Result<Vec<Component>, RunError> {
    let decomp =
        joint_eigendecomposition_with(cfg.coin.right(), cfg.coin.left(), &spectral_config(cfg))?;
    let weights = initial_projections(&decomp, &cfg.initial)?;
    let specs = classify_spectrum(&decomp, &weights, &classify_tolerances(cfg))?;
    Ok(components(&specs, n))
}

fn components(specs: &[oqw_core::ComponentSpec], n: u64) -> Vec<Component> {
    specs
        .iter()
        .map(|s| Component {
            kind: s.kind,
            weight: s.weight,
            lambda_abs2: s.lambda_abs2,
            phi_abs2: s.phi_abs2,
            mean_per_step: s.mean_per_step(),
            mean: s.mean(n),
            spread: s.spread(n),
        })
        .collect()
}

/// Pointwise comparison over the union of sites; a missing site counts as 0.
pub fn compare(
    numeric: &BTreeMap<i64, f64>,
    analytic: &BTreeMap<i64, f64>,
    tolerance: f64,
) -> Comparison {
    let mut sites: Vec<i64> = numeric.keys().chain(analytic.keys()).copied().collect();
    sites.sort_unstable();
    sites.dedup();
    let rows: Vec<(i64, f64, f64)> = sites
        .into_iter()
        .map(|k| {
            (
                k,
                numeric.get(&k).copied().unwrap_or(0.0),
                analytic.get(&k).copied().unwrap_or(0.0),
            )
        })
        .collect();
    let discrepancy = rows
        .iter()
        .map(|&(_, a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Comparison {
        rows,
        discrepancy,
        tolerance,
    }
}
