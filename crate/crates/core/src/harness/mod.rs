//! Monte Carlo scenario runner.
//!
//! A scenario is a grid over `(d, m, N, λ₁², λ₂²)` and a set of estimators.
//! Every trial draws its randomness from `trial_seed(seed, trial)` and
//! derives per-quantity streams from it, so the same trial sees the same
//! sources, mixing matrix, perturbation pattern and scalings at every grid
//! point (common random numbers) and results do not depend on thread count.

pub mod config;
pub mod output;
pub mod selftest;

mod demo;
mod determined;
mod noise;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::ImageTransform;
use crate::matcore::CMatrix;
use crate::rng::derive_seed;

pub use config::{Estimator, ModelKind, ScenarioConfig, ScenarioKind};
pub use demo::{denoise_demo, DenoiseReport};
pub use output::{
    emit_results, format_results, parse_results, read_results, ResultRow, CSV_HEADER,
};

/// Coordinates of one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub lambda1_sq: f64,
    pub lambda2_sq: f64,
}

/// Metrics of one trial at one grid point; `None` marks a numerical failure.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub point: GridPoint,
    pub trial: usize,
    pub metrics: Vec<(Estimator, Option<f64>)>,
    /// Wall time of the whole trial at this `(d, N)`.
    pub elapsed: Duration,
}

type PointMetrics = (GridPoint, Vec<(Estimator, Option<f64>)>);

/// `‖target − T‖²_F / ‖target‖²_F` with `target = H₁W₁`.
pub fn nmse_transform(target: &CMatrix, t: &ImageTransform) -> Result<f64> {
    let reference = target.frobenius_norm_sq();
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    if target.shape() != t.matrix.shape() {
        return Err(Error::dims("transform and target differ in shape"));
    }
    Ok((target - &t.matrix).frobenius_norm_sq() / reference)
}

/// Failures that count against a trial rather than aborting the run.
pub(crate) fn is_numerical(e: &Error) -> bool {
    matches!(
        e,
        Error::SingularMatrix { .. }
            | Error::RankDeficient(_)
            | Error::DegenerateScaling(_)
            | Error::DegenerateCompletion(_)
            | Error::DegenerateMixing { .. }
            | Error::NonFinite
            | Error::ConvergenceFailure { .. }
    )
}

/// Maps numerical failures to `None`, passes other errors through.
pub(crate) fn soften(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if is_numerical(&e) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy)]
#[repr(u64)]
pub(crate) enum Stream {
    Sources = 1,
    TargetSources = 2,
    Mixing = 3,
    Perturbation = 4,
    Scaling = 5,
}

/// Seed of one random quantity of a trial, indexed by the dimensions it
/// depends on.
pub(crate) fn stream_seed(trial_seed: u64, stream: Stream, a: usize, b: usize) -> u64 {
    derive_seed(
        derive_seed(derive_seed(trial_seed, stream as u64), a as u64),
        b as u64,
    )
}

fn points_for(cfg: &ScenarioConfig, d: usize, n: usize) -> Vec<GridPoint> {
    let lambda2: &[f64] = match cfg.model {
        ModelKind::Determined => &cfg.lambda2_sq,
        _ => &[0.0],
    };
    let mut out = Vec::new();
    for &m in &cfg.m {
        for &lambda2_sq in lambda2 {
            for &lambda1_sq in &cfg.lambda1_sq {
                out.push(GridPoint {
                    d,
                    m,
                    n,
                    lambda1_sq,
                    lambda2_sq,
                });
            }
        }
    }
    out
}

pub(crate) fn all_failed(cfg: &ScenarioConfig, d: usize, n: usize) -> Vec<PointMetrics> {
    points_for(cfg, d, n)
        .into_iter()
        .map(|p| (p, cfg.estimators.iter().map(|&e| (e, None)).collect()))
        .collect()
}

/// Runs every trial of a trial-based scenario and returns per-trial records
/// ordered by `(d, N, trial, grid point)`.
pub fn run_trials(cfg: &ScenarioConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let trial_fn: fn(&ScenarioConfig, usize, usize, usize) -> Result<Vec<PointMetrics>> =
        match cfg.model {
            ModelKind::Determined => determined::run_trial,
            ModelKind::Underdetermined => noise::run_trial,
            ModelKind::Denoise => {
                return Err(Error::InvalidScenario(
                    "the denoise demo has no Monte Carlo trials".into(),
                ));
            }
        };
    let mut records = Vec::new();
    for &d in &cfg.d {
        for &n in &cfg.n {
            let outcomes: Vec<Result<(Vec<PointMetrics>, Duration)>> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let start = Instant::now();
                    trial_fn(cfg, d, n, trial).map(|p| (p, start.elapsed()))
                })
                .collect();
            for (trial, outcome) in outcomes.into_iter().enumerate() {
                let (points, elapsed) = outcome?;
                records.extend(points.into_iter().map(|(point, metrics)| TrialRecord {
                    point,
                    trial,
                    metrics,
                    elapsed,
                }));
            }
        }
    }
    Ok(records)
}

type RowKey = (usize, usize, usize, u64, u64, Estimator);

/// Averages per-trial metrics in the linear domain.
///
/// Failed trials are dropped from a grid point's mean as long as they stay
/// below 0.1% of the trials; otherwise the run is rejected.
pub fn aggregate(cfg: &ScenarioConfig, records: &[TrialRecord]) -> Result<Vec<ResultRow>> {
    let mut groups: HashMap<RowKey, (GridPoint, Vec<f64>, usize)> = HashMap::new();
    for rec in records {
        let p = rec.point;
        for &(est, value) in &rec.metrics {
            let key = (
                p.d,
                p.m,
                p.n,
                p.lambda1_sq.to_bits(),
                p.lambda2_sq.to_bits(),
                est,
            );
            let entry = groups.entry(key).or_insert_with(|| (p, Vec::new(), 0));
            match value {
                Some(v) => entry.1.push(v),
                None => entry.2 += 1,
            }
        }
    }
    let mut rows = Vec::with_capacity(groups.len());
    for ((.., est), (p, values, failed)) in groups {
        let trials = values.len() + failed;
        if failed > 0 && failed * 1000 >= trials {
            return Err(Error::FailureRateExceeded { failed, trials });
        }
        let (mean, db, stderr_db) = output::summarize(&values);
        rows.push(ResultRow {
            scenario: cfg.kind.label().to_owned(),
            d: p.d,
            m: p.m,
            n: p.n,
            lambda1_sq: p.lambda1_sq,
            lambda2_sq: p.lambda2_sq,
            estimator: est.label().to_owned(),
            trials: values.len(),
            mean_nmse_linear: mean,
            mean_nmse_db: db,
            stderr_db,
        });
    }
    rows.sort_by(ResultRow::canonical_cmp);
    Ok(rows)
}

/// Runs a scenario on the current rayon pool and returns sorted rows.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    match cfg.model {
        ModelKind::Denoise => {
            cfg.validate()?;
            demo::rows(cfg)
        }
        _ => aggregate(cfg, &run_trials(cfg)?),
    }
}

/// [`run_scenario`] on a dedicated pool of `threads` workers.
pub fn run_scenario_with_threads(cfg: &ScenarioConfig, threads: usize) -> Result<Vec<ResultRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| run_scenario(cfg))
}
