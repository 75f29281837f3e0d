//! One trial of the determined model at every `(m, λ₁², λ₂²)` of a `(d, N)`.

use crate::error::Result;
use crate::estimators::{inv_image_transform, ls_image_transform_for, Method};
use crate::matcore::{CMatrix, LuFactor};
use crate::model::{
    generate_gaussian_batch, perturb_demixing, random_block_rescale, sample_covariance, Block,
    DemixingEstimate, MixingSystem, PerturbationDraw,
};
use crate::perturbation::{predicted_mse_inv, predicted_mse_ls, PerturbationScenario};
use crate::rng::{complex_gaussian_matrix, rng_from_seed, trial_seed};

use super::{
    all_failed, is_numerical, nmse_transform, soften, stream_seed, Estimator, GridPoint,
    PointMetrics, ScenarioConfig, Stream,
};

pub(super) fn run_trial(
    cfg: &ScenarioConfig,
    d: usize,
    n: usize,
    trial: usize,
) -> Result<Vec<PointMetrics>> {
    let seed = trial_seed(cfg.seed, trial as u64);
    let var = cfg.variance_convention.element_variance();

    let h = if cfg.identity_mixing {
        CMatrix::identity(d)
    } else {
        match MixingSystem::random(d, 1, var, stream_seed(seed, Stream::Mixing, d, 0)) {
            Ok(sys) => sys.h().clone(),
            Err(e) if is_numerical(&e) => return Ok(all_failed(cfg, d, n)),
            Err(e) => return Err(e),
        }
    };
    let (cov, method) = if cfg.exact_covariance {
        (
            h.gram().scale_real(var).hermitian_part(),
            Method::LsTheoretical,
        )
    } else {
        let s = generate_gaussian_batch(d, n, var, stream_seed(seed, Stream::Sources, d, n))?;
        // Ĉ = H·(SSᴴ/N)·Hᴴ, the sample covariance of X = H·S
        let cs = sample_covariance(&s);
        let cov = if cfg.identity_mixing {
            cs
        } else {
            h.dot(&cs).mul_adjoint(&h).hermitian_part()
        };
        (cov, Method::LsEmpirical)
    };
    let w = match LuFactor::new(&h) {
        Ok(lu) => lu.inverse(),
        Err(e) if is_numerical(&e) => return Ok(all_failed(cfg, d, n)),
        Err(e) => return Err(e),
    };
    let unit = complex_gaussian_matrix(
        &mut rng_from_seed(stream_seed(seed, Stream::Perturbation, d, 0)),
        d,
        d,
        var,
    );

    let mut out = Vec::new();
    for &m in &cfg.m {
        let target = h.cols_range(0, m).dot(&w.rows_range(0, m));
        let exact = DemixingEstimate::new(w.clone(), m)?;
        let scaling_seed = stream_seed(seed, Stream::Scaling, d, m);
        for &lambda2_sq in &cfg.lambda2_sq {
            for &lambda1_sq in &cfg.lambda1_sq {
                let point = GridPoint {
                    d,
                    m,
                    n,
                    lambda1_sq,
                    lambda2_sq,
                };
                let estimate = PerturbationDraw::from_unit(&unit, m, lambda1_sq, lambda2_sq)
                    .and_then(|draw| perturb_demixing(&exact, &draw))
                    .and_then(|west| {
                        if cfg.rescale {
                            random_block_rescale(&west, scaling_seed)
                        } else {
                            Ok(west)
                        }
                    });
                let estimate = match estimate {
                    Ok(west) => Some(west),
                    Err(e) if is_numerical(&e) => None,
                    Err(e) => return Err(e),
                };
                let mut metrics = Vec::with_capacity(cfg.estimators.len());
                for &est in &cfg.estimators {
                    let value = match est {
                        Estimator::Inv => match &estimate {
                            Some(west) => soften(
                                inv_image_transform(west, Block::Target)
                                    .and_then(|t| nmse_transform(&target, &t)),
                            )?,
                            None => None,
                        },
                        Estimator::Ls => match &estimate {
                            Some(west) => soften(
                                ls_image_transform_for(
                                    &west.rows_of(Block::Target),
                                    &cov,
                                    Block::Target,
                                    method,
                                )
                                .and_then(|t| nmse_transform(&target, &t)),
                            )?,
                            None => None,
                        },
                        Estimator::InvPred | Estimator::LsPred => {
                            let scenario =
                                prediction_scenario(d, m, n, var, lambda1_sq, lambda2_sq);
                            let mse = if est == Estimator::InvPred {
                                predicted_mse_inv(&scenario)?
                            } else {
                                predicted_mse_ls(&scenario)?
                            };
                            Some(mse / target.frobenius_norm_sq())
                        }
                        Estimator::Lsopt | Estimator::Mmse => {
                            unreachable!("rejected by validation")
                        }
                    };
                    metrics.push((est, value));
                }
                out.push((point, metrics));
            }
        }
    }
    Ok(out)
}

/// Closed-form inputs matching what a trial actually draws: sources and
/// perturbation entries both carry the convention's element variance, and
/// covariance estimation error is not modelled.
fn prediction_scenario(
    d: usize,
    m: usize,
    n: usize,
    var: f64,
    lambda1_sq: f64,
    lambda2_sq: f64,
) -> PerturbationScenario {
    PerturbationScenario {
        d,
        m,
        sigma1_sq: var,
        sigma2_sq: var,
        lambda1_sq: var * lambda1_sq,
        lambda2_sq: var * lambda2_sq,
        c_cov: 0.0,
        n_samples: n,
    }
}
