//! One trial of the underdetermined model.
//!
//! Every estimator here is a `d×d` transform `T` of the observations, so its
//! NMSE only needs `XXᴴ`, `S₂Xᴴ` and `‖S₂‖²`:
//! `‖S₂ − TX‖² = ‖S₂‖² − 2·Re tr(T·XS₂ᴴ) + tr(T·XXᴴ·Tᴴ)`.
//! These are formed once per trial and the `N`-length signals are never
//! touched again across the λ grid.

use crate::error::{Error, Result};
use crate::estimators::{ls_image_transform_for, Method};
use crate::matcore::{orthonormal_null_basis, CMatrix, LuFactor, C64};
use crate::model::{generate_gaussian_batch, Block};
use crate::rng::{complex_gaussian_matrix, rng_from_seed, trial_seed};
use crate::underdetermined::UnderdeterminedMixture;

use super::{
    is_numerical, soften, stream_seed, Estimator, GridPoint, PointMetrics, ScenarioConfig, Stream,
};

/// Second-order statistics sufficient to score any linear transform of `X`.
pub(crate) struct NoiseStats {
    /// `XXᴴ`
    xx: CMatrix,
    /// `S₂Xᴴ`
    sx: CMatrix,
    /// `‖S₂‖²`
    ss: f64,
}

impl NoiseStats {
    pub(crate) fn new(mix: &UnderdeterminedMixture) -> Self {
        let x = mix.x.data();
        Self {
            xx: x.gram(),
            sx: mix.s2.data().mul_adjoint(x),
            ss: mix.s2.data().frobenius_norm_sq(),
        }
    }

    /// `‖S₂ − T·X‖² / ‖S₂‖²`.
    pub(crate) fn nmse(&self, t: &CMatrix) -> Result<f64> {
        if self.ss == 0.0 {
            return Err(Error::ZeroReference);
        }
        let cross: f64 = t
            .as_slice()
            .iter()
            .zip(self.sx.as_slice())
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        let txx = t.try_dot(&self.xx)?;
        let quad: f64 = txx
            .as_slice()
            .iter()
            .zip(t.as_slice())
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        // clamp rounding below zero; the true value is a squared norm
        Ok(((self.ss - 2.0 * cross + quad) / self.ss).max(0.0))
    }

    /// `S₂Xᴴ(XXᴴ)⁻¹`.
    pub(crate) fn mmse(&self) -> Result<CMatrix> {
        Ok(LuFactor::new(&self.xx)?
            .solve(&self.sx.adjoint())?
            .adjoint())
    }

    /// `Q*·W` with `Q* = S₂(WX)ᴴ(WX(WX)ᴴ)⁻¹`.
    pub(crate) fn lsopt(&self, w: &CMatrix) -> Result<CMatrix> {
        let gram = w.dot(&self.xx).mul_adjoint(w).hermitian_part();
        // Q*ᴴ = G⁻¹·W·XS₂ᴴ
        let q_adj = LuFactor::new(&gram)?.solve(&w.dot(&self.sx.adjoint()))?;
        Ok(q_adj.adjoint().dot(w))
    }
}

pub(super) fn run_trial(
    cfg: &ScenarioConfig,
    d: usize,
    n: usize,
    trial: usize,
) -> Result<Vec<PointMetrics>> {
    let seed = trial_seed(cfg.seed, trial as u64);
    let var = cfg.variance_convention.element_variance();
    let method = if cfg.exact_covariance {
        Method::LsTheoretical
    } else {
        Method::LsEmpirical
    };
    let s2 = generate_gaussian_batch(d, n, var, stream_seed(seed, Stream::Sources, d, n))?;

    let mut out = Vec::new();
    for &m in &cfg.m {
        let h1 = complex_gaussian_matrix(
            &mut rng_from_seed(stream_seed(seed, Stream::Mixing, d, m)),
            d,
            m,
            var,
        );
        let s1 =
            generate_gaussian_batch(m, n, var, stream_seed(seed, Stream::TargetSources, m, n))?;
        let points = cfg.lambda1_sq.iter().map(|&lambda1_sq| GridPoint {
            d,
            m,
            n,
            lambda1_sq,
            lambda2_sq: 0.0,
        });
        let prepared = UnderdeterminedMixture::new(h1, s1, s2.clone()).and_then(|mix| {
            let basis = orthonormal_null_basis(&mix.h1.adjoint())?;
            Ok((mix, basis))
        });
        let (mix, basis) = match prepared {
            Ok(v) => v,
            Err(e) if is_numerical(&e) => {
                out.extend(
                    points.map(|p| (p, cfg.estimators.iter().map(|&e| (e, None)).collect())),
                );
                continue;
            }
            Err(e) => return Err(e),
        };
        let stats = NoiseStats::new(&mix);
        let cov = if cfg.exact_covariance {
            let mut c = mix.h1.gram().scale_real(var);
            for i in 0..d {
                c.row_mut(i)[i] += C64::new(var, 0.0);
            }
            c.hermitian_part()
        } else {
            stats.xx.scale_real(1.0 / n as f64).hermitian_part()
        };
        let mmse = if cfg.estimators.contains(&Estimator::Mmse) {
            Some(soften(stats.mmse().and_then(|t| stats.nmse(&t)))?)
        } else {
            None
        };
        let unit = complex_gaussian_matrix(
            &mut rng_from_seed(stream_seed(seed, Stream::Perturbation, d, m)),
            d - m,
            d,
            var,
        );
        for point in points {
            let w = &basis + &unit.scale_real(point.lambda1_sq.sqrt());
            let mut metrics = Vec::with_capacity(cfg.estimators.len());
            for &est in &cfg.estimators {
                let value = match est {
                    Estimator::Ls => soften(
                        ls_image_transform_for(&w, &cov, Block::Interference, method)
                            .and_then(|t| stats.nmse(&t.matrix)),
                    )?,
                    Estimator::Lsopt => soften(stats.lsopt(&w).and_then(|t| stats.nmse(&t)))?,
                    Estimator::Mmse => mmse.flatten(),
                    _ => unreachable!("rejected by validation"),
                };
                metrics.push((est, value));
            }
            out.push((point, metrics));
        }
    }
    Ok(out)
}
