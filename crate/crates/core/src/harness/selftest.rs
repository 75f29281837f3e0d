//! Fast battery of structural checks: exact recovery, scaling invariance,
//! completion equivalence, expansion order, feasible-set nesting and the
//! denoising demo.

use std::fmt;

use crate::error::Result;
use crate::estimators::{
    complete_orthogonal, inv_image_transform, ls_image_transform, ls_image_transform_for, Method,
};
use crate::matcore::{relative_error, CMatrix};
use crate::model::{
    mixture_covariance, random_block_rescale, Block, DemixingEstimate, MixingSystem,
    PerturbationDraw,
};
use crate::perturbation::{
    draw_delta_covariance, exact_inv_error_matrix, exact_ls_error_matrix,
    first_order_inv_error_matrix, first_order_ls_error_matrix, DeltaCovMode, PerturbationScenario,
};
use crate::rng::{complex_gaussian_matrix, derive_seed, rng_from_seed};
use crate::separators::surrogate::SurrogateConfig;
use crate::underdetermined::{
    build_blocking_matrix, ls_noise_extract, lsopt_oracle, mmse_oracle, nmse_signals,
    UnderdeterminedMixture,
};

use super::demo::denoise_demo;

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

const INSTANCES: u64 = 20;

type Check = Box<dyn Fn() -> Result<CheckOutcome>>;

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        passed,
        detail,
    }
}

fn random_system(seed: u64) -> Result<MixingSystem> {
    let d = 2 + (derive_seed(seed, 7) % 9) as usize;
    let m = 1 + (derive_seed(seed, 8) % (d as u64 - 1)) as usize;
    MixingSystem::random(d, m, 1.0, seed)
}

fn exact_recovery(seed: u64) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for k in 0..INSTANCES {
        let sys = random_system(derive_seed(seed, k))?;
        let target = sys.image_projector(Block::Target)?;
        let c = mixture_covariance(&sys, &vec![1.0; sys.d()])?;
        let w = sys.demixing()?;
        let inv = inv_image_transform(&w, Block::Target)?;
        let ls = ls_image_transform_for(
            &w.rows_of(Block::Target),
            &c,
            Block::Target,
            Method::LsTheoretical,
        )?;
        worst = worst
            .max(relative_error(&inv.matrix, &target))
            .max(relative_error(&ls.matrix, &target));
    }
    Ok(outcome(
        "exact-recovery",
        worst <= 1e-9,
        format!("worst relative error {worst:.2e} (limit 1e-9)"),
    ))
}

fn scaling_invariance(seed: u64) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for k in 0..INSTANCES {
        let s = derive_seed(seed, k);
        let sys = random_system(s)?;
        let c = mixture_covariance(&sys, &vec![1.0; sys.d()])?;
        let draw = PerturbationDraw::draw(sys.d(), sys.m(), 1e-2, 1e-2, 1.0, derive_seed(s, 1))?;
        let w = DemixingEstimate::new(&sys.demixing()?.w + &draw.xi, sys.m())?;
        let scaled = random_block_rescale(&w, derive_seed(s, 2))?;
        let inv = inv_image_transform(&w, Block::Target)?.matrix;
        let inv_scaled = inv_image_transform(&scaled, Block::Target)?.matrix;
        let ls = ls_image_transform(&w.rows_of(Block::Target), &c)?.matrix;
        let ls_scaled = ls_image_transform(&scaled.rows_of(Block::Target), &c)?.matrix;
        worst = worst
            .max(relative_error(&inv_scaled, &inv))
            .max(relative_error(&ls_scaled, &ls));
    }
    Ok(outcome(
        "scaling-invariance",
        worst <= 1e-10,
        format!("worst relative change {worst:.2e} (limit 1e-10)"),
    ))
}

fn completion_equivalence(seed: u64) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for k in 0..INSTANCES {
        let s = derive_seed(seed, k);
        let sys = random_system(s)?;
        let (d, m) = (sys.d(), sys.m());
        let mut rng = rng_from_seed(derive_seed(s, 1));
        let w1 = complex_gaussian_matrix(&mut rng, m, d, 1.0);
        let a = complex_gaussian_matrix(&mut rng, d, 2 * d, 1.0);
        let chat = a.gram().scale_real(0.5 / d as f64).hermitian_part();
        let full = complete_orthogonal(&w1, &chat)?;
        let inv = inv_image_transform(&full, Block::Target)?.matrix;
        let ls = ls_image_transform(&w1, &chat)?.matrix;
        worst = worst.max(relative_error(&inv, &ls));
    }
    Ok(outcome(
        "completion-equivalence",
        worst <= 1e-8,
        format!("worst relative difference {worst:.2e} (limit 1e-8)"),
    ))
}

fn expansion_order(seed: u64) -> Result<CheckOutcome> {
    let (d, m) = (6, 2);
    let mut ratios = Vec::new();
    for k in 0..INSTANCES / 2 {
        let s = derive_seed(seed, k);
        let sys = MixingSystem::random(d, m, 1.0, s)?;
        let h = sys.h();
        let w1 = sys.demixing()?.rows_of(Block::Target);
        let c = h.gram();
        let cs1 = CMatrix::identity(m);
        let unit = PerturbationDraw::draw(d, m, 1.0, 1.0, 1.0, derive_seed(s, 1))?.xi;
        let scenario = PerturbationScenario {
            d,
            m,
            sigma1_sq: 1.0,
            sigma2_sq: 1.0,
            lambda1_sq: 0.0,
            lambda2_sq: 0.0,
            c_cov: 1.0,
            n_samples: 0,
        };
        let dc_unit = draw_delta_covariance(&scenario, DeltaCovMode::Hermitian, derive_seed(s, 2))?;
        let residual = |eps: f64| -> Result<(f64, f64)> {
            let xi = unit.scale_real(eps);
            let xi1 = xi.rows_range(0, m);
            let dc = dc_unit.scale_real(eps);
            let inv = &exact_inv_error_matrix(h, &xi, m)?
                - &first_order_inv_error_matrix(h, &w1, &xi, m)?;
            let ls = &exact_ls_error_matrix(h, &xi1, &c, &dc, m)?
                - &first_order_ls_error_matrix(h, &w1, &xi1, &dc, &c, &cs1, m)?;
            Ok((inv.frobenius_norm(), ls.frobenius_norm()))
        };
        let (coarse, fine) = (residual(1e-2)?, residual(5e-3)?);
        ratios.push(coarse.0 / fine.0);
        ratios.push(coarse.1 / fine.1);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    Ok(outcome(
        "expansion-order",
        lo >= 3.0 && hi <= 5.0,
        format!("residual shrink per halving in [{lo:.2}, {hi:.2}] (required [3, 5])"),
    ))
}

fn feasible_set_nesting(seed: u64) -> Result<CheckOutcome> {
    let mut violations = 0;
    for k in 0..INSTANCES {
        let s = derive_seed(seed, k);
        let mix = UnderdeterminedMixture::generate(4, 1, 2000, s)?;
        let w = build_blocking_matrix(&mix.h1, 1e-4, derive_seed(s, 9))?;
        let chat = mix.x.data().gram().scale_real(1.0 / 2000.0);
        let ls = nmse_signals(&mix.s2, &ls_noise_extract(&w, &chat, &mix.x)?)?;
        let lsopt = nmse_signals(&mix.s2, &lsopt_oracle(&w, &mix.x, &mix.s2)?)?;
        let mmse = nmse_signals(&mix.s2, &mmse_oracle(&mix.x, &mix.s2)?)?;
        if !(mmse <= lsopt && lsopt <= ls) {
            violations += 1;
        }
    }
    Ok(outcome(
        "feasible-set-nesting",
        violations == 0,
        format!("MMSE <= LSOPT <= LS violated on {violations} of {INSTANCES} instances"),
    ))
}

fn denoising() -> Result<CheckOutcome> {
    let r = denoise_demo(&SurrogateConfig::default())?;
    let (pca, ica) = (
        r.reduction_db(r.power_pca_ls),
        r.reduction_db(r.power_fastica_ls),
    );
    Ok(outcome(
        "denoising-demo",
        pca >= 20.0 && ica >= 20.0 && r.ls_inv_mismatch <= 1e-9,
        format!(
            "reduction PCA+LS {pca:.1} dB, FastICA+LS {ica:.1} dB (>= 20), LS vs INV {:.1e} (<= 1e-9)",
            r.ls_inv_mismatch
        ),
    ))
}

/// Runs every check; an error inside a check is reported as its failure.
pub fn run_selftest(seed: u64) -> Vec<CheckOutcome> {
    let checks: [(&'static str, Check); 6] = [
        (
            "exact-recovery",
            Box::new(move || exact_recovery(derive_seed(seed, 1))),
        ),
        (
            "scaling-invariance",
            Box::new(move || scaling_invariance(derive_seed(seed, 2))),
        ),
        (
            "completion-equivalence",
            Box::new(move || completion_equivalence(derive_seed(seed, 3))),
        ),
        (
            "expansion-order",
            Box::new(move || expansion_order(derive_seed(seed, 4))),
        ),
        (
            "feasible-set-nesting",
            Box::new(move || feasible_set_nesting(derive_seed(seed, 5))),
        ),
        ("denoising-demo", Box::new(denoising)),
    ];
    checks
        .into_iter()
        .map(|(name, check)| {
            check().unwrap_or_else(|e| outcome(name, false, format!("error: {e}")))
        })
        .collect()
}
