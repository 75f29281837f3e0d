//! First-order error analysis of the two estimators.
//!
//! With the exact demixing matrix `W = H⁻¹` perturbed to `W + Ξ` and the
//! covariance to `C + ΔC`, the transform errors `H₁W₁ − T` expand to first
//! order as
//!
//! * INV: `H·Ξ·H₁·W₁ − H₁·Ξ₁`
//! * LS:  `H₁(Ξ₁CW₁ᴴ + W₁CΞ₁ᴴ)C₁⁻¹W₁ + (H₁W₁ − I)ΔC·W₁ᴴC₁⁻¹W₁ − H₁Ξ₁ − CΞ₁ᴴC₁⁻¹W₁`
//!
//! where `C₁` is the covariance of the first source block. The matrix-valued
//! forms are exposed alongside their squared norms so that the expansion can
//! be checked against exact errors computed by [`crate::estimators`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{inv_image_transform, ls_image_transform};
use crate::matcore::{CMatrix, LuFactor, C64};
use crate::model::{Block, DemixingEstimate, MixingSystem};
use crate::rng::{complex_gaussian, real_gaussian, rng_from_seed};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationScenario {
    pub d: usize,
    pub m: usize,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub lambda1_sq: f64,
    pub lambda2_sq: f64,
    /// Scale of the covariance estimation error.
    pub c_cov: f64,
    pub n_samples: usize,
}

impl PerturbationScenario {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m >= self.d {
            return Err(Error::InvalidScenario(format!(
                "block split m={} must satisfy 1 <= m < d={}",
                self.m, self.d
            )));
        }
        let vars = [
            self.sigma1_sq,
            self.sigma2_sq,
            self.lambda1_sq,
            self.lambda2_sq,
            self.c_cov,
        ];
        if vars.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidScenario(
                "variances must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }

    fn block_size(&self) -> f64 {
        (self.m * (self.d - self.m)) as f64
    }
}

/// Expected squared INV transform error, `(λ₁² + λ₂²)·m·(d−m)`.
pub fn predicted_mse_inv(s: &PerturbationScenario) -> Result<f64> {
    s.validate()?;
    Ok((s.lambda1_sq + s.lambda2_sq) * s.block_size())
}

/// Expected squared LS transform error,
/// `[(1 + σ₂²/σ₁²)·λ₁² + (σ₂/σ₁)·C]·m·(d−m)`.
pub fn predicted_mse_ls(s: &PerturbationScenario) -> Result<f64> {
    s.validate()?;
    if s.sigma1_sq == 0.0 {
        return Err(Error::InvalidScenario(
            "first block power must be positive".into(),
        ));
    }
    let ratio = s.sigma2_sq / s.sigma1_sq;
    Ok(((1.0 + ratio) * s.lambda1_sq + ratio.sqrt() * s.c_cov) * s.block_size())
}

struct Blocks {
    h1: CMatrix,
    w1: CMatrix,
}

fn blocks(h: &CMatrix, m: usize) -> Result<Blocks> {
    let sys = MixingSystem::new(h.clone(), m)?;
    let w = sys.demixing()?;
    Ok(Blocks {
        h1: sys.columns(Block::Target),
        w1: w.rows_of(Block::Target),
    })
}

fn check_w1(w1: &CMatrix, m: usize, d: usize) -> Result<()> {
    if w1.shape() != (m, d) {
        return Err(Error::dims(format!(
            "W1 is {}x{}, expected {m}x{d}",
            w1.rows(),
            w1.cols()
        )));
    }
    Ok(())
}

/// `H·Ξ·H₁·W₁ − H₁·Ξ₁`.
pub fn first_order_inv_error_matrix(
    h: &CMatrix,
    w1: &CMatrix,
    xi: &CMatrix,
    m: usize,
) -> Result<CMatrix> {
    let d = h.rows();
    check_w1(w1, m, d)?;
    if xi.shape() != (d, d) || !h.is_square() {
        return Err(Error::dims("H and Xi must both be d×d"));
    }
    let h1 = h.cols_range(0, m);
    let xi1 = xi.rows_range(0, m);
    let lead = h.dot(xi).dot(&h1).dot(w1);
    Ok(&lead - &h1.dot(&xi1))
}

/// Squared Frobenius norm of [`first_order_inv_error_matrix`].
pub fn first_order_inv_error(h: &CMatrix, w1: &CMatrix, xi: &CMatrix, m: usize) -> Result<f64> {
    Ok(first_order_inv_error_matrix(h, w1, xi, m)?.frobenius_norm_sq())
}

/// First-order LS transform error, assembled term by term.
#[allow(clippy::too_many_arguments)]
pub fn first_order_ls_error_matrix(
    h: &CMatrix,
    w1: &CMatrix,
    xi1: &CMatrix,
    delta_c: &CMatrix,
    c: &CMatrix,
    cs1: &CMatrix,
    m: usize,
) -> Result<CMatrix> {
    let d = h.rows();
    check_w1(w1, m, d)?;
    if xi1.shape() != (m, d) || delta_c.shape() != (d, d) || c.shape() != (d, d) {
        return Err(Error::dims("Xi1 must be m×d, C and DeltaC d×d"));
    }
    if cs1.shape() != (m, m) {
        return Err(Error::dims("Cs1 must be m×m"));
    }
    let h1 = h.cols_range(0, m);
    // C₁⁻¹·W₁
    let cs1_inv_w1 = LuFactor::new(cs1)?.solve(w1)?;

    let xi1_c_w1h = xi1.dot(c).mul_adjoint(w1);
    let w1_c_xi1h = w1.dot(c).mul_adjoint(xi1);
    let sym = &xi1_c_w1h + &w1_c_xi1h;
    let term_scale = h1.dot(&sym).dot(&cs1_inv_w1);

    let h1w1_minus_i = &h1.dot(w1) - &CMatrix::identity(d);
    let term_cov = h1w1_minus_i
        .dot(delta_c)
        .dot(&w1.adjoint())
        .dot(&cs1_inv_w1);

    let term_xi = h1.dot(xi1);
    let term_back = c.dot(&xi1.adjoint()).dot(&cs1_inv_w1);

    let mut out = term_scale;
    out += &term_cov;
    out -= &term_xi;
    out -= &term_back;
    Ok(out)
}

/// Squared Frobenius norm of [`first_order_ls_error_matrix`].
#[allow(clippy::too_many_arguments)]
pub fn first_order_ls_error(
    h: &CMatrix,
    w1: &CMatrix,
    xi1: &CMatrix,
    delta_c: &CMatrix,
    c: &CMatrix,
    cs1: &CMatrix,
    m: usize,
) -> Result<f64> {
    Ok(first_order_ls_error_matrix(h, w1, xi1, delta_c, c, cs1, m)?.frobenius_norm_sq())
}

/// Exact INV error `H₁W₁ − T` for the demixing estimate `H⁻¹ + Ξ`.
pub fn exact_inv_error_matrix(h: &CMatrix, xi: &CMatrix, m: usize) -> Result<CMatrix> {
    let b = blocks(h, m)?;
    let w = DemixingEstimate::new(&LuFactor::new(h)?.inverse() + xi, m)?;
    let t = inv_image_transform(&w, Block::Target)?;
    Ok(&b.h1.dot(&b.w1) - &t.matrix)
}

/// Exact LS error `H₁W₁ − T` for the block `W₁ + Ξ₁` and covariance `C + ΔC`.
pub fn exact_ls_error_matrix(
    h: &CMatrix,
    xi1: &CMatrix,
    c: &CMatrix,
    delta_c: &CMatrix,
    m: usize,
) -> Result<CMatrix> {
    let b = blocks(h, m)?;
    let t = ls_image_transform(&(&b.w1 + xi1), &(c + delta_c))?;
    Ok(&b.h1.dot(&b.w1) - &t.matrix)
}

/// How a synthetic covariance error is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaCovMode {
    /// Every entry drawn independently; not Hermitian.
    Independent,
    /// Upper triangle drawn and mirrored, real diagonal: a legal covariance
    /// perturbation with the same per-entry variance.
    #[default]
    Hermitian,
}

/// Covariance error whose `(i, j)` block has element variance `σᵢσⱼ·C`.
pub fn draw_delta_covariance(
    s: &PerturbationScenario,
    mode: DeltaCovMode,
    seed: u64,
) -> Result<CMatrix> {
    s.validate()?;
    let (d, m) = (s.d, s.m);
    let sigma = |i: usize| {
        if i < m {
            s.sigma1_sq.sqrt()
        } else {
            s.sigma2_sq.sqrt()
        }
    };
    let var = |i: usize, j: usize| sigma(i) * sigma(j) * s.c_cov;
    let mut rng = rng_from_seed(seed);
    let mut out = CMatrix::zeros(d, d);
    match mode {
        DeltaCovMode::Independent => {
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] = complex_gaussian(&mut rng, var(i, j));
                }
            }
        }
        DeltaCovMode::Hermitian => {
            for i in 0..d {
                out[(i, i)] = C64::new(real_gaussian(&mut rng, var(i, i)), 0.0);
                for j in i + 1..d {
                    let z = complex_gaussian(&mut rng, var(i, j));
                    out[(i, j)] = z;
                    out[(j, i)] = z.conj();
                }
            }
        }
    }
    Ok(out)
}
