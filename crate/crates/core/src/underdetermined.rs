//! Noise extraction for `x = H₁s₁ + s₂`, where `s₂` spans all `d` sensors.
//!
//! A blocking matrix `W` with `W·H₁ = 0` cancels the target; the LS
//! back-projection of `W·X` then estimates the noise image `S₂`. Two oracles
//! bound what any such estimator can do: LSopt (best `Q` acting on `W·X`) and
//! MMSE (best `Q` acting on `X` directly).

use crate::error::{Error, Result};
use crate::estimators::{ls_image_transform_for, Method};
use crate::matcore::{orthonormal_null_basis, singular_values, CMatrix, LuFactor, RANK_TOL};
use crate::model::{Block, SignalBatch};
use crate::rng::{complex_gaussian_matrix, derive_seed, rng_from_seed};

#[derive(Clone, Debug)]
pub struct UnderdeterminedMixture {
    pub h1: CMatrix,
    pub s1: SignalBatch,
    pub s2: SignalBatch,
    pub x: SignalBatch,
}

impl UnderdeterminedMixture {
    pub fn new(h1: CMatrix, s1: SignalBatch, s2: SignalBatch) -> Result<Self> {
        let (d, m) = h1.shape();
        if m == 0 || m >= d || s1.channels() != m || s2.channels() != d {
            return Err(Error::dims(format!(
                "H1 {d}x{m}, S1 with {} rows, S2 with {} rows",
                s1.channels(),
                s2.channels()
            )));
        }
        if s1.samples() != s2.samples() {
            return Err(Error::dims("S1 and S2 differ in sample count"));
        }
        let sv = singular_values(&h1);
        if sv.last().copied().unwrap_or(0.0) <= RANK_TOL * sv[0] {
            return Err(Error::RankDeficient("H1 lacks full column rank".into()));
        }
        let x = SignalBatch::new(&h1.dot(s1.data()) + s2.data())?;
        Ok(Self { h1, s1, s2, x })
    }

    /// Gaussian `H₁`, `S₁`, `S₂`, all with unit complex element variance.
    pub fn generate(d: usize, m: usize, n: usize, seed: u64) -> Result<Self> {
        let mut rng = rng_from_seed(derive_seed(seed, 1));
        let h1 = complex_gaussian_matrix(&mut rng, d, m, 1.0);
        let mut rng = rng_from_seed(derive_seed(seed, 2));
        let s1 = SignalBatch::new(complex_gaussian_matrix(&mut rng, m, n, 1.0))?;
        let mut rng = rng_from_seed(derive_seed(seed, 3));
        let s2 = SignalBatch::new(complex_gaussian_matrix(&mut rng, d, n, 1.0))?;
        Self::new(h1, s1, s2)
    }

    pub fn d(&self) -> usize {
        self.h1.rows()
    }

    pub fn m(&self) -> usize {
        self.h1.cols()
    }
}

/// Orthonormal basis of the complement of `H₁`'s columns plus a Gaussian
/// perturbation with element variance `lambda_sq`.
pub fn build_blocking_matrix(h1: &CMatrix, lambda_sq: f64, seed: u64) -> Result<CMatrix> {
    if lambda_sq.is_nan() || lambda_sq < 0.0 {
        return Err(Error::InvalidScenario(format!(
            "negative variance {lambda_sq}"
        )));
    }
    let basis = orthonormal_null_basis(&h1.adjoint())?;
    if lambda_sq == 0.0 {
        return Ok(basis);
    }
    let xi = complex_gaussian_matrix(
        &mut rng_from_seed(seed),
        basis.rows(),
        basis.cols(),
        lambda_sq,
    );
    Ok(&basis + &xi)
}

/// `Ĉ·Wᴴ·(W·Ĉ·Wᴴ)⁻¹·W·X`.
pub fn ls_noise_extract(w: &CMatrix, chat: &CMatrix, x: &SignalBatch) -> Result<SignalBatch> {
    let t = ls_image_transform_for(w, chat, Block::Interference, Method::LsEmpirical)?;
    SignalBatch::new(t.matrix.try_dot(x.data())?)
}

/// `Q*·Y` with `Q* = S₂Yᴴ(YYᴴ)⁻¹`: the least-squares fit of `target` from
/// the rows of `y`.
fn regress(y: &CMatrix, target: &CMatrix) -> Result<CMatrix> {
    if y.cols() != target.cols() {
        return Err(Error::dims("regressor and target differ in sample count"));
    }
    let gram = y.gram();
    // (YYᴴ)⁻¹·Y·S₂ᴴ = Q*ᴴ
    let q_adj = LuFactor::new(&gram)?.solve(&y.mul_adjoint(target))?;
    Ok(q_adj.adjoint().dot(y))
}

/// Best reconstruction of `S₂` of the form `Q·W·X`.
pub fn lsopt_oracle(w: &CMatrix, x: &SignalBatch, s2: &SignalBatch) -> Result<SignalBatch> {
    let y = w.try_dot(x.data())?;
    SignalBatch::new(regress(&y, s2.data())?)
}

/// Best linear reconstruction of `S₂` of the form `Q·X`.
pub fn mmse_oracle(x: &SignalBatch, s2: &SignalBatch) -> Result<SignalBatch> {
    SignalBatch::new(regress(x.data(), s2.data())?)
}

/// `‖S₂ − Ŝ₂‖²_F / ‖S₂‖²_F`.
pub fn nmse_signals(s2: &SignalBatch, s2hat: &SignalBatch) -> Result<f64> {
    let reference = s2.data().frobenius_norm_sq();
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    if s2.data().shape() != s2hat.data().shape() {
        return Err(Error::dims("estimate and reference differ in shape"));
    }
    Ok((s2.data() - s2hat.data()).frobenius_norm_sq() / reference)
}
