//! Source-image estimators.
//!
//! Both estimators turn a (possibly inaccurate and arbitrarily scaled)
//! demixing estimate into a `d×d` transform `T` with `Ŝⁱ = T·X`:
//!
//! * INV inverts the whole demixing matrix and keeps the block product
//!   `Âᵢ·Ŵᵢ`.
//! * LS projects the separated block back onto the observations by least
//!   squares, `Ĉ·Ŵᵢᴴ·(Ŵᵢ·Ĉ·Ŵᵢᴴ)⁻¹·Ŵᵢ`, touching only the small Gram block.
//!
//! [`complete_orthogonal`] builds the remaining rows of a demixing matrix so
//! that the two output blocks are uncorrelated in sample; INV applied to such
//! a completion reproduces LS.

use crate::error::{Error, Result};
use crate::matcore::{
    ensure_full_row_rank, numerical_rank, orthonormal_null_basis, CMatrix, LuFactor, RANK_TOL,
};
use crate::model::{Block, DemixingEstimate, SignalBatch, MAX_REDRAWS};
use crate::rng::{complex_gaussian_matrix, derive_seed, rng_from_seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Inv,
    /// LS built from the exact observation covariance.
    LsTheoretical,
    /// LS built from the sample covariance.
    LsEmpirical,
}

#[derive(Clone, Debug)]
pub struct ImageTransform {
    pub matrix: CMatrix,
    pub block: Block,
    pub method: Method,
}

/// `Âᵢ·Ŵᵢ` with `Â = Ŵ⁻¹`.
pub fn inv_image_transform(w: &DemixingEstimate, block: Block) -> Result<ImageTransform> {
    let a = LuFactor::new(&w.w)?.inverse();
    let range = block.range(w.m, w.d());
    let matrix = a.cols_range(range.start, range.end).dot(&w.rows_of(block));
    Ok(ImageTransform {
        matrix,
        block,
        method: Method::Inv,
    })
}

/// LS transform for block 1 from the sample covariance.
pub fn ls_image_transform(w1: &CMatrix, c: &CMatrix) -> Result<ImageTransform> {
    ls_image_transform_for(w1, c, Block::Target, Method::LsEmpirical)
}

/// `C·Wᵢᴴ·(Wᵢ·C·Wᵢᴴ)⁻¹·Wᵢ` for an arbitrary row block `wi`.
pub fn ls_image_transform_for(
    wi: &CMatrix,
    c: &CMatrix,
    block: Block,
    method: Method,
) -> Result<ImageTransform> {
    let d = wi.cols();
    if c.shape() != (d, d) {
        return Err(Error::dims(format!(
            "covariance {}x{} for a {}x{} demixing block",
            c.rows(),
            c.cols(),
            wi.rows(),
            d
        )));
    }
    ensure_full_row_rank(wi, "demixing block")?;
    let c = c.hermitian_part();
    // C·Wᵢᴴ = (Wᵢ·C)ᴴ since C is Hermitian
    let cw = wi.dot(&c).adjoint();
    let gram = wi.dot(&cw).hermitian_part();
    let k = LuFactor::new(&gram)?.solve(wi)?;
    Ok(ImageTransform {
        matrix: cw.dot(&k),
        block,
        method,
    })
}

/// Completes `W₁` to `[W₁ ; B]` with `B·Ĉ·W₁ᴴ = 0`.
///
/// `B = Q·(I − Ĉ·W₁ᴴ·(W₁·Ĉ·Ĉ·W₁ᴴ)⁻¹·W₁·Ĉ)` with `Q` an orthonormal basis of the
/// complement of the columns of `Ĉ·W₁ᴴ`, for which the projector acts as the
/// identity. Random Gaussian `Q` is used as a fallback when the resulting
/// `B` loses rank.
pub fn complete_orthogonal(w1: &CMatrix, chat: &CMatrix) -> Result<DemixingEstimate> {
    let (m, d) = w1.shape();
    if m == 0 || m >= d || chat.shape() != (d, d) {
        return Err(Error::dims(format!(
            "cannot complete a {m}x{d} block with a {}x{} covariance",
            chat.rows(),
            chat.cols()
        )));
    }
    ensure_full_row_rank(w1, "block to complete")?;
    let c = chat.hermitian_part();
    let cw = w1.dot(&c).adjoint();
    let gram = cw.adjoint().dot(&cw).hermitian_part();
    let lu = LuFactor::new(&gram)?;
    let projector = &CMatrix::identity(d) - &cw.dot(&lu.solve(&cw.adjoint())?);

    let mut q = orthonormal_null_basis(&cw.adjoint()).ok();
    let seed = derive_seed(m as u64, d as u64);
    for attempt in 0..=MAX_REDRAWS {
        let candidate = match q.take() {
            Some(q) => q,
            None => {
                let mut rng = rng_from_seed(derive_seed(seed, attempt as u64));
                complex_gaussian_matrix(&mut rng, d - m, d, 1.0)
            }
        };
        let b = candidate.dot(&projector);
        if numerical_rank(&b, RANK_TOL) == d - m {
            return DemixingEstimate::new(CMatrix::vstack(w1, &b)?, m);
        }
    }
    Err(Error::DegenerateCompletion(MAX_REDRAWS))
}

/// `T·X`.
pub fn apply_image(t: &ImageTransform, x: &SignalBatch) -> Result<SignalBatch> {
    SignalBatch::new(t.matrix.try_dot(x.data())?)
}
