//! Mixing systems, signal batches and simulated demixing estimates.

use crate::error::{Error, Result};
use crate::matcore::{condition_number, CMatrix, LuFactor, C64};
use crate::rng::{complex_gaussian_matrix, derive_seed, rng_from_seed, SimRng};

/// Largest condition number accepted for randomly drawn mixing matrices.
pub const MAX_MIXING_CONDITION: f64 = 1e6;
/// Redraw budget for random mixing and scaling matrices.
pub const MAX_REDRAWS: usize = 16;

/// One of the two blocks of the partition at `m`: block 1 holds the first
/// `m` sources (columns of `H`, rows of `W`), block 2 the rest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    Target,
    Interference,
}

impl Block {
    /// 1-based block index.
    pub fn index(self) -> usize {
        match self {
            Block::Target => 1,
            Block::Interference => 2,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Block::Target),
            2 => Ok(Block::Interference),
            _ => Err(Error::dims(format!("block index {i} is not 1 or 2"))),
        }
    }

    /// Index range of the block inside `0..d`.
    pub fn range(self, m: usize, d: usize) -> std::ops::Range<usize> {
        match self {
            Block::Target => 0..m,
            Block::Interference => m..d,
        }
    }
}

/// `r×N` sample matrix, one signal per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalBatch {
    data: CMatrix,
}

impl SignalBatch {
    pub fn new(data: CMatrix) -> Result<Self> {
        if data.cols() == 0 || data.rows() == 0 {
            return Err(Error::dims(
                "signal batch needs at least one row and one sample",
            ));
        }
        if !data.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { data })
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_data(self) -> CMatrix {
        self.data
    }

    pub fn channels(&self) -> usize {
        self.data.rows()
    }

    pub fn samples(&self) -> usize {
        self.data.cols()
    }

    /// Rows of one block.
    pub fn block(&self, block: Block, m: usize) -> CMatrix {
        let r = block.range(m, self.channels());
        self.data.rows_range(r.start, r.end)
    }
}

/// Square mixing matrix `H = [H₁ H₂]` split after column `m`.
#[derive(Clone, Debug)]
pub struct MixingSystem {
    h: CMatrix,
    m: usize,
}

impl MixingSystem {
    pub fn new(h: CMatrix, m: usize) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::dims(format!(
                "mixing matrix must be square, got {}x{}",
                h.rows(),
                h.cols()
            )));
        }
        check_split(m, h.rows())?;
        LuFactor::new(&h)?;
        Ok(Self { h, m })
    }

    /// Random complex Gaussian mixing matrix with entry variance
    /// `element_variance`, redrawn while its condition number exceeds
    /// [`MAX_MIXING_CONDITION`].
    pub fn random(d: usize, m: usize, element_variance: f64, seed: u64) -> Result<Self> {
        check_split(m, d)?;
        let mut rng = rng_from_seed(seed);
        for _ in 0..MAX_REDRAWS {
            let h = complex_gaussian_matrix(&mut rng, d, d, element_variance);
            if condition_number(&h) <= MAX_MIXING_CONDITION && LuFactor::new(&h).is_ok() {
                return Ok(Self { h, m });
            }
        }
        Err(Error::DegenerateMixing {
            limit: MAX_MIXING_CONDITION,
            attempts: MAX_REDRAWS,
        })
    }

    pub fn identity(d: usize, m: usize) -> Result<Self> {
        Self::new(CMatrix::identity(d), m)
    }

    pub fn h(&self) -> &CMatrix {
        &self.h
    }

    pub fn d(&self) -> usize {
        self.h.rows()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Columns of `H` belonging to a block.
    pub fn columns(&self, block: Block) -> CMatrix {
        let r = block.range(self.m, self.d());
        self.h.cols_range(r.start, r.end)
    }

    /// The exact demixing matrix `W = H⁻¹`.
    pub fn demixing(&self) -> Result<DemixingEstimate> {
        Ok(DemixingEstimate {
            w: LuFactor::new(&self.h)?.inverse(),
            m: self.m,
        })
    }

    /// `H₁W₁`, the exact image transform of block 1 (or `H₂W₂` for block 2).
    pub fn image_projector(&self, block: Block) -> Result<CMatrix> {
        let w = self.demixing()?;
        Ok(self.columns(block).dot(&w.rows_of(block)))
    }
}

fn check_split(m: usize, d: usize) -> Result<()> {
    if m == 0 || m >= d {
        return Err(Error::dims(format!(
            "block split m={m} must satisfy 1 <= m < d={d}"
        )));
    }
    Ok(())
}

/// Estimated demixing matrix `Ŵ = [Ŵ₁ ; Ŵ₂]` split after row `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct DemixingEstimate {
    pub w: CMatrix,
    pub m: usize,
}

impl DemixingEstimate {
    pub fn new(w: CMatrix, m: usize) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::dims("demixing matrix must be square"));
        }
        check_split(m, w.rows())?;
        Ok(Self { w, m })
    }

    pub fn d(&self) -> usize {
        self.w.rows()
    }

    pub fn rows_of(&self, block: Block) -> CMatrix {
        let r = block.range(self.m, self.d());
        self.w.rows_range(r.start, r.end)
    }
}

/// Additive demixing perturbation `Ξ` with per-block element variances.
#[derive(Clone, Debug)]
pub struct PerturbationDraw {
    pub xi: CMatrix,
    pub lambda1_sq: f64,
    pub lambda2_sq: f64,
    pub m: usize,
}

impl PerturbationDraw {
    /// Scales a unit-variance draw: rows `0..m` by `λ₁`, the rest by `λ₂`.
    pub fn from_unit(unit: &CMatrix, m: usize, lambda1_sq: f64, lambda2_sq: f64) -> Result<Self> {
        if lambda1_sq < 0.0 || lambda2_sq < 0.0 {
            return Err(Error::InvalidScenario(
                "negative perturbation variance".into(),
            ));
        }
        check_split(m, unit.rows())?;
        let (l1, l2) = (lambda1_sq.sqrt(), lambda2_sq.sqrt());
        let xi = CMatrix::from_fn(unit.rows(), unit.cols(), |i, j| {
            unit[(i, j)] * if i < m { l1 } else { l2 }
        });
        Ok(Self {
            xi,
            lambda1_sq,
            lambda2_sq,
            m,
        })
    }

    /// Fresh draw whose "unit" entries have complex variance
    /// `unit_variance` before block scaling.
    pub fn draw(
        d: usize,
        m: usize,
        lambda1_sq: f64,
        lambda2_sq: f64,
        unit_variance: f64,
        seed: u64,
    ) -> Result<Self> {
        let unit = complex_gaussian_matrix(&mut rng_from_seed(seed), d, d, unit_variance);
        Self::from_unit(&unit, m, lambda1_sq, lambda2_sq)
    }

    pub fn zero(d: usize, m: usize) -> Result<Self> {
        Self::from_unit(&CMatrix::zeros(d, d), m, 0.0, 0.0)
    }

    /// Rows of `Ξ` belonging to a block.
    pub fn rows_of(&self, block: Block) -> CMatrix {
        let r = block.range(self.m, self.xi.rows());
        self.xi.rows_range(r.start, r.end)
    }
}

/// `r×N` batch of circular complex Gaussians with `E|z|² = element_variance`.
pub fn generate_gaussian_batch(
    r: usize,
    n: usize,
    element_variance: f64,
    seed: u64,
) -> Result<SignalBatch> {
    if element_variance.is_nan() || element_variance <= 0.0 {
        return Err(Error::InvalidScenario(format!(
            "element variance must be positive, got {element_variance}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    SignalBatch::new(complex_gaussian_matrix(&mut rng, r, n, element_variance))
}

fn check_sources(sys: &MixingSystem, s: &SignalBatch) -> Result<()> {
    if s.channels() != sys.d() {
        return Err(Error::dims(format!(
            "{} source rows for a {}-channel system",
            s.channels(),
            sys.d()
        )));
    }
    Ok(())
}

/// `Hᵢ·Sᵢ`, the contribution of one source block at the sensors.
pub fn source_image(sys: &MixingSystem, s: &SignalBatch, block: Block) -> Result<SignalBatch> {
    check_sources(sys, s)?;
    SignalBatch::new(sys.columns(block).dot(&s.block(block, sys.m)))
}

/// `X = H·S`, summed as `H₁S₁ + H₂S₂` so that it equals the sum of the two
/// source images exactly.
pub fn mix(sys: &MixingSystem, s: &SignalBatch) -> Result<SignalBatch> {
    let first = source_image(sys, s, Block::Target)?;
    let second = source_image(sys, s, Block::Interference)?;
    SignalBatch::new(first.data() + second.data())
}

/// `XXᴴ/N`, Hermitian to the last bit.
pub fn sample_covariance(x: &SignalBatch) -> CMatrix {
    x.data()
        .gram()
        .scale_real(1.0 / x.samples() as f64)
        .hermitian_part()
}

/// Exact observation covariance `H·diag(p)·Hᴴ` for independent sources with
/// powers `p`.
pub fn mixture_covariance(sys: &MixingSystem, source_powers: &[f64]) -> Result<CMatrix> {
    if source_powers.len() != sys.d() {
        return Err(Error::dims("one source power per column of H is required"));
    }
    let scaled = CMatrix::from_fn(sys.d(), sys.d(), |i, j| sys.h[(i, j)] * source_powers[j]);
    Ok(scaled.mul_adjoint(&sys.h).hermitian_part())
}

/// `[W₁ + Ξ₁ ; W₂ + Ξ₂]`.
pub fn perturb_demixing(w: &DemixingEstimate, draw: &PerturbationDraw) -> Result<DemixingEstimate> {
    if w.w.shape() != draw.xi.shape() || w.m != draw.m {
        return Err(Error::dims(format!(
            "perturbation {}x{} (m={}) for demixing {}x{} (m={})",
            draw.xi.rows(),
            draw.xi.cols(),
            draw.m,
            w.w.rows(),
            w.w.cols(),
            w.m
        )));
    }
    Ok(DemixingEstimate {
        w: &w.w + &draw.xi,
        m: w.m,
    })
}

/// `[Λ₁Ŵ₁ ; Λ₂Ŵ₂]` with random complex Gaussian `Λ₁`, `Λ₂`, redrawn until
/// both are invertible.
pub fn random_block_rescale(w: &DemixingEstimate, seed: u64) -> Result<DemixingEstimate> {
    let mut rng = rng_from_seed(derive_seed(seed, 0x5ca1e));
    let (l1, l2) = draw_block_scalings(&mut rng, w.m, w.d() - w.m)?;
    let top = l1.dot(&w.rows_of(Block::Target));
    let bottom = l2.dot(&w.rows_of(Block::Interference));
    Ok(DemixingEstimate {
        w: CMatrix::vstack(&top, &bottom)?,
        m: w.m,
    })
}

fn draw_block_scalings(rng: &mut SimRng, m1: usize, m2: usize) -> Result<(CMatrix, CMatrix)> {
    for _ in 0..MAX_REDRAWS {
        let l1 = complex_gaussian_matrix(rng, m1, m1, 1.0);
        let l2 = complex_gaussian_matrix(rng, m2, m2, 1.0);
        if LuFactor::new(&l1).is_ok() && LuFactor::new(&l2).is_ok() {
            return Ok((l1, l2));
        }
    }
    Err(Error::DegenerateScaling(MAX_REDRAWS))
}

/// Complex scalar helper used by callers building diagonal matrices.
pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::relative_error;

    #[test]
    fn batch_moments_and_determinism() {
        let b = generate_gaussian_batch(3, 100_000, 1.0, 1).unwrap();
        for i in 0..3 {
            let var: f64 = b.data().row(i).iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e5;
            assert!((var - 1.0).abs() < 0.02, "row {i}: {var}");
        }
        let b4 = generate_gaussian_batch(1, 100_000, 4.0, 2).unwrap();
        let p: f64 = b4.data().frobenius_norm_sq() / 1e5;
        assert!((p - 4.0).abs() < 0.1);
        assert_eq!(
            generate_gaussian_batch(2, 50, 1.0, 9).unwrap(),
            generate_gaussian_batch(2, 50, 1.0, 9).unwrap()
        );
        assert!(generate_gaussian_batch(2, 50, 0.0, 9).is_err());
    }

    #[test]
    fn mix_identity_and_diagonal() {
        let s = generate_gaussian_batch(3, 20, 1.0, 3).unwrap();
        let sys = MixingSystem::identity(3, 1).unwrap();
        assert_eq!(mix(&sys, &s).unwrap(), s);

        let sys = MixingSystem::new(CMatrix::from_diag(&[real(2.0), real(3.0)]), 1).unwrap();
        let s = SignalBatch::new(CMatrix::identity(2)).unwrap();
        let x = mix(&sys, &s).unwrap();
        assert_eq!(x.data(), &CMatrix::from_diag(&[real(2.0), real(3.0)]));
    }

    #[test]
    fn mix_column_matches_matvec() {
        let sys = MixingSystem::random(4, 2, 1.0, 5).unwrap();
        let s = generate_gaussian_batch(4, 30, 1.0, 6).unwrap();
        let x = mix(&sys, &s).unwrap();
        for i in 0..4 {
            let expect: C64 = (0..4).map(|k| sys.h()[(i, k)] * s.data()[(k, 0)]).sum();
            assert!((x.data()[(i, 0)] - expect).norm() < 1e-12);
        }
        assert!(mix(&sys, &generate_gaussian_batch(3, 30, 1.0, 6).unwrap()).is_err());
    }

    #[test]
    fn images_add_up_exactly() {
        let sys = MixingSystem::random(5, 2, 1.0, 7).unwrap();
        let s = generate_gaussian_batch(5, 64, 1.0, 8).unwrap();
        let x = mix(&sys, &s).unwrap();
        let a = source_image(&sys, &s, Block::Target).unwrap();
        let b = source_image(&sys, &s, Block::Interference).unwrap();
        assert_eq!(&(a.data() + b.data()), x.data());
    }

    #[test]
    fn image_with_silent_second_block_is_mixture() {
        let sys = MixingSystem::random(4, 1, 1.0, 10).unwrap();
        let mut s = generate_gaussian_batch(4, 16, 1.0, 11).unwrap().into_data();
        for i in 1..4 {
            s.row_mut(i)
                .iter_mut()
                .for_each(|z| *z = C64::new(0.0, 0.0));
        }
        let s = SignalBatch::new(s).unwrap();
        assert_eq!(
            source_image(&sys, &s, Block::Target).unwrap(),
            mix(&sys, &s).unwrap()
        );
    }

    #[test]
    fn coordinate_image() {
        let sys = MixingSystem::identity(2, 1).unwrap();
        let s = generate_gaussian_batch(2, 8, 1.0, 12).unwrap();
        let img = source_image(&sys, &s, Block::Target).unwrap();
        assert_eq!(img.data().row(0), s.data().row(0));
        assert!(img.data().row(1).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn covariance_cases() {
        let zero = SignalBatch::new(CMatrix::zeros(3, 4)).unwrap();
        assert_eq!(sample_covariance(&zero), CMatrix::zeros(3, 3));
        let id = SignalBatch::new(CMatrix::identity(4)).unwrap();
        assert_eq!(
            sample_covariance(&id),
            CMatrix::identity(4).scale_real(0.25)
        );
        let x = generate_gaussian_batch(5, 100_000, 1.0, 13).unwrap();
        let c = sample_covariance(&x);
        assert!((&c - &CMatrix::identity(5)).frobenius_norm() < 0.1);
        assert_eq!(c, c.adjoint());
    }

    #[test]
    fn perturbation_moments_and_identity() {
        let w = MixingSystem::random(5, 2, 1.0, 14)
            .unwrap()
            .demixing()
            .unwrap();
        let zero = PerturbationDraw::zero(5, 2).unwrap();
        assert_eq!(perturb_demixing(&w, &zero).unwrap(), w);

        let trials = 10_000;
        let mut total = 0.0;
        for t in 0..trials {
            let draw = PerturbationDraw::draw(5, 2, 1e-4, 1e-4, 1.0, t).unwrap();
            total += draw.xi.frobenius_norm_sq();
        }
        let mean = total / trials as f64;
        assert!((mean - 25e-4).abs() < 0.05 * 25e-4, "mean {mean}");

        let a = PerturbationDraw::draw(5, 2, 1e-2, 1e-4, 1.0, 3).unwrap();
        let b = PerturbationDraw::draw(5, 2, 1e-2, 1e-4, 1.0, 3).unwrap();
        assert_eq!(a.xi, b.xi);
        // block scaling: row ratio equals λ₁/λ₂ against the shared unit draw
        let unit = complex_gaussian_matrix(&mut rng_from_seed(3), 5, 5, 1.0);
        assert!((a.xi[(0, 0)] - unit[(0, 0)] * 0.1).norm() < 1e-15);
        assert!((a.xi[(4, 4)] - unit[(4, 4)] * 0.01).norm() < 1e-15);
    }

    #[test]
    fn rescale_preserves_row_spaces() {
        let w = MixingSystem::random(4, 3, 1.0, 15)
            .unwrap()
            .demixing()
            .unwrap();
        let r = random_block_rescale(&w, 16).unwrap();
        assert_eq!(r.m, 3);
        assert_ne!(r.w, w.w);
        // Λ₂ is a nonzero scalar when m = d−1
        let ratio = r.w[(3, 0)] / w.w[(3, 0)];
        for j in 1..4 {
            assert!((r.w[(3, j)] / w.w[(3, j)] - ratio).norm() < 1e-12);
        }
        assert_eq!(random_block_rescale(&w, 16).unwrap(), r);
    }

    #[test]
    fn mixing_validation() {
        assert!(MixingSystem::new(CMatrix::identity(3), 0).is_err());
        assert!(MixingSystem::new(CMatrix::identity(3), 3).is_err());
        assert!(matches!(
            MixingSystem::new(CMatrix::zeros(2, 2), 1),
            Err(Error::SingularMatrix { .. })
        ));
        let sys = MixingSystem::random(6, 2, 1.0, 17).unwrap();
        assert!(condition_number(sys.h()) <= MAX_MIXING_CONDITION);
        let w = sys.demixing().unwrap();
        assert!(relative_error(&sys.h().dot(&w.w), &CMatrix::identity(6)) < 1e-12);
    }

    #[test]
    fn exact_covariance_matches_large_sample() {
        let sys = MixingSystem::random(3, 1, 1.0, 18).unwrap();
        let c = mixture_covariance(&sys, &[1.0, 1.0, 1.0]).unwrap();
        assert!(relative_error(&c, &sys.h().mul_adjoint(sys.h())) < 1e-14);
    }
}
