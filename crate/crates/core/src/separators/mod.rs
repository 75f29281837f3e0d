//! Single-component separators and image-subtraction denoising.
//!
//! A separating row vector `w` extracts one component `y = w·X`; its image at
//! the sensors is then recovered by LS and subtracted from the recording.

pub mod signal_file;
pub mod surrogate;

use crate::error::{Error, Result};
use crate::estimators::{complete_orthogonal, inv_image_transform, ls_image_transform_for, Method};
use crate::matcore::{hermitian_eigen, CMatrix, C64};
use crate::model::{sample_covariance, Block, SignalBatch};

pub const DEFAULT_FASTICA_TOL: f64 = 1e-9;
pub const DEFAULT_FASTICA_MAX_ITER: usize = 200;
const POWER_MAX_ITER: usize = 10_000;
const POWER_STABLE_TOL: f64 = 1e-12;
const POWER_RESIDUAL_TOL: f64 = 1e-9;
const DEGENERATE_GAP: f64 = 1e-9;

/// A `1×d` separating row vector.
#[derive(Clone, Debug)]
pub struct SeparatingVector {
    pub w: CMatrix,
    pub converged: bool,
    pub iterations: usize,
    /// The leading eigenvalue was not separated from the next one, so the
    /// direction is not unique.
    pub degenerate: bool,
}

impl SeparatingVector {
    pub fn from_row(w: CMatrix) -> Result<Self> {
        if w.rows() != 1 || w.cols() == 0 {
            return Err(Error::dims("separating vector must be a single row"));
        }
        Ok(Self {
            w,
            converged: true,
            iterations: 0,
            degenerate: false,
        })
    }

    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::ConvergenceFailure {
                iterations: self.iterations,
            })
        }
    }
}

fn normalize(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|z| *z /= norm);
    }
}

/// Rotates `v` so that its largest-modulus entry is real and positive.
fn fix_phase(v: &mut [C64]) {
    let Some(pivot) = v
        .iter()
        .copied()
        .reduce(|best, z| if z.norm() > best.norm() { z } else { best })
    else {
        return;
    };
    if pivot.norm() > 0.0 {
        let rot = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

fn matvec(c: &CMatrix, v: &[C64]) -> Vec<C64> {
    (0..c.rows())
        .map(|i| c.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Leading eigenvector of a Hermitian PSD matrix, returned as the row `vᴴ`.
///
/// Power iteration is started from the Jacobi estimate and run until the
/// Rayleigh quotient is stable and the eigen-residual is small.
pub fn principal_vector(chat: &CMatrix) -> Result<SeparatingVector> {
    let eig = hermitian_eigen(chat)?;
    let c = chat.hermitian_part();
    let d = c.rows();
    let top = eig.values[0];
    let degenerate =
        d > 1 && (top - eig.values[1]).abs() <= DEGENERATE_GAP * top.abs().max(f64::MIN_POSITIVE);
    let mut v: Vec<C64> = (0..d).map(|i| eig.vectors[(i, 0)]).collect();
    normalize(&mut v);

    let mut lambda = f64::NAN;
    let mut iterations = 0;
    let mut converged = top <= 0.0;
    while !converged {
        if iterations == POWER_MAX_ITER {
            return Err(Error::ConvergenceFailure { iterations });
        }
        iterations += 1;
        let cv = matvec(&c, &v);
        let rayleigh: f64 = v.iter().zip(&cv).map(|(a, b)| (a.conj() * b).re).sum();
        let residual = cv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * rayleigh).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let stable = (rayleigh - lambda).abs() <= POWER_STABLE_TOL * rayleigh.abs();
        lambda = rayleigh;
        if stable && residual <= POWER_RESIDUAL_TOL * rayleigh.abs() {
            converged = true;
        } else if degenerate && residual <= POWER_RESIDUAL_TOL * rayleigh.abs() {
            // any vector of the leading eigenspace is acceptable
            converged = true;
        } else {
            v = cv;
            normalize(&mut v);
        }
    }
    let mut w: Vec<C64> = v.iter().map(|z| z.conj()).collect();
    fix_phase(&mut w);
    Ok(SeparatingVector {
        w: CMatrix::from_raw(1, d, w),
        converged: true,
        iterations,
        degenerate,
    })
}

/// One-unit FastICA with the `tanh` contrast on internally whitened real data.
///
/// `w0` is given in observation coordinates (a row acting on `X`); the result
/// is the de-whitened separating row, scaled to unit norm with its
/// largest-modulus entry positive. Hitting `max_iter` is not an error: the
/// last iterate is returned with `converged = false`.
pub fn fastica_one_unit(
    x: &SignalBatch,
    w0: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<SeparatingVector> {
    let data = x.data();
    let (d, n) = data.shape();
    if !data.is_real() {
        return Err(Error::InvalidScenario(
            "FastICA expects real-valued data".into(),
        ));
    }
    if w0.len() != d {
        return Err(Error::dims(format!(
            "initial vector of length {} for {d} channels",
            w0.len()
        )));
    }
    if w0.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidScenario("initial vector is zero".into()));
    }

    let centered: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let row = data.row(i);
            let mean = row.iter().map(|z| z.re).sum::<f64>() / n as f64;
            row.iter().map(|z| z.re - mean).collect()
        })
        .collect();
    let cov = CMatrix::from_fn(d, d, |i, j| {
        let s: f64 = centered[i]
            .iter()
            .zip(&centered[j])
            .map(|(a, b)| a * b)
            .sum();
        C64::new(s / n as f64, 0.0)
    });
    let eig = hermitian_eigen(&cov)?;
    let floor = 1e-12 * eig.values[0].max(0.0);
    let scales: Vec<f64> = eig.values.iter().map(|&l| l.max(floor).sqrt()).collect();
    if scales[0] == 0.0 {
        return Err(Error::InvalidScenario("data has no variance".into()));
    }
    // whitening V = D^{-1/2}·Eᵀ and its inverse E·D^{1/2}
    let whiten: Vec<Vec<f64>> = (0..d)
        .map(|k| (0..d).map(|j| eig.vectors[(j, k)].re / scales[k]).collect())
        .collect();
    let z: Vec<Vec<f64>> = whiten
        .iter()
        .map(|vrow| {
            (0..n)
                .map(|t| vrow.iter().zip(&centered).map(|(v, xr)| v * xr[t]).sum())
                .collect()
        })
        .collect();

    let mut w: Vec<f64> = (0..d)
        .map(|k| (0..d).map(|j| w0[j] * eig.vectors[(j, k)].re).sum::<f64>() * scales[k])
        .collect();
    normalize_real(&mut w);

    let mut converged = false;
    let mut iterations = 0;
    let mut u = vec![0.0; n];
    while iterations < max_iter {
        iterations += 1;
        for (t, ut) in u.iter_mut().enumerate() {
            *ut = (0..d).map(|k| w[k] * z[k][t]).sum::<f64>().tanh();
        }
        let mean_deriv = u.iter().map(|g| 1.0 - g * g).sum::<f64>() / n as f64;
        let mut next: Vec<f64> = (0..d)
            .map(|k| {
                z[k].iter().zip(&u).map(|(zk, g)| zk * g).sum::<f64>() / n as f64
                    - mean_deriv * w[k]
            })
            .collect();
        normalize_real(&mut next);
        let overlap: f64 = next.iter().zip(&w).map(|(a, b)| a * b).sum();
        w = next;
        if overlap.abs() > 1.0 - tol {
            converged = true;
            break;
        }
    }

    let mut row: Vec<C64> = (0..d)
        .map(|j| C64::new((0..d).map(|k| w[k] * whiten[k][j]).sum(), 0.0))
        .collect();
    normalize(&mut row);
    fix_phase(&mut row);
    Ok(SeparatingVector {
        w: CMatrix::from_raw(1, d, row),
        converged,
        iterations,
        degenerate: false,
    })
}

fn normalize_real(v: &mut [f64]) {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|a| *a /= norm);
    }
}

/// `X − T·X` with `T` the LS image transform of the component `w·X`.
pub fn denoise_by_image_subtraction(x: &SignalBatch, w: &SeparatingVector) -> Result<SignalBatch> {
    let chat = sample_covariance(x);
    let t = ls_image_transform_for(&w.w, &chat, Block::Target, Method::LsEmpirical)?;
    SignalBatch::new(x.data() - &t.matrix.try_dot(x.data())?)
}

/// Same subtraction through INV on the orthogonal completion of `w`.
pub fn denoise_by_completed_inv(x: &SignalBatch, w: &SeparatingVector) -> Result<SignalBatch> {
    let chat = sample_covariance(x);
    let full = complete_orthogonal(&w.w, &chat)?;
    let t = inv_image_transform(&full, Block::Target)?;
    SignalBatch::new(x.data() - &t.matrix.try_dot(x.data())?)
}
