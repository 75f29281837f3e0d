//! Synthetic three-lead ECG contaminated by a display-refresh interferer.
//!
//! Two latent cardiac sources (P-QRS-T pulse trains with beat-to-beat RR
//! jitter) reach the leads through a fixed lead matrix. A band-limited
//! sawtooth at `interferer_hz` is added with a near-uniform channel gain.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{CMatrix, C64};
use crate::model::SignalBatch;
use crate::rng::{derive_seed, real_gaussian, rng_from_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    pub channels: usize,
    pub rate_hz: f64,
    pub duration_s: f64,
    pub heart_rate_bpm: f64,
    /// Relative standard deviation of the RR interval.
    pub rr_jitter: f64,
    pub interferer_hz: f64,
    /// Upper bound on sawtooth harmonics; those above Nyquist are dropped.
    pub harmonics: usize,
    /// Interferer-to-ECG power ratio in dB.
    pub interferer_db: f64,
    /// Standard deviation of the per-channel interferer gain around 1.
    pub gain_spread: f64,
    pub seed: u64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            channels: 3,
            rate_hz: 500.0,
            duration_s: 2.0,
            heart_rate_bpm: 72.0,
            rr_jitter: 0.03,
            interferer_hz: 37.0,
            harmonics: 6,
            interferer_db: 20.0,
            gain_spread: 0.1,
            seed: 2011,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Surrogate {
    pub rate_hz: f64,
    /// Clean leads, `channels×N`.
    pub clean: CMatrix,
    /// Interferer time course (unit channel gain), length `N`.
    pub interferer: Vec<f64>,
    pub gains: Vec<f64>,
    /// Clean leads plus interferer.
    pub observed: SignalBatch,
}

struct Wave {
    offset_s: f64,
    amplitude: f64,
    width_s: f64,
}

const fn wave(offset_s: f64, amplitude: f64, width_s: f64) -> Wave {
    Wave {
        offset_s,
        amplitude,
        width_s,
    }
}

const MORPHOLOGY_A: [Wave; 5] = [
    wave(-0.20, 0.15, 0.025),
    wave(-0.03, -0.10, 0.010),
    wave(0.00, 1.00, 0.012),
    wave(0.03, -0.25, 0.010),
    wave(0.25, 0.30, 0.045),
];

const MORPHOLOGY_B: [Wave; 5] = [
    wave(-0.18, -0.08, 0.030),
    wave(-0.02, 0.20, 0.012),
    wave(0.01, 0.60, 0.015),
    wave(0.05, -0.35, 0.012),
    wave(0.28, -0.20, 0.050),
];

fn pulse_train(t: &[f64], beats: &[f64], morphology: &[Wave]) -> Vec<f64> {
    t.iter()
        .map(|&ti| {
            beats
                .iter()
                .flat_map(|&b| {
                    morphology.iter().map(move |w| {
                        let u = (ti - b - w.offset_s) / w.width_s;
                        w.amplitude * (-0.5 * u * u).exp()
                    })
                })
                .sum()
        })
        .collect()
}

fn power(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
}

pub fn generate(cfg: &SurrogateConfig) -> Result<Surrogate> {
    let positive = |v: f64| v > 0.0;
    if cfg.channels < 2
        || ![cfg.rate_hz, cfg.duration_s, cfg.heart_rate_bpm]
            .into_iter()
            .all(positive)
    {
        return Err(Error::InvalidScenario(
            "surrogate needs >= 2 channels and positive rate, duration and heart rate".into(),
        ));
    }
    if !(cfg.interferer_hz > 0.0 && cfg.interferer_hz < cfg.rate_hz / 2.0) {
        return Err(Error::InvalidScenario(
            "interferer must lie below Nyquist".into(),
        ));
    }
    let n = (cfg.rate_hz * cfg.duration_s).round() as usize;
    let t: Vec<f64> = (0..n).map(|k| k as f64 / cfg.rate_hz).collect();

    let mut rng = rng_from_seed(derive_seed(cfg.seed, 1));
    let rr = 60.0 / cfg.heart_rate_bpm;
    let mut beats = Vec::new();
    let mut at = -rr + 0.35 * rr;
    while at < cfg.duration_s + rr {
        beats.push(at);
        at += rr * (1.0 + cfg.rr_jitter * real_gaussian(&mut rng, 1.0));
    }
    let sources = [
        pulse_train(&t, &beats, &MORPHOLOGY_A),
        pulse_train(&t, &beats, &MORPHOLOGY_B),
    ];
    let leads: Vec<[f64; 2]> = (0..cfg.channels)
        .map(|_| [real_gaussian(&mut rng, 1.0), real_gaussian(&mut rng, 1.0)])
        .collect();
    let clean_rows: Vec<Vec<f64>> = leads
        .iter()
        .map(|l| {
            (0..n)
                .map(|k| l[0] * sources[0][k] + l[1] * sources[1][k])
                .collect()
        })
        .collect();

    let nyquist_harmonics = ((cfg.rate_hz / 2.0) / cfg.interferer_hz).ceil() as usize - 1;
    let harmonics = cfg.harmonics.min(nyquist_harmonics).max(1);
    let phase = 2.0 * PI * rng.random::<f64>();
    let mut interferer: Vec<f64> = t
        .iter()
        .map(|&ti| {
            (1..=harmonics)
                .map(|k| {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign * (2.0 * PI * k as f64 * cfg.interferer_hz * ti + k as f64 * phase).sin()
                        / k as f64
                })
                .sum()
        })
        .collect();
    let gains: Vec<f64> = (0..cfg.channels)
        .map(|_| 1.0 + cfg.gain_spread * real_gaussian(&mut rng, 1.0))
        .collect();

    let ecg_power = clean_rows.iter().map(|r| power(r)).sum::<f64>() / cfg.channels as f64;
    let gain_power = gains.iter().map(|g| g * g).sum::<f64>() / cfg.channels as f64;
    let target = ecg_power * 10f64.powf(cfg.interferer_db / 10.0);
    let scale = (target / (gain_power * power(&interferer))).sqrt();
    interferer.iter_mut().for_each(|v| *v *= scale);

    let clean = CMatrix::from_fn(cfg.channels, n, |i, k| C64::new(clean_rows[i][k], 0.0));
    let observed = CMatrix::from_fn(cfg.channels, n, |i, k| {
        C64::new(clean_rows[i][k] + gains[i] * interferer[k], 0.0)
    });
    Ok(Surrogate {
        rate_hz: cfg.rate_hz,
        clean,
        interferer,
        gains,
        observed: SignalBatch::new(observed)?,
    })
}

/// Energy of `x` along the time course `reference`, summed over channels:
/// `Σᵢ |⟨xᵢ, r⟩|² / ‖r‖²`.
pub fn interferer_power(x: &CMatrix, reference: &[f64]) -> Result<f64> {
    if x.cols() != reference.len() {
        return Err(Error::dims("reference length differs from sample count"));
    }
    let norm_sq: f64 = reference.iter().map(|r| r * r).sum();
    if norm_sq == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((0..x.rows())
        .map(|i| {
            let dot: C64 = x.row(i).iter().zip(reference).map(|(z, &r)| z * r).sum();
            dot.norm_sqr() / norm_sq
        })
        .sum())
}

/// `10·log₁₀` of the interferer power before over after cleaning.
pub fn interferer_reduction_db(
    before: &CMatrix,
    after: &CMatrix,
    reference: &[f64],
) -> Result<f64> {
    let a = interferer_power(before, reference)?;
    let b = interferer_power(after, reference)?;
    Ok(10.0 * (a / b).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surrogate_shape_and_power_ratio() {
        let cfg = SurrogateConfig::default();
        let s = generate(&cfg).unwrap();
        assert_eq!(s.observed.data().shape(), (3, 1000));
        assert!(s.observed.data().is_real());
        let ecg: f64 = s.clean.frobenius_norm_sq();
        let noise: f64 = s.gains.iter().map(|g| g * g).sum::<f64>()
            * s.interferer.iter().map(|v| v * v).sum::<f64>();
        assert!((10.0 * (noise / ecg).log10() - 20.0).abs() < 1e-9);
        let again = generate(&cfg).unwrap();
        assert_eq!(again.observed, s.observed);
    }

    #[test]
    fn interferer_has_expected_fundamental() {
        let s = generate(&SurrogateConfig::default()).unwrap();
        let n = s.interferer.len() as f64;
        let amp = |f: f64| {
            let (mut c, mut si) = (0.0, 0.0);
            for (k, v) in s.interferer.iter().enumerate() {
                let ph = 2.0 * PI * f * k as f64 / 500.0;
                c += v * ph.cos();
                si += v * ph.sin();
            }
            (c * c + si * si).sqrt() / n
        };
        assert!(amp(37.0) > 10.0 * amp(50.0));
        assert!(amp(74.0) > 10.0 * amp(90.0));
    }

    #[test]
    fn power_metric() {
        let r = vec![1.0, -1.0, 1.0, -1.0];
        let x = CMatrix::from_fn(2, 4, |i, k| C64::new(r[k] * (i + 1) as f64, 0.0));
        assert!((interferer_power(&x, &r).unwrap() - 20.0).abs() < 1e-12);
        let orth = CMatrix::from_fn(1, 4, |_, _| C64::new(1.0, 0.0));
        assert_eq!(interferer_power(&orth, &r).unwrap(), 0.0);
        assert!(matches!(
            interferer_power(&orth, &[0.0; 4]),
            Err(Error::ZeroReference)
        ));
    }
}
