use proptest::prelude::*;

use srcimage::estimators::{complete_orthogonal, inv_image_transform, ls_image_transform};
use srcimage::harness::{format_results, parse_results, ResultRow};
use srcimage::matcore::{orthonormal_null_basis, relative_error, CMatrix, LuFactor};
use srcimage::model::{
    generate_gaussian_batch, random_block_rescale, sample_covariance, Block, DemixingEstimate,
    MixingSystem, PerturbationDraw,
};
use srcimage::rng::{complex_gaussian_matrix, rng_from_seed};
use srcimage::underdetermined::{
    build_blocking_matrix, ls_noise_extract, lsopt_oracle, mmse_oracle, nmse_signals,
    UnderdeterminedMixture,
};

fn split() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=8).prop_flat_map(|d| (Just(d), 1..d))
}

fn perturbed(d: usize, m: usize, lambda_sq: f64, seed: u64) -> (MixingSystem, DemixingEstimate) {
    let sys = MixingSystem::random(d, m, 1.0, seed).unwrap();
    let draw = PerturbationDraw::draw(d, m, lambda_sq, lambda_sq, 1.0, seed ^ 0xabc).unwrap();
    let w = DemixingEstimate::new(&sys.demixing().unwrap().w + &draw.xi, m).unwrap();
    (sys, w)
}

fn sample_cov(sys: &MixingSystem, n: usize, seed: u64) -> CMatrix {
    let s = generate_gaussian_batch(sys.d(), n, 1.0, seed).unwrap();
    let x = sys.h().dot(s.data());
    sample_covariance(&srcimage::model::SignalBatch::new(x).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn image_transforms_are_projectors((d, m) in split(), seed in any::<u64>()) {
        let (sys, w) = perturbed(d, m, 1e-2, seed);
        let c = sample_cov(&sys, 4 * d, seed ^ 1);
        for t in [
            inv_image_transform(&w, Block::Target).unwrap().matrix,
            ls_image_transform(&w.rows_of(Block::Target), &c).unwrap().matrix,
        ] {
            prop_assert!(relative_error(&t.dot(&t), &t) < 1e-8);
        }
    }

    #[test]
    fn transforms_ignore_block_scaling((d, m) in split(), seed in any::<u64>()) {
        let (sys, w) = perturbed(d, m, 1e-3, seed);
        let c = sample_cov(&sys, 4 * d, seed ^ 1);
        let scaled = random_block_rescale(&w, seed ^ 2).unwrap();
        let inv = inv_image_transform(&w, Block::Target).unwrap().matrix;
        let inv_s = inv_image_transform(&scaled, Block::Target).unwrap().matrix;
        prop_assert!(relative_error(&inv_s, &inv) < 1e-9);
        let ls = ls_image_transform(&w.rows_of(Block::Target), &c).unwrap().matrix;
        let ls_s = ls_image_transform(&scaled.rows_of(Block::Target), &c).unwrap().matrix;
        prop_assert!(relative_error(&ls_s, &ls) < 1e-9);
    }

    #[test]
    fn completion_decorrelates_and_reproduces_ls((d, m) in split(), seed in any::<u64>()) {
        let (sys, w) = perturbed(d, m, 1e-1, seed);
        let c = sample_cov(&sys, 3 * d, seed ^ 1);
        let w1 = w.rows_of(Block::Target);
        let full = complete_orthogonal(&w1, &c).unwrap();
        let cross = full.rows_of(Block::Interference).dot(&c).mul_adjoint(&w1);
        prop_assert!(cross.max_abs() < 1e-9 * c.max_abs() * full.w.max_abs() * w1.max_abs() * d as f64);
        let inv = inv_image_transform(&full, Block::Target).unwrap().matrix;
        let ls = ls_image_transform(&w1, &c).unwrap().matrix;
        prop_assert!(relative_error(&inv, &ls) < 1e-8);
    }

    #[test]
    fn null_basis_is_orthonormal_complement((d, m) in split(), seed in any::<u64>()) {
        let a = complex_gaussian_matrix(&mut rng_from_seed(seed), m, d, 1.0);
        let q = orthonormal_null_basis(&a).unwrap();
        prop_assert_eq!(q.shape(), (d - m, d));
        prop_assert!(relative_error(&q.gram(), &CMatrix::identity(d - m)) < 1e-12);
        prop_assert!(a.mul_adjoint(&q).max_abs() < 1e-12 * d as f64);
    }

    #[test]
    fn lu_solves((d, _m) in split(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let a = complex_gaussian_matrix(&mut rng, d, d, 1.0);
        let b = complex_gaussian_matrix(&mut rng, d, 3, 1.0);
        if let Ok(lu) = LuFactor::new(&a) {
            let x = lu.solve(&b).unwrap();
            prop_assert!(relative_error(&a.dot(&x), &b) < 1e-9);
        }
    }

    #[test]
    fn noise_estimators_are_nested(d in 2usize..=6, seed in any::<u64>(), exp in -6i32..=-1) {
        let m = 1 + (seed % (d as u64 - 1)) as usize;
        let mix = UnderdeterminedMixture::generate(d, m, 200, seed).unwrap();
        let w = build_blocking_matrix(&mix.h1, 10f64.powi(exp), seed ^ 3).unwrap();
        let chat = sample_covariance(&mix.x);
        let ls = nmse_signals(&mix.s2, &ls_noise_extract(&w, &chat, &mix.x).unwrap()).unwrap();
        let lsopt = nmse_signals(&mix.s2, &lsopt_oracle(&w, &mix.x, &mix.s2).unwrap()).unwrap();
        let mmse = nmse_signals(&mix.s2, &mmse_oracle(&mix.x, &mix.s2).unwrap()).unwrap();
        prop_assert!(mmse <= lsopt * (1.0 + 1e-12));
        prop_assert!(lsopt <= ls * (1.0 + 1e-12));
    }

    #[test]
    fn sample_covariance_is_hermitian(r in 1usize..6, n in 1usize..40, seed in any::<u64>()) {
        let s = generate_gaussian_batch(r, n, 1.0, seed).unwrap();
        let c = sample_covariance(&s);
        prop_assert_eq!(c.adjoint(), c.clone());
        prop_assert!((0..r).all(|i| c[(i, i)].re >= 0.0));
    }

    #[test]
    fn result_csv_round_trips(
        values in prop::collection::vec((any::<f64>(), 1e-300f64..1e300, 1usize..100), 1..8),
    ) {
        let rows: Vec<ResultRow> = values
            .iter()
            .enumerate()
            .filter(|(_, (l, _, _))| l.is_finite())
            .map(|(i, &(l, mean, trials))| ResultRow {
                scenario: "custom".into(),
                d: 3 + i,
                m: 1,
                n: 10,
                lambda1_sq: l.abs(),
                lambda2_sq: 0.0,
                estimator: "LS".into(),
                trials,
                mean_nmse_linear: mean,
                mean_nmse_db: 10.0 * mean.log10(),
                stderr_db: 0.0,
            })
            .collect();
        let back = parse_results(&format_results(&rows), std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back, rows);
    }
}
