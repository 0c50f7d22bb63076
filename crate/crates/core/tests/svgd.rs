use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use svprm::geometry::{sample_uniform, ConfigSpace};
use svprm::models::{ConstantModel, FlatPrior, GaussianDensity, IsotropicMixture, Posterior};
use svprm::svgd::{
    estimate_metric, kernel_eval, run_inference, stein_direction, svgd_step, Bandwidth, KernelConfig, MetricMode,
    ParticleSet, SvgdConfig,
};

fn gaussian_samples(mean: &[f64], stds: &[f64], n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| mean.iter().zip(stds).map(|(m, s)| Normal::new(*m, *s).unwrap().sample(&mut rng)).collect())
        .collect()
}

#[test]
fn kernel_hand_value() {
    let m = DMatrix::from_element(1, 1, 1.0);
    let (k, g) = kernel_eval(&m, 2.0, &[1.0], &[0.0]);
    assert!((k - (-0.25f64).exp()).abs() < 1e-15);
    // gradient with respect to the second argument points toward the first
    assert!((g[0] - 0.5 * (-0.25f64).exp()).abs() < 1e-15);
}

#[test]
fn avg_hessian_recovers_inverse_covariance() {
    let target = GaussianDensity::new(vec![0.0, 0.0], vec![1.0, 0.01]);
    let prior = FlatPrior { dim: 2 };
    let post = Posterior::new(&target, &prior);
    let pts = gaussian_samples(&[0.0, 0.0], &[1.0, 0.1], 200, 1);
    let views: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
    let m = estimate_metric(MetricMode::AvgHessian, &views, &post, false);
    assert!((m[(0, 0)] - 1.0).abs() < 0.1 && (m[(1, 1)] - 100.0).abs() < 10.0, "{m}");
    assert!(m[(0, 1)].abs() < 1e-9);
}

#[test]
fn grad_outer_recovers_fisher_information() {
    let target = GaussianDensity::new(vec![0.0, 0.0], vec![1.0, 0.01]);
    let prior = FlatPrior { dim: 2 };
    let post = Posterior::new(&target, &prior);
    let pts = gaussian_samples(&[0.0, 0.0], &[1.0, 0.1], 4000, 2);
    let views: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
    let m = estimate_metric(MetricMode::GradOuter, &views, &post, true);
    assert!((m[(0, 0)] - 1.0).abs() < 0.1 && (m[(1, 1)] - 100.0).abs() < 10.0, "{m}");
}

#[test]
fn single_particle_follows_the_gradient() {
    // gradient of a Gaussian with mean (1, -2) and variances (0.5, 2)
    let x = [0.3, 0.4];
    let grad = vec![-(0.3 - 1.0) / 0.5, -(0.4 + 2.0) / 2.0];
    let phi = stein_direction(&[&x], std::slice::from_ref(&grad), &DMatrix::identity(2, 2), 0.7, false);
    assert_eq!(phi, grad);
}

#[test]
fn bimodal_target_keeps_both_modes() {
    let target = IsotropicMixture::new(vec![vec![-2.0], vec![2.0]], 0.5);
    let prior = FlatPrior { dim: 1 };
    let post = Posterior::new(&target, &prior);
    let space = ConfigSpace::cube(1, -4.0, 4.0).unwrap();
    let init = sample_uniform(&space, 40, 3);
    let cfg = SvgdConfig { step_size: 0.05, max_iters: 1000, grad_tol: 1e-9, ..SvgdConfig::default() };
    let out = run_inference(ParticleSet::new(&init, 0).unwrap(), &post, Some(&space), &cfg).unwrap();
    let left = out.particles.iter().filter(|p| p[0] < 0.0).count();
    let right = out.particles.len() - left;
    assert!(left >= 10 && right >= 10, "{left} left, {right} right");
}

#[test]
fn parallel_and_sequential_agree() {
    let target = IsotropicMixture::new(vec![vec![-1.0, 0.0], vec![1.0, 0.5]], 0.4);
    let prior = FlatPrior { dim: 2 };
    let post = Posterior::new(&target, &prior);
    let space = ConfigSpace::cube(2, -2.0, 2.0).unwrap();
    let init = sample_uniform(&space, 60, 4);
    for mode in [MetricMode::Identity, MetricMode::AvgHessian, MetricMode::GradOuter] {
        let base = SvgdConfig { max_iters: 50, metric_mode: mode, ..SvgdConfig::default() };
        let seq = SvgdConfig { parallel: false, ..base.clone() };
        let par = SvgdConfig { parallel: true, ..base };
        let a = run_inference(ParticleSet::new(&init, 0).unwrap(), &post, Some(&space), &seq).unwrap();
        let b = run_inference(ParticleSet::new(&init, 0).unwrap(), &post, Some(&space), &par).unwrap();
        assert_eq!(a.particles, b.particles, "{mode:?}");
        assert_eq!(a.trace, b.trace, "{mode:?}");
    }
}

#[test]
fn infinite_tolerance_stops_after_one_step() {
    let target = GaussianDensity::isotropic(vec![0.0], 1.0);
    let prior = FlatPrior { dim: 1 };
    let post = Posterior::new(&target, &prior);
    let cfg = SvgdConfig { grad_tol: f64::INFINITY, ..SvgdConfig::default() };
    let out = run_inference(ParticleSet::new(&[vec![0.5], vec![-1.0]], 0).unwrap(), &post, None, &cfg).unwrap();
    assert_eq!(out.trace.len(), 1);
    assert_eq!(out.particles.iteration, 1);
}

#[test]
fn particles_stay_inside_bounds() {
    // the target mode lies outside the box
    let target = GaussianDensity::isotropic(vec![3.0, 3.0], 0.3);
    let prior = FlatPrior { dim: 2 };
    let post = Posterior::new(&target, &prior);
    let space = ConfigSpace::cube(2, 0.0, 1.0).unwrap();
    let init = sample_uniform(&space, 20, 5);
    let cfg = SvgdConfig { max_iters: 100, ..SvgdConfig::default() };
    let out = run_inference(ParticleSet::new(&init, 0).unwrap(), &post, Some(&space), &cfg).unwrap();
    assert!(out.particles.iter().all(|p| space.contains(p)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn repulsion_separates_particles_under_a_flat_target(
        a in prop::collection::vec(-1.0..1.0f64, 2),
        b in prop::collection::vec(-1.0..1.0f64, 2),
        h in 0.05..2.0f64,
    ) {
        prop_assume!(svprm::geometry::dist(&a, &b) > 1e-3);
        let flat = ConstantModel { dim: 2, probability: 1.0 };
        let prior = FlatPrior { dim: 2 };
        let post = Posterior::new(&flat, &prior);
        let mut set = ParticleSet::new(&[a.clone(), b.clone()], 0).unwrap();
        let kernel = KernelConfig::isotropic(2, Bandwidth::Fixed(h));
        let cfg = SvgdConfig { step_size: 1e-2, adagrad_decay: 1.0, ..SvgdConfig::default() };
        svgd_step(&mut set, &post, None, &kernel, &cfg).unwrap();
        let after = svprm::geometry::dist(set.point(0), set.point(1));
        prop_assert!(after > svprm::geometry::dist(&a, &b));
    }

    #[test]
    fn metric_is_symmetric_positive_definite(seed in any::<u64>(), n in 2usize..30) {
        let target = IsotropicMixture::new(vec![vec![-1.0, 0.0], vec![1.0, 0.5]], 0.4);
        let prior = FlatPrior { dim: 2 };
        let post = Posterior::new(&target, &prior);
        let pts = sample_uniform(&ConfigSpace::cube(2, -2.0, 2.0).unwrap(), n, seed);
        let views: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        for mode in [MetricMode::Identity, MetricMode::AvgHessian, MetricMode::GradOuter] {
            let m = estimate_metric(mode, &views, &post, false);
            prop_assert!((&m - m.transpose()).amax() < 1e-12);
            prop_assert!(m.clone().cholesky().is_some());
        }
    }
}
