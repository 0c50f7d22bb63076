use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use svprm::envs::{gen_checkerboard, CheckerboardSpec};
use svprm::geometry::{Circle, ConfigSpace, KinematicChain, ObstacleSet};
use svprm::models::{
    posterior_grad, BayesianHilbertMap, BhmFitConfig, BoxBarrierPrior, FeasibilityModel, LabeledPoint, TsdfArmModel,
};

fn sigmoid(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

fn arm_model() -> TsdfArmModel {
    let chain = KinematicChain::new(vec![1.0, 0.8, 0.6], [0.0, 0.0], 2, 0.08).unwrap();
    let obstacles = ObstacleSet::new(
        vec![Circle { center: [1.4, 0.9], radius: 0.35 }, Circle { center: [-0.6, 1.5], radius: 0.4 }],
        vec![],
    )
    .unwrap();
    TsdfArmModel::new(chain, obstacles, TsdfArmModel::DEFAULT_EPSILON, TsdfArmModel::DEFAULT_ALPHA)
}

#[test]
fn tsdf_jacobian_matches_finite_differences() {
    let model = arm_model();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 20 {
        let q: Vec<f64> = (0..3).map(|_| rng.random_range(-3.1..3.1)).collect();
        if model.kink_distance(&q) < 1e-3 {
            continue;
        }
        let cost = model.tsdf_cost(&q);
        let step = 1e-6;
        for k in 0..3 {
            let mut plus = q.clone();
            let mut minus = q.clone();
            plus[k] += step;
            minus[k] -= step;
            let (hp, hm) = (model.tsdf_cost(&plus).h, model.tsdf_cost(&minus).h);
            for j in 0..cost.h.len() {
                let fd = (hp[j] - hm[j]) / (2.0 * step);
                assert!((fd - cost.jacobian[j][k]).abs() < 1e-6, "q={q:?} sphere {j} joint {k}");
            }
        }
        checked += 1;
    }
}

#[test]
fn tsdf_likelihood_is_exp_of_cost() {
    let model = arm_model();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let q: Vec<f64> = (0..3).map(|_| rng.random_range(-3.1..3.1)).collect();
        let sq = model.tsdf_cost(&q).squared_norm();
        assert!((model.log_likelihood(&q) + model.alpha * sq).abs() < 1e-12);
    }
}

#[test]
fn tsdf_hand_value() {
    // sphere at (0.5, 0) with radius 0.05 sits 0.05 from the obstacle, so h = 0.2
    let chain = KinematicChain::new(vec![1.0], [0.0, 0.0], 1, 0.05).unwrap();
    let obs = ObstacleSet::new(vec![Circle { center: [0.5, 0.5], radius: 0.4 }], vec![]).unwrap();
    let model = TsdfArmModel::new(chain, obs, 0.25, 10.0);
    assert!((model.tsdf_cost(&[0.0]).squared_norm() - 0.04).abs() < 1e-12);
    assert!((model.log_likelihood(&[0.0]) + 0.4).abs() < 1e-12);
}

#[test]
fn tsdf_likelihood_grows_with_clearance() {
    // one link straight along +x, obstacle ahead on the axis
    let chain = KinematicChain::new(vec![1.0], [0.0, 0.0], 1, 0.05).unwrap();
    let make = |cx: f64| {
        let obs = ObstacleSet::new(vec![Circle { center: [cx, 0.0], radius: 0.2 }], vec![]).unwrap();
        TsdfArmModel::new(chain.clone(), obs, 0.25, 10.0).log_likelihood(&[0.0])
    };
    let values: Vec<f64> = [0.8, 0.85, 0.9, 0.95, 1.0].iter().map(|&c| make(c)).collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0]), "{values:?}");
    assert!(values[0] < values[4]);
}

/// One-dimensional MAP logistic regression by Newton's method.
fn reference_logistic(phi: &[f64], labels: &[bool], prior_variance: f64) -> f64 {
    let mut w = 0.0;
    for _ in 0..100 {
        let mut g = -w / prior_variance;
        let mut h = 1.0 / prior_variance;
        for (f, z) in phi.iter().zip(labels) {
            let p = sigmoid(w * f);
            g += (if *z { 1.0 } else { 0.0 } - p) * f;
            h += p * (1.0 - p) * f * f;
        }
        w += g / h;
    }
    w
}

#[test]
fn single_center_fit_matches_reference_logistic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let truth = -3.0;
    let mut points = Vec::new();
    for _ in 0..2000 {
        let x = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let phi = (-(x[0] * x[0] + x[1] * x[1]) / 2.0f64).exp();
        points.push(LabeledPoint { x, free: rng.random::<f64>() < sigmoid(truth * phi) });
    }
    let cfg = BhmFitConfig { lengthscale: 1.0, prior_variance: 100.0, max_iters: 500, bias: false, tol: 1e-10 };
    let bhm = BayesianHilbertMap::fit(&points, vec![[0.0, 0.0]], &cfg).unwrap();
    let phi: Vec<f64> = points.iter().map(|p| (-(p.x[0].powi(2) + p.x[1].powi(2)) / 2.0).exp()).collect();
    let labels: Vec<bool> = points.iter().map(|p| p.free).collect();
    let reference = reference_logistic(&phi, &labels, 100.0);
    let fitted = bhm.mean()[0];
    assert!((fitted - reference).abs() < 0.05 * reference.abs(), "{fitted} vs {reference}");
}

#[test]
fn single_center_separates_near_and_far_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut points = Vec::new();
    for k in 0..100 {
        let near = k < 50;
        let r = if near { rng.random_range(0.0..0.3) } else { rng.random_range(2.0..3.0) };
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        points.push(LabeledPoint { x: [r * t.cos(), r * t.sin()], free: near });
    }
    let cfg = BhmFitConfig { lengthscale: 1.0, prior_variance: 10.0, max_iters: 500, bias: true, tol: 1e-10 };
    let bhm = BayesianHilbertMap::fit(&points, vec![[0.0, 0.0]], &cfg).unwrap();
    let (center, far) = (bhm.predict(&[0.0, 0.0]), bhm.predict(&[2.5, 0.0]));
    assert!(center > 0.9 && far < 0.1, "center {center}, far {far}");
}

#[test]
fn vanishing_prior_variance_gives_one_half() {
    let points = vec![LabeledPoint { x: [0.0, 0.0], free: false }, LabeledPoint { x: [1.0, 0.0], free: true }];
    let cfg = BhmFitConfig { lengthscale: 0.5, prior_variance: 1e-12, max_iters: 50, bias: false, tol: 1e-9 };
    let bhm = BayesianHilbertMap::fit(&points, vec![[0.0, 0.0], [1.0, 0.0]], &cfg).unwrap();
    for x in [[0.0, 0.0], [0.5, 0.3], [1.0, 0.0]] {
        assert!((bhm.predict(&x) - 0.5).abs() < 1e-6);
    }
}

#[test]
fn moderated_prediction_matches_monte_carlo() {
    let centers = vec![[0.0, 0.0], [0.6, 0.2], [-0.3, 0.5]];
    let bhm = BayesianHilbertMap::new(centers, vec![1.5, -2.0, 0.7], vec![0.8, 2.5, 1.2], 0.4, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for x in [[0.1, 0.1], [0.5, 0.2], [-0.2, 0.4], [0.3, -0.2]] {
        let (a, v) = bhm.activation_moments(&x);
        let mc: f64 = (0..100_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                sigmoid(a + v.sqrt() * z)
            })
            .sum::<f64>()
            / 100_000.0;
        assert!((bhm.predict(&x) - mc).abs() < 0.02, "x={x:?}: {} vs {mc}", bhm.predict(&x));
    }
}

#[test]
fn activation_moments_use_gaussian_features() {
    let bhm =
        BayesianHilbertMap::new(vec![[0.0, 0.0], [1.0, 0.0]], vec![2.0, -1.0], vec![0.5, 0.25], 0.5, None).unwrap();
    let x = [0.3, 0.4];
    let phi = |c: [f64; 2]| (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (2.0 * 0.25)).exp();
    let (a, v) = bhm.activation_moments(&x);
    let (p0, p1) = (phi([0.0, 0.0]), phi([1.0, 0.0]));
    assert!((a - (2.0 * p0 - p1)).abs() < 1e-12);
    assert!((v - (0.5 * p0 * p0 + 0.25 * p1 * p1)).abs() < 1e-12);
}

#[test]
fn posterior_gradient_matches_finite_differences() {
    let bhm = BayesianHilbertMap::new(
        vec![[0.0, 0.0], [0.5, 0.5], [1.0, 0.0]],
        vec![1.0, -2.0, 0.5],
        vec![0.3, 0.6, 0.2],
        0.4,
        Some((0.2, 0.1)),
    )
    .unwrap();
    let prior = BoxBarrierPrior::new(ConfigSpace::cube(2, -1.0, 2.0).unwrap(), 50.0, 0.3);
    let log_post = |x: &[f64]| {
        use svprm::models::LogPrior;
        bhm.log_likelihood(x) + prior.log_density(x)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..30 {
        let x = [rng.random_range(-0.9..1.9), rng.random_range(-0.9..1.9)];
        let g = posterior_grad(&bhm, &prior, &x);
        for i in 0..2 {
            let (mut p, mut m) = (x, x);
            p[i] += 1e-6;
            m[i] -= 1e-6;
            let fd = (log_post(&p) - log_post(&m)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-5 * (1.0 + fd.abs()), "x={x:?} axis {i}: {fd} vs {}", g[i]);
        }
    }
}

#[test]
fn checkerboard_field_separates_gaps_and_blocks() {
    let spec = CheckerboardSpec::default();
    let board = gen_checkerboard(&spec).unwrap();
    for g in spec.gap_centers() {
        assert!(board.field.probability(&g) > 0.5, "gap {g:?}");
    }
    for b in spec.blocks() {
        let c = [(b.min[0] + b.max[0]) / 2.0, (b.min[1] + b.max[1]) / 2.0];
        assert!(board.field.probability(&c) < 0.5, "block {c:?}");
    }
}

#[test]
fn checkerboard_free_fraction() {
    // half the cells are blocks shrunk by the gap on each side
    for g in [0.08, 0.49] {
        let spec = CheckerboardSpec { gap_fraction: g, ..CheckerboardSpec::default() };
        let expected = 1.0 - 0.5 * (1.0 - g) * (1.0 - g);
        let got = spec.grid().free_fraction();
        assert!((got - expected).abs() < 0.02, "gap {g}: {got} vs {expected}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn center_order_does_not_change_predictions(perm_seed in any::<u64>(), x in -0.5..1.5f64, y in -0.5..1.5f64) {
        let centers = vec![[0.0, 0.0], [0.5, 0.5], [1.0, 0.0], [0.2, 0.9]];
        let mean = vec![1.0, -2.0, 0.5, 0.3];
        let var = vec![0.3, 0.6, 0.2, 1.0];
        let mut order: Vec<usize> = (0..4).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
        for i in (1..4).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let a = BayesianHilbertMap::new(centers.clone(), mean.clone(), var.clone(), 0.4, None).unwrap();
        let b = BayesianHilbertMap::new(
            order.iter().map(|&i| centers[i]).collect(),
            order.iter().map(|&i| mean[i]).collect(),
            order.iter().map(|&i| var[i]).collect(),
            0.4,
            None,
        )
        .unwrap();
        prop_assert!((a.predict(&[x, y]) - b.predict(&[x, y])).abs() < 1e-12);
    }

    #[test]
    fn probabilities_stay_in_unit_interval(q in prop::collection::vec(-3.2..3.2f64, 3)) {
        let p = arm_model().probability(&q);
        prop_assert!(p > 0.0 && p <= 1.0);
    }
}
