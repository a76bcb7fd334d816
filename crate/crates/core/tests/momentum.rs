use glnn::nn::ParamSet;
use glnn::optim::{momentum_step, sgd_step, OptimizerConfig, Velocity};
use glnn::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scalar_set(v: f64) -> ParamSet {
    let mut set = ParamSet::default();
    set.push("w", Tensor::full([1], v), true);
    set
}

fn value(set: &ParamSet) -> f64 {
    set.tensor(0).data()[0]
}

#[test]
fn update_is_the_discounted_gradient_sum() {
    let cfg = OptimizerConfig::golden();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let g: Vec<f64> = (0..10).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mut params = scalar_set(0.0);
        let mut velocity = Velocity::zeros_like(&params);
        let mut prev = 0.0;
        for t in 0..g.len() {
            momentum_step(&mut params, &scalar_set(g[t]), &mut velocity, &cfg).unwrap();
            let delta = value(&params) - prev;
            prev = value(&params);
            let unrolled: f64 = -cfg.eta
                * (0..=t).map(|k| cfg.alpha.powi(k as i32) * g[t - k]).sum::<f64>();
            let stored = value(velocity.buffers());
            let scale = g.iter().map(|x| x.abs()).sum::<f64>() * cfg.eta;
            assert!((stored - unrolled).abs() <= 1e-14 * scale, "t={t}: {stored} vs {unrolled}");
            assert!((delta - unrolled).abs() <= 1e-14 * scale.max(1.0));
        }
    }
}

#[test]
fn zero_alpha_is_plain_sgd_bitwise() {
    let cfg = OptimizerConfig {
        alpha: 0.0,
        ..OptimizerConfig::golden()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut a = scalar_set(0.3);
    let mut b = scalar_set(0.3);
    let mut velocity = Velocity::zeros_like(&a);
    for _ in 0..100 {
        let g = scalar_set(rng.gen_range(-1.0..1.0));
        momentum_step(&mut a, &g, &mut velocity, &cfg).unwrap();
        sgd_step(&mut b, &g, &cfg).unwrap();
        assert_eq!(value(&a).to_bits(), value(&b).to_bits());
    }
}
