//! Independent reference implementations checked against the library.

use num_traits::ToPrimitive;
use ropuf_tdma::collision::{
    collision_probability, collision_probability_rational, nodes_supported, CollisionQuery,
};
use ropuf_tdma::dispersion::{sweep_outputs, windowed_std, SeedSweep};
use ropuf_tdma::prbs::{
    lfsr_step, period, registry, registry_polynomial, signature_from_seed, FeedbackPolynomial,
    LfsrState,
};

/// Shift register as an explicit array of stages 1..=n (index 0 unused).
struct StageRegister {
    stages: Vec<u8>,
    taps: Vec<u32>,
}

impl StageRegister {
    fn load(value: u32, poly: &FeedbackPolynomial) -> Self {
        let n = poly.order() as usize;
        let mut stages = vec![0u8; n + 1];
        for (k, stage) in stages.iter_mut().enumerate().skip(1) {
            *stage = ((value >> (k - 1)) & 1) as u8;
        }
        Self {
            stages,
            taps: poly.taps().to_vec(),
        }
    }

    fn clock(&mut self) -> u8 {
        let n = self.stages.len() - 1;
        let fb = self
            .taps
            .iter()
            .fold(0u8, |acc, &t| acc ^ self.stages[t as usize]);
        let out = self.stages[n];
        for k in (2..=n).rev() {
            self.stages[k] = self.stages[k - 1];
        }
        self.stages[1] = fb;
        out
    }

    fn value(&self) -> u32 {
        self.stages
            .iter()
            .enumerate()
            .skip(1)
            .fold(0, |acc, (k, &b)| acc | (b as u32) << (k - 1))
    }
}

#[test]
fn step_matches_stage_array() {
    for poly in registry() {
        let limit = poly.state_mask().min(4095);
        for value in 0..=limit {
            let mut reg = StageRegister::load(value, &poly);
            let out = reg.clock();
            let (next, bit) = lfsr_step(LfsrState::new(value), &poly);
            assert_eq!(
                (next.bits(), bit),
                (reg.value(), out == 1),
                "{poly} from {value}"
            );
        }
    }
}

#[test]
fn signature_matches_stage_array() {
    let prbs9 = registry_polynomial(9).unwrap();
    for seed in 1..512u32 {
        let mut reg = StageRegister::load(seed, &prbs9);
        for _ in 0..9 {
            reg.clock();
        }
        assert_eq!(signature_from_seed(seed, &prbs9), reg.value());
    }
}

#[test]
fn period_matches_stage_array_walk() {
    for order in 5..=12 {
        let poly = registry_polynomial(order).unwrap();
        let mut reg = StageRegister::load(1, &poly);
        let mut n = 0u64;
        loop {
            reg.clock();
            n += 1;
            if reg.value() == 1 {
                break;
            }
        }
        assert_eq!(period(&poly), n);
        assert_eq!(n, (1 << order) - 1);
    }
}

#[test]
fn float_path_agrees_with_factorial_oracle() {
    let mut worst = 0.0f64;
    for order in 1..=8u32 {
        for nodes in 0..=(1u64 << order) {
            let q = CollisionQuery::new(order, nodes).unwrap();
            let exact = collision_probability_rational(q).unwrap().to_f64().unwrap();
            let float = collision_probability::<f64>(q);
            worst = worst.max((exact - float).abs());
        }
    }
    assert!(worst <= 1e-12, "worst deviation {worst:e}");
}

#[test]
fn nodes_supported_matches_rational_scan() {
    for order in 1..=8u32 {
        let half = ropuf_tdma::Rational::new(1.into(), 2.into());
        let scanned = (0..=(1u64 << order) + 1)
            .take_while(|&n| {
                collision_probability_rational(CollisionQuery::new(order, n).unwrap()).unwrap()
                    < half
            })
            .last()
            .unwrap();
        assert_eq!(nodes_supported(order).unwrap(), scanned, "order {order}");
    }
}

fn brute_force_stds(xs: &[u32], w: usize) -> Vec<f64> {
    xs.windows(w)
        .map(|win| {
            let mean = win.iter().map(|&x| x as f64).sum::<f64>() / w as f64;
            let var = win.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / w as f64;
            var.sqrt()
        })
        .collect()
}

#[test]
fn windowed_std_matches_two_pass_on_registry_sweeps() {
    for order in [5, 9, 12] {
        let sweep = sweep_outputs(&registry_polynomial(order).unwrap()).unwrap();
        for w in [1, 2, 7, 16, 31] {
            let fast = windowed_std::<f64>(&sweep, w).unwrap();
            let slow = brute_force_stds(sweep.outputs(), w);
            assert_eq!(fast.per_window_std.len(), slow.len());
            for (a, b) in fast.per_window_std.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-9 * b.max(1.0));
            }
            let min = slow.iter().copied().fold(f64::INFINITY, f64::min);
            assert!((fast.min_std - min).abs() < 1e-9 * min.max(1.0));
        }
    }
}

#[test]
fn windowed_std_matches_two_pass_on_random_sweeps() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let order = rng.random_range(1..=7u32);
        let len = 1usize << order;
        let xs: Vec<u32> = (0..len).map(|_| rng.random_range(0..len as u32)).collect();
        let w = rng.random_range(1..=len);
        let sweep = SeedSweep::from_outputs(order, xs.clone()).unwrap();
        let fast = windowed_std::<f64>(&sweep, w).unwrap();
        for (a, b) in fast.per_window_std.iter().zip(brute_force_stds(&xs, w)) {
            assert!((a - b).abs() < 1e-9 * b.max(1.0));
        }
    }
}
