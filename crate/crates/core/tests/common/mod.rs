#![allow(dead_code)]

use powergame_core::CodeBook;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `s1 = [1,1,1,1]/2`, `s2 = [1,1,1,-1]/2`, so ρ = 0.5.
pub fn half_correlated() -> CodeBook {
    CodeBook::from_signs(vec![vec![1, 1, 1, 1], vec![1, 1, 1, -1]]).unwrap()
}

pub const HAND_POWERS: [f64; 2] = [2.0, 4.0];
pub const HAND_GAINS: [f64; 2] = [1.0, 0.5];
pub const HAND_NOISE: f64 = 1.0;

/// A random link-level instance: codes plus powers and gains at one receiver.
#[derive(Debug, Clone)]
pub struct Instance {
    pub codes: CodeBook,
    pub powers: Vec<f64>,
    pub gains: Vec<f64>,
    pub noise: f64,
}

/// Received powers spread over three decades around the noise floor.
pub fn random_instance(users: usize, chips: usize, seed: u64) -> Instance {
    let codes = CodeBook::generate(users, chips, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let powers = (0..users).map(|_| 10f64.powf(rng.random_range(-2.0..1.0))).collect();
    let gains = (0..users).map(|_| 10f64.powf(rng.random_range(-1.0..0.0))).collect();
    let noise = 10f64.powf(rng.random_range(-3.0..-1.0));
    Instance {
        codes,
        powers,
        gains,
        noise,
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
