#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// ARMA(p, q) sample path after a burn-in of 200 steps.
pub fn simulate_arma(rng: &mut ChaCha8Rng, n: usize, ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let burn = 200;
    let e = gaussian(rng, n + burn);
    let mut x = vec![0.0; n + burn];
    for t in 0..n + burn {
        let mut v = e[t];
        for (j, a) in ar.iter().enumerate() {
            if t > j {
                v += a * x[t - j - 1];
            }
        }
        for (j, b) in ma.iter().enumerate() {
            if t > j {
                v += b * e[t - j - 1];
            }
        }
        x[t] = v;
    }
    x.split_off(burn)
}

pub fn random_walk(rng: &mut ChaCha8Rng, n: usize, drift: f64) -> Vec<f64> {
    let mut level = 0.0;
    gaussian(rng, n)
        .into_iter()
        .map(|e| {
            level += drift + e;
            level
        })
        .collect()
}
