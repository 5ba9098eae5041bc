//! Reference computations that avoid the library's code paths: closed-form
//! likelihoods with factorials from summed logarithms, midpoint-rule
//! quadrature on a dense grid, and brute-force maxima searches.

#![allow(dead_code)]

use std::f64::consts::PI;

use mzfid::{Outcome, StateCoefficients};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn ln_fact(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    (ln_fact(n) - ln_fact(k) - ln_fact(n - k)).exp()
}

pub fn fock_closed(n: u32, o: Outcome, phi: f64) -> f64 {
    if o.n_c + o.n_d != n {
        return 0.0;
    }
    let s = (phi / 2.0).sin();
    let c = (phi / 2.0).cos();
    binomial(n, o.n_c) * s.powi(2 * o.n_c as i32) * c.powi(2 * o.n_d as i32)
}

pub fn noon_closed(n: u32, o: Outcome, phi: f64) -> f64 {
    if o.n_c + o.n_d != n {
        return 0.0;
    }
    let s = (phi / 2.0).sin();
    let c = (phi / 2.0).cos();
    let sign = if o.n_c % 2 == 0 { 1.0 } else { -1.0 };
    let b = s.powi(o.n_c as i32) * c.powi(o.n_d as i32) + sign * s.powi(o.n_d as i32) * c.powi(o.n_c as i32);
    0.5 * binomial(n, o.n_c) * b * b
}

/// Mutual information in bits by the midpoint rule on `points` nodes,
/// for likelihood functions `lik(m, phi)` with `m in 0..outcomes`.
pub fn midpoint_information(outcomes: usize, points: usize, lik: impl Fn(usize, f64) -> f64) -> f64 {
    let h = 2.0 * PI / points as f64;
    let nodes: Vec<f64> = (0..points).map(|k| -PI + (k as f64 + 0.5) * h).collect();
    let mut total = 0.0;
    for m in 0..outcomes {
        let vals: Vec<f64> = nodes.iter().map(|&phi| lik(m, phi)).collect();
        let integral: f64 = vals.iter().sum::<f64>() * h;
        if integral <= 0.0 {
            continue;
        }
        for v in vals {
            if v > 0.0 {
                total += v * (2.0 * PI * v / integral).log2() * h;
            }
        }
    }
    total / (2.0 * PI)
}

/// Strict local maxima of `f` on a `points`-node periodic grid, ignoring
/// values below `rel` of the largest sample.
pub fn brute_force_maxima(points: usize, rel: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let nodes: Vec<f64> = (0..points).map(|k| -PI + 2.0 * PI * (k as f64 + 1.0) / points as f64).collect();
    let vals: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    let top = vals.iter().cloned().fold(0.0, f64::max);
    (0..points)
        .filter(|&k| {
            let prev = vals[(k + points - 1) % points];
            let next = vals[(k + 1) % points];
            vals[k] > prev && vals[k] >= next && vals[k] > rel * top
        })
        .map(|k| nodes[k])
        .collect()
}

/// Single-photon likelihoods for input `c0 |0_a,1_b> + c1 |1_a,0_b>` on a
/// balanced interferometer, from hand-expanded matrix elements.
pub fn single_photon_closed(c0: Complex64, c1: Complex64, outcome_c: bool, phi: f64) -> f64 {
    let s = (phi / 2.0).sin();
    let c = (phi / 2.0).cos();
    if outcome_c {
        (c1 * s - c0 * c).norm_sqr()
    } else {
        (c1 * c + c0 * s).norm_sqr()
    }
}

pub fn random_state(n: u32, rng: &mut ChaCha8Rng) -> StateCoefficients {
    let raw: Vec<Complex64> = (0..=n)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    StateCoefficients::new("random", raw.into_iter().map(|c| c / norm).collect()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
