//! Search over input-state coefficients for maximal fidelity.
//!
//! Each candidate is `2(N+1)` real numbers, read as interleaved real and
//! imaginary parts of `c_n`, projected onto the unit sphere before the
//! mutual information is evaluated. Every run seeds one restart at the Fock
//! state and one at the N00N state; the remaining restarts start from
//! Gaussian random vectors drawn from a ChaCha8 stream keyed by the seed.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fidelity::{information_bits, mutual_information};
use crate::nelder_mead::NelderMead;
use crate::optics::{likelihood_table, TransferTable};
use crate::{Error, InterferometerGeometry, Result, StateCoefficients};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Simplex convergence tolerance on H, in bits.
    pub tolerance: f64,
    pub seed: u64,
    pub search_grid: usize,
    pub report_grid: usize,
    pub initial_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iterations: 2000,
            tolerance: 1e-7,
            seed: 0,
            search_grid: 4096,
            report_grid: crate::DEFAULT_GRID_SIZE,
            initial_step: 0.25,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 2 {
            return Err(Error::Config("need at least 2 restarts (Fock and N00N seeds)".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if !(self.tolerance > 0.0) || !(self.initial_step > 0.0) {
            return Err(Error::Config("tolerance and initial step must be positive".into()));
        }
        if self.search_grid < 2 || self.report_grid < 2 {
            return Err(Error::Config("grid sizes must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestartSeed {
    Fock,
    Noon,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub seed: RestartSeed,
    /// Best H on the search grid.
    pub search_h_bits: f64,
    /// That restart's best state re-evaluated on the report grid.
    pub h_bits: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_state: StateCoefficients,
    /// Report-grid H of `best_state`.
    pub best_h_bits: f64,
    pub best_restart: usize,
    pub history: Vec<RestartSummary>,
    pub evaluations: usize,
}

/// Scales `raw` to unit norm and rotates the global phase so that the first
/// nonzero coefficient is real and positive.
pub fn project_normalize(raw: &[Complex64]) -> Result<StateCoefficients> {
    if raw.is_empty() {
        return Err(Error::Domain("empty coefficient vector".into()));
    }
    let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Domain(format!("cannot normalize a vector of norm {norm}")));
    }
    let mut coeffs: Vec<Complex64> = raw.iter().map(|c| c / norm).collect();
    if let Some(lead) = coeffs.iter().position(|c| c.norm_sqr() > 0.0) {
        let magnitude = coeffs[lead].norm();
        let rotation = coeffs[lead].conj() / magnitude;
        for c in coeffs.iter_mut() {
            *c *= rotation;
        }
        coeffs[lead] = Complex64::new(magnitude, 0.0);
    }
    StateCoefficients::new("custom", coeffs)
}

fn to_params(coeffs: &[Complex64]) -> Vec<f64> {
    coeffs.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn from_params(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

/// Maximizes the mutual information over normalized `N`-photon inputs.
pub fn optimize_input_state(
    photon_number: u32,
    config: &OptimizerConfig,
    geometry: &InterferometerGeometry,
) -> Result<OptimizationResult> {
    if photon_number < 1 {
        return Err(Error::Domain("optimization needs N >= 1".into()));
    }
    config.validate()?;
    let transfer = TransferTable::new(photon_number, geometry, config.search_grid)?;
    let dim = photon_number as usize + 1;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let starts: Vec<(RestartSeed, Vec<f64>)> = (0..config.restarts)
        .map(|i| match i {
            0 => (RestartSeed::Fock, to_params(StateCoefficients::fock(photon_number).coeffs())),
            1 => (
                RestartSeed::Noon,
                to_params(StateCoefficients::noon(photon_number).expect("N >= 1").coeffs()),
            ),
            _ => {
                let raw: Vec<f64> = (0..2 * dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let unit = project_normalize(&from_params(&raw)).expect("Gaussian draw is nonzero");
                (RestartSeed::Random, to_params(unit.coeffs()))
            }
        })
        .collect();

    let simplex = NelderMead {
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
        initial_step: config.initial_step,
    };
    let objective = |x: &[f64]| -> f64 {
        match project_normalize(&from_params(x)) {
            Ok(state) => {
                let rows = transfer.likelihood_rows(state.coeffs());
                -information_bits(&rows, config.search_grid)
            }
            Err(_) => f64::INFINITY,
        }
    };

    let runs: Vec<(RestartSummary, StateCoefficients)> = starts
        .par_iter()
        .enumerate()
        .map(|(index, (seed, x0))| {
            let r = simplex.minimize(objective, x0);
            let state = project_normalize(&from_params(&r.x))?.with_label("optimized");
            let h_bits = mutual_information(&likelihood_table(&state, geometry, config.report_grid)?)?.h_bits;
            Ok((
                RestartSummary {
                    index,
                    seed: *seed,
                    search_h_bits: -r.value,
                    h_bits,
                    iterations: r.iterations,
                    evaluations: r.evaluations,
                    converged: r.converged,
                },
                state,
            ))
        })
        .collect::<Result<_>>()?;

    // Highest report-grid H wins; ties go to the lower restart index.
    let (best_restart, _) = runs
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |(bi, bh), (i, (s, _))| {
            if s.h_bits > bh {
                (i, s.h_bits)
            } else {
                (bi, bh)
            }
        });
    let evaluations = runs.iter().map(|(s, _)| s.evaluations).sum();
    let best_h_bits = runs[best_restart].0.h_bits;
    let best_state = runs[best_restart].1.clone();
    Ok(OptimizationResult {
        best_state,
        best_h_bits,
        best_restart,
        history: runs.into_iter().map(|(s, _)| s).collect(),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn projection_examples() {
        let s = project_normalize(&[c(0.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert_eq!(s.coeffs(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        let s = project_normalize(&[c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(s.coeffs()[0], c(1.0, 0.0));
        assert_abs_diff_eq!(s.coeffs()[1].norm(), 0.0);
        let s = project_normalize(&[c(1.0, 0.0); 5]).unwrap();
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
        assert_eq!(s.photon_number(), 4);
    }

    #[test]
    fn projection_rejects_degenerate_input() {
        assert!(matches!(project_normalize(&[c(0.0, 0.0); 3]), Err(Error::Domain(_))));
        assert!(project_normalize(&[]).is_err());
        assert!(project_normalize(&[c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn projection_keeps_relative_phases() {
        let raw = [c(0.0, 2.0), c(1.0, 1.0)];
        let s = project_normalize(&raw).unwrap();
        // c1 / c0 is invariant
        let before = raw[1] / raw[0];
        let after = s.coeffs()[1] / s.coeffs()[0];
        assert_abs_diff_eq!((before - after).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn config_validation() {
        let base = OptimizerConfig::default();
        assert!(base.validate().is_ok());
        assert!(OptimizerConfig { restarts: 1, ..base.clone() }.validate().is_err());
        assert!(OptimizerConfig { tolerance: 0.0, ..base.clone() }.validate().is_err());
        assert!(OptimizerConfig { search_grid: 1, ..base.clone() }.validate().is_err());
        assert!(optimize_input_state(0, &base, &InterferometerGeometry::balanced()).is_err());
    }

    #[test]
    fn quick_run_beats_seeds() {
        let config = OptimizerConfig {
            restarts: 3,
            max_iterations: 200,
            search_grid: 256,
            report_grid: 512,
            ..OptimizerConfig::default()
        };
        let g = InterferometerGeometry::balanced();
        let r = optimize_input_state(2, &config, &g).unwrap();
        assert_eq!(r.history.len(), 3);
        assert_eq!(r.history[0].seed, RestartSeed::Fock);
        assert_eq!(r.history[1].seed, RestartSeed::Noon);
        let fock = mutual_information(&likelihood_table(&StateCoefficients::fock(2), &g, 512).unwrap())
            .unwrap()
            .h_bits;
        assert!(r.best_h_bits >= fock - 1e-6);
        assert_abs_diff_eq!(r.best_state.norm_sqr(), 1.0, epsilon = 1e-12);
        let max_hist = r.history.iter().map(|h| h.h_bits).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.best_h_bits, max_hist);
    }
}
