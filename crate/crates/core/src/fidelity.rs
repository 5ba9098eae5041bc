//! Interferometer fidelity: mutual information between phase and outcomes.
//!
//! With a flat prior over (-pi, pi] and the trapezoid rule on the uniform
//! grid, the mutual information reduces to
//!
//! ```text
//! H = (1/K) sum_m sum_k P(m|φ_k) log2( P(m|φ_k) / mean_j P(m|φ_j) )
//! ```
//!
//! for a `K`-point grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::optics::{likelihood_table, outcome_distribution, LikelihoodTable};
use crate::{Error, InterferometerGeometry, Result, StateCoefficients};

/// Allowed `|sum_m P(m|φ) - 1|` for a table fed to [`mutual_information`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Phase step for the central difference in [`error_propagation_sensitivity`].
pub const SLOPE_STEP: f64 = 1e-5;

/// Slopes smaller than this make error propagation inapplicable.
pub const MIN_SLOPE: f64 = 1e-12;

/// Default cap on enumerated count vectors in [`repeated_mutual_information`].
pub const DEFAULT_COUNT_VECTOR_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub h_bits: f64,
    pub state_label: String,
    pub photon_number: u32,
    pub grid_size: usize,
    pub outcome_count: usize,
}

/// `sum_k P_k log2(P_k / mean P)` for one row; zero entries contribute 0.
fn row_information(row: &[f64]) -> f64 {
    let mean = row.iter().sum::<f64>() / row.len() as f64;
    if mean <= 0.0 {
        return 0.0;
    }
    row.iter()
        .filter(|p| **p > 0.0)
        .map(|p| p * (p / mean).log2())
        .sum()
}

/// Mutual information of rows over a `grid_size`-point grid, in bits.
pub(crate) fn information_bits(rows: &[Vec<f64>], grid_size: usize) -> f64 {
    let total: f64 = rows.iter().map(|r| row_information(r)).sum();
    (total / grid_size as f64).max(0.0)
}

/// Mutual information `H(Φ:M)` in bits for a flat phase prior.
pub fn mutual_information(table: &LikelihoodTable) -> Result<FidelityReport> {
    let defect = table.normalization_defect();
    if defect > NORMALIZATION_TOLERANCE {
        return Err(Error::Domain(format!(
            "likelihood columns are not normalized (max defect {defect:e})"
        )));
    }
    Ok(FidelityReport {
        h_bits: information_bits(table.rows(), table.grid().size()),
        state_label: table.label().to_string(),
        photon_number: table.photon_number(),
        grid_size: table.grid().size(),
        outcome_count: table.rows().len(),
    })
}

/// Input family for [`fidelity_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub enum StateFamily {
    Fock,
    Noon,
    Custom(Vec<StateCoefficients>),
}

/// Fidelity versus photon number. Fock and N00N produce one report per `N`
/// in `1..=n_max`; a custom list produces one report per state with
/// `N <= n_max`, in list order.
pub fn fidelity_sweep(
    family: &StateFamily,
    n_max: u32,
    grid_size: usize,
    geometry: &InterferometerGeometry,
) -> Result<Vec<FidelityReport>> {
    if n_max < 1 {
        return Err(Error::Config("sweep needs n_max >= 1".into()));
    }
    let states: Vec<StateCoefficients> = match family {
        StateFamily::Fock => (1..=n_max).map(StateCoefficients::fock).collect(),
        StateFamily::Noon => (1..=n_max).map(StateCoefficients::noon).collect::<Result<_>>()?,
        StateFamily::Custom(list) => list
            .iter()
            .filter(|s| s.photon_number() <= n_max)
            .cloned()
            .collect(),
    };
    states
        .par_iter()
        .map(|s| mutual_information(&likelihood_table(s, geometry, grid_size)?))
        .collect()
}

/// Number of multisets of size `repeats` drawn from `kinds` kinds.
fn count_vector_total(kinds: usize, repeats: u32) -> f64 {
    let n = repeats as u64 + kinds as u64 - 1;
    (ln_factorial(n) - ln_factorial(repeats as u64) - ln_factorial(kinds as u64 - 1))
        .exp()
        .round()
}

/// Calls `visit` with every vector of `kinds` non-negative counts summing to
/// `total`, in lexicographically decreasing order of the first entries.
fn for_each_count_vector(kinds: usize, total: u32, mut visit: impl FnMut(&[u32])) {
    fn recurse(slot: usize, left: u32, counts: &mut [u32], visit: &mut dyn FnMut(&[u32])) {
        if slot + 1 == counts.len() {
            counts[slot] = left;
            visit(counts);
            return;
        }
        for c in (0..=left).rev() {
            counts[slot] = c;
            recurse(slot + 1, left - c, counts, visit);
        }
    }
    let mut counts = vec![0; kinds];
    recurse(0, total, &mut counts, &mut visit);
}

/// Mutual information of `repeats` independent shots, using unordered
/// count vectors `{M_m}` as outcomes with multinomial likelihood
/// `repeats! / prod M_m! * prod P(m|φ)^{M_m}`.
pub fn repeated_mutual_information(
    single_shot: &LikelihoodTable,
    repeats: u32,
    cap: usize,
) -> Result<FidelityReport> {
    if repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    let defect = single_shot.normalization_defect();
    if defect > NORMALIZATION_TOLERANCE {
        return Err(Error::Domain(format!(
            "likelihood columns are not normalized (max defect {defect:e})"
        )));
    }
    let kinds = single_shot.rows().len();
    let required = count_vector_total(kinds, repeats);
    if required > cap as f64 {
        return Err(Error::ResourceCap {
            what: "count vectors",
            required,
            cap,
        });
    }

    let grid_size = single_shot.grid().size();
    let ln_rows: Vec<Vec<f64>> = single_shot
        .rows()
        .iter()
        .map(|r| r.iter().map(|p| p.ln()).collect())
        .collect();
    let ln_total_fact = ln_factorial(repeats as u64);

    let mut information = 0.0;
    let mut outcome_count = 0usize;
    let mut row = vec![0.0; grid_size];
    for_each_count_vector(kinds, repeats, |counts| {
        let ln_coeff = ln_total_fact - counts.iter().map(|&c| ln_factorial(c as u64)).sum::<f64>();
        for (k, value) in row.iter_mut().enumerate() {
            let mut ln_p = ln_coeff;
            for (m, &c) in counts.iter().enumerate() {
                if c > 0 {
                    ln_p += c as f64 * ln_rows[m][k];
                }
            }
            *value = ln_p.exp();
        }
        information += row_information(&row);
        outcome_count += 1;
    });

    Ok(FidelityReport {
        h_bits: (information / grid_size as f64).max(0.0),
        state_label: format!("{}x{}", single_shot.label(), repeats),
        photon_number: single_shot.photon_number() * repeats,
        grid_size,
        outcome_count,
    })
}

/// Observable whose mean and spread enter error propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    /// Photons counted at port c.
    Nc,
    /// Photons counted at port d.
    Nd,
    /// `n_c - n_d`.
    Difference,
}

impl Observable {
    fn value(self, n_c: u32, n_d: u32) -> f64 {
        match self {
            Observable::Nc => n_c as f64,
            Observable::Nd => n_d as f64,
            Observable::Difference => n_c as f64 - n_d as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEstimate {
    pub delta_phi: f64,
    pub delta_m: f64,
    pub slope: f64,
    pub mean: f64,
    pub working_point: f64,
}

fn observable_moments(
    state: &StateCoefficients,
    geometry: &InterferometerGeometry,
    observable: Observable,
    phi: f64,
) -> Result<(f64, f64)> {
    let probs = outcome_distribution(state, phi, geometry)?;
    let n = state.photon_number();
    let (mut first, mut second) = (0.0, 0.0);
    for (n_c, p) in probs.iter().enumerate() {
        let v = observable.value(n_c as u32, n - n_c as u32);
        first += v * p;
        second += v * v * p;
    }
    Ok((first, second))
}

/// Single-peak sensitivity `Δφ = Δm / |dm̄/dφ|` at `working_point`.
pub fn error_propagation_sensitivity(
    state: &StateCoefficients,
    geometry: &InterferometerGeometry,
    observable: Observable,
    working_point: f64,
) -> Result<SensitivityEstimate> {
    if !working_point.is_finite() {
        return Err(Error::NonFinite("working point"));
    }
    let (mean, second) = observable_moments(state, geometry, observable, working_point)?;
    let (up, _) = observable_moments(state, geometry, observable, working_point + SLOPE_STEP)?;
    let (down, _) = observable_moments(state, geometry, observable, working_point - SLOPE_STEP)?;
    let slope = (up - down) / (2.0 * SLOPE_STEP);
    if slope.abs() < MIN_SLOPE {
        return Err(Error::StationaryPoint { working_point, slope });
    }
    let delta_m = (second - mean * mean).max(0.0).sqrt();
    Ok(SensitivityEstimate {
        delta_phi: delta_m / slope.abs(),
        delta_m,
        slope,
        mean,
        working_point,
    })
}

/// `1 / sqrt(N)`.
pub fn standard_limit(photon_number: u32) -> f64 {
    1.0 / (photon_number as f64).sqrt()
}

/// `1 / N`.
pub fn heisenberg_limit(photon_number: u32) -> f64 {
    1.0 / photon_number as f64
}
