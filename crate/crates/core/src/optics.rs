//! Mach-Zehnder scattering matrix and exact photon-counting probabilities.
//!
//! Mode conventions: input ports are `a` and `b`, output ports `c` and `d`.
//! An input creation operator maps onto the outputs as
//! `a† -> S11 c† + S21 d†` and `b† -> S12 c† + S22 d†`, which is the
//! convention under which a balanced interferometer sends a photon entering
//! `a` to `c` with probability `sin^2(phi/2)`, and under which the N00N
//! likelihood carries the `(-1)^n_c` interference sign.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::{Error, PhaseGrid, Result};

/// Probabilities below this are reported as exactly zero.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// Tolerance on `sum |c_n|^2 = 1` for [`StateCoefficients`].
pub const NORM_TOLERANCE: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Optical path phases `k L1` (upper arm) and `k L2` (lower arm).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InterferometerGeometry {
    pub kl1: f64,
    pub kl2: f64,
}

impl InterferometerGeometry {
    pub fn new(kl1: f64, kl2: f64) -> Result<Self> {
        if !kl1.is_finite() || !kl2.is_finite() {
            return Err(Error::NonFinite("path phase"));
        }
        Ok(Self { kl1, kl2 })
    }

    /// Equal arm lengths with zero optical phase.
    pub fn balanced() -> Self {
        Self::default()
    }
}

/// 2x2 unitary connecting input and output mode operators at phase `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringMatrix {
    entries: [[Complex64; 2]; 2],
    phase: f64,
}

impl ScatteringMatrix {
    /// Wraps raw entries, `entries[i][j] = S_(i+1)(j+1)`. No unitarity check.
    pub fn from_entries(entries: [[Complex64; 2]; 2], phase: f64) -> Self {
        Self { entries, phase }
    }

    /// Zero-based entry `S_(i+1)(j+1)`.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i][j]
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.entries
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn determinant(&self) -> Complex64 {
        let s = &self.entries;
        s[0][0] * s[1][1] - s[0][1] * s[1][0]
    }

    /// Largest entrywise deviation of `S†S` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let s = &self.entries;
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let g: Complex64 = (0..2).map(|k| s[k][i].conj() * s[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

/// Builds `S = ½(e^{iφ}e^{ikL1} − e^{ikL2}) σz − (i/2)(e^{iφ}e^{ikL1} + e^{ikL2}) σx`.
pub fn build_scattering_matrix(phi: f64, geometry: &InterferometerGeometry) -> Result<ScatteringMatrix> {
    if !phi.is_finite() {
        return Err(Error::NonFinite("phase"));
    }
    if !geometry.kl1.is_finite() || !geometry.kl2.is_finite() {
        return Err(Error::NonFinite("path phase"));
    }
    let upper = Complex64::from_polar(1.0, phi) * Complex64::from_polar(1.0, geometry.kl1);
    let lower = Complex64::from_polar(1.0, geometry.kl2);
    let z = (upper - lower) * 0.5;
    let x = -I * (upper + lower) * 0.5;
    Ok(ScatteringMatrix {
        entries: [[z, x], [x, -z]],
        phase: phi,
    })
}

/// Photon counts `(n_c, n_d)` registered at the two output ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Outcome {
    pub n_c: u32,
    pub n_d: u32,
}

impl Outcome {
    pub fn new(n_c: u32, n_d: u32) -> Self {
        Self { n_c, n_d }
    }

    pub fn total(&self) -> u32 {
        self.n_c + self.n_d
    }

    /// All `N + 1` outcomes for `N` photons, ordered by increasing `n_c`.
    pub fn all(photon_number: u32) -> Vec<Outcome> {
        (0..=photon_number)
            .map(|n_c| Outcome::new(n_c, photon_number - n_c))
            .collect()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n_c, self.n_d)
    }
}

/// Two-mode input `sum_n c_n |n_a, (N-n)_b>`, normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateCoefficients {
    photon_number: u32,
    coeffs: Vec<Complex64>,
    label: String,
}

impl StateCoefficients {
    /// Checks length `N + 1 >= 1`, finiteness and unit norm.
    pub fn new(label: impl Into<String>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("state needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("state coefficient"));
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!("state norm {norm} differs from 1")));
        }
        Ok(Self {
            photon_number: (coeffs.len() - 1) as u32,
            coeffs,
            label: label.into(),
        })
    }

    /// `|N_a, 0_b>`.
    pub fn fock(photon_number: u32) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); photon_number as usize + 1];
        coeffs[photon_number as usize] = Complex64::new(1.0, 0.0);
        Self {
            photon_number,
            coeffs,
            label: "fock".into(),
        }
    }

    /// `(|N_a, 0_b> + |0_a, N_b>) / sqrt 2`, defined for `N >= 1`.
    pub fn noon(photon_number: u32) -> Result<Self> {
        if photon_number == 0 {
            return Err(Error::Domain("N00N state needs at least one photon".into()));
        }
        let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); photon_number as usize + 1];
        coeffs[0] = amp;
        coeffs[photon_number as usize] = amp;
        Ok(Self {
            photon_number,
            coeffs,
            label: "noon".into(),
        })
    }

    pub fn photon_number(&self) -> u32 {
        self.photon_number
    }

    /// `c_n`, indexed by the number of photons in port `a`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn ln_fact(n: u32) -> f64 {
    ln_factorial(n as u64)
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    ln_fact(n) - ln_fact(k) - ln_fact(n - k)
}

fn clamp_probability(p: f64) -> f64 {
    if p < PROBABILITY_FLOOR {
        0.0
    } else {
        p.min(1.0)
    }
}

/// Closed-form likelihood for `N` photons in port `a` and vacuum in `b`,
/// balanced geometry: `N!/(n_c! n_d!) sin^{2n_c}(φ/2) cos^{2n_d}(φ/2)`.
pub fn fock_outcome_prob(photon_number: u32, outcome: Outcome, phi: f64) -> f64 {
    if outcome.total() != photon_number {
        return 0.0;
    }
    let (s, c) = (0.5 * phi).sin_cos();
    let weight = ln_binomial(photon_number, outcome.n_c).exp();
    let p = weight * (s * s).powi(outcome.n_c as i32) * (c * c).powi(outcome.n_d as i32);
    clamp_probability(p)
}

/// Closed-form likelihood for a N00N input, balanced geometry.
pub fn noon_outcome_prob(photon_number: u32, outcome: Outcome, phi: f64) -> Result<f64> {
    if photon_number == 0 {
        return Err(Error::Domain("N00N state needs at least one photon".into()));
    }
    if outcome.total() != photon_number {
        return Ok(0.0);
    }
    let (s, c) = (0.5 * phi).sin_cos();
    let (n_c, n_d) = (outcome.n_c as i32, outcome.n_d as i32);
    let sign = if outcome.n_c % 2 == 0 { 1.0 } else { -1.0 };
    let bracket = s.powi(n_c) * c.powi(n_d) + sign * s.powi(n_d) * c.powi(n_c);
    let weight = ln_binomial(photon_number, outcome.n_c).exp();
    Ok(clamp_probability(0.5 * weight * bracket * bracket))
}

/// Amplitude `<n_c, n_d| U |n_a, n_b>` for the two-mode linear map `S`.
///
/// Expands `(S11 x + S21 y)^{n_a} (S12 x + S22 y)^{n_b}`, picks the
/// `x^{n_c} y^{n_d}` coefficient as a sum over the number `k` of port-`a`
/// photons sent to `c`, and applies the `sqrt(n_c! n_d! / (n_a! n_b!))`
/// normalization. Binomial weights are formed in log space.
pub fn transition_amplitude(s: &ScatteringMatrix, n_a: u32, n_b: u32, n_c: u32, n_d: u32) -> Result<Complex64> {
    if n_a + n_b != n_c + n_d {
        return Err(Error::Domain(format!(
            "photon number mismatch: input {} vs output {}",
            n_a + n_b,
            n_c + n_d
        )));
    }
    Ok(amplitude_unchecked(s, n_a, n_b, n_c, n_d))
}

fn amplitude_unchecked(s: &ScatteringMatrix, n_a: u32, n_b: u32, n_c: u32, n_d: u32) -> Complex64 {
    let [[s11, s12], [s21, s22]] = s.entries;
    let ln_norm = 0.5 * (ln_fact(n_c) + ln_fact(n_d) - ln_fact(n_a) - ln_fact(n_b));
    let k_min = n_c.saturating_sub(n_b);
    let k_max = n_a.min(n_c);
    let mut total = Complex64::new(0.0, 0.0);
    for k in k_min..=k_max {
        let l = n_c - k;
        let weight = (ln_norm + ln_binomial(n_a, k) + ln_binomial(n_b, l)).exp();
        let term = s11.powu(k) * s21.powu(n_a - k) * s12.powu(l) * s22.powu(n_b - l);
        total += term * weight;
    }
    total
}

/// Output amplitudes for every outcome of `state`, ordered by `n_c`.
fn output_amplitudes(s: &ScatteringMatrix, state: &StateCoefficients) -> Vec<Complex64> {
    let n = state.photon_number;
    Outcome::all(n)
        .into_iter()
        .map(|o| {
            state
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| c.norm_sqr() > 0.0)
                .map(|(n_a, c)| *c * amplitude_unchecked(s, n_a as u32, n - n_a as u32, o.n_c, o.n_d))
                .sum()
        })
        .collect()
}

/// `P(n_c, n_d | φ) = |sum_n c_n <n_c, n_d| U |n, N-n>|^2`.
pub fn state_outcome_prob(
    state: &StateCoefficients,
    phi: f64,
    geometry: &InterferometerGeometry,
    outcome: Outcome,
) -> Result<f64> {
    let n = state.photon_number;
    if outcome.total() != n {
        return Err(Error::Domain(format!(
            "outcome {outcome} does not carry the state's {n} photons"
        )));
    }
    let s = build_scattering_matrix(phi, geometry)?;
    let amp: Complex64 = state
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(n_a, c)| *c * amplitude_unchecked(&s, n_a as u32, n - n_a as u32, outcome.n_c, outcome.n_d))
        .sum();
    Ok(clamp_probability(amp.norm_sqr()))
}

/// Probabilities of all `N + 1` outcomes at one phase, ordered by `n_c`.
pub fn outcome_distribution(
    state: &StateCoefficients,
    phi: f64,
    geometry: &InterferometerGeometry,
) -> Result<Vec<f64>> {
    let s = build_scattering_matrix(phi, geometry)?;
    Ok(output_amplitudes(&s, state)
        .into_iter()
        .map(|a| clamp_probability(a.norm_sqr()))
        .collect())
}

/// Row key of a [`LikelihoodTable`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeLabel {
    /// Single-shot port counts.
    Ports(Outcome),
    /// Occurrence counts of each single-shot outcome over repeated shots.
    Counts(Vec<u32>),
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeLabel::Ports(o) => write!(f, "P{o}"),
            OutcomeLabel::Counts(m) => {
                let parts: Vec<String> = m.iter().map(|x| x.to_string()).collect();
                write!(f, "M({})", parts.join(","))
            }
        }
    }
}

/// `P(m | φ_k)` on a phase grid, one row per outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodTable {
    label: String,
    photon_number: u32,
    grid: PhaseGrid,
    outcomes: Vec<OutcomeLabel>,
    rows: Vec<Vec<f64>>,
}

impl LikelihoodTable {
    /// Assembles a table from precomputed rows. Entries must be finite and
    /// non-negative; column normalization is not enforced here.
    pub fn from_rows(
        label: impl Into<String>,
        photon_number: u32,
        grid: PhaseGrid,
        outcomes: Vec<OutcomeLabel>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if outcomes.len() != rows.len() || rows.is_empty() {
            return Err(Error::Domain(format!(
                "{} labels for {} rows",
                outcomes.len(),
                rows.len()
            )));
        }
        for row in &rows {
            if row.len() != grid.size() {
                return Err(Error::Domain(format!(
                    "row of length {} on a grid of {}",
                    row.len(),
                    grid.size()
                )));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::Domain("likelihoods must be finite and non-negative".into()));
            }
        }
        Ok(Self {
            label: label.into(),
            photon_number,
            grid,
            outcomes,
            rows,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn photon_number(&self) -> u32 {
        self.photon_number
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn outcomes(&self) -> &[OutcomeLabel] {
        &self.outcomes
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.rows[index]
    }

    /// Row for port outcome `outcome`, if present.
    pub fn row_for(&self, outcome: Outcome) -> Option<&[f64]> {
        self.outcomes
            .iter()
            .position(|o| *o == OutcomeLabel::Ports(outcome))
            .map(|i| self.rows[i].as_slice())
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.grid.size())
            .map(|k| self.rows.iter().map(|r| r[k]).sum())
            .collect()
    }

    /// Largest `|sum_m P(m|φ_k) - 1|` over the grid.
    pub fn normalization_defect(&self) -> f64 {
        self.column_sums()
            .into_iter()
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Tabulates the likelihoods of `state` on a `grid_size`-point grid.
pub fn likelihood_table(
    state: &StateCoefficients,
    geometry: &InterferometerGeometry,
    grid_size: usize,
) -> Result<LikelihoodTable> {
    let grid = PhaseGrid::new(grid_size)?;
    InterferometerGeometry::new(geometry.kl1, geometry.kl2)?;
    let columns: Vec<Vec<f64>> = (0..grid_size)
        .into_par_iter()
        .map(|k| outcome_distribution(state, grid.point(k), geometry))
        .collect::<Result<_>>()?;
    let outcomes = Outcome::all(state.photon_number);
    let rows = (0..outcomes.len())
        .map(|m| columns.iter().map(|col| col[m]).collect())
        .collect();
    Ok(LikelihoodTable {
        label: state.label.clone(),
        photon_number: state.photon_number,
        grid,
        outcomes: outcomes.into_iter().map(OutcomeLabel::Ports).collect(),
        rows,
    })
}

/// State-independent amplitudes `<n_c, N-n_c| U(φ_k) |n, N-n>` on a grid.
///
/// Building a likelihood table from this cache is a matrix-vector product
/// per grid point, which makes repeated evaluation over many candidate
/// states cheap. Memory is `(N+1)^2` complex numbers per grid point.
#[derive(Debug, Clone)]
pub struct TransferTable {
    photon_number: u32,
    grid: PhaseGrid,
    /// `[k][m * (N+1) + n]`.
    amplitudes: Vec<Vec<Complex64>>,
}

impl TransferTable {
    pub fn new(photon_number: u32, geometry: &InterferometerGeometry, grid_size: usize) -> Result<Self> {
        let grid = PhaseGrid::new(grid_size)?;
        let n = photon_number;
        let amplitudes = (0..grid_size)
            .into_par_iter()
            .map(|k| {
                let s = build_scattering_matrix(grid.point(k), geometry)?;
                let mut block = Vec::with_capacity(((n + 1) * (n + 1)) as usize);
                for n_c in 0..=n {
                    for n_a in 0..=n {
                        block.push(amplitude_unchecked(&s, n_a, n - n_a, n_c, n - n_c));
                    }
                }
                Ok(block)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            photon_number,
            grid,
            amplitudes,
        })
    }

    pub fn photon_number(&self) -> u32 {
        self.photon_number
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    /// Likelihood rows for `coeffs`, which must have length `N + 1`.
    pub fn likelihood_rows(&self, coeffs: &[Complex64]) -> Vec<Vec<f64>> {
        let dim = self.photon_number as usize + 1;
        assert_eq!(coeffs.len(), dim, "coefficient count must be N + 1");
        let mut rows = vec![vec![0.0; self.grid.size()]; dim];
        for (k, block) in self.amplitudes.iter().enumerate() {
            for (m, row) in rows.iter_mut().enumerate() {
                let amp: Complex64 = block[m * dim..(m + 1) * dim]
                    .iter()
                    .zip(coeffs)
                    .map(|(a, c)| a * c)
                    .sum();
                row[k] = clamp_probability(amp.norm_sqr());
            }
        }
        rows
    }

    pub fn likelihood_table(&self, state: &StateCoefficients) -> Result<LikelihoodTable> {
        if state.photon_number != self.photon_number {
            return Err(Error::Domain(format!(
                "state has {} photons, transfer table {}",
                state.photon_number, self.photon_number
            )));
        }
        Ok(LikelihoodTable {
            label: state.label.clone(),
            photon_number: self.photon_number,
            grid: self.grid,
            outcomes: Outcome::all(self.photon_number)
                .into_iter()
                .map(OutcomeLabel::Ports)
                .collect(),
            rows: self.likelihood_rows(&state.coeffs),
        })
    }
}
