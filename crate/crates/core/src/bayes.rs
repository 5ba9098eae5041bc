//! Phase posteriors under a uniform prior, peak counting on the circle and
//! sequential measurement simulation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::wrap_phase;
use crate::optics::{likelihood_table, outcome_distribution, LikelihoodTable};
use crate::{Error, InterferometerGeometry, Outcome, PhaseGrid, Result, StateCoefficients};

/// Maxima below this fraction of the global maximum are not counted.
pub const PEAK_THRESHOLD: f64 = 1e-9;

/// Neighbouring samples closer than this fraction of the global maximum are
/// treated as one plateau.
pub const PLATEAU_TOLERANCE: f64 = 1e-12;

/// Resultant lengths below this make the circular mean undefined.
pub const MIN_RESULTANT_LENGTH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Phase in (-pi, pi]; plateau peaks sit at the plateau midpoint.
    pub location: f64,
    pub height: f64,
}

/// Normalized density `p(φ_k | m)` on a periodic grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePosterior {
    grid: PhaseGrid,
    density: Vec<f64>,
    outcome: Option<Outcome>,
    peaks: Vec<Peak>,
}

impl PhasePosterior {
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Outcome the posterior conditions on; `None` for multi-shot posteriors.
    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    /// Peaks in increasing phase.
    pub fn peaks(&self) -> &[Peak] {
        &self.peaks
    }

    /// Trapezoid integral of the density, 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.grid.integrate(&self.density)
    }
}

/// Bayes' rule with a flat prior: `p(φ_k|m) = P(m|φ_k) / sum_j P(m|φ_j) w`.
pub fn posterior_density(grid: &PhaseGrid, likelihood_row: &[f64], outcome: Option<Outcome>) -> Result<PhasePosterior> {
    if likelihood_row.len() != grid.size() {
        return Err(Error::Domain(format!(
            "likelihood row of length {} on a grid of {}",
            likelihood_row.len(),
            grid.size()
        )));
    }
    if likelihood_row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::Domain("likelihoods must be finite and non-negative".into()));
    }
    let evidence = grid.integrate(likelihood_row);
    if evidence <= 0.0 {
        let what = outcome.map_or_else(|| "record".to_string(), |o| o.to_string());
        return Err(Error::ImpossibleOutcome(what));
    }
    let density: Vec<f64> = likelihood_row.iter().map(|p| p / evidence).collect();
    let peaks = find_peaks(grid, &density);
    Ok(PhasePosterior {
        grid: *grid,
        density,
        outcome,
        peaks,
    })
}

/// Posterior for one row of a likelihood table.
pub fn posterior_for(table: &LikelihoodTable, outcome: Outcome) -> Result<PhasePosterior> {
    let row = table
        .row_for(outcome)
        .ok_or_else(|| Error::Domain(format!("outcome {outcome} is not in the table")))?;
    posterior_density(table.grid(), row, Some(outcome))
}

pub fn count_peaks(posterior: &PhasePosterior) -> usize {
    posterior.peaks.len()
}

/// Local maxima of `density` with cyclic neighbours.
///
/// Runs of (near) equal samples are merged first; a run is a peak when it
/// is higher than the runs on both sides and above [`PEAK_THRESHOLD`] times
/// the global maximum. A density that is flat over the whole circle has one
/// peak, reported at phase 0.
pub fn find_peaks(grid: &PhaseGrid, density: &[f64]) -> Vec<Peak> {
    let n = density.len();
    let global_max = density.iter().copied().fold(0.0, f64::max);
    if n == 0 || global_max <= 0.0 {
        return Vec::new();
    }
    let tol = PLATEAU_TOLERANCE * global_max;
    let same = |i: usize, j: usize| (density[i] - density[j]).abs() <= tol;

    // Start at a run boundary so no run straddles the wrap.
    let Some(start) = (0..n).find(|&i| !same(i, (i + n - 1) % n)) else {
        return vec![Peak {
            location: 0.0,
            height: global_max,
        }];
    };

    struct Run {
        first: usize,
        len: usize,
        height: f64,
    }
    let mut runs: Vec<Run> = Vec::new();
    for step in 0..n {
        let i = (start + step) % n;
        match runs.last_mut() {
            Some(run) if same(i, (i + n - 1) % n) => {
                run.len += 1;
                run.height = run.height.max(density[i]);
            }
            _ => runs.push(Run {
                first: i,
                len: 1,
                height: density[i],
            }),
        }
    }

    let r = runs.len();
    let mut peaks: Vec<Peak> = runs
        .iter()
        .enumerate()
        .filter(|(idx, run)| {
            let prev = &runs[(idx + r - 1) % r];
            let next = &runs[(idx + 1) % r];
            run.height > prev.height && run.height > next.height && run.height > PEAK_THRESHOLD * global_max
        })
        .map(|(_, run)| Peak {
            location: wrap_phase(grid.point(run.first) + 0.5 * (run.len - 1) as f64 * grid.weight()),
            height: run.height,
        })
        .collect();
    peaks.sort_by(|a, b| a.location.total_cmp(&b.location));
    peaks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub resultant_length: f64,
}

/// Circular mean `arg E[e^{iφ}]` and standard deviation `sqrt(-2 ln R)`.
pub fn circular_summary(posterior: &PhasePosterior) -> Result<CircularSummary> {
    let w = posterior.grid.weight();
    let z: Complex64 = posterior
        .grid
        .points()
        .zip(&posterior.density)
        .map(|(phi, p)| Complex64::from_polar(p * w, phi))
        .sum();
    let r = z.norm();
    if r < MIN_RESULTANT_LENGTH {
        return Err(Error::UndefinedMean(r));
    }
    let r_clamped = r.min(1.0);
    Ok(CircularSummary {
        mean: z.arg(),
        std_dev: (-2.0 * r_clamped.ln()).sqrt(),
        resultant_length: r,
    })
}

/// Posterior after a record of outcomes, each row multiplied in and the
/// product renormalized after every step.
pub fn sequential_posterior(table: &LikelihoodTable, outcomes: &[Outcome]) -> Result<PhasePosterior> {
    let mut updater = PosteriorUpdater::new(*table.grid());
    for &o in outcomes {
        let row = table
            .row_for(o)
            .ok_or_else(|| Error::Domain(format!("outcome {o} is not in the table")))?;
        updater.update(row, o)?;
    }
    updater.posterior()
}

/// Running posterior, stored as a density normalized on the grid.
#[derive(Debug, Clone)]
pub struct PosteriorUpdater {
    grid: PhaseGrid,
    density: Vec<f64>,
    shots: usize,
    last: Option<Outcome>,
}

impl PosteriorUpdater {
    /// Starts from the flat prior `1/(2 pi)`.
    pub fn new(grid: PhaseGrid) -> Self {
        let flat = 1.0 / (2.0 * std::f64::consts::PI);
        Self {
            density: vec![flat; grid.size()],
            grid,
            shots: 0,
            last: None,
        }
    }

    pub fn update(&mut self, likelihood_row: &[f64], outcome: Outcome) -> Result<()> {
        if likelihood_row.len() != self.grid.size() {
            return Err(Error::Domain("likelihood row does not match the grid".into()));
        }
        for (d, p) in self.density.iter_mut().zip(likelihood_row) {
            *d *= p;
        }
        let mass = self.grid.integrate(&self.density);
        if mass <= 0.0 || !mass.is_finite() {
            return Err(Error::ImpossibleOutcome(format!("{outcome} after {} shots", self.shots)));
        }
        self.density.iter_mut().for_each(|d| *d /= mass);
        self.shots += 1;
        self.last = Some(outcome);
        Ok(())
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn posterior(&self) -> Result<PhasePosterior> {
        let outcome = if self.shots == 1 { self.last } else { None };
        posterior_density(&self.grid, &self.density, outcome)
    }
}

/// Outcomes drawn at a fixed true phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub true_phase: f64,
    pub seed: u64,
    pub photon_number: u32,
    pub outcomes: Vec<Outcome>,
}

impl MeasurementRecord {
    /// Occurrences of each outcome, ordered by `n_c`.
    pub fn counts(&self) -> Vec<(Outcome, usize)> {
        Outcome::all(self.photon_number)
            .into_iter()
            .map(|o| (o, self.outcomes.iter().filter(|x| **x == o).count()))
            .collect()
    }
}

/// Draws i.i.d. outcomes from `P(m | true_phase)` and tracks the posterior.
///
/// Iterating yields one outcome per shot; [`ShotSimulator::posterior`] gives
/// the posterior after the shots drawn so far.
pub struct ShotSimulator {
    rng: ChaCha8Rng,
    outcomes: Vec<Outcome>,
    cumulative: Vec<f64>,
    table: LikelihoodTable,
    updater: PosteriorUpdater,
    record: MeasurementRecord,
    remaining: usize,
}

impl ShotSimulator {
    pub fn new(
        state: &StateCoefficients,
        geometry: &InterferometerGeometry,
        true_phase: f64,
        shots: usize,
        seed: u64,
        grid_size: usize,
    ) -> Result<Self> {
        if shots == 0 {
            return Err(Error::Config("at least one shot is required".into()));
        }
        if !true_phase.is_finite() {
            return Err(Error::NonFinite("true phase"));
        }
        let probs = outcome_distribution(state, true_phase, geometry)?;
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let table = likelihood_table(state, geometry, grid_size)?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            outcomes: Outcome::all(state.photon_number()),
            cumulative,
            updater: PosteriorUpdater::new(*table.grid()),
            table,
            record: MeasurementRecord {
                true_phase,
                seed,
                photon_number: state.photon_number(),
                outcomes: Vec::with_capacity(shots),
            },
            remaining: shots,
        })
    }

    fn draw(&mut self) -> Outcome {
        let total = *self.cumulative.last().expect("at least one outcome");
        let u: f64 = self.rng.random::<f64>() * total;
        // A zero-probability outcome never starts a strictly larger prefix sum.
        let idx = self.cumulative.iter().position(|c| u < *c).unwrap_or_else(|| {
            let last_step = (1..self.cumulative.len())
                .rev()
                .find(|&i| self.cumulative[i] > self.cumulative[i - 1]);
            last_step.unwrap_or(0)
        });
        self.outcomes[idx]
    }

    fn step(&mut self) -> Result<Outcome> {
        let o = self.draw();
        let row = self
            .table
            .row_for(o)
            .expect("every outcome has a table row")
            .to_vec();
        self.updater.update(&row, o)?;
        self.record.outcomes.push(o);
        self.remaining -= 1;
        Ok(o)
    }

    pub fn record(&self) -> &MeasurementRecord {
        &self.record
    }

    pub fn table(&self) -> &LikelihoodTable {
        &self.table
    }

    pub fn posterior(&self) -> Result<PhasePosterior> {
        self.updater.posterior()
    }
}

impl Iterator for ShotSimulator {
    type Item = Result<Outcome>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        Some(self.step())
    }
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub record: MeasurementRecord,
    pub posterior: PhasePosterior,
}

/// Runs all shots and returns the record with the final posterior.
pub fn simulate_sequence(
    state: &StateCoefficients,
    geometry: &InterferometerGeometry,
    true_phase: f64,
    shots: usize,
    seed: u64,
    grid_size: usize,
) -> Result<SimulationRun> {
    let mut sim = ShotSimulator::new(state, geometry, true_phase, shots, seed, grid_size)?;
    for shot in sim.by_ref() {
        shot?;
    }
    Ok(SimulationRun {
        posterior: sim.posterior()?,
        record: sim.record,
    })
}
