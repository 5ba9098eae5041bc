//! Nelder-Mead downhill simplex minimization.

/// Reflection, expansion, contraction and shrink coefficients.
const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub max_iterations: usize,
    /// Stop once best and worst vertex values differ by at most this.
    pub tolerance: f64,
    /// Offset of the initial simplex vertices along each axis.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tolerance: 1e-7,
            initial_step: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> SimplexResult
    where
        F: FnMut(&[f64]) -> f64,
    {
        let dim = x0.len();
        let mut evaluations = 0usize;
        let mut eval = |x: &[f64]| {
            evaluations += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((x0.to_vec(), eval(x0)));
        for i in 0..dim {
            let mut v = x0.to_vec();
            v[i] += self.initial_step;
            let fv = eval(&v);
            simplex.push((v, fv));
        }

        let mut iterations = 0;
        let mut converged = dim == 0;
        while !converged && iterations < self.max_iterations {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[dim].1;
            if (worst - best).abs() <= self.tolerance {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; dim];
            for (v, _) in &simplex[..dim] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / dim as f64;
                }
            }
            let along = |t: f64, from: &[f64]| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(from)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let reflected = along(ALPHA, &simplex[dim].0);
            let f_reflected = eval(&reflected);
            let second_worst = simplex[dim - 1].1;

            if f_reflected < best {
                let expanded = along(GAMMA, &simplex[dim].0);
                let f_expanded = eval(&expanded);
                simplex[dim] = if f_expanded < f_reflected {
                    (expanded, f_expanded)
                } else {
                    (reflected, f_reflected)
                };
                continue;
            }
            if f_reflected < second_worst {
                simplex[dim] = (reflected, f_reflected);
                continue;
            }

            let (contracted, f_contracted) = if f_reflected < worst {
                // outside contraction
                let c = along(RHO, &simplex[dim].0);
                let fc = eval(&c);
                (c, fc)
            } else {
                let c = along(-RHO, &simplex[dim].0);
                let fc = eval(&c);
                (c, fc)
            };
            if f_contracted < worst.min(f_reflected) {
                simplex[dim] = (contracted, f_contracted);
                continue;
            }

            let anchor = simplex[0].0.clone();
            for (v, fv) in simplex.iter_mut().skip(1) {
                for (x, a) in v.iter_mut().zip(&anchor) {
                    *x = a + SIGMA * (*x - a);
                }
                *fv = eval(v);
            }
        }

        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        SimplexResult {
            x,
            value,
            iterations,
            evaluations,
            converged,
        }
    }
}
