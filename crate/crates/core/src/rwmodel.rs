//! Gaussian random-walk model of rank transitions and its calibration.
//!
//! Column `j` of the model matrix weights target bin `i` by
//! `exp(-(i - j)^2 / D)` and normalizes over `i`, with unit spacing between
//! adjacent bins. Small `D` keeps authors in place; large `D` makes every
//! destination equally likely.
//!
//! `D` is calibrated by minimizing the Frobenius distance to one or more
//! empirical matrices: a log-spaced grid scan over the bracket locates the
//! basin, then golden-section search refines inside the neighbouring grid
//! cells.

use serde::{Deserialize, Serialize};

use crate::mobility::{TransitionMatrix, DECILES};
use crate::{Error, Result};

/// Empirical inputs to a fit must be stochastic within this tolerance.
/// Looser than [`crate::mobility::STOCHASTIC_TOL`] so matrices read back
/// from CSV files written by other tools are accepted.
pub const INPUT_STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionModel {
    pub d: f64,
    pub n_bins: usize,
}

impl DiffusionModel {
    pub fn new(d: f64, n_bins: usize) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidInput(format!(
                "diffusion coefficient must be positive, got {d}"
            )));
        }
        if n_bins < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 bins, got {n_bins}")));
        }
        Ok(Self { d, n_bins })
    }

    pub fn matrix(&self) -> TransitionMatrix {
        let n = self.n_bins;
        let mut data = vec![0.0; n * n];
        for j in 0..n {
            let mut total = 0.0;
            for i in 0..n {
                let dist = i as f64 - j as f64;
                let w = (-(dist * dist) / self.d).exp();
                data[i * n + j] = w;
                total += w;
            }
            // The diagonal weight is exp(0) = 1, so total >= 1.
            for i in 0..n {
                data[i * n + j] /= total;
            }
        }
        TransitionMatrix::from_data(n, data).expect("square by construction")
    }
}

/// Model transition matrix for diffusion coefficient `d`.
pub fn model_matrix(d: f64, n_bins: usize) -> Result<TransitionMatrix> {
    Ok(DiffusionModel::new(d, n_bins)?.matrix())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub bracket: (f64, f64),
    pub grid_points: usize,
    /// Golden-section stops once the search interval is narrower than this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            bracket: (1e-3, 10.0),
            grid_points: 256,
            tolerance: 1e-9,
            max_iterations: 200,
        }
    }
}

impl FitOptions {
    pub fn with_bracket(lo: f64, hi: f64) -> Self {
        Self {
            bracket: (lo, hi),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Config(format!("invalid search bracket [{lo}, {hi}]")));
        }
        if self.grid_points < 3 {
            return Err(Error::Config("grid scan needs at least 3 points".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionFit {
    pub d_star: f64,
    /// Objective at `d_star`: the Frobenius distance, or the sum of distances
    /// for a pooled fit.
    pub objective: f64,
    pub bracket: (f64, f64),
    pub grid_points: usize,
    pub iterations: usize,
    /// False when the optimum sits at a bracket edge or the refinement ran
    /// out of iterations.
    pub converged: bool,
    pub n_matrices: usize,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Golden-section minimization on `[a, b]`. Returns the midpoint of the final
/// interval, its objective, the iteration count, and whether the width fell
/// below `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(
    f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iterations: usize,
) -> (f64, f64, usize, bool) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a) > tol && iterations < max_iterations {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let x = 0.5 * (a + b);
    (x, f(x), iterations, (b - a) <= tol)
}

fn fit_objective<F: Fn(f64) -> f64>(objective: F, opts: &FitOptions, n_matrices: usize) -> DiffusionFit {
    let grid = log_grid(opts.bracket.0, opts.bracket.1, opts.grid_points);
    let values: Vec<f64> = grid.iter().map(|&d| objective(d)).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("grid is non-empty");
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (mut d_star, mut value, iterations, refined) =
        golden_section(&objective, lo, hi, opts.tolerance, opts.max_iterations);
    if values[best] < value {
        d_star = grid[best];
        value = values[best];
    }
    let at_edge = best == 0 || best == grid.len() - 1;
    if at_edge {
        log::warn!(
            "diffusion fit optimum at bracket edge ({d_star}); bracket [{}, {}]",
            opts.bracket.0,
            opts.bracket.1
        );
    }
    DiffusionFit {
        d_star,
        objective: value,
        bracket: opts.bracket,
        grid_points: opts.grid_points,
        iterations,
        converged: refined && !at_edge,
        n_matrices,
    }
}

/// `argmin_D ||empirical - model(D)||_F`.
pub fn fit_d(empirical: &TransitionMatrix, opts: &FitOptions) -> Result<DiffusionFit> {
    fit_d_pooled(std::slice::from_ref(empirical), opts)
}

/// `argmin_D sum_t ||T_t - model(D)||_F` over all matrices.
pub fn fit_d_pooled(matrices: &[TransitionMatrix], opts: &FitOptions) -> Result<DiffusionFit> {
    opts.validate()?;
    let first = matrices
        .first()
        .ok_or_else(|| Error::InvalidInput("pooled fit needs at least one matrix".into()))?;
    let n = first.size();
    for m in matrices {
        if m.size() != n {
            return Err(Error::ShapeMismatch(format!(
                "pooled matrices mix sizes {n} and {}",
                m.size()
            )));
        }
        m.check_stochastic(INPUT_STOCHASTIC_TOL)?;
    }
    let objective = |d: f64| {
        let model = DiffusionModel { d, n_bins: n }.matrix();
        matrices.iter().map(|m| m.frobenius_distance(&model)).sum::<f64>()
    };
    Ok(fit_objective(objective, opts, matrices.len()))
}

/// Decile model matrix, the common case.
pub fn decile_model(d: f64) -> Result<TransitionMatrix> {
    model_matrix(d, DECILES)
}
