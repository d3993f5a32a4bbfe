//! Damped Euler fixed-point iteration `u <- u - rho F[u]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distance::{distance_transform, high_ridge, lambda1};
use crate::error::{Error, Result};
use crate::field::{linf_diff, ScalarField};
use crate::grid::{set_pinned, Grid};
use crate::laplacian::laplacian_eigen;
use crate::schemes::{residual_with, Execution, SchemeKind, SchemeSpec};

/// Grid spacing at which the default tolerance equals `1e-7`.
pub const REFERENCE_SPACING: f64 = 2.0 / 96.0;

/// Default stopping tolerance `1e-7 (h / h_ref)^2`.
pub fn default_tolerance(h: f64) -> f64 {
    1e-7 * (h / REFERENCE_SPACING).powi(2)
}

/// Starting field. Pinned nodes are always overwritten with their values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Distance,
    Zero,
    Random { seed: u64 },
    LaplacianEigen { k: usize },
    Custom(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub rho: f64,
    pub max_iters: usize,
    /// `None` resolves to [`default_tolerance`] of the grid spacing.
    pub tol: Option<f64>,
    /// Rescale positive and negative parts to unit height after every step.
    pub normalize: bool,
    /// After a normalized run whose eigen-defect exceeds `10 tol`, continue
    /// without normalization from the result.
    pub restart: bool,
    pub init: Init,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rho: 0.9,
            max_iters: 3000,
            tol: None,
            normalize: false,
            restart: true,
            init: Init::Distance,
            execution: Execution::Serial,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "rho must lie in (0, 1], got {}",
                self.rho
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if let Some(tol) = self.tol {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "tol must be finite and non-negative, got {tol}"
                )));
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, grid: &Grid) -> f64 {
        self.tol.unwrap_or_else(|| default_tolerance(grid.spacing()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub crit: f64,
    pub residual_inf: f64,
    pub converged: bool,
    /// `<F[u], u> / <u, u>`, reported for normalized runs.
    pub eigen_defect: Option<f64>,
    #[serde(skip)]
    pub restarted: bool,
}

/// `u - rho f`, componentwise.
pub fn euler_step(u: &ScalarField, f: &ScalarField, rho: f64) -> Result<ScalarField> {
    if u.len() != f.len() {
        return Err(Error::LengthMismatch {
            expected: u.len(),
            found: f.len(),
        });
    }
    Ok(ScalarField::from_vec(
        u.iter().zip(f.iter()).map(|(x, r)| x - rho * r).collect(),
    ))
}

/// `u_P / max u_P - u_N / max u_N` with `u_P = max(u, 0)`, `u_N = max(-u, 0)`.
pub fn normalize_parts(u: &ScalarField) -> Result<ScalarField> {
    let top = u.max();
    let bottom = -u.min();
    if top.is_nan() || top <= 0.0 {
        return Err(Error::NormalizationCollapse("positive part vanished"));
    }
    if bottom.is_nan() || bottom <= 0.0 {
        return Err(Error::NormalizationCollapse("negative part vanished"));
    }
    let values = u
        .iter()
        .map(|&x| if x > 0.0 { x / top } else if x < 0.0 { x / bottom } else { 0.0 })
        .collect();
    Ok(ScalarField::from_vec(values))
}

/// Starting field for `init`, with pinned nodes set to their values.
///
/// `distance` is used by [`Init::Distance`] and computed when absent.
pub fn initialize(grid: &Grid, distance: Option<&ScalarField>, init: &Init) -> Result<ScalarField> {
    let mut u = match init {
        Init::Distance => match distance {
            Some(d) => {
                check_len(grid, d.len())?;
                d.clone()
            }
            None => distance_transform(grid)?,
        },
        Init::Zero => ScalarField::zeros(grid.len()),
        Init::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            ScalarField::from_vec((0..grid.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        }
        Init::LaplacianEigen { k } => laplacian_eigen(grid, *k)?,
        Init::Custom(values) => {
            check_len(grid, values.len())?;
            ScalarField::new(values.clone())?
        }
    };
    for (i, v) in grid.pinned() {
        u.values_mut()[i] = v;
    }
    Ok(u)
}

fn check_len(grid: &Grid, found: usize) -> Result<()> {
    if found == grid.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: grid.len(),
            found,
        })
    }
}

/// Default ground-state setup: the near-maximal ridge `d >= max d - h/2`
/// is pinned to the inradius. Returns the pinned grid and `Λ₁ = 1 / max d`.
pub fn pin_ground_state_ridge(grid: &Grid) -> Result<(Grid, f64)> {
    let d = distance_transform(grid)?;
    let est = lambda1(&d)?;
    let ridge: Vec<(usize, f64)> = high_ridge(&d, 0.5 * grid.spacing())
        .into_iter()
        .filter(|&i| !grid.is_pinned(i))
        .map(|i| (i, est.radius))
        .collect();
    Ok((set_pinned(grid, &ridge)?, est.lambda))
}

fn relative_change(u: &ScalarField, previous: &ScalarField) -> Result<f64> {
    let change = linf_diff(u, previous)?;
    let norm = u.linf_norm();
    Ok(if norm > 0.0 {
        change / norm
    } else if change == 0.0 {
        0.0
    } else {
        f64::INFINITY
    })
}

struct Run {
    u: ScalarField,
    iterations: usize,
    crit: f64,
    converged: bool,
}

fn iterate(
    grid: &Grid,
    spec: &SchemeSpec,
    config: &SolverConfig,
    mut u: ScalarField,
    normalize: bool,
    tol: f64,
    observer: &mut dyn FnMut(usize, &ScalarField),
) -> Result<Run> {
    let mut crit = f64::INFINITY;
    for k in 1..=config.max_iters {
        // Jacobi update: the whole residual is taken from the previous iterate.
        let f = residual_with(grid, &u, spec, config.execution)?;
        let mut next = euler_step(&u, &f, config.rho)?;
        let res = f.linf_norm();
        if normalize {
            next = normalize_parts(&next)?;
        }
        // A normalized fixed point only satisfies F[u] = c u, so the residual
        // cannot take part in its stopping test.
        let change = relative_change(&next, &u)?;
        crit = if normalize { change } else { change.max(res) };
        u = next;
        observer(k, &u);
        if crit <= tol {
            return Ok(Run {
                u,
                iterations: k,
                crit,
                converged: true,
            });
        }
    }
    Ok(Run {
        u,
        iterations: config.max_iters,
        crit,
        converged: false,
    })
}

pub fn eigen_defect(f: &ScalarField, u: &ScalarField) -> f64 {
    let uu = u.dot(u);
    if uu > 0.0 {
        f.dot(u) / uu
    } else {
        0.0
    }
}

pub fn solve(grid: &Grid, spec: &SchemeSpec, config: &SolverConfig) -> Result<(ScalarField, SolveReport)> {
    solve_observed(grid, spec, config, &mut |_, _| {})
}

/// [`solve`] with a callback receiving `(iteration, u)` after every step,
/// and once with iteration `0` for the starting field.
pub fn solve_observed(
    grid: &Grid,
    spec: &SchemeSpec,
    config: &SolverConfig,
    observer: &mut dyn FnMut(usize, &ScalarField),
) -> Result<(ScalarField, SolveReport)> {
    config.validate()?;
    spec.validate()?;
    if config.normalize && spec.kind != SchemeKind::Higher {
        return Err(Error::InvalidConfig(
            "normalization requires the higher-eigenfunction scheme".into(),
        ));
    }
    let tol = config.tolerance(grid);
    let u0 = initialize(grid, None, &config.init)?;
    observer(0, &u0);
    let mut run = iterate(grid, spec, config, u0, config.normalize, tol, observer)?;
    let mut restarted = false;
    if config.normalize && config.restart && run.converged {
        let f = residual_with(grid, &run.u, spec, config.execution)?;
        if eigen_defect(&f, &run.u).abs() > 10.0 * tol {
            let done = run.iterations;
            let mut shifted = |k: usize, u: &ScalarField| observer(done + k, u);
            let second = iterate(grid, spec, config, run.u, false, tol, &mut shifted)?;
            run = Run {
                iterations: done + second.iterations,
                ..second
            };
            restarted = true;
        }
    }
    let f = residual_with(grid, &run.u, spec, config.execution)?;
    let report = SolveReport {
        iterations: run.iterations,
        crit: run.crit,
        residual_inf: f.linf_norm(),
        converged: run.converged,
        eigen_defect: config.normalize.then(|| eigen_defect(&f, &run.u)),
        restarted,
    };
    Ok((run.u, report))
}
