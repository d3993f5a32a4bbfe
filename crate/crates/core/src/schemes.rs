//! Discrete grid functions and the three residual operators.
//!
//! At interior node `i` with neighbors `j` at distances `d_j`:
//!
//! * `f1_plus  = u_i - u_imax - d_imax Λ u_i`, `imax` maximizing `(u_i - u_j) / d_j`
//! * `f1_minus = u_i - u_imin - d_imin Λ u_i`, `imin` minimizing `(u_i - u_j) / d_j`
//! * `f2 = u_i - u*`, `u* = (d_s u_r + d_r u_s) / (d_r + d_s)`, `(r, s)` maximizing
//!   `|u_k - u_l| / (d_k + d_l)` over unordered neighbor pairs.
//!
//! All three carry their natural length factors (they approximate multiples of
//! the continuum terms), which leaves the roots unchanged. Every argmax/argmin
//! breaks ties towards the smallest node index.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    GroundState,
    Higher,
    InfinityHarmonic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    /// Eigenvalue; ignored for `InfinityHarmonic`.
    pub lambda: f64,
}

impl SchemeSpec {
    pub fn new(kind: SchemeKind, lambda: f64) -> Result<Self> {
        let spec = SchemeSpec { kind, lambda };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ground_state(lambda: f64) -> Result<Self> {
        Self::new(SchemeKind::GroundState, lambda)
    }

    pub fn higher(lambda: f64) -> Result<Self> {
        Self::new(SchemeKind::Higher, lambda)
    }

    pub fn infinity_harmonic() -> Self {
        SchemeSpec {
            kind: SchemeKind::InfinityHarmonic,
            lambda: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            SchemeKind::InfinityHarmonic => Ok(()),
            _ if self.lambda.is_finite() && self.lambda > 0.0 => Ok(()),
            _ => Err(Error::InvalidScheme(format!(
                "eigenvalue must be positive, got {}",
                self.lambda
            ))),
        }
    }
}

/// How per-node residuals are scheduled. Both give bitwise identical output.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Serial,
    Parallel,
}

#[inline]
fn argmax_quotient(ui: f64, d: &[f64], value: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut q_best = (ui - value(0)) / d[0];
    for k in 1..d.len() {
        let q = (ui - value(k)) / d[k];
        if q > q_best {
            q_best = q;
            best = k;
        }
    }
    best
}

#[inline]
fn argmin_quotient(ui: f64, d: &[f64], value: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut q_best = (ui - value(0)) / d[0];
    for k in 1..d.len() {
        let q = (ui - value(k)) / d[k];
        if q < q_best {
            q_best = q;
            best = k;
        }
    }
    best
}

/// Positions `(r, s)`, `r < s`, of the lexicographically first pair maximizing
/// `|u_r - u_s| / (d_r + d_s)`.
///
/// A lower bound from the extreme values and the point-symmetric pairs rules
/// out most pairs: a pair can only reach the bound `B` if
/// `u_k - B d_k >= u_l + B d_l` for its larger value `k`. The surviving
/// candidates are searched exhaustively in index order, so the result equals
/// the full pair enumeration.
fn oberman_pair_kernel(
    d: &[f64],
    pairs: &[[u16; 2]],
    value: impl Fn(usize) -> f64,
) -> [usize; 2] {
    let m = d.len();
    let (mut kmax, mut kmin) = (0, 0);
    let (mut vmax, mut vmin) = (value(0), value(0));
    let mut dmax = d[0];
    for k in 1..m {
        let v = value(k);
        if v > vmax {
            vmax = v;
            kmax = k;
        }
        if v < vmin {
            vmin = v;
            kmin = k;
        }
        dmax = dmax.max(d[k]);
    }
    if vmax == vmin {
        return [0, 1];
    }
    let quot = |k: usize, l: usize| (value(k) - value(l)).abs() / (d[k] + d[l]);
    let mut bound = quot(kmax, kmin);
    for &[p, q] in pairs {
        bound = bound.max(quot(p as usize, q as usize));
    }
    let slack = 1e-10 * (vmax.abs().max(vmin.abs()) + bound * dmax);
    let (mut top, mut bottom) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..m {
        let v = value(k);
        top = top.max(v - bound * d[k]);
        bottom = bottom.min(v + bound * d[k]);
    }
    let mut candidates: Vec<usize> = (0..m)
        .filter(|&k| {
            let v = value(k);
            v - bound * d[k] >= bottom - slack || v + bound * d[k] <= top + slack
        })
        .collect();
    if candidates.len() < 2 {
        candidates = (0..m).collect();
    }

    let mut best = [candidates[0], candidates[1]];
    let mut q_best = f64::NEG_INFINITY;
    for (a, &k) in candidates.iter().enumerate() {
        for &l in &candidates[a + 1..] {
            let q = quot(k, l);
            if q > q_best {
                q_best = q;
                best = [k, l];
            }
        }
    }
    best
}

#[inline]
fn f2_from_pair(ui: f64, d: &[f64], [r, s]: [usize; 2], value: impl Fn(usize) -> f64) -> f64 {
    let u_star = (d[s] * value(r) + d[r] * value(s)) / (d[r] + d[s]);
    ui - u_star
}

/// `f1_plus` for an explicit neighborhood given as value and distance slices.
pub fn f1_plus_local(ui: f64, values: &[f64], dists: &[f64], lambda: f64) -> f64 {
    let k = argmax_quotient(ui, dists, |k| values[k]);
    ui - values[k] - dists[k] * lambda * ui
}

pub fn f1_minus_local(ui: f64, values: &[f64], dists: &[f64], lambda: f64) -> f64 {
    let k = argmin_quotient(ui, dists, |k| values[k]);
    ui - values[k] - dists[k] * lambda * ui
}

/// `f2` for an explicit neighborhood, searching all pairs.
pub fn f2_local(ui: f64, values: &[f64], dists: &[f64]) -> Result<f64> {
    if dists.len() < 2 {
        return Err(Error::DegenerateStencil {
            node: usize::MAX,
            count: dists.len(),
        });
    }
    let pair = oberman_pair_kernel(dists, &[], |k| values[k]);
    Ok(f2_from_pair(ui, dists, pair, |k| values[k]))
}

/// `u_i - u_imax - d_imax Λ u_i` at interior node `i`.
///
/// # Panics
/// If `i` has no neighbors (a pinned node).
pub fn f1_plus(grid: &Grid, u: &ScalarField, lambda: f64, i: usize) -> f64 {
    let (nb, d) = grid.neighbors(i);
    assert!(!nb.is_empty(), "node {i} has no neighbors");
    let ui = u[i];
    let k = argmax_quotient(ui, d, |k| u[nb[k]]);
    ui - u[nb[k]] - d[k] * lambda * ui
}

/// `u_i - u_imin - d_imin Λ u_i` at interior node `i`.
///
/// # Panics
/// If `i` has no neighbors (a pinned node).
pub fn f1_minus(grid: &Grid, u: &ScalarField, lambda: f64, i: usize) -> f64 {
    let (nb, d) = grid.neighbors(i);
    assert!(!nb.is_empty(), "node {i} has no neighbors");
    let ui = u[i];
    let k = argmin_quotient(ui, d, |k| u[nb[k]]);
    ui - u[nb[k]] - d[k] * lambda * ui
}

/// Node index `imax` selected by [`f1_plus`].
pub fn f1_plus_argmax(grid: &Grid, u: &ScalarField, i: usize) -> usize {
    let (nb, d) = grid.neighbors(i);
    assert!(!nb.is_empty(), "node {i} has no neighbors");
    nb[argmax_quotient(u[i], d, |k| u[nb[k]])]
}

/// Node index `imin` selected by [`f1_minus`].
pub fn f1_minus_argmin(grid: &Grid, u: &ScalarField, i: usize) -> usize {
    let (nb, d) = grid.neighbors(i);
    assert!(!nb.is_empty(), "node {i} has no neighbors");
    nb[argmin_quotient(u[i], d, |k| u[nb[k]])]
}

/// Node indices `(r, s)` of the maximizing pair used by [`f2_oberman`].
pub fn oberman_pair(grid: &Grid, u: &ScalarField, i: usize) -> Result<[usize; 2]> {
    let (nb, d) = grid.neighbors(i);
    if nb.len() < 2 {
        return Err(Error::DegenerateStencil {
            node: i,
            count: nb.len(),
        });
    }
    let [r, s] = oberman_pair_kernel(d, grid.opposite_pairs(i), |k| u[nb[k]]);
    Ok([nb[r], nb[s]])
}

/// `u_i - u*_i` at interior node `i`.
pub fn f2_oberman(grid: &Grid, u: &ScalarField, i: usize) -> Result<f64> {
    let (nb, d) = grid.neighbors(i);
    if nb.len() < 2 {
        return Err(Error::DegenerateStencil {
            node: i,
            count: nb.len(),
        });
    }
    let value = |k: usize| u[nb[k]];
    let pair = oberman_pair_kernel(d, grid.opposite_pairs(i), value);
    Ok(f2_from_pair(u[i], d, pair, value))
}

/// Residual of the single node `i`; pinned nodes give `u_i - v_i`.
pub fn node_residual(grid: &Grid, u: &ScalarField, spec: &SchemeSpec, i: usize) -> Result<f64> {
    if let Some(v) = grid.pinned_value(i) {
        return Ok(u[i] - v);
    }
    let f2 = f2_oberman(grid, u, i)?;
    Ok(match spec.kind {
        SchemeKind::InfinityHarmonic => f2,
        SchemeKind::GroundState => f1_plus(grid, u, spec.lambda, i).min(f2),
        SchemeKind::Higher => {
            let plus = f1_plus(grid, u, spec.lambda, i);
            let minus = f1_minus(grid, u, spec.lambda, i);
            plus.min(f2) + minus.max(f2) - f2
        }
    })
}

pub fn residual(grid: &Grid, u: &ScalarField, spec: &SchemeSpec) -> Result<ScalarField> {
    residual_with(grid, u, spec, Execution::Serial)
}

/// Residual of every node; pinned nodes give `u_i - v_i`.
///
/// All nodes read the same input field.
pub fn residual_with(
    grid: &Grid,
    u: &ScalarField,
    spec: &SchemeSpec,
    exec: Execution,
) -> Result<ScalarField> {
    if u.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: u.len(),
        });
    }
    spec.validate()?;
    let values = match exec {
        Execution::Serial => (0..grid.len())
            .map(|i| node_residual(grid, u, spec, i))
            .collect::<Result<Vec<f64>>>()?,
        Execution::Parallel => (0..grid.len())
            .into_par_iter()
            .map(|i| node_residual(grid, u, spec, i))
            .collect::<Result<Vec<f64>>>()?,
    };
    Ok(ScalarField::from_vec(values))
}
