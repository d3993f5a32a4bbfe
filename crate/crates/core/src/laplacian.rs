//! Dirichlet eigenfunctions of the ordinary Laplacian, used as initial guesses.
//!
//! Squares and rectangles use the closed-form sine products. Any other grid
//! uses block inverse iteration with Rayleigh-Ritz on the 5-point Laplacian
//! over the interior nodes, with pinned nodes acting as zero Dirichlet data.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::Shape;
use crate::grid::Grid;

/// Largest mode index `k` that can be requested.
pub const MAX_MODES: usize = 12;

const CG_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-9;
const MAX_OUTER: usize = 400;

/// `k`-th (1-based) Dirichlet mode, max-normalized with a positive peak.
pub fn laplacian_eigen(grid: &Grid, k: usize) -> Result<ScalarField> {
    let available = MAX_MODES.min(grid.interior().len());
    if k == 0 || k > available {
        return Err(Error::ModeOutOfRange {
            requested: k,
            available,
        });
    }
    let domain = grid.domain();
    let closed = match *domain.shape() {
        Shape::Square if domain.punctures().is_empty() => Some((1.0, 1.0)),
        Shape::Rectangle {
            half_width,
            half_height,
        } if domain.punctures().is_empty() => Some((half_width, half_height)),
        _ => None,
    };
    let values = match closed {
        Some((a, b)) => closed_form_mode(grid, a, b, k),
        None => {
            let modes = inverse_iteration_modes(grid, k)?;
            let mut out = vec![0.0; grid.len()];
            for (pos, &i) in grid.interior().iter().enumerate() {
                out[i] = modes[k - 1][pos];
            }
            out
        }
    };
    Ok(ScalarField::from_vec(max_normalize(values)))
}

/// Index pairs `(p, q)` ordered by the continuum eigenvalue `(p/a)^2 + (q/b)^2`.
pub fn rectangle_mode_order(a: f64, b: f64, count: usize) -> Vec<(usize, usize)> {
    let span = count + 1;
    let mut modes: Vec<(usize, usize)> = (1..=span)
        .flat_map(|p| (1..=span).map(move |q| (p, q)))
        .collect();
    let key = |&(p, q): &(usize, usize)| (p as f64 / a).powi(2) + (q as f64 / b).powi(2);
    modes.sort_by(|x, y| key(x).total_cmp(&key(y)).then(x.cmp(y)));
    modes.truncate(count);
    modes
}

fn closed_form_mode(grid: &Grid, a: f64, b: f64, k: usize) -> Vec<f64> {
    let (p, q) = rectangle_mode_order(a, b, k)[k - 1];
    let pi = std::f64::consts::PI;
    (0..grid.len())
        .map(|i| {
            if grid.is_pinned(i) {
                return 0.0;
            }
            let [x, y] = grid.node(i);
            (p as f64 * pi * (x + a) / (2.0 * a)).sin() * (q as f64 * pi * (y + b) / (2.0 * b)).sin()
        })
        .collect()
}

fn max_normalize(mut v: Vec<f64>) -> Vec<f64> {
    let (mut peak, mut sign) = (0.0_f64, 1.0);
    for &x in &v {
        if x.abs() > peak {
            peak = x.abs();
            sign = x.signum();
        }
    }
    if peak > 0.0 {
        for x in &mut v {
            *x *= sign / peak;
        }
    }
    v
}

/// The 5-point operator `4 u_i - sum of lattice neighbours` on interior nodes.
struct FivePoint {
    adjacency: Vec<[usize; 4]>,
}

const NONE: usize = usize::MAX;

impl FivePoint {
    fn new(grid: &Grid) -> Self {
        let interior = grid.interior();
        let mut position = vec![NONE; grid.len()];
        for (pos, &i) in interior.iter().enumerate() {
            position[i] = pos;
        }
        let adjacency = interior
            .iter()
            .map(|&i| {
                let [ix, iy] = grid.lattice_position(i);
                let mut adj = [NONE; 4];
                let around = [
                    (ix.wrapping_sub(1), iy),
                    (ix + 1, iy),
                    (ix, iy.wrapping_sub(1)),
                    (ix, iy + 1),
                ];
                for (slot, (x, y)) in adj.iter_mut().zip(around) {
                    if let Some(j) = grid.node_at(x, y) {
                        *slot = position[j];
                    }
                }
                adj
            })
            .collect();
        FivePoint { adjacency }
    }

    fn len(&self) -> usize {
        self.adjacency.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, (adj, &xi)) in out.iter_mut().zip(self.adjacency.iter().zip(x)) {
            let mut acc = 4.0 * xi;
            for &j in adj {
                if j != NONE {
                    acc -= x[j];
                }
            }
            *o = acc;
        }
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.len();
        x.iter_mut().for_each(|v| *v = 0.0);
        let mut r = b.to_vec();
        let mut p = r.clone();
        let mut ap = vec![0.0; n];
        let b_norm = dot(b, b).sqrt();
        if b_norm == 0.0 {
            return;
        }
        let mut rr = dot(&r, &r);
        for _ in 0..10 * n {
            self.apply(&p, &mut ap);
            let alpha = rr / dot(&p, &ap);
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            let rr_new = dot(&r, &r);
            if rr_new.sqrt() <= CG_TOL * b_norm {
                break;
            }
            let beta = rr_new / rr;
            for k in 0..n {
                p[k] = r[k] + beta * p[k];
            }
            rr = rr_new;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthonormalize(block: &mut [Vec<f64>]) {
    for j in 0..block.len() {
        for i in 0..j {
            let c = dot(&block[i], &block[j]);
            let (head, tail) = block.split_at_mut(j);
            for (t, h) in tail[0].iter_mut().zip(&head[i]) {
                *t -= c * h;
            }
        }
        let norm = dot(&block[j], &block[j]).sqrt();
        block[j].iter_mut().for_each(|v| *v /= norm);
    }
}

/// Lowest `count` eigenvectors of the 5-point Laplacian, in interior order.
pub fn inverse_iteration_modes(grid: &Grid, count: usize) -> Result<Vec<Vec<f64>>> {
    let op = FivePoint::new(grid);
    let m = op.len();
    if count == 0 || count > m {
        return Err(Error::ModeOutOfRange {
            requested: count,
            available: m,
        });
    }
    let width = (count + 3).min(m);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a71);
    let mut block: Vec<Vec<f64>> = (0..width)
        .map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut block);

    let mut scratch = vec![0.0; m];
    for _ in 0..MAX_OUTER {
        let mut next: Vec<Vec<f64>> = block
            .iter()
            .map(|x| {
                let mut y = vec![0.0; m];
                op.solve(x, &mut y);
                y
            })
            .collect();
        orthonormalize(&mut next);

        let applied: Vec<Vec<f64>> = next
            .iter()
            .map(|y| {
                op.apply(y, &mut scratch);
                scratch.clone()
            })
            .collect();
        let projected = DMatrix::from_fn(width, width, |a, b| {
            0.5 * (dot(&next[a], &applied[b]) + dot(&next[b], &applied[a]))
        });
        let eig = SymmetricEigen::new(projected);
        let mut order: Vec<usize> = (0..width).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        block = order
            .iter()
            .map(|&c| {
                let mut v = vec![0.0; m];
                for (a, y) in next.iter().enumerate() {
                    let w = eig.eigenvectors[(a, c)];
                    for (vk, yk) in v.iter_mut().zip(y) {
                        *vk += w * yk;
                    }
                }
                v
            })
            .collect();
        let settled = block.iter().zip(&order).take(count).all(|(v, &c)| {
            let theta = eig.eigenvalues[c];
            op.apply(v, &mut scratch);
            let res: f64 = scratch
                .iter()
                .zip(v)
                .map(|(l, x)| (l - theta * x).powi(2))
                .sum::<f64>()
                .sqrt();
            res <= RESIDUAL_TOL * theta
        });
        if settled {
            break;
        }
    }
    block.truncate(count);
    Ok(block)
}
