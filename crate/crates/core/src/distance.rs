//! Distance to the boundary, the first eigenvalue `1 / r1`, the high ridge and
//! the two-ball radius `r2`.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenvalueEstimate {
    pub lambda: f64,
    pub radius: f64,
    /// Nodes attaining the radius: the argmax set for `r1`, the maximizing pair for `r2`.
    pub witness: Vec<usize>,
}

/// Exact Euclidean distance from every node to the nearest pinned node with value 0.
///
/// Two separable passes of the lower-envelope-of-parabolas transform over the
/// full lattice, in squared lattice units, so the result is `sqrt(k) * h` for
/// an integer `k`.
pub fn distance_transform(grid: &Grid) -> Result<ScalarField> {
    let sources: Vec<usize> = grid
        .pinned()
        .filter(|&(_, v)| v == 0.0)
        .map(|(i, _)| i)
        .collect();
    distance_to(grid, &sources)
}

/// Exact Euclidean distance from every node to the nearest node in `sources`.
pub fn distance_to(grid: &Grid, sources: &[usize]) -> Result<ScalarField> {
    let n = grid.resolution();
    let far = 1e30;
    let mut sq = vec![far; n * n];
    if sources.is_empty() {
        return Err(Error::NoBoundary);
    }
    for &i in sources {
        if i >= grid.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: grid.len(),
            });
        }
        let [ix, iy] = grid.lattice_position(i);
        sq[iy * n + ix] = 0.0;
    }

    let mut line = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut env = Envelope::new(n);
    for ix in 0..n {
        for iy in 0..n {
            line[iy] = sq[iy * n + ix];
        }
        env.transform(&line, &mut out);
        for iy in 0..n {
            sq[iy * n + ix] = out[iy];
        }
    }
    for iy in 0..n {
        let row = &mut sq[iy * n..(iy + 1) * n];
        line.copy_from_slice(row);
        env.transform(&line, &mut out);
        row.copy_from_slice(&out);
    }

    let scale = (n - 1) as f64;
    let values = (0..grid.len())
        .map(|i| {
            let [ix, iy] = grid.lattice_position(i);
            sq[iy * n + ix].sqrt() * 2.0 / scale
        })
        .collect();
    Ok(ScalarField::from_vec(values))
}

/// One-dimensional squared distance transform `min_q f(q) + (p - q)^2`.
struct Envelope {
    vertex: Vec<usize>,
    bound: Vec<f64>,
}

impl Envelope {
    fn new(n: usize) -> Self {
        Envelope {
            vertex: vec![0; n],
            bound: vec![0.0; n + 1],
        }
    }

    fn transform(&mut self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        let inter = |q: usize, r: usize| {
            let (q, r) = (q as f64, r as f64);
            ((f[q as usize] + q * q) - (f[r as usize] + r * r)) / (2.0 * (q - r))
        };
        let mut k = 0;
        self.vertex[0] = 0;
        self.bound[0] = f64::NEG_INFINITY;
        self.bound[1] = f64::INFINITY;
        for q in 1..n {
            let mut s = inter(q, self.vertex[k]);
            while s <= self.bound[k] {
                k -= 1;
                s = inter(q, self.vertex[k]);
            }
            k += 1;
            self.vertex[k] = q;
            self.bound[k] = s;
            self.bound[k + 1] = f64::INFINITY;
        }
        k = 0;
        for (p, o) in out.iter_mut().enumerate() {
            while self.bound[k + 1] < p as f64 {
                k += 1;
            }
            let v = self.vertex[k];
            let dp = p as f64 - v as f64;
            *o = dp * dp + f[v];
        }
    }
}

pub fn lambda1(d: &ScalarField) -> Result<EigenvalueEstimate> {
    let radius = d.max();
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::ZeroDistance);
    }
    let witness = d
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == radius)
        .map(|(i, _)| i)
        .collect();
    Ok(EigenvalueEstimate {
        lambda: 1.0 / radius,
        radius,
        witness,
    })
}

/// `{i : d_i >= max d - tol}`.
pub fn high_ridge(d: &ScalarField, tol: f64) -> Vec<usize> {
    let top = d.max() - tol.max(0.0);
    d.iter()
        .enumerate()
        .filter(|(_, &v)| v >= top)
        .map(|(i, _)| i)
        .collect()
}

fn pair_radius(grid: &Grid, d: &ScalarField, i: usize, j: usize) -> f64 {
    let (a, b) = (grid.node(i), grid.node(j));
    let half = 0.5 * (a[0] - b[0]).hypot(a[1] - b[1]);
    d[i].min(d[j]).min(half)
}

/// Largest `min(d_i, d_j, |x_i - x_j| / 2)` over pairs of interior nodes.
///
/// Ties go to the lexicographically smallest pair `(i, j)`, `i < j`. Nodes are
/// scanned in decreasing distance order, and the scan stops once no remaining
/// node can reach the current best radius.
pub fn lambda2_two_ball(grid: &Grid, d: &ScalarField) -> Result<EigenvalueEstimate> {
    let interior = grid.interior();
    if interior.len() < 2 {
        return Err(Error::TooFewNodes(interior.len()));
    }
    if d.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: d.len(),
        });
    }
    let mut order: Vec<usize> = interior.to_vec();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));

    // Seed with the best partner of the deepest node.
    let seed = order[0];
    let mut best = (f64::NEG_INFINITY, [usize::MAX, usize::MAX]);
    let offer = |best: &mut (f64, [usize; 2]), i: usize, j: usize| {
        let r = pair_radius(grid, d, i, j);
        let key = [i.min(j), i.max(j)];
        if r > best.0 || (r == best.0 && key < best.1) {
            *best = (r, key);
        }
    };
    for &j in &order[1..] {
        offer(&mut best, seed, j);
    }

    let mut end = order.len();
    for a in 0..order.len() {
        while end > 0 && d[order[end - 1]] < best.0 {
            end -= 1;
        }
        if a >= end {
            break;
        }
        let i = order[a];
        for &j in &order[a + 1..end] {
            offer(&mut best, i, j);
        }
    }
    let (radius, pair) = best;
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::ZeroDistance);
    }
    Ok(EigenvalueEstimate {
        lambda: 1.0 / radius,
        radius,
        witness: pair.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainSpec, Shape};
    use crate::grid::build_grid;

    fn dom(shape: Shape) -> DomainSpec {
        DomainSpec::new(shape, vec![]).unwrap()
    }

    fn rect() -> DomainSpec {
        dom(Shape::Rectangle {
            half_width: 1.0,
            half_height: 0.5,
        })
    }

    /// Distance by exhaustive search over the zero-pinned nodes.
    fn brute_distance(grid: &Grid) -> Vec<f64> {
        let sources: Vec<_> = grid
            .pinned()
            .filter(|&(_, v)| v == 0.0)
            .map(|(i, _)| grid.node(i))
            .collect();
        grid.nodes()
            .iter()
            .map(|x| {
                sources
                    .iter()
                    .map(|s| (x[0] - s[0]).hypot(x[1] - s[1]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn matches_brute_force_on_gallery() {
        let shapes = [
            Shape::Square,
            Shape::Disk { radius: 0.8 },
            Shape::default_triangle(),
            Shape::LShape,
            Shape::Heart,
            Shape::default_dumbbell(),
            Shape::default_square_minus_disk(),
        ];
        for shape in shapes {
            let g = build_grid(&dom(shape.clone()), 41, 2).unwrap();
            let d = distance_transform(&g).unwrap();
            let b = brute_distance(&g);
            for i in 0..g.len() {
                assert!((d[i] - b[i]).abs() < 1e-12, "{shape:?} node {i}: {} vs {}", d[i], b[i]);
            }
        }
    }

    #[test]
    fn square_distance_examples() {
        let g = build_grid(&DomainSpec::square(), 97, 5).unwrap();
        let h = g.spacing();
        let d = distance_transform(&g).unwrap();
        let o = g.nearest_node([0.0, 0.0]);
        assert_eq!(d[o], 1.0);
        let near = g.nearest_node([1.0 - h, 0.3]);
        assert!((d[near] - h).abs() < 1e-12);
        for (i, _) in g.pinned() {
            assert_eq!(d[i], 0.0);
        }
    }

    #[test]
    fn distance_is_one_lipschitz() {
        for shape in [Shape::Square, Shape::LShape, Shape::Disk { radius: 0.9 }] {
            let g = build_grid(&dom(shape), 21, 1).unwrap();
            let d = distance_transform(&g).unwrap();
            for i in 0..g.len() {
                for j in 0..g.len() {
                    let (a, b) = (g.node(i), g.node(j));
                    let dist = (a[0] - b[0]).hypot(a[1] - b[1]);
                    assert!((d[i] - d[j]).abs() <= dist + 1e-12);
                }
            }
        }
    }

    #[test]
    fn first_eigenvalue_examples() {
        let cases = [
            (DomainSpec::square(), 1.0),
            (rect(), 2.0),
            (dom(Shape::Disk { radius: 0.8 }), 1.25),
        ];
        for (domain, expected) in cases {
            let g = build_grid(&domain, 97, 5).unwrap();
            let h = g.spacing();
            let d = distance_transform(&g).unwrap();
            let est = lambda1(&d).unwrap();
            assert_eq!(est.lambda * est.radius, 1.0);
            assert!((est.lambda / expected - 1.0).abs() <= 2.0 * h, "{domain:?}: {}", est.lambda);
            assert!(est.witness.iter().all(|&i| !g.is_pinned(i)));
        }
        let g = build_grid(&rect(), 97, 5).unwrap();
        let d = distance_transform(&g).unwrap();
        assert!((d.max() - 0.5).abs() <= g.spacing());
        assert!(matches!(lambda1(&ScalarField::zeros(4)), Err(Error::ZeroDistance)));
    }

    #[test]
    fn ridge_examples() {
        let g = build_grid(&DomainSpec::square(), 97, 5).unwrap();
        let h = g.spacing();
        let d = distance_transform(&g).unwrap();
        let ridge = high_ridge(&d, h / 2.0);
        assert_eq!(ridge, vec![g.nearest_node([0.0, 0.0])]);

        let g = build_grid(&rect(), 97, 5).unwrap();
        let d = distance_transform(&g).unwrap();
        let ridge = high_ridge(&d, h / 2.0);
        assert!(!ridge.is_empty());
        for &i in &ridge {
            let [x, y] = g.node(i);
            assert_eq!(y, 0.0);
            assert!(x.abs() <= 0.5 + 1e-12);
        }
        assert_eq!(ridge.len(), 49);

        let g = build_grid(&dom(Shape::default_dumbbell()), 97, 5).unwrap();
        let d = distance_transform(&g).unwrap();
        let ridge = high_ridge(&d, h / 2.0);
        assert!(ridge.iter().any(|&i| g.node(i)[0] < -0.5));
        assert!(ridge.iter().any(|&i| g.node(i)[0] > 0.5));
        assert!(ridge.iter().all(|&i| g.node(i)[0].abs() > 0.5));

        for tol in [0.0, h, 0.1] {
            let small = high_ridge(&d, 0.0);
            let large = high_ridge(&d, tol);
            assert!(small.iter().all(|i| large.contains(i)));
        }
    }

    fn brute_two_ball(g: &Grid, d: &ScalarField) -> (f64, [usize; 2]) {
        let mut best = (f64::NEG_INFINITY, [0, 0]);
        let int = g.interior();
        for (a, &i) in int.iter().enumerate() {
            for &j in &int[a + 1..] {
                let r = pair_radius(g, d, i, j);
                if r > best.0 {
                    best = (r, [i, j]);
                }
            }
        }
        best
    }

    #[test]
    fn two_ball_matches_brute_force() {
        for shape in [
            Shape::Square,
            Shape::Disk { radius: 1.0 },
            Shape::LShape,
            Shape::default_triangle(),
            Shape::Rectangle {
                half_width: 1.0,
                half_height: 0.5,
            },
        ] {
            let g = build_grid(&dom(shape.clone()), 33, 2).unwrap();
            let d = distance_transform(&g).unwrap();
            let fast = lambda2_two_ball(&g, &d).unwrap();
            let (r, pair) = brute_two_ball(&g, &d);
            assert_eq!(fast.radius, r, "{shape:?}");
            assert_eq!(fast.witness, pair.to_vec(), "{shape:?}");
            let first = lambda1(&d).unwrap();
            assert!(fast.lambda >= first.lambda);
        }
    }

    #[test]
    fn two_ball_examples() {
        let g = build_grid(&rect(), 49, 3).unwrap();
        let h = g.spacing();
        let d = distance_transform(&g).unwrap();
        let est = lambda2_two_ball(&g, &d).unwrap();
        assert!((est.radius - 0.5).abs() <= h);

        let g = build_grid(&dom(Shape::Disk { radius: 1.0 }), 49, 3).unwrap();
        let d = distance_transform(&g).unwrap();
        let est = lambda2_two_ball(&g, &d).unwrap();
        assert!((est.radius - 0.5).abs() <= 2.0 * h, "{}", est.radius);
    }

    #[test]
    fn two_ball_needs_two_nodes() {
        let g = build_grid(&DomainSpec::square(), 5, 1).unwrap();
        let d = distance_transform(&g).unwrap();
        let all: Vec<(usize, f64)> = g.interior()[1..].iter().map(|&i| (i, 0.0)).collect();
        let g1 = g.with_pinned(&all).unwrap();
        assert!(matches!(lambda2_two_ball(&g1, &d), Err(Error::TooFewNodes(1))));
    }
}
