//! Pointwise continuum operators on second-order jets.
//!
//! These are the consistency oracles for the discrete schemes: the
//! un-normalized infinity Laplacian `p^T M p`, the sign-split eigenvalue
//! operator `F_Λ` and its sign-free reformulation `H_Λ`.

/// Value, gradient and (symmetrized) Hessian of a function at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondOrderJet {
    pub u: f64,
    pub p: [f64; 2],
    pub m: [[f64; 2]; 2],
}

impl SecondOrderJet {
    pub fn new(u: f64, p: [f64; 2], m: [[f64; 2]; 2]) -> Self {
        let off = 0.5 * (m[0][1] + m[1][0]);
        SecondOrderJet {
            u,
            p,
            m: [[m[0][0], off], [off, m[1][1]]],
        }
    }

    pub fn grad_norm(&self) -> f64 {
        self.p[0].hypot(self.p[1])
    }

    /// Same jet with the Hessian replaced.
    pub fn with_hessian(&self, m: [[f64; 2]; 2]) -> Self {
        SecondOrderJet::new(self.u, self.p, m)
    }
}

/// `p^T M p`.
pub fn infinity_laplacian(jet: &SecondOrderJet) -> f64 {
    let [a, b] = jet.p;
    let m = jet.m;
    a * (m[0][0] * a + m[0][1] * b) + b * (m[1][0] * a + m[1][1] * b)
}

/// `p^T M p / |p|^2`, zero when the gradient vanishes.
pub fn normalized_infinity_laplacian(jet: &SecondOrderJet) -> f64 {
    let g2 = jet.p[0] * jet.p[0] + jet.p[1] * jet.p[1];
    if g2 == 0.0 {
        0.0
    } else {
        infinity_laplacian(jet) / g2
    }
}

/// The eigenvalue operator split on the sign of `u` (exact comparison with zero).
pub fn eval_f_lambda(jet: &SecondOrderJet, lambda: f64) -> f64 {
    let g = jet.grad_norm();
    let lap = infinity_laplacian(jet);
    if jet.u > 0.0 {
        (g - lambda * jet.u).min(-lap)
    } else if jet.u == 0.0 {
        -lap
    } else {
        (-g - lambda * jet.u).max(-lap)
    }
}

/// `min(|p| - Λu, -p^T M p) + max(-|p| - Λu, -p^T M p) + p^T M p`.
pub fn eval_h_lambda(jet: &SecondOrderJet, lambda: f64) -> f64 {
    let g = jet.grad_norm();
    let lap = infinity_laplacian(jet);
    (g - lambda * jet.u).min(-lap) + (-g - lambda * jet.u).max(-lap) + lap
}
