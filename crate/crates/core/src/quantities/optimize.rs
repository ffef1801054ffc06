//! Shared manifold-optimization machinery: tangent projections, retractions,
//! backtracking line search, and the simplex projection.

use num_complex::Complex64;

use crate::qmat::matrix::{inner, normalize, ComplexMatrix};
use crate::qmat::random::gram_schmidt_columns;

/// Remove the component of `g` along `v` (complex span, so the irrelevant
/// global-phase direction goes too).
pub fn sphere_tangent(v: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let overlap = inner(v, g);
    g.iter().zip(v).map(|(gi, vi)| gi - overlap * vi).collect()
}

pub fn sphere_retract(v: &[Complex64], d: &[Complex64], eta: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = v.iter().zip(d).map(|(vi, di)| vi + di * eta).collect();
    normalize(&mut out);
    out
}

/// Project a Euclidean gradient onto the tangent space of the Stiefel
/// manifold {M : M†M = I} at M: G − M·sym(M†G).
pub fn stiefel_tangent(m: &ComplexMatrix, g: &ComplexMatrix) -> ComplexMatrix {
    let mg = m.adjoint().matmul(g);
    let sym = mg.add(&mg.adjoint()).scale_real(0.5);
    g.sub(&m.matmul(&sym))
}

/// Retract by re-orthonormalizing the stepped columns.
pub fn stiefel_retract(m: &ComplexMatrix, d: &ComplexMatrix, eta: f64) -> ComplexMatrix {
    let mut stepped = m.clone();
    stepped.add_scaled(d, eta);
    gram_schmidt_columns(&stepped)
}

pub fn grad_norm_sq_vec(d: &[Complex64]) -> f64 {
    d.iter().map(|z| z.norm_sqr()).sum()
}

pub fn grad_norm_sq_mat(d: &ComplexMatrix) -> f64 {
    d.data.iter().map(|z| z.norm_sqr()).sum()
}

/// Euclidean projection of a real vector onto the probability simplex.
pub fn simplex_project(p: &mut [f64]) {
    let n = p.len();
    let mut sorted: Vec<f64> = p.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (k as f64 + 1.0);
        if v - candidate > 0.0 {
            theta = candidate;
        }
    }
    let mut total = 0.0;
    for v in p.iter_mut() {
        *v = (*v - theta).max(0.0);
        total += *v;
    }
    if total > 0.0 {
        for v in p.iter_mut() {
            *v /= total;
        }
    } else {
        let u = 1.0 / n as f64;
        for v in p.iter_mut() {
            *v = u;
        }
    }
}

/// Backtracking step-size state shared across iterations: grows after easy
/// successes, shrinks on rejections.
pub struct StepControl {
    pub eta: f64,
    min_eta: f64,
}

impl StepControl {
    pub fn new(initial: f64) -> Self {
        StepControl {
            eta: initial,
            min_eta: 1e-14,
        }
    }

    /// Run an Armijo backtracking search for a descent direction with squared
    /// norm `dir_norm_sq`. `eval` maps a step size to the objective value (to
    /// be minimized). Returns Some(step, new_value) or None when no step
    /// improves.
    pub fn search(
        &mut self,
        current: f64,
        dir_norm_sq: f64,
        mut eval: impl FnMut(f64) -> f64,
    ) -> Option<(f64, f64)> {
        const ARMIJO: f64 = 1e-4;
        const SHRINK: f64 = 0.5;
        const GROW: f64 = 1.8;
        let mut eta = self.eta;
        for attempt in 0..40 {
            let candidate = eval(eta);
            if candidate <= current - ARMIJO * eta * dir_norm_sq && candidate.is_finite() {
                if attempt == 0 {
                    self.eta = (eta * GROW).min(1e3);
                } else {
                    self.eta = eta;
                }
                return Some((eta, candidate));
            }
            eta *= SHRINK;
            if eta < self.min_eta {
                break;
            }
        }
        None
    }
}

/// Tracks stalls: converged once the value stops improving for `patience`
/// consecutive iterations.
pub struct StallDetector {
    tol: f64,
    patience: usize,
    quiet: usize,
}

impl StallDetector {
    pub fn new(tol: f64, patience: usize) -> Self {
        StallDetector {
            tol,
            patience,
            quiet: 0,
        }
    }

    pub fn update(&mut self, improvement: f64) -> bool {
        if improvement.abs() < self.tol {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        self.quiet >= self.patience
    }

    pub fn force(&mut self) -> bool {
        self.quiet = self.patience;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection_basics() {
        let mut p = vec![0.5, 0.5, 0.5];
        simplex_project(&mut p);
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }

        let mut q = vec![10.0, 0.0, -5.0];
        simplex_project(&mut q);
        assert!((q[0] - 1.0).abs() < 1e-12);
        assert!(q[1].abs() < 1e-12);
        assert!(q[2].abs() < 1e-12);
    }

    #[test]
    fn sphere_tangent_is_orthogonal() {
        let v = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let g = vec![Complex64::new(0.3, 0.1), Complex64::new(0.2, -0.4)];
        let t = sphere_tangent(&v, &g);
        assert!(inner(&v, &t).norm() < 1e-14);
    }

    #[test]
    fn stiefel_retract_stays_on_manifold() {
        let m = crate::qmat::random::random_isometry(6, 3, 4);
        let mut d = crate::qmat::random::random_isometry(6, 3, 5);
        d = stiefel_tangent(&m, &d);
        let stepped = stiefel_retract(&m, &d, 0.3);
        let gram = stepped.adjoint().matmul(&stepped);
        assert!(gram.sub(&ComplexMatrix::identity(3)).frobenius_norm() < 1e-12);
    }
}
