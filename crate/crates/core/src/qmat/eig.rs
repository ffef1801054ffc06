//! Hermitian eigendecomposition via cyclic Jacobi rotations.
//!
//! Dense, deterministic, no external dependencies. Plenty fast and very
//! accurate at the dimensions this crate works at (≤ 64 for the optimizers,
//! a few hundred for one-off gadget checks).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::matrix::ComplexMatrix;
use crate::tol::Tolerances;

/// Eigendecomposition of a Hermitian matrix: M = Q Λ Q†.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Matching eigenvectors as orthonormal columns.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// Rebuild Q Λ Q†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let q = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let lam = self.eigenvalues[k];
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let qik = q.get(i, k);
                for j in 0..n {
                    let v = qik * q.get(j, k).conj() * lam;
                    out.data[i * n + j] += v;
                }
            }
        }
        out
    }

    /// Column k as a vector.
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        let n = self.eigenvalues.len();
        (0..n).map(|i| self.eigenvectors.get(i, k)).collect()
    }

    /// Apply a real function to the eigenvalues and reassemble Q f(Λ) Q†.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mapped = Spectrum {
            eigenvalues: self.eigenvalues.iter().map(|&l| f(l)).collect(),
            eigenvectors: self.eigenvectors.clone(),
        };
        mapped.reconstruct()
    }
}

/// Off-diagonal Frobenius mass, the Jacobi convergence measure.
fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m.get(i, j).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Rejects inputs whose Hermiticity residual exceeds `tol.herm`; the
/// iteration itself runs on the symmetrized matrix so rounding drift in the
/// input cannot leak into complex eigenvalues.
pub fn hermitian_eig_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let residual = m.hermiticity_residual();
    if residual > tol.herm {
        return Err(Error::NotHermitian {
            residual,
            tol: tol.herm,
        });
    }
    let n = m.rows;
    let mut a = m.hermitize();
    let mut q = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    let threshold = 1e-14 * scale;

    if n > 1 && scale > 0.0 {
        const MAX_SWEEPS: usize = 60;
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(&a) <= threshold {
                break;
            }
            for p in 0..n - 1 {
                for qi in p + 1..n {
                    rotate_pair(&mut a, &mut q, p, qi);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        eigenvalues.push(diag[old_col]);
        for i in 0..n {
            eigenvectors.set(i, new_col, q.get(i, old_col));
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<Spectrum> {
    hermitian_eig_with(m, &Tolerances::default())
}

/// One complex Jacobi rotation zeroing a(p,q), accumulating into q_mat.
fn rotate_pair(a: &mut ComplexMatrix, q_mat: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let phase = apq / r;

    // tan θ from cot 2θ = (app - aqq) / (2r), smaller-magnitude root
    let u = (app - aqq) / (2.0 * r);
    let t = if u >= 0.0 {
        1.0 / (u + (u * u + 1.0).sqrt())
    } else {
        -1.0 / (-u + (u * u + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = a.rows;
    // A <- J† A J with J = I except J[p,p]=c, J[p,q]=-phase·s, J[q,p]=conj(phase)·s, J[q,q]=c
    for i in 0..n {
        let aip = a.get(i, p);
        let aiq = a.get(i, q);
        a.set(i, p, aip * c + aiq * phase.conj() * s);
        a.set(i, q, -aip * phase * s + aiq * c);
    }
    for j in 0..n {
        let apj = a.get(p, j);
        let aqj = a.get(q, j);
        a.set(p, j, apj * c + aqj * phase * s);
        a.set(q, j, -apj * phase.conj() * s + aqj * c);
    }
    // clean up rounding: force the zeroed pair and real diagonal
    a.set(p, q, Complex64::new(0.0, 0.0));
    a.set(q, p, Complex64::new(0.0, 0.0));
    let app_new = a.get(p, p).re;
    let aqq_new = a.get(q, q).re;
    a.set(p, p, Complex64::new(app_new, 0.0));
    a.set(q, q, Complex64::new(aqq_new, 0.0));

    for i in 0..n {
        let qip = q_mat.get(i, p);
        let qiq = q_mat.get(i, q);
        q_mat.set(i, p, qip * c + qiq * phase.conj() * s);
        q_mat.set(i, q, -qip * phase * s + qiq * c);
    }
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eig(m)?.eigenvalues)
}

/// log2 of a positive semidefinite matrix; eigenvalues at or below `floor`
/// are treated as `floor` so the result stays finite.
pub fn log2_psd_clamped(m: &ComplexMatrix, floor: f64) -> Result<ComplexMatrix> {
    let spec = hermitian_eig(m)?;
    Ok(spec.map_eigenvalues(|l| l.max(floor).log2()))
}

/// log2 of a strictly positive matrix; errors when any eigenvalue is at or
/// below `cutoff`.
pub fn log2_positive(m: &ComplexMatrix, cutoff: f64) -> Result<ComplexMatrix> {
    let spec = hermitian_eig(m)?;
    let min_eig = *spec
        .eigenvalues
        .last()
        .expect("spectrum of a nonempty matrix");
    if min_eig <= cutoff {
        return Err(Error::SingularOutput { min_eig });
    }
    Ok(spec.map_eigenvalues(|l| l.log2()))
}

/// Square root of a positive semidefinite matrix (negative rounding clamped).
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = hermitian_eig(m)?;
    Ok(spec.map_eigenvalues(|l| l.max(0.0).sqrt()))
}

/// Pseudo-inverse square root on the support; eigenvalues at or below
/// `cutoff` map to zero.
pub fn inv_sqrt_psd(m: &ComplexMatrix, cutoff: f64) -> Result<ComplexMatrix> {
    let spec = hermitian_eig(m)?;
    Ok(spec.map_eigenvalues(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::matrix::inner;
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            }
        }
        m.hermitize()
    }

    #[test]
    fn diagonal_spectrum() {
        let m = ComplexMatrix::diagonal_real(&[3.0, 1.0]);
        let s = hermitian_eig(&m).unwrap();
        assert!((s.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
        // standard basis vectors up to phase
        assert!((s.eigenvectors.get(0, 0).norm() - 1.0).abs() < 1e-14);
        assert!((s.eigenvectors.get(1, 1).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_x_spectrum() {
        let m = ComplexMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        let s = hermitian_eig(&m).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        for seed in 0..5u64 {
            let m = random_hermitian(8, seed);
            let s = hermitian_eig(&m).unwrap();
            let err = s.reconstruct().sub(&m).frobenius_norm();
            assert!(err <= 1e-10 * m.frobenius_norm().max(1.0), "err = {err:e}");
            // columns orthonormal
            for a in 0..8 {
                for b in 0..8 {
                    let dot = inner(&s.eigenvector(a), &s.eigenvector(b));
                    let target = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - c(target, 0.0)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(2., 0.), c(0., 0.)]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_squares_back() {
        let m = random_hermitian(5, 42);
        // make it PSD by squaring
        let psd = m.matmul(&m.adjoint());
        let root = sqrt_psd(&psd).unwrap();
        let err = root.matmul(&root).sub(&psd).frobenius_norm();
        assert!(err < 1e-10 * psd.frobenius_norm());
    }
}
