//! Seeded random matrices and states. Everything here is deterministic per
//! seed so that experiments replay bit-for-bit.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::qmat::matrix::{inner, norm, ComplexMatrix};
use crate::qmat::state::{DensityMatrix, PureState};

/// Derive a stream seed from a master seed and an index (splitmix64 step).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; two uniforms per call keeps the stream layout simple.
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian_complex(rng)).collect();
    ComplexMatrix { rows, cols, data }
}

/// Thin QR by twice-iterated modified Gram-Schmidt. Returns Q with
/// orthonormal columns and positive real diagonal of R, so a Gaussian input
/// yields a Haar-distributed isometry.
pub fn gram_schmidt_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let rows = m.rows;
    let cols = m.cols;
    assert!(rows >= cols, "need at least as many rows as columns");
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v: Vec<Complex64> = (0..rows).map(|i| m.get(i, j)).collect();
        for _pass in 0..2 {
            for qcol in q.iter() {
                let r = inner(qcol, &v);
                for i in 0..rows {
                    v[i] -= r * qcol[i];
                }
            }
        }
        let nv = norm(&v);
        if nv < 1e-300 {
            // degenerate column; replace with a basis vector and re-orthogonalize
            let mut w = vec![Complex64::new(0.0, 0.0); rows];
            w[j % rows] = Complex64::new(1.0, 0.0);
            for qcol in q.iter() {
                let r = inner(qcol, &w);
                for i in 0..rows {
                    w[i] -= r * qcol[i];
                }
            }
            let nw = norm(&w).max(1e-300);
            v = w.iter().map(|z| z / nw).collect();
        } else {
            for z in v.iter_mut() {
                *z /= nv;
            }
        }
        q.push(v);
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for (j, col) in q.iter().enumerate() {
        for i in 0..rows {
            out.set(i, j, col[i]);
        }
    }
    out
}

/// Haar-random isometry of shape rows×cols (rows ≥ cols).
pub fn random_isometry(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = rng_from(seed);
    gram_schmidt_columns(&gaussian_matrix(rows, cols, &mut rng))
}

/// Haar-random unitary.
pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    random_isometry(dim, dim, seed)
}

/// Haar-random pure state, optionally carrying factor structure.
pub fn random_pure(factors: &[usize], seed: u64) -> Result<PureState> {
    let dim: usize = factors.iter().product();
    let mut rng = rng_from(seed);
    let mut amp: Vec<Complex64> = (0..dim).map(|_| gaussian_complex(&mut rng)).collect();
    crate::qmat::matrix::normalize(&mut amp);
    PureState::from_trusted(amp, factors.to_vec())
}

pub fn random_pure_with_rng(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut amp: Vec<Complex64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
    crate::qmat::matrix::normalize(&mut amp);
    amp
}

/// Random rank-r density matrix: marginal of a Haar-random pure state on
/// dim × r.
pub fn random_density(factors: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    let dim: usize = factors.iter().product();
    let rank = rank.clamp(1, dim);
    let iso = random_isometry(dim * rank, 1, seed);
    let amp: Vec<Complex64> = (0..dim * rank).map(|i| iso.get(i, 0)).collect();
    let psi = PureState::from_trusted(amp, vec![dim, rank])?;
    let rho = psi.marginal(&[0])?;
    rho.with_factors(factors.to_vec())
}
