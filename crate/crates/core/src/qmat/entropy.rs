//! Entropy primitives. All entropies are in bits.

use crate::error::{Error, Result};
use crate::qmat::eig::hermitian_eigenvalues;
use crate::qmat::matrix::ComplexMatrix;
use crate::qmat::state::DensityMatrix;
use crate::tol::Tolerances;

/// Entropy of a probability-like eigenvalue list: -Σ λ log2 λ.
/// Values at or below `log_eps` contribute zero; slightly negative rounding
/// noise down to `-psd` is clamped.
pub fn entropy_of_eigenvalues(eigs: &[f64], tol: &Tolerances) -> f64 {
    let mut h = 0.0;
    for &l in eigs {
        let l = if l < 0.0 && l >= -tol.psd { 0.0 } else { l };
        if l > tol.log_eps {
            h -= l * l.log2();
        }
    }
    h
}

/// Entropy of a Hermitian PSD matrix given as raw storage. The caller
/// guarantees positivity up to rounding; used on channel outputs and
/// marginals that are PSD by construction.
pub fn entropy_of_matrix(m: &ComplexMatrix) -> Result<f64> {
    let tol = Tolerances::default();
    let eigs = hermitian_eigenvalues(m)?;
    Ok(entropy_of_eigenvalues(&eigs, &tol))
}

/// Von Neumann entropy H(ρ) = -Tr ρ log2 ρ of a validated density matrix.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let tol = Tolerances::default();
    rho.validate(&tol)?;
    entropy_of_matrix(&rho.matrix)
}

/// Binary entropy H2(x) = -x log2 x - (1-x) log2 (1-x).
///
/// Arguments outside the unit interval by more than the norm tolerance are
/// rejected; rounding spill just outside is clamped.
pub fn binary_entropy(x: f64) -> Result<f64> {
    let tol = Tolerances::default();
    if x < -tol.norm || x > 1.0 + tol.norm {
        return Err(Error::BadParameter {
            name: "x",
            value: x,
            range: "[0, 1]",
        });
    }
    let x = x.clamp(0.0, 1.0);
    let mut h = 0.0;
    if x > tol.log_eps {
        h -= x * x.log2();
    }
    let y = 1.0 - x;
    if y > tol.log_eps {
        h -= y * y.log2();
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::matrix::ComplexMatrix;
    use crate::qmat::random::{random_density, random_unitary};
    use crate::qmat::state::{tensor_states, DensityMatrix, PureState};

    // -0.75 log2 0.75 - 0.25 log2 0.25, evaluated with 40-digit arithmetic
    const H_3Q: f64 = 0.811_278_124_459_132_9;

    #[test]
    fn pure_state_has_zero_entropy() {
        let rho = DensityMatrix::from_pure(&PureState::basis(3, 1));
        assert!(von_neumann_entropy(&rho).unwrap().abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_qubit_is_one_bit() {
        let h = von_neumann_entropy(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((h - 1.0).abs() < 1e-14);
    }

    #[test]
    fn skewed_qubit_matches_scalar_evaluation() {
        let rho = DensityMatrix::new(ComplexMatrix::diagonal_real(&[0.75, 0.25]), vec![2]).unwrap();
        assert!((von_neumann_entropy(&rho).unwrap() - H_3Q).abs() < 1e-12);
    }

    #[test]
    fn binary_entropy_points() {
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.25).unwrap() - H_3Q).abs() < 1e-12);
        // symmetry
        for x in [0.1, 0.3, 0.47] {
            let a = binary_entropy(x).unwrap();
            let b = binary_entropy(1.0 - x).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.2).is_err());
    }

    #[test]
    fn unitary_invariance() {
        for seed in 0..20u64 {
            let rho = random_density(&[4], 4, seed).unwrap();
            let u = random_unitary(4, seed + 1000);
            let conj = u.matmul(&rho.matrix).matmul(&u.adjoint());
            let rotated = DensityMatrix::from_trusted(conj.hermitize(), vec![4]).unwrap();
            let a = von_neumann_entropy(&rho).unwrap();
            let b = von_neumann_entropy(&rotated).unwrap();
            assert!((a - b).abs() < 1e-9, "seed {seed}: {a} vs {b}");
        }
    }

    #[test]
    fn additivity_on_products() {
        for seed in 0..10u64 {
            let a = random_density(&[2], 2, seed).unwrap();
            let b = random_density(&[3], 3, seed + 77).unwrap();
            let ab = tensor_states(&a, &b).unwrap();
            let lhs = von_neumann_entropy(&ab).unwrap();
            let rhs = von_neumann_entropy(&a).unwrap() + von_neumann_entropy(&b).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn concavity_spot_check() {
        for seed in 0..8u64 {
            let a = random_density(&[3], 3, seed).unwrap();
            let b = random_density(&[3], 3, seed + 31).unwrap();
            for lam in [0.1, 0.25, 0.5, 0.75, 0.9] {
                let mix = a
                    .matrix
                    .scale_real(lam)
                    .add(&b.matrix.scale_real(1.0 - lam));
                let mixed = DensityMatrix::from_trusted(mix, vec![3]).unwrap();
                let lhs = von_neumann_entropy(&mixed).unwrap();
                let rhs = lam * von_neumann_entropy(&a).unwrap()
                    + (1.0 - lam) * von_neumann_entropy(&b).unwrap();
                assert!(lhs >= rhs - 1e-9);
            }
        }
    }
}
