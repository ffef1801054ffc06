//! Entanglement of formation by minimizing the average marginal entropy over
//! pure-state decompositions.
//!
//! Decompositions of σ with n members are parameterized by n×r isometries
//! applied to the eigen-decomposition of σ (r = rank σ), so every iterate
//! mixes back to σ exactly and the feasible set is a smooth manifold.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::eig::log2_psd_clamped;
use crate::qmat::entropy::entropy_of_matrix;
use crate::qmat::matrix::{inner, ComplexMatrix};
use crate::qmat::random::{gaussian_matrix, gram_schmidt_columns, rng_from};
use crate::qmat::state::{DensityMatrix, PureState};
use crate::quantities::optimize::{
    grad_norm_sq_mat, stiefel_retract, stiefel_tangent, StallDetector, StepControl,
};
use crate::quantities::{BoundDirection, Ensemble, Estimate, OptimizerOptions, Witness};

const LOG_FLOOR: f64 = 1e-18;
const WEIGHT_FLOOR: f64 = 1e-14;

/// A decomposition search space: members are rows of an isometry applied to
/// the weighted eigenbasis of the target state.
pub(crate) struct DecompositionSpace {
    /// dim × r, column j = √λ_j |u_j⟩.
    pub basis: ComplexMatrix,
    pub dim: usize,
    pub rank: usize,
    pub factors: Vec<usize>,
}

impl DecompositionSpace {
    pub fn from_state(sigma: &DensityMatrix, rel_cutoff: f64) -> Result<Self> {
        let (rank, spec) = sigma.rank_with_cutoff(rel_cutoff)?;
        let dim = sigma.dim;
        let mut basis = ComplexMatrix::zeros(dim, rank);
        for j in 0..rank {
            let w = spec.eigenvalues[j].max(0.0).sqrt();
            for i in 0..dim {
                basis.set(i, j, spec.eigenvectors.get(i, j) * w);
            }
        }
        Ok(DecompositionSpace {
            basis,
            dim,
            rank,
            factors: sigma.factors.clone(),
        })
    }

    /// Unnormalized member vectors w̃_i = Σ_j M_ij √λ_j |u_j⟩.
    pub fn members(&self, m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
        let n = m.rows;
        (0..n)
            .map(|i| {
                let mut w = vec![Complex64::new(0.0, 0.0); self.dim];
                for j in 0..self.rank {
                    let coeff = m.get(i, j);
                    if coeff.norm_sqr() == 0.0 {
                        continue;
                    }
                    for a in 0..self.dim {
                        w[a] += coeff * self.basis.get(a, j);
                    }
                }
                w
            })
            .collect()
    }

    pub fn ensemble(&self, m: &ComplexMatrix) -> Result<Ensemble> {
        let members = self.members(m);
        let mut probs = Vec::with_capacity(members.len());
        let mut states = Vec::with_capacity(members.len());
        for w in members {
            let t: f64 = w.iter().map(|z| z.norm_sqr()).sum();
            if t > WEIGHT_FLOOR {
                let amp: Vec<Complex64> = w.iter().map(|z| z / t.sqrt()).collect();
                probs.push(t);
                states.push(PureState::from_trusted(amp, self.factors.clone())?);
            } else {
                // keep the slot so probabilities still sum to one
                probs.push(t.max(0.0));
                states.push(PureState::basis(self.dim, 0).with_factors(self.factors.clone())?);
            }
        }
        let total: f64 = probs.iter().sum();
        if total > 0.0 {
            for p in probs.iter_mut() {
                *p /= total;
            }
        }
        Ensemble::new(probs, states)
    }

    /// Map an explicit decomposition {p_i, w_i} of σ onto the isometry whose
    /// rows reproduce it, padded with zero rows up to n members and
    /// re-orthonormalized.
    pub fn isometry_from_ensemble(&self, ens: &Ensemble, n: usize) -> Result<ComplexMatrix> {
        let n = n.max(ens.states.len()).max(self.rank);
        let mut m = ComplexMatrix::zeros(n, self.rank);
        // M_ij = √p_i ⟨u_j|w_i⟩ / √λ_j; basis column j is √λ_j|u_j⟩, so
        // ⟨basis_j|w_i⟩ = √λ_j⟨u_j|w_i⟩ and division by λ_j does both jobs.
        for (i, (p, w)) in ens.probs.iter().zip(&ens.states).enumerate() {
            for j in 0..self.rank {
                let col: Vec<Complex64> = (0..self.dim).map(|a| self.basis.get(a, j)).collect();
                let lam_j: f64 = col.iter().map(|z| z.norm_sqr()).sum();
                if lam_j < 1e-300 {
                    continue;
                }
                let overlap = inner(&col, &w.amplitudes);
                m.set(i, j, overlap * (p.sqrt() / lam_j));
            }
        }
        // a seed only needs to be close; orthonormalize to land on the manifold
        Ok(gram_schmidt_columns(&m))
    }
}

/// Marginal Tr_B w w† of an unnormalized bipartite vector.
fn first_marginal(w: &[Complex64], da: usize, db: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(da, da);
    for a in 0..da {
        for ap in 0..da {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..db {
                acc += w[a * db + b] * w[ap * db + b].conj();
            }
            out.set(a, ap, acc);
        }
    }
    out
}

/// Per-member objective and gradient for the E_F score.
///
/// f(w̃) = ‖w̃‖² · H(marginal(w̃)/‖w̃‖²), with Wirtinger gradient
/// ∂f/∂conj(w̃) = −(log2(ρ̂_A) ⊗ I) w̃.
fn member_score(w: &[Complex64], da: usize, db: usize) -> (f64, Vec<Complex64>) {
    let t: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    if t < WEIGHT_FLOOR {
        return (0.0, vec![Complex64::new(0.0, 0.0); w.len()]);
    }
    let marg = first_marginal(w, da, db).scale_real(1.0 / t).hermitize();
    let value = t * entropy_of_matrix(&marg).expect("marginal is Hermitian PSD");
    let log_marg = log2_psd_clamped(&marg, LOG_FLOOR).expect("marginal is Hermitian");
    let mut grad = vec![Complex64::new(0.0, 0.0); w.len()];
    for a in 0..da {
        for ap in 0..da {
            let l = log_marg.get(a, ap);
            if l.norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..db {
                grad[a * db + b] -= l * w[ap * db + b];
            }
        }
    }
    (value, grad)
}

fn objective(space: &DecompositionSpace, m: &ComplexMatrix, da: usize, db: usize) -> f64 {
    space
        .members(m)
        .iter()
        .map(|w| member_score(w, da, db).0)
        .sum()
}

fn objective_gradient(
    space: &DecompositionSpace,
    m: &ComplexMatrix,
    da: usize,
    db: usize,
) -> (f64, ComplexMatrix) {
    let members = space.members(m);
    let mut total = 0.0;
    let mut grad = ComplexMatrix::zeros(m.rows, m.cols);
    for (i, w) in members.iter().enumerate() {
        let (value, g) = member_score(w, da, db);
        total += value;
        // chain rule back to M: G[i,j] = ⟨basis_j, g⟩
        for j in 0..space.rank {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..space.dim {
                acc += space.basis.get(a, j).conj() * g[a];
            }
            grad.set(i, j, acc);
        }
    }
    (total, grad)
}

pub fn entanglement_of_formation(
    sigma: &DensityMatrix,
    opts: &OptimizerOptions,
) -> Result<Estimate> {
    entanglement_of_formation_seeded(sigma, opts, &[])
}

/// E_F search; `seed_ensembles` are decompositions of σ used as starting
/// points for the first restarts.
pub fn entanglement_of_formation_seeded(
    sigma: &DensityMatrix,
    opts: &OptimizerOptions,
    seed_ensembles: &[Ensemble],
) -> Result<Estimate> {
    let (da, db) = sigma.bipartition()?;
    let space = DecompositionSpace::from_state(sigma, 1e-12)?;
    let n_members = opts
        .ensemble_size
        .unwrap_or(space.rank * space.rank)
        .max(space.rank);

    let mut best: Option<(f64, ComplexMatrix, bool)> = None;
    let mut total_iters = 0usize;
    let restarts = opts.restarts.max(1).max(seed_ensembles.len());
    for r in 0..restarts {
        let start = if r < seed_ensembles.len() {
            space.isometry_from_ensemble(&seed_ensembles[r], n_members)?
        } else if r == seed_ensembles.len() {
            // canonical start: the eigen-decomposition itself
            let mut m = ComplexMatrix::zeros(n_members, space.rank);
            for j in 0..space.rank {
                m.set(j, j, Complex64::new(1.0, 0.0));
            }
            m
        } else {
            let mut rng = rng_from(opts.restart_seed(r));
            gram_schmidt_columns(&gaussian_matrix(n_members, space.rank, &mut rng))
        };
        let (m, value, iters, converged) = minimize(&space, start, da, db, opts.max_iters, opts);
        total_iters += iters;
        let better = match &best {
            None => true,
            Some((bv, _, _)) => value < *bv,
        };
        if better {
            best = Some((value, m, converged));
        }
    }
    let (_, mut m, mut converged) = best.expect("at least one restart");
    if !converged {
        let (m2, _, iters, conv2) = minimize(&space, m.clone(), da, db, opts.max_iters * 2, opts);
        total_iters += iters;
        m = m2;
        converged = conv2;
    }
    let witness = space.ensemble(&m)?;
    let value: f64 = witness
        .probs
        .iter()
        .zip(&witness.states)
        .map(|(p, v)| {
            if *p <= 0.0 {
                0.0
            } else {
                *p * entropy_of_matrix(&first_marginal(&v.amplitudes, da, db).hermitize())
                    .expect("marginal entropy")
            }
        })
        .sum();
    Ok(Estimate {
        value,
        bound_direction: BoundDirection::UpperOnMin,
        witness: Witness::Ensemble(witness),
        converged,
        iterations: total_iters,
    })
}

fn minimize(
    space: &DecompositionSpace,
    start: ComplexMatrix,
    da: usize,
    db: usize,
    max_iters: usize,
    opts: &OptimizerOptions,
) -> (ComplexMatrix, f64, usize, bool) {
    let mut m = start;
    let mut value = objective(space, &m, da, db);
    let mut step = StepControl::new(0.1);
    let mut stall = StallDetector::new(opts.value_tol, 8);
    let mut converged = false;
    let mut iters = 0;
    for _ in 0..max_iters {
        iters += 1;
        let (_, grad) = objective_gradient(space, &m, da, db);
        let tangent = stiefel_tangent(&m, &grad);
        let dir = tangent.scale_real(-1.0);
        let dn = grad_norm_sq_mat(&dir);
        if dn < opts.step_tol * opts.step_tol {
            converged = true;
            break;
        }
        match step.search(value, dn, |eta| {
            objective(space, &stiefel_retract(&m, &dir, eta), da, db)
        }) {
            Some((eta, new_value)) => {
                let improvement = value - new_value;
                m = stiefel_retract(&m, &dir, eta);
                value = new_value;
                if stall.update(improvement) {
                    converged = true;
                    break;
                }
            }
            None => {
                converged = stall.force();
                break;
            }
        }
    }
    (m, value, iters, converged)
}

/// Wootters closed form for two-qubit states; used as an independent oracle
/// in tests and by the harness to cross-check the search.
pub fn wootters_eof(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim != 4 || rho.factors != vec![2, 2] {
        return Err(Error::BipartitionMissing(rho.factors.len()));
    }
    let c = concurrence(rho)?;
    let arg = 0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt());
    crate::qmat::entropy::binary_entropy(arg)
}

pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let yy = {
        // σ_y ⊗ σ_y
        let mut m = ComplexMatrix::zeros(4, 4);
        m.set(0, 3, Complex64::new(-1.0, 0.0));
        m.set(1, 2, Complex64::new(1.0, 0.0));
        m.set(2, 1, Complex64::new(1.0, 0.0));
        m.set(3, 0, Complex64::new(-1.0, 0.0));
        m
    };
    let rho_tilde = yy.matmul(&rho.matrix.conjugate()).matmul(&yy);
    let root = crate::qmat::eig::sqrt_psd(&rho.matrix)?;
    let inner = root.matmul(&rho_tilde).matmul(&root).hermitize();
    let eigs = crate::qmat::eig::hermitian_eigenvalues(&inner)?;
    let lams: Vec<f64> = eigs.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok((lams[0] - lams[1] - lams[2] - lams[3]).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::random::random_density;
    use crate::qmat::state::tensor_states;
    use crate::quantities::pure_entanglement;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn epr_state() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = PureState::new(vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)], vec![2, 2]).unwrap();
        DensityMatrix::from_pure(&v)
    }

    fn werner(p: f64) -> DensityMatrix {
        let mixed = ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
        let m = epr_state().matrix.scale_real(p).add(&mixed);
        DensityMatrix::new(m, vec![2, 2]).unwrap()
    }

    fn small_opts(seed: u64) -> OptimizerOptions {
        OptimizerOptions {
            restarts: 12,
            max_iters: 600,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn epr_is_one_ebit() {
        let est = entanglement_of_formation(&epr_state(), &small_opts(1)).unwrap();
        assert!((est.value - 1.0).abs() < 1e-9, "value {}", est.value);
    }

    #[test]
    fn product_pure_state_is_zero() {
        let v = PureState::basis(4, 2).with_factors(vec![2, 2]).unwrap();
        let est = entanglement_of_formation(&DensityMatrix::from_pure(&v), &small_opts(2)).unwrap();
        assert!(est.value.abs() < 1e-9);
    }

    #[test]
    fn werner_state_matches_concurrence_form() {
        let rho = werner(0.8);
        // frozen from the closed form: C = 0.7, E_F = H2((1+√0.51)/2)
        let expected = 0.591_857_407_170_677_1;
        assert!((wootters_eof(&rho).unwrap() - expected).abs() < 1e-12);
        let est = entanglement_of_formation(&rho, &small_opts(3)).unwrap();
        assert!(
            (est.value - expected).abs() < 1e-3,
            "estimate {} vs {}",
            est.value,
            expected
        );
        assert!(est.value >= expected - 1e-6);
    }

    #[test]
    fn pure_sigma_equals_pure_entanglement() {
        for seed in 0..5u64 {
            let v = crate::qmat::random::random_pure(&[2, 2], seed).unwrap();
            let est = entanglement_of_formation(&DensityMatrix::from_pure(&v), &small_opts(seed))
                .unwrap();
            let direct = pure_entanglement(&v).unwrap();
            assert!((est.value - direct).abs() < 1e-6);
        }
    }

    #[test]
    fn qutrit_pure_state_matches_marginal_entropy() {
        let v = crate::qmat::random::random_pure(&[3, 3], 21).unwrap();
        let est =
            entanglement_of_formation(&DensityMatrix::from_pure(&v), &small_opts(22)).unwrap();
        let direct = pure_entanglement(&v).unwrap();
        assert!((est.value - direct).abs() < 1e-6);
        assert!(direct > 0.1); // not accidentally a near-product state
    }

    #[test]
    fn asymmetric_bipartition_runs() {
        // 2x3 split, rank 2: exercises rectangular marginals in the engine
        let rho = random_density(&[2, 3], 2, 23).unwrap();
        let est = entanglement_of_formation(&rho, &small_opts(24)).unwrap();
        assert!(est.value >= -1e-12 && est.value <= 1.0 + 1e-9);
        let Witness::Ensemble(ref ens) = est.witness else {
            panic!("expected ensemble witness")
        };
        assert!(ens.average_matrix().sub(&rho.matrix).frobenius_norm() <= 1e-8);
    }

    #[test]
    fn witness_mixes_to_sigma() {
        let rho = random_density(&[2, 2], 3, 9).unwrap();
        let est = entanglement_of_formation(&rho, &small_opts(10)).unwrap();
        let Witness::Ensemble(ref ens) = est.witness else {
            panic!("expected ensemble witness")
        };
        let avg = ens.average_matrix();
        assert!(avg.sub(&rho.matrix).frobenius_norm() <= 1e-8);
    }

    #[test]
    fn product_seeding_gives_subadditivity() {
        let s1 = random_density(&[2, 2], 2, 41).unwrap();
        let s2 = random_density(&[2, 2], 2, 42).unwrap();
        let e1 = entanglement_of_formation(&s1, &small_opts(43)).unwrap();
        let e2 = entanglement_of_formation(&s2, &small_opts(44)).unwrap();
        let joint = tensor_states(&s1, &s2)
            .unwrap()
            .permute_factors(&[0, 2, 1, 3])
            .unwrap() // A1 B1 A2 B2 -> A1 A2 B1 B2
            .with_factors(vec![4, 4])
            .unwrap();
        let (Witness::Ensemble(w1), Witness::Ensemble(w2)) = (&e1.witness, &e2.witness) else {
            panic!("expected ensemble witnesses")
        };
        let seed_ens = product_ensemble(w1, w2).unwrap();
        let mut opts = small_opts(45);
        opts.ensemble_size = Some(seed_ens.states.len().max(16));
        let joint_est = entanglement_of_formation_seeded(&joint, &opts, &[seed_ens]).unwrap();
        assert!(
            joint_est.value <= e1.value + e2.value + 1e-6,
            "joint {} vs {} + {}",
            joint_est.value,
            e1.value,
            e2.value
        );
    }

    #[test]
    fn stiefel_gradient_matches_finite_differences() {
        let rho = random_density(&[2, 2], 3, 77).unwrap();
        let space = DecompositionSpace::from_state(&rho, 1e-12).unwrap();
        let mut rng = rng_from(5);
        let m = gram_schmidt_columns(&gaussian_matrix(6, space.rank, &mut rng));
        let (_, grad) = objective_gradient(&space, &m, 2, 2);
        let tangent = stiefel_tangent(&m, &grad);
        let eps = 1e-6;
        let plus = objective(&space, &stiefel_retract(&m, &tangent, eps), 2, 2);
        let minus = objective(&space, &stiefel_retract(&m, &tangent, -eps), 2, 2);
        let fd = (plus - minus) / (2.0 * eps);
        let analytic = 2.0 * grad_norm_sq_mat(&tangent);
        assert!(
            (fd - analytic).abs() <= 1e-4 * analytic.abs().max(1.0),
            "fd {fd} vs analytic {analytic}"
        );
    }
}

/// Product of two decompositions as a decomposition of the reordered joint
/// state (A1A2|B1B2 grouping). Used for product-seeded subadditivity runs.
pub fn product_ensemble(e1: &Ensemble, e2: &Ensemble) -> Result<Ensemble> {
    let (a1, b1) = e1.states[0].bipartition()?;
    let (a2, b2) = e2.states[0].bipartition()?;
    let mut probs = Vec::with_capacity(e1.states.len() * e2.states.len());
    let mut states = Vec::with_capacity(probs.capacity());
    for (p1, w1) in e1.probs.iter().zip(&e1.states) {
        for (p2, w2) in e2.probs.iter().zip(&e2.states) {
            let joint = w1
                .tensor(w2)?
                .with_factors(vec![a1, b1, a2, b2])?
                .permute_factors(&[0, 2, 1, 3])?; // A1 B1 A2 B2 -> A1 A2 B1 B2
            probs.push(p1 * p2);
            states.push(joint.with_factors(vec![a1 * a2, b1 * b2])?);
        }
    }
    Ensemble::new(probs, states)
}
