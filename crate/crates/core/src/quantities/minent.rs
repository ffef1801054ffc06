//! Minimum output entropy by projected gradient descent over pure inputs.

use num_complex::Complex64;

use crate::channels::KrausChannel;
use crate::error::Result;
use crate::qmat::eig::log2_psd_clamped;
use crate::qmat::entropy::entropy_of_matrix;
use crate::qmat::random::{random_pure_with_rng, rng_from};
use crate::qmat::state::PureState;
use crate::quantities::optimize::{
    grad_norm_sq_vec, sphere_retract, sphere_tangent, StallDetector, StepControl,
};
use crate::quantities::{BoundDirection, Estimate, OptimizerOptions, Witness};

const LOG_FLOOR: f64 = 1e-18;

fn output_entropy(n: &KrausChannel, v: &[Complex64]) -> f64 {
    entropy_of_matrix(&n.apply_pure(v).hermitize()).expect("channel output is Hermitian")
}

/// Euclidean gradient of H(N(|v⟩⟨v|)) with respect to conj(v):
/// −(N†(log2 N(v v†)) + log2e · I) v. The clamped log keeps it finite at
/// singular outputs; the radial log2e part is removed by the tangent
/// projection anyway.
fn entropy_gradient(n: &KrausChannel, v: &[Complex64]) -> Vec<Complex64> {
    let out = n.apply_pure(v).hermitize();
    let log_out = log2_psd_clamped(&out, LOG_FLOOR).expect("output is Hermitian");
    let w = n.adjoint_apply(&log_out);
    let wv = w.matvec(v);
    wv.iter().map(|z| -z).collect()
}

pub fn min_output_entropy(n: &KrausChannel, opts: &OptimizerOptions) -> Result<Estimate> {
    min_output_entropy_seeded(n, opts, &[])
}

/// Multi-restart descent; `seeds` are used as the initial points of the first
/// restarts, the rest start from Haar-random vectors.
pub fn min_output_entropy_seeded(
    n: &KrausChannel,
    opts: &OptimizerOptions,
    seeds: &[PureState],
) -> Result<Estimate> {
    let dim = n.d_in;
    let mut best: Option<(f64, Vec<Complex64>, bool)> = None;
    let mut total_iters = 0usize;
    let restarts = opts.restarts.max(1).max(seeds.len());
    for r in 0..restarts {
        let start: Vec<Complex64> = if r < seeds.len() {
            seeds[r].amplitudes.clone()
        } else {
            let mut rng = rng_from(opts.restart_seed(r));
            random_pure_with_rng(dim, &mut rng)
        };
        let (v, value, iters, converged) = descend(n, start, opts.max_iters, opts);
        total_iters += iters;
        let better = match &best {
            None => true,
            Some((bv, _, _)) => value < *bv,
        };
        if better {
            best = Some((value, v, converged));
        }
    }
    let (best_value, mut v, mut converged) = best.expect("at least one restart");
    if !converged {
        // budget extension for the winning candidate
        let (v2, value2, iters, conv2) = descend(n, v.clone(), opts.max_iters * 2, opts);
        total_iters += iters;
        if value2 < best_value {
            v = v2;
        }
        converged = conv2;
    }
    let witness = PureState::from_trusted(v, vec![dim])?;
    let value = output_entropy(n, &witness.amplitudes);
    Ok(Estimate {
        value,
        bound_direction: BoundDirection::UpperOnMin,
        witness: Witness::Pure(witness),
        converged,
        iterations: total_iters,
    })
}

fn descend(
    n: &KrausChannel,
    start: Vec<Complex64>,
    max_iters: usize,
    opts: &OptimizerOptions,
) -> (Vec<Complex64>, f64, usize, bool) {
    let mut v = start;
    let mut value = output_entropy(n, &v);
    let mut step = StepControl::new(0.1);
    let mut stall = StallDetector::new(opts.value_tol, 8);
    let mut converged = false;
    let mut iters = 0;
    for _ in 0..max_iters {
        iters += 1;
        let grad = entropy_gradient(n, &v);
        let tangent = sphere_tangent(&v, &grad);
        let dir: Vec<Complex64> = tangent.iter().map(|z| -z).collect();
        let dn = grad_norm_sq_vec(&dir);
        if dn < opts.step_tol * opts.step_tol {
            converged = true;
            break;
        }
        match step.search(value, dn, |eta| {
            output_entropy(n, &sphere_retract(&v, &dir, eta))
        }) {
            Some((eta, new_value)) => {
                let improvement = value - new_value;
                v = sphere_retract(&v, &dir, eta);
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
    (v, value, iters, converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{depolarizing_channel, identity_channel, random_channel};
    use crate::qmat::random::random_pure;

    const H2_QUARTER: f64 = 0.811_278_124_459_132_9;

    fn small_opts(seed: u64) -> OptimizerOptions {
        OptimizerOptions {
            restarts: 8,
            max_iters: 400,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn identity_channel_minimum_is_zero() {
        let n = identity_channel(2).unwrap();
        let est = min_output_entropy(&n, &small_opts(1)).unwrap();
        assert!(est.value.abs() < 1e-9);
        assert!(matches!(est.bound_direction, BoundDirection::UpperOnMin));
    }

    #[test]
    fn depolarizing_minimum_matches_closed_form() {
        let n = depolarizing_channel(0.5).unwrap();
        let est = min_output_entropy(&n, &small_opts(2)).unwrap();
        assert!((est.value - H2_QUARTER).abs() < 1e-9);
    }

    #[test]
    fn fully_depolarizing_minimum_is_one() {
        let n = depolarizing_channel(1.0).unwrap();
        let est = min_output_entropy(&n, &small_opts(3)).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn witness_reevaluates_to_value() {
        let n = random_channel(3, 3, 2, 17).unwrap();
        let est = min_output_entropy(&n, &small_opts(4)).unwrap();
        let Witness::Pure(ref v) = est.witness else {
            panic!("expected pure witness")
        };
        assert!((output_entropy(&n, &v.amplitudes) - est.value).abs() < 1e-9);
    }

    #[test]
    fn estimate_below_random_samples() {
        let n = random_channel(2, 2, 2, 23).unwrap();
        let est = min_output_entropy(&n, &small_opts(5)).unwrap();
        let mut sample_min = f64::INFINITY;
        for k in 0..100u64 {
            let v = random_pure(&[2], 1000 + k).unwrap();
            sample_min = sample_min.min(output_entropy(&n, &v.amplitudes));
        }
        assert!(est.value <= sample_min + 1e-9);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let n = random_channel(3, 2, 2, 31).unwrap();
        let v = random_pure(&[3], 32).unwrap().amplitudes;
        let grad = entropy_gradient(&n, &v);
        let tangent = sphere_tangent(&v, &grad);
        // directional derivative along the tangent direction
        let eps = 1e-6;
        let plus = output_entropy(&n, &sphere_retract(&v, &tangent, eps));
        let minus = output_entropy(&n, &sphere_retract(&v, &tangent, -eps));
        let fd = (plus - minus) / (2.0 * eps);
        let analytic = 2.0 * grad_norm_sq_vec(&tangent);
        assert!(
            (fd - analytic).abs() <= 1e-5 * analytic.abs().max(1.0),
            "fd {fd} vs analytic {analytic}"
        );
    }
}
