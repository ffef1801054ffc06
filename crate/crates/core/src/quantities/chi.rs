//! Holevo capacity by multi-restart ascent over ensembles.
//!
//! Unconstrained runs ascend states on unit spheres and reweight
//! probabilities with the classic multiplicative capacity update. Constrained
//! runs (fixed average input ρ) add a quadratic penalty on the average with
//! an increasing weight schedule, then steer the final ensemble exactly onto
//! the constraint before reporting.

use num_complex::Complex64;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::qmat::eig::{inv_sqrt_psd, log2_psd_clamped, sqrt_psd};
use crate::qmat::entropy::entropy_of_matrix;
use crate::qmat::matrix::{normalize, ComplexMatrix};
use crate::qmat::random::{random_pure_with_rng, rng_from};
use crate::qmat::state::{DensityMatrix, PureState};
use crate::quantities::eof::DecompositionSpace;
use crate::quantities::optimize::{
    grad_norm_sq_vec, simplex_project, sphere_retract, sphere_tangent, StallDetector, StepControl,
};
use crate::quantities::{BoundDirection, Ensemble, Estimate, OptimizerOptions, Witness};

const LOG_FLOOR: f64 = 1e-18;
const PROB_FLOOR: f64 = 1e-300;
const PENALTY_SCHEDULE: [f64; 4] = [64.0, 1024.0, 16384.0, 262144.0];
const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Clone)]
struct Candidate {
    probs: Vec<f64>,
    states: Vec<Vec<Complex64>>,
}

impl Candidate {
    fn average_input(&self, dim: usize) -> ComplexMatrix {
        let mut avg = ComplexMatrix::zeros(dim, dim);
        for (p, v) in self.probs.iter().zip(&self.states) {
            if *p <= 0.0 {
                continue;
            }
            for i in 0..dim {
                for j in 0..dim {
                    let z = v[i] * v[j].conj() * *p;
                    avg.data[i * dim + j] += z;
                }
            }
        }
        avg
    }

    fn to_ensemble(&self, dim: usize) -> Result<Ensemble> {
        let states = self
            .states
            .iter()
            .map(|v| PureState::from_trusted(v.clone(), vec![dim]))
            .collect::<Result<Vec<_>>>()?;
        let mut probs = self.probs.clone();
        let total: f64 = probs.iter().sum();
        if total > 0.0 {
            for p in probs.iter_mut() {
                *p /= total;
            }
        }
        Ensemble::new(probs, states)
    }
}

/// Cached per-iterate channel data.
struct Evaluation {
    outputs: Vec<ComplexMatrix>,
    entropies: Vec<f64>,
    avg_output: ComplexMatrix,
    chi: f64,
    /// ‖ρ̄ − ρ‖_F² when a constraint is present.
    residual_sq: f64,
}

fn evaluate(n: &KrausChannel, cand: &Candidate, constraint: Option<&ComplexMatrix>) -> Evaluation {
    let d_out = n.d_out;
    let mut outputs = Vec::with_capacity(cand.states.len());
    let mut entropies = Vec::with_capacity(cand.states.len());
    let mut avg_output = ComplexMatrix::zeros(d_out, d_out);
    for (p, v) in cand.probs.iter().zip(&cand.states) {
        let out = n.apply_pure(v);
        avg_output.add_scaled(&out, *p);
        entropies.push(entropy_of_matrix(&out).expect("channel output"));
        outputs.push(out);
    }
    let avg_output = avg_output.hermitize();
    let avg_entropy = entropy_of_matrix(&avg_output).expect("average output");
    let mean_entropy: f64 = cand.probs.iter().zip(&entropies).map(|(p, h)| p * h).sum();
    let chi = avg_entropy - mean_entropy;
    let residual_sq = constraint
        .map(|rho| cand.average_input(n.d_in).sub(rho).frobenius_norm().powi(2))
        .unwrap_or(0.0);
    Evaluation {
        outputs,
        entropies,
        avg_output,
        chi,
        residual_sq,
    }
}

fn penalized(eval: &Evaluation, mu: f64) -> f64 {
    eval.chi - mu * eval.residual_sq
}

/// Unconstrained or constrained Holevo capacity estimate.
pub fn holevo_capacity(
    n: &KrausChannel,
    input: Option<&DensityMatrix>,
    opts: &OptimizerOptions,
) -> Result<Estimate> {
    holevo_capacity_seeded(n, input, opts, &[])
}

pub fn holevo_capacity_seeded(
    n: &KrausChannel,
    input: Option<&DensityMatrix>,
    opts: &OptimizerOptions,
    seeds: &[Ensemble],
) -> Result<Estimate> {
    if let Some(rho) = input {
        if rho.dim != n.d_in {
            return Err(Error::DimensionMismatch {
                expected: n.d_in,
                got: rho.dim,
            });
        }
    }
    let dim = n.d_in;
    let mut n_members = opts.ensemble_size.unwrap_or(dim * dim).max(1);
    let space = match input {
        Some(rho) => {
            let flat = rho.with_factors(vec![dim])?;
            let space = DecompositionSpace::from_state(&flat, 1e-12)?;
            n_members = n_members.max(space.rank);
            Some(space)
        }
        None => None,
    };

    // Constrained runs are selected by their exact feasible value after
    // steering (seeds included as zero-cost candidates), so a seeded run can
    // never come back below its seed. Unconstrained values are exact as-is.
    let mut best: Option<(f64, Candidate, bool)> = None;
    let mut total_iters = 0usize;
    let restarts = opts.restarts.max(1).max(seeds.len());
    let consider = |cand: Candidate, converged: bool, best: &mut Option<(f64, Candidate, bool)>| {
        let scored = match input {
            Some(rho) => {
                let mut steered = cand;
                if steer_to_constraint(&mut steered, &rho.matrix).is_err() {
                    return;
                }
                let value = evaluate(n, &steered, None).chi;
                (value, steered, converged)
            }
            None => {
                let value = evaluate(n, &cand, None).chi;
                (value, cand, converged)
            }
        };
        let better = match best {
            None => true,
            Some((bv, _, _)) => scored.0 > *bv,
        };
        if better {
            *best = Some(scored);
        }
    };
    for r in 0..restarts {
        let start = initial_candidate(r, seeds, space.as_ref(), dim, n_members, opts)?;
        if input.is_some() && r < seeds.len() {
            consider(start.clone(), true, &mut best);
        }
        let (cand, _, iters, converged) =
            ascend(n, start, input.map(|r| &r.matrix), opts.max_iters, opts);
        total_iters += iters;
        consider(cand, converged, &mut best);
    }
    let (_, mut cand, mut converged) = best.clone().expect("at least one restart");
    if !converged {
        let (cand2, _, iters, conv2) = ascend(
            n,
            cand.clone(),
            input.map(|r| &r.matrix),
            opts.max_iters * 2,
            opts,
        );
        total_iters += iters;
        consider(cand2, conv2, &mut best);
        let (_, c, _) = best.expect("candidate present");
        cand = c;
        converged = conv2;
    }
    if let Some(rho) = input {
        steer_to_constraint(&mut cand, &rho.matrix)?;
        feasible_polish(n, &mut cand, &rho.matrix, opts);
    }
    let witness = cand.to_ensemble(dim)?;
    let value = super::ensemble_holevo(n, &witness)?;
    Ok(Estimate {
        value,
        bound_direction: BoundDirection::LowerOnMax,
        witness: Witness::Ensemble(witness),
        converged,
        iterations: total_iters,
    })
}

fn initial_candidate(
    restart: usize,
    seeds: &[Ensemble],
    space: Option<&DecompositionSpace>,
    dim: usize,
    n_members: usize,
    opts: &OptimizerOptions,
) -> Result<Candidate> {
    if restart < seeds.len() {
        let ens = &seeds[restart];
        let mut cand = Candidate {
            probs: ens.probs.clone(),
            states: ens.states.iter().map(|s| s.amplitudes.clone()).collect(),
        };
        // pad up to the working ensemble size with copies of the first state
        while cand.probs.len() < n_members {
            cand.probs.push(0.0);
            cand.states.push(cand.states[0].clone());
        }
        return Ok(cand);
    }
    let seed = opts.restart_seed(restart);
    match space {
        Some(space) => {
            // exactly feasible start: Haar isometry applied to the eigen-ensemble
            let mut rng = rng_from(seed);
            let m = crate::qmat::random::gram_schmidt_columns(
                &crate::qmat::random::gaussian_matrix(n_members, space.rank, &mut rng),
            );
            let members = space.members(&m);
            let mut probs = Vec::with_capacity(n_members);
            let mut states = Vec::with_capacity(n_members);
            for w in members {
                let t: f64 = w.iter().map(|z| z.norm_sqr()).sum();
                let mut v = w;
                if t > 1e-14 {
                    normalize(&mut v);
                } else {
                    v = PureState::basis(dim, 0).amplitudes;
                }
                probs.push(t);
                states.push(v);
            }
            let total: f64 = probs.iter().sum();
            for p in probs.iter_mut() {
                *p /= total.max(1e-300);
            }
            Ok(Candidate { probs, states })
        }
        None => {
            let mut rng = rng_from(seed);
            let states = (0..n_members)
                .map(|_| random_pure_with_rng(dim, &mut rng))
                .collect();
            Ok(Candidate {
                probs: vec![1.0 / n_members as f64; n_members],
                states,
            })
        }
    }
}

fn ascend(
    n: &KrausChannel,
    mut cand: Candidate,
    constraint: Option<&ComplexMatrix>,
    max_iters: usize,
    opts: &OptimizerOptions,
) -> (Candidate, f64, usize, bool) {
    let stages: &[f64] = match constraint {
        Some(_) => &PENALTY_SCHEDULE,
        None => &[0.0],
    };
    let stage_budget = (max_iters / stages.len()).max(1);
    let mut iters = 0usize;
    let mut converged = false;
    let mut value = penalized(&evaluate(n, &cand, constraint), *stages.first().unwrap());
    for (stage_idx, &mu) in stages.iter().enumerate() {
        let mut step = StepControl::new(0.05);
        let mut stall = StallDetector::new(opts.value_tol, 6);
        value = penalized(&evaluate(n, &cand, constraint), mu);
        converged = false;
        for _ in 0..stage_budget {
            iters += 1;
            let eval = evaluate(n, &cand, constraint);
            let improved_states = state_step(n, &mut cand, &eval, constraint, mu, &mut step);
            let improved_probs = match constraint {
                None => multiplicative_prob_update(n, &mut cand, &eval),
                Some(rho) => prob_gradient_step(n, &mut cand, rho, mu),
            };
            let new_value = penalized(&evaluate(n, &cand, constraint), mu);
            let improvement = new_value - value;
            value = new_value;
            if !improved_states && !improved_probs {
                converged = true;
                break;
            }
            if stall.update(improvement) {
                converged = true;
                break;
            }
        }
        // keep going through the schedule even if not yet stalled
        let _ = stage_idx;
    }
    (cand, value, iters, converged)
}

/// One joint Armijo step over all member states; returns false when no step
/// improves.
fn state_step(
    n: &KrausChannel,
    cand: &mut Candidate,
    eval: &Evaluation,
    constraint: Option<&ComplexMatrix>,
    mu: f64,
    step: &mut StepControl,
) -> bool {
    let dim = n.d_in;
    let log_avg = log2_psd_clamped(&eval.avg_output, LOG_FLOOR).expect("avg output");
    let w_avg = n.adjoint_apply(&log_avg);
    let excess = constraint.map(|rho| cand.average_input(dim).sub(rho));

    let mut directions: Vec<Vec<Complex64>> = Vec::with_capacity(cand.states.len());
    let mut dir_norm_sq = 0.0;
    for (i, v) in cand.states.iter().enumerate() {
        let p = cand.probs[i];
        if p <= 1e-14 {
            directions.push(vec![Complex64::new(0.0, 0.0); dim]);
            continue;
        }
        let log_out = log2_psd_clamped(&eval.outputs[i], LOG_FLOOR).expect("member output");
        let w_i = n.adjoint_apply(&log_out);
        let mut g: Vec<Complex64> = w_i
            .matvec(v)
            .iter()
            .zip(w_avg.matvec(v).iter())
            .map(|(a, b)| (a - b) * p)
            .collect();
        if let Some(x) = &excess {
            let xv = x.matvec(v);
            for (gi, xi) in g.iter_mut().zip(xv) {
                *gi -= xi * (2.0 * mu * p);
            }
        }
        let t = sphere_tangent(v, &g);
        dir_norm_sq += grad_norm_sq_vec(&t);
        directions.push(t);
    }
    if dir_norm_sq < 1e-24 {
        return false;
    }
    let current = penalized(eval, mu);
    let probe = |eta: f64| -> f64 {
        let stepped = Candidate {
            probs: cand.probs.clone(),
            states: cand
                .states
                .iter()
                .zip(&directions)
                .map(|(v, d)| sphere_retract(v, d, eta))
                .collect(),
        };
        // minimize the negated objective inside the shared Armijo helper
        -penalized(&evaluate(n, &stepped, constraint), mu)
    };
    match step.search(-current, dir_norm_sq, probe) {
        Some((eta, _)) => {
            for (v, d) in cand.states.iter_mut().zip(&directions) {
                *v = sphere_retract(v, d, eta);
            }
            true
        }
        None => false,
    }
}

/// Classic capacity reweighting: p_i ∝ p_i · 2^{D(N_i ‖ N̄)}. Monotone for
/// fixed states, so it is applied unconditionally.
fn multiplicative_prob_update(n: &KrausChannel, cand: &mut Candidate, eval: &Evaluation) -> bool {
    let _ = n;
    let log_avg = log2_psd_clamped(&eval.avg_output, LOG_FLOOR).expect("avg output");
    let mut exponents = Vec::with_capacity(cand.probs.len());
    for (i, out) in eval.outputs.iter().enumerate() {
        // D_i = Tr out_i (log2 out_i - log2 avg) = -H_i - Tr(out_i log2 avg)
        let cross = out.trace_product_re(&log_avg);
        exponents.push(-eval.entropies[i] - cross);
    }
    let max_e = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut changed = false;
    for (p, e) in cand.probs.iter_mut().zip(&exponents) {
        let factor = (2.0f64).powf(e - max_e);
        let updated = (*p).max(0.0) * factor;
        if (updated - *p).abs() > PROB_FLOOR {
            changed = true;
        }
        *p = updated;
        total += updated;
    }
    if total <= 0.0 {
        let u = 1.0 / cand.probs.len() as f64;
        for p in cand.probs.iter_mut() {
            *p = u;
        }
        return false;
    }
    for p in cand.probs.iter_mut() {
        *p /= total;
    }
    changed
}

/// Projected-gradient step on the simplex for the penalized objective.
fn prob_gradient_step(
    n: &KrausChannel,
    cand: &mut Candidate,
    rho: &ComplexMatrix,
    mu: f64,
) -> bool {
    let eval = evaluate(n, cand, Some(rho));
    let log_avg = log2_psd_clamped(&eval.avg_output, LOG_FLOOR).expect("avg output");
    let excess = cand.average_input(n.d_in).sub(rho);
    let mut grad = Vec::with_capacity(cand.probs.len());
    for (i, out) in eval.outputs.iter().enumerate() {
        let cross = out.trace_product_re(&log_avg);
        let v = &cand.states[i];
        let xvv = excess.sandwich(v, v).re;
        grad.push(-cross - eval.entropies[i] - 2.0 * mu * xvv);
    }
    let mean = grad.iter().sum::<f64>() / grad.len() as f64;
    for g in grad.iter_mut() {
        *g -= mean;
    }
    let gn: f64 = grad.iter().map(|g| g * g).sum();
    if gn < 1e-24 {
        return false;
    }
    let current = penalized(&eval, mu);
    let mut step = StepControl::new(0.1);
    let probe = |eta: f64| -> f64 {
        let mut p = cand.probs.clone();
        for (pi, g) in p.iter_mut().zip(&grad) {
            *pi += eta * g;
        }
        simplex_project(&mut p);
        let stepped = Candidate {
            probs: p,
            states: cand.states.clone(),
        };
        -penalized(&evaluate(n, &stepped, Some(rho)), mu)
    };
    match step.search(-current, gn, probe) {
        Some((eta, _)) => {
            for (pi, g) in cand.probs.iter_mut().zip(&grad) {
                *pi += eta * g;
            }
            simplex_project(&mut cand.probs);
            true
        }
        None => false,
    }
}

/// Ascent restricted to exactly feasible ensembles: every line-search probe
/// steps the raw parameters, steers back onto the constraint, and scores the
/// exact objective. Monotone in the exact χ, so it grinds away the O(1/μ)
/// value noise the penalty stages leave behind.
fn feasible_polish(
    n: &KrausChannel,
    cand: &mut Candidate,
    rho: &ComplexMatrix,
    opts: &OptimizerOptions,
) {
    let rounds = (opts.max_iters / 4).clamp(50, 500);
    let dim = n.d_in;
    let mut value = evaluate(n, cand, Some(rho)).chi;
    let mut step = StepControl::new(0.02);
    let mut stall = StallDetector::new(opts.value_tol * 1e-3, 8);
    for _ in 0..rounds {
        let eval = evaluate(n, cand, Some(rho));
        let log_avg = log2_psd_clamped(&eval.avg_output, LOG_FLOOR).expect("avg output");
        let w_avg = n.adjoint_apply(&log_avg);
        // joint tangent direction over states and probabilities
        let mut state_dirs: Vec<Vec<Complex64>> = Vec::with_capacity(cand.states.len());
        let mut dir_norm_sq = 0.0;
        for (i, v) in cand.states.iter().enumerate() {
            let p = cand.probs[i];
            if p <= 1e-14 {
                state_dirs.push(vec![Complex64::new(0.0, 0.0); dim]);
                continue;
            }
            let log_out = log2_psd_clamped(&eval.outputs[i], LOG_FLOOR).expect("member output");
            let w_i = n.adjoint_apply(&log_out);
            let g: Vec<Complex64> = w_i
                .matvec(v)
                .iter()
                .zip(w_avg.matvec(v).iter())
                .map(|(a, b)| (a - b) * p)
                .collect();
            let t = sphere_tangent(v, &g);
            dir_norm_sq += grad_norm_sq_vec(&t);
            state_dirs.push(t);
        }
        let mut prob_dir = Vec::with_capacity(cand.probs.len());
        for (i, out) in eval.outputs.iter().enumerate() {
            let cross = out.trace_product_re(&log_avg);
            prob_dir.push(-cross - eval.entropies[i]);
        }
        let mean = prob_dir.iter().sum::<f64>() / prob_dir.len() as f64;
        for g in prob_dir.iter_mut() {
            *g -= mean;
        }
        dir_norm_sq += prob_dir.iter().map(|g| g * g).sum::<f64>();
        if dir_norm_sq < 1e-26 {
            break;
        }
        let propose = |eta: f64| -> Option<Candidate> {
            let mut stepped = Candidate {
                probs: cand.probs.clone(),
                states: cand
                    .states
                    .iter()
                    .zip(&state_dirs)
                    .map(|(v, d)| sphere_retract(v, d, eta))
                    .collect(),
            };
            for (p, g) in stepped.probs.iter_mut().zip(&prob_dir) {
                *p += eta * g;
            }
            simplex_project(&mut stepped.probs);
            steer_to_constraint(&mut stepped, rho).ok()?;
            Some(stepped)
        };
        let searched = step.search(-value, dir_norm_sq, |eta| match propose(eta) {
            Some(c) => -evaluate(n, &c, Some(rho)).chi,
            None => f64::INFINITY,
        });
        match searched {
            Some((eta, neg_value)) => {
                if let Some(stepped) = propose(eta) {
                    let improvement = -neg_value - value;
                    *cand = stepped;
                    value = -neg_value;
                    if stall.update(improvement) {
                        break;
                    }
                } else {
                    break;
                }
            }
            None => break,
        }
    }
}

/// Exact feasibility restoration: apply ρ^{1/2} ρ̂^{-1/2} to the weighted
/// members, which maps any near-decomposition onto an exact decomposition of
/// ρ when the supports agree.
fn steer_to_constraint(cand: &mut Candidate, rho: &ComplexMatrix) -> Result<()> {
    let dim = rho.rows;
    let rho_hat = cand.average_input(dim).hermitize();
    let t = sqrt_psd(&rho.hermitize())?.matmul(&inv_sqrt_psd(&rho_hat, 1e-14)?);
    let mut new_probs = Vec::with_capacity(cand.probs.len());
    let mut new_states = Vec::with_capacity(cand.states.len());
    for (p, v) in cand.probs.iter().zip(&cand.states) {
        let scaled: Vec<Complex64> = v.iter().map(|z| z * p.sqrt()).collect();
        let mut u = t.matvec(&scaled);
        let w: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        if w > 1e-16 {
            normalize(&mut u);
            new_probs.push(w);
            new_states.push(u);
        } else {
            new_probs.push(0.0);
            new_states.push(v.clone());
        }
    }
    let total: f64 = new_probs.iter().sum();
    if total <= 0.0 {
        return Err(Error::InfeasibleConstraint { residual: f64::NAN });
    }
    for p in new_probs.iter_mut() {
        *p /= total;
    }
    let steered = Candidate {
        probs: new_probs,
        states: new_states,
    };
    let residual = steered.average_input(dim).sub(rho).frobenius_norm();
    if residual > FEASIBILITY_TOL {
        return Err(Error::InfeasibleConstraint { residual });
    }
    *cand = steered;
    Ok(())
}
