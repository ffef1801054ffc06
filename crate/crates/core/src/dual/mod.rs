//! Linear-programming dual of the constrained capacity: certificate
//! functionals τ with f(ρ) = Tr τρ, feasibility and slack reports, the
//! output-entropy gradient, and reconstruction of a functional from values
//! plus directional derivatives at spanning states.
//!
//! The true program has one constraint per unit vector; the solver works on
//! a finite surrogate (caller states + optimizer witnesses + a seeded random
//! sample) and refines it by cutting planes, so slack reports are the
//! honesty mechanism for under-sampling.

mod simplex;

pub use simplex::LpSolution;

/// Solve a finite certificate program directly: max c·x s.t. rows·x ≤ rhs
/// with x the real coordinates of a Hermitian matrix. Exposed for callers
/// that assemble their own constraint sets.
pub fn solve_finite_lp(rows: &[Vec<f64>], rhs: &[f64], objective: &[f64]) -> Result<LpSolution> {
    simplex::solve_inequality_lp(rows, rhs, objective)
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{apply_to_pure, KrausChannel};
use crate::error::{Error, Result};
use crate::qmat::eig::log2_positive;
use crate::qmat::entropy::entropy_of_matrix;
use crate::qmat::matrix::{inner, norm, ComplexMatrix};
use crate::qmat::random::{derive_seed, random_pure_with_rng, rng_from};
use crate::qmat::state::{DensityMatrix, PureState};
use crate::quantities::{holevo_capacity, OptimizerOptions, Witness};

/// A Hermitian matrix τ acting as the linear functional ρ ↦ Tr τρ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearFunctional {
    pub tau: ComplexMatrix,
}

impl LinearFunctional {
    pub fn new(tau: ComplexMatrix) -> Result<Self> {
        let residual = tau.hermiticity_residual();
        if residual > 1e-9 {
            return Err(Error::NotHermitian {
                residual,
                tol: 1e-9,
            });
        }
        Ok(LinearFunctional {
            tau: tau.hermitize(),
        })
    }

    pub fn dim(&self) -> usize {
        self.tau.rows
    }

    pub fn evaluate_matrix(&self, rho: &ComplexMatrix) -> f64 {
        self.tau.trace_product_re(rho)
    }

    pub fn evaluate(&self, rho: &DensityMatrix) -> f64 {
        self.evaluate_matrix(&rho.matrix)
    }

    pub fn evaluate_pure(&self, v: &PureState) -> f64 {
        self.tau.sandwich(&v.amplitudes, &v.amplitudes).re
    }

    pub fn zero(dim: usize) -> Self {
        LinearFunctional {
            tau: ComplexMatrix::zeros(dim, dim),
        }
    }
}

/// Real coordinates of a Hermitian d×d matrix: d diagonal entries, then
/// (Re, Im) of each strict upper-triangle entry.
pub fn hermitian_coords(h: &ComplexMatrix) -> Vec<f64> {
    let d = h.rows;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(h.get(i, i).re);
    }
    for i in 0..d {
        for j in i + 1..d {
            out.push(h.get(i, j).re);
            out.push(h.get(i, j).im);
        }
    }
    out
}

pub fn hermitian_from_coords(d: usize, x: &[f64]) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        h.set(i, i, Complex64::new(x[i], 0.0));
    }
    let mut idx = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = Complex64::new(x[idx], x[idx + 1]);
            idx += 2;
            h.set(i, j, z);
            h.set(j, i, z.conj());
        }
    }
    h
}

/// Row vector r(P) with Tr(τ P) = hermitian_coords(τ) · r(P) for Hermitian P.
pub fn pairing_row(p: &ComplexMatrix) -> Vec<f64> {
    let d = p.rows;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(p.get(i, i).re);
    }
    for i in 0..d {
        for j in i + 1..d {
            out.push(2.0 * p.get(i, j).re);
            out.push(2.0 * p.get(i, j).im);
        }
    }
    out
}

/// Gradient of the output entropy: G = Σ_k A_k† (log2 N(ρ)) A_k, so that for
/// traceless directions σ, H(N(ρ + εσ)) − H(N(ρ)) ≈ −ε·Tr(σ G).
///
/// Refuses singular N(ρ); callers should regularize by mixing the channel
/// with the maximally mixed output and taking the ladder toward q → 1.
pub fn entropy_output_gradient(n: &KrausChannel, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    if rho.dim != n.d_in {
        return Err(Error::DimensionMismatch {
            expected: n.d_in,
            got: rho.dim,
        });
    }
    let out = n.apply_matrix(&rho.matrix).hermitize();
    let log_out = log2_positive(&out, 1e-12)?;
    Ok(n.adjoint_apply(&log_out).hermitize())
}

/// Entropy gradient computed through the regularization ladder: the channel
/// is mixed with the maximally mixed output at q ∈ {0.9, 0.99, 0.999} and
/// the limit is extrapolated. The ladder itself is part of the result; the
/// gradient need not converge at singular outputs, and `divergence` carries
/// the per-entry log-slope that measures exactly that.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientLadder {
    /// (q, gradient of the mixed channel) for each rung.
    pub rungs: Vec<(f64, ComplexMatrix)>,
    /// Richardson extrapolation of the last two rungs in (1−q).
    pub extrapolated: ComplexMatrix,
    /// Per-entry slope against log2(1−q); near zero where the limit exists.
    pub divergence: ComplexMatrix,
    /// Largest divergence magnitude over entries.
    pub max_divergence: f64,
}

/// Gradient ladder for channels whose output may be singular at ρ.
pub fn entropy_output_gradient_ladder(
    n: &KrausChannel,
    rho: &DensityMatrix,
) -> Result<GradientLadder> {
    const QS: [f64; 3] = [0.9, 0.99, 0.999];
    let mut rungs = Vec::with_capacity(QS.len());
    for &q in &QS {
        let mixed = crate::channels::mixed_channel(q, n)?;
        rungs.push((q, entropy_output_gradient(&mixed, rho)?));
    }
    let g1 = &rungs[0].1;
    let g2 = &rungs[1].1;
    let g3 = &rungs[2].1;
    // log-slope fit over the equally spaced log2(1−q) grid
    let dx = (1.0f64 - QS[2]).log2() - (1.0f64 - QS[0]).log2();
    let divergence = g3.sub(g1).scale_real(1.0 / dx);
    let max_divergence = divergence
        .data
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    // Richardson step in (1−q): L ≈ G3 + (G3 − G2)·e3/(e2 − e3)
    let e2 = 1.0 - QS[1];
    let e3 = 1.0 - QS[2];
    let extrapolated = {
        let mut l = g3.clone();
        l.add_scaled(&g3.sub(g2), e3 / (e2 - e3));
        l
    };
    Ok(GradientLadder {
        rungs,
        extrapolated,
        divergence,
        max_divergence,
    })
}

/// Options for the certificate solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualOptions {
    /// Random constraint states per squared input dimension.
    pub sample_factor: usize,
    /// Cutting-plane rounds after the first solve.
    pub refine_rounds: usize,
    /// Feasibility samples drawn per refinement round.
    pub refine_samples: usize,
    /// Slack at or below this counts as active.
    pub eps_active: f64,
    /// Include the witness states of a constrained capacity run.
    pub include_witness: bool,
    pub seed: u64,
    pub optimizer: OptimizerOptions,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions {
            sample_factor: 200,
            refine_rounds: 10,
            refine_samples: 2000,
            eps_active: 1e-7,
            include_witness: true,
            seed: 0,
            optimizer: OptimizerOptions::default(),
        }
    }
}

/// Certificate solution on the sampled constraint set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualSolution {
    pub tau: ComplexMatrix,
    /// Tr(τ ρ), the certificate value at the target input.
    pub value: f64,
    /// Minimum slack over the final constraint set and a fresh sample.
    pub slack_min: f64,
    /// Constraint states with slack at or below eps_active.
    pub active: Vec<PureState>,
    /// Cutting-plane rounds actually used.
    pub rounds: usize,
}

impl DualSolution {
    pub fn functional(&self) -> LinearFunctional {
        LinearFunctional {
            tau: self.tau.clone(),
        }
    }
}

fn entropy_score(n: &KrausChannel, v: &PureState) -> Result<f64> {
    entropy_of_matrix(&apply_to_pure(n, v)?.matrix)
}

/// Separation oracle: descend the slack H(N(|v⟩⟨v|)) − ⟨v|τ|v⟩ from a given
/// start and return the local minimum found.
fn descend_slack(
    n: &KrausChannel,
    f: &LinearFunctional,
    start: Vec<Complex64>,
    max_iters: usize,
) -> (PureState, f64) {
    use crate::qmat::eig::log2_psd_clamped;
    use crate::quantities::optimize::{
        grad_norm_sq_vec, sphere_retract, sphere_tangent, StallDetector, StepControl,
    };
    let slack_of = |v: &[Complex64]| -> f64 {
        let out = n.apply_pure(v).hermitize();
        entropy_of_matrix(&out).expect("channel output") - f.tau.sandwich(v, v).re
    };
    let mut v = start;
    let mut value = slack_of(&v);
    let mut step = StepControl::new(0.05);
    let mut stall = StallDetector::new(1e-12, 6);
    for _ in 0..max_iters {
        let out = n.apply_pure(&v).hermitize();
        let log_out = log2_psd_clamped(&out, 1e-18).expect("channel output");
        let w = n.adjoint_apply(&log_out);
        let wv = w.matvec(&v);
        let tv = f.tau.matvec(&v);
        let grad: Vec<Complex64> = wv.iter().zip(&tv).map(|(a, b)| -a - b).collect();
        let tangent = sphere_tangent(&v, &grad);
        let dir: Vec<Complex64> = tangent.iter().map(|z| -z).collect();
        let dn = grad_norm_sq_vec(&dir);
        if dn < 1e-24 {
            break;
        }
        match step.search(value, dn, |eta| slack_of(&sphere_retract(&v, &dir, eta))) {
            Some((eta, new_value)) => {
                let improvement = value - new_value;
                v = sphere_retract(&v, &dir, eta);
                value = new_value;
                if stall.update(improvement) {
                    break;
                }
            }
            None => break,
        }
    }
    (
        PureState::from_trusted(v, vec![n.d_in]).expect("unit vector"),
        value,
    )
}

/// Local minima of the slack over the sphere from multi-start descent,
/// seeded with the worst sampled states. Returns all minima found together
/// with the deepest slack value.
fn slack_minima(
    n: &KrausChannel,
    f: &LinearFunctional,
    sampled_starts: &[PureState],
    seed: u64,
) -> (Vec<(PureState, f64)>, f64) {
    let mut rng = rng_from(seed);
    let random_starts = 4usize;
    let starts: Vec<Vec<Complex64>> = sampled_starts
        .iter()
        .map(|s| s.amplitudes.clone())
        .chain((0..random_starts).map(|_| random_pure_with_rng(n.d_in, &mut rng)))
        .collect();
    let mut minima: Vec<(PureState, f64)> = Vec::new();
    let mut deepest = f64::INFINITY;
    for start in starts {
        let (state, slack) = descend_slack(n, f, start, 300);
        deepest = deepest.min(slack);
        // keep only minima that are not duplicates of one already found
        let duplicate = minima
            .iter()
            .any(|(s, _)| inner(&s.amplitudes, &state.amplitudes).norm() > 1.0 - 1e-6);
        if !duplicate {
            minima.push((state, slack));
        }
    }
    (minima, deepest)
}

/// A ring of states around `v`: mixes with each complement-basis direction
/// at two radii, in all four phase quadrants. Fencing an LP vertex with
/// these keeps the re-solved certificate from poking out right next to a
/// returned cut.
fn fence_states(v: &PureState, dim: usize) -> Vec<PureState> {
    // interpolation error between cuts scales with radius², so the ladder
    // has to reach small radii for the certificate to settle at 1e-7 slack
    const RADII: [f64; 6] = [0.2, 0.05, 0.01, 2e-3, 4e-4, 1e-4];
    let mut out = Vec::new();
    let basis = orthogonal_complement_basis(&v.amplitudes);
    for w in &basis {
        for &delta in &RADII {
            for &phase in &[
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
            ] {
                let mut u: Vec<Complex64> = v
                    .amplitudes
                    .iter()
                    .zip(w)
                    .map(|(vi, wi)| vi * (1.0 - delta * delta).sqrt() + wi * phase * delta)
                    .collect();
                crate::qmat::matrix::normalize(&mut u);
                out.push(PureState::from_trusted(u, vec![dim]).expect("unit vector"));
            }
        }
    }
    out
}

/// Maximize Tr(τρ) over Hermitian τ subject to ⟨v|τ|v⟩ ≤ H(N(|v⟩⟨v|)) on a
/// finite constraint set, refined by cutting planes.
pub fn solve_dual(
    n: &KrausChannel,
    rho: &DensityMatrix,
    extra_constraints: &[PureState],
    opts: &DualOptions,
) -> Result<DualSolution> {
    if rho.dim != n.d_in {
        return Err(Error::DimensionMismatch {
            expected: n.d_in,
            got: rho.dim,
        });
    }
    let d = n.d_in;
    let mut states: Vec<PureState> = extra_constraints.to_vec();
    if opts.include_witness {
        let mut oo = opts.optimizer;
        oo.seed = derive_seed(opts.seed, 0xD0A1);
        let est = holevo_capacity(n, Some(rho), &oo)?;
        if let Witness::Ensemble(ens) = est.witness {
            for (p, v) in ens.probs.iter().zip(ens.states) {
                if *p > 1e-9 {
                    states.push(v.with_factors(vec![d])?);
                }
            }
        }
    }
    let mut rng = rng_from(derive_seed(opts.seed, 0xD0A2));
    for _ in 0..opts.sample_factor * d * d {
        states.push(PureState::from_trusted(
            random_pure_with_rng(d, &mut rng),
            vec![d],
        )?);
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(states.len());
    let mut rhs: Vec<f64> = Vec::with_capacity(states.len());
    for v in &states {
        rows.push(pairing_row(&v.projector()));
        rhs.push(entropy_score(n, v)?);
    }
    let objective = pairing_row(&rho.matrix);

    let mut rounds = 0usize;
    let mut solution = simplex::solve_inequality_lp(&rows, &rhs, &objective)?;
    let mut sphere_min_slack = f64::NEG_INFINITY;
    let mut hot_spots: Vec<PureState> = Vec::new();
    for round in 0..opts.refine_rounds {
        let functional = LinearFunctional::new(hermitian_from_coords(d, &solution.x))?;
        let check = dual_feasibility_check(
            n,
            &functional,
            opts.refine_samples,
            derive_seed(opts.seed, 0xD0A3 + round as u64),
            &[],
        )?;
        // polish the worst sampled states plus the spots earlier rounds
        // found into true local minima of the slack
        let mut starts = check.violating_states.clone();
        starts.extend(hot_spots.iter().cloned());
        starts.extend(check.near_active.iter().take(4).cloned());
        starts.truncate(16);
        let (minima, deepest) = slack_minima(
            n,
            &functional,
            &starts,
            derive_seed(opts.seed, 0xD0B0 + round as u64),
        );
        sphere_min_slack = deepest;
        if check.violations == 0 && deepest >= -1e-9 {
            break;
        }
        rounds = round + 1;
        // cuts: sampled violators, every polished minimum, and a fence of
        // nearby states around each near-binding minimum
        let mut cuts = check.violating_states;
        for (state, slack) in minima {
            if slack < 1e-7 {
                cuts.extend(fence_states(&state, d));
                if hot_spots.len() < 16 {
                    hot_spots.push(state.clone());
                }
                cuts.push(state);
            }
        }
        for v in cuts {
            rows.push(pairing_row(&v.projector()));
            rhs.push(entropy_score(n, &v)?);
            states.push(v);
        }
        solution = simplex::solve_inequality_lp(&rows, &rhs, &objective)?;
    }

    let tau = hermitian_from_coords(d, &solution.x);
    let functional = LinearFunctional::new(tau.clone())?;
    let value = functional.evaluate(rho);
    let mut slack_min = sphere_min_slack;
    let mut active = Vec::new();
    for (v, h) in states.iter().zip(&rhs) {
        let slack = h - functional.evaluate_pure(v);
        slack_min = slack_min.min(slack);
        if slack <= opts.eps_active && active.len() < 4 * d * d {
            active.push(v.clone());
        }
    }
    Ok(DualSolution {
        tau,
        value,
        slack_min,
        active,
        rounds,
    })
}

/// Slack report for a candidate functional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub checked: usize,
    pub min_slack: f64,
    /// Samples with slack below −1e−7.
    pub violations: usize,
    /// The violating states themselves (for cutting planes).
    pub violating_states: Vec<PureState>,
    /// States with |slack| ≤ 1e−6, the near-active set.
    pub near_active: Vec<PureState>,
}

/// Evaluate H(N(|v⟩⟨v|)) − f(|v⟩⟨v|) on seeded random states plus caller
/// states; feasibility of f means every slack is nonnegative.
pub fn dual_feasibility_check(
    n: &KrausChannel,
    f: &LinearFunctional,
    samples: usize,
    seed: u64,
    extra: &[PureState],
) -> Result<FeasibilityReport> {
    let d = n.d_in;
    if f.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: f.dim(),
        });
    }
    let mut rng = rng_from(seed);
    let mut min_slack = f64::INFINITY;
    let mut violations = 0usize;
    let mut violating_states = Vec::new();
    let mut near_active = Vec::new();
    let mut consider = |v: PureState, n: &KrausChannel| -> Result<()> {
        let slack = entropy_score(n, &v)? - f.evaluate_pure(&v);
        min_slack = min_slack.min(slack);
        if slack < -1e-7 {
            violations += 1;
            if violating_states.len() < 64 {
                violating_states.push(v.clone());
            }
        }
        if slack.abs() <= 1e-6 && near_active.len() < 64 {
            near_active.push(v);
        }
        Ok(())
    };
    for v in extra {
        consider(v.clone(), n)?;
    }
    for _ in 0..samples {
        let v = PureState::from_trusted(random_pure_with_rng(d, &mut rng), vec![d])?;
        consider(v, n)?;
    }
    Ok(FeasibilityReport {
        checked: samples + extra.len(),
        min_slack,
        violations,
        violating_states,
        near_active,
    })
}

/// One data point for functional reconstruction: the value at a state plus
/// the cross terms ⟨v|τ|w_k⟩ against the canonical basis of v-perp.
#[derive(Debug, Clone)]
pub struct FunctionalSample {
    pub state: PureState,
    pub value: f64,
    pub cross_terms: Vec<Complex64>,
}

impl FunctionalSample {
    /// Assemble a sample from the two real directional derivatives along
    /// w_k and i·w_k: the derivative pair (D, D') fixes
    /// ⟨v|τ|w⟩ = (D − i·D')/2.
    pub fn from_directional_derivatives(
        state: PureState,
        value: f64,
        derivs_w: &[f64],
        derivs_iw: &[f64],
    ) -> Self {
        let cross_terms = derivs_w
            .iter()
            .zip(derivs_iw)
            .map(|(&dw, &diw)| Complex64::new(dw / 2.0, -diw / 2.0))
            .collect();
        FunctionalSample {
            state,
            value,
            cross_terms,
        }
    }

    /// Exact sample of a known functional; the generator used by roundtrip
    /// oracles.
    pub fn probe(f: &LinearFunctional, state: &PureState) -> Self {
        let basis = orthogonal_complement_basis(&state.amplitudes);
        let tv = f.tau.matvec(&state.amplitudes);
        let value = inner(&state.amplitudes, &tv).re;
        let cross_terms = basis
            .iter()
            .map(|w| inner(&state.amplitudes, &f.tau.matvec(w)))
            .collect();
        FunctionalSample {
            state: state.clone(),
            value,
            cross_terms,
        }
    }
}

/// Deterministic orthonormal basis of the orthogonal complement of a unit
/// vector: Gram-Schmidt of the standard basis against v.
pub fn orthogonal_complement_basis(v: &[Complex64]) -> Vec<Vec<Complex64>> {
    let d = v.len();
    let mut basis: Vec<Vec<Complex64>> = vec![v.to_vec()];
    for i in 0..d {
        if basis.len() == d {
            break;
        }
        let mut w = vec![Complex64::new(0.0, 0.0); d];
        w[i] = Complex64::new(1.0, 0.0);
        for _pass in 0..2 {
            for b in &basis {
                let r = inner(b, &w);
                for (wk, bk) in w.iter_mut().zip(b) {
                    *wk -= r * bk;
                }
            }
        }
        let nw = norm(&w);
        if nw > 1e-8 {
            for z in w.iter_mut() {
                *z /= nw;
            }
            basis.push(w);
        }
    }
    basis.remove(0);
    basis
}

/// Result of a least-squares reconstruction.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub functional: LinearFunctional,
    /// Residual norm of the overdetermined linear system.
    pub residual: f64,
}

/// Recover the unique Hermitian τ from values and cross terms at a spanning
/// set of states: values fix ⟨v|τ|v⟩, cross terms fix ⟨v|τ|w⟩ on each
/// complement basis.
pub fn reconstruct_functional(data: &[FunctionalSample]) -> Result<Reconstruction> {
    if data.is_empty() {
        return Err(Error::RankDeficient);
    }
    let d = data[0].state.dim;
    let ncols = d * d;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for sample in data {
        let v = &sample.state.amplitudes;
        rows.push(pairing_row(&sample.state.projector()));
        rhs.push(sample.value);
        let basis = orthogonal_complement_basis(v);
        if sample.cross_terms.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: sample.cross_terms.len(),
            });
        }
        for (w, z) in basis.iter().zip(&sample.cross_terms) {
            // ⟨v|τ|w⟩ = Tr(τ |w⟩⟨v|); split into the two Hermitian parts
            let x = ComplexMatrix::outer(w, v);
            let h_re = x.hermitize();
            let h_im = x.sub(&x.adjoint()).scale(Complex64::new(0.0, -0.5));
            rows.push(pairing_row(&h_re));
            rhs.push(z.re);
            rows.push(pairing_row(&h_im));
            rhs.push(z.im);
        }
    }
    let (x, residual) = least_squares(&rows, &rhs, ncols)?;
    Ok(Reconstruction {
        functional: LinearFunctional::new(hermitian_from_coords(d, &x))?,
        residual,
    })
}

/// Householder least squares; errors when the columns do not span.
fn least_squares(rows: &[Vec<f64>], rhs: &[f64], ncols: usize) -> Result<(Vec<f64>, f64)> {
    let m = rows.len();
    if m < ncols {
        return Err(Error::RankDeficient);
    }
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..ncols {
        let mut alpha = 0.0;
        for row in col..m {
            alpha += a[row][col] * a[row][col];
        }
        alpha = alpha.sqrt();
        if alpha < 1e-10 {
            return Err(Error::RankDeficient);
        }
        if a[col][col] > 0.0 {
            alpha = -alpha;
        }
        let mut v = vec![0.0; m];
        v[col] = a[col][col] - alpha;
        for row in col + 1..m {
            v[row] = a[row][col];
        }
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq < 1e-300 {
            continue;
        }
        for target_col in col..ncols {
            let dot: f64 = (col..m).map(|r| v[r] * a[r][target_col]).sum();
            let factor = 2.0 * dot / vnorm_sq;
            for row in col..m {
                a[row][target_col] -= factor * v[row];
            }
        }
        let dot_b: f64 = (col..m).map(|r| v[r] * b[r]).sum();
        let factor = 2.0 * dot_b / vnorm_sq;
        for row in col..m {
            b[row] -= factor * v[row];
        }
    }
    // back substitution on the R factor
    let mut x = vec![0.0; ncols];
    for col in (0..ncols).rev() {
        let mut acc = b[col];
        for k in col + 1..ncols {
            acc -= a[col][k] * x[k];
        }
        if a[col][col].abs() < 1e-12 {
            return Err(Error::RankDeficient);
        }
        x[col] = acc / a[col][col];
    }
    let residual: f64 = (ncols..m).map(|r| b[r] * b[r]).sum::<f64>().sqrt();
    Ok((x, residual))
}

/// Report of the three-dual comparison on a tensor pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualAdditivityReport {
    pub single_1: DualSolution,
    pub single_2: DualSolution,
    pub tensor: DualSolution,
    /// ‖τ_T − (τ₁⊗I + I⊗τ₂)‖_F.
    pub functional_gap: f64,
    /// f_T(ρ₁⊗ρ₂) − f₁(ρ₁) − f₂(ρ₂).
    pub value_gap: f64,
}

/// Solve the two single duals and the tensor dual and compare the tensor
/// certificate against the sum of the singles. Constraint samples make this
/// evidence about additivity structure rather than a certified statement.
pub fn dual_additivity_check(
    n1: &KrausChannel,
    n2: &KrausChannel,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    extra1: &[PureState],
    extra2: &[PureState],
    opts: &DualOptions,
) -> Result<DualAdditivityReport> {
    let mut o1 = opts.clone();
    o1.seed = derive_seed(opts.seed, 1);
    let mut o2 = opts.clone();
    o2.seed = derive_seed(opts.seed, 2);
    let single_1 = solve_dual(n1, rho1, extra1, &o1)?;
    let single_2 = solve_dual(n2, rho2, extra2, &o2)?;

    let nt = crate::channels::tensor_channels(n1, n2)?;
    let rho_t = crate::qmat::state::tensor_states(rho1, rho2)?.with_factors(vec![nt.d_in])?;
    // products of caller states and of the singles' active sets
    let mut left: Vec<PureState> = extra1.to_vec();
    left.extend(single_1.active.iter().cloned());
    let mut right: Vec<PureState> = extra2.to_vec();
    right.extend(single_2.active.iter().cloned());
    let mut extra_t = Vec::new();
    for a in left.iter().take(24) {
        for b in right.iter().take(24) {
            extra_t.push(a.tensor(b)?.with_factors(vec![nt.d_in])?);
        }
    }
    let mut ot = opts.clone();
    ot.seed = derive_seed(opts.seed, 3);
    let tensor = solve_dual(&nt, &rho_t, &extra_t, &ot)?;

    let i1 = ComplexMatrix::identity(n1.d_in);
    let i2 = ComplexMatrix::identity(n2.d_in);
    let sum = single_1.tau.kron(&i2)?.add(&i1.kron(&single_2.tau)?);
    let functional_gap = tensor.tau.sub(&sum).frobenius_norm();
    let value_gap = tensor.value - single_1.value - single_2.value;
    Ok(DualAdditivityReport {
        single_1,
        single_2,
        tensor,
        functional_gap,
        value_gap,
    })
}

/// The six eigenstates of the qubit Pauli axes; the canonical symmetric
/// constraint grid.
pub fn octahedral_qubit_states() -> Vec<PureState> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    vec![
        PureState::from_trusted(vec![c(1., 0.), c(0., 0.)], vec![2]).unwrap(),
        PureState::from_trusted(vec![c(0., 0.), c(1., 0.)], vec![2]).unwrap(),
        PureState::from_trusted(vec![c(s, 0.), c(s, 0.)], vec![2]).unwrap(),
        PureState::from_trusted(vec![c(s, 0.), c(-s, 0.)], vec![2]).unwrap(),
        PureState::from_trusted(vec![c(s, 0.), c(0., s)], vec![2]).unwrap(),
        PureState::from_trusted(vec![c(s, 0.), c(0., -s)], vec![2]).unwrap(),
    ]
}
