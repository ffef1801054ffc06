//! Estimators for the four additivity quantities: minimum output entropy,
//! Holevo capacity (free and input-constrained), entanglement of formation,
//! and the strong-superadditivity gap.
//!
//! All searches are multi-restart local optimizations, so every result is a
//! one-sided bound: an upper bound when minimizing, a lower bound when
//! maximizing. Estimates carry their witness so the value can always be
//! re-evaluated independently.

mod chi;
mod eof;
mod minent;
pub(crate) mod optimize;

pub use chi::{holevo_capacity, holevo_capacity_seeded};
pub use eof::{
    concurrence, entanglement_of_formation, entanglement_of_formation_seeded, product_ensemble,
    wootters_eof,
};
pub use minent::{min_output_entropy, min_output_entropy_seeded};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::qmat::entropy::entropy_of_matrix;
use crate::qmat::matrix::{inner, kron_vec, ComplexMatrix};
use crate::qmat::random::derive_seed;
use crate::qmat::state::{DensityMatrix, PureState};

/// Probabilistic ensemble of pure states, the argument of every χ and E_F
/// optimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ensemble {
    pub probs: Vec<f64>,
    pub states: Vec<PureState>,
}

impl Ensemble {
    pub fn new(probs: Vec<f64>, states: Vec<PureState>) -> Result<Self> {
        let ens = Ensemble { probs, states };
        ens.validate()?;
        Ok(ens)
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() || self.probs.len() != self.states.len() {
            return Err(Error::BadEnsemble);
        }
        let dim = self.states[0].dim;
        if self.states.iter().any(|s| s.dim != dim) {
            return Err(Error::BadEnsemble);
        }
        let sum: f64 = self.probs.iter().sum();
        if self.probs.iter().any(|&p| p < -1e-12) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::BadProbabilities(sum));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.states.first().map(|s| s.dim).unwrap_or(0)
    }

    /// Σ p_i |v_i⟩⟨v_i| as raw matrix storage.
    pub fn average_matrix(&self) -> ComplexMatrix {
        let dim = self.dim();
        let mut avg = ComplexMatrix::zeros(dim, dim);
        for (p, v) in self.probs.iter().zip(&self.states) {
            if *p == 0.0 {
                continue;
            }
            for i in 0..dim {
                for j in 0..dim {
                    let z = v.amplitudes[i] * v.amplitudes[j].conj() * *p;
                    avg.data[i * dim + j] += z;
                }
            }
        }
        avg
    }

    pub fn average_state(&self) -> Result<DensityMatrix> {
        let factors = self.states[0].factors.clone();
        DensityMatrix::from_trusted(self.average_matrix(), factors)
    }
}

/// Knobs for the multi-restart searches.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_tol: f64,
    pub value_tol: f64,
    pub seed: u64,
    /// Ensemble size for χ and E_F searches; None picks d_in² or rank².
    pub ensemble_size: Option<usize>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            restarts: 32,
            max_iters: 2000,
            step_tol: 1e-10,
            value_tol: 1e-9,
            seed: 0,
            ensemble_size: None,
        }
    }
}

impl OptimizerOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts.max(1);
        self
    }

    pub fn doubled(&self) -> Self {
        let mut o = *self;
        o.restarts *= 2;
        o.max_iters *= 2;
        o
    }

    pub(crate) fn restart_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, index as u64)
    }
}

/// Which side of the true value a search result bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundDirection {
    #[serde(rename = "upper-on-min")]
    UpperOnMin,
    #[serde(rename = "lower-on-max")]
    LowerOnMax,
}

/// Best point found by a search.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    Ensemble(Ensemble),
    Pure(PureState),
}

/// Search result: a one-sided bound plus the witness that re-evaluates to it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub bound_direction: BoundDirection,
    pub witness: Witness,
    pub converged: bool,
    pub iterations: usize,
}

/// χ objective for a fixed ensemble:
/// H(N(Σ p_i |v_i⟩⟨v_i|)) − Σ p_i H(N(|v_i⟩⟨v_i|)).
pub fn ensemble_holevo(n: &KrausChannel, ens: &Ensemble) -> Result<f64> {
    ens.validate()?;
    if ens.dim() != n.d_in {
        return Err(Error::DimensionMismatch {
            expected: n.d_in,
            got: ens.dim(),
        });
    }
    let mut avg_out = ComplexMatrix::zeros(n.d_out, n.d_out);
    let mut mean_h = 0.0;
    for (p, v) in ens.probs.iter().zip(&ens.states) {
        if *p <= 0.0 {
            continue;
        }
        let out = n.apply_pure(&v.amplitudes);
        mean_h += *p * entropy_of_matrix(&out)?;
        avg_out.add_scaled(&out, *p);
    }
    Ok(entropy_of_matrix(&avg_out.hermitize())? - mean_h)
}

/// Entanglement of a bipartite pure state: entropy of the A-side marginal.
pub fn pure_entanglement(v: &PureState) -> Result<f64> {
    v.bipartition()?;
    let marg = v.marginal(&[0])?;
    entropy_of_matrix(&marg.matrix)
}

/// Replace an ensemble of product states by the product of its two marginal
/// ensembles {p_i p_j, |a_i⟩⊗|b_j⟩}.
///
/// Every member must be a product across the declared split: its marginal
/// must be pure to within Schmidt tolerance 1e-8.
pub fn marginal_product_ensemble(ens: &Ensemble) -> Result<Ensemble> {
    ens.validate()?;
    let mut first_marginals: Vec<Vec<Complex64>> = Vec::with_capacity(ens.states.len());
    let mut second_marginals: Vec<Vec<Complex64>> = Vec::with_capacity(ens.states.len());
    let (d1, d2) = ens.states[0].bipartition()?;
    for (index, v) in ens.states.iter().enumerate() {
        let (e1, e2) = v.bipartition()?;
        if (e1, e2) != (d1, d2) {
            return Err(Error::BadEnsemble);
        }
        let marg = v.marginal(&[0])?;
        let spec = crate::qmat::eig::hermitian_eig(&marg.matrix)?;
        let residual = if spec.eigenvalues.len() > 1 {
            spec.eigenvalues[1].max(0.0)
        } else {
            0.0
        };
        if residual > 1e-8 {
            return Err(Error::NonProductMember { index, residual });
        }
        let a = spec.eigenvector(0);
        let marg2 = v.marginal(&[1])?;
        let spec2 = crate::qmat::eig::hermitian_eig(&marg2.matrix)?;
        let b = spec2.eigenvector(0);
        // align the global phase so a⊗b reproduces v
        let overlap = inner(&kron_vec(&a, &b), &v.amplitudes);
        let phase = if overlap.norm() > 1e-12 {
            overlap / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let a: Vec<Complex64> = a.iter().map(|z| z * phase).collect();
        first_marginals.push(a);
        second_marginals.push(b);
    }
    let mut probs = Vec::with_capacity(ens.states.len().pow(2));
    let mut states = Vec::with_capacity(ens.states.len().pow(2));
    for (pi, a) in ens.probs.iter().zip(&first_marginals) {
        for (pj, b) in ens.probs.iter().zip(&second_marginals) {
            probs.push(pi * pj);
            states.push(PureState::from_trusted(kron_vec(a, b), vec![d1, d2])?);
        }
    }
    Ensemble::new(probs, states)
}

/// Estimated strong-superadditivity gap of a quadripartite state together
/// with the three entanglement estimates it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuperadditivityGap {
    /// Ê_F(σ) − Ê_F(Tr₂σ) − Ê_F(Tr₁σ).
    pub gap: f64,
    pub whole: Estimate,
    pub reduced_1: Estimate,
    pub reduced_2: Estimate,
    /// Every term is an upper bound from a search, so the sign of the gap is
    /// evidence, not certification.
    pub note: String,
}

/// Gap Ê_F(σ) − Ê_F(Tr₂σ) − Ê_F(Tr₁σ) over the A–B cut of a state with
/// declared A1|A2|B1|B2 factors.
pub fn strong_superadditivity_gap(
    sigma: &DensityMatrix,
    opts: &OptimizerOptions,
) -> Result<SuperadditivityGap> {
    if sigma.factors.len() != 4 {
        return Err(Error::QuadripartitionMissing(sigma.factors.len()));
    }
    let [da1, da2, db1, db2] = [
        sigma.factors[0],
        sigma.factors[1],
        sigma.factors[2],
        sigma.factors[3],
    ];
    let whole_ab = sigma.with_factors(vec![da1 * da2, db1 * db2])?;
    let reduced_1 = sigma.partial_trace(&[0, 2])?; // keep A1, B1
    let reduced_2 = sigma.partial_trace(&[1, 3])?; // keep A2, B2

    let mk = |idx: u64| {
        let mut o = *opts;
        o.seed = derive_seed(opts.seed, 0x55AA ^ idx);
        o
    };
    let whole = entanglement_of_formation(&whole_ab, &mk(0))?;
    let r1 = entanglement_of_formation(&reduced_1, &mk(1))?;
    let r2 = entanglement_of_formation(&reduced_2, &mk(2))?;
    Ok(SuperadditivityGap {
        gap: whole.value - r1.value - r2.value,
        whole,
        reduced_1: r1,
        reduced_2: r2,
        note: "all three terms are upper bounds from search; a positive gap is evidence, \
               a negative gap is inconclusive without certified lower bounds"
            .to_string(),
    })
}
