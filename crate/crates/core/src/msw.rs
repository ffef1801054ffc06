//! The channel↔state correspondence linking constrained Holevo capacity to
//! entanglement of formation.
//!
//! A channel N with Stinespring isometry V pairs an input ρ with the
//! bipartite state σ = VρV† on output ⊗ environment; decompositions of σ and
//! input ensembles averaging to ρ are in bijection through V, which gives
//! χ_N(ρ) = H(N(ρ)) − E_F(σ). The identity check here estimates both sides
//! numerically and exploits the bijection for warm starts.

use serde::{Deserialize, Serialize};

use crate::channels::{apply_channel, stinespring, KrausChannel, StinespringIsometry};
use crate::error::{Error, Result};
use crate::qmat::entropy::entropy_of_matrix;
use crate::qmat::matrix::ComplexMatrix;
use crate::qmat::state::{DensityMatrix, PureState};
use crate::quantities::{
    entanglement_of_formation_seeded, holevo_capacity_seeded, Ensemble, Estimate, OptimizerOptions,
    Witness,
};

/// A matched (channel, input, bipartite state) triple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MswPair {
    pub channel: KrausChannel,
    pub input: DensityMatrix,
    /// Bipartite state on output ⊗ environment with the A|B split declared.
    pub state: DensityMatrix,
}

/// Forward direction: dilate an input state through the channel's isometry.
pub fn dilate_state(n: &KrausChannel, rho: &DensityMatrix) -> Result<MswPair> {
    if rho.dim != n.d_in {
        return Err(Error::DimensionMismatch {
            expected: n.d_in,
            got: rho.dim,
        });
    }
    let iso = stinespring(n)?;
    let state = iso.dilate(rho)?;
    Ok(MswPair {
        channel: n.clone(),
        input: rho.clone(),
        state,
    })
}

/// Relative eigenvalue cutoff for rank determination.
const RANK_CUTOFF: f64 = 1e-9;

/// Converse direction: from a bipartite state σ, build the channel on a
/// rank(σ)-dimensional input space whose dilation reproduces σ.
///
/// Eigenvalues within a factor 10 of the rank cutoff are reported as
/// ambiguous rather than silently rounded either way.
pub fn channel_from_state(sigma: &DensityMatrix) -> Result<MswPair> {
    let (da, db) = sigma.bipartition()?;
    let spec = crate::qmat::eig::hermitian_eig(&sigma.matrix)?;
    let lam_max = spec.eigenvalues[0].max(0.0);
    if lam_max <= 0.0 {
        return Err(Error::NotPsd { min_eig: lam_max });
    }
    let cutoff = RANK_CUTOFF * lam_max;
    for &l in &spec.eigenvalues {
        if l > cutoff / 10.0 && l <= cutoff * 10.0 {
            return Err(Error::RankAmbiguous { eig: l, cutoff });
        }
    }
    let rank = spec
        .eigenvalues
        .iter()
        .filter(|&&l| l > cutoff)
        .count()
        .max(1);

    // Kraus blocks of Tr_B V·V† with V the matrix of kept eigenvectors
    let mut kraus = Vec::with_capacity(db);
    for k in 0..db {
        let mut a = ComplexMatrix::zeros(da, rank);
        for row in 0..da {
            for j in 0..rank {
                a.set(row, j, spec.eigenvectors.get(row * db + k, j));
            }
        }
        kraus.push(a);
    }
    let channel = KrausChannel::new(rank, da, kraus)?;

    let kept: f64 = spec.eigenvalues[..rank].iter().sum();
    let lambdas: Vec<f64> = spec.eigenvalues[..rank]
        .iter()
        .map(|&l| (l / kept).max(0.0))
        .collect();
    let input = DensityMatrix::from_trusted(ComplexMatrix::diagonal_real(&lambdas), vec![rank])?;
    Ok(MswPair {
        channel,
        input,
        state: sigma.clone(),
    })
}

impl MswPair {
    /// Residual of the defining relation N(ρ) = Tr_B σ.
    pub fn consistency_residual(&self) -> Result<f64> {
        let lhs = apply_channel(&self.channel, &self.input)?;
        let rhs = self.state.partial_trace(&[0])?;
        Ok(lhs.matrix.sub(&rhs.matrix).frobenius_norm())
    }
}

/// Map an E_F decomposition of σ to an input ensemble averaging to ρ:
/// each member |w⟩ pulls back through V† (members of any decomposition of
/// σ = VρV† live in the range of V).
pub fn state_ensemble_to_input(iso: &StinespringIsometry, ens: &Ensemble) -> Result<Ensemble> {
    let mut states = Vec::with_capacity(ens.states.len());
    for w in &ens.states {
        let mut v = iso.v.adjoint_matvec(&w.amplitudes);
        crate::qmat::matrix::normalize(&mut v);
        states.push(PureState::from_trusted(v, vec![iso.d_in])?);
    }
    Ensemble::new(ens.probs.clone(), states)
}

/// Map an input ensemble to a decomposition of σ through V.
pub fn input_ensemble_to_state(iso: &StinespringIsometry, ens: &Ensemble) -> Result<Ensemble> {
    let mut states = Vec::with_capacity(ens.states.len());
    for v in &ens.states {
        let w = iso.v.matvec(&v.amplitudes);
        states.push(PureState::from_trusted(w, vec![iso.d_out, iso.d_env])?);
    }
    Ensemble::new(ens.probs.clone(), states)
}

/// Both sides of the identity plus the residual between them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MswIdentityReport {
    pub constrained_chi: Estimate,
    pub output_entropy: f64,
    pub eof: Estimate,
    /// |χ̂ − (H(N(ρ)) − Ê_F)|.
    pub residual: f64,
    /// ‖N(ρ) − Tr_B σ‖_F of the pair itself.
    pub pair_residual: f64,
}

/// Estimate χ_N(ρ) and E_F(σ) with shared seeds and mirrored budgets, then
/// exchange witnesses through the isometry as warm starts and keep the best
/// value on each side.
pub fn msw_identity_check(pair: &MswPair, opts: &OptimizerOptions) -> Result<MswIdentityReport> {
    let pair_residual = pair.consistency_residual()?;
    let iso = stinespring(&pair.channel)?;
    let output_entropy = entropy_of_matrix(&apply_channel(&pair.channel, &pair.input)?.matrix)?;

    let chi0 = holevo_capacity_seeded(&pair.channel, Some(&pair.input), opts, &[])?;
    let sigma = iso.dilate(&pair.input)?;
    let ef0 = entanglement_of_formation_seeded(&sigma, opts, &[])?;

    // cross-map the witnesses and polish each side from both its own and
    // the mirrored witness; the tight tolerance grinds away the stall noise
    // of the cold runs so the residual is stable across budget ladders
    let polish = OptimizerOptions {
        restarts: 2,
        value_tol: 1e-12,
        ..*opts
    };
    let chi_best;
    let ef_best;
    {
        let Witness::Ensemble(ref ef_witness) = ef0.witness else {
            return Err(Error::BadEnsemble);
        };
        let Witness::Ensemble(ref chi_witness) = chi0.witness else {
            return Err(Error::BadEnsemble);
        };
        let chi_seed = state_ensemble_to_input(&iso, ef_witness)?;
        let ef_seed = input_ensemble_to_state(&iso, chi_witness)?;
        let chi1 = holevo_capacity_seeded(
            &pair.channel,
            Some(&pair.input),
            &polish,
            &[chi_seed, chi_witness.clone()],
        )?;
        let ef1 =
            entanglement_of_formation_seeded(&sigma, &polish, &[ef_seed, ef_witness.clone()])?;
        chi_best = if chi1.value > chi0.value { chi1 } else { chi0 };
        ef_best = if ef1.value < ef0.value { ef1 } else { ef0 };
    }

    let residual = (chi_best.value - (output_entropy - ef_best.value)).abs();
    Ok(MswIdentityReport {
        constrained_chi: chi_best,
        output_entropy,
        eof: ef_best,
        residual,
        pair_residual,
    })
}
