//! Gadget channels that reshape a channel's capacity or entropy landscape:
//! flagged channels built around a POVM {E, I−E} whose element encodes a
//! linear functional, and generalized-Pauli register extensions whose twirl
//! pins the optimal average output at the maximally mixed state.
//!
//! Every construction comes with a predictor for its closed-form capacity or
//! entropy expression, so materialized channels can be cross-checked against
//! the formulas they were built to realize.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{povm_sqrt_pair, KrausChannel};
use crate::dual::LinearFunctional;
use crate::error::{Error, Result};
use crate::qmat::eig::hermitian_eigenvalues;
use crate::qmat::entropy::{binary_entropy, entropy_of_matrix};
use crate::qmat::matrix::ComplexMatrix;
use crate::qmat::state::{DensityMatrix, PureState};
use crate::quantities::{ensemble_holevo, Ensemble};
use crate::tol::DIM_CAP;

/// Materialization cap on the classical register width; predictor formulas
/// carry arbitrary k, only the explicit Kraus form is capped.
pub const MAX_REGISTER_BITS: usize = 6;

/// Parameter bundle for the flagged constructions: flag probability q,
/// register width k, POVM element E realizing ((1−q)/q)·k·E = λI − τ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlagChannelParams {
    pub q: f64,
    pub k: usize,
    #[serde(rename = "E")]
    pub povm_element: ComplexMatrix,
    pub lambda: f64,
    pub tau: LinearFunctional,
}

impl FlagChannelParams {
    /// Residual of the defining relation ((1−q)/q)·k·E − (λI − τ).
    pub fn relation_residual(&self) -> f64 {
        let d = self.povm_element.rows;
        let lhs = self
            .povm_element
            .scale_real((1.0 - self.q) / self.q * self.k as f64);
        let rhs = ComplexMatrix::identity(d)
            .scale_real(self.lambda)
            .sub(&self.tau.tau);
        lhs.sub(&rhs).frobenius_norm()
    }

    /// Eigenvalue range of E; a valid POVM element stays inside [0, 1].
    pub fn povm_spectrum_range(&self) -> Result<(f64, f64)> {
        let eigs = hermitian_eigenvalues(&self.povm_element)?;
        Ok((*eigs.last().unwrap(), eigs[0]))
    }
}

/// Choose λ = λ_max(τ) and the smallest register width k ≥ k_min with
/// k ≥ q(λ_max − λ_min)/(1−q), so that E = q(λI − τ)/((1−q)k) is a valid
/// POVM element. Such a k always exists.
pub fn povm_from_functional(
    tau: &LinearFunctional,
    q: f64,
    k_min: usize,
) -> Result<FlagChannelParams> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::BadParameter {
            name: "q",
            value: q,
            range: "(0, 1)",
        });
    }
    let eigs = hermitian_eigenvalues(&tau.tau)?;
    let lambda = eigs[0];
    let spread = eigs[0] - eigs.last().unwrap();
    let k_needed = (q * spread / (1.0 - q)).ceil() as usize;
    let k = k_min.max(k_needed).max(1);
    let d = tau.dim();
    let scale = q / ((1.0 - q) * k as f64);
    let povm_element = ComplexMatrix::identity(d)
        .scale_real(lambda)
        .sub(&tau.tau)
        .scale_real(scale)
        .hermitize();
    Ok(FlagChannelParams {
        q,
        k,
        povm_element,
        lambda,
        tau: tau.clone(),
    })
}

/// Output-space layout shared by the flagged channels: block 0 carries the
/// base channel output, block 1 the 2^k register levels, block 2 a single
/// erasure level.
#[derive(Debug, Clone, Copy)]
pub struct FlagLayout {
    pub d_out_base: usize,
    pub register_levels: usize,
    pub total: usize,
}

impl FlagLayout {
    fn new(d_out_base: usize, k: usize) -> Self {
        let register_levels = 1usize << k;
        FlagLayout {
            d_out_base,
            register_levels,
            total: d_out_base + register_levels + 1,
        }
    }

    pub fn register_level(&self, b: usize) -> usize {
        self.d_out_base + b
    }

    pub fn erasure_level(&self) -> usize {
        self.total - 1
    }
}

fn check_register_width(k: usize, input_dim: usize) -> Result<usize> {
    if k > MAX_REGISTER_BITS {
        return Err(Error::DimensionCap(1 << k, 1 << MAX_REGISTER_BITS));
    }
    let levels = 1usize << k;
    if input_dim * levels > DIM_CAP {
        return Err(Error::DimensionCap(input_dim * levels, DIM_CAP));
    }
    Ok(levels)
}

/// Flagged channel with a classical input register: input is the base input
/// tensored with k classical bits (dephased in the canonical basis). With
/// probability q the first part goes through the base channel and the bits
/// are discarded; otherwise the POVM {E, I−E} is measured on the first part
/// and either the bits are forwarded as labeled levels or an erasure symbol
/// is emitted.
pub fn register_flag_channel(
    n: &KrausChannel,
    params: &FlagChannelParams,
) -> Result<(KrausChannel, RegisterFlagPredictor)> {
    if params.povm_element.rows != n.d_in {
        return Err(Error::DimensionMismatch {
            expected: n.d_in,
            got: params.povm_element.rows,
        });
    }
    let levels = check_register_width(params.k, n.d_in)?;
    let layout = FlagLayout::new(n.d_out, params.k);
    let d_in_total = n.d_in * levels;
    let (root_e, root_not) = povm_sqrt_pair(&params.povm_element)?;
    let sq = params.q.sqrt();
    let sn = (1.0 - params.q).sqrt();

    let mut kraus = Vec::new();
    // branch q: base channel on the first part, register projected onto |b⟩
    for a in &n.kraus {
        for b in 0..levels {
            let mut k_op = ComplexMatrix::zeros(layout.total, d_in_total);
            for r in 0..n.d_out {
                for c in 0..n.d_in {
                    k_op.set(r, c * levels + b, a.get(r, c) * sq);
                }
            }
            kraus.push(k_op);
        }
    }
    // branch (1−q), outcome E: forward the register as a labeled level
    for m in 0..n.d_in {
        for b in 0..levels {
            let mut k_op = ComplexMatrix::zeros(layout.total, d_in_total);
            for c in 0..n.d_in {
                k_op.set(
                    layout.register_level(b),
                    c * levels + b,
                    root_e.get(m, c) * sn,
                );
            }
            kraus.push(k_op);
        }
    }
    // branch (1−q), outcome I−E: erasure symbol
    for m in 0..n.d_in {
        for b in 0..levels {
            let mut k_op = ComplexMatrix::zeros(layout.total, d_in_total);
            for c in 0..n.d_in {
                k_op.set(
                    layout.erasure_level(),
                    c * levels + b,
                    root_not.get(m, c) * sn,
                );
            }
            kraus.push(k_op);
        }
    }
    let channel = KrausChannel::new(d_in_total, layout.total, kraus)?;
    let predictor = RegisterFlagPredictor {
        q: params.q,
        k: params.k,
        povm_element: params.povm_element.clone(),
    };
    Ok((channel, predictor))
}

/// Closed-form capacity pieces of the register-flag channel for a given base
/// ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegisterFlagPrediction {
    /// χ of the base ensemble through the base channel.
    pub chi_base: f64,
    /// Tr(E ρ̄) for the ensemble average.
    pub e_average: f64,
    /// Measurement information term H₂(Tr Eρ̄) − Σ p_i H₂(⟨v_i|E|v_i⟩) ∈ [0, 1].
    pub delta: f64,
    /// q·χ + (1−q)·k·Tr(Eρ̄) + (1−q)·δ, the exact value of the lifted ensemble.
    pub value: f64,
    /// The same expression without the δ term; maximizing it over ρ lands
    /// within (1−q) of the flagged channel's capacity.
    pub sans_delta: f64,
}

#[derive(Debug, Clone)]
pub struct RegisterFlagPredictor {
    pub q: f64,
    pub k: usize,
    pub povm_element: ComplexMatrix,
}

impl RegisterFlagPredictor {
    pub fn predict(&self, n_base: &KrausChannel, ens: &Ensemble) -> Result<RegisterFlagPrediction> {
        let chi_base = ensemble_holevo(n_base, ens)?;
        let avg = ens.average_matrix();
        let e_average = self.povm_element.trace_product_re(&avg);
        let mut mean_h2 = 0.0;
        for (p, v) in ens.probs.iter().zip(&ens.states) {
            if *p <= 0.0 {
                continue;
            }
            let ev = self
                .povm_element
                .sandwich(&v.amplitudes, &v.amplitudes)
                .re
                .clamp(0.0, 1.0);
            mean_h2 += p * binary_entropy(ev)?;
        }
        let delta = binary_entropy(e_average.clamp(0.0, 1.0))? - mean_h2;
        let q = self.q;
        let kk = self.k as f64;
        let sans_delta = q * chi_base + (1.0 - q) * kk * e_average;
        Ok(RegisterFlagPrediction {
            chi_base,
            e_average,
            delta,
            value: sans_delta + (1.0 - q) * delta,
            sans_delta,
        })
    }

    /// Lift a base ensemble onto the extended input: members v_i ⊗ |b⟩ with
    /// probabilities p_i / 2^k.
    pub fn lift_ensemble(&self, ens: &Ensemble) -> Result<Ensemble> {
        let levels = 1usize << self.k;
        let mut probs = Vec::with_capacity(ens.states.len() * levels);
        let mut states = Vec::with_capacity(probs.capacity());
        for (p, v) in ens.probs.iter().zip(&ens.states) {
            for b in 0..levels {
                probs.push(p / levels as f64);
                states.push(
                    v.tensor(&PureState::basis(levels, b))?
                        .with_factors(vec![v.dim * levels])?,
                );
            }
        }
        Ensemble::new(probs, states)
    }
}

/// Flagged channel without the input register: with probability q the input
/// goes through the base channel; otherwise {E, I−E} is measured and the
/// outcome is signaled, outcome E additionally carrying k maximally mixed
/// qubits. Built from a certificate functional, it tilts the output-entropy
/// landscape by −q·⟨v|τ|v⟩ up to constants.
pub fn entropy_tilt_channel(
    n: &KrausChannel,
    params: &FlagChannelParams,
) -> Result<(KrausChannel, EntropyTiltPredictor)> {
    if params.povm_element.rows != n.d_in {
        return Err(Error::DimensionMismatch {
            expected: n.d_in,
            got: params.povm_element.rows,
        });
    }
    let levels = check_register_width(params.k, n.d_in)?;
    let layout = FlagLayout::new(n.d_out, params.k);
    let (root_e, root_not) = povm_sqrt_pair(&params.povm_element)?;
    let sq = params.q.sqrt();
    let sn = (1.0 - params.q).sqrt();
    let mixed_weight = sn / (levels as f64).sqrt();

    let mut kraus = Vec::new();
    for a in &n.kraus {
        let mut k_op = ComplexMatrix::zeros(layout.total, n.d_in);
        for r in 0..n.d_out {
            for c in 0..n.d_in {
                k_op.set(r, c, a.get(r, c) * sq);
            }
        }
        kraus.push(k_op);
    }
    for m in 0..n.d_in {
        for b in 0..levels {
            let mut k_op = ComplexMatrix::zeros(layout.total, n.d_in);
            for c in 0..n.d_in {
                k_op.set(layout.register_level(b), c, root_e.get(m, c) * mixed_weight);
            }
            kraus.push(k_op);
        }
    }
    for m in 0..n.d_in {
        let mut k_op = ComplexMatrix::zeros(layout.total, n.d_in);
        for c in 0..n.d_in {
            k_op.set(layout.erasure_level(), c, root_not.get(m, c) * sn);
        }
        kraus.push(k_op);
    }
    let channel = KrausChannel::new(n.d_in, layout.total, kraus)?;
    let predictor = EntropyTiltPredictor {
        q: params.q,
        k: params.k,
        lambda: params.lambda,
        povm_element: params.povm_element.clone(),
    };
    Ok((channel, predictor))
}

#[derive(Debug, Clone)]
pub struct EntropyTiltPredictor {
    pub q: f64,
    pub k: usize,
    pub lambda: f64,
    pub povm_element: ComplexMatrix,
}

impl EntropyTiltPredictor {
    /// H(N'(ρ)) = q·H(N(ρ)) + H₂(q) + (1−q)·k·Tr(Eρ) + (1−q)·H₂(Tr(Eρ)).
    pub fn output_entropy(&self, n_base: &KrausChannel, rho: &DensityMatrix) -> Result<f64> {
        let base = entropy_of_matrix(&n_base.apply_matrix(&rho.matrix).hermitize())?;
        let e_avg = self
            .povm_element
            .trace_product_re(&rho.matrix)
            .clamp(0.0, 1.0);
        Ok(self.q * base
            + binary_entropy(self.q)?
            + (1.0 - self.q) * self.k as f64 * e_avg
            + (1.0 - self.q) * binary_entropy(e_avg)?)
    }

    /// Constrained-capacity sandwich around a measured flagged output
    /// entropy h = H(N'(ρ)):
    /// h − qλ − H₂(q) − (1−q) ≤ χ_{N'}(ρ) ≤ h − qλ − H₂(q).
    pub fn capacity_sandwich(&self, flagged_output_entropy: f64) -> Result<(f64, f64)> {
        let offset = self.q * self.lambda + binary_entropy(self.q)?;
        Ok((
            flagged_output_entropy - offset - (1.0 - self.q),
            flagged_output_entropy - offset,
        ))
    }
}

/// Shift-and-clock unitaries X_{d·a+b} = T^a R^b with T|j⟩ = |j+1 mod d⟩
/// and R|j⟩ = e^{2πij/d}|j⟩; the d-dimensional generalization of the Pauli
/// group modulo phases.
#[derive(Debug, Clone)]
pub struct PauliSet {
    pub d: usize,
    pub unitaries: Vec<ComplexMatrix>,
}

pub fn generalized_paulis(d: usize) -> Result<PauliSet> {
    if d < 2 {
        return Err(Error::BadParameter {
            name: "d",
            value: d as f64,
            range: ">= 2",
        });
    }
    let mut shift = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        shift.set((j + 1) % d, j, Complex64::new(1.0, 0.0));
    }
    let mut clock = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        let theta = std::f64::consts::TAU * j as f64 / d as f64;
        clock.set(j, j, Complex64::new(theta.cos(), theta.sin()));
    }
    let mut unitaries = Vec::with_capacity(d * d);
    let mut shift_pow = ComplexMatrix::identity(d);
    for _a in 0..d {
        let mut x = shift_pow.clone();
        for _b in 0..d {
            unitaries.push(x.clone());
            x = x.matmul(&clock);
        }
        shift_pow = shift_pow.matmul(&shift);
    }
    Ok(PauliSet { d, unitaries })
}

impl PauliSet {
    /// (1/d²) Σ X_i ρ X_i†, which sends every state to I/d.
    pub fn twirl(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.d, self.d);
        for x in &self.unitaries {
            acc.add_assign(&x.matmul(rho).matmul(&x.adjoint()));
        }
        acc.scale_real(1.0 / (self.d * self.d) as f64)
    }
}

/// Extend a channel with a d²-level classical register selecting which
/// generalized Pauli conjugates the output:
/// ρ ⊗ |i⟩⟨i| ↦ X_i N(ρ) X_i†. The register is dephased by construction.
pub fn pauli_extension_channel(n: &KrausChannel) -> Result<KrausChannel> {
    let d = n.d_out;
    let paulis = generalized_paulis(d)?;
    let registers = d * d;
    let d_in_total = n.d_in * registers;
    if d_in_total > DIM_CAP {
        return Err(Error::DimensionCap(d_in_total, DIM_CAP));
    }
    let mut kraus = Vec::with_capacity(n.kraus.len() * registers);
    for (i, x) in paulis.unitaries.iter().enumerate() {
        for a in &n.kraus {
            let xa = x.matmul(a);
            let mut k_op = ComplexMatrix::zeros(d, d_in_total);
            for r in 0..d {
                for c in 0..n.d_in {
                    k_op.set(r, c * registers + i, xa.get(r, c));
                }
            }
            kraus.push(k_op);
        }
    }
    KrausChannel::new(d_in_total, d, kraus)
}

/// The uniform register ensemble {v ⊗ |i⟩, 1/d²} whose value through the
/// extended channel is log2(d) − H(N(|v⟩⟨v|)).
pub fn uniform_register_ensemble(n: &KrausChannel, v: &PureState) -> Result<Ensemble> {
    let d = n.d_out;
    let registers = d * d;
    let mut probs = Vec::with_capacity(registers);
    let mut states = Vec::with_capacity(registers);
    for i in 0..registers {
        probs.push(1.0 / registers as f64);
        states.push(
            v.tensor(&PureState::basis(registers, i))?
                .with_factors(vec![v.dim * registers])?,
        );
    }
    Ensemble::new(probs, states)
}
