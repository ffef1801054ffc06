//! Finite-dimensional CPT maps: representation, validation, construction,
//! composition.
//!
//! The Kraus form is the canonical representation; the Stinespring isometry
//! and the Choi matrix are derived from it on demand.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::eig::{hermitian_eigenvalues, sqrt_psd};
use crate::qmat::matrix::ComplexMatrix;
use crate::qmat::random::{gaussian_matrix, gram_schmidt_columns, rng_from};
use crate::qmat::state::{partial_trace_matrix, DensityMatrix, PureState};
use crate::tol::{Tolerances, DIM_CAP};

/// A CPT map as a list of d_out × d_in Kraus operators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausChannel {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<ComplexMatrix>,
}

/// Stinespring form: isometry V from the input space into output ⊗ environment.
#[derive(Debug, Clone)]
pub struct StinespringIsometry {
    pub d_in: usize,
    pub d_out: usize,
    pub d_env: usize,
    /// (d_out · d_env) × d_in, with the row index laid out as
    /// out_index * d_env + env_index.
    pub v: ComplexMatrix,
}

/// Choi matrix of a channel: (I ⊗ N) applied to an unnormalized maximally
/// entangled state. Trace equals d_in; PSD iff the map is completely
/// positive.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    pub d_in: usize,
    pub d_out: usize,
    /// (d_in · d_out) square, factor layout [d_in, d_out].
    pub matrix: ComplexMatrix,
}

/// Result of checking the CPT invariants numerically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Frobenius norm of Σ A†A - I.
    pub tp_residual: f64,
    /// Minimum eigenvalue of the Choi matrix.
    pub choi_min_eigenvalue: f64,
    pub tp_pass: bool,
    pub cp_pass: bool,
    pub pass: bool,
}

impl KrausChannel {
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if d_in > DIM_CAP || d_out > DIM_CAP {
            return Err(Error::DimensionCap(d_in.max(d_out), DIM_CAP));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        for a in &kraus {
            if a.rows != d_out || a.cols != d_in {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator is {}x{}, expected {}x{}",
                    a.rows, a.cols, d_out, d_in
                )));
            }
        }
        Ok(Self { d_in, d_out, kraus })
    }

    /// Σ A†A, the trace-preservation witness.
    pub fn kraus_gram(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.d_in, self.d_in);
        for a in &self.kraus {
            acc.add_assign(&a.adjoint().matmul(a));
        }
        acc
    }

    /// Apply the channel to raw matrix storage (no validation).
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for a in &self.kraus {
            out.add_assign(&a.matmul(m).matmul(&a.adjoint()));
        }
        out
    }

    /// Channel output on a pure input vector, as raw matrix storage.
    /// Cheaper than `apply_matrix` on a projector: d_out² · |kraus| work.
    pub fn apply_pure(&self, amp: &[Complex64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for a in &self.kraus {
            let av = a.matvec(amp);
            for i in 0..self.d_out {
                for j in 0..self.d_out {
                    let v = av[i] * av[j].conj();
                    out.data[i * self.d_out + j] += v;
                }
            }
        }
        out
    }

    /// Adjoint map N†(X) = Σ A† X A.
    pub fn adjoint_apply(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d_in, self.d_in);
        for a in &self.kraus {
            out.add_assign(&a.adjoint().matmul(m).matmul(a));
        }
        out
    }

    pub fn choi(&self) -> ChoiMatrix {
        let d = self.d_in * self.d_out;
        let mut matrix = ComplexMatrix::zeros(d, d);
        // C = Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|); N(|i⟩⟨j|) = Σ_k A_k[:,i] A_k[:,j]†
        for a in &self.kraus {
            for i in 0..self.d_in {
                for j in 0..self.d_in {
                    for r in 0..self.d_out {
                        for s in 0..self.d_out {
                            let v = a.get(r, i) * a.get(s, j).conj();
                            let row = i * self.d_out + r;
                            let col = j * self.d_out + s;
                            matrix.data[row * d + col] += v;
                        }
                    }
                }
            }
        }
        ChoiMatrix {
            d_in: self.d_in,
            d_out: self.d_out,
            matrix,
        }
    }
}

/// Numerical CP/TP check; failures are carried in the report, not errors.
pub fn validate_channel(n: &KrausChannel) -> ValidationReport {
    validate_channel_with(n, &Tolerances::default())
}

pub fn validate_channel_with(n: &KrausChannel, tol: &Tolerances) -> ValidationReport {
    let gram = n.kraus_gram();
    let tp_residual = gram.sub(&ComplexMatrix::identity(n.d_in)).frobenius_norm();
    let choi = n.choi();
    let choi_min_eigenvalue = hermitian_eigenvalues(&choi.matrix.hermitize())
        .map(|e| *e.last().unwrap())
        .unwrap_or(f64::NEG_INFINITY);
    let tp_pass = tp_residual <= tol.tp;
    let cp_pass = choi_min_eigenvalue >= -tol.psd;
    ValidationReport {
        tp_residual,
        choi_min_eigenvalue,
        tp_pass,
        cp_pass,
        pass: tp_pass && cp_pass,
    }
}

/// N(ρ) as a validated density matrix.
pub fn apply_channel(n: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim != n.d_in {
        return Err(Error::DimensionMismatch {
            expected: n.d_in,
            got: rho.dim,
        });
    }
    let out = n.apply_matrix(&rho.matrix).hermitize();
    DensityMatrix::from_trusted(out, vec![n.d_out])
}

/// Stinespring isometry with environment dimension = number of Kraus
/// operators: V|ψ⟩ = Σ_k (A_k|ψ⟩) ⊗ |k⟩.
pub fn stinespring(n: &KrausChannel) -> Result<StinespringIsometry> {
    let report = validate_channel(n);
    if !report.pass {
        return Err(Error::InvalidChannel(format!(
            "tp residual {:.3e}, choi min eigenvalue {:.3e}",
            report.tp_residual, report.choi_min_eigenvalue
        )));
    }
    let d_env = n.kraus.len();
    let rows = n.d_out * d_env;
    if rows > DIM_CAP {
        return Err(Error::DimensionCap(rows, DIM_CAP));
    }
    let mut v = ComplexMatrix::zeros(rows, n.d_in);
    for (k, a) in n.kraus.iter().enumerate() {
        for r in 0..n.d_out {
            for c in 0..n.d_in {
                v.set(r * d_env + k, c, a.get(r, c));
            }
        }
    }
    Ok(StinespringIsometry {
        d_in: n.d_in,
        d_out: n.d_out,
        d_env,
        v,
    })
}

impl StinespringIsometry {
    /// V ρ V† on the output ⊗ environment space, factors [d_out, d_env].
    pub fn dilate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim != self.d_in {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                got: rho.dim,
            });
        }
        let big = self
            .v
            .matmul(&rho.matrix)
            .matmul(&self.v.adjoint())
            .hermitize();
        DensityMatrix::from_trusted(big, vec![self.d_out, self.d_env])
    }

    /// Tr_env V ρ V†, which must reproduce the channel.
    pub fn reduce(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let big = self.dilate(rho)?;
        big.partial_trace(&[0])
    }
}

/// Kraus set {A_i ⊗ B_j}.
pub fn tensor_channels(n1: &KrausChannel, n2: &KrausChannel) -> Result<KrausChannel> {
    let mut kraus = Vec::with_capacity(n1.kraus.len() * n2.kraus.len());
    for a in &n1.kraus {
        for b in &n2.kraus {
            kraus.push(a.kron(b)?);
        }
    }
    KrausChannel::new(n1.d_in * n2.d_in, n1.d_out * n2.d_out, kraus)
}

/// Named channel families addressable from config and CLI.
#[derive(Debug, Clone, PartialEq)]
pub enum NamedChannel {
    /// Identity on dimension d.
    Identity { d: usize },
    /// Qubit depolarizing: ρ ↦ (1-p)ρ + p·I/2.
    Depolarizing { p: f64 },
    /// Dephasing on dimension d: ρ ↦ (1-p)ρ + p·diag(ρ).
    Dephasing { p: f64, d: usize },
    /// Erasure on dimension d: with probability e, replace the input by a
    /// flag level appended as an extra output dimension.
    Erasure { e: f64, d: usize },
    /// Mix a base channel with the maximally mixed output:
    /// ρ ↦ q·N(ρ) + (1-q)·I/d_out.
    Mixed { q: f64, base: Box<NamedChannel> },
}

impl NamedChannel {
    /// Parse the CLI form, e.g. `depolarizing:p=0.5`, `identity:d=3`,
    /// `dephasing:p=0.3,d=2`, `erasure:e=0.25,d=2`,
    /// `mixed:q=0.7,base=depolarizing:p=0.5`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = match spec.split_once(':') {
            Some((k, r)) => (k.trim(), r.trim()),
            None => (spec.trim(), ""),
        };
        let params = parse_params(rest);
        let get = |key: &str| -> Option<&str> {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
        };
        let get_f = |key: &str| -> Result<f64> {
            get(key)
                .ok_or_else(|| Error::Config(format!("missing parameter {key} in `{spec}`")))?
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad numeric parameter {key} in `{spec}`")))
        };
        let get_d = |key: &str, default: usize| -> Result<usize> {
            match get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad integer parameter {key} in `{spec}`"))),
            }
        };
        match kind {
            "identity" => Ok(NamedChannel::Identity { d: get_d("d", 2)? }),
            "depolarizing" => Ok(NamedChannel::Depolarizing { p: get_f("p")? }),
            "dephasing" => Ok(NamedChannel::Dephasing {
                p: get_f("p")?,
                d: get_d("d", 2)?,
            }),
            "erasure" => Ok(NamedChannel::Erasure {
                e: get_f("e")?,
                d: get_d("d", 2)?,
            }),
            "mixed" => {
                let q = get_f("q")?;
                let base_spec = get("base")
                    .ok_or_else(|| Error::Config(format!("missing base channel in `{spec}`")))?;
                Ok(NamedChannel::Mixed {
                    q,
                    base: Box::new(NamedChannel::parse(base_spec)?),
                })
            }
            other => Err(Error::UnknownChannelKind(other.to_string())),
        }
    }

    pub fn build(&self) -> Result<KrausChannel> {
        match self {
            NamedChannel::Identity { d } => identity_channel(*d),
            NamedChannel::Depolarizing { p } => depolarizing_channel(*p),
            NamedChannel::Dephasing { p, d } => dephasing_channel(*p, *d),
            NamedChannel::Erasure { e, d } => erasure_channel(*e, *d),
            NamedChannel::Mixed { q, base } => {
                let inner = base.build()?;
                mixed_channel(*q, &inner)
            }
        }
    }
}

/// Split `a=1,b=2,base=mixed:q=0.5,...` into key/value pairs; the final
/// `base=` value swallows the rest of the string so nested specs survive.
fn parse_params(rest: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut remaining = rest;
    while !remaining.is_empty() {
        let Some(eq) = remaining.find('=') else { break };
        let key = remaining[..eq].trim().to_string();
        let after = &remaining[eq + 1..];
        if key == "base" {
            out.push((key, after.trim().to_string()));
            break;
        }
        let (value, rest2) = match after.find(',') {
            Some(c) => (&after[..c], &after[c + 1..]),
            None => (after, ""),
        };
        out.push((key, value.trim().to_string()));
        remaining = rest2;
    }
    out
}

fn check_prob(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::BadParameter {
            name,
            value: v,
            range: "[0, 1]",
        });
    }
    Ok(())
}

pub fn identity_channel(d: usize) -> Result<KrausChannel> {
    KrausChannel::new(d, d, vec![ComplexMatrix::identity(d)])
}

/// Qubit depolarizing via the Pauli Kraus set.
pub fn depolarizing_channel(p: f64) -> Result<KrausChannel> {
    check_prob("p", p)?;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let i2 = ComplexMatrix::identity(2);
    let x = ComplexMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])?;
    let y = ComplexMatrix::new(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])?;
    let z = ComplexMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])?;
    let kraus = vec![
        i2.scale_real((1.0 - 3.0 * p / 4.0).sqrt()),
        x.scale_real((p / 4.0).sqrt()),
        y.scale_real((p / 4.0).sqrt()),
        z.scale_real((p / 4.0).sqrt()),
    ];
    KrausChannel::new(2, 2, kraus)
}

/// ρ ↦ (1-p)ρ + p·diag(ρ) on dimension d.
pub fn dephasing_channel(p: f64, d: usize) -> Result<KrausChannel> {
    check_prob("p", p)?;
    let mut kraus = vec![ComplexMatrix::identity(d).scale_real((1.0 - p).sqrt())];
    for i in 0..d {
        let mut k = ComplexMatrix::zeros(d, d);
        k.set(i, i, Complex64::new(p.sqrt(), 0.0));
        kraus.push(k);
    }
    KrausChannel::new(d, d, kraus)
}

/// Erasure: output dimension d+1, the extra level is the erasure flag.
pub fn erasure_channel(e: f64, d: usize) -> Result<KrausChannel> {
    check_prob("e", e)?;
    let mut embed = ComplexMatrix::zeros(d + 1, d);
    for i in 0..d {
        embed.set(i, i, Complex64::new((1.0 - e).sqrt(), 0.0));
    }
    let mut kraus = vec![embed];
    for i in 0..d {
        let mut k = ComplexMatrix::zeros(d + 1, d);
        k.set(d, i, Complex64::new(e.sqrt(), 0.0));
        kraus.push(k);
    }
    KrausChannel::new(d, d + 1, kraus)
}

/// q·N(ρ) + (1-q)·I/d_out, with an explicit CPT Kraus realization:
/// the scaled Kraus set of N plus the scaled set {|i⟩⟨j|/√d_out}.
pub fn mixed_channel(q: f64, base: &KrausChannel) -> Result<KrausChannel> {
    check_prob("q", q)?;
    let mut kraus: Vec<ComplexMatrix> = base.kraus.iter().map(|a| a.scale_real(q.sqrt())).collect();
    let w = ((1.0 - q) / base.d_out as f64).sqrt();
    if w > 0.0 {
        for i in 0..base.d_out {
            for j in 0..base.d_in {
                let mut k = ComplexMatrix::zeros(base.d_out, base.d_in);
                k.set(i, j, Complex64::new(w, 0.0));
                kraus.push(k);
            }
        }
    }
    KrausChannel::new(base.d_in, base.d_out, kraus)
}

/// POVM {E, I−E} followed by discarding the post-measurement state: the two
/// Kraus families {|out_e⟩⟨m|√E} and {|out_not⟩⟨m|√(I−E)} used by the gadget
/// constructions. Exposed here so constructions can share the square roots.
pub fn povm_sqrt_pair(e: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let d = e.rows;
    let root_e = sqrt_psd(e)?;
    let complement = ComplexMatrix::identity(d).sub(e);
    let root_not = sqrt_psd(&complement)?;
    Ok((root_e, root_not))
}

/// Haar-random channel: a Haar isometry from d_in into d_out · d_env, sliced
/// into d_env Kraus blocks. Deterministic per seed.
pub fn random_channel(d_in: usize, d_out: usize, d_env: usize, seed: u64) -> Result<KrausChannel> {
    if d_out * d_env < d_in {
        return Err(Error::BadParameter {
            name: "d_out*d_env",
            value: (d_out * d_env) as f64,
            range: ">= d_in",
        });
    }
    let rows = d_out * d_env;
    if rows > DIM_CAP {
        return Err(Error::DimensionCap(rows, DIM_CAP));
    }
    let mut rng = rng_from(seed);
    let v = gram_schmidt_columns(&gaussian_matrix(rows, d_in, &mut rng));
    let mut kraus = Vec::with_capacity(d_env);
    for k in 0..d_env {
        let mut a = ComplexMatrix::zeros(d_out, d_in);
        for r in 0..d_out {
            for c in 0..d_in {
                a.set(r, c, v.get(r * d_env + k, c));
            }
        }
        kraus.push(a);
    }
    KrausChannel::new(d_in, d_out, kraus)
}

/// Choi-matrix invariants as a standalone check: PSD and Tr_out C = I.
impl ChoiMatrix {
    pub fn partial_trace_output(&self) -> Result<ComplexMatrix> {
        partial_trace_matrix(&self.matrix, &[self.d_in, self.d_out], &[0])
    }
}

/// Convenience wrapper used by tests and the harness: output of a channel on
/// a pure state, validated.
pub fn apply_to_pure(n: &KrausChannel, v: &PureState) -> Result<DensityMatrix> {
    if v.dim != n.d_in {
        return Err(Error::DimensionMismatch {
            expected: n.d_in,
            got: v.dim,
        });
    }
    DensityMatrix::from_trusted(n.apply_pure(&v.amplitudes).hermitize(), vec![n.d_out])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::entropy::von_neumann_entropy;
    use crate::qmat::random::{random_density, random_pure};

    #[test]
    fn identity_validates_clean() {
        let n = identity_channel(2).unwrap();
        let report = validate_channel(&n);
        assert!(report.pass);
        assert!(report.tp_residual < 1e-15);
    }

    #[test]
    fn doubled_identity_fails_tp() {
        let n = KrausChannel::new(
            2,
            2,
            vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
        )
        .unwrap();
        let report = validate_channel(&n);
        assert!(!report.tp_pass);
        assert!((report.tp_residual - 2.0f64.sqrt()).abs() < 1e-12); // ||2I - I||_F = ||I_2||_F
    }

    #[test]
    fn random_channels_validate() {
        for seed in 0..20u64 {
            let n = random_channel(3, 2, 3, seed).unwrap();
            let report = validate_channel(&n);
            assert!(report.pass, "seed {seed}: {report:?}");
            assert!(report.tp_residual <= 1e-9);
            assert!(report.choi_min_eigenvalue >= -1e-10);
        }
    }

    #[test]
    fn identity_channel_apply() {
        let n = identity_channel(2).unwrap();
        let rho = random_density(&[2], 2, 4).unwrap();
        let out = apply_channel(&n, &rho).unwrap();
        assert!(out.matrix.sub(&rho.matrix).frobenius_norm() < 1e-14);
    }

    #[test]
    fn fully_depolarizing_sends_everything_to_mixed() {
        let n = depolarizing_channel(1.0).unwrap();
        let v = random_pure(&[2], 9).unwrap();
        let out = apply_to_pure(&n, &v).unwrap();
        let target = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(out.matrix.sub(&target).frobenius_norm() < 1e-12);
    }

    #[test]
    fn depolarizing_zero_is_identity() {
        let n = depolarizing_channel(0.0).unwrap();
        let rho = random_density(&[2], 2, 11).unwrap();
        let out = apply_channel(&n, &rho).unwrap();
        assert!(out.matrix.sub(&rho.matrix).frobenius_norm() < 1e-12);
    }

    #[test]
    fn random_channel_output_is_state() {
        let n = random_channel(2, 3, 2, 5).unwrap();
        let rho = random_density(&[2], 2, 6).unwrap();
        let out = apply_channel(&n, &rho).unwrap();
        assert!((out.matrix.trace().re - 1.0).abs() < 1e-10);
        out.validate(&Tolerances::default()).unwrap();
    }

    #[test]
    fn stinespring_identity_is_trivial() {
        let n = identity_channel(2).unwrap();
        let s = stinespring(&n).unwrap();
        assert_eq!(s.d_env, 1);
        assert!(s.v.sub(&ComplexMatrix::identity(2)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn stinespring_roundtrip() {
        for seed in 0..5u64 {
            let n = random_channel(2, 2, 3, seed).unwrap();
            let s = stinespring(&n).unwrap();
            let gram = s.v.adjoint().matmul(&s.v);
            assert!(gram.sub(&ComplexMatrix::identity(2)).frobenius_norm() < 1e-10);
            let rho = random_density(&[2], 2, seed + 50).unwrap();
            let via_dilation = s.reduce(&rho).unwrap();
            let direct = apply_channel(&n, &rho).unwrap();
            assert!(via_dilation.matrix.sub(&direct.matrix).frobenius_norm() <= 1e-10);
        }
    }

    #[test]
    fn stinespring_depolarizing_env_dim() {
        let n = depolarizing_channel(0.5).unwrap();
        let s = stinespring(&n).unwrap();
        assert_eq!(s.d_env, 4);
        let rho = random_density(&[2], 2, 3).unwrap();
        let err = s
            .reduce(&rho)
            .unwrap()
            .matrix
            .sub(&apply_channel(&n, &rho).unwrap().matrix)
            .frobenius_norm();
        assert!(err <= 1e-10);
    }

    #[test]
    fn tensor_channels_factorize() {
        let n1 = depolarizing_channel(0.3).unwrap();
        let n2 = random_channel(2, 2, 2, 8).unwrap();
        let nt = tensor_channels(&n1, &n2).unwrap();
        assert_eq!(nt.kraus.len(), n1.kraus.len() * n2.kraus.len());
        assert!(validate_channel(&nt).pass);
        let r1 = random_density(&[2], 2, 21).unwrap();
        let r2 = random_density(&[2], 2, 22).unwrap();
        let joint = crate::qmat::state::tensor_states(&r1, &r2).unwrap();
        let lhs = apply_channel(&nt, &joint).unwrap();
        let rhs = apply_channel(&n1, &r1)
            .unwrap()
            .matrix
            .kron(&apply_channel(&n2, &r2).unwrap().matrix)
            .unwrap();
        assert!(lhs.matrix.sub(&rhs).frobenius_norm() < 1e-10);
    }

    #[test]
    fn mixed_channel_action() {
        let base = identity_channel(2).unwrap();
        let n = mixed_channel(0.7, &base).unwrap();
        assert!(validate_channel(&n).pass);
        let v = PureState::basis(2, 0);
        let out = apply_to_pure(&n, &v).unwrap();
        let eigs = hermitian_eigenvalues(&out.matrix).unwrap();
        assert!((eigs[0] - 0.85).abs() < 1e-12);
        assert!((eigs[1] - 0.15).abs() < 1e-12);
        // action matches q·N(ρ) + (1-q)·I/d on a random state
        let rho = random_density(&[2], 2, 33).unwrap();
        let lhs = apply_channel(&n, &rho).unwrap();
        let rhs = rho
            .matrix
            .scale_real(0.7)
            .add(&ComplexMatrix::identity(2).scale_real(0.3 / 2.0));
        assert!(lhs.matrix.sub(&rhs).frobenius_norm() < 1e-10);
    }

    #[test]
    fn erasure_channel_shape() {
        let n = erasure_channel(0.25, 2).unwrap();
        assert_eq!(n.d_out, 3);
        assert!(validate_channel(&n).pass);
        let v = PureState::basis(2, 0);
        let out = apply_to_pure(&n, &v).unwrap();
        assert!((out.matrix.get(0, 0).re - 0.75).abs() < 1e-12);
        assert!((out.matrix.get(2, 2).re - 0.25).abs() < 1e-12);
    }

    #[test]
    fn choi_output_trace_is_identity() {
        let n = random_channel(3, 2, 2, 44).unwrap();
        let choi = n.choi();
        let reduced = choi.partial_trace_output().unwrap();
        let err = reduced.sub(&ComplexMatrix::identity(3)).frobenius_norm();
        assert!(err < 1e-10, "Tr_out C deviates from I by {err}");
    }

    #[test]
    fn random_channel_deterministic() {
        let a = random_channel(2, 2, 2, 77).unwrap();
        let b = random_channel(2, 2, 2, 77).unwrap();
        for (x, y) in a.kraus.iter().zip(&b.kraus) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn unitary_channel_has_pure_outputs() {
        let n = random_channel(2, 2, 1, 13).unwrap();
        assert_eq!(n.kraus.len(), 1);
        let v = random_pure(&[2], 14).unwrap();
        let out = apply_to_pure(&n, &v).unwrap();
        let h = von_neumann_entropy(&out).unwrap();
        assert!(h.abs() < 1e-10);
    }

    #[test]
    fn named_channel_parsing() {
        assert_eq!(
            NamedChannel::parse("depolarizing:p=0.5").unwrap(),
            NamedChannel::Depolarizing { p: 0.5 }
        );
        assert_eq!(
            NamedChannel::parse("identity:d=3").unwrap(),
            NamedChannel::Identity { d: 3 }
        );
        let nested = NamedChannel::parse("mixed:q=0.7,base=depolarizing:p=0.5").unwrap();
        match nested {
            NamedChannel::Mixed { q, base } => {
                assert!((q - 0.7).abs() < 1e-15);
                assert_eq!(*base, NamedChannel::Depolarizing { p: 0.5 });
            }
            other => panic!("unexpected parse: {other:?}"),
        }
        assert!(NamedChannel::parse("amplitude-damping:g=0.1").is_err());
        assert!(NamedChannel::parse("depolarizing:p=1.5")
            .unwrap()
            .build()
            .is_err());
    }

    #[test]
    fn channel_json_roundtrip() {
        let n = random_channel(2, 3, 2, 55).unwrap();
        let s = serde_json::to_string(&n).unwrap();
        let back: KrausChannel = serde_json::from_str(&s).unwrap();
        assert_eq!(back.d_in, 2);
        assert_eq!(back.d_out, 3);
        for (a, b) in n.kraus.iter().zip(&back.kraus) {
            assert!(a.sub(b).frobenius_norm() < 1e-15);
        }
    }
}
