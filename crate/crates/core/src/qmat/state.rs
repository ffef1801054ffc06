use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qmat::eig::{hermitian_eig, hermitian_eig_with};
use crate::qmat::matrix::{complex_to_pair, norm, ComplexMatrix};
use crate::tol::{Tolerances, DIM_CAP};

/// Density matrix with declared tensor-factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub dim: usize,
    pub matrix: ComplexMatrix,
    /// Factor dimensions, product equals `dim`. A single entry means the
    /// state carries no tensor structure.
    pub factors: Vec<usize>,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian, PSD, unit trace within tolerances.
    pub fn new(matrix: ComplexMatrix, factors: Vec<usize>) -> Result<Self> {
        Self::with_tolerances(matrix, factors, &Tolerances::default())
    }

    pub fn with_tolerances(
        matrix: ComplexMatrix,
        factors: Vec<usize>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let dm = Self::from_trusted(matrix, factors)?;
        dm.validate(tol)?;
        Ok(dm)
    }

    /// Structure checks only (dims, factors, cap); no spectral validation.
    /// For outputs that are valid by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, factors: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows,
                cols: matrix.cols,
            });
        }
        let dim = matrix.rows;
        if dim > DIM_CAP {
            return Err(Error::DimensionCap(dim, DIM_CAP));
        }
        let factors = if factors.is_empty() {
            vec![dim]
        } else {
            factors
        };
        let prod: usize = factors.iter().product();
        if prod != dim || factors.contains(&0) {
            return Err(Error::BadFactors { factors, dim });
        }
        Ok(Self {
            dim,
            matrix,
            factors,
        })
    }

    /// Check the density-matrix invariants and report the first violation.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let residual = self.matrix.hermiticity_residual();
        if residual > tol.herm {
            return Err(Error::NotHermitian {
                residual,
                tol: tol.herm,
            });
        }
        let trace = self.matrix.trace().re;
        if (trace - 1.0).abs() > tol.tr {
            return Err(Error::BadTrace { trace, tol: tol.tr });
        }
        let eigs = hermitian_eig_with(&self.matrix, tol)?.eigenvalues;
        let min_eig = *eigs.last().expect("nonempty spectrum");
        if min_eig < -tol.psd {
            return Err(Error::NotPsd { min_eig });
        }
        Ok(())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(
            ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
            vec![dim],
        )
        .expect("identity/d is a density matrix")
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self::from_trusted(
            ComplexMatrix::outer(&state.amplitudes, &state.amplitudes),
            state.factors.clone(),
        )
        .expect("projector of a unit vector is a density matrix")
    }

    /// Same matrix, reinterpreted with a different factor list.
    pub fn with_factors(&self, factors: Vec<usize>) -> Result<Self> {
        Self::from_trusted(self.matrix.clone(), factors)
    }

    /// Numerical rank against a relative eigenvalue cutoff. Also returns the
    /// spectrum so callers can reuse it.
    pub fn rank_with_cutoff(&self, rel_cutoff: f64) -> Result<(usize, crate::qmat::eig::Spectrum)> {
        let spec = hermitian_eig(&self.matrix)?;
        let lam_max = spec.eigenvalues[0].max(0.0);
        let cutoff = rel_cutoff * lam_max;
        let rank = spec.eigenvalues.iter().filter(|&&l| l > cutoff).count();
        Ok((rank.max(1), spec))
    }

    /// Partial trace keeping the listed factor indices (in their original
    /// order) and tracing out the rest.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let traced = partial_trace_matrix(&self.matrix, &self.factors, keep)?;
        let kept_factors: Vec<usize> = keep.iter().map(|&k| self.factors[k]).collect();
        DensityMatrix::from_trusted(traced, kept_factors)
    }

    /// Reorder tensor factors by `perm`, where factor `perm[k]` of the input
    /// becomes factor `k` of the output.
    pub fn permute_factors(&self, perm: &[usize]) -> Result<DensityMatrix> {
        let new_factors = validate_permutation(&self.factors, perm)?;
        let strides = factor_strides(&self.factors);
        let new_strides = factor_strides(&new_factors);
        let dim = self.dim;
        let mut out = ComplexMatrix::zeros(dim, dim);
        let nf = self.factors.len();
        let mut idx = vec![0usize; nf];
        for i in 0..dim {
            decompose_index(i, &self.factors, &strides, &mut idx);
            let ni = recompose_permuted(&idx, perm, &new_strides);
            let mut jdx = vec![0usize; nf];
            for j in 0..dim {
                decompose_index(j, &self.factors, &strides, &mut jdx);
                let nj = recompose_permuted(&jdx, perm, &new_strides);
                out.set(ni, nj, self.matrix.get(i, j));
            }
        }
        DensityMatrix::from_trusted(out, new_factors)
    }

    /// The two declared factor dimensions, or an error when the state is not
    /// bipartite.
    pub fn bipartition(&self) -> Result<(usize, usize)> {
        if self.factors.len() != 2 {
            return Err(Error::BipartitionMissing(self.factors.len()));
        }
        Ok((self.factors[0], self.factors[1]))
    }
}

/// Pure state with declared tensor-factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub dim: usize,
    pub amplitudes: Vec<Complex64>,
    pub factors: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>, factors: Vec<usize>) -> Result<Self> {
        Self::with_tolerances(amplitudes, factors, &Tolerances::default())
    }

    pub fn with_tolerances(
        amplitudes: Vec<Complex64>,
        factors: Vec<usize>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > tol.norm {
            return Err(Error::BadNorm {
                norm: n,
                tol: tol.norm,
            });
        }
        Self::from_trusted(amplitudes, factors)
    }

    pub(crate) fn from_trusted(amplitudes: Vec<Complex64>, factors: Vec<usize>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if dim > DIM_CAP {
            return Err(Error::DimensionCap(dim, DIM_CAP));
        }
        let factors = if factors.is_empty() {
            vec![dim]
        } else {
            factors
        };
        let prod: usize = factors.iter().product();
        if prod != dim || factors.contains(&0) {
            return Err(Error::BadFactors { factors, dim });
        }
        Ok(Self {
            dim,
            amplitudes,
            factors,
        })
    }

    /// Computational basis state |index⟩.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amp = vec![Complex64::new(0.0, 0.0); dim];
        amp[index] = Complex64::new(1.0, 0.0);
        Self::from_trusted(amp, vec![dim]).expect("basis state")
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        PureState::from_trusted(
            crate::qmat::matrix::kron_vec(&self.amplitudes, &other.amplitudes),
            factors,
        )
    }

    pub fn with_factors(&self, factors: Vec<usize>) -> Result<PureState> {
        PureState::from_trusted(self.amplitudes.clone(), factors)
    }

    pub fn bipartition(&self) -> Result<(usize, usize)> {
        if self.factors.len() != 2 {
            return Err(Error::BipartitionMissing(self.factors.len()));
        }
        Ok((self.factors[0], self.factors[1]))
    }

    /// Marginal on the kept factors of the projector.
    pub fn marginal(&self, keep: &[usize]) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(self).partial_trace(keep)
    }

    /// Reorder tensor factors by `perm` (same convention as the density
    /// matrix version).
    pub fn permute_factors(&self, perm: &[usize]) -> Result<PureState> {
        let new_factors = validate_permutation(&self.factors, perm)?;
        let strides = factor_strides(&self.factors);
        let new_strides = factor_strides(&new_factors);
        let mut amp = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut idx = vec![0usize; self.factors.len()];
        for i in 0..self.dim {
            decompose_index(i, &self.factors, &strides, &mut idx);
            amp[recompose_permuted(&idx, perm, &new_strides)] = self.amplitudes[i];
        }
        PureState::from_trusted(amp, new_factors)
    }
}

fn factor_strides(factors: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; factors.len()];
    for k in (0..factors.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * factors[k + 1];
    }
    strides
}

fn decompose_index(mut i: usize, factors: &[usize], strides: &[usize], out: &mut [usize]) {
    for k in 0..factors.len() {
        out[k] = i / strides[k];
        i %= strides[k];
    }
}

fn recompose_permuted(idx: &[usize], perm: &[usize], new_strides: &[usize]) -> usize {
    perm.iter()
        .enumerate()
        .map(|(new_k, &old_k)| idx[old_k] * new_strides[new_k])
        .sum()
}

fn validate_permutation(factors: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    if perm.len() != factors.len() {
        return Err(Error::FactorIndexOutOfRange {
            index: perm.len(),
            count: factors.len(),
        });
    }
    let mut seen = vec![false; factors.len()];
    for &p in perm {
        if p >= factors.len() || seen[p] {
            return Err(Error::FactorIndexOutOfRange {
                index: p,
                count: factors.len(),
            });
        }
        seen[p] = true;
    }
    Ok(perm.iter().map(|&p| factors[p]).collect())
}

/// Partial trace over the factors *not* listed in `keep`.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    factors: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    if keep.is_empty() {
        return Err(Error::FactorIndexOutOfRange {
            index: 0,
            count: factors.len(),
        });
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() {
        return Err(Error::FactorIndexOutOfRange {
            index: keep.len(),
            count: factors.len(),
        });
    }
    for &k in &keep_sorted {
        if k >= factors.len() {
            return Err(Error::FactorIndexOutOfRange {
                index: k,
                count: factors.len(),
            });
        }
    }
    let dim: usize = factors.iter().product();
    if m.rows != dim || m.cols != dim {
        return Err(Error::BadFactors {
            factors: factors.to_vec(),
            dim: m.rows,
        });
    }

    let strides = factor_strides(factors);
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| factors[k]).collect();
    let kept_strides = factor_strides(&kept_dims);
    let out_dim: usize = kept_dims.iter().product();
    let traced: Vec<usize> = (0..factors.len())
        .filter(|k| !keep_sorted.contains(k))
        .collect();

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    let nf = factors.len();
    let mut idx = vec![0usize; nf];
    let mut jdx = vec![0usize; nf];
    for i in 0..dim {
        decompose_index(i, factors, &strides, &mut idx);
        for j in 0..dim {
            decompose_index(j, factors, &strides, &mut jdx);
            if traced.iter().any(|&t| idx[t] != jdx[t]) {
                continue;
            }
            let oi: usize = keep_sorted
                .iter()
                .enumerate()
                .map(|(pos, &k)| idx[k] * kept_strides[pos])
                .sum();
            let oj: usize = keep_sorted
                .iter()
                .enumerate()
                .map(|(pos, &k)| jdx[k] * kept_strides[pos])
                .sum();
            let v = out.get(oi, oj) + m.get(i, j);
            out.set(oi, oj, v);
        }
    }
    Ok(out)
}

/// Kronecker product of two matrices; the free-function form used across the
/// crate.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.kron(b)
}

/// Tensor product of density matrices, concatenating factor metadata.
pub fn tensor_states(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let mut factors = a.factors.clone();
    factors.extend_from_slice(&b.factors);
    DensityMatrix::from_trusted(a.matrix.kron(&b.matrix)?, factors)
}

/// Purification: a pure state on dim × rank whose partial trace over the
/// second factor returns the input.
pub fn purify(rho: &DensityMatrix) -> Result<PureState> {
    let (rank, spec) = rho.rank_with_cutoff(1e-12)?;
    let dim = rho.dim;
    let mut amp = vec![Complex64::new(0.0, 0.0); dim * rank];
    for j in 0..rank {
        let lam = spec.eigenvalues[j].max(0.0);
        let w = lam.sqrt();
        for i in 0..dim {
            amp[i * rank + j] = spec.eigenvectors.get(i, j) * w;
        }
    }
    crate::qmat::matrix::normalize(&mut amp);
    PureState::from_trusted(amp, vec![dim, rank])
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            dims: &'a [usize],
            matrix: &'a ComplexMatrix,
        }
        Repr {
            dims: &self.factors,
            matrix: &self.matrix,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            dims: Vec<usize>,
            matrix: ComplexMatrix,
        }
        let r = Repr::deserialize(deserializer)?;
        DensityMatrix::new(r.matrix, r.dims).map_err(D::Error::custom)
    }
}

impl Serialize for PureState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            dims: &'a [usize],
            vec: Vec<[f64; 2]>,
        }
        Repr {
            dims: &self.factors,
            vec: self
                .amplitudes
                .iter()
                .map(|&z| complex_to_pair(z))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            dims: Vec<usize>,
            vec: Vec<[f64; 2]>,
        }
        let r = Repr::deserialize(deserializer)?;
        let amp = r.vec.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        PureState::new(amp, r.dims).map_err(D::Error::custom)
    }
}
