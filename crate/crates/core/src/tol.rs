//! Numerical tolerances used by validation and the entropy primitives.

/// Tolerance bundle. The defaults are what every constructor uses unless a
/// caller passes its own copy.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Hermiticity residual, max |M_ij - conj(M_ji)|.
    pub herm: f64,
    /// Trace deviation from 1 for density matrices.
    pub tr: f64,
    /// Norm deviation from 1 for pure states.
    pub norm: f64,
    /// Eigenvalues above -psd are clamped to zero; below it the matrix is
    /// rejected as not positive semidefinite.
    pub psd: f64,
    /// Relative reconstruction error allowed for an eigendecomposition.
    pub eig: f64,
    /// Eigenvalues at or below this contribute zero to entropies.
    pub log_eps: f64,
    /// Trace-preservation residual for channels.
    pub tp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-9,
            tr: 1e-9,
            norm: 1e-9,
            psd: 1e-10,
            eig: 1e-10,
            log_eps: 1e-15,
            tp: 1e-9,
        }
    }
}

/// Hard cap on any matrix dimension handled by the crate. Everything here is
/// dense; past this size the run would not finish at a desk anyway.
pub const DIM_CAP: usize = 4096;
