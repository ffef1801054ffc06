//! Bloch-sphere grid scan for qubit-input channels: a dense heuristic
//! reference for the minimum output entropy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::qmat::entropy::entropy_of_matrix;
use crate::qmat::state::PureState;

/// Grid scan result. `value` subtracts an observed-variation margin from the
/// grid minimum; it is a heuristic reference, not a certified bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridBound {
    pub value: f64,
    pub grid_min: f64,
    /// Largest output-entropy change between neighboring grid points.
    pub margin: f64,
    /// Number of polar divisions; the azimuthal count is twice this.
    pub resolution: usize,
    pub heuristic: bool,
    /// Grid point attaining the minimum.
    pub argmin: PureState,
}

/// Scan H(N(|φ⟩⟨φ|)) over a polar-azimuthal grid with `resolution` polar
/// steps (a 1° grid is resolution = 180).
pub fn qubit_grid_lower_bound(n: &KrausChannel, resolution: usize) -> Result<GridBound> {
    if n.d_in != 2 {
        return Err(Error::NonQubitInput(n.d_in));
    }
    let resolution = resolution.max(2);
    let azimuthal = 2 * resolution;
    let mut grid_min = f64::INFINITY;
    let mut margin: f64 = 0.0;
    let mut argmin = PureState::basis(2, 0);
    let mut previous_row: Vec<f64> = Vec::new();
    for i in 0..=resolution {
        let theta = std::f64::consts::PI * i as f64 / resolution as f64;
        let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let mut row = Vec::with_capacity(azimuthal);
        let mut prev_in_row = f64::NAN;
        for j in 0..azimuthal {
            let phi = std::f64::consts::TAU * j as f64 / azimuthal as f64;
            let amp = vec![
                Complex64::new(ct, 0.0),
                Complex64::new(st * phi.cos(), st * phi.sin()),
            ];
            let h = entropy_of_matrix(&n.apply_pure(&amp).hermitize())?;
            if h < grid_min {
                grid_min = h;
                argmin = PureState::from_trusted(amp, vec![2])?;
            }
            if !prev_in_row.is_nan() {
                margin = margin.max((h - prev_in_row).abs());
            }
            if let Some(&above) = previous_row.get(j) {
                margin = margin.max((h - above).abs());
            }
            prev_in_row = h;
            row.push(h);
        }
        previous_row = row;
    }
    Ok(GridBound {
        value: grid_min - margin,
        grid_min,
        margin,
        resolution,
        heuristic: true,
        argmin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{depolarizing_channel, identity_channel, random_channel};
    use crate::quantities::{min_output_entropy_seeded, OptimizerOptions};

    const H2_QUARTER: f64 = 0.811_278_124_459_132_9;

    #[test]
    fn identity_grid_is_zero() {
        let n = identity_channel(2).unwrap();
        let bound = qubit_grid_lower_bound(&n, 30).unwrap();
        assert!(bound.grid_min.abs() < 1e-12);
        assert!(bound.value.abs() < 1e-9);
    }

    #[test]
    fn depolarizing_grid_matches_closed_form() {
        let n = depolarizing_channel(0.5).unwrap();
        let bound = qubit_grid_lower_bound(&n, 180).unwrap();
        assert!((bound.grid_min - H2_QUARTER).abs() < 1e-6);
        assert!(bound.margin < 1e-9); // flat landscape
    }

    #[test]
    fn grid_never_beats_seeded_optimizer() {
        for seed in 0..4u64 {
            let n = random_channel(2, 2, 2, 900 + seed).unwrap();
            let bound = qubit_grid_lower_bound(&n, 45).unwrap();
            let opts = OptimizerOptions {
                restarts: 6,
                max_iters: 300,
                seed,
                ..Default::default()
            };
            let est = min_output_entropy_seeded(&n, &opts, &[bound.argmin.clone()]).unwrap();
            assert!(bound.grid_min >= est.value - 1e-9);
        }
    }

    #[test]
    fn rejects_non_qubit_input() {
        let n = random_channel(3, 2, 2, 7).unwrap();
        assert!(matches!(
            qubit_grid_lower_bound(&n, 10),
            Err(Error::NonQubitInput(3))
        ));
    }
}
