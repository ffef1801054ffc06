//! Dense two-phase revised simplex for the certificate programs.
//!
//! The primal here is  max c·x  s.t.  A x ≤ b  with x free (x are the d²
//! real coordinates of a Hermitian matrix, rows of A come from pure-state
//! projectors). It is solved through its standard-form dual
//! min b·y  s.t.  Aᵀ y = c,  y ≥ 0, whose basis size is only d², and the
//! primal solution is read off the simplex multipliers at optimality.

use crate::error::{Error, Result};

const LP_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Primal coordinates (the Hermitian certificate).
    pub x: Vec<f64>,
    /// Optimal value c·x = b·y.
    pub value: f64,
    /// Indices of constraints with positive dual weight (active set support).
    pub support: Vec<usize>,
}

/// Solve max c·x s.t. A[j]·x ≤ b[j] for all j, x free.
pub fn solve_inequality_lp(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    assert_eq!(m, b.len());
    let n = c.len();
    assert!(a.iter().all(|row| row.len() == n));
    if m < n {
        return Err(Error::LpUnbounded);
    }

    // Standard-form dual: columns j < m are A[j] with cost b[j];
    // columns m..m+n are artificial ±e_k with cost used in phase 1.
    let art_sign: Vec<f64> = c
        .iter()
        .map(|&ck| if ck >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    let column = |j: usize, k: usize| -> f64 {
        if j < m {
            a[j][k]
        } else if j - m == k {
            art_sign[k]
        } else {
            0.0
        }
    };

    let mut basis: Vec<usize> = (m..m + n).collect();

    // Phase 1: minimize the artificial mass.
    let phase1_cost = |j: usize| -> f64 {
        if j < m {
            0.0
        } else {
            1.0
        }
    };
    run_simplex(m, n, &column, &phase1_cost, &mut basis, c)?;
    let y = basic_values(n, &column, &basis, c)?;
    let artificial_mass: f64 = basis
        .iter()
        .zip(&y)
        .filter(|(&j, _)| j >= m)
        .map(|(_, &v)| v.abs())
        .sum();
    if artificial_mass > 1e-7 {
        return Err(Error::LpUnbounded);
    }

    // Phase 2: minimize b·y; leftover artificials get zero cost and are
    // barred from re-entering (they are nonbasic or stuck at level zero).
    let phase2_cost = |j: usize| -> f64 {
        if j < m {
            b[j]
        } else {
            0.0
        }
    };
    run_simplex(m, n, &column, &phase2_cost, &mut basis, c)?;

    let pi = multipliers(n, &column, &phase2_cost, &basis)?;
    let y = basic_values(n, &column, &basis, c)?;
    // guard: constraints must be satisfied by the recovered primal point
    let mut value = 0.0;
    for (k, &ck) in c.iter().enumerate() {
        value += ck * pi[k];
    }
    let mut support: Vec<usize> = basis
        .iter()
        .zip(&y)
        .filter(|(&j, &v)| j < m && v > LP_TOL)
        .map(|(&j, _)| j)
        .collect();
    support.sort_unstable();
    Ok(LpSolution {
        x: pi,
        value,
        support,
    })
}

/// Dantzig pricing with a Bland fallback after long degenerate streaks.
fn run_simplex(
    m: usize,
    n: usize,
    column: &impl Fn(usize, usize) -> f64,
    cost: &impl Fn(usize) -> f64,
    basis: &mut [usize],
    rhs: &[f64],
) -> Result<()> {
    let max_iters = 20_000usize;
    let mut degenerate_streak = 0usize;
    for _ in 0..max_iters {
        let pi = multipliers(n, column, cost, basis)?;
        let bland = degenerate_streak > 40;
        // price nonbasic columns
        let mut enter: Option<(usize, f64)> = None;
        for j in 0..m {
            if basis.contains(&j) {
                continue;
            }
            let mut reduced = cost(j);
            for k in 0..n {
                reduced -= pi[k] * column(j, k);
            }
            if reduced < -LP_TOL {
                match (&enter, bland) {
                    (_, true) => {
                        enter = Some((j, reduced));
                        break;
                    }
                    (None, false) => enter = Some((j, reduced)),
                    (Some((_, best)), false) if reduced < *best => enter = Some((j, reduced)),
                    _ => {}
                }
            }
        }
        let Some((entering, _)) = enter else {
            return Ok(());
        };
        // direction of the entering column in the current basis
        let d = solve_basis(
            n,
            column,
            basis,
            (0..n).map(|k| column(entering, k)).collect(),
        )?;
        let y = basic_values(n, column, basis, rhs)?;
        let mut leave: Option<(usize, f64)> = None;
        for (k, &dk) in d.iter().enumerate() {
            if dk > PIVOT_TOL {
                let ratio = y[k].max(0.0) / dk;
                let replace = match &leave {
                    None => true,
                    Some((lk, lr)) => {
                        ratio < lr - 1e-12 || (ratio < lr + 1e-12 && basis[k] < basis[*lk])
                    }
                };
                if replace {
                    leave = Some((k, ratio));
                }
            }
        }
        let Some((leaving, ratio)) = leave else {
            // unbounded dual: the primal certificate problem is infeasible,
            // which cannot happen with entropy right-hand sides; treat as the
            // spanning failure it indicates
            return Err(Error::LpUnbounded);
        };
        if ratio < 1e-12 {
            degenerate_streak += 1;
        } else {
            degenerate_streak = 0;
        }
        basis[leaving] = entering;
    }
    Err(Error::LpUnbounded)
}

/// Solve Bᵀ π = cost_B.
fn multipliers(
    n: usize,
    column: &impl Fn(usize, usize) -> f64,
    cost: &impl Fn(usize) -> f64,
    basis: &[usize],
) -> Result<Vec<f64>> {
    // rows of the system: column(basis[i], ·) · π = cost(basis[i])
    let mut mat = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for (i, &j) in basis.iter().enumerate() {
        for k in 0..n {
            mat[i][k] = column(j, k);
        }
        rhs[i] = cost(j);
    }
    gauss_solve(mat, rhs)
}

/// Solve B y_B = target where B's columns are the basis columns.
fn solve_basis(
    n: usize,
    column: &impl Fn(usize, usize) -> f64,
    basis: &[usize],
    target: Vec<f64>,
) -> Result<Vec<f64>> {
    let mut mat = vec![vec![0.0; n]; n];
    for (i, &j) in basis.iter().enumerate() {
        for k in 0..n {
            mat[k][i] = column(j, k);
        }
    }
    gauss_solve(mat, target)
}

fn basic_values(
    n: usize,
    column: &impl Fn(usize, usize) -> f64,
    basis: &[usize],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    solve_basis(n, column, basis, rhs.to_vec())
}

/// Gaussian elimination with partial pivoting; errors on singular systems.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-13 {
            return Err(Error::RankDeficient);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}
