//! Dense tableau simplex for matrix games.
//!
//! The payoff matrix is first mapped affinely onto `[1, 2]`, which leaves the
//! equilibria unchanged and makes every entry positive. The column player's
//! problem `max 1'y s.t. M y <= 1, y >= 0` then starts feasible at the slack
//! basis, and the row player's strategy is read off the reduced costs of the
//! slacks at the optimum. Pivoting follows Bland's rule, so the solver always
//! terminates and always returns the same equilibrium for the same matrix.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;

pub(crate) struct MatrixGameSolution {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    pub value: f64,
}

/// Solves `max_x min_y x' U y` for a row-major `rows x cols` matrix.
pub(crate) fn solve_matrix_game(u: &[f64], rows: usize, cols: usize) -> Result<MatrixGameSolution> {
    assert_eq!(u.len(), rows * cols);
    if rows == 0 || cols == 0 {
        return Err(Error::Shape("empty payoff matrix".into()));
    }
    if let Some(i) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    let min = u.iter().copied().fold(f64::INFINITY, f64::min);
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    if span == 0.0 {
        let mut row = vec![0.0; rows];
        let mut col = vec![0.0; cols];
        row[0] = 1.0;
        col[0] = 1.0;
        return Ok(MatrixGameSolution { row, col, value: min });
    }

    // Tableau: `rows` constraint rows then the objective row; columns are the
    // `cols` structural variables, `rows` slacks and the right-hand side.
    let width = cols + rows + 1;
    let rhs = width - 1;
    let mut t = vec![0.0; (rows + 1) * width];
    for i in 0..rows {
        for j in 0..cols {
            t[i * width + j] = (u[i * cols + j] - min) / span + 1.0;
        }
        t[i * width + cols + i] = 1.0;
        t[i * width + rhs] = 1.0;
    }
    let obj = rows * width;
    for j in 0..cols {
        t[obj + j] = -1.0;
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Bland's rule terminates, the cap only guards against numerical trouble.
    let max_pivots = 50 * (rows + cols) + 1000;
    let mut pivots = 0;
    loop {
        let Some(enter) = (0..cols + rows).find(|&j| t[obj + j] < -PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let a = t[i * width + enter];
            if a <= PIVOT_EPS {
                continue;
            }
            let ratio = t[i * width + rhs] / a;
            leave = match leave {
                None => Some((i, ratio)),
                Some((l, r)) => {
                    let tie = (ratio - r).abs() <= 1e-12 * r.abs().max(1.0);
                    if ratio < r && !tie || tie && basis[i] < basis[l] {
                        Some((i, ratio))
                    } else {
                        Some((l, r))
                    }
                }
            };
        }
        let Some((pr, _)) = leave else {
            return Err(Error::Numerical("matrix game LP reported unbounded".into()));
        };
        pivot(&mut t, width, rows + 1, pr, enter);
        basis[pr] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Numerical("simplex pivot limit exceeded".into()));
        }
    }

    let z = t[obj + rhs];
    if !(z > 0.0) {
        return Err(Error::Numerical(format!("degenerate LP objective {z}")));
    }
    let mut col = vec![0.0; cols];
    for (i, &b) in basis.iter().enumerate() {
        if b < cols {
            col[b] = t[i * width + rhs].max(0.0);
        }
    }
    let mut row: Vec<f64> = (0..rows).map(|i| t[obj + cols + i].max(0.0)).collect();
    normalize(&mut row)?;
    normalize(&mut col)?;
    let value = (1.0 / z - 1.0) * span + min;
    Ok(MatrixGameSolution { row, col, value })
}

fn normalize(v: &mut [f64]) -> Result<()> {
    let s: f64 = v.iter().sum();
    if !(s > 0.0) {
        return Err(Error::Numerical("simplex produced an empty strategy".into()));
    }
    v.iter_mut().for_each(|x| *x /= s);
    Ok(())
}

fn pivot(t: &mut [f64], width: usize, height: usize, pr: usize, pc: usize) {
    let p = t[pr * width + pc];
    for j in 0..width {
        t[pr * width + j] /= p;
    }
    t[pr * width + pc] = 1.0;
    let pivot_row: Vec<f64> = t[pr * width..(pr + 1) * width].to_vec();
    for i in 0..height {
        if i == pr {
            continue;
        }
        let f = t[i * width + pc];
        if f == 0.0 {
            continue;
        }
        let row = &mut t[i * width..(i + 1) * width];
        for (x, &pv) in row.iter_mut().zip(&pivot_row) {
            *x -= f * pv;
        }
        row[pc] = 0.0;
    }
}
