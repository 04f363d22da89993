use super::{EquilibriumReport, MixedStrategy, SIMPLEX_TOL};
use crate::error::{Error, Result};
use crate::resilience::PayoffMatrix;

const MAX_PIVOTS: usize = 100_000;

/// Optimum of `max cᵀx` s.t. `A x ≤ b`, `x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Shadow price of each constraint row.
    pub dual: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

/// Dense tableau simplex with Bland's rule. Requires `b ≥ 0` so the slack
/// basis is feasible from the start.
pub fn simplex_max(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let rows = a.len();
    let vars = c.len();
    if b.len() != rows {
        return Err(Error::Dimension { expected: rows, got: b.len() });
    }
    if let Some(row) = a.iter().find(|r| r.len() != vars) {
        return Err(Error::Dimension { expected: vars, got: row.len() });
    }
    if b.iter().any(|&x| x < 0.0) {
        return Err(Error::Solver("right-hand side must be non-negative".into()));
    }
    let width = vars + rows + 1;
    let rhs = width - 1;
    let mut t: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(k, (row, &bk))| {
            let mut line = vec![0.0; width];
            line[..vars].copy_from_slice(row);
            line[vars + k] = 1.0;
            line[rhs] = bk;
            line
        })
        .collect();
    let mut z = vec![0.0; width];
    for (zj, cj) in z.iter_mut().zip(c) {
        *zj = -cj;
    }
    let mut basis: Vec<usize> = (vars..vars + rows).collect();

    let mut pivots = 0;
    loop {
        let Some(enter) = (0..width - 1).find(|&j| z[j] < -SIMPLEX_TOL) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for (k, line) in t.iter().enumerate() {
            if line[enter] > SIMPLEX_TOL {
                let ratio = line[rhs] / line[enter];
                leave = match leave {
                    Some((best, r))
                        if r < ratio - SIMPLEX_TOL
                            || (ratio - r).abs() <= SIMPLEX_TOL && basis[best] < basis[k] =>
                    {
                        Some((best, r))
                    }
                    _ => Some((k, ratio)),
                };
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Degenerate("linear program is unbounded".into()));
        };
        pivot(&mut t, &mut z, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::Solver(format!("simplex exceeded {MAX_PIVOTS} pivots")));
        }
    }

    let mut x = vec![0.0; vars];
    for (k, &var) in basis.iter().enumerate() {
        if var < vars {
            x[var] = t[k][rhs];
        }
    }
    Ok(LpSolution {
        x,
        dual: z[vars..vars + rows].to_vec(),
        objective: z[rhs],
        pivots,
    })
}

fn pivot(t: &mut [Vec<f64>], z: &mut [f64], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (k, line) in t.iter_mut().enumerate() {
        if k != row && line[col] != 0.0 {
            let f = line[col];
            for (v, pv) in line.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
    let f = z[col];
    if f != 0.0 {
        for (v, pv) in z.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
    }
}

/// Exact zero-sum solution through the classical LP reduction.
///
/// With `B = M + c > 0`, the attacker program `max Σu` s.t. `Bᵀu ≤ 1` has
/// optimum `1/v_B`; its duals are the defender's scaled mix.
pub fn nash_exact(m: &PayoffMatrix) -> Result<EquilibriumReport> {
    let lowest = m.entries.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - lowest;
    let bt: Vec<Vec<f64>> = (0..m.cols())
        .map(|j| m.column(j).map(|x| x + shift).collect())
        .collect();
    let sol = simplex_max(&bt, &vec![1.0; m.cols()], &vec![1.0; m.rows()])?;
    if sol.objective <= 0.0 {
        return Err(Error::Degenerate("zero-sum program has no positive optimum".into()));
    }
    let attacker = MixedStrategy::from_weights(&sol.x);
    let defender = MixedStrategy::from_weights(&sol.dual);
    EquilibriumReport::assemble(m, "nash", attacker, defender, sol.pivots, true)
}
