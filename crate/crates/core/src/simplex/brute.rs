//! Brute-force vertex enumeration for small programs.
//!
//! Enumerates every basic feasible solution by solving all square column
//! subsystems of an independent row set with rational Gaussian
//! elimination. Deliberately independent of the simplex path so it can
//! serve as its oracle.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::lp::{LinearProgram, LpPoint};
use crate::{Error, Result};

/// Hard cap on the number of column subsets to examine.
const SUBSET_BUDGET: u128 = 5_000_000;

/// All vertices (distinct basic feasible solutions) of the program, in
/// lexicographic coordinate order. Empty when the system is infeasible.
pub fn enumerate_vertices(program: &LinearProgram) -> Result<Vec<LpPoint>> {
    let n = program.num_vars();
    let m = program.num_rows();

    let mut dense: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    for row in &program.rows {
        let mut r = vec![BigRational::zero(); n + 1];
        for (idx, c) in &row.coeffs {
            r[*idx] = c.clone();
        }
        r[n] = row.rhs.clone();
        dense.push(r);
    }

    // Row reduction of the augmented system: find an independent row set
    // and detect inconsistency.
    let mut work = dense.clone();
    let mut independent_rows = Vec::new();
    let mut pivot_cols = Vec::new();
    for col in 0..n {
        let Some(pivot_row) = (0..work.len())
            .find(|&i| !independent_rows.contains(&i) && !work[i][col].is_zero())
        else {
            continue;
        };
        let pivot_val = work[pivot_row][col].clone();
        for v in work[pivot_row].iter_mut() {
            if !v.is_zero() {
                *v /= &pivot_val;
            }
        }
        for i in 0..work.len() {
            if i == pivot_row || work[i][col].is_zero() {
                continue;
            }
            let factor = work[i][col].clone();
            for j in 0..=n {
                let delta = &factor * &work[pivot_row][j];
                work[i][j] -= delta;
            }
        }
        independent_rows.push(pivot_row);
        pivot_cols.push(col);
    }
    for (i, row) in work.iter().enumerate() {
        if !independent_rows.contains(&i) && !row[n].is_zero() {
            return Ok(Vec::new());
        }
    }

    let rank = independent_rows.len();
    let rows: Vec<&Vec<BigRational>> = independent_rows.iter().map(|&i| &dense[i]).collect();

    if binomial(n as u128, rank as u128) > SUBSET_BUDGET {
        return Err(Error::Precondition(format!(
            "vertex enumeration over C({n},{rank}) subsets exceeds the budget"
        )));
    }

    let mut found: BTreeSet<Vec<BigRational>> = BTreeSet::new();
    if rank == 0 {
        found.insert(vec![BigRational::zero(); n]);
    } else {
        let mut subset: Vec<usize> = (0..rank).collect();
        loop {
            if let Some(solution) = solve_subsystem(&rows, &subset, n) {
                if solution.iter().all(|v| !v.is_negative()) {
                    found.insert(solution);
                }
            }
            // Next lexicographic combination of `rank` columns out of `n`.
            let mut i = rank;
            loop {
                if i == 0 {
                    subset.clear();
                    break;
                }
                i -= 1;
                if subset[i] < n - (rank - i) {
                    subset[i] += 1;
                    for k in i + 1..rank {
                        subset[k] = subset[k - 1] + 1;
                    }
                    break;
                }
            }
            if subset.is_empty() {
                break;
            }
        }
    }

    Ok(found
        .into_iter()
        .map(|values| LpPoint::new(program.catalog.clone(), values))
        .collect())
}

/// The vertex maximizing the cost, with its objective. `None` when the
/// program is infeasible.
pub fn best_vertex(program: &LinearProgram) -> Result<Option<(LpPoint, BigRational)>> {
    let mut best: Option<(LpPoint, BigRational)> = None;
    for point in enumerate_vertices(program)? {
        let value = program.objective_of(&point);
        match &best {
            Some((_, v)) if *v >= value => {}
            _ => best = Some((point, value)),
        }
    }
    Ok(best)
}

/// Solves `A_S x_S = b` over the chosen columns; `None` when singular.
fn solve_subsystem(
    rows: &[&Vec<BigRational>],
    subset: &[usize],
    n: usize,
) -> Option<Vec<BigRational>> {
    let r = subset.len();
    let mut mat: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|row| {
            let mut sub: Vec<BigRational> = subset.iter().map(|&c| row[c].clone()).collect();
            sub.push(row[n].clone());
            sub
        })
        .collect();

    for col in 0..r {
        let pivot_row = (col..r).find(|&i| !mat[i][col].is_zero())?;
        mat.swap(col, pivot_row);
        let pivot_val = mat[col][col].clone();
        for v in mat[col].iter_mut() {
            if !v.is_zero() {
                *v /= &pivot_val;
            }
        }
        for i in 0..r {
            if i == col || mat[i][col].is_zero() {
                continue;
            }
            let factor = mat[i][col].clone();
            for j in col..=r {
                let delta = &factor * &mat[col][j];
                mat[i][j] -= delta;
            }
        }
    }

    let mut solution = vec![BigRational::zero(); n];
    for (k, &col) in subset.iter().enumerate() {
        solution[col] = mat[k][r].clone();
    }
    Some(solution)
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{LpVar, Row, VarCatalog};
    use std::sync::Arc;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn enumerates_simplex_vertices() {
        let catalog = Arc::new(VarCatalog::new(
            (0..3).map(|var| LpVar::FullMarginal { var, sym: 0 }).collect(),
        ));
        let lp = LinearProgram::new(
            catalog,
            vec![ratio(1, 1), ratio(2, 1), ratio(3, 1)],
            vec![Row {
                coeffs: vec![(0, ratio(1, 1)), (1, ratio(1, 1)), (2, ratio(1, 1))],
                rhs: ratio(1, 1),
            }],
        );
        let vertices = enumerate_vertices(&lp).unwrap();
        assert_eq!(vertices.len(), 3);
        let (best, value) = best_vertex(&lp).unwrap().unwrap();
        assert_eq!(value, ratio(3, 1));
        assert_eq!(best.values[2], ratio(1, 1));
    }

    #[test]
    fn infeasible_gives_no_vertices() {
        let catalog = Arc::new(VarCatalog::new(vec![LpVar::FullMarginal { var: 0, sym: 0 }]));
        let lp = LinearProgram::new(
            catalog,
            vec![ratio(0, 1)],
            vec![
                Row { coeffs: vec![(0, ratio(1, 1))], rhs: ratio(1, 1) },
                Row { coeffs: vec![(0, ratio(1, 1))], rhs: ratio(0, 1) },
            ],
        );
        assert!(enumerate_vertices(&lp).unwrap().is_empty());
        assert!(best_vertex(&lp).unwrap().is_none());
    }
}
