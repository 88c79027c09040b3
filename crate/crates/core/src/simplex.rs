//! Exact arbitrary-precision rational simplex for equality-form
//! nonnegative-variable maximization.
//!
//! Two-phase primal simplex. The entering column is the largest reduced
//! cost (lowest index on ties); after a run of degenerate pivots the
//! rule drops to Bland's lowest-index selection until the objective
//! moves again, which rules out cycling, so termination is guaranteed.
//! Ratio-test ties always resolve to the lowest basic-variable index.
//! All arithmetic is rational (an `i128` fast path promoting to big
//! integers on demand), so returned vertices satisfy every equality
//! exactly and the integrality test needs no tolerance. Given the fixed
//! variable ordering the solver is fully deterministic: the same program
//! yields the same basis and pivot count on every run.

use num_rational::BigRational;
use num_traits::Signed;

use crate::lp::{LinearProgram, LpPoint};
use crate::rat::is_zero_or_one;

pub mod brute;
mod rat128;

use rat128::Rat;

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// The objective grows without bound; the polytopes built in this
    /// crate are bounded, so this indicates a construction bug upstream.
    Unbounded,
}

/// Result of [`solve`].
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Optimal vertex, present when `status == Optimal`.
    pub point: Option<LpPoint>,
    /// Exact objective value at the vertex.
    pub objective: Option<BigRational>,
    /// Basic variable per remaining row, in row order.
    pub basis: Vec<usize>,
    /// Total pivots across both phases.
    pub pivot_count: usize,
}

/// True when every coordinate is exactly 0 or exactly 1.
pub fn is_integral(point: &LpPoint) -> bool {
    point.values.iter().all(is_zero_or_one)
}

/// Degenerate pivots tolerated before falling back to Bland's rule.
const STALL_LIMIT: usize = 24;

struct Tableau {
    /// Structural column count.
    n: usize,
    /// Body including artificial columns during phase 1.
    body: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    /// Basic variable per row.
    basic: Vec<usize>,
    /// Reduced costs of the current phase's objective.
    reduced: Vec<Rat>,
    objective: Rat,
    pivots: usize,
    /// Consecutive pivots without objective movement.
    stall: usize,
}

impl Tableau {
    fn num_rows(&self) -> usize {
        self.body.len()
    }

    fn num_cols(&self) -> usize {
        self.reduced.len()
    }

    /// Entering column: largest positive reduced cost, lowest index on
    /// ties; plain lowest-index (Bland) while stalled on degenerate
    /// pivots, which makes cycling impossible.
    fn entering(&self, allow: impl Fn(usize) -> bool) -> Option<usize> {
        if self.stall >= STALL_LIMIT {
            return (0..self.num_cols()).find(|&j| allow(j) && self.reduced[j].is_positive());
        }
        let mut best: Option<usize> = None;
        for j in 0..self.num_cols() {
            if !allow(j) || !self.reduced[j].is_positive() {
                continue;
            }
            best = match best {
                None => Some(j),
                Some(b) if self.reduced[j].cmp_value(&self.reduced[b]).is_gt() => Some(j),
                keep => keep,
            };
        }
        best
    }

    /// Ratio test: minimal `rhs/coeff` over positive coefficients, ties
    /// resolved to the lowest basic-variable index.
    fn leaving(&self, entering: usize) -> Option<usize> {
        let mut best: Option<(Rat, usize)> = None;
        for i in 0..self.num_rows() {
            let coeff = &self.body[i][entering];
            if !coeff.is_positive() {
                continue;
            }
            let ratio = self.rhs[i].div(coeff);
            best = match best {
                None => Some((ratio, i)),
                Some((r, row)) => match ratio.cmp_value(&r) {
                    std::cmp::Ordering::Less => Some((ratio, i)),
                    std::cmp::Ordering::Equal if self.basic[i] < self.basic[row] => {
                        Some((ratio, i))
                    }
                    _ => Some((r, row)),
                },
            };
        }
        best.map(|(_, row)| row)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        self.pivots += 1;
        let degenerate = self.rhs[row].is_zero();
        self.stall = if degenerate { self.stall + 1 } else { 0 };

        let pivot_val = self.body[row][col].clone();
        if !pivot_val.is_one() {
            for v in self.body[row].iter_mut() {
                if !v.is_zero() {
                    *v = v.div(&pivot_val);
                }
            }
            self.rhs[row] = self.rhs[row].div(&pivot_val);
        }
        // Only columns live in the pivot row participate in updates.
        let pivot_row = std::mem::take(&mut self.body[row]);
        let pivot_rhs = std::mem::replace(&mut self.rhs[row], Rat::zero());
        let cols: Vec<usize> =
            (0..self.num_cols()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for i in 0..self.num_rows() {
            if i == row || self.body[i][col].is_zero() {
                continue;
            }
            let factor = self.body[i][col].clone();
            eliminate(&mut self.body[i], &mut self.rhs[i], &pivot_row, &pivot_rhs, &factor, &cols);
        }
        let d = self.reduced[col].clone();
        if !d.is_zero() {
            let mut unused = Rat::zero();
            eliminate(&mut self.reduced, &mut unused, &pivot_row, &Rat::zero(), &d, &cols);
            self.objective = self.objective.add(&d.mul(&pivot_rhs));
        }
        self.body[row] = pivot_row;
        self.rhs[row] = pivot_rhs;
        self.basic[row] = col;
    }
}

/// `target -= factor * source` over the listed columns, with fast paths
/// for unit factors.
fn eliminate(
    target: &mut [Rat],
    target_rhs: &mut Rat,
    source: &[Rat],
    source_rhs: &Rat,
    factor: &Rat,
    cols: &[usize],
) {
    if factor.is_one() {
        for &j in cols {
            target[j] = target[j].sub(&source[j]);
        }
        *target_rhs = target_rhs.sub(source_rhs);
    } else if factor.is_neg_one() {
        for &j in cols {
            target[j] = target[j].add(&source[j]);
        }
        *target_rhs = target_rhs.add(source_rhs);
    } else {
        for &j in cols {
            target[j].sub_mul_assign(factor, &source[j]);
        }
        target_rhs.sub_mul_assign(factor, source_rhs);
    }
}

/// Solves an equality-form maximization program exactly.
pub fn solve(program: &LinearProgram) -> SolveResult {
    let n = program.num_vars();
    let m = program.num_rows();

    // Dense body with right-hand sides normalized nonnegative.
    let mut body: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for row in &program.rows {
        let mut dense = vec![Rat::zero(); n + m];
        for (idx, c) in &row.coeffs {
            assert!(*idx < n, "row references an uncataloged variable");
            dense[*idx] = Rat::from_big(c);
        }
        let mut b = Rat::from_big(&row.rhs);
        if b.is_negative() {
            b = b.neg();
            for v in dense.iter_mut() {
                if !v.is_zero() {
                    *v = v.neg();
                }
            }
        }
        body.push(dense);
        rhs.push(b);
    }
    // Artificial identity block and phase-1 reduced costs
    // (maximize minus the artificial sum).
    let mut reduced = vec![Rat::zero(); n + m];
    let mut objective = Rat::zero();
    for i in 0..m {
        body[i][n + i] = Rat::one();
        for (j, r) in reduced.iter_mut().enumerate().take(n) {
            if !body[i][j].is_zero() {
                *r = r.add(&body[i][j]);
            }
        }
        objective = objective.sub(&rhs[i]);
    }
    let mut tab = Tableau {
        n,
        body,
        rhs,
        basic: (n..n + m).collect(),
        reduced,
        objective,
        pivots: 0,
        stall: 0,
    };

    // Phase 1: artificials never re-enter once out.
    loop {
        let Some(col) = tab.entering(|j| j < n) else { break };
        let Some(row) = tab.leaving(col) else {
            // The phase-1 objective is bounded above by zero; no leaving
            // row cannot happen with consistent data.
            unreachable!("phase-1 objective cannot be unbounded");
        };
        tab.pivot(row, col);
    }
    if tab.objective.is_negative() {
        return SolveResult {
            status: SolveStatus::Infeasible,
            point: None,
            objective: None,
            basis: tab.basic,
            pivot_count: tab.pivots,
        };
    }

    // Drive remaining artificials out of the basis; rows where no
    // structural column is available are redundant and get dropped.
    let mut keep = vec![true; tab.num_rows()];
    for row in 0..tab.num_rows() {
        if tab.basic[row] < tab.n {
            continue;
        }
        match (0..tab.n).find(|&j| !tab.body[row][j].is_zero()) {
            Some(col) => tab.pivot(row, col),
            None => keep[row] = false,
        }
    }
    let mut next = 0;
    for row in 0..tab.num_rows() {
        if keep[row] {
            tab.body.swap(row, next);
            tab.rhs.swap(row, next);
            tab.basic.swap(row, next);
            next += 1;
        }
    }
    tab.body.truncate(next);
    tab.rhs.truncate(next);
    tab.basic.truncate(next);
    for dense in tab.body.iter_mut() {
        dense.truncate(n);
    }

    // Phase 2: original cost, reduced against the current basis.
    tab.reduced = program.cost.iter().map(Rat::from_big).collect();
    tab.objective = Rat::zero();
    tab.stall = 0;
    for i in 0..tab.num_rows() {
        let c = Rat::from_big(&program.cost[tab.basic[i]]);
        if c.is_zero() {
            continue;
        }
        for j in 0..n {
            if !tab.body[i][j].is_zero() {
                tab.reduced[j] = tab.reduced[j].sub(&c.mul(&tab.body[i][j]));
            }
        }
        tab.objective = tab.objective.add(&c.mul(&tab.rhs[i]));
    }
    loop {
        let Some(col) = tab.entering(|_| true) else { break };
        let Some(row) = tab.leaving(col) else {
            return SolveResult {
                status: SolveStatus::Unbounded,
                point: None,
                objective: None,
                basis: tab.basic,
                pivot_count: tab.pivots,
            };
        };
        tab.pivot(row, col);
    }

    let mut values = vec![BigRational::from_integer(0.into()); n];
    for (i, &b) in tab.basic.iter().enumerate() {
        values[b] = tab.rhs[i].to_big();
    }
    let point = LpPoint::new(program.catalog.clone(), values);
    let objective = program.objective_of(&point);
    debug_assert_eq!(objective, tab.objective.to_big());
    debug_assert!(point.values.iter().all(|v| !v.is_negative()));
    SolveResult {
        status: SolveStatus::Optimal,
        point: Some(point),
        objective: Some(objective),
        basis: tab.basic,
        pivot_count: tab.pivots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{LpVar, Row, VarCatalog};
    use std::sync::Arc;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn aux_catalog(n: usize) -> Arc<VarCatalog> {
        Arc::new(VarCatalog::new(
            (0..n).map(|var| LpVar::FullMarginal { var, sym: 0 }).collect(),
        ))
    }

    fn program(n: usize, cost: Vec<i64>, rows: Vec<(Vec<(usize, i64)>, i64)>) -> LinearProgram {
        LinearProgram::new(
            aux_catalog(n),
            cost.into_iter().map(|c| ratio(c, 1)).collect(),
            rows.into_iter()
                .map(|(coeffs, rhs)| Row {
                    coeffs: coeffs.into_iter().map(|(i, c)| (i, ratio(c, 1))).collect(),
                    rhs: ratio(rhs, 1),
                })
                .collect(),
        )
    }

    #[test]
    fn maximizes_simple_program() {
        let lp = program(2, vec![1, 0], vec![(vec![(0, 1), (1, 1)], 1)]);
        let sol = solve(&lp);
        assert_eq!(sol.status, SolveStatus::Optimal);
        let point = sol.point.unwrap();
        assert_eq!(point.values, vec![ratio(1, 1), ratio(0, 1)]);
        assert_eq!(sol.objective.unwrap(), ratio(1, 1));
    }

    #[test]
    fn detects_infeasibility() {
        let lp = program(1, vec![0], vec![(vec![(0, 1)], 1), (vec![(0, 1)], 0)]);
        assert_eq!(solve(&lp).status, SolveStatus::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        // x0 - x1 = 0 with cost on x0: both can grow together.
        let lp = program(2, vec![1, 0], vec![(vec![(0, 1), (1, -1)], 0)]);
        assert_eq!(solve(&lp).status, SolveStatus::Unbounded);
    }

    #[test]
    fn integrality_test_is_exact() {
        let catalog = aux_catalog(3);
        let p = LpPoint::new(catalog.clone(), vec![ratio(1, 1), ratio(0, 1), ratio(1, 1)]);
        assert!(is_integral(&p));
        let q = LpPoint::new(catalog.clone(), vec![ratio(1, 2), ratio(0, 1), ratio(1, 1)]);
        assert!(!is_integral(&q));
        let r = LpPoint::new(catalog, vec![ratio(1, 3), ratio(0, 1), ratio(1, 1)]);
        assert!(!is_integral(&r));
    }

    #[test]
    fn residuals_vanish_at_optimum() {
        let lp = program(
            3,
            vec![3, 2, 1],
            vec![(vec![(0, 1), (1, 1)], 1), (vec![(1, 1), (2, 1)], 1)],
        );
        let sol = solve(&lp);
        assert_eq!(sol.status, SolveStatus::Optimal);
        let point = sol.point.unwrap();
        assert!(lp.residuals(&point).iter().all(num_traits::Zero::is_zero));
    }

    #[test]
    fn deterministic_across_runs() {
        let lp = program(
            4,
            vec![2, 1, 1, 3],
            vec![(vec![(0, 1), (1, 1), (2, 1)], 1), (vec![(1, 1), (3, 1)], 1)],
        );
        let a = solve(&lp);
        let b = solve(&lp);
        assert_eq!(a.basis, b.basis);
        assert_eq!(a.pivot_count, b.pivot_count);
        assert_eq!(a.point.unwrap(), b.point.unwrap());
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        // Same constraint twice: phase 1 must drop the dependent row.
        let lp = program(
            2,
            vec![1, 1],
            vec![(vec![(0, 1), (1, 1)], 1), (vec![(0, 1), (1, 1)], 1)],
        );
        let sol = solve(&lp);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective.unwrap(), ratio(1, 1));
        assert_eq!(sol.basis.len(), 1);
    }

    #[test]
    fn fractional_data_is_handled_exactly() {
        // max x0 + x1 with x0/2 + x1/3 = 1 picks the better corner (0, 3).
        let lp = LinearProgram::new(
            aux_catalog(2),
            vec![ratio(1, 1), ratio(1, 1)],
            vec![Row {
                coeffs: vec![(0, ratio(1, 2)), (1, ratio(1, 3))],
                rhs: ratio(1, 1),
            }],
        );
        let sol = solve(&lp);
        let point = sol.point.unwrap();
        assert_eq!(point.values, vec![ratio(0, 1), ratio(3, 1)]);
    }

    #[test]
    fn agrees_with_vertex_enumeration_on_triangle_analysis_lp() {
        use crate::lp::{build_theoretical_q, CostVectors};
        use std::collections::BTreeMap;

        let m = crate::instances::triangle_model();
        // Rationalized cost (1, 1, -1) on symbol 1 of the three variables.
        let mut lambda = BTreeMap::new();
        lambda.insert(0, vec![ratio(0, 1), ratio(1, 1)]);
        lambda.insert(1, vec![ratio(0, 1), ratio(1, 1)]);
        lambda.insert(2, vec![ratio(0, 1), ratio(-1, 1)]);
        let costs = CostVectors::from_tables(lambda);
        let lp = build_theoretical_q(&m, &costs).unwrap();

        let sol = solve(&lp);
        assert_eq!(sol.status, SolveStatus::Optimal);
        let best = brute::best_vertex(&lp).unwrap().unwrap();
        assert_eq!(sol.objective.unwrap(), best.1);
        // The solver's vertex must be one of the enumerated vertices.
        let all = brute::enumerate_vertices(&lp).unwrap();
        assert!(all.contains(sol.point.as_ref().unwrap()));
    }

    #[test]
    fn oracle_agreement_on_random_small_programs() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;

        // Random +/-1 systems against the independent vertex enumerator.
        for seed in 0..20u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(3..7);
            let m = rng.gen_range(1..4);
            let cost: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
            let rows: Vec<(Vec<(usize, i64)>, i64)> = (0..m)
                .map(|_| {
                    let coeffs: Vec<(usize, i64)> = (0..n)
                        .filter_map(|j| {
                            let c = rng.gen_range(-1..=1i64);
                            (c != 0).then_some((j, c))
                        })
                        .collect();
                    (coeffs, rng.gen_range(0..=1i64))
                })
                .filter(|(coeffs, _)| !coeffs.is_empty())
                .collect();
            if rows.is_empty() {
                continue;
            }
            let lp = program(n, cost, rows);
            let sol = solve(&lp);
            match sol.status {
                SolveStatus::Optimal => {
                    let (_, best) = brute::best_vertex(&lp).unwrap().expect("oracle agrees");
                    assert_eq!(sol.objective.unwrap(), best, "seed {seed}");
                }
                SolveStatus::Infeasible => {
                    assert!(brute::enumerate_vertices(&lp).unwrap().is_empty(), "seed {seed}");
                }
                SolveStatus::Unbounded => {
                    // The enumerator cannot certify unboundedness; accepted.
                }
            }
        }
    }
}
