//! The explicit joint equalization-and-decoding program.
//!
//! Variables are per-check codeword-tuple weights and per-section trellis
//! edge weights; the redundant per-section marginals are eliminated and
//! the branch metrics charge the edge weights directly. Constraints are
//! the two normalization families, the code/trellis coupling through the
//! input-bit mass of each section, and state-flow conservation between
//! consecutive sections over the nonzero states.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::code::ParityCheckMatrix;
use super::trellis::{BranchMetrics, Trellis};
use crate::instances::even_weight_tuples;
use crate::lp::{LinearProgram, LpPoint, LpVar, Row, VarCatalog};
use crate::rat::rational_from_f64;
use crate::simplex::{self, SolveStatus};
use crate::{Error, Result};

/// Catalog layout: check tuple weights first (factor ids `0..m`), then
/// per-section edge weights (factor ids `m..m+n`).
pub fn explicit_catalog(matrix: &ParityCheckMatrix, trellis: &Trellis) -> Arc<VarCatalog> {
    let m = matrix.num_checks();
    let n = matrix.num_bits();
    let mut vars = Vec::new();
    for j in 0..m {
        let tuples = even_weight_tuples(matrix.row_support(j).len());
        for t in 0..tuples.len() {
            vars.push(LpVar::TupleWeight { factor: j, tuple: t });
        }
    }
    for i in 0..n {
        for edge in 0..trellis.num_edges() {
            vars.push(LpVar::TupleWeight { factor: m + i, tuple: edge });
        }
    }
    Arc::new(VarCatalog::new(vars))
}

/// Assembles the explicit program for the given branch metrics.
pub fn build_explicit_equalizer_lp(
    matrix: &ParityCheckMatrix,
    trellis: &Trellis,
    metrics: &BranchMetrics,
) -> Result<LinearProgram> {
    let m = matrix.num_checks();
    let n = matrix.num_bits();
    if metrics.reduced.len() != n {
        return Err(Error::Dimension(format!(
            "metrics cover {} sections, code has {n} bits",
            metrics.reduced.len()
        )));
    }
    let catalog = explicit_catalog(matrix, trellis);
    let idx = |var: &LpVar| catalog.index_of(var).expect("catalog covers all variables");

    let mut rows = Vec::new();

    // Per-check and per-section normalizations.
    for j in 0..m {
        let tuples = even_weight_tuples(matrix.row_support(j).len());
        let coeffs = (0..tuples.len())
            .map(|t| (idx(&LpVar::TupleWeight { factor: j, tuple: t }), BigRational::one()))
            .collect();
        rows.push(Row { coeffs, rhs: BigRational::one() });
    }
    for i in 0..n {
        let coeffs = (0..trellis.num_edges())
            .map(|e| (idx(&LpVar::TupleWeight { factor: m + i, tuple: e }), BigRational::one()))
            .collect();
        rows.push(Row { coeffs, rhs: BigRational::one() });
    }

    // Code/trellis coupling: the zero-input edge mass of section i equals
    // the zero-bit tuple mass at every check containing bit i.
    for i in 0..n {
        for j in matrix.checks_of(i) {
            let support = matrix.row_support(j);
            let pos = support.iter().position(|&b| b == i).unwrap();
            let tuples = even_weight_tuples(support.len());
            let mut coeffs = Vec::new();
            for e in 0..trellis.num_edges() {
                if trellis.input(e) == 0 {
                    coeffs.push((
                        idx(&LpVar::TupleWeight { factor: m + i, tuple: e }),
                        BigRational::one(),
                    ));
                }
            }
            for (t, tuple) in tuples.iter().enumerate() {
                if tuple[pos] == 0 {
                    coeffs.push((
                        idx(&LpVar::TupleWeight { factor: j, tuple: t }),
                        -BigRational::one(),
                    ));
                }
            }
            coeffs.sort_by_key(|(c, _)| *c);
            rows.push(Row { coeffs, rhs: BigRational::zero() });
        }
    }

    // State-flow conservation over the nonzero states.
    for i in 0..n.saturating_sub(1) {
        for state in 1..trellis.num_states() {
            let mut coeffs = Vec::new();
            for e in 0..trellis.num_edges() {
                if trellis.end_state(e) == state {
                    coeffs.push((
                        idx(&LpVar::TupleWeight { factor: m + i, tuple: e }),
                        BigRational::one(),
                    ));
                }
                if trellis.start_state(e) == state {
                    coeffs.push((
                        idx(&LpVar::TupleWeight { factor: m + i + 1, tuple: e }),
                        -BigRational::one(),
                    ));
                }
            }
            coeffs.sort_by_key(|(c, _)| *c);
            rows.push(Row { coeffs, rhs: BigRational::zero() });
        }
    }

    let mut cost = vec![BigRational::zero(); catalog.len()];
    for i in 0..n {
        for e in 1..trellis.num_edges() {
            cost[idx(&LpVar::TupleWeight { factor: m + i, tuple: e })] =
                rational_from_f64(metrics.reduced[i][e])?;
        }
    }
    Ok(LinearProgram::new(catalog, cost, rows))
}

/// Decoded result of an explicit-program solve.
#[derive(Debug, Clone, PartialEq)]
pub enum ExplicitOutcome {
    Codeword { bits: Vec<u8>, edges: Vec<usize> },
    Failure(LpPoint),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitOutput {
    pub outcome: ExplicitOutcome,
    pub objective: BigRational,
}

impl ExplicitOutput {
    pub fn codeword(&self) -> Option<&[u8]> {
        match &self.outcome {
            ExplicitOutcome::Codeword { bits, .. } => Some(bits),
            ExplicitOutcome::Failure(_) => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self.outcome, ExplicitOutcome::Failure(_))
    }
}

/// Solves the explicit program and decodes an integral vertex into the
/// codeword carried by the section edges.
pub fn run_explicit_receiver(
    matrix: &ParityCheckMatrix,
    trellis: &Trellis,
    metrics: &BranchMetrics,
) -> Result<ExplicitOutput> {
    let program = build_explicit_equalizer_lp(matrix, trellis, metrics)?;
    let solution = simplex::solve(&program);
    match solution.status {
        SolveStatus::Infeasible => return Err(Error::Infeasible),
        SolveStatus::Unbounded => return Err(Error::Unbounded),
        SolveStatus::Optimal => {}
    }
    let point = solution.point.expect("optimal solve carries a point");
    let objective = solution.objective.expect("optimal solve carries an objective");
    if !simplex::is_integral(&point) {
        return Ok(ExplicitOutput { outcome: ExplicitOutcome::Failure(point), objective });
    }

    let m = matrix.num_checks();
    let n = matrix.num_bits();
    let mut edges = Vec::with_capacity(n);
    for i in 0..n {
        let edge = (0..trellis.num_edges())
            .find(|&e| {
                point
                    .get(&LpVar::TupleWeight { factor: m + i, tuple: e })
                    .map(|v| v.is_one())
                    .unwrap_or(false)
            })
            .ok_or_else(|| {
                Error::InvalidConfiguration(format!(
                    "integral point has no unit edge mass in section {i}"
                ))
            })?;
        edges.push(edge);
    }
    let bits: Vec<u8> = edges.iter().map(|&e| trellis.input(e)).collect();
    if !matrix.is_codeword(&bits) {
        return Err(Error::InvalidConfiguration(
            "decoded bits violate a parity check (construction bug)".into(),
        ));
    }
    Ok(ExplicitOutput { outcome: ExplicitOutcome::Codeword { bits, edges }, objective })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equalizer::codes;
    use crate::equalizer::trellis::{branch_metrics, build_trellis};
    use crate::lp::LpVar;

    #[test]
    fn triangle_l1_variable_counts() {
        let h = codes::triangle();
        let trellis = build_trellis(&[1.0, 0.5]);
        let metrics = branch_metrics(&trellis, &[1.5, 1.5, 1.5], 1.0).unwrap();
        let lp = build_explicit_equalizer_lp(&h, &trellis, &metrics).unwrap();
        let q_vars = lp
            .catalog
            .vars()
            .iter()
            .filter(|v| matches!(v, LpVar::TupleWeight { factor, .. } if *factor >= 3))
            .count();
        let w_vars = lp.catalog.len() - q_vars;
        assert_eq!(q_vars, 12);
        assert_eq!(w_vars, 6);
    }

    #[test]
    fn memoryless_code_has_no_flow_rows() {
        // Single parity check over 3 bits, L = 0: rows are 1 check
        // normalization + 3 section normalizations + 3 couplings.
        let h = ParityCheckMatrix::new(3, vec![vec![0, 1, 2]]).unwrap();
        let trellis = build_trellis(&[1.0]);
        let metrics = branch_metrics(&trellis, &[1.0, -1.0, 1.0], 1.0).unwrap();
        let lp = build_explicit_equalizer_lp(&h, &trellis, &metrics).unwrap();
        assert_eq!(lp.num_rows(), 1 + 3 + 3);
    }

    #[test]
    fn hamming_l1_counts() {
        let h = codes::hamming74();
        let trellis = build_trellis(&[1.0, 0.5]);
        let metrics = branch_metrics(&trellis, &vec![1.5; 7], 1.0).unwrap();
        let lp = build_explicit_equalizer_lp(&h, &trellis, &metrics).unwrap();
        let q_vars = 7 * 4;
        let w_vars: usize = (0..3).map(|j| 1usize << (h.row_support(j).len() - 1)).sum();
        assert_eq!(lp.num_vars(), q_vars + w_vars);
        // 3 check + 7 section normalizations, one coupling per (bit, check)
        // incidence, one flow row per interior boundary.
        let incidences: usize = (0..7).map(|i| h.checks_of(i).len()).sum();
        assert_eq!(lp.num_rows(), 3 + 7 + incidences + 6);
    }

    #[test]
    fn noiseless_zero_word_decodes() {
        let h = codes::hamming74();
        let trellis = build_trellis(&[1.0, 0.5]);
        // All-zero codeword, zero pre-block: every sample sits at +1.5.
        let metrics = branch_metrics(&trellis, &vec![1.5; 7], 0.1).unwrap();
        let out = run_explicit_receiver(&h, &trellis, &metrics).unwrap();
        assert_eq!(out.codeword(), Some(&[0u8; 7][..]));
    }
}
