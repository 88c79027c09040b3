//! Joint equalization and decoding of parity-check coded BPSK over an
//! ISI channel.
//!
//! The receiver is posed two ways: an explicit program over per-check
//! tuple weights and per-section trellis edge weights (see [`lp`]), and
//! a generic factor-graph model (edge variables chained by state
//! consistency, parity enforced on their input-bit projections) that
//! plugs into the general pipeline. With matched cost tables the two
//! agree exactly up to the additive constant separating the reduced and
//! full cost scales.

mod code;
mod lp;
mod trellis;

pub use code::ParityCheckMatrix;
pub use lp::{
    build_explicit_equalizer_lp, explicit_catalog, run_explicit_receiver, ExplicitOutcome,
    ExplicitOutput,
};
pub use trellis::{
    bpsk, branch_metrics, build_trellis, noiseless_convolution, simulate_transmission,
    BranchMetrics, ChannelSpec, Transmission, Trellis,
};

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::lp::CostVectors;
use crate::model::{Alphabet, EvidenceTable, FactorGraphModel, LocalBehaviour};
use crate::rat::rational_from_f64;
use crate::sum_product::{run_sum_product_with_log_priors, SpSettings};
use crate::{Error, Result};

/// Largest check degree the explicit tuple materialization accepts.
pub const MAX_CHECK_DEGREE: usize = 8;

/// Builds the generic factor-graph model of the joint problem: one
/// variable per section with the trellis edge set as alphabet (the
/// all-zero edge first, making it the reference symbol), state
/// consistency between neighbours, parity on input-bit projections, and
/// per-edge likelihood evidence.
pub fn build_equalizer_model(
    matrix: &ParityCheckMatrix,
    channel: &ChannelSpec,
    received: &[f64],
) -> Result<FactorGraphModel> {
    let trellis = build_trellis(&channel.taps);
    let structure = equalizer_structure(matrix, &trellis)?;
    let metrics = branch_metrics(&trellis, received, channel.sigma2)?;
    let evidence = (0..matrix.num_bits())
        .map(|i| {
            let weights: Vec<f64> = (0..trellis.num_edges())
                .map(|e| (metrics.zero_edge[i] + metrics.reduced[i][e]).exp())
                .collect();
            if weights.iter().any(|&w| w == 0.0) {
                return Err(Error::Model(format!(
                    "per-edge likelihood underflowed to zero in section {i}; \
                     the noise variance is too small for the generic model"
                )));
            }
            Ok(EvidenceTable::new(i, weights))
        })
        .collect::<Result<Vec<_>>>()?;
    structure.with_evidence(evidence)
}

/// The generic model's structure with unit evidence; per-trial costs or
/// log priors are supplied separately.
pub fn equalizer_structure(
    matrix: &ParityCheckMatrix,
    trellis: &Trellis,
) -> Result<FactorGraphModel> {
    let n = matrix.num_bits();
    let edge_labels: Vec<String> =
        (0..trellis.num_edges()).map(|e| trellis.edge_label(e)).collect();
    let alphabets = vec![Alphabet::new(edge_labels.iter().cloned())?; n];

    let mut behaviours = Vec::new();
    // Chain of state-consistency pairs.
    for i in 0..n.saturating_sub(1) {
        let mut allowed = Vec::new();
        for d in 0..trellis.num_edges() {
            for d_next in 0..trellis.num_edges() {
                if trellis.end_state(d) == trellis.start_state(d_next) {
                    allowed.push(vec![d, d_next]);
                }
            }
        }
        behaviours.push(LocalBehaviour::new(vec![i, i + 1], allowed)?);
    }
    // Parity on input-bit projections.
    for j in 0..matrix.num_checks() {
        let support = matrix.row_support(j).to_vec();
        let k = support.len();
        if k > MAX_CHECK_DEGREE {
            return Err(Error::Precondition(format!(
                "check {j} has degree {k}, explicit tuples cap at {MAX_CHECK_DEGREE}"
            )));
        }
        let mut allowed = Vec::new();
        let mut stack = vec![0usize; k];
        'outer: loop {
            let parity: u32 =
                stack.iter().map(|&e| trellis.input(e) as u32).sum::<u32>() % 2;
            if parity == 0 {
                allowed.push(stack.clone());
            }
            let mut pos = k;
            loop {
                if pos == 0 {
                    break 'outer;
                }
                pos -= 1;
                stack[pos] += 1;
                if stack[pos] < trellis.num_edges() {
                    break;
                }
                stack[pos] = 0;
            }
        }
        behaviours.push(LocalBehaviour::new(support, allowed)?);
    }

    let evidence =
        (0..n).map(|i| EvidenceTable::new(i, vec![1.0; trellis.num_edges()])).collect();
    FactorGraphModel::new(alphabets, behaviours, evidence)
}

/// Exact rational cost tables for the generic model, matched to the
/// explicit program: the full-scale cost of edge `e` in section `i` is
/// the rationalized reduced metric plus the rationalized zero-edge
/// log-likelihood, so the two objectives differ by exactly the sum of
/// the zero-edge terms.
pub fn equalizer_cost_vectors(metrics: &BranchMetrics) -> Result<CostVectors> {
    let mut lambda = BTreeMap::new();
    for (i, row) in metrics.reduced.iter().enumerate() {
        let zero = rational_from_f64(metrics.zero_edge[i])?;
        let table = row
            .iter()
            .map(|&v| Ok(rational_from_f64(v)? + &zero))
            .collect::<Result<Vec<_>>>()?;
        lambda.insert(i, table);
    }
    Ok(CostVectors::from_tables(lambda))
}

/// The exact additive constant between the generic full-scale objective
/// and the explicit program's objective.
pub fn zero_edge_offset(metrics: &BranchMetrics) -> Result<BigRational> {
    let mut acc = BigRational::from_integer(0.into());
    for &z in &metrics.zero_edge {
        acc += rational_from_f64(z)?;
    }
    Ok(acc)
}

/// Exhaustive joint maximum-likelihood solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlSolution {
    pub codeword: Vec<u8>,
    pub pre_bits: Vec<u8>,
    /// Exact objective on the reduced metric scale (matches the explicit
    /// program's objective).
    pub objective: BigRational,
}

/// Maximizes the reduced-metric sum over all codewords and pre-block bit
/// patterns; ties break to the lexicographically first pair.
pub fn joint_ml_oracle(
    matrix: &ParityCheckMatrix,
    trellis: &Trellis,
    received: &[f64],
    sigma2: f64,
) -> Result<MlSolution> {
    let metrics = branch_metrics(trellis, received, sigma2)?;
    let memory = trellis.memory();
    let k = matrix.dimension();
    let hypotheses = (1u128 << k) << memory;
    if hypotheses > 1 << 20 {
        return Err(Error::EnumerationCap { size: hypotheses, cap: 1 << 20 });
    }
    let reduced: Vec<Vec<BigRational>> = metrics
        .reduced
        .iter()
        .map(|row| row.iter().map(|&v| rational_from_f64(v)).collect::<Result<_>>())
        .collect::<Result<_>>()?;

    let n = matrix.num_bits();
    let mut best: Option<MlSolution> = None;
    for codeword in matrix.codewords(1 << 20)? {
        for pattern in 0u32..(1 << memory) {
            let pre_bits: Vec<u8> =
                (0..memory).map(|t| ((pattern >> (memory - 1 - t)) & 1) as u8).collect();
            let bit_at = |idx: isize| -> u8 {
                if idx >= 1 {
                    codeword[(idx - 1) as usize]
                } else {
                    pre_bits[(-idx) as usize]
                }
            };
            let mut objective = BigRational::from_integer(0.into());
            for i in 1..=n as isize {
                let mut edge = 0usize;
                for t in 0..=memory {
                    edge |= (bit_at(i - t as isize) as usize) << t;
                }
                objective += &reduced[(i - 1) as usize][edge];
            }
            let better = match &best {
                None => true,
                Some(b) => objective > b.objective,
            };
            if better {
                best = Some(MlSolution { codeword: codeword.clone(), pre_bits, objective });
            }
        }
    }
    best.ok_or(Error::NoValidConfiguration)
}

/// One row of an error-rate sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRateRow {
    pub snr_db: f64,
    pub trials: usize,
    pub wer: f64,
    pub ber: f64,
    pub failure_rate: f64,
    pub ml_cert_rate: f64,
    pub sp_lp_agreement: f64,
}

struct TrialStat {
    word_error: bool,
    bit_errors: usize,
    failure: bool,
    certified: bool,
    sp_agrees: bool,
}

/// Monte-Carlo sweep of the explicit receiver over an SNR grid, with a
/// sum-product baseline run on the same factorization.
///
/// Word errors count failures and wrong codewords; a failed trial charges
/// all of its bits to the bit-error count. Agreement means the receiver
/// decoded a configuration and the baseline's hard decision carries the
/// same bits. Every trial draws from its own RNG stream derived from
/// `(seed, snr index, trial index)`, so results do not depend on
/// scheduling.
pub fn simulate_error_rates(
    matrix: &ParityCheckMatrix,
    taps: &[f64],
    snr_db_list: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ErrorRateRow>> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    if snr_db_list.is_empty() {
        return Err(Error::Precondition("at least one SNR point required".into()));
    }
    let trellis = build_trellis(taps);
    let structure = equalizer_structure(matrix, &trellis)?;
    let sp_settings = SpSettings::default();
    let n = matrix.num_bits();

    let mut rows = Vec::with_capacity(snr_db_list.len());
    for (snr_idx, &snr_db) in snr_db_list.iter().enumerate() {
        let sigma2 = ChannelSpec::sigma2_for_snr_db(taps, snr_db);
        let stats: Vec<TrialStat> = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<TrialStat> {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((snr_idx as u64) << 32) | trial as u64);
                let tx = trellis::simulate_transmission_with_rng(
                    matrix, taps, sigma2, None, &mut rng,
                )?;
                let metrics = branch_metrics(&trellis, &tx.received, sigma2)?;
                let output = run_explicit_receiver(matrix, &trellis, &metrics)?;

                let sp = run_sum_product_with_log_priors(
                    &structure,
                    &metrics.reduced,
                    &sp_settings,
                )?;
                let sp_bits: Vec<u8> =
                    sp.decision.0.iter().map(|&e| trellis.input(e)).collect();

                let (word_error, bit_errors, failure, sp_agrees) = match output.codeword() {
                    Some(bits) => {
                        let errs =
                            bits.iter().zip(&tx.codeword).filter(|(a, b)| a != b).count();
                        (errs > 0, errs, false, sp_bits == bits)
                    }
                    None => (true, n, true, false),
                };
                Ok(TrialStat {
                    word_error,
                    bit_errors,
                    failure,
                    certified: !failure,
                    sp_agrees,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let count = |f: &dyn Fn(&TrialStat) -> bool| stats.iter().filter(|s| f(s)).count();
        let bit_errors: usize = stats.iter().map(|s| s.bit_errors).sum();
        rows.push(ErrorRateRow {
            snr_db,
            trials,
            wer: count(&|s| s.word_error) as f64 / trials as f64,
            ber: bit_errors as f64 / (trials * n) as f64,
            failure_rate: count(&|s| s.failure) as f64 / trials as f64,
            ml_cert_rate: count(&|s| s.certified) as f64 / trials as f64,
            sp_lp_agreement: count(&|s| s.sp_agrees) as f64 / trials as f64,
        });
    }
    Ok(rows)
}

/// Bundled desk-scale codes and default taps.
pub mod codes {
    use super::ParityCheckMatrix;

    /// Length-3 cycle code: three pairwise parity checks.
    pub fn triangle() -> ParityCheckMatrix {
        ParityCheckMatrix::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    /// The (7,4) Hamming code in its standard parity-check form.
    pub fn hamming74() -> ParityCheckMatrix {
        ParityCheckMatrix::new(
            7,
            vec![vec![0, 2, 4, 6], vec![1, 2, 5, 6], vec![3, 4, 5, 6]],
        )
        .unwrap()
    }

    /// A (3,4)-regular length-20 LDPC code of girth 6, built from three
    /// mutually near-orthogonal partitions of the bit set (points
    /// `(a, b)` in `Z4 x Z5`, classes `b`, `b - a`, `b - 2a`).
    pub fn ldpc_20() -> ParityCheckMatrix {
        let point = |a: usize, b: usize| a * 5 + (b % 5);
        let mut rows = Vec::new();
        for c in 0..5 {
            rows.push((0..4).map(|a| point(a, c)).collect());
        }
        for c in 0..5 {
            rows.push((0..4).map(|a| point(a, c + a)).collect());
        }
        for c in 0..5 {
            rows.push((0..4).map(|a| point(a, c + 2 * a)).collect());
        }
        ParityCheckMatrix::new(20, rows).unwrap()
    }

    /// Default two-tap channel.
    pub fn default_taps_l1() -> Vec<f64> {
        vec![1.0, 0.5]
    }

    /// Default three-tap channel.
    pub fn default_taps_l2() -> Vec<f64> {
        vec![0.407, 0.815, 0.407]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_ENUM_CAP;

    #[test]
    fn ldpc20_is_regular_and_four_cycle_free() {
        let h = codes::ldpc_20();
        assert_eq!(h.num_bits(), 20);
        assert_eq!(h.num_checks(), 15);
        for j in 0..15 {
            assert_eq!(h.row_support(j).len(), 4);
        }
        for i in 0..20 {
            assert_eq!(h.checks_of(i).len(), 3);
        }
        assert!(!h.has_four_cycles());
        // Each parallel class sums to the all-ones vector, so two checks
        // are dependent and the code has dimension 20 - 13 = 7.
        assert_eq!(h.dimension(), 7);
        for basis_vec in h.null_space_basis() {
            assert!(h.is_codeword(&basis_vec));
        }
    }

    #[test]
    fn generic_model_enumerates_joint_hypotheses() {
        let h = codes::triangle();
        let channel = ChannelSpec::new(vec![1.0, 0.5], 1.0).unwrap();
        let tx = simulate_transmission(&h, &channel, None, 3).unwrap();
        let model = build_equalizer_model(&h, &channel, &tx.received).unwrap();
        let behaviour = model.global_behaviour(DEFAULT_ENUM_CAP).unwrap();
        // |C| * 2^L = 2 * 2 joint hypotheses.
        assert_eq!(behaviour.len(), 4);
        assert!(model.check_injectivity(DEFAULT_ENUM_CAP).unwrap());
    }

    #[test]
    fn oracle_recovers_noiseless_codeword() {
        let h = codes::hamming74();
        let trellis = build_trellis(&[1.0, 0.5]);
        let channel = ChannelSpec { taps: vec![1.0, 0.5], sigma2: 0.0 };
        let tx = simulate_transmission(&h, &channel, None, 11).unwrap();
        let ml = joint_ml_oracle(&h, &trellis, &tx.received, 1.0).unwrap();
        assert_eq!(ml.codeword, tx.codeword);
        assert_eq!(ml.pre_bits, tx.pre_bits);
    }

    #[test]
    fn oracle_on_single_codeword_code() {
        // Full-rank 3x3 identity-like system: only the zero codeword.
        let h = ParityCheckMatrix::new(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        let trellis = build_trellis(&[1.0, 0.5]);
        let ml = joint_ml_oracle(&h, &trellis, &[0.3, -0.2, 0.9], 1.0).unwrap();
        assert_eq!(ml.codeword, vec![0, 0, 0]);
    }

    #[test]
    fn sweep_is_deterministic_and_clean_at_high_snr() {
        let h = codes::triangle();
        let rows =
            simulate_error_rates(&h, &codes::default_taps_l1(), &[40.0], 20, 9).unwrap();
        assert_eq!(rows[0].wer, 0.0);
        assert_eq!(rows[0].failure_rate, 0.0);
        let again =
            simulate_error_rates(&h, &codes::default_taps_l1(), &[40.0], 20, 9).unwrap();
        assert_eq!(rows, again);

        assert!(simulate_error_rates(&h, &codes::default_taps_l1(), &[10.0], 0, 9).is_err());
    }
}
