//! Flooding sum-product receiver on the same factor-graph models.
//!
//! Messages live in the log domain and are renormalized every update, so
//! underflow never bites even for long chains. Evidence enters exactly
//! once, as each variable's prior. On cycle-free models the beliefs
//! converge to the exact marginals within a number of iterations equal to
//! the graph diameter.

use crate::model::{Configuration, FactorGraphModel};
use crate::{Error, Result};

/// Iteration controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SpSettings {
    pub max_iterations: usize,
    /// Convex mixing of consecutive messages in the log domain, `[0, 1)`;
    /// zero disables damping.
    pub damping: f64,
    /// Convergence threshold on the largest probability-domain message
    /// change.
    pub tolerance: f64,
}

impl Default for SpSettings {
    fn default() -> Self {
        Self { max_iterations: 100, damping: 0.0, tolerance: 1e-10 }
    }
}

impl SpSettings {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Precondition("max_iterations must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::Precondition(format!(
                "damping must lie in [0, 1), got {}",
                self.damping
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Precondition("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Beliefs and hard decision of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SpOutput {
    /// Per-variable posterior estimates, each normalized to sum 1.
    pub beliefs: Vec<Vec<f64>>,
    /// Per-variable belief argmax, ties to the lowest symbol index.
    pub decision: Configuration,
    pub converged: bool,
    pub iterations: usize,
    /// True when the hard decision satisfies every behaviour.
    pub valid: bool,
}

/// Runs sum-product with priors taken from the model's evidence.
pub fn run_sum_product(model: &FactorGraphModel, settings: &SpSettings) -> Result<SpOutput> {
    let priors: Vec<Vec<f64>> = (0..model.num_vars())
        .map(|i| match model.evidence_weights(i) {
            Some(w) => w.iter().map(|x| x.ln()).collect(),
            None => vec![0.0; model.alphabet(i).size()],
        })
        .collect();
    run_sum_product_with_log_priors(model, &priors, settings)
}

/// Runs sum-product with caller-supplied log priors (any additive shift
/// per variable is immaterial).
pub fn run_sum_product_with_log_priors(
    model: &FactorGraphModel,
    log_priors: &[Vec<f64>],
    settings: &SpSettings,
) -> Result<SpOutput> {
    settings.validate()?;
    if log_priors.len() != model.num_vars() {
        return Err(Error::Dimension(format!(
            "{} prior tables for {} variables",
            log_priors.len(),
            model.num_vars()
        )));
    }
    for (i, p) in log_priors.iter().enumerate() {
        if p.len() != model.alphabet(i).size() {
            return Err(Error::Dimension(format!(
                "prior table of variable {i} has {} entries, alphabet has {}",
                p.len(),
                model.alphabet(i).size()
            )));
        }
    }

    let priors: Vec<Vec<f64>> = log_priors.iter().map(|p| normalize_log(p)).collect();

    // One message slot per (factor, scope position) and direction.
    let num_factors = model.behaviours().len();
    let mut var_to_factor: Vec<Vec<Vec<f64>>> = Vec::with_capacity(num_factors);
    let mut factor_to_var: Vec<Vec<Vec<f64>>> = Vec::with_capacity(num_factors);
    for b in model.behaviours() {
        let slots: Vec<Vec<f64>> =
            b.scope().iter().map(|&i| priors[i].clone()).collect();
        let zeros: Vec<Vec<f64>> = b
            .scope()
            .iter()
            .map(|&i| normalize_log(&vec![0.0; model.alphabet(i).size()]))
            .collect();
        var_to_factor.push(slots);
        factor_to_var.push(zeros);
    }

    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..settings.max_iterations {
        iterations += 1;
        let mut max_change: f64 = 0.0;

        // Factor-to-variable updates via prefix/suffix tuple sums, which
        // sidesteps subtracting minus-infinity contributions.
        for (j, b) in model.behaviours().iter().enumerate() {
            let arity = b.scope().len();
            let incoming = &var_to_factor[j];
            let mut fresh: Vec<Vec<f64>> = b
                .scope()
                .iter()
                .map(|&i| vec![f64::NEG_INFINITY; model.alphabet(i).size()])
                .collect();
            for tuple in b.allowed() {
                let mut prefix = vec![0.0; arity + 1];
                for p in 0..arity {
                    prefix[p + 1] = prefix[p] + incoming[p][tuple[p]];
                }
                let mut suffix = vec![0.0; arity + 1];
                for p in (0..arity).rev() {
                    suffix[p] = suffix[p + 1] + incoming[p][tuple[p]];
                }
                for p in 0..arity {
                    let without = prefix[p] + suffix[p + 1];
                    let slot = &mut fresh[p][tuple[p]];
                    *slot = log_add_exp(*slot, without);
                }
            }
            for (p, msg) in fresh.into_iter().enumerate() {
                let msg = normalize_log(&msg);
                let old = &factor_to_var[j][p];
                let mixed = mix(old, &msg, settings.damping);
                max_change = max_change.max(prob_distance(old, &mixed));
                factor_to_var[j][p] = mixed;
            }
        }

        // Variable-to-factor updates: prior plus all other factor inputs.
        for i in 0..model.num_vars() {
            let touching = model.behaviours_of(i);
            for &j in touching {
                let pos = model.behaviour(j).position_of(i).unwrap();
                let mut msg = priors[i].clone();
                for &k in touching {
                    if k == j {
                        continue;
                    }
                    let kpos = model.behaviour(k).position_of(i).unwrap();
                    for (sym, v) in factor_to_var[k][kpos].iter().enumerate() {
                        msg[sym] += v;
                    }
                }
                let msg = normalize_log(&msg);
                let old = &var_to_factor[j][pos];
                let mixed = mix(old, &msg, settings.damping);
                max_change = max_change.max(prob_distance(old, &mixed));
                var_to_factor[j][pos] = mixed;
            }
        }

        if max_change < settings.tolerance {
            converged = true;
            break;
        }
    }

    let mut beliefs = Vec::with_capacity(model.num_vars());
    let mut decision = Vec::with_capacity(model.num_vars());
    for i in 0..model.num_vars() {
        let mut log_belief = priors[i].clone();
        for &j in model.behaviours_of(i) {
            let pos = model.behaviour(j).position_of(i).unwrap();
            for (sym, v) in factor_to_var[j][pos].iter().enumerate() {
                log_belief[sym] += v;
            }
        }
        let probs = to_probabilities(&log_belief);
        let best = probs
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.partial_cmp(b).unwrap().then(ib.cmp(ia)))
            .map(|(idx, _)| idx)
            .unwrap_or(0);
        decision.push(best);
        beliefs.push(probs);
    }
    let decision = Configuration(decision);
    let valid = model.is_valid(&decision);
    Ok(SpOutput { beliefs, decision, converged, iterations, valid })
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn log_sum_exp(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, log_add_exp)
}

/// Shifts a log vector so its exponentials sum to one.
fn normalize_log(values: &[f64]) -> Vec<f64> {
    let z = log_sum_exp(values);
    if z == f64::NEG_INFINITY {
        return values.to_vec();
    }
    values.iter().map(|v| v - z).collect()
}

fn to_probabilities(log_values: &[f64]) -> Vec<f64> {
    let normalized = normalize_log(log_values);
    let probs: Vec<f64> = normalized.iter().map(|v| v.exp()).collect();
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        probs.iter().map(|p| p / total).collect()
    } else {
        vec![1.0 / probs.len() as f64; probs.len()]
    }
}

fn mix(old: &[f64], new: &[f64], damping: f64) -> Vec<f64> {
    if damping == 0.0 {
        return new.to_vec();
    }
    old.iter()
        .zip(new)
        .map(|(&o, &n)| {
            if o == f64::NEG_INFINITY || n == f64::NEG_INFINITY {
                n
            } else {
                damping * o + (1.0 - damping) * n
            }
        })
        .collect()
}

fn prob_distance(a: &[f64], b: &[f64]) -> f64 {
    let pa = to_probabilities(a);
    let pb = to_probabilities(b);
    pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Exact marginals by enumeration, the oracle for cycle-free tests.
pub fn brute_force_marginals(model: &FactorGraphModel, cap: u64) -> Result<Vec<Vec<f64>>> {
    let behaviour = model.global_behaviour(cap)?;
    if behaviour.is_empty() {
        return Err(Error::NoValidConfiguration);
    }
    let mut marginals: Vec<Vec<f64>> =
        (0..model.num_vars()).map(|i| vec![0.0; model.alphabet(i).size()]).collect();
    let mut total = 0.0;
    for cfg in &behaviour {
        let weight = model.global_function_value(cfg);
        total += weight;
        for (i, &sym) in cfg.0.iter().enumerate() {
            marginals[i][sym] += weight;
        }
    }
    for table in marginals.iter_mut() {
        for v in table.iter_mut() {
            *v /= total;
        }
    }
    Ok(marginals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{random_tree_model, repetition_model, triangle_model};
    use crate::model::{Alphabet, EvidenceTable, FactorGraphModel, LocalBehaviour, DEFAULT_ENUM_CAP};

    fn chain3() -> FactorGraphModel {
        let alphabets = vec![Alphabet::binary(); 3];
        let behaviours = vec![
            LocalBehaviour::new(vec![0, 1], vec![vec![0, 0], vec![0, 1], vec![1, 1]]).unwrap(),
            LocalBehaviour::new(vec![1, 2], vec![vec![0, 0], vec![1, 0], vec![1, 1]]).unwrap(),
        ];
        let evidence = vec![
            EvidenceTable::new(0, vec![1.0, 2.0]),
            EvidenceTable::new(1, vec![3.0, 1.0]),
            EvidenceTable::new(2, vec![1.0, 5.0]),
        ];
        FactorGraphModel::new(alphabets, behaviours, evidence).unwrap()
    }

    #[test]
    fn chain_beliefs_match_exact_marginals() {
        let m = chain3();
        let out = run_sum_product(&m, &SpSettings::default()).unwrap();
        assert!(out.converged);
        let exact = brute_force_marginals(&m, DEFAULT_ENUM_CAP).unwrap();
        for (belief, marginal) in out.beliefs.iter().zip(&exact) {
            for (b, e) in belief.iter().zip(marginal) {
                assert!((b - e).abs() < 1e-9, "belief {b} vs marginal {e}");
            }
        }
    }

    #[test]
    fn repetition_decodes_favoured_configuration() {
        let m = repetition_model();
        let out = run_sum_product(&m, &SpSettings::default()).unwrap();
        assert_eq!(out.decision, Configuration(vec![1, 1]));
        assert!(out.valid);
        let exact = brute_force_marginals(&m, DEFAULT_ENUM_CAP).unwrap();
        for (belief, marginal) in out.beliefs.iter().zip(&exact) {
            for (b, e) in belief.iter().zip(marginal) {
                assert!((b - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn uniform_evidence_yields_symmetric_beliefs() {
        let m = triangle_model()
            .with_evidence((0..3).map(|i| EvidenceTable::new(i, vec![1.0, 1.0])).collect())
            .unwrap();
        let out = run_sum_product(&m, &SpSettings::default()).unwrap();
        for belief in &out.beliefs {
            assert!((belief[0] - belief[1]).abs() < 1e-12);
        }
        for pair in out.beliefs.windows(2) {
            assert!((pair[0][0] - pair[1][0]).abs() < 1e-12);
        }
    }

    #[test]
    fn beliefs_normalize_on_random_trees() {
        for seed in 0..10 {
            let m = random_tree_model(seed, 7);
            let out = run_sum_product(&m, &SpSettings::default()).unwrap();
            for belief in &out.beliefs {
                let total: f64 = belief.iter().sum();
                assert!((total - 1.0).abs() < 1e-9);
            }
            let exact = brute_force_marginals(&m, DEFAULT_ENUM_CAP).unwrap();
            for (belief, marginal) in out.beliefs.iter().zip(&exact) {
                for (b, e) in belief.iter().zip(marginal) {
                    assert!((b - e).abs() < 1e-9, "seed {seed}: belief {b} vs marginal {e}");
                }
            }
        }
    }

    #[test]
    fn settings_are_validated() {
        let m = repetition_model();
        let bad = SpSettings { max_iterations: 0, ..SpSettings::default() };
        assert!(run_sum_product(&m, &bad).is_err());
        let bad = SpSettings { damping: 1.0, ..SpSettings::default() };
        assert!(run_sum_product(&m, &bad).is_err());
        let bad = SpSettings { tolerance: 0.0, ..SpSettings::default() };
        assert!(run_sum_product(&m, &bad).is_err());

        let damped = SpSettings { damping: 0.3, ..SpSettings::default() };
        let out = run_sum_product(&m, &damped).unwrap();
        assert_eq!(out.decision, Configuration(vec![1, 1]));
    }
}
