//! Ready-made desk-scale models and randomized generators for trials.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::equalizer::ParityCheckMatrix;
use crate::model::{Alphabet, EvidenceTable, FactorGraphModel, LocalBehaviour};
use crate::Result;

/// Two binary variables tied together, evidence `h_0 = (1, 2)`,
/// `h_1 = (1, 3)`. The smallest nontrivial instance.
pub fn repetition_model() -> FactorGraphModel {
    let alphabets = vec![Alphabet::binary(), Alphabet::binary()];
    let behaviours = vec![LocalBehaviour::new(vec![0, 1], vec![vec![0, 0], vec![1, 1]]).unwrap()];
    let evidence =
        vec![EvidenceTable::new(0, vec![1.0, 2.0]), EvidenceTable::new(1, vec![1.0, 3.0])];
    FactorGraphModel::new(alphabets, behaviours, evidence).unwrap()
}

/// Three binary variables with pairwise agreement checks around a cycle;
/// evidence `h_i = (1, e)` on every variable. Its global behaviour is the
/// two constant assignments.
pub fn triangle_model() -> FactorGraphModel {
    let alphabets = vec![Alphabet::binary(); 3];
    let pairs = [(0usize, 1usize), (1, 2), (0, 2)];
    let behaviours = pairs
        .iter()
        .map(|&(a, b)| LocalBehaviour::new(vec![a, b], vec![vec![0, 0], vec![1, 1]]).unwrap())
        .collect();
    let evidence =
        (0..3).map(|i| EvidenceTable::new(i, vec![1.0, std::f64::consts::E])).collect();
    FactorGraphModel::new(alphabets, behaviours, evidence).unwrap()
}

/// A chain of `len` binary variables where each neighbouring pair forbids
/// an ascent from 0 to 1; the valid configurations are the non-increasing
/// sequences. Uniform evidence on every variable.
pub fn chain_model(len: usize) -> FactorGraphModel {
    assert!(len >= 2, "chain needs at least two variables");
    let alphabets = vec![Alphabet::binary(); len];
    let behaviours = (0..len - 1)
        .map(|i| {
            LocalBehaviour::new(vec![i, i + 1], vec![vec![0, 0], vec![1, 0], vec![1, 1]]).unwrap()
        })
        .collect();
    let evidence = (0..len).map(|i| EvidenceTable::new(i, vec![1.0, 1.0])).collect();
    FactorGraphModel::new(alphabets, behaviours, evidence).unwrap()
}

/// Code-membership model of a binary parity-check matrix: one binary
/// variable per code bit, one behaviour per check row listing its
/// even-weight local tuples, and the supplied evidence tables.
pub fn parity_code_model(
    matrix: &ParityCheckMatrix,
    evidence: Vec<EvidenceTable>,
) -> Result<FactorGraphModel> {
    let alphabets = vec![Alphabet::binary(); matrix.num_bits()];
    let behaviours = (0..matrix.num_checks())
        .map(|j| {
            let support = matrix.row_support(j).to_vec();
            let tuples = even_weight_tuples(support.len());
            LocalBehaviour::new(support, tuples)
        })
        .collect::<Result<Vec<_>>>()?;
    FactorGraphModel::new(alphabets, behaviours, evidence)
}

/// All binary tuples of the given arity with even weight, in
/// lexicographic order.
pub fn even_weight_tuples(arity: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for bits in 0u32..(1 << arity) {
        if bits.count_ones() % 2 == 0 {
            out.push((0..arity).map(|k| ((bits >> (arity - 1 - k)) & 1) as usize).collect());
        }
    }
    out
}

/// Random strictly positive evidence for every variable of the model:
/// weights are `exp(z)` with `z` standard normal.
pub fn random_positive_evidence(model: &FactorGraphModel, rng: &mut impl Rng) -> Vec<EvidenceTable> {
    (0..model.num_vars())
        .map(|i| {
            let weights = (0..model.alphabet(i).size())
                .map(|_| {
                    let z: f64 = rand_distr::Distribution::sample(
                        &rand_distr::StandardNormal,
                        rng,
                    );
                    z.exp()
                })
                .collect();
            EvidenceTable::new(i, weights)
        })
        .collect()
}

/// Random tree-structured model: 2 to `max_vars` variables with alphabet
/// sizes 2 or 3, pairwise behaviours along a random spanning tree, and
/// random positive evidence on every variable. The behaviour tuples are
/// sampled so the global behaviour is never empty.
pub fn random_tree_model(seed: u64, max_vars: usize) -> FactorGraphModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(2..=max_vars.max(2));
        let alphabets: Vec<Alphabet> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Alphabet::binary()
                } else {
                    Alphabet::new(["0", "1", "2"]).unwrap()
                }
            })
            .collect();
        let mut behaviours = Vec::new();
        let mut ok = true;
        for child in 1..n {
            let parent = rng.gen_range(0..child);
            let na = alphabets[parent].size();
            let nb = alphabets[child].size();
            let mut allowed = Vec::new();
            for a in 0..na {
                for b in 0..nb {
                    if rng.gen_bool(0.6) {
                        allowed.push(vec![a, b]);
                    }
                }
            }
            if allowed.is_empty() {
                ok = false;
                break;
            }
            behaviours.push(LocalBehaviour::new(vec![parent, child], allowed).unwrap());
        }
        if !ok {
            continue;
        }
        let evidence: Vec<EvidenceTable> = (0..n)
            .map(|i| {
                let weights = (0..alphabets[i].size())
                    .map(|_| {
                        let z: f64 = rand_distr::Distribution::sample(
                            &rand_distr::StandardNormal,
                            &mut rng,
                        );
                        z.exp()
                    })
                    .collect();
                EvidenceTable::new(i, weights)
            })
            .collect();
        let model = match FactorGraphModel::new(alphabets, behaviours, evidence) {
            Ok(m) => m,
            Err(_) => continue,
        };
        match model.global_behaviour(crate::model::DEFAULT_ENUM_CAP) {
            Ok(b) if !b.is_empty() => return model,
            _ => continue,
        }
    }
}
