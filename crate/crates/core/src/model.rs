//! Factor-graph problem instances and brute-force oracles.
//!
//! A [`FactorGraphModel`] holds finite per-variable alphabets, explicit
//! local behaviours (the allowed tuples of each non-pendant indicator
//! factor), and merged pendant evidence tables with strictly positive
//! weights. Variables carrying evidence form the set `Y`; only they
//! contribute to the optimization cost. The oracles in this module
//! enumerate the global behaviour directly and are the ground truth the
//! LP pipeline is certified against.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::rat::rational_from_f64;
use crate::{Error, Result};

/// Default cap on configuration-space enumeration (`2^24`).
pub const DEFAULT_ENUM_CAP: u64 = 1 << 24;

/// Ordered finite symbol set of one variable.
///
/// The symbol at index 0 doubles as the variable's reference element for
/// the reduced formulations, so the ordering is part of the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    /// Builds an alphabet from distinct labels; at least two are required.
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::Model(format!(
                "alphabet needs at least 2 symbols, got {}",
                labels.len()
            )));
        }
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::Model("alphabet labels must be distinct".into()));
        }
        Ok(Self { labels })
    }

    /// Convenience binary alphabet `["0", "1"]`.
    pub fn binary() -> Self {
        Self { labels: vec!["0".into(), "1".into()] }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, sym: usize) -> &str {
        &self.labels[sym]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Allowed tuples of one non-pendant indicator factor.
///
/// `scope` lists the variable ids the factor touches, and each allowed
/// tuple assigns a symbol index per scope position. Tuples are kept
/// sorted lexicographically so downstream variable catalogs are
/// reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalBehaviour {
    scope: Vec<usize>,
    allowed: Vec<Vec<usize>>,
}

impl LocalBehaviour {
    pub fn new(scope: Vec<usize>, mut allowed: Vec<Vec<usize>>) -> Result<Self> {
        if scope.is_empty() {
            return Err(Error::Model("behaviour scope is empty".into()));
        }
        let distinct: BTreeSet<usize> = scope.iter().copied().collect();
        if distinct.len() != scope.len() {
            return Err(Error::Model("behaviour scope repeats a variable".into()));
        }
        if allowed.is_empty() {
            return Err(Error::Model("behaviour allows no tuples".into()));
        }
        for tuple in &allowed {
            if tuple.len() != scope.len() {
                return Err(Error::Model(format!(
                    "allowed tuple arity {} does not match scope arity {}",
                    tuple.len(),
                    scope.len()
                )));
            }
        }
        allowed.sort();
        allowed.dedup();
        Ok(Self { scope, allowed })
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    /// Allowed tuples in lexicographic order.
    pub fn allowed(&self) -> &[Vec<usize>] {
        &self.allowed
    }

    /// Position of variable `var` within the scope, if present.
    pub fn position_of(&self, var: usize) -> Option<usize> {
        self.scope.iter().position(|&v| v == var)
    }

    pub fn permits(&self, tuple: &[usize]) -> bool {
        self.allowed.binary_search_by(|t| t.as_slice().cmp(tuple)).is_ok()
    }
}

/// Merged pendant evidence for one variable: a strictly positive weight
/// per symbol of that variable's alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceTable {
    pub var: usize,
    pub weights: Vec<f64>,
}

impl EvidenceTable {
    pub fn new(var: usize, weights: Vec<f64>) -> Self {
        Self { var, weights }
    }
}

/// A full assignment of symbol indices, one per variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration(pub Vec<usize>);

impl Configuration {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Renders the configuration with the model's symbol labels.
    pub fn display<'a>(&'a self, model: &'a FactorGraphModel) -> ConfigurationDisplay<'a> {
        ConfigurationDisplay { cfg: self, model }
    }
}

pub struct ConfigurationDisplay<'a> {
    cfg: &'a Configuration,
    model: &'a FactorGraphModel,
}

impl fmt::Display for ConfigurationDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &sym) in self.cfg.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", self.model.alphabet(i).label(sym))?;
        }
        Ok(())
    }
}

/// An immutable factor-graph problem instance.
///
/// Construction validates the structural invariants once; afterwards the
/// model is freely shareable across threads and all operations on it are
/// pure.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraphModel {
    names: Vec<String>,
    alphabets: Vec<Alphabet>,
    behaviours: Vec<LocalBehaviour>,
    evidence: Vec<EvidenceTable>,
    /// Behaviour ids touching each variable, ascending.
    behaviours_of: Vec<Vec<usize>>,
    /// Evidence table index per variable (`None` outside `Y`).
    evidence_of: Vec<Option<usize>>,
}

impl FactorGraphModel {
    /// Builds and validates a model with default variable names `x0..`.
    pub fn new(
        alphabets: Vec<Alphabet>,
        behaviours: Vec<LocalBehaviour>,
        evidence: Vec<EvidenceTable>,
    ) -> Result<Self> {
        let names = (0..alphabets.len()).map(|i| format!("x{i}")).collect();
        Self::with_names(names, alphabets, behaviours, evidence)
    }

    /// Builds and validates a model with explicit variable names.
    pub fn with_names(
        names: Vec<String>,
        alphabets: Vec<Alphabet>,
        behaviours: Vec<LocalBehaviour>,
        evidence: Vec<EvidenceTable>,
    ) -> Result<Self> {
        let n = alphabets.len();
        if n == 0 {
            return Err(Error::Model("model has no variables".into()));
        }
        if names.len() != n {
            return Err(Error::Model("one name per variable required".into()));
        }
        {
            let distinct: BTreeSet<&String> = names.iter().collect();
            if distinct.len() != n {
                return Err(Error::Model("variable names must be distinct".into()));
            }
        }

        let mut behaviours_of = vec![Vec::new(); n];
        for (j, b) in behaviours.iter().enumerate() {
            for (pos, &i) in b.scope().iter().enumerate() {
                if i >= n {
                    return Err(Error::Model(format!(
                        "behaviour {j} references unknown variable {i}"
                    )));
                }
                for tuple in b.allowed() {
                    if tuple[pos] >= alphabets[i].size() {
                        return Err(Error::Model(format!(
                            "behaviour {j} tuple entry {} is outside the alphabet of variable {i}",
                            tuple[pos]
                        )));
                    }
                }
                behaviours_of[i].push(j);
            }
        }

        let mut evidence_of = vec![None; n];
        for (e, tab) in evidence.iter().enumerate() {
            let i = tab.var;
            if i >= n {
                return Err(Error::Model(format!("evidence references unknown variable {i}")));
            }
            if evidence_of[i].is_some() {
                return Err(Error::Model(format!(
                    "variable {i} has more than one evidence table; merge pendant factors first"
                )));
            }
            if tab.weights.len() != alphabets[i].size() {
                return Err(Error::Model(format!(
                    "evidence for variable {i} has {} weights, alphabet has {}",
                    tab.weights.len(),
                    alphabets[i].size()
                )));
            }
            for (sym, &w) in tab.weights.iter().enumerate() {
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::Model(format!(
                        "evidence weight for variable {i}, symbol {sym} must be positive and finite, got {w}"
                    )));
                }
            }
            evidence_of[i] = Some(e);
        }

        if evidence.is_empty() {
            return Err(Error::Model(
                "no evidence: at least one variable must carry observations".into(),
            ));
        }

        // A hidden variable must touch a behaviour (otherwise it has no
        // anchor); an evidence variable may be behaviour-free.
        for i in 0..n {
            if behaviours_of[i].is_empty() && evidence_of[i].is_none() {
                return Err(Error::Model(format!(
                    "variable {i} appears in no behaviour and carries no evidence"
                )));
            }
        }

        Ok(Self { names, alphabets, behaviours, evidence, behaviours_of, evidence_of })
    }

    /// Same structure with replaced evidence tables.
    pub fn with_evidence(&self, evidence: Vec<EvidenceTable>) -> Result<Self> {
        Self::with_names(
            self.names.clone(),
            self.alphabets.clone(),
            self.behaviours.clone(),
            evidence,
        )
    }

    pub fn num_vars(&self) -> usize {
        self.alphabets.len()
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var]
    }

    pub fn alphabet(&self, var: usize) -> &Alphabet {
        &self.alphabets[var]
    }

    pub fn behaviours(&self) -> &[LocalBehaviour] {
        &self.behaviours
    }

    pub fn behaviour(&self, j: usize) -> &LocalBehaviour {
        &self.behaviours[j]
    }

    pub fn evidence(&self) -> &[EvidenceTable] {
        &self.evidence
    }

    /// Behaviour ids touching variable `i`, ascending.
    pub fn behaviours_of(&self, var: usize) -> &[usize] {
        &self.behaviours_of[var]
    }

    /// True when the variable carries evidence (is in `Y`).
    pub fn has_evidence(&self, var: usize) -> bool {
        self.evidence_of[var].is_some()
    }

    /// Evidence weight table of a variable in `Y`.
    pub fn evidence_weights(&self, var: usize) -> Option<&[f64]> {
        self.evidence_of[var].map(|e| self.evidence[e].weights.as_slice())
    }

    /// Variables in `Y`, ascending.
    pub fn evidence_vars(&self) -> Vec<usize> {
        (0..self.num_vars()).filter(|&i| self.has_evidence(i)).collect()
    }

    /// Anchor behaviour of a hidden variable: the lowest behaviour id
    /// touching it. `None` for variables carrying evidence.
    pub fn anchor(&self, var: usize) -> Option<usize> {
        if self.has_evidence(var) {
            None
        } else {
            self.behaviours_of[var].first().copied()
        }
    }

    /// Size of the configuration space, or `None` on overflow.
    pub fn configuration_space_size(&self) -> Option<u128> {
        self.alphabets.iter().try_fold(1u128, |acc, a| acc.checked_mul(a.size() as u128))
    }

    fn check_enum_cap(&self, cap: u64) -> Result<()> {
        match self.configuration_space_size() {
            Some(size) if size <= cap as u128 => Ok(()),
            Some(size) => Err(Error::EnumerationCap { size, cap }),
            None => Err(Error::EnumerationCap { size: u128::MAX, cap }),
        }
    }

    /// True when `x` satisfies every local behaviour.
    pub fn is_valid(&self, x: &Configuration) -> bool {
        if x.0.len() != self.num_vars() {
            return false;
        }
        self.behaviours.iter().all(|b| {
            let local: Vec<usize> = b.scope().iter().map(|&i| x.0[i]).collect();
            b.permits(&local)
        })
    }

    /// Enumerates the global behaviour in lexicographic order of symbol
    /// indices (first variable most significant).
    pub fn global_behaviour(&self, cap: u64) -> Result<Vec<Configuration>> {
        self.check_enum_cap(cap)?;
        let n = self.num_vars();
        let mut out = Vec::new();
        let mut current = vec![0usize; n];
        loop {
            let cfg = Configuration(current.clone());
            if self.is_valid(&cfg) {
                out.push(cfg);
            }
            // Odometer step, last variable fastest.
            let mut pos = n;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                current[pos] += 1;
                if current[pos] < self.alphabets[pos].size() {
                    break;
                }
                current[pos] = 0;
            }
        }
    }

    /// Value of the global function at `x`: the product of evidence
    /// weights when `x` is valid, zero otherwise.
    pub fn global_function_value(&self, x: &Configuration) -> f64 {
        if !self.is_valid(x) {
            return 0.0;
        }
        let mut prod = 1.0;
        for i in 0..self.num_vars() {
            if let Some(w) = self.evidence_weights(i) {
                prod *= w[x.0[i]];
            }
        }
        prod
    }

    /// Exact rational log-score of a configuration: the sum over evidence
    /// variables of the rationalized `ln h_i(x_i)` doubles. This is the
    /// cost scale shared with the LP pipeline, so comparisons against LP
    /// objectives are exact.
    pub fn log_score(&self, x: &Configuration) -> Result<BigRational> {
        let mut acc = BigRational::from_integer(0.into());
        for i in 0..self.num_vars() {
            if let Some(w) = self.evidence_weights(i) {
                acc += rational_from_f64(w[x.0[i]].ln())?;
            }
        }
        Ok(acc)
    }

    /// Exhaustive maximizer of the global function over the global
    /// behaviour; ties break to the lexicographically smallest
    /// configuration. Scores are compared exactly in rational arithmetic.
    pub fn brute_force_optimum(&self, cap: u64) -> Result<Configuration> {
        let behaviour = self.global_behaviour(cap)?;
        let mut best: Option<(Configuration, BigRational)> = None;
        for cfg in behaviour {
            let score = self.log_score(&cfg)?;
            match &best {
                Some((_, s)) if *s >= score => {}
                _ => best = Some((cfg, score)),
            }
        }
        best.map(|(cfg, _)| cfg).ok_or(Error::NoValidConfiguration)
    }

    /// True when no two distinct valid configurations agree on every
    /// evidence variable.
    pub fn check_injectivity(&self, cap: u64) -> Result<bool> {
        let behaviour = self.global_behaviour(cap)?;
        let evars = self.evidence_vars();
        let mut seen = BTreeSet::new();
        for cfg in &behaviour {
            let proj: Vec<usize> = evars.iter().map(|&i| cfg.0[i]).collect();
            if !seen.insert(proj) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The unique valid configuration with the given evidence-variable
    /// projection, when the model is injective.
    pub fn lift_evidence_projection(&self, proj: &[usize], cap: u64) -> Result<Configuration> {
        let evars = self.evidence_vars();
        if proj.len() != evars.len() {
            return Err(Error::Dimension(format!(
                "projection has {} entries, evidence set has {}",
                proj.len(),
                evars.len()
            )));
        }
        let behaviour = self.global_behaviour(cap)?;
        behaviour
            .into_iter()
            .find(|cfg| evars.iter().zip(proj).all(|(&i, &s)| cfg.0[i] == s))
            .ok_or_else(|| {
                Error::InvalidConfiguration("no valid configuration matches the projection".into())
            })
    }

    /// Natural-log evidence vectors: the full table over `(i in Y, sym)`
    /// and the reduced table over `(i in Y, sym != 0)` relative to each
    /// variable's reference symbol.
    pub fn log_evidence_vectors(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut full = Vec::new();
        let mut reduced = Vec::new();
        for i in 0..self.num_vars() {
            if let Some(w) = self.evidence_weights(i) {
                let logs: Vec<f64> = w.iter().map(|x| x.ln()).collect();
                let base = logs[0];
                reduced.push(logs[1..].iter().map(|l| l - base).collect());
                full.push(logs);
            }
        }
        (full, reduced)
    }
}

// ---------------------------------------------------------------------------
// JSON model file
// ---------------------------------------------------------------------------

/// On-disk JSON schema. Weights are decimal strings parsed to doubles.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub variables: Vec<VariableEntry>,
    pub behaviours: Vec<BehaviourEntry>,
    pub evidence: Vec<EvidenceEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableEntry {
    pub id: String,
    pub alphabet: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviourEntry {
    pub scope: Vec<String>,
    pub allowed: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceEntry {
    pub id: String,
    pub weights: std::collections::BTreeMap<String, String>,
}

impl FactorGraphModel {
    /// Parses and validates the JSON model format.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("model JSON: {e}")))?;
        Self::from_file(file)
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        let mut names = Vec::new();
        let mut alphabets = Vec::new();
        for v in &file.variables {
            names.push(v.id.clone());
            alphabets.push(Alphabet::new(v.alphabet.iter().cloned())?);
        }
        let var_index = |id: &str| -> Result<usize> {
            names
                .iter()
                .position(|n| n == id)
                .ok_or_else(|| Error::Model(format!("unknown variable id {id:?}")))
        };

        let mut behaviours = Vec::new();
        for (bi, b) in file.behaviours.iter().enumerate() {
            let scope: Vec<usize> = b.scope.iter().map(|id| var_index(id)).collect::<Result<_>>()?;
            let mut allowed = Vec::new();
            for tuple in &b.allowed {
                if tuple.len() != scope.len() {
                    return Err(Error::Model(format!(
                        "behaviour {bi}: tuple arity {} does not match scope arity {}",
                        tuple.len(),
                        scope.len()
                    )));
                }
                let mut t = Vec::new();
                for (pos, label) in tuple.iter().enumerate() {
                    let var = scope[pos];
                    let sym = alphabets[var].index_of(label).ok_or_else(|| {
                        Error::Model(format!(
                            "behaviour {bi}: symbol {label:?} is not in the alphabet of {:?}",
                            names[var]
                        ))
                    })?;
                    t.push(sym);
                }
                allowed.push(t);
            }
            behaviours.push(LocalBehaviour::new(scope, allowed)?);
        }

        let mut evidence = Vec::new();
        for e in &file.evidence {
            let var = var_index(&e.id)?;
            let alphabet = &alphabets[var];
            let mut weights = vec![f64::NAN; alphabet.size()];
            for (label, text) in &e.weights {
                let sym = alphabet.index_of(label).ok_or_else(|| {
                    Error::Model(format!(
                        "evidence for {:?}: symbol {label:?} is not in its alphabet",
                        e.id
                    ))
                })?;
                weights[sym] = text.parse::<f64>().map_err(|_| {
                    Error::Parse(format!("evidence weight {text:?} for {:?} is not a decimal", e.id))
                })?;
            }
            if weights.iter().any(|w| w.is_nan()) {
                return Err(Error::Model(format!(
                    "evidence for {:?} must cover the whole alphabet",
                    e.id
                )));
            }
            evidence.push(EvidenceTable::new(var, weights));
        }

        Self::with_names(names, alphabets, behaviours, evidence)
    }

    /// Serializes the model back into the JSON file schema.
    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            variables: (0..self.num_vars())
                .map(|i| VariableEntry {
                    id: self.names[i].clone(),
                    alphabet: self.alphabets[i].labels().to_vec(),
                })
                .collect(),
            behaviours: self
                .behaviours
                .iter()
                .map(|b| BehaviourEntry {
                    scope: b.scope().iter().map(|&i| self.names[i].clone()).collect(),
                    allowed: b
                        .allowed()
                        .iter()
                        .map(|t| {
                            t.iter()
                                .enumerate()
                                .map(|(pos, &sym)| {
                                    self.alphabets[b.scope()[pos]].label(sym).to_string()
                                })
                                .collect()
                        })
                        .collect(),
                })
                .collect(),
            evidence: self
                .evidence
                .iter()
                .map(|tab| EvidenceEntry {
                    id: self.names[tab.var].clone(),
                    weights: tab
                        .weights
                        .iter()
                        .enumerate()
                        .map(|(sym, w)| {
                            (self.alphabets[tab.var].label(sym).to_string(), format!("{w:.17e}"))
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}
