//! Linear-program assembly over a factor-graph model.
//!
//! Four equality-form programs share one variable catalog scheme:
//!
//! - the exact convex-hull program over full per-symbol marginals,
//! - its reduced twin over marginals with each reference symbol dropped,
//! - the local-consistency relaxation coupling reduced marginals to
//!   per-factor tuple weights, and
//! - the analysis-friendly equivalent carrying full marginals for every
//!   variable plus the same tuple weights.
//!
//! All constraint data and cost coefficients are exact rationals, so
//! solver vertices have exactly representable coordinates and the
//! integrality test needs no tolerance. Cost coefficients originating as
//! doubles are converted to the rationals they represent; reduced costs
//! are formed as exact rational differences, which keeps the additive
//! constant between the full and reduced cost scales exact as well.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::model::{Configuration, FactorGraphModel};
use crate::rat::{format_ratio, rational_from_f64};
use crate::{Error, Result};

/// Named LP variable.
///
/// The derived ordering (weights, then reduced marginals, then full
/// marginals, then tuple weights, each block ordered by its indices) is
/// the catalog ordering, so bases and vertex reports are reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LpVar {
    /// Convex weight of one valid configuration (index into the
    /// lexicographic enumeration of the global behaviour).
    ConfigWeight(usize),
    /// Per-symbol marginal with the reference symbol dropped; `sym >= 1`.
    ReducedMarginal { var: usize, sym: usize },
    /// Per-symbol marginal over the full alphabet.
    FullMarginal { var: usize, sym: usize },
    /// Weight of one allowed tuple of one factor (tuple index into the
    /// factor's lexicographically sorted allowed list).
    TupleWeight { factor: usize, tuple: usize },
}

impl LpVar {
    pub fn render(&self) -> String {
        match self {
            LpVar::ConfigWeight(k) => format!("cw({k})"),
            LpVar::ReducedMarginal { var, sym } => format!("rm({var},{sym})"),
            LpVar::FullMarginal { var, sym } => format!("fm({var},{sym})"),
            LpVar::TupleWeight { factor, tuple } => format!("tw({factor},{tuple})"),
        }
    }
}

/// Ordered variable catalog with reverse lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarCatalog {
    vars: Vec<LpVar>,
    index: BTreeMap<LpVar, usize>,
}

impl VarCatalog {
    pub fn new(vars: Vec<LpVar>) -> Self {
        let index = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        Self { vars, index }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[LpVar] {
        &self.vars
    }

    pub fn var(&self, idx: usize) -> LpVar {
        self.vars[idx]
    }

    pub fn index_of(&self, var: &LpVar) -> Option<usize> {
        self.index.get(var).copied()
    }
}

/// One equality row: sorted sparse coefficients and a right-hand side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<(usize, BigRational)>,
    pub rhs: BigRational,
}

#[derive(Default)]
struct RowBuilder(BTreeMap<usize, BigRational>);

impl RowBuilder {
    fn add(&mut self, idx: usize, coeff: BigRational) {
        let entry = self.0.entry(idx).or_insert_with(BigRational::zero);
        *entry += coeff;
    }

    fn build(self, rhs: BigRational) -> Row {
        Row {
            coeffs: self.0.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            rhs,
        }
    }
}

/// Equality-form maximization program: `max c.x` subject to `A x = b`,
/// `x >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub catalog: Arc<VarCatalog>,
    pub cost: Vec<BigRational>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new(catalog: Arc<VarCatalog>, cost: Vec<BigRational>, rows: Vec<Row>) -> Self {
        assert_eq!(catalog.len(), cost.len(), "one cost entry per variable");
        Self { catalog, cost, rows }
    }

    pub fn num_vars(&self) -> usize {
        self.catalog.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Exact residual `(A x - b)` per row.
    pub fn residuals(&self, point: &LpPoint) -> Vec<BigRational> {
        self.rows
            .iter()
            .map(|row| {
                let mut acc = -row.rhs.clone();
                for (idx, coeff) in &row.coeffs {
                    acc += coeff * &point.values[*idx];
                }
                acc
            })
            .collect()
    }

    /// True when the point matches the catalog, is nonnegative, and all
    /// residuals vanish exactly.
    pub fn is_satisfied_by(&self, point: &LpPoint) -> bool {
        point.catalog.vars() == self.catalog.vars()
            && point.values.iter().all(|v| !v.is_negative())
            && self.residuals(point).iter().all(|r| r.is_zero())
    }

    /// Exact objective value at a point.
    pub fn objective_of(&self, point: &LpPoint) -> BigRational {
        self.cost
            .iter()
            .zip(&point.values)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, v)| c * v)
            .sum()
    }

    /// Copy with linearly dependent rows removed (first occurrences kept,
    /// inconsistent rows preserved). The builders emit the mutually
    /// redundant per-factor consistency rows as stated; this pass is
    /// available for callers that want minimal systems and is off by
    /// default everywhere else.
    pub fn deduplicated(&self) -> Self {
        let n = self.num_vars();
        // Reduced independent rows collected so far, as dense augmented
        // vectors with their leading column.
        let mut pivots: Vec<(usize, Vec<BigRational>)> = Vec::new();
        let mut rows = Vec::new();
        for row in &self.rows {
            let mut dense = vec![BigRational::zero(); n + 1];
            for (idx, c) in &row.coeffs {
                dense[*idx] = c.clone();
            }
            dense[n] = row.rhs.clone();
            for (lead, pivot) in &pivots {
                if !dense[*lead].is_zero() {
                    let factor = dense[*lead].clone();
                    for (d, p) in dense.iter_mut().zip(pivot) {
                        *d -= &factor * p;
                    }
                }
            }
            match dense[..n].iter().position(|c| !c.is_zero()) {
                Some(lead) => {
                    let inv = dense[lead].clone();
                    for d in dense.iter_mut() {
                        *d /= &inv;
                    }
                    pivots.push((lead, dense));
                    rows.push(row.clone());
                }
                None => {
                    if !dense[n].is_zero() {
                        // Inconsistent row: keep it so infeasibility survives.
                        rows.push(row.clone());
                    }
                }
            }
        }
        Self { catalog: self.catalog.clone(), cost: self.cost.clone(), rows }
    }

    /// Plain-text sparse dump: a variable listing, one line per equality
    /// row, and a cost line; rationals rendered as `num/den`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("vars:");
        for v in self.catalog.vars() {
            let _ = write!(out, " {}", v.render());
        }
        out.push('\n');
        for (r, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "r{r}:");
            for (idx, coeff) in &row.coeffs {
                let name = self.catalog.var(*idx).render();
                if coeff.is_one() {
                    let _ = write!(out, " +{name}");
                } else if (-coeff).is_one() {
                    let _ = write!(out, " -{name}");
                } else if coeff.is_positive() {
                    let _ = write!(out, " +{}*{name}", format_ratio(coeff));
                } else {
                    let _ = write!(out, " -{}*{name}", format_ratio(&-coeff));
                }
            }
            let _ = write!(out, " = {}\n", format_ratio(&row.rhs));
        }
        out.push_str("cost:");
        for (idx, c) in self.cost.iter().enumerate() {
            if !c.is_zero() {
                let _ = write!(out, " {}={}", self.catalog.var(idx).render(), format_ratio(c));
            }
        }
        out.push('\n');
        out
    }
}

/// Rational-coordinate assignment to a catalog's variables.
#[derive(Debug, Clone)]
pub struct LpPoint {
    pub catalog: Arc<VarCatalog>,
    pub values: Vec<BigRational>,
}

impl PartialEq for LpPoint {
    fn eq(&self, other: &Self) -> bool {
        self.catalog.vars() == other.catalog.vars() && self.values == other.values
    }
}

impl Eq for LpPoint {}

impl LpPoint {
    pub fn new(catalog: Arc<VarCatalog>, values: Vec<BigRational>) -> Self {
        assert_eq!(catalog.len(), values.len());
        Self { catalog, values }
    }

    pub fn get(&self, var: &LpVar) -> Option<&BigRational> {
        self.catalog.index_of(var).map(|i| &self.values[i])
    }

    /// Nonzero coordinates rendered as `name=num/den`, catalog order.
    pub fn nonzero_summary(&self) -> Vec<String> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| format!("{}={}", self.catalog.var(i).render(), format_ratio(v)))
            .collect()
    }
}

/// Which of the four programs a receiver run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulationKind {
    ExactVRep,
    ReducedExact,
    RelaxedQtilde,
    TheoreticalQ,
}

impl FormulationKind {
    pub const ALL: [FormulationKind; 4] = [
        FormulationKind::ExactVRep,
        FormulationKind::ReducedExact,
        FormulationKind::RelaxedQtilde,
        FormulationKind::TheoreticalQ,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "vrep" => Ok(Self::ExactVRep),
            "reduced" => Ok(Self::ReducedExact),
            "qtilde" => Ok(Self::RelaxedQtilde),
            "q" => Ok(Self::TheoreticalQ),
            other => Err(Error::Parse(format!(
                "unknown formulation {other:?} (expected vrep, reduced, qtilde or q)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ExactVRep => "vrep",
            Self::ReducedExact => "reduced",
            Self::RelaxedQtilde => "qtilde",
            Self::TheoreticalQ => "q",
        }
    }
}

// ---------------------------------------------------------------------------
// Cost vectors
// ---------------------------------------------------------------------------

/// Exact rational log-evidence costs per evidence variable.
///
/// Reduced costs are formed as differences of these rationals, so the
/// constant separating the full and reduced cost scales is itself exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostVectors {
    /// `lambda[i]` present exactly for variables in `Y`.
    lambda: BTreeMap<usize, Vec<BigRational>>,
}

impl CostVectors {
    /// Rationalizes the model's `ln h_i` tables.
    pub fn from_model(model: &FactorGraphModel) -> Result<Self> {
        let mut lambda = BTreeMap::new();
        for i in 0..model.num_vars() {
            if let Some(w) = model.evidence_weights(i) {
                let logs = w.iter().map(|x| rational_from_f64(x.ln())).collect::<Result<_>>()?;
                lambda.insert(i, logs);
            }
        }
        Ok(Self { lambda })
    }

    /// Uses explicit rational tables (callers with custom cost scales).
    pub fn from_tables(lambda: BTreeMap<usize, Vec<BigRational>>) -> Self {
        Self { lambda }
    }

    pub fn evidence_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.lambda.keys().copied()
    }

    pub fn lambda(&self, var: usize, sym: usize) -> &BigRational {
        &self.lambda[&var][sym]
    }

    /// Reduced cost `lambda(var, sym) - lambda(var, 0)`, exact.
    pub fn tilde(&self, var: usize, sym: usize) -> BigRational {
        &self.lambda[&var][sym] - &self.lambda[&var][0]
    }

    /// The additive constant between the full and reduced cost scales:
    /// the sum of each evidence variable's reference-symbol cost.
    pub fn offset(&self) -> BigRational {
        self.lambda.values().map(|v| v[0].clone()).sum()
    }

    /// Exact full-scale score of a configuration.
    pub fn score(&self, cfg: &Configuration) -> BigRational {
        self.lambda.iter().map(|(&i, v)| v[cfg.0[i]].clone()).sum()
    }

    fn check_model(&self, model: &FactorGraphModel) -> Result<()> {
        for i in 0..model.num_vars() {
            match (model.has_evidence(i), self.lambda.get(&i)) {
                (true, Some(v)) if v.len() == model.alphabet(i).size() => {}
                (false, None) => {}
                _ => {
                    return Err(Error::Dimension(format!(
                        "cost table does not match the evidence set at variable {i}"
                    )))
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Catalog layouts
// ---------------------------------------------------------------------------

fn tuple_weight_vars(model: &FactorGraphModel) -> Vec<LpVar> {
    let mut vars = Vec::new();
    for (j, b) in model.behaviours().iter().enumerate() {
        for t in 0..b.allowed().len() {
            vars.push(LpVar::TupleWeight { factor: j, tuple: t });
        }
    }
    vars
}

/// Catalog of the local-consistency relaxation: reduced marginals over
/// evidence variables, then tuple weights.
pub fn relaxed_catalog(model: &FactorGraphModel) -> Arc<VarCatalog> {
    let mut vars = Vec::new();
    for i in 0..model.num_vars() {
        if model.has_evidence(i) {
            for sym in 1..model.alphabet(i).size() {
                vars.push(LpVar::ReducedMarginal { var: i, sym });
            }
        }
    }
    vars.extend(tuple_weight_vars(model));
    Arc::new(VarCatalog::new(vars))
}

/// Catalog of the analysis form: full marginals over every variable,
/// then tuple weights.
pub fn analysis_catalog(model: &FactorGraphModel) -> Arc<VarCatalog> {
    let mut vars = Vec::new();
    for i in 0..model.num_vars() {
        for sym in 0..model.alphabet(i).size() {
            vars.push(LpVar::FullMarginal { var: i, sym });
        }
    }
    vars.extend(tuple_weight_vars(model));
    Arc::new(VarCatalog::new(vars))
}

// ---------------------------------------------------------------------------
// Program builders
// ---------------------------------------------------------------------------

/// Exact convex-hull program: one convex weight per valid configuration
/// plus full marginals over evidence variables; maximizing the full-scale
/// cost over it solves the original problem outright.
pub fn build_exact_vrep(
    model: &FactorGraphModel,
    costs: &CostVectors,
    cap: u64,
) -> Result<LinearProgram> {
    costs.check_model(model)?;
    let behaviour = model.global_behaviour(cap)?;
    if behaviour.is_empty() {
        return Err(Error::NoValidConfiguration);
    }

    let mut vars: Vec<LpVar> = (0..behaviour.len()).map(LpVar::ConfigWeight).collect();
    for i in 0..model.num_vars() {
        if model.has_evidence(i) {
            for sym in 0..model.alphabet(i).size() {
                vars.push(LpVar::FullMarginal { var: i, sym });
            }
        }
    }
    let catalog = Arc::new(VarCatalog::new(vars));

    let mut rows = Vec::new();
    let mut norm = RowBuilder::default();
    for k in 0..behaviour.len() {
        norm.add(catalog.index_of(&LpVar::ConfigWeight(k)).unwrap(), BigRational::one());
    }
    rows.push(norm.build(BigRational::one()));

    for i in 0..model.num_vars() {
        if !model.has_evidence(i) {
            continue;
        }
        for sym in 0..model.alphabet(i).size() {
            let mut row = RowBuilder::default();
            row.add(
                catalog.index_of(&LpVar::FullMarginal { var: i, sym }).unwrap(),
                BigRational::one(),
            );
            for (k, cfg) in behaviour.iter().enumerate() {
                if cfg.0[i] == sym {
                    row.add(
                        catalog.index_of(&LpVar::ConfigWeight(k)).unwrap(),
                        -BigRational::one(),
                    );
                }
            }
            rows.push(row.build(BigRational::zero()));
        }
    }

    let mut cost = vec![BigRational::zero(); catalog.len()];
    for (idx, v) in catalog.vars().iter().enumerate() {
        if let LpVar::FullMarginal { var, sym } = v {
            cost[idx] = costs.lambda(*var, *sym).clone();
        }
    }
    Ok(LinearProgram::new(catalog, cost, rows))
}

/// Reduced twin of the exact hull program: marginals drop each variable's
/// reference symbol and the cost is on the reduced scale.
pub fn build_reduced_exact(
    model: &FactorGraphModel,
    costs: &CostVectors,
    cap: u64,
) -> Result<LinearProgram> {
    costs.check_model(model)?;
    let behaviour = model.global_behaviour(cap)?;
    if behaviour.is_empty() {
        return Err(Error::NoValidConfiguration);
    }

    let mut vars: Vec<LpVar> = (0..behaviour.len()).map(LpVar::ConfigWeight).collect();
    for i in 0..model.num_vars() {
        if model.has_evidence(i) {
            for sym in 1..model.alphabet(i).size() {
                vars.push(LpVar::ReducedMarginal { var: i, sym });
            }
        }
    }
    let catalog = Arc::new(VarCatalog::new(vars));

    let mut rows = Vec::new();
    let mut norm = RowBuilder::default();
    for k in 0..behaviour.len() {
        norm.add(catalog.index_of(&LpVar::ConfigWeight(k)).unwrap(), BigRational::one());
    }
    rows.push(norm.build(BigRational::one()));

    for i in 0..model.num_vars() {
        if !model.has_evidence(i) {
            continue;
        }
        for sym in 1..model.alphabet(i).size() {
            let mut row = RowBuilder::default();
            row.add(
                catalog.index_of(&LpVar::ReducedMarginal { var: i, sym }).unwrap(),
                BigRational::one(),
            );
            for (k, cfg) in behaviour.iter().enumerate() {
                if cfg.0[i] == sym {
                    row.add(
                        catalog.index_of(&LpVar::ConfigWeight(k)).unwrap(),
                        -BigRational::one(),
                    );
                }
            }
            rows.push(row.build(BigRational::zero()));
        }
    }

    let mut cost = vec![BigRational::zero(); catalog.len()];
    for (idx, v) in catalog.vars().iter().enumerate() {
        if let LpVar::ReducedMarginal { var, sym } = v {
            cost[idx] = costs.tilde(*var, *sym);
        }
    }
    Ok(LinearProgram::new(catalog, cost, rows))
}

/// Local-consistency relaxation: per-factor tuple weights normalized to
/// one, coupled to reduced marginals on evidence variables (one row per
/// touching factor, redundancy included) and cross-factor consistency at
/// each hidden variable against its anchor factor.
pub fn build_relaxed_qtilde(model: &FactorGraphModel, costs: &CostVectors) -> Result<LinearProgram> {
    costs.check_model(model)?;
    let catalog = relaxed_catalog(model);

    let mut rows = Vec::new();
    for (j, b) in model.behaviours().iter().enumerate() {
        let mut norm = RowBuilder::default();
        for t in 0..b.allowed().len() {
            norm.add(
                catalog.index_of(&LpVar::TupleWeight { factor: j, tuple: t }).unwrap(),
                BigRational::one(),
            );
        }
        rows.push(norm.build(BigRational::one()));
    }

    for i in 0..model.num_vars() {
        if model.has_evidence(i) {
            for &j in model.behaviours_of(i) {
                let b = model.behaviour(j);
                let pos = b.position_of(i).unwrap();
                for sym in 1..model.alphabet(i).size() {
                    let mut row = RowBuilder::default();
                    row.add(
                        catalog.index_of(&LpVar::ReducedMarginal { var: i, sym }).unwrap(),
                        BigRational::one(),
                    );
                    for (t, tuple) in b.allowed().iter().enumerate() {
                        if tuple[pos] == sym {
                            row.add(
                                catalog
                                    .index_of(&LpVar::TupleWeight { factor: j, tuple: t })
                                    .unwrap(),
                                -BigRational::one(),
                            );
                        }
                    }
                    rows.push(row.build(BigRational::zero()));
                }
            }
        } else {
            let anchor = model.anchor(i).expect("hidden variable has an anchor");
            let anchor_b = model.behaviour(anchor);
            let anchor_pos = anchor_b.position_of(i).unwrap();
            for &j in model.behaviours_of(i) {
                if j == anchor {
                    continue;
                }
                let b = model.behaviour(j);
                let pos = b.position_of(i).unwrap();
                for sym in 1..model.alphabet(i).size() {
                    let mut row = RowBuilder::default();
                    for (t, tuple) in b.allowed().iter().enumerate() {
                        if tuple[pos] == sym {
                            row.add(
                                catalog
                                    .index_of(&LpVar::TupleWeight { factor: j, tuple: t })
                                    .unwrap(),
                                BigRational::one(),
                            );
                        }
                    }
                    for (t, tuple) in anchor_b.allowed().iter().enumerate() {
                        if tuple[anchor_pos] == sym {
                            row.add(
                                catalog
                                    .index_of(&LpVar::TupleWeight { factor: anchor, tuple: t })
                                    .unwrap(),
                                -BigRational::one(),
                            );
                        }
                    }
                    rows.push(row.build(BigRational::zero()));
                }
            }
        }
    }

    let mut cost = vec![BigRational::zero(); catalog.len()];
    for (idx, v) in catalog.vars().iter().enumerate() {
        if let LpVar::ReducedMarginal { var, sym } = v {
            cost[idx] = costs.tilde(*var, *sym);
        }
    }
    Ok(LinearProgram::new(catalog, cost, rows))
}

/// Analysis form: full marginals for every variable tied to every
/// touching factor's tuple weights, tuple normalizations, and the
/// full-scale cost restricted to evidence variables.
pub fn build_theoretical_q(model: &FactorGraphModel, costs: &CostVectors) -> Result<LinearProgram> {
    costs.check_model(model)?;
    let catalog = analysis_catalog(model);

    let mut rows = Vec::new();
    for (j, b) in model.behaviours().iter().enumerate() {
        let mut norm = RowBuilder::default();
        for t in 0..b.allowed().len() {
            norm.add(
                catalog.index_of(&LpVar::TupleWeight { factor: j, tuple: t }).unwrap(),
                BigRational::one(),
            );
        }
        rows.push(norm.build(BigRational::one()));
    }

    for (j, b) in model.behaviours().iter().enumerate() {
        for (pos, &i) in b.scope().iter().enumerate() {
            for sym in 0..model.alphabet(i).size() {
                let mut row = RowBuilder::default();
                row.add(
                    catalog.index_of(&LpVar::FullMarginal { var: i, sym }).unwrap(),
                    BigRational::one(),
                );
                for (t, tuple) in b.allowed().iter().enumerate() {
                    if tuple[pos] == sym {
                        row.add(
                            catalog.index_of(&LpVar::TupleWeight { factor: j, tuple: t }).unwrap(),
                            -BigRational::one(),
                        );
                    }
                }
                rows.push(row.build(BigRational::zero()));
            }
        }
    }

    let mut cost = vec![BigRational::zero(); catalog.len()];
    for (idx, v) in catalog.vars().iter().enumerate() {
        if let LpVar::FullMarginal { var, sym } = v {
            if model.has_evidence(*var) {
                cost[idx] = costs.lambda(*var, *sym).clone();
            }
        }
    }
    Ok(LinearProgram::new(catalog, cost, rows))
}

/// Builds the requested formulation.
pub fn build(
    model: &FactorGraphModel,
    costs: &CostVectors,
    kind: FormulationKind,
    cap: u64,
) -> Result<LinearProgram> {
    match kind {
        FormulationKind::ExactVRep => build_exact_vrep(model, costs, cap),
        FormulationKind::ReducedExact => build_reduced_exact(model, costs, cap),
        FormulationKind::RelaxedQtilde => build_relaxed_qtilde(model, costs),
        FormulationKind::TheoreticalQ => build_theoretical_q(model, costs),
    }
}

// ---------------------------------------------------------------------------
// Point maps
// ---------------------------------------------------------------------------

/// Completes reduced marginals over evidence variables into full
/// marginals: the reference-symbol coordinate is one minus the sum of the
/// others. Exact and invertible by coordinate restriction.
pub fn map_w(model: &FactorGraphModel, point: &LpPoint) -> Result<LpPoint> {
    let mut vars = Vec::new();
    let mut values = Vec::new();
    for i in 0..model.num_vars() {
        if !model.has_evidence(i) {
            continue;
        }
        let mut rest_sum = BigRational::zero();
        let mut rest = Vec::new();
        for sym in 1..model.alphabet(i).size() {
            let v = point
                .get(&LpVar::ReducedMarginal { var: i, sym })
                .ok_or_else(|| {
                    Error::Dimension(format!("point lacks the reduced marginal ({i},{sym})"))
                })?
                .clone();
            rest_sum += &v;
            rest.push(v);
        }
        vars.push(LpVar::FullMarginal { var: i, sym: 0 });
        values.push(BigRational::one() - rest_sum);
        for (sym, v) in rest.into_iter().enumerate() {
            vars.push(LpVar::FullMarginal { var: i, sym: sym + 1 });
            values.push(v);
        }
    }
    Ok(LpPoint::new(Arc::new(VarCatalog::new(vars)), values))
}

/// Inverse of [`map_w`]: restriction to the non-reference coordinates.
pub fn map_w_inverse(model: &FactorGraphModel, point: &LpPoint) -> Result<LpPoint> {
    let mut vars = Vec::new();
    let mut values = Vec::new();
    for i in 0..model.num_vars() {
        if !model.has_evidence(i) {
            continue;
        }
        for sym in 1..model.alphabet(i).size() {
            let v = point.get(&LpVar::FullMarginal { var: i, sym }).ok_or_else(|| {
                Error::Dimension(format!("point lacks the full marginal ({i},{sym})"))
            })?;
            vars.push(LpVar::ReducedMarginal { var: i, sym });
            values.push(v.clone());
        }
    }
    Ok(LpPoint::new(Arc::new(VarCatalog::new(vars)), values))
}

/// Lifts a feasible relaxation point into the analysis polytope: evidence
/// variables are completed as in [`map_w`], hidden variables take their
/// marginals from the anchor factor's tuple weights, tuple weights are
/// copied. Cost is preserved up to the reduced-scale constant.
pub fn map_v(model: &FactorGraphModel, point: &LpPoint) -> Result<LpPoint> {
    check_point_in_relaxation(model, point)
        .map_err(Error::InfeasiblePoint)?;
    let catalog = analysis_catalog(model);
    let mut values = vec![BigRational::zero(); catalog.len()];
    for (idx, v) in catalog.vars().iter().enumerate() {
        match v {
            LpVar::FullMarginal { var, sym } => {
                if model.has_evidence(*var) {
                    if *sym == 0 {
                        let mut acc = BigRational::one();
                        for s in 1..model.alphabet(*var).size() {
                            acc -= point
                                .get(&LpVar::ReducedMarginal { var: *var, sym: s })
                                .expect("checked by feasibility");
                        }
                        values[idx] = acc;
                    } else {
                        values[idx] = point
                            .get(&LpVar::ReducedMarginal { var: *var, sym: *sym })
                            .expect("checked by feasibility")
                            .clone();
                    }
                } else {
                    let anchor = model.anchor(*var).expect("hidden variable has an anchor");
                    let b = model.behaviour(anchor);
                    let pos = b.position_of(*var).unwrap();
                    let mut acc = BigRational::zero();
                    for (t, tuple) in b.allowed().iter().enumerate() {
                        if tuple[pos] == *sym {
                            acc += point
                                .get(&LpVar::TupleWeight { factor: anchor, tuple: t })
                                .expect("checked by feasibility");
                        }
                    }
                    values[idx] = acc;
                }
            }
            LpVar::TupleWeight { factor, tuple } => {
                values[idx] = point
                    .get(&LpVar::TupleWeight { factor: *factor, tuple: *tuple })
                    .expect("checked by feasibility")
                    .clone();
            }
            _ => unreachable!("analysis catalog holds marginals and tuple weights only"),
        }
    }
    Ok(LpPoint::new(catalog, values))
}

/// Inverse of [`map_v`]: restriction to reduced marginals over evidence
/// variables plus the tuple weights.
pub fn map_v_inverse(model: &FactorGraphModel, point: &LpPoint) -> Result<LpPoint> {
    check_point_in_analysis(model, point).map_err(Error::InfeasiblePoint)?;
    let catalog = relaxed_catalog(model);
    let mut values = Vec::with_capacity(catalog.len());
    for v in catalog.vars() {
        let source = match v {
            LpVar::ReducedMarginal { var, sym } => LpVar::FullMarginal { var: *var, sym: *sym },
            LpVar::TupleWeight { .. } => *v,
            _ => unreachable!(),
        };
        values.push(point.get(&source).expect("checked by feasibility").clone());
    }
    Ok(LpPoint::new(catalog, values))
}

/// Integral representative of a valid configuration in the analysis
/// polytope: indicator marginals plus unit weight on each factor's
/// matching tuple.
pub fn embed_configuration(model: &FactorGraphModel, cfg: &Configuration) -> Result<LpPoint> {
    if cfg.0.len() != model.num_vars() {
        return Err(Error::Dimension(format!(
            "configuration has {} entries, model has {} variables",
            cfg.0.len(),
            model.num_vars()
        )));
    }
    if !model.is_valid(cfg) {
        return Err(Error::InvalidConfiguration(
            "configuration violates a local behaviour".into(),
        ));
    }
    let catalog = analysis_catalog(model);
    let mut values = vec![BigRational::zero(); catalog.len()];
    for (idx, v) in catalog.vars().iter().enumerate() {
        match v {
            LpVar::FullMarginal { var, sym } => {
                if cfg.0[*var] == *sym {
                    values[idx] = BigRational::one();
                }
            }
            LpVar::TupleWeight { factor, tuple } => {
                let b = model.behaviour(*factor);
                let local: Vec<usize> = b.scope().iter().map(|&i| cfg.0[i]).collect();
                if b.allowed()[*tuple] == local {
                    values[idx] = BigRational::one();
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(LpPoint::new(catalog, values))
}

// ---------------------------------------------------------------------------
// Feasibility and derived-constraint checks
// ---------------------------------------------------------------------------

fn tuple_marginal(
    model: &FactorGraphModel,
    point: &LpPoint,
    factor: usize,
    var: usize,
    sym: usize,
) -> Option<BigRational> {
    let b = model.behaviour(factor);
    let pos = b.position_of(var)?;
    let mut acc = BigRational::zero();
    for (t, tuple) in b.allowed().iter().enumerate() {
        if tuple[pos] == sym {
            acc += point.get(&LpVar::TupleWeight { factor, tuple: t })?;
        }
    }
    Some(acc)
}

/// Direct substitution check of the relaxation constraints (independent
/// of the program builder). Returns the violated constraints.
pub fn check_point_in_relaxation(
    model: &FactorGraphModel,
    point: &LpPoint,
) -> std::result::Result<(), Vec<String>> {
    let mut violations = Vec::new();
    for v in point.catalog.vars() {
        if let Some(val) = point.get(v) {
            if val.is_negative() {
                violations.push(format!("{} = {} < 0", v.render(), format_ratio(val)));
            }
        }
    }
    for (j, b) in model.behaviours().iter().enumerate() {
        let mut total = BigRational::zero();
        for t in 0..b.allowed().len() {
            match point.get(&LpVar::TupleWeight { factor: j, tuple: t }) {
                Some(v) => total += v,
                None => {
                    violations.push(format!("missing tuple weight tw({j},{t})"));
                    return Err(violations);
                }
            }
        }
        if !total.is_one() {
            violations.push(format!("factor {j} tuple weights sum to {}", format_ratio(&total)));
        }
    }
    for i in 0..model.num_vars() {
        if model.has_evidence(i) {
            for &j in model.behaviours_of(i) {
                for sym in 1..model.alphabet(i).size() {
                    let lhs = match point.get(&LpVar::ReducedMarginal { var: i, sym }) {
                        Some(v) => v.clone(),
                        None => {
                            violations.push(format!("missing reduced marginal rm({i},{sym})"));
                            return Err(violations);
                        }
                    };
                    let rhs = tuple_marginal(model, point, j, i, sym).unwrap();
                    if lhs != rhs {
                        violations.push(format!(
                            "rm({i},{sym}) = {} but factor {j} marginal is {}",
                            format_ratio(&lhs),
                            format_ratio(&rhs)
                        ));
                    }
                }
            }
        } else {
            let anchor = model.anchor(i).expect("hidden variable has an anchor");
            for &j in model.behaviours_of(i) {
                if j == anchor {
                    continue;
                }
                for sym in 1..model.alphabet(i).size() {
                    let lhs = tuple_marginal(model, point, j, i, sym).unwrap();
                    let rhs = tuple_marginal(model, point, anchor, i, sym).unwrap();
                    if lhs != rhs {
                        violations.push(format!(
                            "hidden variable {i}: factor {j} marginal {} differs from anchor {}",
                            format_ratio(&lhs),
                            format_ratio(&rhs)
                        ));
                    }
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Direct substitution check of the analysis-polytope constraints.
pub fn check_point_in_analysis(
    model: &FactorGraphModel,
    point: &LpPoint,
) -> std::result::Result<(), Vec<String>> {
    let mut violations = Vec::new();
    for v in point.catalog.vars() {
        if let Some(val) = point.get(v) {
            if val.is_negative() {
                violations.push(format!("{} = {} < 0", v.render(), format_ratio(val)));
            }
        }
    }
    for (j, b) in model.behaviours().iter().enumerate() {
        let mut total = BigRational::zero();
        for t in 0..b.allowed().len() {
            match point.get(&LpVar::TupleWeight { factor: j, tuple: t }) {
                Some(v) => total += v,
                None => {
                    violations.push(format!("missing tuple weight tw({j},{t})"));
                    return Err(violations);
                }
            }
        }
        if !total.is_one() {
            violations.push(format!("factor {j} tuple weights sum to {}", format_ratio(&total)));
        }
    }
    for (j, b) in model.behaviours().iter().enumerate() {
        for &i in b.scope() {
            for sym in 0..model.alphabet(i).size() {
                let lhs = match point.get(&LpVar::FullMarginal { var: i, sym }) {
                    Some(v) => v.clone(),
                    None => {
                        violations.push(format!("missing full marginal fm({i},{sym})"));
                        return Err(violations);
                    }
                };
                let rhs = tuple_marginal(model, point, j, i, sym).unwrap();
                if lhs != rhs {
                    violations.push(format!(
                        "fm({i},{sym}) = {} but factor {j} marginal is {}",
                        format_ratio(&lhs),
                        format_ratio(&rhs)
                    ));
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Outcome of [`verify_derived_constraints`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedReport {
    pub violations: Vec<String>,
}

impl DerivedReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the consequence constraints every feasible point must satisfy:
/// tuple and configuration weights at most one, marginals within `[0,1]`,
/// reduced marginal sums at most one, full marginal sums exactly one.
/// These are implied by the equality systems, so a nonempty report on a
/// feasible point indicates a construction bug.
pub fn verify_derived_constraints(
    model: &FactorGraphModel,
    point: &LpPoint,
    kind: FormulationKind,
) -> DerivedReport {
    let mut violations = Vec::new();
    let one = BigRational::one();

    for (idx, val) in point.values.iter().enumerate() {
        if val.is_negative() || *val > one {
            let var = point.catalog.var(idx);
            violations.push(format!("{} = {} outside [0,1]", var.render(), format_ratio(val)));
        }
    }

    match kind {
        FormulationKind::ReducedExact | FormulationKind::RelaxedQtilde => {
            for i in 0..model.num_vars() {
                if !model.has_evidence(i) {
                    continue;
                }
                let mut acc = BigRational::zero();
                let mut present = true;
                for sym in 1..model.alphabet(i).size() {
                    match point.get(&LpVar::ReducedMarginal { var: i, sym }) {
                        Some(v) => acc += v,
                        None => present = false,
                    }
                }
                if present && acc > one {
                    violations.push(format!(
                        "reduced marginals of variable {i} sum to {}",
                        format_ratio(&acc)
                    ));
                }
            }
        }
        FormulationKind::ExactVRep | FormulationKind::TheoreticalQ => {
            for i in 0..model.num_vars() {
                let mut acc = BigRational::zero();
                let mut present = true;
                for sym in 0..model.alphabet(i).size() {
                    match point.get(&LpVar::FullMarginal { var: i, sym }) {
                        Some(v) => acc += v,
                        None => present = false,
                    }
                }
                if present && !acc.is_one() {
                    violations.push(format!(
                        "full marginals of variable {i} sum to {}",
                        format_ratio(&acc)
                    ));
                }
            }
        }
    }

    DerivedReport { violations }
}
