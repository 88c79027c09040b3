//! Graph covers and their correspondence with rational points of the
//! analysis polytope.
//!
//! A degree-`M` cover replicates every node `M` times and rewires each
//! (factor, variable) edge class by a permutation of the copies. Valid
//! labelings of a cover project to rational feasible points (normalized
//! label counts and lifted-tuple frequencies), and conversely every
//! rational feasible point is realized by some cover of degree equal to
//! the least common denominator of its tuple weights, built by matching
//! label multiplicities copy by copy.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lp::{analysis_catalog, check_point_in_analysis, LpPoint, LpVar};
use crate::model::FactorGraphModel;
use crate::rat::denominator_lcm;
use crate::{Error, Result};

/// Node budget for the randomized labeling search.
const SEARCH_BUDGET: usize = 200_000;

/// An `M`-fold cover of a model's factor graph.
///
/// `edge_perms[(factor, var)]` sends each factor copy to the variable
/// copy it reads; `pendant_perms[var]` wires the evidence copies of the
/// variables carrying observations (it never affects validity or the
/// projected vectors, and is kept for completeness of the lift).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphCover {
    pub degree: usize,
    pub edge_perms: BTreeMap<(usize, usize), Vec<usize>>,
    pub pendant_perms: BTreeMap<usize, Vec<usize>>,
}

impl GraphCover {
    /// Identity-wired cover of the given degree.
    pub fn identity(model: &FactorGraphModel, degree: usize) -> Self {
        let id: Vec<usize> = (0..degree).collect();
        let mut edge_perms = BTreeMap::new();
        for (j, b) in model.behaviours().iter().enumerate() {
            for &i in b.scope() {
                edge_perms.insert((j, i), id.clone());
            }
        }
        let mut pendant_perms = BTreeMap::new();
        for i in 0..model.num_vars() {
            if model.has_evidence(i) {
                pendant_perms.insert(i, id.clone());
            }
        }
        Self { degree, edge_perms, pendant_perms }
    }

    /// Structural validity: one bijection on the copies per edge class.
    pub fn validate(&self, model: &FactorGraphModel) -> Result<()> {
        if self.degree == 0 {
            return Err(Error::Dimension("cover degree must be at least 1".into()));
        }
        for (j, b) in model.behaviours().iter().enumerate() {
            for &i in b.scope() {
                let perm = self.edge_perms.get(&(j, i)).ok_or_else(|| {
                    Error::Dimension(format!("cover lacks a permutation for factor {j}, var {i}"))
                })?;
                check_permutation(perm, self.degree)?;
            }
        }
        for (i, perm) in &self.pendant_perms {
            if !model.has_evidence(*i) {
                return Err(Error::Dimension(format!(
                    "pendant wiring given for variable {i} which carries no evidence"
                )));
            }
            check_permutation(perm, self.degree)?;
        }
        Ok(())
    }
}

fn check_permutation(perm: &[usize], degree: usize) -> Result<()> {
    if perm.len() != degree {
        return Err(Error::Dimension(format!(
            "permutation has {} entries for degree {degree}",
            perm.len()
        )));
    }
    let mut seen = vec![false; degree];
    for &p in perm {
        if p >= degree || seen[p] {
            return Err(Error::Dimension("not a bijection on the copies".into()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// A symbol assignment to every variable copy: `labels[var][copy]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverConfiguration {
    pub labels: Vec<Vec<usize>>,
}

impl CoverConfiguration {
    pub fn degree(&self) -> usize {
        self.labels.first().map(Vec::len).unwrap_or(0)
    }

    /// Per-symbol label counts, one table per variable.
    pub fn counts(&self, model: &FactorGraphModel) -> Vec<Vec<usize>> {
        (0..model.num_vars())
            .map(|i| {
                let mut table = vec![0usize; model.alphabet(i).size()];
                for &sym in &self.labels[i] {
                    table[sym] += 1;
                }
                table
            })
            .collect()
    }
}

fn check_dimensions(
    model: &FactorGraphModel,
    cover: &GraphCover,
    cfg: &CoverConfiguration,
) -> Result<()> {
    cover.validate(model)?;
    if cfg.labels.len() != model.num_vars() {
        return Err(Error::Dimension(format!(
            "configuration labels {} variables, model has {}",
            cfg.labels.len(),
            model.num_vars()
        )));
    }
    for (i, copies) in cfg.labels.iter().enumerate() {
        if copies.len() != cover.degree {
            return Err(Error::Dimension(format!(
                "variable {i} has {} copies, cover degree is {}",
                copies.len(),
                cover.degree
            )));
        }
        for &sym in copies {
            if sym >= model.alphabet(i).size() {
                return Err(Error::Dimension(format!(
                    "label {sym} outside the alphabet of variable {i}"
                )));
            }
        }
    }
    Ok(())
}

/// The tuple seen by factor copy `(j, l)` under the cover wiring.
fn lifted_tuple(
    model: &FactorGraphModel,
    cover: &GraphCover,
    cfg: &CoverConfiguration,
    factor: usize,
    copy: usize,
) -> Vec<usize> {
    model.behaviour(factor)
        .scope()
        .iter()
        .map(|&i| cfg.labels[i][cover.edge_perms[&(factor, i)][copy]])
        .collect()
}

/// True when every lifted local tuple is allowed.
pub fn is_valid_cover_configuration(
    model: &FactorGraphModel,
    cover: &GraphCover,
    cfg: &CoverConfiguration,
) -> Result<bool> {
    check_dimensions(model, cover, cfg)?;
    for j in 0..model.behaviours().len() {
        for l in 0..cover.degree {
            if !model.behaviour(j).permits(&lifted_tuple(model, cover, cfg, j, l)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Projects a valid cover configuration to the analysis polytope:
/// normalized label counts as marginals and normalized lifted-tuple
/// frequencies as tuple weights. The output is verified feasible.
pub fn cover_to_lp_point(
    model: &FactorGraphModel,
    cover: &GraphCover,
    cfg: &CoverConfiguration,
) -> Result<LpPoint> {
    if !is_valid_cover_configuration(model, cover, cfg)? {
        return Err(Error::InvalidConfiguration(
            "cover configuration violates a lifted behaviour".into(),
        ));
    }
    let degree = BigInt::from(cover.degree);
    let counts = cfg.counts(model);
    let catalog = analysis_catalog(model);
    let mut values = Vec::with_capacity(catalog.len());
    for v in catalog.vars() {
        match v {
            LpVar::FullMarginal { var, sym } => {
                values.push(BigRational::new(counts[*var][*sym].into(), degree.clone()));
            }
            LpVar::TupleWeight { factor, tuple } => {
                let target = &model.behaviour(*factor).allowed()[*tuple];
                let hits = (0..cover.degree)
                    .filter(|&l| lifted_tuple(model, cover, cfg, *factor, l) == *target)
                    .count();
                values.push(BigRational::new(hits.into(), degree.clone()));
            }
            _ => unreachable!("analysis catalog holds marginals and tuple weights only"),
        }
    }
    let point = LpPoint::new(catalog, values);
    check_point_in_analysis(model, &point).map_err(Error::InfeasiblePoint)?;
    Ok(point)
}

/// Realizes a rational feasible point of the analysis polytope as a
/// cover of degree equal to the least common denominator of its tuple
/// weights. Copies are labeled by cumulative multiplicity and each
/// (factor, variable, symbol) class is matched in ascending copy order;
/// pendant copies are wired identically. The result round-trips through
/// [`cover_to_lp_point`] to the input exactly.
pub fn lp_point_to_cover(
    model: &FactorGraphModel,
    point: &LpPoint,
) -> Result<(GraphCover, CoverConfiguration)> {
    check_point_in_analysis(model, point).map_err(Error::InfeasiblePoint)?;

    let tuple_values: Vec<&BigRational> = point
        .catalog
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| matches!(v, LpVar::TupleWeight { .. }))
        .map(|(idx, _)| &point.values[idx])
        .collect();
    let degree_int = denominator_lcm(tuple_values);
    let degree = degree_int
        .to_usize()
        .ok_or_else(|| Error::Precondition("cover degree exceeds usize".into()))?;

    // Integer label multiplicities per variable; integrality of the
    // scaled marginals follows from the coupling rows for any variable a
    // factor touches.
    let mut var_labels: Vec<Vec<usize>> = Vec::with_capacity(model.num_vars());
    for i in 0..model.num_vars() {
        let mut labels = Vec::with_capacity(degree);
        for sym in 0..model.alphabet(i).size() {
            let g = point
                .get(&LpVar::FullMarginal { var: i, sym })
                .ok_or_else(|| Error::Dimension(format!("point lacks fm({i},{sym})")))?;
            let scaled = g * BigRational::from_integer(degree_int.clone());
            if !scaled.is_integer() || scaled.is_negative() {
                return Err(Error::Precondition(format!(
                    "marginal fm({i},{sym}) does not scale to a copy count at degree {degree}"
                )));
            }
            let count = scaled.to_integer().to_usize().unwrap();
            labels.extend(std::iter::repeat(sym).take(count));
        }
        if labels.len() != degree {
            return Err(Error::Precondition(format!(
                "marginals of variable {i} do not sum to one"
            )));
        }
        var_labels.push(labels);
    }

    // Factor copy labels by cumulative scaled tuple weights.
    let mut factor_labels: Vec<Vec<usize>> = Vec::with_capacity(model.behaviours().len());
    for (j, b) in model.behaviours().iter().enumerate() {
        let mut labels = Vec::with_capacity(degree);
        for t in 0..b.allowed().len() {
            let p = point
                .get(&LpVar::TupleWeight { factor: j, tuple: t })
                .expect("feasibility check covered tuple weights");
            let scaled = p * BigRational::from_integer(degree_int.clone());
            let count = scaled.to_integer().to_usize().unwrap();
            labels.extend(std::iter::repeat(t).take(count));
        }
        debug_assert_eq!(labels.len(), degree);
        factor_labels.push(labels);
    }

    // Wire each (factor, variable, symbol) class in ascending copy order.
    let mut edge_perms = BTreeMap::new();
    for (j, b) in model.behaviours().iter().enumerate() {
        for (pos, &i) in b.scope().iter().enumerate() {
            let mut var_pools: Vec<Vec<usize>> =
                vec![Vec::new(); model.alphabet(i).size()];
            for (copy, &sym) in var_labels[i].iter().enumerate() {
                var_pools[sym].push(copy);
            }
            let mut cursors = vec![0usize; model.alphabet(i).size()];
            let mut perm = vec![0usize; degree];
            for (copy, &tuple_idx) in factor_labels[j].iter().enumerate() {
                let sym = b.allowed()[tuple_idx][pos];
                let pool = &var_pools[sym];
                let cursor = cursors[sym];
                assert!(
                    cursor < pool.len(),
                    "label multiplicities disagree between factor {j} and variable {i}"
                );
                perm[copy] = pool[cursor];
                cursors[sym] += 1;
            }
            // The counting identity guarantees every pool is exhausted.
            for (sym, pool) in var_pools.iter().enumerate() {
                assert_eq!(
                    cursors[sym],
                    pool.len(),
                    "unmatched copies of variable {i} with symbol {sym}"
                );
            }
            edge_perms.insert((j, i), perm);
        }
    }

    let mut pendant_perms = BTreeMap::new();
    for i in 0..model.num_vars() {
        if model.has_evidence(i) {
            pendant_perms.insert(i, (0..degree).collect());
        }
    }

    let cover = GraphCover { degree, edge_perms, pendant_perms };
    let cfg = CoverConfiguration { labels: var_labels };
    debug_assert!(is_valid_cover_configuration(model, &cover, &cfg)?);
    Ok((cover, cfg))
}

/// Samples a uniformly random cover of the given degree and searches for
/// a valid labeling with randomized depth-first backtracking. `None`
/// when the sampled cover admits none (or the bounded search gives up).
pub fn random_cover_configuration(
    model: &FactorGraphModel,
    degree: usize,
    seed: u64,
) -> Option<(GraphCover, CoverConfiguration)> {
    if degree == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut edge_perms = BTreeMap::new();
    for (j, b) in model.behaviours().iter().enumerate() {
        for &i in b.scope() {
            let mut perm: Vec<usize> = (0..degree).collect();
            perm.shuffle(&mut rng);
            edge_perms.insert((j, i), perm);
        }
    }
    let mut pendant_perms = BTreeMap::new();
    for i in 0..model.num_vars() {
        if model.has_evidence(i) {
            let mut perm: Vec<usize> = (0..degree).collect();
            perm.shuffle(&mut rng);
            pendant_perms.insert(i, perm);
        }
    }
    let cover = GraphCover { degree, edge_perms, pendant_perms };

    // Cells in fixed order; symbol preference shuffled per cell so
    // different seeds explore different labelings.
    let num_cells = model.num_vars() * degree;
    let cell = |i: usize, l: usize| i * degree + l;
    let mut preferences: Vec<Vec<usize>> = Vec::with_capacity(num_cells);
    for i in 0..model.num_vars() {
        for _ in 0..degree {
            let mut order: Vec<usize> = (0..model.alphabet(i).size()).collect();
            order.shuffle(&mut rng);
            preferences.push(order);
        }
    }

    // For each factor copy, the cells its lifted tuple reads.
    let mut watchers: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_cells];
    let mut tuple_cells: Vec<Vec<Vec<usize>>> = Vec::new();
    for (j, b) in model.behaviours().iter().enumerate() {
        let mut per_copy = Vec::with_capacity(degree);
        for l in 0..degree {
            let cells: Vec<usize> =
                b.scope().iter().map(|&i| cell(i, cover.edge_perms[&(j, i)][l])).collect();
            for &c in &cells {
                watchers[c].push((j, l));
            }
            per_copy.push(cells);
        }
        tuple_cells.push(per_copy);
    }

    let mut assignment: Vec<Option<usize>> = vec![None; num_cells];
    let mut choice_idx: Vec<usize> = vec![0; num_cells];
    let mut budget = SEARCH_BUDGET;
    let mut depth = 0usize;
    loop {
        if depth == num_cells {
            let labels = (0..model.num_vars())
                .map(|i| {
                    (0..degree).map(|l| assignment[cell(i, l)].unwrap()).collect::<Vec<_>>()
                })
                .collect();
            let cfg = CoverConfiguration { labels };
            debug_assert!(is_valid_cover_configuration(model, &cover, &cfg).unwrap());
            return Some((cover, cfg));
        }
        if budget == 0 {
            return None;
        }
        budget -= 1;

        let var = depth / degree;
        let n_syms = model.alphabet(var).size();
        let mut advanced = false;
        while choice_idx[depth] < n_syms {
            let sym = preferences[depth][choice_idx[depth]];
            choice_idx[depth] += 1;
            assignment[depth] = Some(sym);
            let consistent = watchers[depth].iter().all(|&(j, l)| {
                let cells = &tuple_cells[j][l];
                if cells.iter().any(|&c| assignment[c].is_none()) {
                    return true;
                }
                let tuple: Vec<usize> = cells.iter().map(|&c| assignment[c].unwrap()).collect();
                model.behaviour(j).permits(&tuple)
            });
            if consistent {
                depth += 1;
                advanced = true;
                break;
            }
            assignment[depth] = None;
        }
        if !advanced {
            choice_idx[depth] = 0;
            assignment[depth] = None;
            if depth == 0 {
                return None;
            }
            depth -= 1;
            assignment[depth] = None;
        }
    }
}

// ---------------------------------------------------------------------------
// JSON dump
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverDump {
    pub degree: usize,
    pub edges: Vec<EdgePermDump>,
    pub pendants: Vec<PendantPermDump>,
    /// `labels[var][copy]`, symbol indices.
    pub labels: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgePermDump {
    pub factor: usize,
    pub var: usize,
    pub perm: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PendantPermDump {
    pub var: usize,
    pub perm: Vec<usize>,
}

/// Serializes a cover and labeling.
pub fn to_dump(cover: &GraphCover, cfg: &CoverConfiguration) -> CoverDump {
    CoverDump {
        degree: cover.degree,
        edges: cover
            .edge_perms
            .iter()
            .map(|(&(factor, var), perm)| EdgePermDump { factor, var, perm: perm.clone() })
            .collect(),
        pendants: cover
            .pendant_perms
            .iter()
            .map(|(&var, perm)| PendantPermDump { var, perm: perm.clone() })
            .collect(),
        labels: cfg.labels.clone(),
    }
}

/// Parses a dump back into a cover and labeling (validated structurally
/// against the model).
pub fn from_dump(model: &FactorGraphModel, dump: &CoverDump) -> Result<(GraphCover, CoverConfiguration)> {
    let cover = GraphCover {
        degree: dump.degree,
        edge_perms: dump
            .edges
            .iter()
            .map(|e| ((e.factor, e.var), e.perm.clone()))
            .collect(),
        pendant_perms: dump.pendants.iter().map(|p| (p.var, p.perm.clone())).collect(),
    };
    let cfg = CoverConfiguration { labels: dump.labels.clone() };
    check_dimensions(model, &cover, &cfg)?;
    Ok((cover, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{chain_model, repetition_model, triangle_model};
    use crate::lp::embed_configuration;
    use crate::model::Configuration;
    use crate::model::DEFAULT_ENUM_CAP;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Degree-2 triangle cover with the sheets glued into one six-cycle:
    /// one edge class swaps the copies.
    fn six_cycle_cover(model: &FactorGraphModel) -> GraphCover {
        let mut cover = GraphCover::identity(model, 2);
        cover.edge_perms.insert((2, 0), vec![1, 0]);
        cover
    }

    #[test]
    fn degree_one_identity_cover_is_base_graph() {
        let m = triangle_model();
        let cover = GraphCover::identity(&m, 1);
        let valid = CoverConfiguration { labels: vec![vec![1], vec![1], vec![1]] };
        assert!(is_valid_cover_configuration(&m, &cover, &valid).unwrap());
        let invalid = CoverConfiguration { labels: vec![vec![1], vec![0], vec![1]] };
        assert!(!is_valid_cover_configuration(&m, &cover, &invalid).unwrap());
    }

    #[test]
    fn disconnected_double_cover_mixes_sheets() {
        // Identity wiring: two disjoint copies of the triangle, one labeled
        // all-zero and the other all-one. Valid, and the projected point is
        // the all-half fractional point.
        let m = triangle_model();
        let cover = GraphCover::identity(&m, 2);
        let cfg = CoverConfiguration { labels: vec![vec![0, 1]; 3] };
        assert!(is_valid_cover_configuration(&m, &cover, &cfg).unwrap());
        let point = cover_to_lp_point(&m, &cover, &cfg).unwrap();
        for v in &point.values {
            assert_eq!(*v, ratio(1, 2));
        }
    }

    #[test]
    fn six_cycle_cover_admits_only_constant_labelings() {
        // Gluing the sheets makes the lifted graph a single cycle of
        // agreement constraints, so the labels must be constant; sheet-wise
        // mixed labelings become invalid.
        let m = triangle_model();
        let cover = six_cycle_cover(&m);
        let mut valid_count = 0;
        for bits in 0u32..64 {
            let labels: Vec<Vec<usize>> = (0..3)
                .map(|i| vec![((bits >> (2 * i)) & 1) as usize, ((bits >> (2 * i + 1)) & 1) as usize])
                .collect();
            let cfg = CoverConfiguration { labels };
            if is_valid_cover_configuration(&m, &cover, &cfg).unwrap() {
                valid_count += 1;
            }
        }
        assert_eq!(valid_count, 2);

        let mixed = CoverConfiguration { labels: vec![vec![0, 1]; 3] };
        assert!(!is_valid_cover_configuration(&m, &cover, &mixed).unwrap());
        let mut flipped = CoverConfiguration { labels: vec![vec![0, 0]; 3] };
        flipped.labels[1][1] = 1;
        assert!(!is_valid_cover_configuration(&m, &cover, &flipped).unwrap());
    }

    #[test]
    fn degree_one_projection_equals_embedding() {
        let m = triangle_model();
        let cover = GraphCover::identity(&m, 1);
        let cfg = CoverConfiguration { labels: vec![vec![1], vec![1], vec![1]] };
        let projected = cover_to_lp_point(&m, &cover, &cfg).unwrap();
        let embedded = embed_configuration(&m, &Configuration(vec![1, 1, 1])).unwrap();
        assert_eq!(projected, embedded);
    }

    #[test]
    fn duplicated_sheets_project_to_integral_point() {
        let m = repetition_model();
        let cover = GraphCover::identity(&m, 2);
        let cfg = CoverConfiguration { labels: vec![vec![1, 1], vec![1, 1]] };
        let projected = cover_to_lp_point(&m, &cover, &cfg).unwrap();
        let embedded = embed_configuration(&m, &Configuration(vec![1, 1])).unwrap();
        assert_eq!(projected, embedded);
    }

    #[test]
    fn integral_point_lifts_to_degree_one() {
        let m = triangle_model();
        let point = embed_configuration(&m, &Configuration(vec![0, 0, 0])).unwrap();
        let (cover, cfg) = lp_point_to_cover(&m, &point).unwrap();
        assert_eq!(cover.degree, 1);
        assert_eq!(cfg.labels, vec![vec![0], vec![0], vec![0]]);
        assert_eq!(cover_to_lp_point(&m, &cover, &cfg).unwrap(), point);
    }

    #[test]
    fn all_half_point_lifts_to_degree_two() {
        let m = triangle_model();
        let catalog = analysis_catalog(&m);
        let values: Vec<BigRational> = catalog.vars().iter().map(|_| ratio(1, 2)).collect();
        let point = LpPoint::new(catalog, values);
        let (cover, cfg) = lp_point_to_cover(&m, &point).unwrap();
        assert_eq!(cover.degree, 2);
        assert!(is_valid_cover_configuration(&m, &cover, &cfg).unwrap());
        assert_eq!(cover_to_lp_point(&m, &cover, &cfg).unwrap(), point);
    }

    #[test]
    fn mixed_denominators_lift_to_their_lcm() {
        // Convex combination of chain configurations with weights 1/2,
        // 1/3, 1/6 produces tuple denominators {2, 3, 6}.
        let m = chain_model(3);
        let configs = [
            Configuration(vec![0, 0, 0]),
            Configuration(vec![1, 0, 0]),
            Configuration(vec![1, 1, 0]),
        ];
        let weights = [ratio(1, 2), ratio(1, 3), ratio(1, 6)];
        let embedded: Vec<LpPoint> =
            configs.iter().map(|c| embed_configuration(&m, c).unwrap()).collect();
        let catalog = embedded[0].catalog.clone();
        let values: Vec<BigRational> = (0..catalog.len())
            .map(|idx| {
                weights
                    .iter()
                    .zip(&embedded)
                    .map(|(w, p)| w * &p.values[idx])
                    .sum()
            })
            .collect();
        let point = LpPoint::new(catalog, values);
        let (cover, cfg) = lp_point_to_cover(&m, &point).unwrap();
        assert_eq!(cover.degree, 6);
        assert_eq!(cover_to_lp_point(&m, &cover, &cfg).unwrap(), point);
    }

    #[test]
    fn infeasible_point_is_rejected() {
        let m = triangle_model();
        let catalog = analysis_catalog(&m);
        let mut values: Vec<BigRational> = catalog.vars().iter().map(|_| ratio(1, 2)).collect();
        values[0] = ratio(2, 1);
        let point = LpPoint::new(catalog, values);
        assert!(matches!(lp_point_to_cover(&m, &point), Err(Error::InfeasiblePoint(_))));
    }

    #[test]
    fn random_degree_one_finds_a_valid_configuration() {
        let m = triangle_model();
        let (cover, cfg) = random_cover_configuration(&m, 1, 5).unwrap();
        assert!(is_valid_cover_configuration(&m, &cover, &cfg).unwrap());
        let base = Configuration(cfg.labels.iter().map(|l| l[0]).collect());
        assert!(m.is_valid(&base));
    }

    #[test]
    fn random_double_covers_mix_integral_and_fractional_vectors() {
        let m = triangle_model();
        let mut integral = 0;
        let mut fractional = 0;
        for seed in 0..24 {
            let Some((cover, cfg)) = random_cover_configuration(&m, 2, seed) else { continue };
            let point = cover_to_lp_point(&m, &cover, &cfg).unwrap();
            if crate::simplex::is_integral(&point) {
                integral += 1;
            } else {
                fractional += 1;
            }
        }
        assert!(integral > 0, "no lifted base configurations seen");
        assert!(fractional > 0, "no genuinely fractional vectors seen");
    }

    #[test]
    fn empty_behaviour_model_yields_none() {
        let m = crate::model::FactorGraphModel::new(
            vec![crate::model::Alphabet::binary(); 2],
            vec![
                crate::model::LocalBehaviour::new(vec![0, 1], vec![vec![0, 0]]).unwrap(),
                crate::model::LocalBehaviour::new(vec![0, 1], vec![vec![1, 1]]).unwrap(),
            ],
            vec![crate::model::EvidenceTable::new(0, vec![1.0, 1.0])],
        )
        .unwrap();
        assert!(m.global_behaviour(DEFAULT_ENUM_CAP).unwrap().is_empty());
        assert!(random_cover_configuration(&m, 1, 0).is_none());
        assert!(random_cover_configuration(&m, 2, 0).is_none());
    }

    #[test]
    fn dump_roundtrip() {
        let m = triangle_model();
        let catalog = analysis_catalog(&m);
        let values: Vec<BigRational> = catalog.vars().iter().map(|_| ratio(1, 2)).collect();
        let point = LpPoint::new(catalog, values);
        let (cover, cfg) = lp_point_to_cover(&m, &point).unwrap();
        let dump = to_dump(&cover, &cfg);
        let text = serde_json::to_string_pretty(&dump).unwrap();
        let parsed: CoverDump = serde_json::from_str(&text).unwrap();
        let (cover2, cfg2) = from_dump(&m, &parsed).unwrap();
        assert_eq!(cover, cover2);
        assert_eq!(cfg, cfg2);
    }
}
