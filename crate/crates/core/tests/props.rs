//! Property tests for the point maps and rational plumbing.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use lprx_core::instances::{chain_model, repetition_model};
use lprx_core::lp::{
    embed_configuration, map_v_inverse, map_w, map_w_inverse, CostVectors, LpPoint, LpVar,
    VarCatalog,
};
use lprx_core::model::DEFAULT_ENUM_CAP;
use lprx_core::rat::{format_ratio, parse_ratio};
use lprx_core::simplex::is_integral;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

proptest! {
    #[test]
    fn rational_strings_roundtrip(numer in -1_000_000i64..1_000_000, denom in 1i64..10_000) {
        let r = ratio(numer, denom);
        let text = format_ratio(&r);
        prop_assert_eq!(parse_ratio(&text).unwrap(), r);
    }

    /// Completing reduced marginals and restricting back is the identity,
    /// and the reference coordinate is one minus the rest.
    #[test]
    fn marginal_completion_roundtrip(a_num in 0i64..=12, b_num in 0i64..=12) {
        let model = repetition_model();
        let catalog = Arc::new(VarCatalog::new(vec![
            LpVar::ReducedMarginal { var: 0, sym: 1 },
            LpVar::ReducedMarginal { var: 1, sym: 1 },
        ]));
        let point = LpPoint::new(catalog, vec![ratio(a_num, 12), ratio(b_num, 12)]);
        let full = map_w(&model, &point).unwrap();
        for (i, num) in [(0usize, a_num), (1, b_num)] {
            let zero_coord = full.get(&LpVar::FullMarginal { var: i, sym: 0 }).unwrap();
            let one_coord = full.get(&LpVar::FullMarginal { var: i, sym: 1 }).unwrap();
            prop_assert_eq!(zero_coord + one_coord, BigRational::one());
            prop_assert_eq!(one_coord.clone(), ratio(num, 12));
        }
        let back = map_w_inverse(&model, &full).unwrap();
        prop_assert_eq!(back, point);
    }

    /// The completion preserves cost up to the exact reference-symbol
    /// constant: full-scale cost of the completed point equals the
    /// reduced-scale cost plus the offset.
    #[test]
    fn completion_preserves_cost_up_to_offset(a_num in 0i64..=12, b_num in 0i64..=12) {
        let model = repetition_model();
        let costs = CostVectors::from_model(&model).unwrap();
        let catalog = Arc::new(VarCatalog::new(vec![
            LpVar::ReducedMarginal { var: 0, sym: 1 },
            LpVar::ReducedMarginal { var: 1, sym: 1 },
        ]));
        let reduced_point =
            LpPoint::new(catalog, vec![ratio(a_num, 12), ratio(b_num, 12)]);
        let full = map_w(&model, &reduced_point).unwrap();

        let mut reduced_cost = BigRational::zero();
        for (i, &var) in [0usize, 1].iter().enumerate() {
            let _ = i;
            let v = reduced_point.get(&LpVar::ReducedMarginal { var, sym: 1 }).unwrap();
            reduced_cost += costs.tilde(var, 1) * v;
        }
        let mut full_cost = BigRational::zero();
        for var in 0..2 {
            for sym in 0..2 {
                let v = full.get(&LpVar::FullMarginal { var, sym }).unwrap();
                full_cost += costs.lambda(var, sym) * v;
            }
        }
        prop_assert_eq!(full_cost, reduced_cost + costs.offset());
    }

    /// Indicator images complete to indicator images across every valid
    /// configuration of a chain.
    #[test]
    fn completion_maps_indicators_to_indicators(len in 2usize..6) {
        let model = chain_model(len);
        for cfg in model.global_behaviour(DEFAULT_ENUM_CAP).unwrap() {
            let analysis = embed_configuration(&model, &cfg).unwrap();
            let reduced = map_v_inverse(&model, &analysis).unwrap();
            let completed = map_w(&model, &reduced).unwrap();
            for i in 0..len {
                for sym in 0..2 {
                    let expected = if cfg.0[i] == sym {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    };
                    prop_assert_eq!(
                        completed.get(&LpVar::FullMarginal { var: i, sym }).unwrap().clone(),
                        expected
                    );
                }
            }
            prop_assert!(is_integral(&completed));
        }
    }

    /// Any coordinate that is not exactly 0 or 1 defeats integrality.
    #[test]
    fn integrality_rejects_interior_values(num in 1i64..=11) {
        let catalog = Arc::new(VarCatalog::new(vec![
            LpVar::FullMarginal { var: 0, sym: 0 },
            LpVar::FullMarginal { var: 0, sym: 1 },
        ]));
        let point = LpPoint::new(catalog, vec![ratio(num, 12), BigRational::one()]);
        prop_assert_eq!(is_integral(&point), num == 12);
    }
}
