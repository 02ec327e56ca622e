//! Randomized invariants: choice-space algebra over arbitrary small
//! ensembles, and expression-parser robustness on arbitrary input.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use hazcone_core::ensemble::{
    dyadic_product, enumerate_choice_space, restrict_choice, Basis, Choice, Ensemble, Value,
};
use hazcone_core::expr;
use hazcone_core::reverse::{to_test, PredecessorWalk};
use hazcone_core::{Frame, Step};

fn small_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        (-3i64..=3).prop_map(Value::Int),
        "[a-c]{1,2}".prop_map(Value::Sym),
    ]
}

fn small_ensemble(max_vars: usize) -> impl Strategy<Value = Ensemble> {
    proptest::collection::btree_map(
        "[a-e]",
        proptest::collection::btree_set(small_value(), 1..=3),
        1..=max_vars,
    )
    .prop_map(|terms| {
        Ensemble::new(
            terms
                .into_iter()
                .map(|(name, domain)| (name, domain.into_iter().collect::<Vec<_>>()))
                .collect(),
        )
        .expect("non-empty domains by construction")
    })
}

proptest! {
    /// |∏Ψ| equals the product of the domain sizes, checked exhaustively.
    #[test]
    fn space_cardinality_is_domain_product(ensemble in small_ensemble(4)) {
        let expected: u128 = ensemble
            .indices()
            .map(|i| ensemble.domain(i).unwrap().len() as u128)
            .product();
        prop_assert_eq!(ensemble.space_cardinality(), Some(expected));
        let space = enumerate_choice_space(&ensemble, 10_000).unwrap();
        prop_assert_eq!(space.len() as u128, expected);
        let distinct: BTreeSet<_> = space.iter().collect();
        prop_assert_eq!(distinct.len(), space.len());
    }

    /// Splitting by restriction then taking the dyadic product is the
    /// identity, and distinct choices split distinctly.
    #[test]
    fn partition_reconstruction(ensemble in small_ensemble(4), split_mask in any::<u64>()) {
        let names: Vec<String> = ensemble.indices().map(str::to_string).collect();
        let left: BTreeSet<String> = names
            .iter()
            .enumerate()
            .filter(|(i, _)| split_mask >> i & 1 == 1)
            .map(|(_, n)| n.clone())
            .collect();
        let right: BTreeSet<String> = names
            .iter()
            .filter(|n| !left.contains(*n))
            .cloned()
            .collect();
        let mut pairs = BTreeSet::new();
        for psi in enumerate_choice_space(&ensemble, 10_000).unwrap() {
            let a = restrict_choice(&psi, &left).unwrap();
            let b = restrict_choice(&psi, &right).unwrap();
            prop_assert_eq!(dyadic_product(&a, &b).unwrap(), psi);
            prop_assert!(pairs.insert((a, b)));
        }
    }

    /// Restricting the enumerated space pointwise equals enumerating the
    /// restricted ensemble.
    #[test]
    fn restriction_space_commutation(ensemble in small_ensemble(4), keep_mask in any::<u64>()) {
        let keep: BTreeSet<String> = ensemble
            .indices()
            .enumerate()
            .filter(|(i, _)| keep_mask >> i & 1 == 1)
            .map(|(_, n)| n.to_string())
            .collect();
        prop_assume!(!keep.is_empty());
        let restricted: BTreeSet<Choice> = enumerate_choice_space(&ensemble, 10_000)
            .unwrap()
            .iter()
            .map(|psi| restrict_choice(psi, &keep).unwrap())
            .collect();
        let of_restriction: BTreeSet<Choice> =
            enumerate_choice_space(&ensemble.restrict(&keep).unwrap(), 10_000)
                .unwrap()
                .into_iter()
                .collect();
        prop_assert_eq!(restricted, of_restriction);
    }

    /// Every stimulus choice splits uniquely across a basis partition.
    #[test]
    fn basis_partition_reconstruction(ensemble in small_ensemble(4), persist_mask in any::<u64>()) {
        let persistent_names: BTreeSet<String> = ensemble
            .indices()
            .enumerate()
            .filter(|(i, _)| persist_mask >> i & 1 == 1)
            .map(|(_, n)| n.to_string())
            .collect();
        prop_assume!(!persistent_names.is_empty());
        let persistent = ensemble.restrict(&persistent_names).unwrap();
        let basis = Basis::new(ensemble.clone(), persistent).unwrap();
        for psi in enumerate_choice_space(&ensemble, 10_000).unwrap() {
            let phi = basis.persistent_part(&psi).unwrap();
            let xi = basis.volatile_part(&psi).unwrap();
            prop_assert_eq!(dyadic_product(&phi, &xi).unwrap(), psi);
        }
    }

    /// The expression parser never panics: it accepts or errors.
    #[test]
    fn parser_total_on_arbitrary_input(src in ".{0,60}") {
        let _ = expr::parse(&src);
    }

    /// Parsed expressions evaluate or error, never panic, over an arbitrary
    /// integer scope.
    #[test]
    fn evaluation_total_on_parsed_input(
        src in "[a-c0-9 ()+*=<>!-]{0,30}",
        a in -3i64..=3,
        b in -3i64..=3,
        c in -3i64..=3,
    ) {
        if let Ok(expr) = expr::parse(&src) {
            let scope = Choice::new(BTreeMap::from([
                ("a".to_string(), Value::Int(a)),
                ("b".to_string(), Value::Int(b)),
                ("c".to_string(), Value::Int(c)),
            ]));
            let _ = expr.eval(&hazcone_core::expr::ChoiceScope(&scope));
        }
    }

    /// Reversing and re-indexing a test recovers its source walk exactly,
    /// including volatile components at every index.
    #[test]
    fn test_conversion_round_trips(
        loci in proptest::collection::vec("[LMN]", 1..=5),
        modes in proptest::collection::vec(0i64..=2, 1..=5),
    ) {
        let n = loci.len().min(modes.len());
        let steps: Vec<Step> = (0..n)
            .map(|i| Step {
                locus: loci[i].clone(),
                functionality: "f".into(),
                frame: Frame {
                    abscissa: Choice::new(BTreeMap::from([
                        ("m".to_string(), Value::Int(modes[i])),
                        ("s".to_string(), Value::Int((i % 2) as i64)),
                    ])),
                    ordinate: Choice::new(BTreeMap::from([(
                        "m".to_string(),
                        Value::Int(modes[i]),
                    )])),
                },
            })
            .collect();
        let walk = PredecessorWalk::new(steps).unwrap();
        let test = to_test(&walk);
        prop_assert_eq!(test.len(), walk.len());
        prop_assert_eq!(&test.to_walk(), &walk);
        for i in 1..=test.len() {
            prop_assert_eq!(test.step(i), walk.step_at(i as i64 - walk.len() as i64));
        }
    }
}
