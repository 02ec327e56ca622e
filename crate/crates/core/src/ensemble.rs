//! Ensembles, choices, and choice-space operations.
//!
//! An ensemble indexes finite non-empty value domains by variable name; a
//! choice picks one value per index. Choice spaces (the general Cartesian
//! product) are never materialized implicitly — only
//! [`enumerate_choice_space`] does so, under an explicit bound.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar domain value: integer or symbol.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Sym(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => write!(f, "'{s}'"),
        }
    }
}

/// An indexed family of finite, non-empty, duplicate-free value domains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ensemble {
    terms: BTreeMap<String, Vec<Value>>,
}

impl Ensemble {
    /// Builds an ensemble, enforcing the construction invariants:
    /// non-empty index set, non-empty duplicate-free domains.
    pub fn new(terms: BTreeMap<String, Vec<Value>>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::domain("ensemble requires a non-empty index set"));
        }
        for (name, domain) in &terms {
            if domain.is_empty() {
                return Err(Error::domain(format!("domain of `{name}` is empty")));
            }
            let mut seen = BTreeSet::new();
            for v in domain {
                if !seen.insert(v) {
                    return Err(Error::domain(format!(
                        "domain of `{name}` contains duplicate value {v}"
                    )));
                }
            }
        }
        Ok(Ensemble { terms })
    }

    pub fn indices(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(|s| s.as_str())
    }

    pub fn index_set(&self) -> BTreeSet<String> {
        self.terms.keys().cloned().collect()
    }

    pub fn domain(&self, index: &str) -> Option<&[Value]> {
        self.terms.get(index).map(|d| d.as_slice())
    }

    pub fn contains_index(&self, index: &str) -> bool {
        self.terms.contains_key(index)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of choices the ensemble generates, i.e. the product of the
    /// domain sizes. `None` on u128 overflow.
    pub fn space_cardinality(&self) -> Option<u128> {
        self.terms
            .values()
            .try_fold(1u128, |acc, d| acc.checked_mul(d.len() as u128))
    }

    /// Restriction of the ensemble to a subset of its index set.
    pub fn restrict(&self, indices: &BTreeSet<String>) -> Result<Ensemble> {
        let mut terms = BTreeMap::new();
        for idx in indices {
            match self.terms.get(idx) {
                Some(domain) => {
                    terms.insert(idx.clone(), domain.clone());
                }
                None => return Err(Error::domain(format!("index `{idx}` not in ensemble"))),
            }
        }
        Ensemble::new(terms)
    }

    /// True when every term of `other` is also a term of `self`
    /// (same index, identical domain).
    pub fn contains_ensemble(&self, other: &Ensemble) -> bool {
        other
            .terms
            .iter()
            .all(|(idx, dom)| self.terms.get(idx).is_some_and(|d| d == dom))
    }

    /// Dyadic product of two disjoint ensembles: the union of their terms.
    pub fn dyadic_product(&self, other: &Ensemble) -> Result<Ensemble> {
        let mut terms = self.terms.clone();
        for (idx, dom) in &other.terms {
            if terms.insert(idx.clone(), dom.clone()).is_some() {
                return Err(Error::Overlap(idx.clone()));
            }
        }
        Ensemble::new(terms)
    }

    /// Set difference `self \ other` of the term sets; `other` must be
    /// contained in `self`. `None` when nothing remains.
    pub fn difference(&self, other: &Ensemble) -> Result<Option<Ensemble>> {
        if !self.contains_ensemble(other) {
            return Err(Error::domain(
                "difference requires the subtrahend to be contained in the minuend",
            ));
        }
        let terms: BTreeMap<_, _> = self
            .terms
            .iter()
            .filter(|(idx, _)| !other.terms.contains_key(*idx))
            .map(|(idx, dom)| (idx.clone(), dom.clone()))
            .collect();
        if terms.is_empty() {
            Ok(None)
        } else {
            Ok(Some(Ensemble { terms }))
        }
    }
}

/// One value selected per index. Relative to a generating ensemble `E`,
/// a choice is valid when its domain equals `E`'s index set and each value
/// lies in the corresponding domain. The empty choice is permitted.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Choice(BTreeMap<String, Value>);

impl Choice {
    pub fn new(assignments: BTreeMap<String, Value>) -> Self {
        Choice(assignments)
    }

    pub fn empty() -> Self {
        Choice(BTreeMap::new())
    }

    pub fn get(&self, index: &str) -> Option<&Value> {
        self.0.get(index)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    pub fn index_set(&self) -> BTreeSet<String> {
        self.0.keys().cloned().collect()
    }

    /// Checks membership in the choice space of `ensemble`.
    pub fn is_choice_of(&self, ensemble: &Ensemble) -> bool {
        self.0.len() == ensemble.len()
            && self
                .0
                .iter()
                .all(|(idx, v)| ensemble.domain(idx).is_some_and(|d| d.contains(v)))
    }

    pub fn validate_against(&self, ensemble: &Ensemble, what: &str) -> Result<()> {
        if self.is_choice_of(ensemble) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{what} is not a choice of the expected ensemble: {self}"
            )))
        }
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (idx, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{idx}={v}")?;
        }
        write!(f, "}}")
    }
}

/// Mapping restriction of a choice to a subset of its indices.
/// The empty index set yields the empty choice.
pub fn restrict_choice(choice: &Choice, indices: &BTreeSet<String>) -> Result<Choice> {
    let mut out = BTreeMap::new();
    for idx in indices {
        match choice.get(idx) {
            Some(v) => {
                out.insert(idx.clone(), v.clone());
            }
            None => return Err(Error::domain(format!("index `{idx}` not in choice domain"))),
        }
    }
    Ok(Choice(out))
}

/// Dyadic choice product: the union of two choices over disjoint index sets.
pub fn dyadic_product(a: &Choice, b: &Choice) -> Result<Choice> {
    let mut out = a.0.clone();
    for (idx, v) in &b.0 {
        if out.insert(idx.clone(), v.clone()).is_some() {
            return Err(Error::Overlap(idx.clone()));
        }
    }
    Ok(Choice(out))
}

/// Stimulus ensemble Ψ with persistent sub-ensemble Φ; the remainder
/// Ψ∖Φ generates the volatile (event) variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    stimulus: Ensemble,
    persistent: Ensemble,
    volatile: Option<Ensemble>,
}

impl Basis {
    pub fn new(stimulus: Ensemble, persistent: Ensemble) -> Result<Self> {
        if !stimulus.contains_ensemble(&persistent) {
            return Err(Error::domain(
                "persistent ensemble must be contained term-by-term in the stimulus ensemble",
            ));
        }
        let volatile = stimulus.difference(&persistent)?;
        Ok(Basis {
            stimulus,
            persistent,
            volatile,
        })
    }

    pub fn stimulus(&self) -> &Ensemble {
        &self.stimulus
    }

    pub fn persistent(&self) -> &Ensemble {
        &self.persistent
    }

    /// The volatile remainder; `None` when Ψ = Φ (no event space).
    pub fn volatile(&self) -> Option<&Ensemble> {
        self.volatile.as_ref()
    }

    pub fn has_event_space(&self) -> bool {
        self.volatile.is_some()
    }

    pub fn persistent_indices(&self) -> BTreeSet<String> {
        self.persistent.index_set()
    }

    pub fn volatile_indices(&self) -> BTreeSet<String> {
        self.volatile
            .as_ref()
            .map(|e| e.index_set())
            .unwrap_or_default()
    }

    /// Splits the basis into (Φ, Ξ = Ψ∖Φ). The two parts are disjoint and
    /// their union is Ψ; Ξ is `None` when the basis has no event space.
    pub fn partition(&self) -> (&Ensemble, Option<&Ensemble>) {
        (&self.persistent, self.volatile.as_ref())
    }

    /// Persistent component of a stimulus choice.
    pub fn persistent_part(&self, psi: &Choice) -> Result<Choice> {
        restrict_choice(psi, &self.persistent_indices())
    }

    /// Volatile component of a stimulus choice (empty when no event space).
    pub fn volatile_part(&self, psi: &Choice) -> Result<Choice> {
        restrict_choice(psi, &self.volatile_indices())
    }
}

/// Enumerates every choice of `ensemble` exactly once, in lexicographic
/// order by index name then domain order. Errors when the space exceeds
/// `bound`.
pub fn enumerate_choice_space(ensemble: &Ensemble, bound: u128) -> Result<Vec<Choice>> {
    let cardinality = ensemble.space_cardinality().ok_or(Error::Capacity {
        what: "choice space".into(),
        cardinality: u128::MAX,
        bound,
    })?;
    if cardinality > bound {
        return Err(Error::Capacity {
            what: "choice space".into(),
            cardinality,
            bound,
        });
    }
    let names: Vec<&String> = ensemble.terms.keys().collect();
    let domains: Vec<&Vec<Value>> = ensemble.terms.values().collect();
    let mut out = Vec::with_capacity(cardinality as usize);
    let mut cursor = vec![0usize; names.len()];
    loop {
        let mut map = BTreeMap::new();
        for (k, name) in names.iter().enumerate() {
            map.insert((*name).clone(), domains[k][cursor[k]].clone());
        }
        out.push(Choice(map));
        // advance odometer, last index fastest
        let mut pos = names.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < domains[pos].len() {
                break;
            }
            cursor[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ens(pairs: &[(&str, &[i64])]) -> Ensemble {
        Ensemble::new(
            pairs
                .iter()
                .map(|(n, d)| (n.to_string(), d.iter().map(|&v| Value::Int(v)).collect()))
                .collect(),
        )
        .unwrap()
    }

    fn choice(pairs: &[(&str, i64)]) -> Choice {
        Choice::new(
            pairs
                .iter()
                .map(|(n, v)| (n.to_string(), Value::Int(*v)))
                .collect(),
        )
    }

    fn names(list: &[&str]) -> BTreeSet<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn restrict_to_subdomain() {
        let c = choice(&[("x", 1), ("y", 2)]);
        let r = restrict_choice(&c, &names(&["x"])).unwrap();
        assert_eq!(r, choice(&[("x", 1)]));
    }

    #[test]
    fn restrict_to_empty_yields_empty_choice() {
        let c = choice(&[("x", 1)]);
        let r = restrict_choice(&c, &BTreeSet::new()).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn restrict_unknown_index_is_domain_error() {
        let c = choice(&[("x", 1)]);
        assert!(matches!(
            restrict_choice(&c, &names(&["z"])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dyadic_product_is_disjoint_union() {
        let a = choice(&[("x", 1)]);
        let b = choice(&[("y", 2)]);
        assert_eq!(dyadic_product(&a, &b).unwrap(), choice(&[("x", 1), ("y", 2)]));
        assert_eq!(dyadic_product(&b, &a).unwrap(), dyadic_product(&a, &b).unwrap());
    }

    #[test]
    fn dyadic_product_empty_identity() {
        let a = Choice::empty();
        let b = choice(&[("y", 2)]);
        assert_eq!(dyadic_product(&a, &b).unwrap(), b);
    }

    #[test]
    fn dyadic_product_rejects_overlap() {
        let a = choice(&[("x", 1)]);
        let b = choice(&[("x", 2)]);
        assert!(matches!(dyadic_product(&a, &b), Err(Error::Overlap(_))));
    }

    #[test]
    fn restrict_then_product_roundtrip_all_choices() {
        let e = ens(&[("m", &[0, 1]), ("s", &[0, 1])]);
        let m = names(&["m"]);
        let s = names(&["s"]);
        for psi in enumerate_choice_space(&e, 100).unwrap() {
            let a = restrict_choice(&psi, &m).unwrap();
            let b = restrict_choice(&psi, &s).unwrap();
            assert_eq!(dyadic_product(&a, &b).unwrap(), psi);
        }
    }

    #[test]
    fn product_splitting_is_bijective() {
        let e = ens(&[("x", &[0, 1]), ("y", &[0, 1])]);
        let xs = names(&["x"]);
        let ys = names(&["y"]);
        let mut seen = BTreeSet::new();
        for psi in enumerate_choice_space(&e, 100).unwrap() {
            let pair = (
                restrict_choice(&psi, &xs).unwrap(),
                restrict_choice(&psi, &ys).unwrap(),
            );
            assert!(seen.insert(pair), "distinct products must split distinctly");
        }
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn partition_splits_basis() {
        let psi = ens(&[("m", &[0, 1]), ("s", &[0, 1])]);
        let phi = ens(&[("m", &[0, 1])]);
        let basis = Basis::new(psi, phi.clone()).unwrap();
        let (p, v) = basis.partition();
        assert_eq!(p, &phi);
        assert_eq!(v.unwrap(), &ens(&[("s", &[0, 1])]));
        assert!(basis.has_event_space());
    }

    #[test]
    fn partition_flags_missing_event_space() {
        let psi = ens(&[("m", &[0, 1])]);
        let basis = Basis::new(psi.clone(), psi).unwrap();
        assert!(!basis.has_event_space());
        assert!(basis.partition().1.is_none());
    }

    #[test]
    fn partition_cardinality_product() {
        let psi = ens(&[("a", &[0, 1]), ("b", &[0, 1, 2]), ("c", &[5, 6])]);
        let phi = ens(&[("a", &[0, 1]), ("c", &[5, 6])]);
        let basis = Basis::new(psi.clone(), phi).unwrap();
        let total = enumerate_choice_space(&psi, 1000).unwrap().len();
        let (p, v) = basis.partition();
        let np = enumerate_choice_space(p, 1000).unwrap().len();
        let nv = enumerate_choice_space(v.unwrap(), 1000).unwrap().len();
        assert_eq!(total, np * nv);
    }

    #[test]
    fn basis_rejects_mismatched_persistent() {
        let psi = ens(&[("m", &[0, 1])]);
        let phi = ens(&[("m", &[0, 1, 2])]);
        assert!(Basis::new(psi, phi).is_err());
    }

    #[test]
    fn enumerate_single_binary_variable() {
        let e = ens(&[("x", &[0, 1])]);
        let space = enumerate_choice_space(&e, 10).unwrap();
        assert_eq!(space, vec![choice(&[("x", 0)]), choice(&[("x", 1)])]);
    }

    #[test]
    fn enumerate_two_by_two() {
        let mut terms = BTreeMap::new();
        terms.insert("x".to_string(), vec![Value::Int(0), Value::Int(1)]);
        terms.insert(
            "y".to_string(),
            vec![Value::Sym("a".into()), Value::Sym("b".into())],
        );
        let e = Ensemble::new(terms).unwrap();
        let space = enumerate_choice_space(&e, 10).unwrap();
        assert_eq!(space.len(), 4);
        // x varies slowest (lexicographic by index name)
        assert_eq!(space[0].get("x"), Some(&Value::Int(0)));
        assert_eq!(space[0].get("y"), Some(&Value::Sym("a".into())));
        assert_eq!(space[1].get("x"), Some(&Value::Int(0)));
        assert_eq!(space[1].get("y"), Some(&Value::Sym("b".into())));
        assert_eq!(space[3].get("x"), Some(&Value::Int(1)));
    }

    #[test]
    fn enumerate_respects_bound() {
        let e = ens(&[("a", &[0, 1]), ("b", &[0, 1])]);
        match enumerate_choice_space(&e, 3) {
            Err(Error::Capacity { cardinality, .. }) => assert_eq!(cardinality, 4),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn empty_ensemble_rejected() {
        assert!(Ensemble::new(BTreeMap::new()).is_err());
    }

    #[test]
    fn hobsons_choice_allowed() {
        let e = ens(&[("k", &[7])]);
        let space = enumerate_choice_space(&e, 10).unwrap();
        assert_eq!(space.len(), 1);
    }

    #[test]
    fn cardinality_matches_enumeration() {
        let e = ens(&[("a", &[0, 1, 2]), ("b", &[0, 1])]);
        assert_eq!(e.space_cardinality(), Some(6));
        assert_eq!(enumerate_choice_space(&e, 100).unwrap().len(), 6);
    }
}
