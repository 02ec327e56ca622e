//! Reverse inference: the iterative converse, predecessor generations,
//! localized predecessor walks, cones, and conversion of walks into
//! forward tests.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::automaton::{Automaton, Step};
use crate::ensemble::enumerate_choice_space;
use crate::error::{Error, Result};

/// A finite backward chain indexed 0 down to −(n−1), with index 0 the crux.
/// Stored crux-first: `steps[j]` holds the step at index −j, so the edge
/// step is `steps[n-1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PredecessorWalk {
    steps: Vec<Step>,
}

impl PredecessorWalk {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::domain("predecessor walk must contain the crux"));
        }
        Ok(PredecessorWalk { steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn crux(&self) -> &Step {
        &self.steps[0]
    }

    /// Step at paper index `i` (0 for the crux, negative backwards).
    pub fn step_at(&self, i: i64) -> Option<&Step> {
        if i > 0 {
            return None;
        }
        self.steps.get((-i) as usize)
    }

    /// Terminus w_{−(n−1)}.
    pub fn edge_step(&self) -> &Step {
        self.steps.last().expect("walks are non-empty")
    }

    /// Crux-first storage order.
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Locus sequence in crux-first order.
    pub fn path(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.locus.as_str()).collect()
    }

    /// True when no locus repeats along the walk's path projection.
    pub fn is_acyclic(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.steps.iter().all(|s| seen.insert(&s.locus))
    }
}

/// Stopping rule bounding cone expansion: a maximum backward depth and an
/// optional set of entry loci at which walks terminate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub max_depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_loci: Option<BTreeSet<String>>,
}

impl StoppingRule {
    pub fn depth(max_depth: usize) -> Self {
        StoppingRule {
            max_depth,
            entry_loci: None,
        }
    }
}

/// A complete independent set of localized predecessor walks converging on
/// a crux step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub crux: Step,
    pub stopping: StoppingRule,
    pub walks: Vec<PredecessorWalk>,
    pub acyclic: bool,
}

impl Cone {
    /// The set of terminal (edge) steps of all member walks. Duplicates
    /// collapse, so for cyclic cones the edge may be smaller than the walk
    /// set.
    pub fn edge(&self) -> BTreeSet<Step> {
        self.walks.iter().map(|w| w.edge_step().clone()).collect()
    }

    /// The edge-step → walk-index bijection of an acyclic cone.
    pub fn edge_bijection(&self) -> Result<BTreeMap<Step, usize>> {
        if !self.acyclic {
            return Err(Error::NotAcyclic);
        }
        let mut map = BTreeMap::new();
        for (i, w) in self.walks.iter().enumerate() {
            if map.insert(w.edge_step().clone(), i).is_some() {
                return Err(Error::InternalConsistency {
                    walk: i,
                    detail: "duplicate edge step in acyclic cone".into(),
                });
            }
        }
        Ok(map)
    }
}

/// A forward test: a reversed, re-indexed predecessor walk. Step 1 is the
/// edge step and step n the crux; stored edge-first so `steps[i-1]` holds
/// test index i.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Test {
    steps: Vec<Step>,
}

impl Test {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Step at test index `i` (1-based).
    pub fn step(&self, i: usize) -> Option<&Step> {
        if i == 0 {
            return None;
        }
        self.steps.get(i - 1)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn edge_step(&self) -> &Step {
        &self.steps[0]
    }

    pub fn crux(&self) -> &Step {
        self.steps.last().expect("tests are non-empty")
    }

    /// Undoes the reversal, recovering the source walk.
    pub fn to_walk(&self) -> PredecessorWalk {
        let mut steps = self.steps.clone();
        steps.reverse();
        PredecessorWalk { steps }
    }
}

/// Reverses and re-indexes a predecessor walk into a forward test,
/// t_i = w_{i−n}. Volatile components of every step are carried verbatim
/// inside the step frames.
pub fn to_test(walk: &PredecessorWalk) -> Test {
    let mut steps = walk.steps.clone();
    steps.reverse();
    Test { steps }
}

fn converse_capacity_check(automaton: &Automaton, bound: u128) -> Result<u128> {
    let psi_card = automaton
        .basis()
        .stimulus()
        .space_cardinality()
        .unwrap_or(u128::MAX);
    let cardinality = psi_card.saturating_mul(automaton.loci().len() as u128);
    if cardinality > bound {
        return Err(Error::Capacity {
            what: "converse candidate space |Λ|·|∏Ψ|".into(),
            cardinality,
            bound,
        });
    }
    Ok(cardinality)
}

/// The iterative converse at `target`: every canonical consistent step
/// s = (λ, ℓ(λ)(ψ), (ψ, f(ψ))) with transit(s, ξ₀) = target, where ξ₀ is the
/// volatile component of the target's abscissa. Solved by the constraining
/// equations: Δ(λ, ψ) = λ₀ and f(ψ) = ψ₀|dom Φ; a non-canonical target has
/// no pre-image under forward iteration.
pub fn converse(automaton: &Automaton, target: &Step, bound: u128) -> Result<BTreeSet<Step>> {
    converse_capacity_check(automaton, bound)?;
    let mut out = BTreeSet::new();
    if !automaton.is_canonical(target)? {
        return Ok(out);
    }
    let target_persistent = automaton.persistent_of(target)?;
    for psi in enumerate_choice_space(automaton.basis().stimulus(), bound)? {
        for locus in automaton.loci() {
            if automaton.jump_target(locus, &psi)? != target.locus {
                continue;
            }
            let candidate = automaton.make_consistent_step(locus, &psi)?;
            if candidate.frame.ordinate == target_persistent {
                out.insert(candidate);
            }
        }
    }
    Ok(out)
}

/// Generations G⁽⁰⁾..G⁽ᵈ⁾ of the inductive backward expansion:
/// G⁽⁰⁾ = {crux}, G⁽ⁿ⁺¹⁾ = ∪_{s∈G⁽ⁿ⁾} converse(s).
pub fn predecessor_generations(
    automaton: &Automaton,
    crux: &Step,
    depth: usize,
    bound: u128,
) -> Result<Vec<BTreeSet<Step>>> {
    if !automaton.is_consistent(crux)? {
        return Err(Error::domain("crux step must be consistent"));
    }
    let mut generations = vec![BTreeSet::from([crux.clone()])];
    for _ in 0..depth {
        let mut next = BTreeSet::new();
        for step in generations.last().unwrap() {
            next.extend(converse(automaton, step, bound)?);
        }
        generations.push(next);
    }
    Ok(generations)
}

/// Backward depth-first expansion from the crux. A branch terminates when
/// its converse is empty, an entry locus is reached, or the depth limit is
/// hit; a predecessor revisiting a locus already on the branch is appended
/// and the branch closed, leaving the cone cyclic. Only maximal walks are
/// retained, which guarantees independence; the result passes the
/// completeness check by construction.
pub fn build_cone(
    automaton: &Automaton,
    crux: &Step,
    stopping: StoppingRule,
    bound: u128,
) -> Result<Cone> {
    if stopping.max_depth == 0 {
        return Err(Error::domain("stopping rule requires max depth ≥ 1"));
    }
    if !automaton.is_consistent(crux)? {
        return Err(Error::domain("crux step must be consistent"));
    }
    let mut walks = Vec::new();
    let mut chain = vec![crux.clone()];
    let mut loci_on_chain = BTreeSet::from([crux.locus.clone()]);
    expand(
        automaton,
        &stopping,
        bound,
        &mut chain,
        &mut loci_on_chain,
        &mut walks,
    )?;
    walks.sort();
    let acyclic = walks.iter().all(PredecessorWalk::is_acyclic);
    Ok(Cone {
        crux: crux.clone(),
        stopping,
        walks,
        acyclic,
    })
}

fn expand(
    automaton: &Automaton,
    stopping: &StoppingRule,
    bound: u128,
    chain: &mut Vec<Step>,
    loci_on_chain: &mut BTreeSet<String>,
    walks: &mut Vec<PredecessorWalk>,
) -> Result<()> {
    let earliest = chain.last().expect("chain holds at least the crux");
    let depth = chain.len() - 1;
    let at_entry = stopping
        .entry_loci
        .as_ref()
        .is_some_and(|set| depth > 0 && set.contains(&earliest.locus));
    if depth >= stopping.max_depth || at_entry {
        walks.push(PredecessorWalk { steps: chain.clone() });
        return Ok(());
    }
    let predecessors = converse(automaton, earliest, bound)?;
    if predecessors.is_empty() {
        walks.push(PredecessorWalk { steps: chain.clone() });
        return Ok(());
    }
    for pred in predecessors {
        if loci_on_chain.contains(&pred.locus) {
            // locus revisit: close the branch with the repeating step
            let mut steps = chain.clone();
            steps.push(pred);
            walks.push(PredecessorWalk { steps });
            continue;
        }
        loci_on_chain.insert(pred.locus.clone());
        chain.push(pred);
        expand(automaton, stopping, bound, chain, loci_on_chain, walks)?;
        let popped = chain.pop().expect("pushed above");
        loci_on_chain.remove(&popped.locus);
    }
    Ok(())
}

/// Witness for a completeness failure: walk index, interior paper index,
/// and the converse step no member walk extends through.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessCounterexample {
    pub walk: usize,
    pub index: i64,
    pub missing: Step,
}

/// The completeness predicate over a set of walks sharing a crux: for every
/// walk w, every interior index i (0 down to −(|w|−2)), and every step s in
/// converse(w_i), some member walk e satisfies e_i = w_i and e_{i−1} = s.
/// Returns the first counterexample found, or `None` when complete.
pub fn check_complete(
    automaton: &Automaton,
    walks: &[PredecessorWalk],
    bound: u128,
) -> Result<Option<CompletenessCounterexample>> {
    if walks.is_empty() {
        return Err(Error::domain("completeness check requires at least one walk"));
    }
    let crux = walks[0].crux();
    if walks.iter().any(|w| w.crux() != crux) {
        return Err(Error::domain("walks must share the crux at index 0"));
    }
    // Witness index for the existential: (i, step at i) → steps some member
    // walk holds at i−1. Equivalent to scanning all walks per query.
    let mut extensions: BTreeMap<(i64, &Step), BTreeSet<&Step>> = BTreeMap::new();
    for walk in walks {
        let steps = walk.steps();
        for j in 0..steps.len().saturating_sub(1) {
            extensions
                .entry((-(j as i64), &steps[j]))
                .or_default()
                .insert(&steps[j + 1]);
        }
    }
    let mut converse_memo: BTreeMap<&Step, BTreeSet<Step>> = BTreeMap::new();
    for (wi, walk) in walks.iter().enumerate() {
        let n = walk.len() as i64;
        for i in (-(n - 2)..=0).rev() {
            let here = walk.step_at(i).expect("interior index");
            if !converse_memo.contains_key(here) {
                converse_memo.insert(here, converse(automaton, here, bound)?);
            }
            let extended = extensions.get(&(i, here));
            for s in &converse_memo[here] {
                if !extended.is_some_and(|set| set.contains(s)) {
                    return Ok(Some(CompletenessCounterexample {
                        walk: wi,
                        index: i,
                        missing: s.clone(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Independence: no walk is a crux-side prefix of a longer member
/// (w'(i) = w(i) for all −(m−1) ≤ i ≤ 0 makes w' dispensable).
pub fn check_independent(walks: &[PredecessorWalk]) -> bool {
    for (i, short) in walks.iter().enumerate() {
        for (j, long) in walks.iter().enumerate() {
            if i == j || short.len() >= long.len() {
                continue;
            }
            if long.steps[..short.len()] == short.steps[..] {
                return false;
            }
        }
    }
    true
}

/// Forward replay of a test on `automaton`: starts at the test's first step
/// as given and transits with the volatile stimuli preserved in each
/// subsequent step. The replayed locus path must reproduce the test's path;
/// divergence signals model/cone mismatch. Frame-level deviations (possible
/// when `automaton` differs from the cone's generator) are returned for the
/// caller to judge.
pub fn replay_test(automaton: &Automaton, test: &Test, walk_id: usize) -> Result<Vec<Step>> {
    let mut replayed = Vec::with_capacity(test.len());
    replayed.push(test.edge_step().clone());
    for i in 2..=test.len() {
        let scripted = test.step(i).expect("index within test");
        let xi = automaton.excitation_of(scripted)?;
        let next = automaton.transit(&replayed[i - 2], &xi)?;
        if next.locus != scripted.locus {
            return Err(Error::InternalConsistency {
                walk: walk_id,
                detail: format!(
                    "replayed path diverges at test index {i}: expected locus `{}`, got `{}`",
                    scripted.locus, next.locus
                ),
            });
        }
        replayed.push(next);
    }
    Ok(replayed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{Actuator, Functionality, JumpRules};
    use crate::ensemble::{Basis, Choice, Ensemble, Value};
    use crate::expr::parse;
    use std::collections::BTreeMap;

    fn binary_ensemble(names: &[&str]) -> Ensemble {
        Ensemble::new(
            names
                .iter()
                .map(|n| (n.to_string(), vec![Value::Int(0), Value::Int(1)]))
                .collect(),
        )
        .unwrap()
    }

    fn choice(pairs: &[(&str, i64)]) -> Choice {
        Choice::new(
            pairs
                .iter()
                .map(|(n, v)| (n.to_string(), Value::Int(*v)))
                .collect::<BTreeMap<_, _>>(),
        )
    }

    fn gate() -> Automaton {
        let basis = Basis::new(
            binary_ensemble(&["mode", "sensor"]),
            binary_ensemble(&["mode"]),
        )
        .unwrap();
        let arm = Functionality {
            name: "arm".into(),
            assignments: [("mode".to_string(), parse("1").unwrap())].into(),
            duration_seconds: 0.25,
        };
        let track = Functionality {
            name: "track".into(),
            assignments: [("mode".to_string(), parse("sensor").unwrap())].into(),
            duration_seconds: 0.5,
        };
        let loader = Actuator {
            name: "loader".into(),
            rules: vec![],
            default: "arm".into(),
        };
        let relay = Actuator {
            name: "relay".into(),
            rules: vec![(parse("sensor = 1").unwrap(), "track".into())],
            default: "arm".into(),
        };
        Automaton::new(
            basis,
            vec![arm, track],
            vec![loader, relay],
            vec!["IDLE".into(), "FIRE".into()],
            [
                ("IDLE".to_string(), "loader".to_string()),
                ("FIRE".to_string(), "relay".to_string()),
            ]
            .into(),
            [
                (
                    "IDLE".to_string(),
                    JumpRules { rules: vec![], default: "FIRE".into() },
                ),
                (
                    "FIRE".to_string(),
                    JumpRules { rules: vec![], default: "IDLE".into() },
                ),
            ]
            .into(),
            1_000_000,
        )
        .unwrap()
    }

    fn gate_crux(gate: &Automaton) -> Step {
        gate.make_consistent_step("FIRE", &choice(&[("mode", 1), ("sensor", 1)]))
            .unwrap()
    }

    /// Brute-force oracle: all canonical steps whose forward transit with the
    /// target's recorded excitation reproduces the target exactly.
    fn converse_oracle(automaton: &Automaton, target: &Step) -> BTreeSet<Step> {
        let xi = automaton.excitation_of(target).unwrap();
        let mut out = BTreeSet::new();
        for psi in enumerate_choice_space(automaton.basis().stimulus(), 10_000).unwrap() {
            for locus in automaton.loci() {
                let candidate = automaton.make_consistent_step(locus, &psi).unwrap();
                if &automaton.transit(&candidate, &xi).unwrap() == target {
                    out.insert(candidate);
                }
            }
        }
        out
    }

    #[test]
    fn converse_of_gate_crux_is_all_idle_steps() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let preds = converse(&gate, &crux, 10_000).unwrap();
        assert_eq!(preds.len(), 4);
        assert!(preds.iter().all(|s| s.locus == "IDLE"));
        assert_eq!(preds, converse_oracle(&gate, &crux));
    }

    #[test]
    fn converse_soundness_every_result_transits_to_target() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let xi = gate.excitation_of(&crux).unwrap();
        for pred in converse(&gate, &crux, 10_000).unwrap() {
            assert_eq!(gate.transit(&pred, &xi).unwrap(), crux);
        }
    }

    #[test]
    fn converse_of_unreachable_target_is_empty() {
        // two loci, jump always targets A: nothing precedes a B step
        let basis = Basis::new(binary_ensemble(&["m", "s"]), binary_ensemble(&["m"])).unwrap();
        let keep = Functionality {
            name: "keep".into(),
            assignments: [("m".to_string(), parse("m").unwrap())].into(),
            duration_seconds: 1.0,
        };
        let only = Actuator {
            name: "only".into(),
            rules: vec![],
            default: "keep".into(),
        };
        let automaton = Automaton::new(
            basis,
            vec![keep],
            vec![only],
            vec!["A".into(), "B".into()],
            [
                ("A".to_string(), "only".to_string()),
                ("B".to_string(), "only".to_string()),
            ]
            .into(),
            [
                ("A".to_string(), JumpRules { rules: vec![], default: "A".into() }),
                ("B".to_string(), JumpRules { rules: vec![], default: "A".into() }),
            ]
            .into(),
            1_000_000,
        )
        .unwrap();
        let target = automaton
            .make_consistent_step("B", &choice(&[("m", 0), ("s", 0)]))
            .unwrap();
        assert!(converse(&automaton, &target, 10_000).unwrap().is_empty());
    }

    #[test]
    fn converse_enforces_the_candidate_bound() {
        let gate = gate();
        let crux = gate_crux(&gate);
        match converse(&gate, &crux, 2) {
            Err(Error::Capacity { cardinality, bound, .. }) => {
                assert_eq!(cardinality, 8); // |Λ|·|∏Ψ| = 2·4
                assert_eq!(bound, 2);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn converse_of_non_canonical_target_is_empty() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let mut inconsistent = crux.clone();
        inconsistent.frame.ordinate = choice(&[("mode", 0)]);
        assert!(converse(&gate, &inconsistent, 10_000).unwrap().is_empty());
    }

    #[test]
    fn generations_base_and_first() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let gens = predecessor_generations(&gate, &crux, 0, 10_000).unwrap();
        assert_eq!(gens.len(), 1);
        assert_eq!(gens[0], BTreeSet::from([crux.clone()]));
        let gens = predecessor_generations(&gate, &crux, 2, 10_000).unwrap();
        assert_eq!(gens[1], converse(&gate, &crux, 10_000).unwrap());
        // hand enumeration: G1 = 4 IDLE steps; G2 = their FIRE predecessors
        assert_eq!(gens[1].len(), 4);
        assert_eq!(gens[2].len(), 4);
        assert!(gens[2].iter().all(|s| s.locus == "FIRE"));
    }

    #[test]
    fn depth_one_gate_cone_is_acyclic_with_four_walks() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let cone = build_cone(&gate, &crux, StoppingRule::depth(1), 10_000).unwrap();
        assert_eq!(cone.walks.len(), 4);
        assert!(cone.acyclic);
        assert_eq!(cone.edge().len(), 4);
        assert!(check_complete(&gate, &cone.walks, 10_000).unwrap().is_none());
        assert!(check_independent(&cone.walks));
        let bij = cone.edge_bijection().unwrap();
        assert_eq!(bij.len(), cone.walks.len());
    }

    #[test]
    fn depth_two_gate_cone_is_cyclic_with_duplicate_edges() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let cone = build_cone(&gate, &crux, StoppingRule::depth(2), 10_000).unwrap();
        assert!(!cone.acyclic);
        assert!(cone.edge().len() < cone.walks.len());
        assert!(cone.edge_bijection().is_err());
        // still complete and independent
        assert!(check_complete(&gate, &cone.walks, 10_000).unwrap().is_none());
        assert!(check_independent(&cone.walks));
    }

    #[test]
    fn degenerate_cone_for_empty_converse() {
        let gate = gate();
        // FIRE crux with mode 0 abscissa: no IDLE functionality maps there
        let crux = gate
            .make_consistent_step("FIRE", &choice(&[("mode", 0), ("sensor", 1)]))
            .unwrap();
        assert!(converse(&gate, &crux, 10_000).unwrap().is_empty());
        let cone = build_cone(&gate, &crux, StoppingRule::depth(3), 10_000).unwrap();
        assert_eq!(cone.walks.len(), 1);
        assert_eq!(cone.walks[0].len(), 1);
        assert_eq!(cone.edge(), BTreeSet::from([crux.clone()]));
        assert!(check_complete(&gate, &cone.walks, 10_000).unwrap().is_none());
    }

    #[test]
    fn build_cone_rejects_inconsistent_crux() {
        let gate = gate();
        let mut crux = gate_crux(&gate);
        crux.frame.ordinate = choice(&[("mode", 0)]);
        assert!(build_cone(&gate, &crux, StoppingRule::depth(1), 10_000).is_err());
    }

    #[test]
    fn entry_locus_stops_expansion() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let stopping = StoppingRule {
            max_depth: 5,
            entry_loci: Some(BTreeSet::from(["IDLE".to_string()])),
        };
        let cone = build_cone(&gate, &crux, stopping, 10_000).unwrap();
        assert!(cone.walks.iter().all(|w| w.len() == 2));
        assert!(cone.acyclic);
    }

    #[test]
    fn deleting_a_walk_breaks_completeness() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let cone = build_cone(&gate, &crux, StoppingRule::depth(1), 10_000).unwrap();
        let mut depleted = cone.walks.clone();
        let removed = depleted.pop().unwrap();
        let counterexample = check_complete(&gate, &depleted, 10_000).unwrap().unwrap();
        assert_eq!(counterexample.index, 0);
        assert_eq!(&counterexample.missing, removed.edge_step());
    }

    #[test]
    fn singleton_crux_walk_is_complete_when_converse_empty() {
        let gate = gate();
        let crux = gate
            .make_consistent_step("FIRE", &choice(&[("mode", 0), ("sensor", 1)]))
            .unwrap();
        let walks = vec![PredecessorWalk::new(vec![crux]).unwrap()];
        assert!(check_complete(&gate, &walks, 10_000).unwrap().is_none());
    }

    #[test]
    fn prefix_walk_is_dispensable() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let cone = build_cone(&gate, &crux, StoppingRule::depth(1), 10_000).unwrap();
        let long = cone.walks[0].clone();
        let short = PredecessorWalk::new(vec![long.crux().clone()]).unwrap();
        assert!(!check_independent(&[short, long]));
        // two equal-length distinct walks are independent
        assert!(check_independent(&cone.walks[..2]));
    }

    #[test]
    fn to_test_reverses_and_reindexes() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let cone = build_cone(&gate, &crux, StoppingRule::depth(1), 10_000).unwrap();
        let walk = &cone.walks[0];
        let test = to_test(walk);
        let n = walk.len();
        for i in 1..=n {
            assert_eq!(test.step(i), walk.step_at(i as i64 - n as i64));
        }
        assert_eq!(test.crux(), walk.crux());
        assert_eq!(test.edge_step(), walk.edge_step());
        assert_eq!(&test.to_walk(), walk);
    }

    #[test]
    fn single_step_walk_tests_to_itself() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let walk = PredecessorWalk::new(vec![crux.clone()]).unwrap();
        let test = to_test(&walk);
        assert_eq!(test.len(), 1);
        assert_eq!(test.step(1), Some(&crux));
    }

    #[test]
    fn tests_of_cone_walks_are_pairwise_distinct() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let cone = build_cone(&gate, &crux, StoppingRule::depth(2), 10_000).unwrap();
        let tests: BTreeSet<Test> = cone.walks.iter().map(to_test).collect();
        assert_eq!(tests.len(), cone.walks.len());
    }

    #[test]
    fn replay_reproduces_cone_walks() {
        let gate = gate();
        let crux = gate_crux(&gate);
        let cone = build_cone(&gate, &crux, StoppingRule::depth(1), 10_000).unwrap();
        for (i, walk) in cone.walks.iter().enumerate() {
            let test = to_test(walk);
            let replayed = replay_test(&gate, &test, i).unwrap();
            assert_eq!(replayed, test.steps());
            assert_eq!(replayed.last().unwrap(), &crux);
        }
    }
}
