//! Operational profiles: orbits under a usage pattern, arrival counting,
//! relative profiles, the synchronization clock, and the counting norm.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::automaton::{Automaton, ExcitationSource, Step, TraceSource, Walk};
use crate::ensemble::{Choice, Value};
use crate::error::{Error, Result};

/// Splits a base seed into independent per-run seeds: the run index is
/// hashed with splitmix64 and XORed into the base, then hashed again.
/// Documented so concurrent aggregation stays order-independent.
pub fn derive_seed(base: u64, run_index: u64) -> u64 {
    splitmix64(base ^ splitmix64(run_index.wrapping_add(0x9e3779b97f4a7c15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// How volatile excitations are produced during an orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PatternKind {
    /// Per-volatile-variable categorical distributions, sampled
    /// independently each step.
    Independent {
        distributions: BTreeMap<String, Vec<(Value, f64)>>,
    },
    /// A recorded finite excitation sequence, replayed in order.
    Trace { excitations: Vec<Choice> },
}

/// A usage pattern: the stochastic (or replayed) source of volatile
/// stimulus driving "normal operations", plus its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsagePattern {
    pub kind: PatternKind,
    pub seed: u64,
}

impl UsagePattern {
    pub fn independent(
        distributions: BTreeMap<String, Vec<(Value, f64)>>,
        seed: u64,
    ) -> UsagePattern {
        UsagePattern {
            kind: PatternKind::Independent { distributions },
            seed,
        }
    }

    pub fn trace(excitations: Vec<Choice>, seed: u64) -> UsagePattern {
        UsagePattern {
            kind: PatternKind::Trace { excitations },
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> UsagePattern {
        UsagePattern {
            kind: self.kind.clone(),
            seed,
        }
    }

    /// Validates the pattern against an automaton's volatile ensemble:
    /// every volatile variable is covered, values lie in their domains, and
    /// each categorical distribution sums to 1 within 1e-9.
    pub fn validate(&self, automaton: &Automaton) -> Result<()> {
        let volatile = automaton.basis().volatile();
        match &self.kind {
            PatternKind::Independent { distributions } => {
                let Some(volatile) = volatile else {
                    if distributions.is_empty() {
                        return Ok(());
                    }
                    return Err(Error::validation(
                        "usage",
                        "pattern names volatile variables of a basis with no event space",
                    ));
                };
                for name in volatile.indices() {
                    let dist = distributions.get(name).ok_or_else(|| {
                        Error::validation(
                            "usage",
                            format!("no distribution for volatile variable `{name}`"),
                        )
                    })?;
                    let domain = volatile.domain(name).expect("iterating indices");
                    let mut total = 0.0;
                    let mut seen = BTreeSet::new();
                    for (value, p) in dist {
                        if !domain.contains(value) {
                            return Err(Error::validation(
                                "usage",
                                format!("`{name}` distribution names {value}, not in its domain"),
                            ));
                        }
                        if !seen.insert(value) {
                            return Err(Error::validation(
                                "usage",
                                format!("`{name}` distribution repeats {value}"),
                            ));
                        }
                        if !(0.0..=1.0).contains(p) {
                            return Err(Error::validation(
                                "usage",
                                format!("`{name}` probability {p} out of range"),
                            ));
                        }
                        total += p;
                    }
                    if (total - 1.0).abs() > 1e-9 {
                        return Err(Error::validation(
                            "usage",
                            format!("`{name}` distribution sums to {total}, not 1"),
                        ));
                    }
                }
                for extra in distributions.keys() {
                    if !volatile.contains_index(extra) {
                        return Err(Error::validation(
                            "usage",
                            format!("distribution for unknown volatile variable `{extra}`"),
                        ));
                    }
                }
                Ok(())
            }
            PatternKind::Trace { excitations } => {
                for (i, xi) in excitations.iter().enumerate() {
                    match volatile {
                        Some(v) => xi.validate_against(v, &format!("trace excitation {i}"))?,
                        None => {
                            if !xi.is_empty() {
                                return Err(Error::validation(
                                    "usage",
                                    format!("trace excitation {i} non-empty without event space"),
                                ));
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Builds a single-consumer excitation source for one run.
    pub fn source(&self) -> Box<dyn ExcitationSource> {
        match &self.kind {
            PatternKind::Independent { distributions } => Box::new(IndependentSource {
                rng: ChaCha12Rng::seed_from_u64(self.seed),
                distributions: distributions.clone(),
            }),
            PatternKind::Trace { excitations } => {
                Box::new(TraceSource::new(excitations.clone()))
            }
        }
    }
}

struct IndependentSource {
    rng: ChaCha12Rng,
    distributions: BTreeMap<String, Vec<(Value, f64)>>,
}

impl ExcitationSource for IndependentSource {
    fn next_excitation(&mut self, _index: usize) -> Result<Choice> {
        let mut out = BTreeMap::new();
        for (name, dist) in &self.distributions {
            let u: f64 = self.rng.random();
            let mut acc = 0.0;
            let mut chosen = &dist.last().expect("validated non-empty").0;
            for (value, p) in dist {
                acc += p;
                if u < acc {
                    chosen = value;
                    break;
                }
            }
            out.insert(name.clone(), chosen.clone());
        }
        Ok(Choice::new(out))
    }
}

/// A decidable reference set of steps Z ⊆ S.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StepPredicate {
    /// Matches on locus and/or functionality name and/or exact frame values.
    Pattern {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        locus: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        functionality: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        abscissa: Option<BTreeMap<String, Value>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ordinate: Option<BTreeMap<String, Value>>,
    },
    /// Membership in an explicit step set.
    Steps(BTreeSet<Step>),
}

impl StepPredicate {
    pub fn locus(name: &str) -> StepPredicate {
        StepPredicate::Pattern {
            locus: Some(name.to_string()),
            functionality: None,
            abscissa: None,
            ordinate: None,
        }
    }

    pub fn steps(set: BTreeSet<Step>) -> StepPredicate {
        StepPredicate::Steps(set)
    }

    pub fn matches(&self, step: &Step) -> bool {
        match self {
            StepPredicate::Steps(set) => set.contains(step),
            StepPredicate::Pattern {
                locus,
                functionality,
                abscissa,
                ordinate,
            } => {
                if locus.as_ref().is_some_and(|l| l != &step.locus) {
                    return false;
                }
                if functionality
                    .as_ref()
                    .is_some_and(|f| f != &step.functionality)
                {
                    return false;
                }
                if let Some(required) = abscissa {
                    for (var, value) in required {
                        if step.frame.abscissa.get(var) != Some(value) {
                            return false;
                        }
                    }
                }
                if let Some(required) = ordinate {
                    for (var, value) in required {
                        if step.frame.ordinate.get(var) != Some(value) {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }
}

/// Conditional execution probabilities over the concrete steps of a
/// reference set observed in an orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeProfile {
    /// Distinct matched steps with observation counts and estimated
    /// conditional probabilities.
    pub support: Vec<ProfileEntry>,
    pub total_matches: usize,
    pub walk_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub step: Step,
    pub probability: f64,
    pub count: usize,
}

impl RelativeProfile {
    pub fn probability_of(&self, step: &Step) -> f64 {
        self.support
            .iter()
            .find(|e| &e.step == step)
            .map(|e| e.probability)
            .unwrap_or(0.0)
    }
}

/// An estimate of the counting norm ‖Z‖ with a convergence diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// Events per second at the final step.
    pub value: f64,
    /// Relative change of the estimate over the last diagnostic window.
    pub window_delta: f64,
    pub steps_used: usize,
    pub converged: bool,
}

/// Runs an orbit: a walk of `length` steps from `start` driven by
/// excitations drawn from the pattern. Deterministic under a fixed seed.
pub fn simulate_orbit(
    automaton: &Automaton,
    start: &Step,
    pattern: &UsagePattern,
    length: usize,
) -> Result<Walk> {
    if length == 0 {
        return Err(Error::domain("orbit length must be at least 1"));
    }
    if !automaton.is_consistent(start)? {
        return Err(Error::domain("orbit start step must be consistent"));
    }
    pattern.validate(automaton)?;
    let mut source = pattern.source();
    automaton.walk(start, source.as_mut(), length)
}

/// N_Z(walk, k): arrivals of Z within the first k steps. The empty match
/// set counts 0.
pub fn count_arrivals(walk: &Walk, z: &StepPredicate, k: usize) -> Result<usize> {
    if k > walk.len() {
        return Err(Error::domain(format!(
            "count index {k} exceeds walk length {}",
            walk.len()
        )));
    }
    Ok(walk.steps[..k].iter().filter(|s| z.matches(s)).count())
}

/// Estimates the relative operational profile of Z from an orbit:
/// probability(z) = N_{z}/N_Z over distinct matched steps.
pub fn estimate_relative_profile(walk: &Walk, z: &StepPredicate) -> Result<RelativeProfile> {
    let mut counts: BTreeMap<&Step, usize> = BTreeMap::new();
    let mut total = 0usize;
    for step in &walk.steps {
        if z.matches(step) {
            *counts.entry(step).or_insert(0) += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::InsufficientData(
            "no steps of the walk match the reference set".into(),
        ));
    }
    let support = counts
        .into_iter()
        .map(|(step, count)| ProfileEntry {
            step: step.clone(),
            probability: count as f64 / total as f64,
            count,
        })
        .collect();
    Ok(RelativeProfile {
        support,
        total_matches: total,
        walk_length: walk.len(),
    })
}

/// sync(walk, k): approximate elapsed time of the first k steps, the sum of
/// the executing functionalities' durations. sync(·, 0) = 0.
pub fn sync(automaton: &Automaton, walk: &Walk, k: usize) -> Result<f64> {
    if k > walk.len() {
        return Err(Error::domain(format!(
            "sync index {k} exceeds walk length {}",
            walk.len()
        )));
    }
    let mut total = 0.0;
    for step in &walk.steps[..k] {
        total += automaton.duration(&step.functionality)?;
    }
    Ok(total)
}

/// Estimates the counting norm ‖Z‖ = N_Z/sync at the final step, with the
/// relative change over the trailing `window` steps as the convergence
/// diagnostic. Non-convergence is reported, never an error.
pub fn counting_norm(
    automaton: &Automaton,
    walk: &Walk,
    z: &StepPredicate,
    window: usize,
    tol: f64,
) -> Result<NormEstimate> {
    let k = walk.len();
    if window == 0 || k < 2 * window {
        return Err(Error::domain(
            "walk too short for the requested diagnostic window",
        ));
    }
    let value = count_arrivals(walk, z, k)? as f64 / sync(automaton, walk, k)?;
    let prior_k = k - window;
    let prior = count_arrivals(walk, z, prior_k)? as f64 / sync(automaton, walk, prior_k)?;
    let window_delta = (value - prior).abs() / value.abs().max(1e-12);
    Ok(NormEstimate {
        value,
        window_delta,
        steps_used: k,
        converged: window_delta <= tol,
    })
}

/// Empirical agreement report for the orbit limit-ratio conjectures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    /// Final N_U/N_Z per run.
    pub member_ratios: Vec<f64>,
    /// Final N_Z/sync per run.
    pub rate_ratios: Vec<f64>,
    pub max_member_deviation: f64,
    pub max_rate_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Compares the limit ratios across precomputed orbits. U must be a
/// sub-predicate of Z on the observed steps.
pub fn conjecture_report_for_orbits(
    automaton: &Automaton,
    orbits: &[Walk],
    z: &StepPredicate,
    u: &StepPredicate,
    tol: f64,
) -> Result<ConjectureReport> {
    if orbits.len() < 2 {
        return Err(Error::domain("conjecture check requires at least two orbits"));
    }
    let mut member_ratios = Vec::with_capacity(orbits.len());
    let mut rate_ratios = Vec::with_capacity(orbits.len());
    for walk in orbits {
        for step in &walk.steps {
            if u.matches(step) && !z.matches(step) {
                return Err(Error::domain(
                    "U must be contained in Z over the observed steps",
                ));
            }
        }
        let k = walk.len();
        let n_z = count_arrivals(walk, z, k)?;
        let n_u = count_arrivals(walk, u, k)?;
        if n_z == 0 {
            return Err(Error::InsufficientData("orbit never arrives at Z".into()));
        }
        member_ratios.push(n_u as f64 / n_z as f64);
        rate_ratios.push(n_z as f64 / sync(automaton, walk, k)?);
    }
    let max_member_deviation = max_pairwise_relative_deviation(&member_ratios);
    let max_rate_deviation = max_pairwise_relative_deviation(&rate_ratios);
    let pass = max_member_deviation <= tol && max_rate_deviation <= tol;
    Ok(ConjectureReport {
        member_ratios,
        rate_ratios,
        max_member_deviation,
        max_rate_deviation,
        tol,
        pass,
    })
}

/// Runs `runs` same-pattern orbits under derived seeds and reports the
/// maximum pairwise deviation of the N_U/N_Z and N_Z/sync ratios. Empirical
/// evidence only; the underlying limits are conjectures.
#[allow(clippy::too_many_arguments)]
pub fn check_limit_conjectures(
    automaton: &Automaton,
    start: &Step,
    pattern: &UsagePattern,
    z: &StepPredicate,
    u: &StepPredicate,
    runs: usize,
    length: usize,
    tol: f64,
) -> Result<ConjectureReport> {
    if runs < 2 {
        return Err(Error::domain("conjecture check requires at least two runs"));
    }
    let mut orbits = Vec::with_capacity(runs);
    for run in 0..runs {
        let seeded = pattern.with_seed(derive_seed(pattern.seed, run as u64));
        orbits.push(simulate_orbit(automaton, start, &seeded, length)?);
    }
    conjecture_report_for_orbits(automaton, &orbits, z, u, tol)
}

fn max_pairwise_relative_deviation(values: &[f64]) -> f64 {
    let mut max = 0.0f64;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            let scale = a.abs().max(b.abs()).max(1e-12);
            max = max.max((a - b).abs() / scale);
        }
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{Actuator, Functionality, JumpRules};
    use crate::ensemble::{Basis, Ensemble};
    use crate::expr::parse;

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
                .collect(),
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
                ("IDLE".to_string(), JumpRules { rules: vec![], default: "FIRE".into() }),
                ("FIRE".to_string(), JumpRules { rules: vec![], default: "IDLE".into() }),
            ]
            .into(),
            1_000_000,
        )
        .unwrap()
    }

    fn sensor_pattern(p_one: f64, seed: u64) -> UsagePattern {
        UsagePattern::independent(
            [(
                "sensor".to_string(),
                vec![(Value::Int(0), 1.0 - p_one), (Value::Int(1), p_one)],
            )]
            .into(),
            seed,
        )
    }

    fn start(gate: &Automaton) -> Step {
        gate.make_consistent_step("IDLE", &choice(&[("mode", 0), ("sensor", 0)]))
            .unwrap()
    }

    #[test]
    fn orbit_length_one_is_start() {
        let gate = gate();
        let s = start(&gate);
        let orbit = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 1), 1).unwrap();
        assert_eq!(orbit.steps, vec![s]);
    }

    #[test]
    fn orbits_are_deterministic_under_fixed_seed() {
        let gate = gate();
        let s = start(&gate);
        let a = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 42), 500).unwrap();
        let b = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 42), 500).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fire_visit_frequency_matches_chain_analysis() {
        // IDLE and FIRE alternate unconditionally, so the stationary
        // frequency of FIRE is exactly 1/2.
        let gate = gate();
        let s = start(&gate);
        let orbit = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 7), 100_000).unwrap();
        let fire = StepPredicate::locus("FIRE");
        let n = count_arrivals(&orbit, &fire, orbit.len()).unwrap();
        let freq = n as f64 / orbit.len() as f64;
        assert!((freq - 0.5).abs() < 1e-4, "freq = {freq}");
    }

    #[test]
    fn counting_conventions() {
        let gate = gate();
        let s = start(&gate);
        let orbit = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 3), 100).unwrap();
        let nothing = StepPredicate::locus("NOWHERE");
        assert_eq!(count_arrivals(&orbit, &nothing, orbit.len()).unwrap(), 0);
        let everything = StepPredicate::Pattern {
            locus: None,
            functionality: None,
            abscissa: None,
            ordinate: None,
        };
        assert_eq!(count_arrivals(&orbit, &everything, 57).unwrap(), 57);
        // monotone in k
        let fire = StepPredicate::locus("FIRE");
        let mut last = 0;
        for k in 0..=orbit.len() {
            let n = count_arrivals(&orbit, &fire, k).unwrap();
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn counting_is_additive_over_disjoint_predicates() {
        let gate = gate();
        let s = start(&gate);
        let orbit = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 9), 1000).unwrap();
        let idle = StepPredicate::locus("IDLE");
        let fire = StepPredicate::locus("FIRE");
        let k = orbit.len();
        let total = count_arrivals(&orbit, &idle, k).unwrap()
            + count_arrivals(&orbit, &fire, k).unwrap();
        assert_eq!(total, k);
    }

    #[test]
    fn relative_profile_sums_to_one_and_matches_reference() {
        let gate = gate();
        let s = start(&gate);
        let orbit = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 5), 20_000).unwrap();
        let fire = StepPredicate::locus("FIRE");
        let profile = estimate_relative_profile(&orbit, &fire).unwrap();
        let total: f64 = profile.support.iter().map(|e| e.probability).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(profile.support.iter().all(|e| fire.matches(&e.step)));
    }

    #[test]
    fn fire_profile_splits_by_sensor_within_three_sigma() {
        // recurring FIRE steps: sensor=1 (track) with p=0.25,
        // sensor=0 (arm) with p=0.75
        let gate = gate();
        let s = start(&gate);
        let orbit = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 11), 100_000).unwrap();
        let fire = StepPredicate::locus("FIRE");
        let profile = estimate_relative_profile(&orbit, &fire).unwrap();
        assert_eq!(profile.support.len(), 2);
        let n = profile.total_matches as f64;
        for entry in &profile.support {
            let expected = match entry.step.frame.abscissa.get("sensor") {
                Some(&Value::Int(1)) => 0.25,
                _ => 0.75,
            };
            let sigma = (expected * (1.0 - expected) / n).sqrt();
            assert!(
                (entry.probability - expected).abs() <= 3.0 * sigma,
                "split {} vs {expected}",
                entry.probability
            );
        }
    }

    #[test]
    fn profile_with_single_matching_step_is_certain() {
        let gate = gate();
        let s = start(&gate);
        let orbit = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 13), 1000).unwrap();
        let one = StepPredicate::steps(BTreeSet::from([orbit.steps[4].clone()]));
        let profile = estimate_relative_profile(&orbit, &one).unwrap();
        assert_eq!(profile.support.len(), 1);
        assert!((profile.support[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn profile_with_no_matches_is_insufficient_data() {
        let gate = gate();
        let s = start(&gate);
        let orbit = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 13), 10).unwrap();
        let never = StepPredicate::locus("NOWHERE");
        assert!(matches!(
            estimate_relative_profile(&orbit, &never),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn sync_is_the_duration_sum() {
        let gate = gate();
        let s = start(&gate);
        let orbit = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 17), 6).unwrap();
        assert_eq!(sync(&gate, &orbit, 0).unwrap(), 0.0);
        // hand sum over the first 5 steps
        let mut expected = 0.0;
        for step in &orbit.steps[..5] {
            expected += gate.duration(&step.functionality).unwrap();
        }
        assert_eq!(sync(&gate, &orbit, 5).unwrap(), expected);
        // strictly increasing
        let mut last = -1.0;
        for k in 0..=orbit.len() {
            let t = sync(&gate, &orbit, k).unwrap();
            assert!(t > last || k == 0);
            last = t;
        }
    }

    #[test]
    fn norm_of_everything_under_unit_durations() {
        // single-locus automaton with τ = 1: one event per second exactly
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
            vec!["L".into()],
            [("L".to_string(), "only".to_string())].into(),
            [("L".to_string(), JumpRules { rules: vec![], default: "L".into() })].into(),
            1_000_000,
        )
        .unwrap();
        let s = automaton
            .make_consistent_step("L", &choice(&[("m", 0), ("s", 0)]))
            .unwrap();
        let pattern = UsagePattern::independent(
            [(
                "s".to_string(),
                vec![(Value::Int(0), 0.5), (Value::Int(1), 0.5)],
            )]
            .into(),
            23,
        );
        let orbit = simulate_orbit(&automaton, &s, &pattern, 1000).unwrap();
        let everything = StepPredicate::Pattern {
            locus: None,
            functionality: None,
            abscissa: None,
            ordinate: None,
        };
        let estimate = counting_norm(&automaton, &orbit, &everything, 100, 0.01).unwrap();
        assert!((estimate.value - 1.0).abs() < 1e-12);
        assert!(estimate.converged);

        // absolute profile = norm × mean step duration under uniform τ
        let k = orbit.len();
        let absolute = count_arrivals(&orbit, &everything, k).unwrap() as f64 / k as f64;
        assert!((absolute - estimate.value * 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_is_subadditive_on_a_shared_walk() {
        let gate = gate();
        let s = start(&gate);
        let orbit = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 29), 50_000).unwrap();
        let idle = StepPredicate::locus("IDLE");
        let fire = StepPredicate::locus("FIRE");
        let union = StepPredicate::Pattern {
            locus: None,
            functionality: None,
            abscissa: None,
            ordinate: None,
        };
        let n_union = counting_norm(&gate, &orbit, &union, 1000, 0.05).unwrap().value;
        let n_idle = counting_norm(&gate, &orbit, &idle, 1000, 0.05).unwrap().value;
        let n_fire = counting_norm(&gate, &orbit, &fire, 1000, 0.05).unwrap().value;
        assert!(n_union <= n_idle + n_fire + 1e-12);
        assert!(n_idle >= 0.0 && n_fire >= 0.0);
    }

    #[test]
    fn fire_norm_matches_chain_analysis() {
        // E[τ] = 0.5·τ(arm) + 0.5·(0.25·τ(track) + 0.75·τ(arm)) = 0.28125 s,
        // FIRE frequency exactly 1/2 ⇒ ‖FIRE‖ = 0.5 / 0.28125 = 16/9 per s.
        let gate = gate();
        let s = start(&gate);
        let orbit = simulate_orbit(&gate, &s, &sensor_pattern(0.25, 31), 100_000).unwrap();
        let fire = StepPredicate::locus("FIRE");
        let estimate = counting_norm(&gate, &orbit, &fire, 10_000, 0.05).unwrap();
        let analytic = 0.5 / 0.28125;
        assert!(
            (estimate.value - analytic).abs() / analytic < 0.01,
            "norm {} vs analytic {analytic}",
            estimate.value
        );
    }

    #[test]
    fn conjecture_report_passes_for_same_pattern_orbits() {
        let gate = gate();
        let s = start(&gate);
        let fire = StepPredicate::locus("FIRE");
        let hot_fire = StepPredicate::Pattern {
            locus: Some("FIRE".into()),
            functionality: None,
            abscissa: Some([("sensor".to_string(), Value::Int(1))].into()),
            ordinate: None,
        };
        let report = check_limit_conjectures(
            &gate,
            &s,
            &sensor_pattern(0.25, 37),
            &fire,
            &hot_fire,
            5,
            100_000,
            0.05,
        )
        .unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn identical_seeds_give_zero_deviation() {
        let gate = gate();
        let s = start(&gate);
        let pattern = sensor_pattern(0.25, 41);
        let orbit = simulate_orbit(&gate, &s, &pattern, 10_000).unwrap();
        let fire = StepPredicate::locus("FIRE");
        let hot = StepPredicate::Pattern {
            locus: Some("FIRE".into()),
            functionality: Some("track".into()),
            abscissa: None,
            ordinate: None,
        };
        let report =
            conjecture_report_for_orbits(&gate, &[orbit.clone(), orbit], &fire, &hot, 0.05)
                .unwrap();
        assert_eq!(report.max_member_deviation, 0.0);
        assert_eq!(report.max_rate_deviation, 0.0);
    }

    #[test]
    fn mixed_patterns_violate_the_conjecture_premise() {
        let gate = gate();
        let s = start(&gate);
        let fire = StepPredicate::locus("FIRE");
        let hot = StepPredicate::Pattern {
            locus: Some("FIRE".into()),
            functionality: None,
            abscissa: Some([("sensor".to_string(), Value::Int(1))].into()),
            ordinate: None,
        };
        let a = simulate_orbit(&gate, &s, &sensor_pattern(0.05, 43), 50_000).unwrap();
        let b = simulate_orbit(&gate, &s, &sensor_pattern(0.9, 44), 50_000).unwrap();
        let report = conjecture_report_for_orbits(&gate, &[a, b], &fire, &hot, 0.05).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn trace_patterns_replay_and_exhaust() {
        let gate = gate();
        let s = start(&gate);
        let trace = vec![choice(&[("sensor", 1)]), choice(&[("sensor", 0)])];
        let pattern = UsagePattern::trace(trace, 0);
        let orbit = simulate_orbit(&gate, &s, &pattern, 3).unwrap();
        assert_eq!(orbit.path(), vec!["IDLE", "FIRE", "IDLE"]);
        assert!(matches!(
            simulate_orbit(&gate, &s, &pattern, 5),
            Err(Error::TraceExhausted(_))
        ));
    }

    #[test]
    fn pattern_validation_rejects_bad_distributions() {
        let gate = gate();
        let bad_sum = UsagePattern::independent(
            [(
                "sensor".to_string(),
                vec![(Value::Int(0), 0.5), (Value::Int(1), 0.4)],
            )]
            .into(),
            0,
        );
        assert!(bad_sum.validate(&gate).is_err());
        let bad_value = UsagePattern::independent(
            [(
                "sensor".to_string(),
                vec![(Value::Int(0), 0.5), (Value::Int(7), 0.5)],
            )]
            .into(),
            0,
        );
        assert!(bad_value.validate(&gate).is_err());
        let missing = UsagePattern::independent(BTreeMap::new(), 0);
        assert!(missing.validate(&gate).is_err());
    }

    #[test]
    fn derived_seeds_differ_across_runs() {
        let mut seen = BTreeSet::new();
        for run in 0..100 {
            assert!(seen.insert(derive_seed(12345, run)));
        }
    }
}
