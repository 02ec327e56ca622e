//! Safety demonstrations: binding a relative profile to a cone edge,
//! drawing seeded samples of predecessor walks through the edge bijection,
//! replaying their forward tests against safety constraints at the crux,
//! and tallying Bernoulli outcomes.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::automaton::{Automaton, Step};
use crate::ensemble::Choice;
use crate::error::{Error, Result};
use crate::expr::{check_references, Expr, FrameScope};
use crate::profile::RelativeProfile;
use crate::reverse::{replay_test, to_test, Cone};
use crate::risk;

/// A named predicate over the crux step's frame: unprimed identifiers read
/// the abscissa (Ψ values), primed identifiers the ordinate (Φ values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyConstraint {
    pub name: String,
    pub predicate: Expr,
}

impl SafetyConstraint {
    /// Static totality check: every referenced variable must exist in the
    /// automaton's stimulus (unprimed) or persistent (primed) ensemble.
    pub fn validate(&self, automaton: &Automaton) -> Result<()> {
        let mut refs = Vec::new();
        self.predicate.references(&mut refs);
        let stimulus = automaton.basis().stimulus().index_set();
        let persistent = automaton.basis().persistent_indices();
        for (name, primed) in refs {
            let known = if primed {
                persistent.contains(&name)
            } else {
                stimulus.contains(&name)
            };
            if !known {
                return Err(Error::validation(
                    "constraints",
                    format!(
                        "constraint `{}` references unknown {}variable `{name}`",
                        self.name,
                        if primed { "ordinate " } else { "" }
                    ),
                ));
            }
        }
        check_references(
            &self.predicate,
            &stimulus.union(&persistent).cloned().collect(),
            true,
            &format!("constraint `{}`", self.name),
        )
    }

    pub fn holds_at(&self, crux: &Step) -> Result<bool> {
        let scope = FrameScope {
            abscissa: &crux.frame.abscissa,
            ordinate: &crux.frame.ordinate,
        };
        self.predicate.eval_guard(&scope).map_err(|e| Error::Expr {
            context: format!("constraint `{}`", self.name),
            msg: e.to_string(),
        })
    }
}

/// Where an edge sampler's probabilities came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProfileProvenance {
    /// Uniform fallback: 1/|edge| on every edge step.
    Uniform,
    /// Estimated relative profile (support restricted to the edge).
    Estimated {
        total_matches: usize,
        walk_length: usize,
    },
}

/// Draws edge steps i.i.d. by profile probability and maps each to its
/// unique walk through the edge bijection of an acyclic cone.
#[derive(Debug, Clone)]
pub struct EdgeSampler {
    entries: Vec<(Step, usize, f64)>,
    cumulative: Vec<f64>,
    provenance: ProfileProvenance,
}

impl EdgeSampler {
    pub fn provenance(&self) -> &ProfileProvenance {
        &self.provenance
    }

    /// (edge step, walk index, probability) triples in canonical order.
    pub fn entries(&self) -> &[(Step, usize, f64)] {
        &self.entries
    }

    pub fn draw(&self, rng: &mut ChaCha12Rng) -> (&Step, usize) {
        let u: f64 = rng.random();
        let position = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.entries.len() - 1);
        let (step, walk, _) = &self.entries[position];
        (step, *walk)
    }
}

/// Ties a relative profile (or the uniform fallback) to the edge of an
/// acyclic cone. Profile support must be contained in the edge; offenders
/// are listed. Edge steps the profile never observed get probability 0.
pub fn bind_profile_to_edge(cone: &Cone, profile: Option<&RelativeProfile>) -> Result<EdgeSampler> {
    let bijection = cone.edge_bijection().map_err(|e| match e {
        Error::InternalConsistency { .. } => Error::NotAcyclic,
        other => other,
    })?;
    let (weights, provenance): (BTreeMap<Step, f64>, ProfileProvenance) = match profile {
        None => {
            let p = 1.0 / bijection.len() as f64;
            (
                bijection.keys().map(|s| (s.clone(), p)).collect(),
                ProfileProvenance::Uniform,
            )
        }
        Some(profile) => {
            let offenders: Vec<String> = profile
                .support
                .iter()
                .filter(|e| !bijection.contains_key(&e.step))
                .map(|e| e.step.to_string())
                .collect();
            if !offenders.is_empty() {
                return Err(Error::Binding(offenders.join("; ")));
            }
            let mut weights: BTreeMap<Step, f64> =
                bijection.keys().map(|s| (s.clone(), 0.0)).collect();
            for entry in &profile.support {
                weights.insert(entry.step.clone(), entry.probability);
            }
            (
                weights,
                ProfileProvenance::Estimated {
                    total_matches: profile.total_matches,
                    walk_length: profile.walk_length,
                },
            )
        }
    };
    let total: f64 = weights.values().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::validation(
            "profile",
            format!("edge probabilities sum to {total}, not 1"),
        ));
    }
    let mut entries = Vec::with_capacity(weights.len());
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for (step, p) in weights {
        let walk = bijection[&step];
        acc += p;
        entries.push((step, walk, p));
        cumulative.push(acc);
    }
    Ok(EdgeSampler {
        entries,
        cumulative,
        provenance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Pass,
    Fail,
}

/// One sampled test item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub edge_step: Step,
    pub walk: usize,
    pub outcome: Outcome,
    /// Names of violated constraints, empty on pass.
    pub violated: Vec<String>,
    /// True when the replayed crux frame differed from the cone's crux
    /// (possible only when the executed automaton deviates from the cone's
    /// generator).
    pub replay_deviated: bool,
}

/// Failure intensity expressed in both time bases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intensity {
    pub per_second: f64,
    pub per_hour: f64,
}

/// Everything a safety demonstration reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemonstrationReport {
    pub sample_size: usize,
    pub failures: usize,
    pub seed: u64,
    pub profile: ProfileProvenance,
    pub items: Vec<ItemRecord>,
    /// ρ̂_I = 1 − (1/2)^{1/N}; present iff no failures were observed.
    pub indifference_upper_bound: Option<f64>,
    /// Upper bound at an explicitly requested confidence other than the
    /// default 1/2; present iff requested and no failures were observed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested_confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence_upper_bound: Option<f64>,
    /// Counting norm of the cone edge supplied by the caller, events/s.
    pub edge_norm_per_second: Option<f64>,
    /// λ̂_I = ρ̂_I · ‖edge‖; present iff failures = 0 and a norm was supplied.
    pub indemnification: Option<Intensity>,
    /// Maximum-likelihood failure proportion n/N. Diagnostic only, not
    /// assurance data; present iff failures > 0.
    pub mle_failure_proportion: Option<f64>,
    /// Failures were observed: indemnification is unavailable and the
    /// reliability-growth literature applies instead.
    pub reliability_growth_needed: bool,
}

/// Runs a safety demonstration: draws `sample_size` walks with replacement
/// through the sampler, replays each converted test on `automaton` with its
/// preserved volatile stimuli, and evaluates every constraint at the
/// replayed crux frame. An item fails iff any constraint is violated.
///
/// `automaton` is the execution target. When it is the cone's generator the
/// replay reproduces each walk step for step; a deviating implementation
/// changes transduced values at the crux, which is exactly what the
/// constraints judge. Divergence of the locus path or of the scripted
/// volatile stimuli is a structural mismatch and an error.
pub fn run_demonstration(
    automaton: &Automaton,
    cone: &Cone,
    sampler: &EdgeSampler,
    constraints: &[SafetyConstraint],
    sample_size: usize,
    seed: u64,
    edge_norm_per_second: Option<f64>,
) -> Result<DemonstrationReport> {
    if sample_size == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    if let Some(norm) = edge_norm_per_second {
        if norm.is_nan() || norm < 0.0 {
            return Err(Error::domain("edge norm must be nonnegative"));
        }
    }
    for constraint in constraints {
        constraint.validate(automaton)?;
    }

    // The RNG stream is drawn single-threaded up front so the sampled
    // multiset never depends on replay scheduling.
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let draws: Vec<(Step, usize)> = (0..sample_size)
        .map(|_| {
            let (step, walk) = sampler.draw(&mut rng);
            (step.clone(), walk)
        })
        .collect();

    let mut items = Vec::with_capacity(sample_size);
    let mut failures = 0usize;
    for (edge_step, walk_id) in draws {
        let walk = &cone.walks[walk_id];
        let test = to_test(walk);
        let replayed = replay_test(automaton, &test, walk_id)?;
        let replayed_crux = replayed.last().expect("tests are non-empty");
        let replay_deviated = replayed_crux != &cone.crux;
        let mut violated = Vec::new();
        for constraint in constraints {
            if !constraint.holds_at(replayed_crux)? {
                violated.push(constraint.name.clone());
            }
        }
        let outcome = if violated.is_empty() {
            Outcome::Pass
        } else {
            failures += 1;
            Outcome::Fail
        };
        items.push(ItemRecord {
            edge_step,
            walk: walk_id,
            outcome,
            violated,
            replay_deviated,
        });
    }

    let accepted = failures == 0;
    let indifference = if accepted {
        Some(risk::indifference_proportion(sample_size)?)
    } else {
        None
    };
    let indemnification = match (accepted, edge_norm_per_second) {
        (true, Some(norm)) => Some(risk::indemnify(sample_size, norm)?),
        _ => None,
    };
    Ok(DemonstrationReport {
        sample_size,
        failures,
        seed,
        profile: sampler.provenance().clone(),
        items,
        indifference_upper_bound: indifference,
        requested_confidence: None,
        confidence_upper_bound: None,
        edge_norm_per_second,
        indemnification,
        mle_failure_proportion: if accepted {
            None
        } else {
            Some(failures as f64 / sample_size as f64)
        },
        reliability_growth_needed: !accepted,
    })
}

impl DemonstrationReport {
    /// Attaches the upper bound at a non-default confidence; present only
    /// when the demonstration accepted.
    pub fn attach_confidence(&mut self, confidence: f64) -> Result<()> {
        self.requested_confidence = Some(confidence);
        self.confidence_upper_bound = if self.failures == 0 {
            Some(risk::upper_bound(self.sample_size, confidence)?)
        } else {
            None
        };
        Ok(())
    }
}

/// β of the zero-failure plan: the probability that a population of failure
/// proportion ρ is accepted, (1−ρ)^N. Defined as the exact complement of
/// the power function, so the two always sum to 1. α is identically 0: the
/// plan rejects only on an observed failure.
pub fn acceptance_probability(rho: f64, sample_size: usize) -> Result<f64> {
    Ok(1.0 - risk::power_function(sample_size, rho)?)
}

/// α error of the zero-failure plan, reported alongside β for completeness.
pub const ALPHA: f64 = 0.0;

/// Volatile stimuli recorded along a predecessor walk, edge-first; what a
/// test fixes and a replay injects.
pub fn scripted_stimuli(automaton: &Automaton, cone: &Cone, walk_id: usize) -> Result<Vec<Choice>> {
    let test = to_test(&cone.walks[walk_id]);
    test.steps()
        .iter()
        .map(|s| automaton.excitation_of(s))
        .collect()
}
