//! The `.model` document: a JSON tree with embedded expression strings that
//! loads to a validated automaton plus usage pattern, safety constraints,
//! and named crux specifications.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::automaton::{Actuator, Automaton, Functionality, JumpRules, Step};
use crate::demo::SafetyConstraint;
use crate::ensemble::{enumerate_choice_space, Basis, Choice, Ensemble, Value};
use crate::error::{Error, Result};
use crate::expr;
use crate::profile::{PatternKind, UsagePattern};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Persistent,
    Volatile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDecl {
    pub name: String,
    pub domain: Vec<Value>,
    pub kind: VariableKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalityDecl {
    pub name: String,
    pub duration_seconds: f64,
    /// Persistent variable name → expression string.
    pub assignments: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardedChoice {
    pub guard: String,
    pub functionality: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorDecl {
    pub name: String,
    #[serde(default)]
    pub rules: Vec<GuardedChoice>,
    pub default: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardedJump {
    pub guard: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpDecl {
    #[serde(default)]
    pub rules: Vec<GuardedJump>,
    pub default: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDecl {
    pub locus: String,
    pub stimulus: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum UsageDecl {
    Independent {
        /// Volatile variable → list of [value, probability] pairs.
        distributions: BTreeMap<String, Vec<(Value, f64)>>,
        #[serde(default)]
        seed: u64,
    },
    Trace {
        excitations: Vec<BTreeMap<String, Value>>,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDecl {
    pub name: String,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CruxDecl {
    pub name: String,
    pub locus: String,
    /// Stimulus filter; must resolve to exactly one canonical step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<BTreeMap<String, Value>>,
}

/// The whole model-definition document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub variables: Vec<VariableDecl>,
    pub functionalities: Vec<FunctionalityDecl>,
    pub actuators: Vec<ActuatorDecl>,
    pub loci: Vec<String>,
    pub locator: BTreeMap<String, String>,
    pub jump: BTreeMap<String, JumpDecl>,
    pub initial: InitialDecl,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<UsageDecl>,
    #[serde(default)]
    pub constraints: Vec<ConstraintDecl>,
    #[serde(default)]
    pub cruxes: Vec<CruxDecl>,
}

/// A loaded, validated model.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub automaton: Automaton,
    pub initial: Step,
    pub pattern: Option<UsagePattern>,
    pub constraints: Vec<SafetyConstraint>,
    pub cruxes: Vec<CruxDecl>,
}

impl LoadedModel {
    /// Resolves a named crux declaration to its unique canonical consistent step.
    pub fn resolve_crux(&self, name: &str, bound: u128) -> Result<Step> {
        let decl = self
            .cruxes
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::domain(format!("unknown crux `{name}`")))?;
        resolve_crux_decl(&self.automaton, decl, bound)
    }
}

fn parse_expr_in(context: String, src: &str) -> Result<crate::expr::Expr> {
    expr::parse(src).map_err(|e| match e {
        Error::Parse { line, col, msg } => Error::Parse {
            line,
            col,
            msg: format!("{context}: {msg}"),
        },
        other => other,
    })
}

/// Resolves a crux declaration against the automaton: the filter restricts
/// the stimulus space; exactly one canonical step must remain.
pub fn resolve_crux_decl(automaton: &Automaton, decl: &CruxDecl, bound: u128) -> Result<Step> {
    if !automaton.has_locus(&decl.locus) {
        return Err(Error::UnknownLocus(decl.locus.clone()));
    }
    let stimulus_space = enumerate_choice_space(automaton.basis().stimulus(), bound)?;
    let matches: Vec<Choice> = stimulus_space
        .into_iter()
        .filter(|psi| match &decl.frame {
            None => true,
            Some(filter) => filter.iter().all(|(var, value)| psi.get(var) == Some(value)),
        })
        .collect();
    match matches.len() {
        0 => Err(Error::validation(
            "crux",
            format!("crux `{}` matches no stimulus", decl.name),
        )),
        1 => automaton.make_consistent_step(&decl.locus, &matches[0]),
        n => Err(Error::validation(
            "crux",
            format!(
                "crux `{}` is ambiguous: {n} stimuli match ({})",
                decl.name,
                matches
                    .iter()
                    .take(4)
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        )),
    }
}

/// Builds the validated automaton and companions from a parsed document.
pub fn build(document: &ModelDocument, bound: u128) -> Result<LoadedModel> {
    let mut stimulus_terms = BTreeMap::new();
    let mut persistent_terms = BTreeMap::new();
    for var in &document.variables {
        if stimulus_terms
            .insert(var.name.clone(), var.domain.clone())
            .is_some()
        {
            return Err(Error::validation(
                "variables",
                format!("duplicate variable `{}`", var.name),
            ));
        }
        if matches!(var.kind, VariableKind::Persistent) {
            persistent_terms.insert(var.name.clone(), var.domain.clone());
        }
    }
    let stimulus = Ensemble::new(stimulus_terms)?;
    if persistent_terms.is_empty() {
        return Err(Error::validation(
            "variables",
            "at least one persistent variable is required",
        ));
    }
    let persistent = Ensemble::new(persistent_terms)?;
    let basis = Basis::new(stimulus, persistent)?;

    let functionalities = document
        .functionalities
        .iter()
        .map(|decl| {
            let assignments = decl
                .assignments
                .iter()
                .map(|(var, src)| {
                    parse_expr_in(
                        format!("functionality `{}`, assignment `{var}`", decl.name),
                        src,
                    )
                    .map(|e| (var.clone(), e))
                })
                .collect::<Result<BTreeMap<_, _>>>()?;
            Ok(Functionality {
                name: decl.name.clone(),
                assignments,
                duration_seconds: decl.duration_seconds,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let actuators = document
        .actuators
        .iter()
        .map(|decl| {
            let rules = decl
                .rules
                .iter()
                .map(|rule| {
                    parse_expr_in(format!("actuator `{}` guard", decl.name), &rule.guard)
                        .map(|e| (e, rule.functionality.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Actuator {
                name: decl.name.clone(),
                rules,
                default: decl.default.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let jump = document
        .jump
        .iter()
        .map(|(locus, decl)| {
            let rules = decl
                .rules
                .iter()
                .map(|rule| {
                    parse_expr_in(format!("jump from `{locus}`"), &rule.guard)
                        .map(|e| (e, rule.target.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((
                locus.clone(),
                JumpRules {
                    rules,
                    default: decl.default.clone(),
                },
            ))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;

    let automaton = Automaton::new(
        basis,
        functionalities,
        actuators,
        document.loci.clone(),
        document.locator.clone(),
        jump,
        bound,
    )?;

    let initial_stimulus = Choice::new(document.initial.stimulus.clone());
    let initial = automaton.make_consistent_step(&document.initial.locus, &initial_stimulus)?;

    let pattern = match &document.usage {
        None => None,
        Some(UsageDecl::Independent {
            distributions,
            seed,
        }) => {
            let pattern = UsagePattern {
                kind: PatternKind::Independent {
                    distributions: distributions.clone(),
                },
                seed: *seed,
            };
            pattern.validate(&automaton)?;
            Some(pattern)
        }
        Some(UsageDecl::Trace { excitations, seed }) => {
            let pattern = UsagePattern {
                kind: PatternKind::Trace {
                    excitations: excitations.iter().cloned().map(Choice::new).collect(),
                },
                seed: *seed,
            };
            pattern.validate(&automaton)?;
            Some(pattern)
        }
    };

    let constraints = document
        .constraints
        .iter()
        .map(|decl| {
            let predicate = parse_expr_in(format!("constraint `{}`", decl.name), &decl.expr)?;
            let constraint = SafetyConstraint {
                name: decl.name.clone(),
                predicate,
            };
            constraint.validate(&automaton)?;
            Ok(constraint)
        })
        .collect::<Result<Vec<_>>>()?;

    // constraints must be total over crux frames: when the space is small
    // enough, prove it by evaluating on every canonical step
    let canonical_count = automaton
        .basis()
        .stimulus()
        .space_cardinality()
        .map(|c| c.saturating_mul(automaton.loci().len() as u128));
    if canonical_count.is_some_and(|c| c <= bound) {
        for locus in automaton.loci() {
            for psi in enumerate_choice_space(automaton.basis().stimulus(), bound)? {
                let step = automaton.make_consistent_step(locus, &psi)?;
                for constraint in &constraints {
                    constraint.holds_at(&step).map_err(|e| {
                        Error::validation(
                            "constraints",
                            format!(
                                "constraint `{}` is not total over crux frames: {e}",
                                constraint.name
                            ),
                        )
                    })?;
                }
            }
        }
    }

    // every crux declaration must resolve now so load-time diagnostics are complete
    for decl in &document.cruxes {
        resolve_crux_decl(&automaton, decl, bound)?;
    }

    Ok(LoadedModel {
        automaton,
        initial,
        pattern,
        constraints,
        cruxes: document.cruxes.clone(),
    })
}

/// Parses a model document from JSON text.
pub fn parse_document(text: &str) -> Result<ModelDocument> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        col: e.column(),
        msg: e.to_string(),
    })
}

/// Loads and validates a model file.
pub fn load_model(path: &Path, bound: u128) -> Result<LoadedModel> {
    let text = std::fs::read_to_string(path)?;
    load_model_str(&text, bound)
}

/// Loads and validates a model from JSON text.
pub fn load_model_str(text: &str, bound: u128) -> Result<LoadedModel> {
    let document = parse_document(text)?;
    build(&document, bound)
}
