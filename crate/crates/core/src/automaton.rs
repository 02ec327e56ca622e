//! The actuated automaton: frames, functionalities, actuators, loci, the
//! jump function, and the induced iterative operator on step space.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ensemble::{dyadic_product, enumerate_choice_space, Basis, Choice, Value};
use crate::error::{Error, Result};
use crate::expr::{check_references, ChoiceScope, Expr};

/// A (stimulus, response) pair: abscissa over Ψ, ordinate over Φ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Frame {
    pub abscissa: Choice,
    pub ordinate: Choice,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} -> {})", self.abscissa, self.ordinate)
    }
}

/// A mapping ∏Ψ → ∏Φ given by one assignment expression per persistent
/// variable, with a positive execution duration in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Functionality {
    pub name: String,
    pub assignments: BTreeMap<String, Expr>,
    pub duration_seconds: f64,
}

/// An ordered guard list selecting a functionality per stimulus;
/// the mandatory default makes selection total. First match wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Actuator {
    pub name: String,
    pub rules: Vec<(Expr, String)>,
    pub default: String,
}

/// Guarded jump rules for one locus, with a mandatory default target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpRules {
    pub rules: Vec<(Expr, String)>,
    pub default: String,
}

/// A point of the step space S = Λ × F × F. Serializes flat, as
/// `{locus, functionality, abscissa, ordinate}`, with frames keyed by
/// variable name, never positionally.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Step {
    pub locus: String,
    pub functionality: String,
    #[serde(flatten)]
    pub frame: Frame,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.locus, self.functionality, self.frame)
    }
}

/// Which of the three sequential projections of a walk to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Path,
    Process,
    Procedure,
}

/// An indexed sequence of steps together with the volatile excitations
/// consumed to produce it (one per transit, so `excitations.len() ==
/// steps.len() - 1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Walk {
    pub steps: Vec<Step>,
    pub excitations: Vec<Choice>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn path(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.locus.as_str()).collect()
    }

    pub fn process(&self) -> Vec<&Frame> {
        self.steps.iter().map(|s| &s.frame).collect()
    }

    pub fn procedure(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.functionality.as_str()).collect()
    }
}

/// A source of volatile excitations consumed by `walk`.
pub trait ExcitationSource {
    fn next_excitation(&mut self, index: usize) -> Result<Choice>;
}

/// Replays a recorded finite excitation sequence; exhaustion is an error
/// naming the failing index.
pub struct TraceSource {
    trace: Vec<Choice>,
    cursor: usize,
}

impl TraceSource {
    pub fn new(trace: Vec<Choice>) -> Self {
        TraceSource { trace, cursor: 0 }
    }
}

impl ExcitationSource for TraceSource {
    fn next_excitation(&mut self, index: usize) -> Result<Choice> {
        match self.trace.get(self.cursor) {
            Some(c) => {
                self.cursor += 1;
                Ok(c.clone())
            }
            None => Err(Error::TraceExhausted(index)),
        }
    }
}

/// The seven-catalog structure ⟨Ψ, Φ, F, A, Λ, ℓ, Δ⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Automaton {
    basis: Basis,
    functionalities: BTreeMap<String, Functionality>,
    actuators: BTreeMap<String, Actuator>,
    loci: Vec<String>,
    locator: BTreeMap<String, String>,
    jump: BTreeMap<String, JumpRules>,
    /// True when assignment ranges were verified exhaustively at
    /// construction; otherwise every application re-checks dynamically.
    range_checked: bool,
}

impl Automaton {
    /// Validates the seven catalogs and their cross-references.
    /// When |∏Ψ| ≤ `bound`, assignment expressions are range-checked by
    /// exhaustive evaluation; larger spaces defer to dynamic checks.
    pub fn new(
        basis: Basis,
        functionalities: Vec<Functionality>,
        actuators: Vec<Actuator>,
        loci: Vec<String>,
        locator: BTreeMap<String, String>,
        jump: BTreeMap<String, JumpRules>,
        bound: u128,
    ) -> Result<Self> {
        if loci.is_empty() {
            return Err(Error::validation("loci", "catalog of loci is empty"));
        }
        let locus_set: BTreeSet<&String> = loci.iter().collect();
        if locus_set.len() != loci.len() {
            return Err(Error::validation("loci", "duplicate locus name"));
        }
        if functionalities.is_empty() {
            return Err(Error::validation(
                "functionalities",
                "catalog of functionality is empty",
            ));
        }

        let stimulus_vars = basis.stimulus().index_set();
        let persistent_vars = basis.persistent_indices();

        let mut fmap = BTreeMap::new();
        for f in functionalities {
            if f.duration_seconds <= 0.0 || !f.duration_seconds.is_finite() {
                return Err(Error::validation(
                    "duration",
                    format!("functionality `{}` must have positive duration", f.name),
                ));
            }
            for var in &persistent_vars {
                let expr = f.assignments.get(var).ok_or_else(|| {
                    Error::validation(
                        "assignments",
                        format!(
                            "functionality `{}` missing assignment for persistent `{var}`",
                            f.name
                        ),
                    )
                })?;
                check_references(
                    expr,
                    &stimulus_vars,
                    false,
                    &format!("functionality `{}`, assignment `{var}`", f.name),
                )?;
            }
            for var in f.assignments.keys() {
                if !persistent_vars.contains(var) {
                    return Err(Error::validation(
                        "assignments",
                        format!(
                            "functionality `{}` assigns non-persistent variable `{var}`",
                            f.name
                        ),
                    ));
                }
            }
            if fmap.insert(f.name.clone(), f).is_some() {
                return Err(Error::validation("functionalities", "duplicate name"));
            }
        }

        let mut amap = BTreeMap::new();
        for a in actuators {
            for (guard, target) in &a.rules {
                check_references(
                    guard,
                    &stimulus_vars,
                    false,
                    &format!("actuator `{}` guard", a.name),
                )?;
                if !fmap.contains_key(target) {
                    return Err(Error::validation(
                        "actuators",
                        format!("actuator `{}` selects unknown functionality `{target}`", a.name),
                    ));
                }
            }
            if !fmap.contains_key(&a.default) {
                return Err(Error::validation(
                    "actuators",
                    format!(
                        "actuator `{}` defaults to unknown functionality `{}`",
                        a.name, a.default
                    ),
                ));
            }
            if amap.insert(a.name.clone(), a).is_some() {
                return Err(Error::validation("actuators", "duplicate name"));
            }
        }
        if amap.is_empty() {
            return Err(Error::validation("actuators", "catalog of actuation is empty"));
        }

        // locator: total on Λ, surjective onto A
        for locus in &loci {
            let actuator = locator.get(locus).ok_or_else(|| {
                Error::validation("locator not total", format!("locus `{locus}` has no actuator"))
            })?;
            if !amap.contains_key(actuator) {
                return Err(Error::validation(
                    "locator",
                    format!("locus `{locus}` names unknown actuator `{actuator}`"),
                ));
            }
        }
        for extra in locator.keys() {
            if !locus_set.contains(extra) {
                return Err(Error::validation(
                    "locator",
                    format!("locator names unknown locus `{extra}`"),
                ));
            }
        }
        let located: BTreeSet<&String> = locator.values().collect();
        for actuator in amap.keys() {
            if !located.contains(actuator) {
                return Err(Error::validation(
                    "locator not surjective",
                    format!("actuator `{actuator}` is not located by any locus"),
                ));
            }
        }

        // jump: total on Λ, targets valid
        for locus in &loci {
            let rules = jump.get(locus).ok_or_else(|| {
                Error::validation("jump not total", format!("locus `{locus}` has no jump rules"))
            })?;
            for (guard, target) in &rules.rules {
                check_references(guard, &stimulus_vars, false, &format!("jump from `{locus}`"))?;
                if !locus_set.contains(target) {
                    return Err(Error::validation(
                        "jump",
                        format!("jump from `{locus}` targets unknown locus `{target}`"),
                    ));
                }
            }
            if !locus_set.contains(&rules.default) {
                return Err(Error::validation(
                    "jump",
                    format!("jump from `{locus}` defaults to unknown locus `{}`", rules.default),
                ));
            }
        }
        for extra in jump.keys() {
            if !locus_set.contains(extra) {
                return Err(Error::validation(
                    "jump",
                    format!("jump table names unknown locus `{extra}`"),
                ));
            }
        }

        let mut automaton = Automaton {
            basis,
            functionalities: fmap,
            actuators: amap,
            loci,
            locator,
            jump,
            range_checked: false,
        };

        // Range-check every assignment exhaustively when the stimulus space
        // is small enough; otherwise leave checks to application time.
        let cardinality = automaton.basis.stimulus().space_cardinality();
        if let Some(card) = cardinality {
            if card <= bound {
                for psi in enumerate_choice_space(automaton.basis.stimulus(), bound)? {
                    let names: Vec<String> =
                        automaton.functionalities.keys().cloned().collect();
                    for fname in names {
                        automaton.apply_functionality(&fname, &psi)?;
                    }
                    for aname in automaton.actuators.keys() {
                        automaton.select_functionality(aname, &psi)?;
                    }
                    for locus in automaton.loci.clone() {
                        automaton.jump_target(&locus, &psi)?;
                    }
                }
                automaton.range_checked = true;
            }
        }
        Ok(automaton)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn loci(&self) -> &[String] {
        &self.loci
    }

    pub fn has_locus(&self, locus: &str) -> bool {
        self.loci.iter().any(|l| l == locus)
    }

    pub fn functionality(&self, name: &str) -> Option<&Functionality> {
        self.functionalities.get(name)
    }

    pub fn functionality_names(&self) -> impl Iterator<Item = &str> {
        self.functionalities.keys().map(|s| s.as_str())
    }

    pub fn catalog_size(&self) -> usize {
        self.functionalities.len()
    }

    pub fn duration(&self, functionality: &str) -> Result<f64> {
        self.functionalities
            .get(functionality)
            .map(|f| f.duration_seconds)
            .ok_or_else(|| Error::domain(format!("unknown functionality `{functionality}`")))
    }

    /// Evaluates functionality `name` on stimulus ψ, producing a Φ-choice.
    pub fn apply_functionality(&self, name: &str, psi: &Choice) -> Result<Choice> {
        let f = self
            .functionalities
            .get(name)
            .ok_or_else(|| Error::domain(format!("unknown functionality `{name}`")))?;
        let scope = ChoiceScope(psi);
        let mut out = BTreeMap::new();
        for (var, expr) in &f.assignments {
            let value = expr.eval_scalar(&scope).map_err(|e| Error::Expr {
                context: format!("functionality `{name}`, assignment `{var}`"),
                msg: e.to_string(),
            })?;
            if !self.range_checked {
                self.check_in_domain(name, var, &value, psi)?;
            } else {
                debug_assert!(self
                    .basis
                    .persistent()
                    .domain(var)
                    .is_some_and(|d| d.contains(&value)));
            }
            out.insert(var.clone(), value);
        }
        Ok(Choice::new(out))
    }

    fn check_in_domain(&self, fname: &str, var: &str, value: &Value, psi: &Choice) -> Result<()> {
        let ok = self
            .basis
            .persistent()
            .domain(var)
            .is_some_and(|d| d.contains(value));
        if ok {
            Ok(())
        } else {
            Err(Error::RangeCheck {
                functionality: fname.to_string(),
                variable: var.to_string(),
                value: value.to_string(),
                stimulus: psi.to_string(),
            })
        }
    }

    /// Actuator selection a(ψ): first matching rule wins, else the default.
    pub fn select_functionality(&self, actuator: &str, psi: &Choice) -> Result<&str> {
        let a = self
            .actuators
            .get(actuator)
            .ok_or_else(|| Error::domain(format!("unknown actuator `{actuator}`")))?;
        let scope = ChoiceScope(psi);
        for (guard, target) in &a.rules {
            if guard.eval_guard(&scope).map_err(|e| Error::Expr {
                context: format!("actuator `{actuator}` guard"),
                msg: e.to_string(),
            })? {
                return Ok(target);
            }
        }
        Ok(&a.default)
    }

    /// The actuator designated for `locus` by the locator ℓ.
    pub fn actuator_at(&self, locus: &str) -> Result<&str> {
        self.locator
            .get(locus)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::UnknownLocus(locus.to_string()))
    }

    /// Jump function Δ(λ, ψ): first matching rule wins, else the default.
    pub fn jump_target(&self, locus: &str, psi: &Choice) -> Result<&str> {
        let rules = self
            .jump
            .get(locus)
            .ok_or_else(|| Error::UnknownLocus(locus.to_string()))?;
        let scope = ChoiceScope(psi);
        for (guard, target) in &rules.rules {
            if guard.eval_guard(&scope).map_err(|e| Error::Expr {
                context: format!("jump from `{locus}`"),
                msg: e.to_string(),
            })? {
                return Ok(target);
            }
        }
        Ok(&rules.default)
    }

    /// The canonical consistent step at (λ, ψ): functionality ℓ(λ)(ψ) and
    /// frame (ψ, f(ψ)).
    pub fn make_consistent_step(&self, locus: &str, stimulus: &Choice) -> Result<Step> {
        if !self.has_locus(locus) {
            return Err(Error::UnknownLocus(locus.to_string()));
        }
        stimulus.validate_against(self.basis.stimulus(), "stimulus")?;
        let actuator = self.actuator_at(locus)?;
        let fname = self.select_functionality(actuator, stimulus)?.to_string();
        let ordinate = self.apply_functionality(&fname, stimulus)?;
        Ok(Step {
            locus: locus.to_string(),
            functionality: fname,
            frame: Frame {
                abscissa: stimulus.clone(),
                ordinate,
            },
        })
    }

    /// Consistency: the step's frame belongs to its functionality,
    /// i.e. ordinate = f(abscissa).
    pub fn is_consistent(&self, step: &Step) -> Result<bool> {
        let expected = self.apply_functionality(&step.functionality, &step.frame.abscissa)?;
        Ok(expected == step.frame.ordinate)
    }

    /// Canonical: consistent and the functionality is the one the locator's
    /// actuator selects at the step's stimulus. Forward iteration only ever
    /// produces canonical steps.
    pub fn is_canonical(&self, step: &Step) -> Result<bool> {
        if !self.has_locus(&step.locus) {
            return Ok(false);
        }
        let actuator = self.actuator_at(&step.locus)?;
        let fname = self.select_functionality(actuator, &step.frame.abscissa)?;
        if fname != step.functionality {
            return Ok(false);
        }
        self.is_consistent(step)
    }

    /// The iterative transform: next locus λ' = Δ(λ, ψ), next stimulus
    /// ψ' = f(ψ)ξ' (dyadic), next functionality f' = ℓ(λ')(ψ'), next
    /// ordinate φ' = f'(ψ'). The successor is consistent whether or not the
    /// input is.
    pub fn transit(&self, step: &Step, excitation: &Choice) -> Result<Step> {
        match self.basis.volatile() {
            Some(xi) => excitation.validate_against(xi, "excitation")?,
            None => {
                if !excitation.is_empty() {
                    return Err(Error::domain(
                        "automaton has no event space; excitation must be empty",
                    ));
                }
            }
        }
        let psi = &step.frame.abscissa;
        let next_locus = self.jump_target(&step.locus, psi)?.to_string();
        let persistent = self.apply_functionality(&step.functionality, psi)?;
        let next_stimulus = dyadic_product(&persistent, excitation)?;
        let actuator = self.actuator_at(&next_locus)?;
        let next_fname = self
            .select_functionality(actuator, &next_stimulus)?
            .to_string();
        let next_ordinate = self.apply_functionality(&next_fname, &next_stimulus)?;
        Ok(Step {
            locus: next_locus,
            functionality: next_fname,
            frame: Frame {
                abscissa: next_stimulus,
                ordinate: next_ordinate,
            },
        })
    }

    /// Walks `length` steps from `start`, drawing excitations on demand.
    /// Step 1 is `start` itself.
    pub fn walk(
        &self,
        start: &Step,
        source: &mut dyn ExcitationSource,
        length: usize,
    ) -> Result<Walk> {
        if length == 0 {
            return Err(Error::domain("walk length must be at least 1"));
        }
        let mut steps = Vec::with_capacity(length);
        let mut excitations = Vec::with_capacity(length.saturating_sub(1));
        steps.push(start.clone());
        for i in 1..length {
            let xi = source.next_excitation(i)?;
            let next = self.transit(&steps[i - 1], &xi)?;
            steps.push(next);
            excitations.push(xi);
        }
        Ok(Walk { steps, excitations })
    }

    /// Volatile component of a step's abscissa.
    pub fn excitation_of(&self, step: &Step) -> Result<Choice> {
        self.basis.volatile_part(&step.frame.abscissa)
    }

    /// Persistent component of a step's abscissa.
    pub fn persistent_of(&self, step: &Step) -> Result<Choice> {
        self.basis.persistent_part(&step.frame.abscissa)
    }
}

/// Takes one of the three sequential projections of a walk, as owned data.
pub fn project(walk: &Walk, which: Projection) -> Vec<String> {
    match which {
        Projection::Path => walk.path().into_iter().map(str::to_string).collect(),
        Projection::Procedure => walk.procedure().into_iter().map(str::to_string).collect(),
        Projection::Process => walk
            .process()
            .into_iter()
            .map(|f| f.to_string())
            .collect(),
    }
}

/// Outcome of the under-pigeonhole check on a finite process prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PigeonholeReport {
    pub witnessed: bool,
    pub max_homogeneous_count: usize,
    pub witness: Option<Choice>,
}

/// Computes max over ψ of the number of distinct ordinates among frames with
/// abscissa ψ in the prefix; `witnessed` iff `catalog_size` is strictly
/// smaller. A witness is sufficient for uncoverability of the prefix by any
/// procedure over a catalog of that size.
pub fn check_under_pigeonhole(catalog_size: usize, prefix: &[Frame]) -> PigeonholeReport {
    let mut by_abscissa: BTreeMap<&Choice, BTreeSet<&Choice>> = BTreeMap::new();
    for frame in prefix {
        by_abscissa
            .entry(&frame.abscissa)
            .or_default()
            .insert(&frame.ordinate);
    }
    let mut max = 0usize;
    let mut witness = None;
    for (psi, ordinates) in by_abscissa {
        if ordinates.len() > max {
            max = ordinates.len();
            witness = Some(psi.clone());
        }
    }
    PigeonholeReport {
        witnessed: catalog_size < max,
        max_homogeneous_count: max,
        witness: if catalog_size < max { witness } else { None },
    }
}
