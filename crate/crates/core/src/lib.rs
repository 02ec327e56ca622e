//! Statistical safety demonstrations for software modeled as actuated
//! automata.
//!
//! The library models a program as a seven-catalog automaton over ensembles
//! of finite variable domains, computes backward-inference cones around a
//! designated hazard crux, estimates operational profiles from seeded
//! orbits, runs zero-failure safety demonstrations over the cone edge, and
//! reports the indemnification statistic together with compound-Poisson
//! risk classification.

pub mod automaton;
pub mod demo;
pub mod ensemble;
pub mod error;
pub mod expr;
pub mod formats;
pub mod model;
pub mod profile;
pub mod reverse;
pub mod risk;

pub use automaton::{Automaton, Frame, Step, Walk};
pub use demo::{DemonstrationReport, SafetyConstraint};
pub use ensemble::{Basis, Choice, Ensemble, Value};
pub use error::{Error, Result};
pub use model::{LoadedModel, ModelDocument};
pub use profile::{RelativeProfile, StepPredicate, UsagePattern};
pub use reverse::{Cone, PredecessorWalk, StoppingRule, Test};
