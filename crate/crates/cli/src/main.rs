//! `hazcone`: models software as an actuated automaton, builds
//! backward-inference cones around a hazard crux, runs seeded safety
//! demonstrations over the cone edge, and reports indemnification and
//! compound-Poisson risk classification.
//!
//! Exit codes: 0 success (and demonstration acceptance), 2 demonstration
//! rejection (failures observed), 1 error, 64 usage.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hazcone_core::demo::{bind_profile_to_edge, run_demonstration};
use hazcone_core::error::Error;
use hazcone_core::formats::{
    self, ConeDump, ProfileDump, TableFormat, WalkDump,
};
use hazcone_core::model::{load_model, LoadedModel};
use hazcone_core::profile::{
    counting_norm, derive_seed, estimate_relative_profile, simulate_orbit, StepPredicate,
    UsagePattern,
};
use hazcone_core::reverse::{build_cone, check_complete, check_independent, StoppingRule};
use hazcone_core::risk::{
    self, classify_level, cpp_expectation, poisson_pmf, risk_matrix, severity_from_monetary_loss,
    standardize_exposure, statistical_risk, Category, CompoundPoissonModel, MilStdAssessment,
};

pub const SEED_ENV: &str = "HAZCONE_SEED";
const HOURS_PER_YEAR: f64 = 8760.0;

#[derive(Parser)]
#[command(name = "hazcone", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableKind {
    Power,
    Indifference,
    Matrix,
    Levels,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableOutput {
    Text,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileSource {
    /// Estimate edge probabilities from a simulated orbit.
    Orbit,
    /// Uniform fallback: 1/|edge| on every edge step.
    Uniform,
}

#[derive(Args)]
struct ModelArgs {
    /// Model-definition document (.model JSON).
    #[arg(long)]
    model: PathBuf,
    /// Enumeration bound for choice spaces and converse candidate sets.
    #[arg(long, default_value_t = 1_000_000)]
    bound: u128,
    /// Seed; flag overrides HAZCONE_SEED, which overrides the model file.
    #[arg(long)]
    seed: Option<u64>,
}

impl ModelArgs {
    fn load(&self) -> Result<LoadedModel, Error> {
        let loaded = load_model(&self.model, self.bound)?;
        let loci = loaded.automaton.loci().len() as u128;
        if self.bound < loci {
            return Err(Error::validation(
                "bound",
                format!("enumeration bound {} is below the locus count {loci}", self.bound),
            ));
        }
        Ok(loaded)
    }

    fn resolve_seed(&self, model: &LoadedModel) -> u64 {
        if let Some(seed) = self.seed {
            return seed;
        }
        if let Some(env) = std::env::var_os(SEED_ENV) {
            if let Ok(parsed) = env.to_string_lossy().parse() {
                return parsed;
            }
        }
        model.pattern.as_ref().map(|p| p.seed).unwrap_or(0)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an orbit from the model's initial step and dump the walk.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of steps in the orbit.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Estimate the relative profile and counting norm of a reference set.
    Profile {
        #[command(flatten)]
        model: ModelArgs,
        /// Reference set: steps at this locus.
        #[arg(long)]
        locus: String,
        /// Optionally restrict the reference set to one functionality.
        #[arg(long)]
        functionality: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        /// Diagnostic window for the norm estimate.
        #[arg(long, default_value_t = 10_000)]
        window: usize,
        /// Convergence tolerance on the windowed norm delta.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Build the backward-inference cone around a named crux.
    Cone {
        #[command(flatten)]
        model: ModelArgs,
        /// Crux name declared in the model document.
        #[arg(long)]
        crux: String,
        /// Maximum backward depth.
        #[arg(long)]
        depth: usize,
        /// Comma-separated entry loci terminating expansion.
        #[arg(long, value_delimiter = ',')]
        entry_loci: Vec<String>,
    },
    /// Run a seeded safety demonstration over the cone edge.
    Demo {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        crux: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_delimiter = ',')]
        entry_loci: Vec<String>,
        /// Sample size N.
        #[arg(long)]
        samples: usize,
        /// Orbit length used for profile and norm estimation.
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = ProfileSource::Orbit)]
        profile: ProfileSource,
        /// Diagnostic window for the norm estimate; defaults to a tenth of
        /// the orbit.
        #[arg(long)]
        window: Option<usize>,
        /// Also report the failure-proportion upper bound at this
        /// confidence (the indifference bound fixes confidence 1/2).
        #[arg(long)]
        confidence: Option<f64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Assess an (intermittent) compound Poisson hazard against MIL-STD-882E.
    Risk {
        /// Arrival intensity, events per hour.
        #[arg(long, conflicts_with = "from_report")]
        lambda_per_hour: Option<f64>,
        /// Take the intensity from a demonstration report's indemnification.
        #[arg(long)]
        from_report: Option<PathBuf>,
        /// Expected loss per arrival.
        #[arg(long, default_value_t = 1.0)]
        mu_loss: f64,
        /// Idle ratio ι of the intermittent process.
        #[arg(long, default_value_t = 0.0)]
        iota: f64,
        /// Mean on duration in hours (with --off-hours, determines ι).
        #[arg(long, requires = "off_hours")]
        on_hours: Option<f64>,
        #[arg(long, requires = "on_hours")]
        off_hours: Option<f64>,
        /// Severity category 1..=4.
        #[arg(long, conflicts_with = "loss_dollars")]
        category: Option<u8>,
        /// Derive the severity category from monetary loss per arrival.
        #[arg(long)]
        loss_dollars: Option<f64>,
        /// The hazard has been eliminated (level F).
        #[arg(long, default_value_t = false)]
        eliminated: bool,
        /// Natural exposure units to standardize (with --kappa and
        /// --years-per-life).
        #[arg(long)]
        natural_units: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        years_per_life: f64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Reproduce the published tables.
    Tables {
        #[arg(long, value_enum)]
        which: TableKind,
        #[arg(long, value_enum, default_value_t = TableOutput::Text)]
        format: TableOutput,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(64)
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn stopping(depth: usize, entry_loci: &[String]) -> StoppingRule {
    StoppingRule {
        max_depth: depth,
        entry_loci: if entry_loci.is_empty() {
            None
        } else {
            Some(entry_loci.iter().cloned().collect::<BTreeSet<_>>())
        },
    }
}

fn pattern_or_default(model: &LoadedModel, seed: u64) -> Result<UsagePattern, Error> {
    match &model.pattern {
        Some(pattern) => Ok(pattern.with_seed(seed)),
        None => Err(Error::validation(
            "usage",
            "model declares no usage pattern; simulation requires one",
        )),
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Simulate {
            model,
            steps,
            format,
        } => {
            let loaded = model.load()?;
            let seed = model.resolve_seed(&loaded);
            let pattern = pattern_or_default(&loaded, seed)?;
            let walk = simulate_orbit(&loaded.automaton, &loaded.initial, &pattern, steps)?;
            match format {
                OutputFormat::Json => {
                    print!("{}", formats::to_json(&WalkDump { seed, walk })?);
                }
                OutputFormat::Text => {
                    for (i, step) in walk.steps.iter().enumerate() {
                        println!("{i:>6}  {step}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Profile {
            model,
            locus,
            functionality,
            steps,
            window,
            tol,
        } => {
            let loaded = model.load()?;
            let seed = model.resolve_seed(&loaded);
            let pattern = pattern_or_default(&loaded, seed)?;
            let walk = simulate_orbit(&loaded.automaton, &loaded.initial, &pattern, steps)?;
            let reference = StepPredicate::Pattern {
                locus: Some(locus),
                functionality,
                abscissa: None,
                ordinate: None,
            };
            let profile = estimate_relative_profile(&walk, &reference)?;
            let norm = counting_norm(&loaded.automaton, &walk, &reference, window, tol)?;
            print!(
                "{}",
                formats::to_json(&ProfileDump {
                    reference,
                    seed,
                    profile,
                    norm: Some(norm),
                })?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Cone {
            model,
            crux,
            depth,
            entry_loci,
        } => {
            let loaded = model.load()?;
            let crux_step = loaded.resolve_crux(&crux, model.bound)?;
            let cone = build_cone(
                &loaded.automaton,
                &crux_step,
                stopping(depth, &entry_loci),
                model.bound,
            )?;
            let complete = check_complete(&loaded.automaton, &cone.walks, model.bound)?;
            let independent = check_independent(&cone.walks);
            print!("{}", formats::to_json(&ConeDump::from_cone(&cone))?);
            eprintln!(
                "complete: {}",
                match &complete {
                    None => "yes".to_string(),
                    Some(cx) => format!(
                        "NO (walk {} index {} missing {})",
                        cx.walk, cx.index, cx.missing
                    ),
                }
            );
            eprintln!("independent: {}", if independent { "yes" } else { "NO" });
            eprintln!("acyclic: {}", if cone.acyclic { "yes" } else { "no" });
            Ok(ExitCode::SUCCESS)
        }
        Command::Demo {
            model,
            crux,
            depth,
            entry_loci,
            samples,
            steps,
            profile,
            window,
            confidence,
            format,
        } => {
            let loaded = model.load()?;
            let seed = model.resolve_seed(&loaded);
            let crux_step = loaded.resolve_crux(&crux, model.bound)?;
            let cone = build_cone(
                &loaded.automaton,
                &crux_step,
                stopping(depth, &entry_loci),
                model.bound,
            )?;
            let edge = StepPredicate::steps(cone.edge());

            // one orbit supplies both the edge profile and the counting norm;
            // its seed is split from the demonstration's
            let orbit_seed = derive_seed(seed, 1);
            let pattern = pattern_or_default(&loaded, orbit_seed)?;
            let orbit = simulate_orbit(&loaded.automaton, &loaded.initial, &pattern, steps)?;
            let window = window.unwrap_or_else(|| (steps / 10).max(1));
            let norm = counting_norm(&loaded.automaton, &orbit, &edge, window, 0.05)?;
            let estimated;
            let sampler = match profile {
                ProfileSource::Uniform => bind_profile_to_edge(&cone, None)?,
                ProfileSource::Orbit => {
                    estimated = estimate_relative_profile(&orbit, &edge)?;
                    bind_profile_to_edge(&cone, Some(&estimated))?
                }
            };
            let mut report = run_demonstration(
                &loaded.automaton,
                &cone,
                &sampler,
                &loaded.constraints,
                samples,
                seed,
                Some(norm.value),
            )?;
            if let Some(confidence) = confidence {
                report.attach_confidence(confidence)?;
            }
            match format {
                OutputFormat::Json => print!("{}", formats::to_json(&report)?),
                OutputFormat::Text => print!("{}", formats::report_text(&report)),
            }
            Ok(if report.failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Risk {
            lambda_per_hour,
            from_report,
            mu_loss,
            iota,
            on_hours,
            off_hours,
            category,
            loss_dollars,
            eliminated,
            natural_units,
            kappa,
            years_per_life,
            format,
        } => {
            let lambda = match (lambda_per_hour, &from_report) {
                (Some(lambda), _) => lambda,
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(path)?;
                    let report: hazcone_core::DemonstrationReport =
                        serde_json::from_str(&text)?;
                    report
                        .indemnification
                        .ok_or_else(|| {
                            Error::domain(
                                "report carries no indemnification (failures observed or no norm)",
                            )
                        })?
                        .per_hour
                }
                (None, None) => {
                    return Err(Error::domain(
                        "either --lambda-per-hour or --from-report is required",
                    ))
                }
            };
            let model = match (on_hours, off_hours) {
                (Some(on), Some(off)) => CompoundPoissonModel::with_durations(
                    lambda,
                    mu_loss,
                    on,
                    off,
                    if iota > 0.0 { Some(iota) } else { None },
                )?,
                _ => CompoundPoissonModel::new(lambda, mu_loss, iota)?,
            };
            let h = statistical_risk(&model);
            let effective_lambda = (1.0 - model.idle_ratio) * model.lambda_per_hour;
            let annual_expected_arrivals = effective_lambda * HOURS_PER_YEAR;
            let annual_occurrence_probability =
                1.0 - poisson_pmf(effective_lambda, HOURS_PER_YEAR, 0)?;
            let level = classify_level(annual_occurrence_probability, eliminated)?;
            let category = match (category, loss_dollars) {
                (Some(c), _) => Some(Category::new(c)?),
                (None, Some(dollars)) => Some(severity_from_monetary_loss(dollars)?),
                (None, None) => None,
            };
            let assessment = category.map(|c| MilStdAssessment::new(c, level));
            let exposure = natural_units
                .map(|n| standardize_exposure(n, kappa, model.idle_ratio, years_per_life))
                .transpose()?;

            let out = serde_json::json!({
                "model": model,
                "statistical_risk_per_hour": h,
                "statistical_risk_per_second": h / risk::SECONDS_PER_HOUR,
                "expectation_one_year": cpp_expectation(&model, HOURS_PER_YEAR)?,
                "annual_expected_arrivals": annual_expected_arrivals,
                "annual_occurrence_probability": annual_occurrence_probability,
                "level": level,
                "assessment": assessment,
                "standard_exposure_units": exposure,
            });
            match format {
                OutputFormat::Json => print!("{}", formats::to_json(&out)?),
                OutputFormat::Text => {
                    println!("statistical risk h = {h} loss/hour");
                    println!("annual occurrence probability = {annual_occurrence_probability}");
                    println!("probability level = {level} ({})", level.description());
                    if let Some(a) = assessment {
                        println!(
                            "severity category = {} ({})",
                            a.severity_category,
                            a.severity_category.description()
                        );
                        println!("risk value = {}", risk_matrix(level, a.severity_category));
                    }
                    if let Some(u) = exposure {
                        println!("standard exposure units = {u}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Tables { which, format } => {
            let format = match format {
                TableOutput::Text => TableFormat::Text,
                TableOutput::Csv => TableFormat::Csv,
            };
            let text = match which {
                TableKind::Power => formats::power_table_text(format),
                TableKind::Indifference => formats::indifference_table_text(format),
                TableKind::Matrix => formats::risk_matrix_text(format),
                TableKind::Levels => formats::level_table_text(format),
            };
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }
    }
}
