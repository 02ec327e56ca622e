//! Sampling statistics and accident models: the zero-failure power
//! function, indifference proportion, indemnification, Poisson and
//! (intermittent) compound Poisson processes, statistical risk, and the
//! MIL-STD-882E category/level taxonomy.

use serde::{Deserialize, Serialize};

use crate::demo::Intensity;
use crate::error::{Error, Result};

pub const SECONDS_PER_HOUR: f64 = 3600.0;

fn check_proportion(rho: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} {rho} outside [0, 1]")))
    }
}

/// K_{N,0}(ρ) = 1 − (1−ρ)^N: the probability that a zero-failure plan of
/// size N rejects a population of failure proportion ρ. Computed through
/// expm1/ln_1p so the indifference duality holds to full precision.
pub fn power_function(sample_size: usize, rho: f64) -> Result<f64> {
    if sample_size == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    check_proportion(rho, "failure proportion")?;
    if rho == 1.0 {
        return Ok(1.0);
    }
    Ok(-(((-rho).ln_1p() * sample_size as f64).exp_m1()))
}

/// Upper bound on the failure proportion with the given confidence:
/// 1 − (1−confidence)^{1/N}.
pub fn upper_bound(sample_size: usize, confidence: f64) -> Result<f64> {
    if sample_size == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    if confidence.is_nan() || confidence <= 0.0 || confidence >= 1.0 {
        return Err(Error::domain(format!(
            "confidence {confidence} outside (0, 1)"
        )));
    }
    Ok(-(((-confidence).ln_1p() / sample_size as f64).exp_m1()))
}

/// The indifference proportion ρ̂_I = 1 − (1/2)^{1/N}: the ρ at which
/// rejection and acceptance are equally likely. Identical to the
/// 1/2-confidence upper bound.
pub fn indifference_proportion(sample_size: usize) -> Result<f64> {
    upper_bound(sample_size, 0.5)
}

/// The indemnification formula λ̂_I = ρ̂_I · ‖edge‖: the assured upper bound
/// on hazard intensity after a zero-failure demonstration of size N against
/// an edge executing at `edge_norm_per_second` events per second.
pub fn indemnify(sample_size: usize, edge_norm_per_second: f64) -> Result<Intensity> {
    if edge_norm_per_second.is_nan() || edge_norm_per_second < 0.0 {
        return Err(Error::domain("edge norm must be nonnegative"));
    }
    let per_second = indifference_proportion(sample_size)? * edge_norm_per_second;
    Ok(Intensity {
        per_second,
        per_hour: per_second * SECONDS_PER_HOUR,
    })
}

/// A zero-failure sampling plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub sample_size: usize,
    /// Fixed at 0: the plan tolerates no failures.
    pub tolerated_failures: usize,
    pub confidence: f64,
}

impl SamplingPlan {
    /// The plan at the default confidence 1/2.
    pub fn zero_failure(sample_size: usize) -> Result<Self> {
        SamplingPlan::new(sample_size, 0.5)
    }

    pub fn new(sample_size: usize, confidence: f64) -> Result<Self> {
        if sample_size == 0 {
            return Err(Error::domain("sample size must be at least 1"));
        }
        if confidence.is_nan() || confidence <= 0.0 || confidence >= 1.0 {
            return Err(Error::domain("confidence must lie in (0, 1)"));
        }
        Ok(SamplingPlan {
            sample_size,
            tolerated_failures: 0,
            confidence,
        })
    }

    pub fn power(&self, rho: f64) -> Result<f64> {
        power_function(self.sample_size, rho)
    }

    pub fn upper_bound(&self) -> Result<f64> {
        upper_bound(self.sample_size, self.confidence)
    }
}

/// Poisson pmf: probability of k arrivals in a window of length t at rate λ.
/// Evaluated by the stable product e^{−λt}·Π_{i=1..k}(λt/i).
pub fn poisson_pmf(lambda: f64, t: f64, k: usize) -> Result<f64> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::domain("rate must be nonnegative"));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::domain("duration must be nonnegative"));
    }
    let m = lambda * t;
    if m == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let mut p = (-m).exp();
    for i in 1..=k {
        p *= m / i as f64;
    }
    Ok(p)
}

/// An (intermittent) compound Poisson accident model. The plain compound
/// process is the ι = 0 case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompoundPoissonModel {
    /// Arrival intensity, events per hour.
    pub lambda_per_hour: f64,
    /// Expected loss per arrival, loss units.
    pub loss_mean: f64,
    /// Idle ratio ι ∈ [0, 1]; fraction of time the process is off.
    pub idle_ratio: f64,
}

impl CompoundPoissonModel {
    pub fn new(lambda_per_hour: f64, loss_mean: f64, idle_ratio: f64) -> Result<Self> {
        if lambda_per_hour.is_nan() || lambda_per_hour < 0.0 {
            return Err(Error::domain("rate must be nonnegative"));
        }
        if loss_mean.is_nan() || loss_mean < 0.0 {
            return Err(Error::domain("expected loss must be nonnegative"));
        }
        check_proportion(idle_ratio, "idle ratio")?;
        Ok(CompoundPoissonModel {
            lambda_per_hour,
            loss_mean,
            idle_ratio,
        })
    }

    /// Builds an intermittent model from mean on/off durations; the idle
    /// ratio is ι = μ_off/(μ_on + μ_off). When an explicit ratio is also
    /// given it must reproduce the durations' ratio within 1e-9.
    pub fn with_durations(
        lambda_per_hour: f64,
        loss_mean: f64,
        mean_on_hours: f64,
        mean_off_hours: f64,
        declared_idle_ratio: Option<f64>,
    ) -> Result<Self> {
        if mean_on_hours.is_nan() || mean_on_hours < 0.0 || mean_off_hours.is_nan() || mean_off_hours < 0.0 {
            return Err(Error::domain("mean durations must be nonnegative"));
        }
        let total = mean_on_hours + mean_off_hours;
        if total <= 0.0 {
            return Err(Error::domain("on/off durations cannot both be zero"));
        }
        let iota = mean_off_hours / total;
        if let Some(declared) = declared_idle_ratio {
            if (declared - iota).abs() > 1e-9 {
                return Err(Error::domain(format!(
                    "declared idle ratio {declared} disagrees with durations ({iota})"
                )));
            }
        }
        CompoundPoissonModel::new(lambda_per_hour, loss_mean, iota)
    }
}

/// Expected loss of the (intermittent) compound process over `t_hours`:
/// (1−ι)·λ·t·μ_L.
pub fn cpp_expectation(model: &CompoundPoissonModel, t_hours: f64) -> Result<f64> {
    if t_hours.is_nan() || t_hours < 0.0 {
        return Err(Error::domain("duration must be nonnegative"));
    }
    Ok((1.0 - model.idle_ratio) * model.lambda_per_hour * t_hours * model.loss_mean)
}

/// Statistical risk h = (1−ι)·λ·μ_L, loss units per hour: the time
/// derivative of the expectation. Risks of independent models add.
pub fn statistical_risk(model: &CompoundPoissonModel) -> f64 {
    (1.0 - model.idle_ratio) * model.lambda_per_hour * model.loss_mean
}

/// MIL-STD-882E probability level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Level {
    pub fn description(self) -> &'static str {
        match self {
            Level::A => "Frequent",
            Level::B => "Probable",
            Level::C => "Occasional",
            Level::D => "Remote",
            Level::E => "Improbable",
            Level::F => "Eliminated",
        }
    }

    pub fn parse(s: &str) -> Result<Level> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Level::A),
            "B" => Ok(Level::B),
            "C" => Ok(Level::C),
            "D" => Ok(Level::D),
            "E" => Ok(Level::E),
            "F" => Ok(Level::F),
            other => Err(Error::domain(format!("unknown probability level `{other}`"))),
        }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// MIL-STD-882E severity category, 1 (Catastrophic) through 4 (Negligible).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Category(u8);

impl Category {
    pub fn new(value: u8) -> Result<Category> {
        if (1..=4).contains(&value) {
            Ok(Category(value))
        } else {
            Err(Error::domain(format!("severity category {value} outside 1..=4")))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn description(self) -> &'static str {
        match self.0 {
            1 => "Catastrophic",
            2 => "Critical",
            3 => "Marginal",
            _ => "Negligible",
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Cell of the Risk Assessment Matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RiskValue {
    High,
    Serious,
    Medium,
    Low,
    Eliminated,
}

impl std::fmt::Display for RiskValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Quantitative level thresholds: A iff p ≥ 1e−1, B iff 1e−2 ≤ p < 1e−1,
/// C iff 1e−3 ≤ p < 1e−2, D iff 1e−6 ≤ p < 1e−3, E iff p < 1e−6;
/// F (Eliminated) overrides on the flag.
pub fn classify_level(annual_probability: f64, eliminated: bool) -> Result<Level> {
    check_proportion(annual_probability, "annual probability")?;
    if eliminated {
        return Ok(Level::F);
    }
    let p = annual_probability;
    Ok(if p >= 1e-1 {
        Level::A
    } else if p >= 1e-2 {
        Level::B
    } else if p >= 1e-3 {
        Level::C
    } else if p >= 1e-6 {
        Level::D
    } else {
        Level::E
    })
}

/// The MIL-STD-882E Risk Assessment Matrix, exact table lookup.
pub fn risk_matrix(level: Level, category: Category) -> RiskValue {
    use Level::*;
    use RiskValue::*;
    match (level, category.value()) {
        (F, _) => Eliminated,
        (A, 1) | (A, 2) | (B, 1) | (B, 2) | (C, 1) => High,
        (A, 3) | (B, 3) | (C, 2) | (D, 1) => Serious,
        (A, 4) | (B, 4) | (C, 3) | (D, 2) | (D, 3) | (E, 1) | (E, 2) | (E, 3) => Medium,
        (C, 4) | (D, 4) | (E, 4) => Low,
        _ => unreachable!("categories are validated to 1..=4"),
    }
}

/// Severity category from monetary loss per the table's monetary criteria:
/// ≥ $10M → 1, ≥ $1M → 2, ≥ $100K → 3, else 4.
pub fn severity_from_monetary_loss(dollars: f64) -> Result<Category> {
    if dollars.is_nan() || dollars < 0.0 {
        return Err(Error::domain("monetary loss must be nonnegative"));
    }
    Category::new(if dollars >= 10_000_000.0 {
        1
    } else if dollars >= 1_000_000.0 {
        2
    } else if dollars >= 100_000.0 {
        3
    } else {
        4
    })
}

/// Standard-unit conversion U = κ(1−ι)N/p for natural exposure N, linear
/// unit coefficient κ, idle ratio ι, and p years per life.
pub fn standardize_exposure(
    natural_units: f64,
    kappa: f64,
    iota: f64,
    years_per_life: f64,
) -> Result<f64> {
    check_proportion(iota, "idle ratio")?;
    if years_per_life.is_nan() || years_per_life <= 0.0 {
        return Err(Error::domain("years per life must be positive"));
    }
    Ok(kappa * (1.0 - iota) / years_per_life * natural_units)
}

/// A combined MIL-STD-882E assessment: the risk value is always the matrix
/// cell for (level, category), with level F forcing Eliminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilStdAssessment {
    pub severity_category: Category,
    pub probability_level: Level,
    pub risk_value: RiskValue,
}

impl MilStdAssessment {
    pub fn new(severity_category: Category, probability_level: Level) -> MilStdAssessment {
        MilStdAssessment {
            severity_category,
            probability_level,
            risk_value: risk_matrix(probability_level, severity_category),
        }
    }
}

/// Row layout of the published power-function and indifference tables.
pub const TABLE_SAMPLE_SIZES: [usize; 14] = [
    1, 5, 10, 15, 20, 30, 50, 100, 200, 500, 1000, 2000, 5000, 10000,
];
pub const TABLE_PROPORTIONS: [f64; 6] = [0.001, 0.01, 0.05, 0.10, 0.50, 0.90];

/// Computes the 14×6 power-function table in the published layout.
pub fn power_table() -> Vec<(usize, Vec<f64>)> {
    TABLE_SAMPLE_SIZES
        .iter()
        .map(|&n| {
            let row = TABLE_PROPORTIONS
                .iter()
                .map(|&rho| power_function(n, rho).expect("table entries are in range"))
                .collect();
            (n, row)
        })
        .collect()
}

/// Computes the 14-row indifference-proportion table.
pub fn indifference_table() -> Vec<(usize, f64)> {
    TABLE_SAMPLE_SIZES
        .iter()
        .map(|&n| (n, indifference_proportion(n).expect("n ≥ 1")))
        .collect()
}

/// The 6×4 risk matrix in table order (levels A..F by categories 1..4).
pub fn risk_matrix_table() -> Vec<(Level, Vec<RiskValue>)> {
    [Level::A, Level::B, Level::C, Level::D, Level::E, Level::F]
        .into_iter()
        .map(|level| {
            let row = (1..=4)
                .map(|c| risk_matrix(level, Category::new(c).expect("in range")))
                .collect();
            (level, row)
        })
        .collect()
}

/// Quantitative level thresholds as (level, lower bound inclusive, upper
/// bound exclusive) with `None` for the open ends.
pub fn level_thresholds() -> Vec<(Level, Option<f64>, Option<f64>)> {
    vec![
        (Level::A, Some(1e-1), None),
        (Level::B, Some(1e-2), Some(1e-1)),
        (Level::C, Some(1e-3), Some(1e-2)),
        (Level::D, Some(1e-6), Some(1e-3)),
        (Level::E, None, Some(1e-6)),
    ]
}
