//! Serialized artifacts: walk, profile, and cone dumps; demonstration
//! reports; and the published tables as text or RFC-4180 CSV.

use serde::{Deserialize, Serialize};

use crate::automaton::{Step, Walk};
use crate::demo::DemonstrationReport;
use crate::error::Result;
use crate::profile::{NormEstimate, RelativeProfile, StepPredicate};
use crate::reverse::Cone;
use crate::risk;

/// Walk dump: the step sequence, the excitations that produced it, and the
/// seed that drove them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkDump {
    pub seed: u64,
    pub walk: Walk,
}

/// Profile dump: `{reference, support, total_matches, walk_length, seed}`
/// plus the norm estimate when one was computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDump {
    pub reference: StepPredicate,
    pub seed: u64,
    #[serde(flatten)]
    pub profile: RelativeProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormEstimate>,
}

/// Cone dump with verdicts from the completeness and independence checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeDump {
    pub crux: Step,
    pub stopping: crate::reverse::StoppingRule,
    pub walks: Vec<Vec<Step>>,
    pub acyclic: bool,
}

impl ConeDump {
    pub fn from_cone(cone: &Cone) -> ConeDump {
        ConeDump {
            crux: cone.crux.clone(),
            stopping: cone.stopping.clone(),
            walks: cone.walks.iter().map(|w| w.steps().to_vec()).collect(),
            acyclic: cone.acyclic,
        }
    }

    pub fn into_cone(self) -> Result<Cone> {
        let walks = self
            .walks
            .into_iter()
            .map(crate::reverse::PredecessorWalk::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(Cone {
            crux: self.crux,
            stopping: self.stopping,
            walks,
            acyclic: self.acyclic,
        })
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = serde_json::to_string_pretty(value)?;
    out.push('\n');
    Ok(out)
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Csv,
}

fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

fn csv_row(fields: &[String]) -> String {
    fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",")
}

/// The power-function table K_{N,0}(ρ) in the published row/column layout,
/// cells printed to 4 decimals.
pub fn power_table_text(format: TableFormat) -> String {
    let mut header = vec!["N".to_string()];
    header.extend(
        risk::TABLE_PROPORTIONS
            .iter()
            .map(|rho| format!("{rho:.3}")),
    );
    let rows: Vec<Vec<String>> = risk::power_table()
        .into_iter()
        .map(|(n, row)| {
            let mut fields = vec![n.to_string()];
            fields.extend(row.iter().map(|k| format!("{k:.4}")));
            fields
        })
        .collect();
    render(header, rows, format)
}

/// The indifference-proportion table, cells printed to 5 decimals.
pub fn indifference_table_text(format: TableFormat) -> String {
    let header = vec!["N".to_string(), "indifference".to_string()];
    let rows: Vec<Vec<String>> = risk::indifference_table()
        .into_iter()
        .map(|(n, rho)| vec![n.to_string(), format!("{rho:.5}")])
        .collect();
    render(header, rows, format)
}

/// The Risk Assessment Matrix, levels by severity categories.
pub fn risk_matrix_text(format: TableFormat) -> String {
    let header = vec![
        "level".to_string(),
        "1".to_string(),
        "2".to_string(),
        "3".to_string(),
        "4".to_string(),
    ];
    let rows: Vec<Vec<String>> = risk::risk_matrix_table()
        .into_iter()
        .map(|(level, cells)| {
            let mut fields = vec![format!("{level}")];
            fields.extend(cells.iter().map(|c| c.to_string()));
            fields
        })
        .collect();
    render(header, rows, format)
}

/// The quantitative probability-level thresholds.
pub fn level_table_text(format: TableFormat) -> String {
    let header = vec![
        "level".to_string(),
        "lower_inclusive".to_string(),
        "upper_exclusive".to_string(),
    ];
    let rows: Vec<Vec<String>> = risk::level_thresholds()
        .into_iter()
        .map(|(level, lo, hi)| {
            vec![
                format!("{level}"),
                lo.map(|v| format!("{v:e}")).unwrap_or_default(),
                hi.map(|v| format!("{v:e}")).unwrap_or_default(),
            ]
        })
        .collect();
    render(header, rows, format)
}

fn render(header: Vec<String>, rows: Vec<Vec<String>>, format: TableFormat) -> String {
    match format {
        TableFormat::Csv => {
            let mut out = csv_row(&header);
            out.push_str("\r\n");
            for row in rows {
                out.push_str(&csv_row(&row));
                out.push_str("\r\n");
            }
            out
        }
        TableFormat::Text => {
            let mut widths: Vec<usize> = header.iter().map(String::len).collect();
            for row in &rows {
                for (i, cell) in row.iter().enumerate() {
                    widths[i] = widths[i].max(cell.len());
                }
            }
            let mut out = String::new();
            let fmt_row = |fields: &[String], widths: &[usize]| {
                fields
                    .iter()
                    .enumerate()
                    .map(|(i, f)| format!("{:>width$}", f, width = widths[i]))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            out.push_str(&fmt_row(&header, &widths));
            out.push('\n');
            for row in &rows {
                out.push_str(&fmt_row(row, &widths));
                out.push('\n');
            }
            out
        }
    }
}

/// Fixed-width text rendering of a demonstration report.
pub fn report_text(report: &DemonstrationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "safety demonstration: N = {}, failures = {}, seed = {}\n",
        report.sample_size, report.failures, report.seed
    ));
    out.push_str(&format!("profile: {:?}\n", report.profile));
    match report.indifference_upper_bound {
        Some(rho) => out.push_str(&format!("indifference upper bound: {rho:.6}\n")),
        None => out.push_str("indifference upper bound: n/a (failures observed)\n"),
    }
    if let Some(norm) = report.edge_norm_per_second {
        out.push_str(&format!("edge norm: {norm:.6} events/s\n"));
    }
    match report.indemnification {
        Some(lambda) => out.push_str(&format!(
            "indemnification: {:.8}/s = {:.6}/h\n",
            lambda.per_second, lambda.per_hour
        )),
        None => out.push_str("indemnification: n/a\n"),
    }
    if let Some(mle) = report.mle_failure_proportion {
        out.push_str(&format!(
            "observed failure proportion (diagnostic, not assurance): {mle:.6}\n"
        ));
        out.push_str("reliability growth needed\n");
    }
    out.push_str(&format!(
        "{:>5}  {:>6}  {:<9}  {}\n",
        "item", "walk", "outcome", "edge step"
    ));
    for (i, item) in report.items.iter().enumerate() {
        out.push_str(&format!(
            "{:>5}  {:>6}  {:<9}  {}\n",
            i,
            item.walk,
            match item.outcome {
                crate::demo::Outcome::Pass => "pass",
                crate::demo::Outcome::Fail => "FAIL",
            },
            item.edge_step
        ));
    }
    out
}
