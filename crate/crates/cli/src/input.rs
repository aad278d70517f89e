//! Study input: per-stratum count tables (JSON or CSV) or, in JSON, exact
//! parameters given directly.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use harmbounds::bounds::EvidenceSet;
use harmbounds::model::{ExperimentalParams, ObservationalParams};
use harmbounds::{Evidence, Exact, Scalar};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    Json,
    Csv,
}

impl InputFormat {
    /// `.csv` files are CSV, anything else JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub events: u64,
    pub total: u64,
}

impl Cell {
    fn proportion(&self) -> Exact {
        Exact::from_count(self.events) / Exact::from_count(self.total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmCounts {
    pub treated: Cell,
    pub untreated: Cell,
}

/// Parameters given as exact numbers instead of counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub p_do1: Rational,
    pub p_do0: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi1: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumInput {
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experimental: Option<ArmCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observational: Option<ArmCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Parameters>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyInput {
    /// Free-text provenance carried into the report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub strata: Vec<StratumInput>,
}

pub fn describe_labels(labels: &BTreeMap<String, String>) -> String {
    if labels.is_empty() {
        return "(all)".to_string();
    }
    labels
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn check_cell(cell: &Cell, name: &str) -> Result<(), String> {
    if cell.total == 0 {
        return Err(format!("{name}: total must be positive"));
    }
    if cell.events > cell.total {
        return Err(format!(
            "{name}: events {} exceed total {}",
            cell.events, cell.total
        ));
    }
    Ok(())
}

impl StratumInput {
    pub fn validate(&self) -> Result<(), String> {
        match (&self.experimental, &self.parameters) {
            (Some(_), Some(_)) => {
                return Err("give either experimental counts or parameters, not both".into())
            }
            (None, None) => return Err("missing experimental counts or parameters".into()),
            (Some(_), None) => {}
            (None, Some(_)) if self.observational.is_some() => {
                return Err("observational counts cannot be combined with parameters".into())
            }
            (None, Some(_)) => {}
        }
        if let Some(exp) = &self.experimental {
            check_cell(&exp.treated, "experimental.treated")?;
            check_cell(&exp.untreated, "experimental.untreated")?;
        }
        if let Some(obs) = &self.observational {
            check_cell(&obs.treated, "observational.treated")?;
            check_cell(&obs.untreated, "observational.untreated")?;
        }
        if let Some(params) = &self.parameters {
            self.parameter_evidence(params)?;
        }
        Ok(())
    }

    fn parameter_evidence(&self, params: &Parameters) -> Result<Evidence, String> {
        let p0 = ExperimentalParams::new(params.p_do1.0.clone(), params.p_do0.0.clone())
            .map_err(|e| format!("parameters: {e}"))?;
        let p1 = match (&params.pi1, &params.q1, &params.q0) {
            (None, None, None) => None,
            (Some(pi1), q1, q0) => Some(
                ObservationalParams::new(
                    pi1.0.clone(),
                    q1.as_ref().map(|r| r.0.clone()),
                    q0.as_ref().map(|r| r.0.clone()),
                )
                .map_err(|e| format!("parameters: {e}"))?,
            ),
            (None, _, _) => return Err("parameters: q1/q0 given without pi1".into()),
        };
        Ok(EvidenceSet { p0, p1 })
    }

    /// Exact proportions implied by the counts (or the given parameters).
    pub fn evidence(&self) -> Result<Evidence, String> {
        if let Some(params) = &self.parameters {
            return self.parameter_evidence(params);
        }
        let exp = self
            .experimental
            .as_ref()
            .ok_or("missing experimental counts")?;
        let p0 = ExperimentalParams::new(exp.treated.proportion(), exp.untreated.proportion())
            .map_err(|e| e.to_string())?;
        let p1 = self
            .observational
            .as_ref()
            .map(|obs| {
                let n1 = Exact::from_count(obs.treated.total);
                let n0 = Exact::from_count(obs.untreated.total);
                ObservationalParams::new(
                    n1.clone() / (n1 + n0),
                    Some(obs.treated.proportion()),
                    Some(obs.untreated.proportion()),
                )
                .map_err(|e| e.to_string())
            })
            .transpose()?;
        Ok(EvidenceSet { p0, p1 })
    }
}

impl StudyInput {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.strata.is_empty() {
            return Err(CliError::Validation("input has no strata".into()));
        }
        let mut seen = HashSet::new();
        for (i, stratum) in self.strata.iter().enumerate() {
            let name = format!("stratum {} ({})", i + 1, describe_labels(&stratum.labels));
            stratum
                .validate()
                .map_err(|e| CliError::Validation(format!("{name}: {e}")))?;
            if !seen.insert(&stratum.labels) {
                return Err(CliError::Validation(format!("{name}: duplicate stratum labels")));
            }
        }
        Ok(())
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "labels",
    "exp_t_events",
    "exp_t_total",
    "exp_c_events",
    "exp_c_total",
    "obs_t_events",
    "obs_t_total",
    "obs_c_events",
    "obs_c_total",
];

/// `key=value` pairs separated by `;`.
fn parse_labels(field: &str, line: u64) -> Result<BTreeMap<String, String>, CliError> {
    let mut labels = BTreeMap::new();
    for pair in field.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').ok_or_else(|| {
            CliError::Parse(format!("line {line}, field 'labels': expected key=value, got '{pair}'"))
        })?;
        labels.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(labels)
}

fn csv_error(e: csv::Error) -> CliError {
    match e.kind() {
        csv::ErrorKind::UnequalLengths {
            pos: Some(pos), len, ..
        } => CliError::Parse(format!(
            "line {}: expected {} fields, found {len}",
            pos.line(),
            CSV_HEADER.len()
        )),
        _ => match e.position() {
            Some(pos) => CliError::Parse(format!("line {}: {e}", pos.line())),
            None => CliError::Parse(format!("CSV: {e}")),
        },
    }
}

pub fn parse_csv(text: &str) -> Result<StudyInput, CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::Parse(format!("CSV header: {e}")))?
        .clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(CliError::Parse(format!(
            "line 1: expected header '{}'",
            CSV_HEADER.join(",")
        )));
    }
    let mut strata = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |i: usize| -> Result<Option<u64>, CliError> {
            let raw = &record[i];
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse().map(Some).map_err(|_| {
                CliError::Parse(format!(
                    "line {line}, field '{}': '{raw}' is not a nonnegative integer",
                    CSV_HEADER[i]
                ))
            })
        };
        let required = |i: usize| -> Result<u64, CliError> {
            number(i)?.ok_or_else(|| {
                CliError::Parse(format!("line {line}, field '{}': value required", CSV_HEADER[i]))
            })
        };
        let cells = (5..9).map(number).collect::<Result<Vec<_>, _>>()?;
        let observational = if cells.iter().all(Option::is_none) {
            None
        } else if let [Some(te), Some(tt), Some(ce), Some(ct)] = cells[..] {
            Some(ArmCounts {
                treated: Cell { events: te, total: tt },
                untreated: Cell { events: ce, total: ct },
            })
        } else {
            return Err(CliError::Parse(format!(
                "line {line}: observational cells must be all filled or all empty"
            )));
        };
        strata.push(StratumInput {
            labels: parse_labels(&record[0], line)?,
            experimental: Some(ArmCounts {
                treated: Cell {
                    events: required(1)?,
                    total: required(2)?,
                },
                untreated: Cell {
                    events: required(3)?,
                    total: required(4)?,
                },
            }),
            observational,
            parameters: None,
        });
    }
    Ok(StudyInput { note: None, strata })
}

pub fn parse_json(text: &str) -> Result<StudyInput, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("JSON: {e}")))
}

/// Reads and validates a study file.
pub fn parse_input(path: &Path, format: InputFormat) -> Result<StudyInput, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let input = match format {
        InputFormat::Json => parse_json(&text)?,
        InputFormat::Csv => parse_csv(&text)?,
    };
    input.validate()?;
    Ok(input)
}
