//! Per-stratum analysis and its JSON / text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use harmbounds::bounds::{self, Interval};
use harmbounds::identification::compatibility_check;
use harmbounds::propositions::{counterfactual_verdict, interventionist_verdict, Verdict};
use harmbounds::{Arm, Evidence, Exact, Scalar};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::input::{describe_labels, StudyInput};
use crate::rational::Rational;

/// A rational with its decimal rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub rational: Rational,
    pub decimal: String,
    /// Whether `decimal` is exact.
    pub exact: bool,
}

impl Quantity {
    pub fn new(value: Exact) -> Self {
        let rational = Rational(value);
        let (decimal, exact) = rational.decimal();
        Quantity {
            rational,
            decimal,
            exact,
        }
    }

    pub fn value(&self) -> &Exact {
        &self.rational.0
    }

    fn text(&self) -> String {
        self.rational.display()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub lower: Quantity,
    pub upper: Quantity,
    pub point_identified: bool,
    /// Strictly positive lower bound on a harm-type estimand.
    pub indicates_harm: bool,
}

impl IntervalReport {
    fn new(interval: &Interval<Exact>, harm_type: bool) -> Self {
        IntervalReport {
            lower: Quantity::new(interval.lower().clone()),
            upper: Quantity::new(interval.upper().clone()),
            point_identified: bounds::is_point_identified(interval),
            indicates_harm: harm_type && interval.lower().is_strictly_positive(),
        }
    }

    fn text(&self) -> String {
        if self.point_identified {
            format!("{} (point)", self.lower.text())
        } else {
            format!("[{}, {}]", self.lower.text(), self.upper.text())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub detected: bool,
    pub witness: String,
    pub witness_value: Quantity,
}

impl From<Verdict<Exact>> for VerdictReport {
    fn from(v: Verdict<Exact>) -> Self {
        VerdictReport {
            detected: v.detected,
            witness: witness_text(&v),
            witness_value: Quantity::new(v.witness.value().clone()),
        }
    }
}

fn witness_text(v: &Verdict<Exact>) -> String {
    use harmbounds::propositions::Witness;
    match &v.witness {
        Witness::MarginalAte(x) => format!("marginal ATE lower bound {}", Rational(x.clone())),
        Witness::StratumCate { astar, value } => {
            format!("ATE lower bound {} among A*={astar}", Rational(value.clone()))
        }
        Witness::HarmLowerBound { value, .. } => {
            format!("harm lower bound {}", Rational(value.clone()))
        }
    }
}

/// A value per natural-treatment stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ByStratum<T> {
    pub astar1: T,
    pub astar0: T,
}

impl<T> ByStratum<T> {
    fn build(mut f: impl FnMut(Arm) -> T) -> Self {
        ByStratum {
            astar1: f(Arm::Treated),
            astar0: f(Arm::Untreated),
        }
    }

    pub fn get(&self, astar: Arm) -> &T {
        match astar {
            Arm::Treated => &self.astar1,
            Arm::Untreated => &self.astar0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub harm: IntervalReport,
    pub benefit: IntervalReport,
    pub ate: IntervalReport,
    /// `None` on a null stratum.
    pub cate: ByStratum<Option<IntervalReport>>,
    /// Present only with observational data.
    pub conditional_harm: ByStratum<Option<IntervalReport>>,
    pub conditional_benefit: ByStratum<Option<IntervalReport>>,
    pub interventionist: VerdictReport,
    pub counterfactual: VerdictReport,
}

fn level_report(ev: &Evidence) -> harmbounds::Result<LevelReport> {
    let optional = |r: harmbounds::Result<Interval<Exact>>, harm_type: bool| match r {
        Ok(i) => Ok(Some(IntervalReport::new(&i, harm_type))),
        Err(harmbounds::Error::NullStratum(_) | harmbounds::Error::MissingObservational) => Ok(None),
        Err(e) => Err(e),
    };
    let by = |f: &dyn Fn(Arm) -> harmbounds::Result<Option<IntervalReport>>| {
        Ok::<_, harmbounds::Error>(ByStratum {
            astar1: f(Arm::Treated)?,
            astar0: f(Arm::Untreated)?,
        })
    };
    Ok(LevelReport {
        harm: IntervalReport::new(&bounds::harm_bounds(ev)?, true),
        benefit: IntervalReport::new(&bounds::benefit_bounds(ev)?, false),
        ate: IntervalReport::new(&bounds::ate_bounds(ev)?, true),
        cate: by(&|s| optional(bounds::cate_bounds(ev, s), true))?,
        conditional_harm: by(&|s| optional(bounds::conditional_harm_bounds(ev, s), true))?,
        conditional_benefit: by(&|s| optional(bounds::conditional_benefit_bounds(ev, s), false))?,
        interventionist: interventionist_verdict(ev)?.into(),
        counterfactual: counterfactual_verdict(ev)?.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalReport {
    pub p_do1: Quantity,
    pub p_do0: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationalReport {
    pub pi1: Quantity,
    pub q1: Option<Quantity>,
    pub q0: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionSummary {
    pub compatible: bool,
    pub violations: Vec<String>,
    /// `P(Y^0=1 | A*=1)` and `P(Y^1=1 | A*=0)`, the risks the fusion
    /// identifies; outside `[0, 1]` exactly when incompatible.
    pub cross_risks: ByStratum<Option<Quantity>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumReport {
    pub labels: BTreeMap<String, String>,
    pub p0: ExperimentalReport,
    pub p1: Option<ObservationalReport>,
    pub fusion: Option<FusionSummary>,
    pub experimental: LevelReport,
    /// Absent without observational data or when the sources conflict.
    pub fused: Option<LevelReport>,
}

impl StratumReport {
    pub fn is_incompatible(&self) -> bool {
        self.fusion.as_ref().is_some_and(|f| !f.compatible)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub strata: Vec<StratumReport>,
}

impl AnalysisReport {
    /// True when every stratum had conflicting sources.
    pub fn all_incompatible(&self) -> bool {
        !self.strata.is_empty() && self.strata.iter().all(StratumReport::is_incompatible)
    }
}

fn analyze_stratum(
    labels: &BTreeMap<String, String>,
    evidence: &Evidence,
) -> harmbounds::Result<StratumReport> {
    let p0 = &evidence.p0;
    let experimental = Evidence::experimental(p0.clone());
    let mut report = StratumReport {
        labels: labels.clone(),
        p0: ExperimentalReport {
            p_do1: Quantity::new(p0.p_do1.value().clone()),
            p_do0: Quantity::new(p0.p_do0.value().clone()),
        },
        p1: None,
        fusion: None,
        experimental: level_report(&experimental)?,
        fused: None,
    };
    if let Some(p1) = &evidence.p1 {
        report.p1 = Some(ObservationalReport {
            pi1: Quantity::new(p1.pi1.value().clone()),
            q1: p1.q1.as_ref().map(|q| Quantity::new(q.value().clone())),
            q0: p1.q0.as_ref().map(|q| Quantity::new(q.value().clone())),
        });
        let check = compatibility_check(p0, p1);
        report.fusion = Some(FusionSummary {
            compatible: check.compatible,
            violations: check.violations.iter().map(ToString::to_string).collect(),
            cross_risks: ByStratum::build(|s| check.cross_risk(s).cloned().map(Quantity::new)),
        });
        if check.compatible {
            report.fused = Some(level_report(evidence)?);
        }
    }
    Ok(report)
}

/// Runs the analysis on every stratum in input order. Incompatible strata
/// are recorded, not treated as errors.
pub fn analyze(input: &StudyInput) -> Result<AnalysisReport, CliError> {
    let strata = input
        .strata
        .iter()
        .enumerate()
        .map(|(i, stratum)| {
            let name = format!("stratum {} ({})", i + 1, describe_labels(&stratum.labels));
            let evidence = stratum
                .evidence()
                .map_err(|e| CliError::Validation(format!("{name}: {e}")))?;
            analyze_stratum(&stratum.labels, &evidence)
                .map_err(|e| CliError::Validation(format!("{name}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    Ok(AnalysisReport {
        note: input.note.clone(),
        strata,
    })
}

pub fn render_json(report: &AnalysisReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Text styling for positive (harm-indicating) lower bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Plain,
    Ansi,
}

impl Style {
    fn harm(self, padded: &str) -> String {
        let trimmed = padded.trim_end();
        let pad = &padded[trimmed.len()..];
        match self {
            Style::Plain => padded.to_string(),
            Style::Ansi => format!("\x1b[1m{trimmed}\x1b[0m{pad}"),
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "Yes"
    } else {
        "No"
    }
}

const ESTIMANDS: [&str; 4] = [
    "P(Y^1=1, Y^0=0)",
    "E(Y^1) - E(Y^0)",
    "E(Y^1 - Y^0 | A*=1)",
    "E(Y^1 - Y^0 | A*=0)",
];

fn lower_cell(interval: Option<&IntervalReport>, style: Style, width: usize) -> String {
    match interval {
        None => format!("{:<width$}", "-"),
        Some(i) if i.indicates_harm => style.harm(&format!("{:<width$}", format!("{}*", i.lower.text()))),
        Some(i) => format!("{:<width$}", i.lower.text()),
    }
}

fn lower_bound_rows(level: &LevelReport) -> [Option<&IntervalReport>; 4] {
    [
        Some(&level.harm),
        Some(&level.ate),
        level.cate.astar1.as_ref(),
        level.cate.astar0.as_ref(),
    ]
}

fn render_stratum(out: &mut String, index: usize, s: &StratumReport, style: Style) {
    let q = |x: &Quantity| x.text();
    let _ = writeln!(out, "Stratum {}: {}", index + 1, describe_labels(&s.labels));
    let _ = writeln!(
        out,
        "  P0: P(Y=1|do(A=1)) = {}, P(Y=1|do(A=0)) = {}",
        q(&s.p0.p_do1),
        q(&s.p0.p_do0)
    );
    match &s.p1 {
        None => {
            let _ = writeln!(out, "  P1: not available");
        }
        Some(p1) => {
            let risk = |r: &Option<Quantity>| r.as_ref().map_or("undefined".to_string(), q);
            let _ = writeln!(
                out,
                "  P1: P(A*=1) = {}, P(Y=1|A*=1) = {}, P(Y=1|A*=0) = {}",
                q(&p1.pi1),
                risk(&p1.q1),
                risk(&p1.q0)
            );
        }
    }
    if let Some(f) = &s.fusion {
        let cross = |astar: Arm, label: &str| {
            f.cross_risks
                .get(astar)
                .as_ref()
                .map(|x| format!("{label} = {}", q(x)))
        };
        let risks: Vec<String> = [
            cross(Arm::Treated, "P(Y^0=1|A*=1)"),
            cross(Arm::Untreated, "P(Y^1=1|A*=0)"),
        ]
        .into_iter()
        .flatten()
        .collect();
        if f.compatible {
            let _ = writeln!(out, "  Fusion: compatible; {}", risks.join(", "));
        } else {
            let _ = writeln!(out, "  Fusion: INCOMPATIBLE, fused analysis skipped");
            for v in &f.violations {
                let _ = writeln!(out, "    {v}");
            }
        }
    }
    out.push('\n');

    let fused_label = "P0 & P1";
    let exp_rows = lower_bound_rows(&s.experimental);
    let fused_rows = s.fused.as_ref().map(lower_bound_rows);
    let _ = writeln!(out, "  Sharp lower bounds (* positive, indicating harm)");
    let _ = writeln!(out, "  {:<17}{:<23}{:<10}{}", "Approach", "Estimand", "P0 only", fused_label);
    for (row, estimand) in ESTIMANDS.iter().enumerate() {
        let approach = match row {
            0 => "Counterfactual",
            1 => "Interventionist",
            _ => "",
        };
        let exp = lower_cell(exp_rows[row], style, 10);
        let fused = match &fused_rows {
            Some(rows) => lower_cell(rows[row], style, 0),
            None => "-".to_string(),
        };
        let _ = writeln!(out, "  {approach:<17}{estimand:<23}{exp}{fused}");
    }
    out.push('\n');

    let _ = writeln!(out, "  {:<17}{:<10}{}", "Harm?", "P0 only", fused_label);
    let fused_verdict = |f: fn(&LevelReport) -> &VerdictReport| {
        s.fused.as_ref().map_or("-", |l| yes_no(f(l).detected))
    };
    let _ = writeln!(
        out,
        "  {:<17}{:<10}{}",
        "Counterfactual",
        yes_no(s.experimental.counterfactual.detected),
        fused_verdict(|l| &l.counterfactual)
    );
    let _ = writeln!(
        out,
        "  {:<17}{:<10}{}",
        "Interventionist",
        yes_no(s.experimental.interventionist.detected),
        fused_verdict(|l| &l.interventionist)
    );
    out.push('\n');

    let _ = writeln!(out, "  Sharp intervals");
    let _ = writeln!(out, "  {:<25}{:<22}{}", "Estimand", "P0 only", fused_label);
    type Cell = fn(&LevelReport) -> Option<&IntervalReport>;
    let rows: [(&str, Cell); 9] = [
        ("harm", |l| Some(&l.harm)),
        ("benefit", |l| Some(&l.benefit)),
        ("ATE", |l| Some(&l.ate)),
        ("CATE | A*=1", |l| l.cate.astar1.as_ref()),
        ("CATE | A*=0", |l| l.cate.astar0.as_ref()),
        ("harm | A*=1", |l| l.conditional_harm.astar1.as_ref()),
        ("harm | A*=0", |l| l.conditional_harm.astar0.as_ref()),
        ("benefit | A*=1", |l| l.conditional_benefit.astar1.as_ref()),
        ("benefit | A*=0", |l| l.conditional_benefit.astar0.as_ref()),
    ];
    for (name, get) in &rows {
        let cell = |l: Option<&LevelReport>| l.and_then(get).map_or("-".to_string(), IntervalReport::text);
        let _ = writeln!(
            out,
            "  {name:<25}{:<22}{}",
            cell(Some(&s.experimental)),
            cell(s.fused.as_ref())
        );
    }
    out.push('\n');

    let _ = writeln!(out, "  Verdicts");
    let mut verdict = |school: &str, level: &str, v: &VerdictReport| {
        let _ = writeln!(
            out,
            "    {school:<16}{level:<9}{:<5}{}",
            yes_no(v.detected),
            v.witness
        );
    };
    verdict("counterfactual", "P0", &s.experimental.counterfactual);
    verdict("interventionist", "P0", &s.experimental.interventionist);
    if let Some(l) = &s.fused {
        verdict("counterfactual", "P0 & P1", &l.counterfactual);
        verdict("interventionist", "P0 & P1", &l.interventionist);
    }
}

pub fn render_text(report: &AnalysisReport, style: Style) -> String {
    let mut out = String::from("Harm analysis\n");
    if let Some(note) = &report.note {
        let _ = writeln!(out, "Note: {note}");
    }
    for (i, s) in report.strata.iter().enumerate() {
        out.push('\n');
        render_stratum(&mut out, i, s, style);
    }
    out
}
