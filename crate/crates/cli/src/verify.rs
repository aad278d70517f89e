//! The proposition harness behind `verify`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use harmbounds::model::JointDistribution;
use harmbounds::propositions::{
    run_harness_with, BoundsProvider, Counterexample, Proposition, PropositionReport,
};
use harmbounds::{Atom, Exact, Joint};
use serde::{Deserialize, Serialize};

use crate::error::{exit, CliError};
use crate::rational::Rational;
use crate::OutputFormat;

/// A counterexample in a form that can be fed back to the checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRecord {
    pub proposition: String,
    /// Position in the harness instance list.
    pub index: usize,
    /// Atom masses keyed `y0,y1,a*`.
    pub joint: BTreeMap<String, Rational>,
    pub details: String,
}

fn atom_key(atom: Atom) -> String {
    format!("{},{},{}", u8::from(atom.y0), u8::from(atom.y1), atom.astar)
}

impl CounterexampleRecord {
    fn new(proposition: Proposition, c: &Counterexample<Exact>) -> Self {
        CounterexampleRecord {
            proposition: proposition.to_string(),
            index: c.index,
            joint: Atom::all()
                .map(|a| (atom_key(a), Rational(c.joint.get(a).clone())))
                .collect(),
            details: c.details.clone(),
        }
    }

    /// Rebuilds the joint distribution.
    pub fn to_joint(&self) -> Result<Joint, String> {
        if self.joint.len() != Atom::COUNT {
            return Err("joint must list all eight atoms".into());
        }
        let entries = Atom::all()
            .map(|a| {
                let key = atom_key(a);
                let mass = self.joint.get(&key).ok_or(format!("missing atom {key}"))?;
                Ok((a, mass.0.clone()))
            })
            .collect::<Result<Vec<_>, String>>()?;
        JointDistribution::from_entries(&entries).map_err(|e| e.to_string())
    }

    pub fn proposition(&self) -> Option<Proposition> {
        Proposition::ALL
            .into_iter()
            .find(|p| p.to_string() == self.proposition)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionSummary {
    pub proposition: String,
    pub instances_checked: usize,
    pub counterexamples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub samples: usize,
    pub seed: u64,
    pub propositions: Vec<PropositionSummary>,
    pub counterexamples: Vec<CounterexampleRecord>,
}

impl VerifyReport {
    fn new(samples: usize, seed: u64, reports: &[PropositionReport<Exact>]) -> Self {
        VerifyReport {
            samples,
            seed,
            propositions: reports
                .iter()
                .map(|r| PropositionSummary {
                    proposition: r.proposition.to_string(),
                    instances_checked: r.instances_checked,
                    counterexamples: r.counterexamples.len(),
                })
                .collect(),
            counterexamples: reports
                .iter()
                .flat_map(|r| {
                    r.counterexamples
                        .iter()
                        .map(|c| CounterexampleRecord::new(r.proposition, c))
                })
                .collect(),
        }
    }

    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.holds() {
            exit::SUCCESS
        } else {
            exit::COUNTEREXAMPLE
        }
    }

    fn render_text(&self) -> String {
        let mut out = format!(
            "Proposition harness: {} sampled joints, seed {}\n",
            self.samples, self.seed
        );
        for p in &self.propositions {
            let status = if p.counterexamples == 0 {
                "holds".to_string()
            } else {
                format!("FAILS ({} counterexamples)", p.counterexamples)
            };
            let _ = writeln!(
                out,
                "  {}: {status} on {} instances",
                p.proposition, p.instances_checked
            );
        }
        if !self.holds() {
            out.push_str("Counterexamples (JSON):\n");
            for c in &self.counterexamples {
                let _ = writeln!(out, "{}", serde_json::to_string(c).expect("record serializes"));
            }
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => self.render_text(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}

/// Runs the harness against `provider`.
pub fn command_verify_with(
    provider: &(impl BoundsProvider<Exact> + ?Sized),
    samples: usize,
    seed: u64,
) -> Result<VerifyReport, CliError> {
    let reports = run_harness_with(provider, samples, seed)
        .map_err(|e| CliError::Usage(format!("--samples: {e}")))?;
    Ok(VerifyReport::new(samples, seed, &reports))
}
