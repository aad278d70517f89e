//! Point identification of stratum-specific effects from fused data.
//!
//! Within stratum `A*=s` the same-arm risk `P(Y^s=1 | A*=s)` is observed
//! directly. The cross-arm risk follows from the experimental marginal:
//!
//! ```text
//! P(Y^a=1) = P(A*=a) P(Y=1 | A*=a) + P(A*=1-a) P(Y^a=1 | A*=1-a)
//! ```
//!
//! Data can be fused exactly when every such derived risk is a probability.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Arm, ExperimentalParams, ObservationalParams, Prob};
use crate::scalar::Scalar;

/// Which side of the admissible range an experimental risk falls outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `P(Y=1|do(a)) < P(A*=a) P(Y=1|A*=a)`
    BelowObservedDeaths,
    /// `P(Y=1|do(a)) > P(A*=a) P(Y=1|A*=a) + P(A*=1-a)`
    AboveCeiling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation<T> {
    /// Experimental arm whose risk is out of range.
    pub arm: Arm,
    pub kind: ViolationKind,
    pub experimental_risk: T,
    /// The bound that was crossed.
    pub limit: T,
}

impl<T: Scalar> fmt::Display for Violation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.arm;
        let b = a.other();
        match self.kind {
            ViolationKind::BelowObservedDeaths => write!(
                f,
                "P(Y=1|do(A={a})) = {} < P(A*={a})·P(Y=1|A*={a}) = {}",
                self.experimental_risk, self.limit
            ),
            ViolationKind::AboveCeiling => write!(
                f,
                "P(Y=1|do(A={a})) = {} > P(A*={a})·P(Y=1|A*={a}) + P(A*={b}) = {}",
                self.experimental_risk, self.limit
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionReport<T> {
    pub compatible: bool,
    pub violations: Vec<Violation<T>>,
    /// `P(Y^{1-s}=1 | A*=s)` indexed by `s`; `None` on a null stratum.
    /// Values lie in `[0, 1]` iff the data are compatible.
    pub cross_risks: [Option<T>; 2],
}

impl<T: Scalar> FusionReport<T> {
    pub fn cross_risk(&self, astar: Arm) -> Option<&T> {
        self.cross_risks[astar.index()].as_ref()
    }

    pub fn describe_violations(&self) -> String {
        self.violations
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn into_result(self) -> Result<Self> {
        if self.compatible {
            Ok(self)
        } else {
            Err(Error::IncompatibleEvidence(self.describe_violations()))
        }
    }
}

/// `P(Y^arm=1 | A*=1-arm)` without range checks; `None` if that stratum is null.
fn raw_cross_risk<T: Scalar>(
    p0: &ExperimentalParams<T>,
    p1: &ObservationalParams<T>,
    arm: Arm,
) -> Option<T> {
    let target = arm.other();
    if p1.is_null(target) {
        return None;
    }
    let unexplained = p0.risk(arm).clone() - p1.death_mass(arm);
    Some(unexplained / p1.stratum_mass(target))
}

pub fn compatibility_check<T: Scalar>(
    p0: &ExperimentalParams<T>,
    p1: &ObservationalParams<T>,
) -> FusionReport<T> {
    let mut violations = Vec::new();
    for arm in Arm::BOTH {
        let risk = p0.risk(arm).clone();
        let floor = p1.death_mass(arm);
        let ceiling = floor.clone() + p1.stratum_mass(arm.other());
        if !floor.le_tol(&risk) {
            violations.push(Violation {
                arm,
                kind: ViolationKind::BelowObservedDeaths,
                experimental_risk: risk.clone(),
                limit: floor,
            });
        }
        if !risk.le_tol(&ceiling) {
            violations.push(Violation {
                arm,
                kind: ViolationKind::AboveCeiling,
                experimental_risk: risk,
                limit: ceiling,
            });
        }
    }
    let cross_risks = [Arm::Untreated, Arm::Treated].map(|s| raw_cross_risk(p0, p1, s.other()));
    FusionReport {
        compatible: violations.is_empty(),
        violations,
        cross_risks,
    }
}

/// Identified potential-outcome risks within one `A*` stratum.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumRisks<T> {
    /// `P(Y^1=1 | A*=s)`
    pub treated: Prob<T>,
    /// `P(Y^0=1 | A*=s)`
    pub untreated: Prob<T>,
}

impl<T: Scalar> StratumRisks<T> {
    pub fn risk(&self, arm: Arm) -> &T {
        match arm {
            Arm::Treated => self.treated.value(),
            Arm::Untreated => self.untreated.value(),
        }
    }

    pub fn cate(&self) -> T {
        self.treated.value().clone() - self.untreated.value().clone()
    }

    /// Some arm has risk 0 or 1 in this stratum.
    pub fn is_degenerate(&self) -> bool {
        self.treated.is_degenerate() || self.untreated.is_degenerate()
    }
}

pub fn identify_stratum_risks<T: Scalar>(
    p0: &ExperimentalParams<T>,
    p1: &ObservationalParams<T>,
    astar: Arm,
) -> Result<StratumRisks<T>> {
    if p1.is_null(astar) {
        return Err(Error::NullStratum(astar));
    }
    compatibility_check(p0, p1).into_result()?;
    let same = p1
        .risk(astar)
        .cloned()
        .expect("non-null stratum carries a risk");
    let cross = raw_cross_risk(p0, p1, astar.other()).expect("stratum is non-null");
    // The compatibility check admits values up to tolerance outside [0, 1].
    let clamp = |v: T| v.max_with(T::zero()).min_with(T::one());
    let same = Prob::new(clamp(same))?;
    let cross = Prob::new(clamp(cross))?;
    Ok(match astar {
        Arm::Treated => StratumRisks {
            treated: same,
            untreated: cross,
        },
        Arm::Untreated => StratumRisks {
            treated: cross,
            untreated: same,
        },
    })
}

/// `P(Y^1=1 | A*=astar) - P(Y^0=1 | A*=astar)`: the ATT for `astar = 1`, the
/// ATU for `astar = 0`.
pub fn identify_cate<T: Scalar>(
    p0: &ExperimentalParams<T>,
    p1: &ObservationalParams<T>,
    astar: Arm,
) -> Result<T> {
    identify_stratum_risks(p0, p1, astar).map(|r| r.cate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{mp_men_joint, observables_from_joint};
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    fn mp_men() -> (ExperimentalParams<Q>, ObservationalParams<Q>) {
        observables_from_joint(&mp_men_joint())
    }

    #[test]
    fn worked_example_is_compatible_with_deterministic_cross_risks() {
        let (p0, p1) = mp_men();
        let report = compatibility_check(&p0, &p1);
        assert!(report.compatible);
        assert!(report.violations.is_empty());
        assert_eq!(report.cross_risk(Arm::Untreated), Some(&q(1, 1)));
        assert_eq!(report.cross_risk(Arm::Treated), Some(&q(1, 1)));
    }

    #[test]
    fn excess_observed_deaths_are_incompatible() {
        let p0 = ExperimentalParams::new(q(1, 10), q(1, 2)).unwrap();
        let p1 = ObservationalParams::new(q(9, 10), Some(q(9, 10)), Some(q(1, 2))).unwrap();
        let report = compatibility_check(&p0, &p1);
        assert!(!report.compatible);
        assert!(report.violations.iter().any(|v| v.arm == Arm::Treated
            && v.kind == ViolationKind::BelowObservedDeaths
            && v.limit == q(81, 100)));
        assert!(matches!(
            identify_cate(&p0, &p1, Arm::Treated),
            Err(Error::IncompatibleEvidence(_))
        ));
        let msg = report.describe_violations();
        assert!(msg.contains("81/100"), "{msg}");
    }

    #[test]
    fn single_stratum_population_needs_matching_risk() {
        let p1 = ObservationalParams::new(q(0, 1), None, Some(q(2, 5))).unwrap();
        let ok = ExperimentalParams::new(q(3, 4), q(2, 5)).unwrap();
        assert!(compatibility_check(&ok, &p1).compatible);
        let bad = ExperimentalParams::new(q(3, 4), q(1, 2)).unwrap();
        assert!(!compatibility_check(&bad, &p1).compatible);
    }

    #[test]
    fn worked_example_cates() {
        let (p0, p1) = mp_men();
        assert_eq!(identify_cate(&p0, &p1, Arm::Untreated).unwrap(), q(7, 10));
        assert_eq!(identify_cate(&p0, &p1, Arm::Treated).unwrap(), q(-7, 10));
    }

    #[test]
    fn worked_example_stratum_risks() {
        let (p0, p1) = mp_men();
        let r0 = identify_stratum_risks(&p0, &p1, Arm::Untreated).unwrap();
        assert_eq!((r0.treated.value(), r0.untreated.value()), (&q(1, 1), &q(3, 10)));
        let r1 = identify_stratum_risks(&p0, &p1, Arm::Treated).unwrap();
        assert_eq!((r1.treated.value(), r1.untreated.value()), (&q(3, 10), &q(1, 1)));
    }

    #[test]
    fn whole_population_in_one_stratum() {
        let p0 = ExperimentalParams::new(q(3, 5), q(1, 5)).unwrap();
        let p1 = ObservationalParams::new(q(1, 1), Some(q(3, 5)), None).unwrap();
        assert_eq!(identify_cate(&p0, &p1, Arm::Treated).unwrap(), p0.ate());
        assert_eq!(
            identify_cate(&p0, &p1, Arm::Untreated),
            Err(Error::NullStratum(Arm::Untreated))
        );

        let p1 = ObservationalParams::new(q(0, 1), None, Some(q(1, 5))).unwrap();
        let r = identify_stratum_risks(&p0, &p1, Arm::Untreated).unwrap();
        assert_eq!((r.treated.value(), r.untreated.value()), (&q(3, 5), &q(1, 5)));
    }
}
