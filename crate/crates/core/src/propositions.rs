//! Harm detection by the two schools and falsification checks of the
//! concordance results relating them.
//!
//! Harm is *detected* when a sharp lower bound is strictly positive: on the
//! harm probability for the counterfactual school, on an average treatment
//! effect for the interventionist school. Without observational data the
//! only interventionist group is the whole population; with it, the groups
//! are the two `A*` strata.
//!
//! The checks take their bounds from a [`BoundsProvider`], which lets tests
//! swap in a deliberately wrong implementation and watch the harness catch it.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{self, is_point_identified, EvidenceSet, Interval};
use crate::error::{Error, Result};
use crate::identification::identify_stratum_risks;
use crate::model::{
    degenerate_grid, mp_men_joint, observables_from_joint, sample_joint, Arm, JointDistribution,
};
use crate::scalar::Scalar;

/// Source of the bounds the verdicts and checks are computed from.
pub trait BoundsProvider<T: Scalar> {
    fn harm(&self, evidence: &EvidenceSet<T>) -> Result<Interval<T>> {
        bounds::harm_bounds(evidence)
    }

    fn benefit(&self, evidence: &EvidenceSet<T>) -> Result<Interval<T>> {
        bounds::benefit_bounds(evidence)
    }

    fn conditional_harm(&self, evidence: &EvidenceSet<T>, astar: Arm) -> Result<Interval<T>> {
        bounds::conditional_harm_bounds(evidence, astar)
    }

    fn conditional_benefit(&self, evidence: &EvidenceSet<T>, astar: Arm) -> Result<Interval<T>> {
        bounds::conditional_benefit_bounds(evidence, astar)
    }

    fn ate(&self, evidence: &EvidenceSet<T>) -> Result<Interval<T>> {
        bounds::ate_bounds(evidence)
    }

    fn cate(&self, evidence: &EvidenceSet<T>, astar: Arm) -> Result<Interval<T>> {
        bounds::cate_bounds(evidence, astar)
    }
}

/// The sharp bounds of [`crate::bounds`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SharpBounds;

impl<T: Scalar> BoundsProvider<T> for SharpBounds {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum School {
    Interventionist,
    Counterfactual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvidenceLevel {
    Experimental,
    Fused,
}

impl EvidenceLevel {
    fn of<T>(evidence: &EvidenceSet<T>) -> Self {
        if evidence.p1.is_some() {
            EvidenceLevel::Fused
        } else {
            EvidenceLevel::Experimental
        }
    }
}

/// The sharp lower bound a verdict was decided on.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness<T> {
    MarginalAte(T),
    StratumCate { astar: Arm, value: T },
    HarmLowerBound { level: EvidenceLevel, value: T },
}

impl<T> Witness<T> {
    pub fn value(&self) -> &T {
        match self {
            Witness::MarginalAte(v) => v,
            Witness::StratumCate { value, .. } | Witness::HarmLowerBound { value, .. } => value,
        }
    }
}

impl<T: Scalar> fmt::Display for Witness<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::MarginalAte(v) => write!(f, "marginal ATE lower bound {v}"),
            Witness::StratumCate { astar, value } => {
                write!(f, "ATE lower bound {value} in stratum A*={astar}")
            }
            Witness::HarmLowerBound { level, value } => {
                let level = match level {
                    EvidenceLevel::Experimental => "experimental",
                    EvidenceLevel::Fused => "fused",
                };
                write!(f, "{level} harm lower bound {value}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<T> {
    pub school: School,
    pub level: EvidenceLevel,
    /// Strictly positive witnessing bound.
    pub detected: bool,
    pub witness: Witness<T>,
}

pub fn interventionist_verdict<T: Scalar>(evidence: &EvidenceSet<T>) -> Result<Verdict<T>> {
    interventionist_verdict_with(&SharpBounds, evidence)
}

pub fn counterfactual_verdict<T: Scalar>(evidence: &EvidenceSet<T>) -> Result<Verdict<T>> {
    counterfactual_verdict_with(&SharpBounds, evidence)
}

pub fn interventionist_verdict_with<T: Scalar>(
    provider: &(impl BoundsProvider<T> + ?Sized),
    evidence: &EvidenceSet<T>,
) -> Result<Verdict<T>> {
    let witness = match &evidence.p1 {
        None => Witness::MarginalAte(provider.ate(evidence)?.lower().clone()),
        Some(p1) => {
            let mut best: Option<(Arm, T)> = None;
            for astar in Arm::BOTH {
                if p1.is_null(astar) {
                    continue;
                }
                let lower = provider.cate(evidence, astar)?.lower().clone();
                if best.as_ref().is_none_or(|(_, b)| lower > *b) {
                    best = Some((astar, lower));
                }
            }
            let (astar, value) = best.expect("some stratum has positive mass");
            Witness::StratumCate { astar, value }
        }
    };
    Ok(Verdict {
        school: School::Interventionist,
        level: EvidenceLevel::of(evidence),
        detected: witness.value().is_strictly_positive(),
        witness,
    })
}

pub fn counterfactual_verdict_with<T: Scalar>(
    provider: &(impl BoundsProvider<T> + ?Sized),
    evidence: &EvidenceSet<T>,
) -> Result<Verdict<T>> {
    let level = EvidenceLevel::of(evidence);
    let value = provider.harm(evidence)?.lower().clone();
    Ok(Verdict {
        school: School::Counterfactual,
        level,
        detected: value.is_strictly_positive(),
        witness: Witness::HarmLowerBound { level, value },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Proposition {
    /// Both schools detect harm in exactly the same cases.
    P1,
    /// Harm is point identified iff some arm risk is degenerate.
    P2,
    /// Marginally identified positive harm forces zero conditional harm or
    /// zero conditional benefit in each stratum.
    P3,
    /// Fusion improves the harm lower bound iff stratum effects have
    /// strictly opposite signs.
    P4,
}

impl Proposition {
    pub const ALL: [Proposition; 4] = [
        Proposition::P1,
        Proposition::P2,
        Proposition::P3,
        Proposition::P4,
    ];

    /// Whether the check is meaningful for `joint` (P4 needs both strata).
    pub fn applies<T: Scalar>(self, joint: &JointDistribution<T>) -> bool {
        match self {
            Proposition::P4 => Arm::BOTH.iter().all(|&s| !joint.stratum_mass(s).is_negligible()),
            _ => true,
        }
    }

    /// Description of the violation, or `None` if the proposition holds.
    pub fn check_with<T: Scalar>(
        self,
        provider: &(impl BoundsProvider<T> + ?Sized),
        joint: &JointDistribution<T>,
    ) -> Option<String> {
        let outcome = match self {
            Proposition::P1 => prop1(provider, joint),
            Proposition::P2 => prop2(provider, joint),
            Proposition::P3 => prop3(provider, joint),
            Proposition::P4 => prop4(provider, joint),
        };
        outcome.unwrap_or_else(|e| Some(format!("bounds computation failed: {e}")))
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = *self as u8 + 1;
        write!(f, "P{n}")
    }
}

fn evidence_levels<T: Scalar>(joint: &JointDistribution<T>) -> (EvidenceSet<T>, EvidenceSet<T>) {
    let (p0, p1) = observables_from_joint(joint);
    (EvidenceSet::experimental(p0.clone()), EvidenceSet::fused(p0, p1))
}

fn prop1<T: Scalar>(
    provider: &(impl BoundsProvider<T> + ?Sized),
    joint: &JointDistribution<T>,
) -> Result<Option<String>> {
    let (exp, fused) = evidence_levels(joint);
    for (label, ev) in [("(1) experimental", &exp), ("(2) fused", &fused)] {
        let cf = counterfactual_verdict_with(provider, ev)?;
        let iv = interventionist_verdict_with(provider, ev)?;
        if cf.detected != iv.detected {
            return Ok(Some(format!(
                "{label}: counterfactual detected={} ({}), interventionist detected={} ({})",
                cf.detected, cf.witness, iv.detected, iv.witness
            )));
        }
    }
    Ok(None)
}

fn prop2<T: Scalar>(
    provider: &(impl BoundsProvider<T> + ?Sized),
    joint: &JointDistribution<T>,
) -> Result<Option<String>> {
    let (exp, fused) = evidence_levels(joint);

    let harm = provider.harm(&exp)?;
    let degenerate_arm = exp.p0.p_do1.is_degenerate() || exp.p0.p_do0.is_degenerate();
    if is_point_identified(&harm) != degenerate_arm {
        return Ok(Some(format!(
            "(1): experimental harm bounds {harm}, degenerate arm risk = {degenerate_arm}"
        )));
    }

    let harm = provider.harm(&fused)?;
    let p1 = fused.p1.as_ref().expect("fused evidence");
    let mut every_stratum_degenerate = true;
    for astar in Arm::BOTH {
        if p1.is_null(astar) {
            continue;
        }
        let risks = identify_stratum_risks(&fused.p0, p1, astar)?;
        every_stratum_degenerate &= risks.is_degenerate();
    }
    if is_point_identified(&harm) != every_stratum_degenerate {
        return Ok(Some(format!(
            "(2): fused harm bounds {harm}, degenerate arm risk in every stratum = {every_stratum_degenerate}"
        )));
    }
    Ok(None)
}

fn prop3<T: Scalar>(
    provider: &(impl BoundsProvider<T> + ?Sized),
    joint: &JointDistribution<T>,
) -> Result<Option<String>> {
    let (exp, fused) = evidence_levels(joint);
    let positive_point = |iv: &Interval<T>| is_point_identified(iv) && iv.lower().is_strictly_positive();
    if !positive_point(&provider.harm(&fused)?) && !positive_point(&provider.harm(&exp)?) {
        return Ok(None);
    }
    let zero = Interval::point(T::zero());
    let is_zero = |iv: &Interval<T>| iv.lower().approx_eq(zero.lower()) && iv.upper().approx_eq(zero.upper());
    let p1 = fused.p1.as_ref().expect("fused evidence");
    for astar in Arm::BOTH {
        if p1.is_null(astar) {
            continue;
        }
        let benefit = provider.conditional_benefit(&fused, astar)?;
        let harm = provider.conditional_harm(&fused, astar)?;
        if !is_zero(&benefit) && !is_zero(&harm) {
            return Ok(Some(format!(
                "stratum A*={astar}: conditional benefit {benefit} and conditional harm {harm} are both non-zero"
            )));
        }
    }
    Ok(None)
}

fn prop4<T: Scalar>(
    provider: &(impl BoundsProvider<T> + ?Sized),
    joint: &JointDistribution<T>,
) -> Result<Option<String>> {
    if !Proposition::P4.applies(joint) {
        return Ok(None);
    }
    let (exp, fused) = evidence_levels(joint);
    let before = provider.harm(&exp)?.lower().clone();
    let after = provider.harm(&fused)?.lower().clone();
    let improved = (after.clone() - before.clone()).is_strictly_positive();

    let cate = [Arm::Untreated, Arm::Treated].map(|s| provider.cate(&fused, s));
    let [c0, c1] = cate;
    let (c0, c1) = (c0?, c1?);
    let opposite = |neg: &Interval<T>, pos: &Interval<T>| {
        neg.upper().is_strictly_negative() && pos.lower().is_strictly_positive()
    };
    let opposite = opposite(&c0, &c1) || opposite(&c1, &c0);
    if improved != opposite {
        return Ok(Some(format!(
            "harm lower bound {before} -> {after} (improved = {improved}); stratum ATE bounds A*=0 {c0}, A*=1 {c1} (strictly opposite = {opposite})"
        )));
    }
    Ok(None)
}

pub fn check_prop1<T: Scalar>(joint: &JointDistribution<T>) -> Option<String> {
    Proposition::P1.check_with(&SharpBounds, joint)
}

pub fn check_prop2<T: Scalar>(joint: &JointDistribution<T>) -> Option<String> {
    Proposition::P2.check_with(&SharpBounds, joint)
}

pub fn check_prop3<T: Scalar>(joint: &JointDistribution<T>) -> Option<String> {
    Proposition::P3.check_with(&SharpBounds, joint)
}

/// Vacuously `None` when a stratum is null.
pub fn check_prop4<T: Scalar>(joint: &JointDistribution<T>) -> Option<String> {
    Proposition::P4.check_with(&SharpBounds, joint)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample<T> {
    /// Position in [`harness_instances`].
    pub index: usize,
    pub joint: JointDistribution<T>,
    pub details: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropositionReport<T> {
    pub proposition: Proposition,
    pub instances_checked: usize,
    /// Sorted by instance index.
    pub counterexamples: Vec<Counterexample<T>>,
}

impl<T: Scalar> PropositionReport<T> {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Re-evaluates a stored counterexample; true if it still violates.
pub fn reverify<T: Scalar>(
    provider: &(impl BoundsProvider<T> + ?Sized),
    proposition: Proposition,
    counterexample: &Counterexample<T>,
) -> bool {
    proposition.check_with(provider, &counterexample.joint).is_some()
}

/// The worked example, the degenerate-family grid, then `n` sampled joints
/// whose seeds are drawn from a generator seeded with `seed`.
pub fn harness_instances<T: Scalar>(n: usize, seed: u64) -> Vec<JointDistribution<T>> {
    let mut instances = vec![mp_men_joint()];
    instances.extend(degenerate_grid());
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    instances.extend((0..n).map(|_| sample_joint(seeds.gen())));
    instances
}

pub fn run_harness<T: Scalar>(n: usize, seed: u64) -> Result<Vec<PropositionReport<T>>> {
    run_harness_with(&SharpBounds, n, seed)
}

pub fn run_harness_with<T: Scalar>(
    provider: &(impl BoundsProvider<T> + ?Sized),
    n: usize,
    seed: u64,
) -> Result<Vec<PropositionReport<T>>> {
    if n == 0 {
        return Err(Error::EmptyHarness);
    }
    let instances = harness_instances::<T>(n, seed);
    let mut reports: Vec<PropositionReport<T>> = Proposition::ALL
        .iter()
        .map(|&proposition| PropositionReport {
            proposition,
            instances_checked: 0,
            counterexamples: Vec::new(),
        })
        .collect();
    for (index, joint) in instances.iter().enumerate() {
        for report in &mut reports {
            if !report.proposition.applies(joint) {
                continue;
            }
            report.instances_checked += 1;
            if let Some(details) = report.proposition.check_with(provider, joint) {
                report.counterexamples.push(Counterexample {
                    index,
                    joint: joint.clone(),
                    details,
                });
            }
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{degenerate_family, Degeneracy, ExperimentalParams, FamilyParams};
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    fn mp_levels() -> (EvidenceSet<Q>, EvidenceSet<Q>) {
        evidence_levels(&mp_men_joint())
    }

    fn marginal_death() -> JointDistribution<Q> {
        degenerate_family(
            Degeneracy::Marginal {
                arm: Arm::Treated,
                dies: true,
            },
            &FamilyParams {
                pi1: q(2, 5),
                free: vec![q(1, 3), q(1, 2)],
            },
        )
        .unwrap()
    }

    #[test]
    fn interventionist_verdicts() {
        let (exp, fused) = mp_levels();
        let v = interventionist_verdict(&exp).unwrap();
        assert!(!v.detected);
        assert_eq!(v.witness, Witness::MarginalAte(q(-7, 25)));

        let v = interventionist_verdict(&fused).unwrap();
        assert!(v.detected);
        assert_eq!(
            v.witness,
            Witness::StratumCate {
                astar: Arm::Untreated,
                value: q(7, 10)
            }
        );

        let ev = EvidenceSet::experimental(ExperimentalParams::new(q(3, 5), q(2, 5)).unwrap());
        assert!(interventionist_verdict(&ev).unwrap().detected);
    }

    #[test]
    fn counterfactual_verdicts() {
        let (exp, fused) = mp_levels();
        let v = counterfactual_verdict(&exp).unwrap();
        assert!(!v.detected);
        assert_eq!(v.witness.value(), &q(0, 1));
        let v = counterfactual_verdict(&fused).unwrap();
        assert!(v.detected);
        assert_eq!(v.witness.value(), &q(21, 100));

        let ev = EvidenceSet::experimental(ExperimentalParams::new(q(3, 5), q(2, 5)).unwrap());
        let v = counterfactual_verdict(&ev).unwrap();
        assert!(v.detected);
        assert_eq!(v.witness.value(), &q(1, 5));
    }

    #[test]
    fn propositions_hold_on_named_instances() {
        let joints = [mp_men_joint::<Q>(), JointDistribution::uniform(), marginal_death()];
        for joint in &joints {
            for p in Proposition::ALL {
                assert_eq!(p.check_with(&SharpBounds, joint), None, "{p} on {joint:?}");
            }
        }
    }

    #[test]
    fn uniform_is_not_point_identified() {
        let (exp, _) = evidence_levels(&JointDistribution::<Q>::uniform());
        let h = SharpBounds.harm(&exp).unwrap();
        assert_eq!(h, Interval::new(q(0, 1), q(1, 2)).unwrap());
    }

    #[test]
    fn marginal_death_forces_zero_benefit_everywhere() {
        let joint = marginal_death();
        let (exp, fused) = evidence_levels(&joint);
        let h = SharpBounds.harm(&exp).unwrap();
        assert!(is_point_identified(&h) && h.lower().is_strictly_positive());
        for s in Arm::BOTH {
            assert_eq!(
                SharpBounds.conditional_benefit(&fused, s).unwrap(),
                Interval::point(q(0, 1))
            );
        }
    }

    #[test]
    fn null_stratum_makes_prop4_vacuous() {
        let joint = JointDistribution::<Q>::point_mass(crate::model::Atom::new(true, false, Arm::Treated));
        assert!(!Proposition::P4.applies(&joint));
        assert_eq!(check_prop4(&joint), None);
    }

    #[test]
    fn harness_is_deterministic_and_clean() {
        let a = run_harness::<Q>(50, 9).unwrap();
        let b = run_harness::<Q>(50, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(PropositionReport::holds), "{a:?}");
        assert_eq!(run_harness::<Q>(0, 9), Err(Error::EmptyHarness));
    }

    /// Ignores observational data for the harm bound.
    struct StaleHarm;

    impl BoundsProvider<Q> for StaleHarm {
        fn harm(&self, evidence: &EvidenceSet<Q>) -> Result<Interval<Q>> {
            bounds::harm_bounds(&evidence.without_observational())
        }
    }

    #[test]
    fn harness_catches_a_wrong_bound() {
        let reports = run_harness_with(&StaleHarm, 20, 1).unwrap();
        let p1 = &reports[0];
        assert_eq!(p1.proposition, Proposition::P1);
        let first = p1.counterexamples.first().expect("worked example breaks P1");
        assert_eq!(first.index, 0);
        assert!(reverify(&StaleHarm, Proposition::P1, first));
        assert!(!reverify(&SharpBounds, Proposition::P1, first));
    }
}
