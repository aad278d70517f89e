//! Sharp bounds on harm, benefit and treatment effects.
//!
//! Experimental data fix only the two potential-outcome marginals, so the
//! harm probability ranges over the Fréchet interval of a 2x2 table with
//! those margins. Adding observational data identifies both marginals inside
//! each `A*` stratum (see [`crate::identification`]) while leaving the
//! within-stratum coupling free, so the fused bounds are the
//! prevalence-weighted sum of per-stratum Fréchet intervals. Every interval
//! here is checked against the linear-programming oracle in
//! [`crate::lp`].

use std::fmt;

use crate::error::{Error, Result};
use crate::identification::{compatibility_check, identify_cate, identify_stratum_risks};
use crate::model::{Arm, ExperimentalParams, ObservationalParams};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Interval<T> {
    lower: T,
    upper: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lower: T, upper: T) -> Result<Self> {
        if !lower.le_tol(&upper) {
            return Err(Error::InvertedInterval {
                lower: lower.to_string(),
                upper: upper.to_string(),
            });
        }
        Ok(Interval { lower, upper })
    }

    pub fn point(value: T) -> Self {
        Interval {
            lower: value.clone(),
            upper: value,
        }
    }

    pub fn lower(&self) -> &T {
        &self.lower
    }

    pub fn upper(&self) -> &T {
        &self.upper
    }

    pub fn contains(&self, value: &T) -> bool {
        self.lower.le_tol(value) && value.le_tol(&self.upper)
    }

    pub fn is_subset_of(&self, other: &Interval<T>) -> bool {
        other.lower.le_tol(&self.lower) && self.upper.le_tol(&other.upper)
    }

    pub fn scale(&self, factor: &T) -> Self {
        Interval {
            lower: self.lower.clone() * factor.clone(),
            upper: self.upper.clone() * factor.clone(),
        }
    }

    fn add(self, other: Self) -> Self {
        Interval {
            lower: self.lower + other.lower,
            upper: self.upper + other.upper,
        }
    }
}

impl<T: Scalar> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

/// Lower and upper bound coincide.
pub fn is_point_identified<T: Scalar>(interval: &Interval<T>) -> bool {
    interval.lower.approx_eq(&interval.upper)
}

/// Experimental parameters, optionally fused with observational ones.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceSet<T> {
    pub p0: ExperimentalParams<T>,
    pub p1: Option<ObservationalParams<T>>,
}

impl<T: Scalar> EvidenceSet<T> {
    pub fn experimental(p0: ExperimentalParams<T>) -> Self {
        EvidenceSet { p0, p1: None }
    }

    pub fn fused(p0: ExperimentalParams<T>, p1: ObservationalParams<T>) -> Self {
        EvidenceSet { p0, p1: Some(p1) }
    }

    pub fn is_fused(&self) -> bool {
        self.p1.is_some()
    }

    /// The experimental part alone.
    pub fn without_observational(&self) -> Self {
        EvidenceSet::experimental(self.p0.clone())
    }

    /// Relabels treatment levels; maps harm bounds onto benefit bounds.
    pub fn swap_arms(&self) -> Self {
        EvidenceSet {
            p0: self.p0.swap_arms(),
            p1: self.p1.as_ref().map(ObservationalParams::swap_arms),
        }
    }

    /// Fails with [`Error::IncompatibleEvidence`] when the sources cannot be fused.
    pub fn validate(&self) -> Result<()> {
        match &self.p1 {
            Some(p1) => compatibility_check(&self.p0, p1).into_result().map(|_| ()),
            None => Ok(()),
        }
    }

    fn observational(&self) -> Result<&ObservationalParams<T>> {
        self.p1.as_ref().ok_or(Error::MissingObservational)
    }
}

/// Range of `P(Y^1=1, Y^0=0)` over 2x2 tables with the given death margins.
fn frechet_harm<T: Scalar>(treated: &T, untreated: &T) -> Interval<T> {
    let lower = (treated.clone() - untreated.clone()).max_with(T::zero());
    let upper = treated.clone().min_with(T::one() - untreated.clone());
    Interval { lower, upper }
}

/// Range of `P(Y^1=0, Y^0=1)` over the same tables.
fn frechet_benefit<T: Scalar>(treated: &T, untreated: &T) -> Interval<T> {
    frechet_harm(untreated, treated)
}

type Frechet<T> = fn(&T, &T) -> Interval<T>;

fn marginal_bounds<T: Scalar>(evidence: &EvidenceSet<T>, frechet: Frechet<T>) -> Result<Interval<T>> {
    evidence.validate()?;
    let p0 = &evidence.p0;
    let Some(p1) = &evidence.p1 else {
        return Ok(frechet(p0.p_do1.value(), p0.p_do0.value()));
    };
    let mut total = Interval::point(T::zero());
    for astar in Arm::BOTH {
        if p1.is_null(astar) {
            continue;
        }
        let risks = identify_stratum_risks(p0, p1, astar)?;
        let stratum = frechet(risks.treated.value(), risks.untreated.value());
        total = total.add(stratum.scale(&p1.stratum_mass(astar)));
    }
    Ok(total)
}

fn conditional_bounds<T: Scalar>(
    evidence: &EvidenceSet<T>,
    astar: Arm,
    frechet: Frechet<T>,
) -> Result<Interval<T>> {
    let p1 = evidence.observational()?;
    if p1.is_null(astar) {
        return Err(Error::NullStratum(astar));
    }
    let risks = identify_stratum_risks(&evidence.p0, p1, astar)?;
    Ok(frechet(risks.treated.value(), risks.untreated.value()))
}

/// Sharp bounds on `P(Y^1=1, Y^0=0)`.
pub fn harm_bounds<T: Scalar>(evidence: &EvidenceSet<T>) -> Result<Interval<T>> {
    marginal_bounds(evidence, frechet_harm)
}

/// Sharp bounds on `P(Y^1=0, Y^0=1)`.
pub fn benefit_bounds<T: Scalar>(evidence: &EvidenceSet<T>) -> Result<Interval<T>> {
    marginal_bounds(evidence, frechet_benefit)
}

/// Sharp bounds on `P(Y^1=1, Y^0=0 | A*=astar)`; needs observational data.
pub fn conditional_harm_bounds<T: Scalar>(
    evidence: &EvidenceSet<T>,
    astar: Arm,
) -> Result<Interval<T>> {
    conditional_bounds(evidence, astar, frechet_harm)
}

/// Sharp bounds on `P(Y^1=0, Y^0=1 | A*=astar)`; needs observational data.
pub fn conditional_benefit_bounds<T: Scalar>(
    evidence: &EvidenceSet<T>,
    astar: Arm,
) -> Result<Interval<T>> {
    conditional_bounds(evidence, astar, frechet_benefit)
}

/// The marginal ATE is identified by the experiment alone.
pub fn ate_bounds<T: Scalar>(evidence: &EvidenceSet<T>) -> Result<Interval<T>> {
    evidence.validate()?;
    Ok(Interval::point(evidence.p0.ate()))
}

/// Bounds on the ATE within stratum `A*=astar`.
///
/// Without observational data nothing links the trial to natural treatment
/// choices and the closed interval `[-1, 1]` is returned; its endpoints are
/// approached as the stratum prevalence shrinks to zero.
pub fn cate_bounds<T: Scalar>(evidence: &EvidenceSet<T>, astar: Arm) -> Result<Interval<T>> {
    match &evidence.p1 {
        None => Ok(Interval {
            lower: -T::one(),
            upper: T::one(),
        }),
        Some(p1) => {
            if p1.is_null(astar) {
                return Err(Error::NullStratum(astar));
            }
            identify_cate(&evidence.p0, p1, astar).map(Interval::point)
        }
    }
}
