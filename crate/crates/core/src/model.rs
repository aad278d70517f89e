//! Probability domain: the joint law of both potential outcomes and the
//! natural treatment value, the observable parameters it implies, and the
//! instance generators used by the proposition harness.
//!
//! A single [`JointDistribution`] over `(Y^{a=0}, Y^{a=1}, A*)` governs both
//! data sources. Trial participation is never a runtime field: randomisation
//! makes the experimental arm risks the potential-outcome marginals, and in
//! observational data the received treatment equals `A*`, so observational
//! arm risks are `P(Y^{a'}=1 | A*=a')`. Both are computed from the same joint.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A binary treatment level, used both for the assigned arm `a` and the
/// natural treatment value `A*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    Untreated = 0,
    Treated = 1,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Untreated, Arm::Treated];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Arm {
        match self {
            Arm::Untreated => Arm::Treated,
            Arm::Treated => Arm::Untreated,
        }
    }

    pub fn from_index(i: usize) -> Option<Arm> {
        match i {
            0 => Some(Arm::Untreated),
            1 => Some(Arm::Treated),
            _ => None,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// A probability: a scalar in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub struct Prob<T>(T);

impl<T: Scalar> Prob<T> {
    pub fn new(value: T) -> Result<Self> {
        if value.is_strictly_negative() || (value.clone() - T::one()).is_strictly_positive() {
            return Err(Error::OutOfRange(value.to_string()));
        }
        Ok(Prob(value))
    }

    pub fn zero() -> Self {
        Prob(T::zero())
    }

    pub fn one() -> Self {
        Prob(T::one())
    }

    pub fn value(&self) -> &T {
        &self.0
    }

    pub fn into_inner(self) -> T {
        self.0
    }

    pub fn complement(&self) -> Self {
        Prob(T::one() - self.0.clone())
    }

    /// Either zero or one.
    pub fn is_degenerate(&self) -> bool {
        self.0.is_negligible() || (self.0.clone() - T::one()).is_negligible()
    }
}

impl<T: Scalar> fmt::Display for Prob<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// One response type extended with the natural treatment value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    /// `Y^{a=0}`: death without treatment.
    pub y0: bool,
    /// `Y^{a=1}`: death under treatment.
    pub y1: bool,
    pub astar: Arm,
}

impl Atom {
    pub const COUNT: usize = 8;

    pub fn new(y0: bool, y1: bool, astar: Arm) -> Self {
        Atom { y0, y1, astar }
    }

    pub fn index(self) -> usize {
        (usize::from(self.y0) << 2) | (usize::from(self.y1) << 1) | self.astar.index()
    }

    pub fn from_index(i: usize) -> Atom {
        assert!(i < Self::COUNT, "atom index {i} out of range");
        Atom {
            y0: i & 4 != 0,
            y1: i & 2 != 0,
            astar: if i & 1 != 0 { Arm::Treated } else { Arm::Untreated },
        }
    }

    pub fn all() -> impl Iterator<Item = Atom> {
        (0..Self::COUNT).map(Atom::from_index)
    }

    /// Potential outcome under `arm`.
    pub fn outcome(self, arm: Arm) -> bool {
        match arm {
            Arm::Untreated => self.y0,
            Arm::Treated => self.y1,
        }
    }

    /// Dies if treated, survives if untreated.
    pub fn is_harmed(self) -> bool {
        self.y1 && !self.y0
    }

    /// Survives if treated, dies if untreated.
    pub fn is_benefited(self) -> bool {
        !self.y1 && self.y0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(y0={}, y1={}, a*={})",
            u8::from(self.y0),
            u8::from(self.y1),
            self.astar
        )
    }
}

/// Full law of `(Y^{a=0}, Y^{a=1}, A*)`: eight nonnegative atoms summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<T> {
    atoms: [T; Atom::COUNT],
}

impl<T: Scalar> JointDistribution<T> {
    /// Atoms are indexed by [`Atom::index`].
    pub fn new(atoms: [T; Atom::COUNT]) -> Result<Self> {
        for (i, p) in atoms.iter().enumerate() {
            if p.is_strictly_negative() {
                return Err(Error::InvalidJoint(format!(
                    "atom {} has negative mass {p}",
                    Atom::from_index(i)
                )));
            }
        }
        let total = atoms.iter().cloned().fold(T::zero(), |acc, p| acc + p);
        if !total.approx_eq(&T::one()) {
            return Err(Error::InvalidJoint(format!("atoms sum to {total}, not 1")));
        }
        Ok(JointDistribution { atoms })
    }

    /// Builds a joint from the listed atoms; unlisted atoms get zero mass.
    pub fn from_entries(entries: &[(Atom, T)]) -> Result<Self> {
        let mut atoms: [T; Atom::COUNT] = std::array::from_fn(|_| T::zero());
        for (atom, p) in entries {
            atoms[atom.index()] = atoms[atom.index()].clone() + p.clone();
        }
        Self::new(atoms)
    }

    pub fn uniform() -> Self {
        JointDistribution {
            atoms: std::array::from_fn(|_| T::ratio(1, Atom::COUNT as i64)),
        }
    }

    pub fn point_mass(atom: Atom) -> Self {
        let mut atoms: [T; Atom::COUNT] = std::array::from_fn(|_| T::zero());
        atoms[atom.index()] = T::one();
        JointDistribution { atoms }
    }

    pub fn atoms(&self) -> &[T; Atom::COUNT] {
        &self.atoms
    }

    pub fn get(&self, atom: Atom) -> &T {
        &self.atoms[atom.index()]
    }

    /// Total mass of atoms satisfying `pred`.
    pub fn mass(&self, pred: impl Fn(Atom) -> bool) -> T {
        Atom::all()
            .filter(|a| pred(*a))
            .fold(T::zero(), |acc, a| acc + self.atoms[a.index()].clone())
    }

    pub fn stratum_mass(&self, astar: Arm) -> T {
        self.mass(|a| a.astar == astar)
    }

    /// Same population with the treatment labels exchanged: `Y^1 <-> Y^0`
    /// and `A* <-> 1 - A*`. Harm in the original is benefit in the image.
    pub fn swap_arms(&self) -> Self {
        let atoms = std::array::from_fn(|i| {
            let a = Atom::from_index(i);
            self.atoms[Atom::new(a.y1, a.y0, a.astar.other()).index()].clone()
        });
        JointDistribution { atoms }
    }
}

/// Worked example: the instance whose experimental and observational
/// parameters are `P0 = (0.51, 0.79)`, `P1 = (0.7, 0.3, 0.3)` and in which
/// the A*=0 stratum always dies under treatment while the A*=1 stratum
/// always dies without it.
pub fn mp_men_joint<T: Scalar>() -> JointDistribution<T> {
    JointDistribution::from_entries(&[
        (Atom::new(true, true, Arm::Treated), T::ratio(21, 100)),
        (Atom::new(true, false, Arm::Treated), T::ratio(49, 100)),
        (Atom::new(true, true, Arm::Untreated), T::ratio(9, 100)),
        (Atom::new(false, true, Arm::Untreated), T::ratio(21, 100)),
    ])
    .expect("worked example is a valid joint")
}

/// Interventional death risks from a randomised experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentalParams<T> {
    /// `P(Y=1 | do(A=1))`
    pub p_do1: Prob<T>,
    /// `P(Y=1 | do(A=0))`
    pub p_do0: Prob<T>,
}

impl<T: Scalar> ExperimentalParams<T> {
    pub fn new(p_do1: T, p_do0: T) -> Result<Self> {
        Ok(ExperimentalParams {
            p_do1: Prob::new(p_do1)?,
            p_do0: Prob::new(p_do0)?,
        })
    }

    pub fn risk(&self, arm: Arm) -> &T {
        match arm {
            Arm::Treated => self.p_do1.value(),
            Arm::Untreated => self.p_do0.value(),
        }
    }

    pub fn ate(&self) -> T {
        self.p_do1.value().clone() - self.p_do0.value().clone()
    }

    pub fn swap_arms(&self) -> Self {
        ExperimentalParams {
            p_do1: self.p_do0.clone(),
            p_do0: self.p_do1.clone(),
        }
    }
}

/// Natural-choice prevalence and arm-specific observational risks.
///
/// A risk is `None` exactly when its arm has zero prevalence.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationalParams<T> {
    /// `P(A*=1)`
    pub pi1: Prob<T>,
    /// `P(Y=1 | A*=1)`
    pub q1: Option<Prob<T>>,
    /// `P(Y=1 | A*=0)`
    pub q0: Option<Prob<T>>,
}

impl<T: Scalar> ObservationalParams<T> {
    pub fn new(pi1: T, q1: Option<T>, q0: Option<T>) -> Result<Self> {
        let pi1 = Prob::new(pi1)?;
        let params = ObservationalParams {
            q1: q1.map(Prob::new).transpose()?,
            q0: q0.map(Prob::new).transpose()?,
            pi1,
        };
        for arm in Arm::BOTH {
            let null = params.stratum_mass(arm).is_negligible();
            match (null, params.risk(arm).is_some()) {
                (true, true) => {
                    return Err(Error::InvalidObservational(format!(
                        "P(Y=1|A*={arm}) given although P(A*={arm}) = 0"
                    )))
                }
                (false, false) => {
                    return Err(Error::InvalidObservational(format!(
                        "P(Y=1|A*={arm}) missing although P(A*={arm}) > 0"
                    )))
                }
                _ => {}
            }
        }
        Ok(params)
    }

    /// `P(A*=astar)`
    pub fn stratum_mass(&self, astar: Arm) -> T {
        match astar {
            Arm::Treated => self.pi1.value().clone(),
            Arm::Untreated => T::one() - self.pi1.value().clone(),
        }
    }

    pub fn is_null(&self, astar: Arm) -> bool {
        self.stratum_mass(astar).is_negligible()
    }

    /// `P(Y=1 | A*=astar)`, undefined on a null stratum.
    pub fn risk(&self, astar: Arm) -> Option<&T> {
        match astar {
            Arm::Treated => self.q1.as_ref().map(Prob::value),
            Arm::Untreated => self.q0.as_ref().map(Prob::value),
        }
    }

    /// `P(Y=1, A*=astar)`; zero on a null stratum.
    pub fn death_mass(&self, astar: Arm) -> T {
        match self.risk(astar) {
            Some(q) => self.stratum_mass(astar) * q.clone(),
            None => T::zero(),
        }
    }

    pub fn swap_arms(&self) -> Self {
        ObservationalParams {
            pi1: self.pi1.complement(),
            q1: self.q0.clone(),
            q0: self.q1.clone(),
        }
    }
}

/// True values of the causal estimands under a joint.
///
/// Arrays are indexed by `A*` via [`Arm::index`]; entries are `None` on
/// null strata.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimands<T> {
    pub p_harm: T,
    pub p_benefit: T,
    pub ate: T,
    pub cate: [Option<T>; 2],
    pub p_harm_given: [Option<T>; 2],
    pub p_benefit_given: [Option<T>; 2],
}

impl<T: Scalar> Estimands<T> {
    pub fn cate(&self, astar: Arm) -> Option<&T> {
        self.cate[astar.index()].as_ref()
    }

    pub fn harm_given(&self, astar: Arm) -> Option<&T> {
        self.p_harm_given[astar.index()].as_ref()
    }

    pub fn benefit_given(&self, astar: Arm) -> Option<&T> {
        self.p_benefit_given[astar.index()].as_ref()
    }
}

pub fn observables_from_joint<T: Scalar>(
    joint: &JointDistribution<T>,
) -> (ExperimentalParams<T>, ObservationalParams<T>) {
    let p0 = ExperimentalParams {
        p_do1: Prob(joint.mass(|a| a.y1)),
        p_do0: Prob(joint.mass(|a| a.y0)),
    };
    let pi1 = joint.stratum_mass(Arm::Treated);
    let risk = |astar: Arm| {
        let mass = joint.stratum_mass(astar);
        if mass.is_negligible() {
            None
        } else {
            Some(Prob(
                joint.mass(|a| a.astar == astar && a.outcome(astar)) / mass,
            ))
        }
    };
    let p1 = ObservationalParams {
        q1: risk(Arm::Treated),
        q0: risk(Arm::Untreated),
        pi1: Prob(pi1),
    };
    (p0, p1)
}

pub fn true_estimands<T: Scalar>(joint: &JointDistribution<T>) -> Estimands<T> {
    let p_harm = joint.mass(Atom::is_harmed);
    let p_benefit = joint.mass(Atom::is_benefited);
    let ate = joint.mass(|a| a.y1) - joint.mass(|a| a.y0);

    let conditional = |astar: Arm, pred: fn(Atom) -> bool| {
        let mass = joint.stratum_mass(astar);
        if mass.is_negligible() {
            None
        } else {
            Some(joint.mass(|a| a.astar == astar && pred(a)) / mass)
        }
    };
    let per_stratum = |pred: fn(Atom) -> bool| {
        [
            conditional(Arm::Untreated, pred),
            conditional(Arm::Treated, pred),
        ]
    };
    let p_harm_given = per_stratum(Atom::is_harmed);
    let p_benefit_given = per_stratum(Atom::is_benefited);
    let cate = [0, 1].map(|i| match (&p_harm_given[i], &p_benefit_given[i]) {
        (Some(h), Some(b)) => Some(h.clone() - b.clone()),
        _ => None,
    });

    Estimands {
        p_harm,
        p_benefit,
        ate,
        cate,
        p_harm_given,
        p_benefit_given,
    }
}

/// Inclusive upper end of the integer grid drawn by [`sample_joint`].
pub const SAMPLE_GRID_MAX: u32 = 12;

/// Draws eight integers uniformly from `0..=SAMPLE_GRID_MAX` and normalises
/// them by their sum. Deterministic in `seed`; all-zero draws are redrawn.
pub fn sample_joint<T: Scalar>(seed: u64) -> JointDistribution<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let counts: [u32; Atom::COUNT] = std::array::from_fn(|_| rng.gen_range(0..=SAMPLE_GRID_MAX));
        let total: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        if total == 0 {
            continue;
        }
        let total = T::from_count(total);
        let atoms = counts.map(|c| T::from_count(u64::from(c)) / total.clone());
        return JointDistribution { atoms };
    }
}

/// Which potential-outcome risks a constructed joint forces to 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// Nothing forced.
    None,
    /// `P(Y^arm = 1) = dies` in the whole population.
    Marginal { arm: Arm, dies: bool },
    /// `P(Y^{arm_s} = 1 | A*=s) = dies_s` separately in each stratum `s`;
    /// entries indexed by `A*`.
    Stratum { forced: [(Arm, bool); 2] },
}

impl Degeneracy {
    fn forced(&self, astar: Arm, arm: Arm) -> Option<bool> {
        match *self {
            Degeneracy::None => None,
            Degeneracy::Marginal { arm: a, dies } => (a == arm).then_some(dies),
            Degeneracy::Stratum { forced } => {
                let (a, dies) = forced[astar.index()];
                (a == arm).then_some(dies)
            }
        }
    }
}

/// Free inputs of [`degenerate_family`].
///
/// `free` lists the stratum risks `P(Y^arm=1 | A*=astar)` that the
/// degeneracy leaves open, ordered by `(astar, arm)` with the untreated
/// level first, skipping forced cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams<T> {
    pub pi1: T,
    pub free: Vec<T>,
}

/// Builds a joint whose stratum risks follow `kind` and `params`. Within each
/// stratum the two potential outcomes are coupled independently.
pub fn degenerate_family<T: Scalar>(
    kind: Degeneracy,
    params: &FamilyParams<T>,
) -> Result<JointDistribution<T>> {
    let pi1 = Prob::new(params.pi1.clone())
        .map_err(|e| Error::InvalidParams(format!("pi1: {e}")))?;
    let mut free = params.free.iter();
    let mut risks: [[T; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| T::zero()));
    for astar in Arm::BOTH {
        for arm in Arm::BOTH {
            risks[astar.index()][arm.index()] = match kind.forced(astar, arm) {
                Some(true) => T::one(),
                Some(false) => T::zero(),
                None => {
                    let p = free.next().ok_or_else(|| {
                        Error::InvalidParams(format!(
                            "missing free risk for arm {arm} in stratum A*={astar}"
                        ))
                    })?;
                    Prob::new(p.clone())
                        .map_err(|e| Error::InvalidParams(e.to_string()))?
                        .into_inner()
                }
            };
        }
    }
    if free.next().is_some() {
        return Err(Error::InvalidParams(format!(
            "{} free risks given, degeneracy leaves fewer open",
            params.free.len()
        )));
    }

    let outcome_prob = |p: &T, dies: bool| if dies { p.clone() } else { T::one() - p.clone() };
    let atoms = std::array::from_fn(|i| {
        let a = Atom::from_index(i);
        let stratum = match a.astar {
            Arm::Treated => pi1.value().clone(),
            Arm::Untreated => T::one() - pi1.value().clone(),
        };
        let r = &risks[a.astar.index()];
        stratum
            * outcome_prob(&r[Arm::Treated.index()], a.y1)
            * outcome_prob(&r[Arm::Untreated.index()], a.y0)
    });
    JointDistribution::new(atoms)
}

/// Every degeneracy pattern crossed with a small grid of prevalences and
/// free risks, including the boundary values 0 and 1.
pub fn degenerate_grid<T: Scalar>() -> Vec<JointDistribution<T>> {
    let prevalences = [T::zero(), T::ratio(1, 4), T::ratio(7, 10), T::one()];
    let risk_levels = [T::zero(), T::ratio(1, 3), T::one()];

    let mut kinds = vec![Degeneracy::None];
    for arm in Arm::BOTH {
        for dies in [false, true] {
            kinds.push(Degeneracy::Marginal { arm, dies });
        }
    }
    let cell_patterns: Vec<(Arm, bool)> = Arm::BOTH
        .iter()
        .flat_map(|&arm| [(arm, false), (arm, true)])
        .collect();
    for &untreated in &cell_patterns {
        for &treated in &cell_patterns {
            kinds.push(Degeneracy::Stratum {
                forced: [untreated, treated],
            });
        }
    }

    let mut joints = Vec::new();
    for kind in kinds {
        let n_free = Arm::BOTH
            .iter()
            .flat_map(|&s| Arm::BOTH.map(|a| kind.forced(s, a)))
            .filter(Option::is_none)
            .count();
        for pi1 in &prevalences {
            for combo in 0..risk_levels.len().pow(n_free as u32) {
                let mut rest = combo;
                let free = (0..n_free)
                    .map(|_| {
                        let level = risk_levels[rest % risk_levels.len()].clone();
                        rest /= risk_levels.len();
                        level
                    })
                    .collect();
                let params = FamilyParams {
                    pi1: pi1.clone(),
                    free,
                };
                joints.push(degenerate_family(kind, &params).expect("grid values are probabilities"));
            }
        }
    }
    joints
}
