//! Exact linear-programming oracle over joint distributions.
//!
//! Any bound the evidence implies for a linear functional of the joint is the
//! optimum of a small linear program: atoms are nonnegative, sum to one and
//! reproduce the evidence through equality rows. The feasible region is a
//! bounded polytope, so optima are attained at basic feasible solutions.
//! With at most eight atoms it is cheapest (and exact) to enumerate all bases.

use crate::bounds::{EvidenceSet, Interval};
use crate::error::{Error, Result};
use crate::model::{Arm, Atom};
use crate::scalar::Scalar;

/// Quantity whose sharp range is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Harm,
    Benefit,
    HarmGiven(Arm),
    BenefitGiven(Arm),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqConstraint<T> {
    pub coefficients: Vec<T>,
    pub rhs: T,
}

/// `optimize objective · x  s.t.  x >= 0, sum(x) = 1, rows`.
///
/// Conditional targets carry the stratum mass: the objective is the joint
/// numerator and the conditional value is the optimum divided by the mass.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub num_atoms: usize,
    pub objective: Vec<T>,
    pub eq_constraints: Vec<EqConstraint<T>>,
    pub stratum_mass: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult<T> {
    Optimal { value: T, witness: Vec<T> },
    Infeasible,
}

impl<T: Scalar> LpResult<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            LpResult::Optimal { value, .. } => Some(value),
            LpResult::Infeasible => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpResult::Infeasible)
    }
}

/// Atoms of the experiment-only program: `(y0, y1)` at index `2*y0 + y1`.
pub const EXPERIMENTAL_ATOMS: usize = 4;

fn indicator<T: Scalar>(n: usize, pred: impl Fn(usize) -> bool) -> Vec<T> {
    (0..n)
        .map(|i| if pred(i) { T::one() } else { T::zero() })
        .collect()
}

pub fn build_program<T: Scalar>(evidence: &EvidenceSet<T>, target: Target) -> Result<LinearProgram<T>> {
    let p0 = &evidence.p0;
    let Some(p1) = &evidence.p1 else {
        let n = EXPERIMENTAL_ATOMS;
        let y0 = |i: usize| i & 2 != 0;
        let y1 = |i: usize| i & 1 != 0;
        let objective = match target {
            Target::Harm => indicator(n, |i| y1(i) && !y0(i)),
            Target::Benefit => indicator(n, |i| !y1(i) && y0(i)),
            Target::HarmGiven(_) | Target::BenefitGiven(_) => {
                return Err(Error::MissingObservational)
            }
        };
        return Ok(LinearProgram {
            num_atoms: n,
            objective,
            eq_constraints: vec![
                EqConstraint {
                    coefficients: indicator(n, y1),
                    rhs: p0.p_do1.value().clone(),
                },
                EqConstraint {
                    coefficients: indicator(n, y0),
                    rhs: p0.p_do0.value().clone(),
                },
            ],
            stratum_mass: None,
        });
    };

    let n = Atom::COUNT;
    let at = |pred: fn(Atom) -> bool| indicator::<T>(n, move |i| pred(Atom::from_index(i)));
    let (objective, stratum_mass) = match target {
        Target::Harm => (at(Atom::is_harmed), None),
        Target::Benefit => (at(Atom::is_benefited), None),
        Target::HarmGiven(s) | Target::BenefitGiven(s) => {
            if p1.is_null(s) {
                return Err(Error::NullStratum(s));
            }
            let harm = matches!(target, Target::HarmGiven(_));
            let objective = indicator(n, |i| {
                let a = Atom::from_index(i);
                a.astar == s && if harm { a.is_harmed() } else { a.is_benefited() }
            });
            (objective, Some(p1.stratum_mass(s)))
        }
    };

    let mut rows = vec![
        EqConstraint {
            coefficients: at(|a| a.y1),
            rhs: p0.p_do1.value().clone(),
        },
        EqConstraint {
            coefficients: at(|a| a.y0),
            rhs: p0.p_do0.value().clone(),
        },
        EqConstraint {
            coefficients: at(|a| a.astar == Arm::Treated),
            rhs: p1.pi1.value().clone(),
        },
    ];
    // Observed deaths in each natural-choice arm: P(Y^s=1, A*=s).
    for s in Arm::BOTH {
        if !p1.is_null(s) {
            rows.push(EqConstraint {
                coefficients: indicator(n, |i| {
                    let a = Atom::from_index(i);
                    a.astar == s && a.outcome(s)
                }),
                rhs: p1.death_mass(s),
            });
        }
    }
    Ok(LinearProgram {
        num_atoms: n,
        objective,
        eq_constraints: rows,
        stratum_mass,
    })
}

/// Reduces `[A | b]` to linearly independent rows. `None` if inconsistent.
fn independent_rows<T: Scalar>(mut rows: Vec<(Vec<T>, T)>, n: usize) -> Option<Vec<(Vec<T>, T)>> {
    let mut rank = 0;
    for col in 0..n {
        let Some(pivot) = (rank..rows.len())
            .filter(|&r| !rows[r].0[col].is_negligible())
            .max_by(|&a, &b| {
                rows[a].0[col]
                    .abs()
                    .partial_cmp(&rows[b].0[col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        else {
            continue;
        };
        rows.swap(rank, pivot);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let (prow, prhs) = &head[rank];
        for (row, rhs) in tail.iter_mut() {
            if row[col].is_negligible() {
                continue;
            }
            let factor = row[col].clone() / prow[col].clone();
            for (x, p) in row.iter_mut().zip(prow).skip(col) {
                *x = x.clone() - factor.clone() * p.clone();
            }
            *rhs = rhs.clone() - factor * prhs.clone();
        }
        rank += 1;
    }
    if rows[rank..].iter().any(|(_, rhs)| !rhs.is_negligible()) {
        return None;
    }
    rows.truncate(rank);
    Some(rows)
}

/// Solves a square system by Gaussian elimination; `None` if singular.
fn solve_square<T: Scalar>(mut m: Vec<Vec<T>>, mut rhs: Vec<T>) -> Option<Vec<T>> {
    let k = rhs.len();
    for col in 0..k {
        let pivot = (col..k)
            .filter(|&r| !m[r][col].is_negligible())
            .max_by(|&a, &b| {
                m[a][col]
                    .abs()
                    .partial_cmp(&m[b][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in 0..k {
            if r == col || m[r][col].is_negligible() {
                continue;
            }
            let factor = m[r][col].clone() / m[col][col].clone();
            let pivot_row = m[col].clone();
            for (x, p) in m[r].iter_mut().zip(&pivot_row).skip(col) {
                *x = x.clone() - factor.clone() * p.clone();
            }
            rhs[r] = rhs[r].clone() - factor * rhs[col].clone();
        }
    }
    Some((0..k).map(|i| rhs[i].clone() / m[i][i].clone()).collect())
}

/// All basic feasible solutions of the program's constraint set. Empty iff
/// the program is infeasible. Vertices may repeat under degeneracy.
pub fn feasible_vertices<T: Scalar>(lp: &LinearProgram<T>) -> Vec<Vec<T>> {
    let n = lp.num_atoms;
    assert!(n <= 16, "vertex enumeration is meant for tiny programs");
    let mut rows: Vec<(Vec<T>, T)> = lp
        .eq_constraints
        .iter()
        .map(|c| {
            assert_eq!(c.coefficients.len(), n, "constraint width mismatch");
            (c.coefficients.clone(), c.rhs.clone())
        })
        .collect();
    rows.push((vec![T::one(); n], T::one()));

    let Some(rows) = independent_rows(rows, n) else {
        return Vec::new();
    };
    let rank = rows.len() as u32;

    let mut vertices = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() != rank {
            continue;
        }
        let cols: Vec<usize> = (0..n).filter(|&c| mask & (1 << c) != 0).collect();
        let m = rows
            .iter()
            .map(|(row, _)| cols.iter().map(|&c| row[c].clone()).collect())
            .collect();
        let rhs = rows.iter().map(|(_, b)| b.clone()).collect();
        let Some(basic) = solve_square(m, rhs) else {
            continue;
        };
        if basic.iter().any(Scalar::is_strictly_negative) {
            continue;
        }
        let mut x = vec![T::zero(); n];
        for (&c, v) in cols.iter().zip(basic) {
            x[c] = v.max_with(T::zero());
        }
        vertices.push(x);
    }
    vertices
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn optimize_over<T: Scalar>(objective: &[T], vertices: &[Vec<T>], sense: Sense) -> LpResult<T> {
    let mut best: Option<(T, &Vec<T>)> = None;
    for v in vertices {
        let value = dot(objective, v);
        let better = match &best {
            None => true,
            Some((b, _)) => match sense {
                Sense::Minimize => value < *b,
                Sense::Maximize => value > *b,
            },
        };
        if better {
            best = Some((value, v));
        }
    }
    match best {
        Some((value, witness)) => LpResult::Optimal {
            value,
            witness: witness.clone(),
        },
        None => LpResult::Infeasible,
    }
}

/// Optimum of the objective (the joint numerator for conditional targets).
pub fn solve<T: Scalar>(lp: &LinearProgram<T>, sense: Sense) -> LpResult<T> {
    optimize_over(&lp.objective, &feasible_vertices(lp), sense)
}

fn interval_from<T: Scalar>(lp: &LinearProgram<T>, vertices: &[Vec<T>]) -> Result<Interval<T>> {
    let (LpResult::Optimal { value: lo, .. }, LpResult::Optimal { value: hi, .. }) = (
        optimize_over(&lp.objective, vertices, Sense::Minimize),
        optimize_over(&lp.objective, vertices, Sense::Maximize),
    ) else {
        return Err(Error::IncompatibleEvidence(
            "no joint distribution reproduces the evidence".into(),
        ));
    };
    let interval = Interval::new(lo, hi)?;
    Ok(match &lp.stratum_mass {
        Some(mass) => interval.scale(&(T::one() / mass.clone())),
        None => interval,
    })
}

/// `[min, max]` of the target over all joints consistent with the evidence.
pub fn sharp_interval<T: Scalar>(evidence: &EvidenceSet<T>, target: Target) -> Result<Interval<T>> {
    let lp = build_program(evidence, target)?;
    interval_from(&lp, &feasible_vertices(&lp))
}

/// [`sharp_interval`] for several targets, sharing one vertex enumeration.
/// All targets must be defined for the evidence.
pub fn sharp_intervals<T: Scalar>(
    evidence: &EvidenceSet<T>,
    targets: &[Target],
) -> Result<Vec<Interval<T>>> {
    let programs = targets
        .iter()
        .map(|&t| build_program(evidence, t))
        .collect::<Result<Vec<_>>>()?;
    let Some(first) = programs.first() else {
        return Ok(Vec::new());
    };
    let vertices = feasible_vertices(first);
    programs.iter().map(|lp| interval_from(lp, &vertices)).collect()
}
