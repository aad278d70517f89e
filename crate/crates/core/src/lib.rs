//! Sharp bounds on the probability of counterfactual harm and benefit for a
//! binary treatment and binary outcome, with fusion of experimental and
//! observational (natural-choice) data.
//!
//! The numeric core is generic over [`Scalar`]. [`Exact`] (arbitrary
//! precision rationals) is the reference instantiation and the aliases below
//! fix it; [`Approx`] runs the same code on `f64`.
//!
//! ```
//! use harmbounds::{bounds, model, Arm, Evidence, Exact};
//!
//! let (p0, p1) = model::observables_from_joint(&model::mp_men_joint::<Exact>());
//! let fused = Evidence::fused(p0, p1);
//! let harm = bounds::harm_bounds(&fused).unwrap();
//! assert!(bounds::is_point_identified(&harm));
//! assert_eq!(bounds::cate_bounds(&fused, Arm::Untreated).unwrap().lower().to_string(), "7/10");
//! ```

pub mod bounds;
pub mod error;
pub mod identification;
pub mod lp;
pub mod model;
pub mod propositions;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{Arm, Atom, Prob};
pub use scalar::Scalar;

pub type Exact = num_rational::BigRational;
pub type Approx = f64;

pub type Joint = model::JointDistribution<Exact>;
pub type Experimental = model::ExperimentalParams<Exact>;
pub type Observational = model::ObservationalParams<Exact>;
pub type Evidence = bounds::EvidenceSet<Exact>;
pub type ExactInterval = bounds::Interval<Exact>;
pub type ExactEstimands = model::Estimands<Exact>;
pub type ExactFusionReport = identification::FusionReport<Exact>;
pub type ExactVerdict = propositions::Verdict<Exact>;
pub type ExactReport = propositions::PropositionReport<Exact>;
