use harmbounds::bounds::{
    ate_bounds, benefit_bounds, cate_bounds, conditional_benefit_bounds, conditional_harm_bounds,
    harm_bounds, is_point_identified, EvidenceSet, Interval,
};
use harmbounds::identification::{compatibility_check, identify_cate};
use harmbounds::lp::{sharp_interval, sharp_intervals, Target};
use harmbounds::model::{
    degenerate_family, degenerate_grid, observables_from_joint, sample_joint, true_estimands,
    Degeneracy, FamilyParams, JointDistribution,
};
use harmbounds::{Arm, Exact, Scalar};
use proptest::prelude::*;

type Q = Exact;

fn q(n: i64, d: i64) -> Q {
    Q::ratio(n, d)
}

fn levels(joint: &JointDistribution<Q>) -> (EvidenceSet<Q>, EvidenceSet<Q>) {
    let (p0, p1) = observables_from_joint(joint);
    (EvidenceSet::experimental(p0.clone()), EvidenceSet::fused(p0, p1))
}

fn assert_matches_oracle(joint: &JointDistribution<Q>) {
    let (exp, fused) = levels(joint);
    assert_eq!(harm_bounds(&exp).unwrap(), sharp_interval(&exp, Target::Harm).unwrap());
    assert_eq!(benefit_bounds(&exp).unwrap(), sharp_interval(&exp, Target::Benefit).unwrap());

    let p1 = fused.p1.as_ref().unwrap();
    let mut targets = vec![Target::Harm, Target::Benefit];
    for s in Arm::BOTH {
        if !p1.is_null(s) {
            targets.extend([Target::HarmGiven(s), Target::BenefitGiven(s)]);
        }
    }
    let oracle = sharp_intervals(&fused, &targets).unwrap();
    for (target, expected) in targets.iter().zip(oracle) {
        let got = match *target {
            Target::Harm => harm_bounds(&fused),
            Target::Benefit => benefit_bounds(&fused),
            Target::HarmGiven(s) => conditional_harm_bounds(&fused, s),
            Target::BenefitGiven(s) => conditional_benefit_bounds(&fused, s),
        }
        .unwrap();
        assert_eq!(got, expected, "{target:?} on {joint:?}");
    }
}

#[test]
fn closed_forms_equal_oracle_on_samples() {
    for seed in 0..1500 {
        assert_matches_oracle(&sample_joint(seed));
    }
}

#[test]
fn closed_forms_equal_oracle_on_degenerate_grid() {
    for joint in degenerate_grid::<Q>() {
        assert_matches_oracle(&joint);
    }
}

#[test]
fn experimental_closed_form_on_parameter_grid() {
    // Every pair of risks on a 1/12 grid, including the boundary.
    for a in 0..=12 {
        for b in 0..=12 {
            let (p_do1, p_do0) = (q(a, 12), q(b, 12));
            let ev = EvidenceSet::experimental(
                harmbounds::model::ExperimentalParams::new(p_do1.clone(), p_do0.clone()).unwrap(),
            );
            let expected = Interval::new(
                (p_do1.clone() - p_do0.clone()).max_with(q(0, 1)),
                p_do1.clone().min_with(q(1, 1) - p_do0.clone()),
            )
            .unwrap();
            assert_eq!(harm_bounds(&ev).unwrap(), expected);
            assert_eq!(sharp_interval(&ev, Target::Harm).unwrap(), expected);
        }
    }
}

#[test]
fn generic_family_is_not_point_identified() {
    let joint = degenerate_family(
        Degeneracy::None,
        &FamilyParams {
            pi1: q(1, 2),
            free: vec![q(1, 3), q(1, 2), q(1, 4), q(2, 5)],
        },
    )
    .unwrap();
    let (exp, fused) = levels(&joint);
    assert!(!is_point_identified(&harm_bounds(&exp).unwrap()));
    assert!(!is_point_identified(&harm_bounds(&fused).unwrap()));
}

fn check_invariants(joint: &JointDistribution<Q>) {
    let truth = true_estimands(joint);
    let (exp, fused) = levels(joint);
    let p1 = fused.p1.clone().unwrap();
    let pi1 = p1.pi1.value().clone();

    // Estimand identities.
    assert_eq!(truth.p_harm.clone() - truth.p_benefit.clone(), truth.ate);
    if let (Some(c0), Some(c1)) = (truth.cate(Arm::Untreated), truth.cate(Arm::Treated)) {
        assert_eq!(pi1.clone() * c1.clone() + (q(1, 1) - pi1.clone()) * c0.clone(), truth.ate);
    }

    // Compatibility of derived observables.
    assert!(compatibility_check(&exp.p0, &p1).compatible);

    for ev in [&exp, &fused] {
        let harm = harm_bounds(ev).unwrap();
        let benefit = benefit_bounds(ev).unwrap();
        assert!(harm.contains(&truth.p_harm));
        assert!(benefit.contains(&truth.p_benefit));
        assert!(ate_bounds(ev).unwrap().contains(&truth.ate));
        // Identity between harm, benefit and ATE bounds.
        assert!(harm.lower().clone() - benefit.upper().clone() <= truth.ate);
        assert!(truth.ate <= harm.upper().clone() - benefit.lower().clone());
        // Label-swap duality.
        assert_eq!(benefit, harm_bounds(&ev.swap_arms()).unwrap());
    }

    // Monotonicity in evidence.
    assert!(harm_bounds(&fused).unwrap().is_subset_of(&harm_bounds(&exp).unwrap()));
    assert!(benefit_bounds(&fused).unwrap().is_subset_of(&benefit_bounds(&exp).unwrap()));

    let fused_harm = harm_bounds(&fused).unwrap();
    if is_point_identified(&fused_harm) {
        let fused_benefit = benefit_bounds(&fused).unwrap();
        assert!(is_point_identified(&fused_benefit));
        assert_eq!(fused_harm.lower().clone() - fused_benefit.lower().clone(), truth.ate);
    }

    let swapped = fused.swap_arms();
    for s in Arm::BOTH {
        if p1.is_null(s) {
            assert!(truth.cate(s).is_none());
            continue;
        }
        let cate = identify_cate(&fused.p0, &p1, s).unwrap();
        assert_eq!(Some(&cate), truth.cate(s));
        assert_eq!(cate_bounds(&fused, s).unwrap(), Interval::point(cate));
        assert!(conditional_harm_bounds(&fused, s).unwrap().contains(truth.harm_given(s).unwrap()));
        assert!(conditional_benefit_bounds(&fused, s)
            .unwrap()
            .contains(truth.benefit_given(s).unwrap()));
        assert_eq!(
            conditional_benefit_bounds(&fused, s).unwrap(),
            conditional_harm_bounds(&swapped, s.other()).unwrap()
        );
    }

    // Convex recomposition of identified effects.
    if !p1.is_null(Arm::Treated) && !p1.is_null(Arm::Untreated) {
        let c1 = identify_cate(&fused.p0, &p1, Arm::Treated).unwrap();
        let c0 = identify_cate(&fused.p0, &p1, Arm::Untreated).unwrap();
        assert_eq!(pi1.clone() * c1 + (q(1, 1) - pi1) * c0, fused.p0.ate());
    }
}

#[test]
fn invariants_on_degenerate_grid() {
    for joint in degenerate_grid::<Q>() {
        check_invariants(&joint);
    }
}

fn arb_joint() -> impl Strategy<Value = JointDistribution<Q>> {
    prop::array::uniform8(0u32..40).prop_filter_map("nonzero total", |counts| {
        let total: u32 = counts.iter().sum();
        (total > 0).then(|| {
            JointDistribution::new(counts.map(|c| q(i64::from(c), i64::from(total)))).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn invariants_hold(joint in arb_joint()) {
        check_invariants(&joint);
    }

    #[test]
    fn sampled_joints_are_valid(seed in any::<u64>()) {
        let joint = sample_joint::<Q>(seed);
        prop_assert!(JointDistribution::new(joint.atoms().clone()).is_ok());
    }

    #[test]
    fn violating_pairs_are_infeasible(
        d1 in 0i64..=20, d0 in 0i64..=20, pi in 1i64..=19, q1 in 0i64..=20, q0 in 0i64..=20,
    ) {
        let ev = EvidenceSet::fused(
            harmbounds::model::ExperimentalParams::new(q(d1, 20), q(d0, 20)).unwrap(),
            harmbounds::model::ObservationalParams::new(q(pi, 20), Some(q(q1, 20)), Some(q(q0, 20))).unwrap(),
        );
        let report = compatibility_check(&ev.p0, ev.p1.as_ref().unwrap());
        let oracle = sharp_interval(&ev, Target::Harm);
        prop_assert_eq!(report.compatible, oracle.is_ok());
        let cross_in_range = report.cross_risks.iter().flatten().all(|r| {
            !r.is_strictly_negative() && !(r.clone() - q(1, 1)).is_strictly_positive()
        });
        prop_assert_eq!(report.compatible, cross_in_range);
    }
}
