//! Scenario-level checks: weak form, moment envelopes, hypothesis gating.

use gcf::coefficients::verify_assumptions;
use gcf::diagnostics::{
    second_moment_envelope, weak_form_residual, EnvelopeConstants, SecondMomentBound, TestFunction,
};
use gcf::experiments::{longtime_first, longtime_zeroth, truncation_convergence, Scenario, Verdict};
use gcf::prelude::*;
use gcf::Error;

fn full_model() -> CoefficientSet {
    CoefficientSet::default()
        .with_coagulation(CoagulationKernel::product(0.5).unwrap())
        .with_fragmentation(
            FragmentationRate::new(1.0, 1.0).unwrap(),
            DaughterDistribution::new(0.0).unwrap(),
        )
        .with_growth(RateFunction::affine(0.02, 0.5).unwrap())
        .with_death(RateFunction::affine(0.1, 0.1).unwrap())
        .with_birth(RateFunction::constant(0.5).unwrap())
}

fn weak_residual(cells: usize, theta: TestFunction) -> f64 {
    let grid = build_grid(10.0, cells, GridScheme::Uniform).unwrap();
    let disc = Discretization::new(&grid, &full_model()).unwrap();
    let stepper = StepperConfig::new(1.0).with_output_spacing(0.01).unwrap();
    let traj = run(&disc, StateVector::exp_decay(&grid, 1.0, 1.0).unwrap(), &stepper).unwrap();
    let r = weak_form_residual(&traj, &disc, theta, 1.0).unwrap();
    r.residual / r.lhs.abs().max(1e-300)
}

#[test]
fn weak_form_residual_converges_at_first_order() {
    for theta in [
        TestFunction::ExpDecay { k: 0.5 },
        TestFunction::SmoothBump {
            center: 2.0,
            half_width: 1.5,
        },
        TestFunction::CappedLinear { cap: 3.0 },
    ] {
        let coarse = weak_residual(50, theta);
        let fine = weak_residual(200, theta);
        // First-order transport: 4x refinement should cut the residual by
        // roughly 4x; require at least 3x.
        assert!(fine * 3.0 <= coarse, "{theta:?}: {coarse:e} -> {fine:e}");
    }
}

#[test]
fn weak_form_reports_regularity_class() {
    assert_eq!(TestFunction::CappedLinear { cap: 1.0 }.class(), "lipschitz");
    assert_eq!(TestFunction::ExpDecay { k: 1.0 }.class(), "c1_bounded");
    assert!(TestFunction::ExpDecay { k: -1.0 }.validate().is_err());
}

#[test]
fn second_moment_stays_below_gronwall_bound() {
    let set = full_model();
    let grid = build_grid(10.0, 200, GridScheme::Uniform).unwrap();
    let initial = StateVector::exp_decay(&grid, 1.0, 1.0).unwrap();
    let report = verify_assumptions(&set, &ProbeSpec::default()).unwrap();
    let env = EnvelopeConstants::from_report(&report, &initial).unwrap();
    let m2 = moment(&initial, 2.0).unwrap();
    let bound = SecondMomentBound::new(&report, &env, m2, 1.0).unwrap();
    let disc = Discretization::new(&grid, &set).unwrap();
    let stepper = StepperConfig::new(1.0).with_output_spacing(0.1).unwrap();
    let traj = run(&disc, initial, &stepper).unwrap();
    let check = second_moment_envelope(&traj, &bound, 1.0);
    assert!(check.holds(), "{:?}", check.violations);
    assert!(check.max_ratio < 1.0);
}

#[test]
fn longtime_runs_refuse_positive_birth() {
    let set = CoefficientSet::default()
        .with_coagulation(CoagulationKernel::constant(1.0).unwrap())
        .with_death(RateFunction::affine(1.0, 0.0).unwrap())
        .with_birth(RateFunction::constant(0.1).unwrap());
    let grid = build_grid(20.0, 60, GridScheme::Uniform).unwrap();
    let initial = StateVector::exp_decay(&grid, 1.0, 1.0).unwrap();
    let s = Scenario::new(set, grid, &initial, StepperConfig::new(1.0)).unwrap();
    match longtime_zeroth(&s, 0.1) {
        Err(Error::Hypothesis { id, .. }) => assert_eq!(id, "birth-zero"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn longtime_runs_refuse_growth_beyond_death() {
    let set = CoefficientSet::default()
        .with_coagulation(CoagulationKernel::product(0.75).unwrap())
        .with_growth(RateFunction::affine(2.0, 0.0).unwrap())
        .with_death(RateFunction::affine(1.0, 0.0).unwrap());
    let grid = build_grid(20.0, 60, GridScheme::Uniform).unwrap();
    let initial = StateVector::exp_decay(&grid, 1.0, 1.0).unwrap();
    let s = Scenario::new(set, grid, &initial, StepperConfig::new(1.0)).unwrap();
    match longtime_first(&s, (-0.7, -0.4), 3.0) {
        Err(Error::Hypothesis { id, .. }) => assert_eq!(id, "death-dominated"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn fragmentation_in_longtime_run_is_inconclusive() {
    let set = CoefficientSet::default()
        .with_coagulation(CoagulationKernel::constant(1.0).unwrap())
        .with_fragmentation(
            FragmentationRate::new(0.01, 0.0).unwrap(),
            DaughterDistribution::default(),
        )
        .with_death(RateFunction::affine(1.0, 0.0).unwrap());
    let grid = build_grid(20.0, 60, GridScheme::Uniform).unwrap();
    let initial = StateVector::exp_decay(&grid, 1.0, 1.0).unwrap();
    let stepper = StepperConfig::new(5.0).with_output_spacing(0.5).unwrap();
    let s = Scenario::new(set, grid, &initial, stepper).unwrap();
    let r = longtime_zeroth(&s, 0.5).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(r.notes.iter().any(|n| n.contains("outside proven regime")));
}

#[test]
fn truncation_with_growth_floor_still_converges() {
    let grid = build_grid(40.0, 200, GridScheme::Uniform).unwrap();
    let initial = StateVector::exp_decay(&grid, 1.0, 1.0).unwrap();
    let stepper = StepperConfig::new(1.0).with_output_spacing(0.25).unwrap();
    let s = Scenario::new(full_model(), grid, &initial, stepper).unwrap();
    let r = truncation_convergence(&s, &[5.0, 10.0, 20.0, 40.0], true, 1e-1).unwrap();
    let diffs = &r.series["differences"];
    assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{diffs:?}");
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn scenario_digest_tracks_inputs() {
    let grid = build_grid(10.0, 20, GridScheme::Uniform).unwrap();
    let initial = StateVector::exp_decay(&grid, 1.0, 1.0).unwrap();
    let a = Scenario::new(full_model(), grid.clone(), &initial, StepperConfig::new(1.0)).unwrap();
    let b = Scenario::new(full_model(), grid.clone(), &initial, StepperConfig::new(1.0)).unwrap();
    let c = Scenario::new(full_model(), grid, &initial, StepperConfig::new(2.0)).unwrap();
    assert_eq!(a.digest(), b.digest());
    assert_ne!(a.digest(), c.digest());
}
