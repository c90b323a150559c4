//! Full model (coagulation, fragmentation, growth, death, renewal): the
//! change of mass is reconstructed from the source terms and the boundary
//! ledger.
//!
//! `cargo run --release --example mass_balance`

use gcf::diagnostics::{ledger_mass_defect, mass_balance_residual};
use gcf::prelude::*;

fn main() -> gcf::Result<()> {
    let set = CoefficientSet::default()
        .with_coagulation(CoagulationKernel::product(0.5)?)
        .with_fragmentation(FragmentationRate::new(1.0, 1.0)?, DaughterDistribution::new(0.0)?)
        .with_growth(RateFunction::affine(0.02, 0.5)?)
        .with_death(RateFunction::affine(0.1, 0.1)?)
        .with_birth(RateFunction::constant(0.5)?);
    let grid = build_grid(10.0, 1000, GridScheme::Uniform)?;
    let disc = Discretization::new(&grid, &set)?;
    let stepper = StepperConfig::new(2.0).with_output_spacing(0.01)?;
    let traj = run(&disc, StateVector::exp_decay(&grid, 1.0, 1.0)?, &stepper)?;

    for r in traj.moments().iter().step_by(50) {
        println!("t = {:4.2}  M0 = {:.6}  M1 = {:.6}  M2 = {:.6}", r.t, r.m0, r.m1, r.m2);
    }
    let mb = mass_balance_residual(&traj, &disc, 0.0, 2.0)?;
    let ledger = &traj.last().ledger;
    println!("mass-balance residual / M1(0) = {:.3e}", mb.relative);
    println!("ledger defect                 = {:.3e}", ledger_mass_defect(&traj));
    println!("renewal mass artifact         = {:.3e}", ledger.renewal_mass);
    println!("overflow mass                 = {:.3e}", ledger.overflow_mass);
    println!("steps {} (rejected {})", traj.steps, traj.rejected_steps);
    Ok(())
}
