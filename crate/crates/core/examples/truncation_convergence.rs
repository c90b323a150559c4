//! Truncated problems at increasing levels converge in the weighted norm.
//!
//! `cargo run --release --example truncation_convergence`

use gcf::experiments::{truncation_convergence, Scenario};
use gcf::prelude::*;

fn main() -> gcf::Result<()> {
    let set = CoefficientSet::default()
        .with_coagulation(CoagulationKernel::product(0.5)?)
        .with_fragmentation(FragmentationRate::new(1.0, 1.0)?, DaughterDistribution::new(0.0)?)
        .with_growth(RateFunction::affine(0.02, 0.5)?)
        .with_death(RateFunction::affine(0.1, 0.1)?)
        .with_birth(RateFunction::constant(0.5)?);
    let grid = build_grid(40.0, 400, GridScheme::Uniform)?;
    let initial = StateVector::exp_decay(&grid, 1.0, 1.0)?;
    let stepper = StepperConfig::new(1.0).with_output_spacing(0.1)?;
    let scenario = Scenario::new(set, grid, &initial, stepper)?;
    for floor in [false, true] {
        let r = truncation_convergence(&scenario, &[5.0, 10.0, 20.0, 40.0], floor, 1e-3)?;
        println!("growth floor {floor}: {:?}", r.verdict);
        for (n, d) in r.series["levels"].iter().skip(1).zip(&r.series["relative_differences"]) {
            println!("  level {n:>4}: relative difference to previous {d:.3e}");
        }
    }
    Ok(())
}
