//! Weak-form residual for three test functions on refining grids.
//!
//! `cargo run --release --example weak_form`

use gcf::diagnostics::{weak_form_residual, TestFunction};
use gcf::prelude::*;

fn main() -> gcf::Result<()> {
    let set = CoefficientSet::default()
        .with_coagulation(CoagulationKernel::product(0.5)?)
        .with_fragmentation(FragmentationRate::new(1.0, 1.0)?, DaughterDistribution::new(-0.5)?)
        .with_growth(RateFunction::affine(0.02, 0.5)?)
        .with_death(RateFunction::affine(0.1, 0.1)?)
        .with_birth(RateFunction::constant(0.5)?);
    let thetas = [
        TestFunction::ExpDecay { k: 0.5 },
        TestFunction::SmoothBump {
            center: 2.0,
            half_width: 1.5,
        },
        TestFunction::CappedLinear { cap: 3.0 },
    ];
    for cells in [50, 100, 200, 400] {
        let grid = build_grid(10.0, cells, GridScheme::Uniform)?;
        let disc = Discretization::new(&grid, &set)?;
        let stepper = StepperConfig::new(1.0).with_output_spacing(0.01)?;
        let traj = run(&disc, StateVector::exp_decay(&grid, 1.0, 1.0)?, &stepper)?;
        let row: Vec<String> = thetas
            .iter()
            .map(|th| {
                weak_form_residual(&traj, &disc, *th, 1.0)
                    .map(|r| format!("{}={:.3e}", r.class, r.residual / r.lhs.abs()))
            })
            .collect::<gcf::Result<_>>()?;
        println!("N = {cells:>4}  {}", row.join("  "));
    }
    Ok(())
}
