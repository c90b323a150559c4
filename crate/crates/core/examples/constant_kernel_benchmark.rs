//! Pure coagulation with a constant kernel against the closed form
//! `M0(t) = M0(0) / (1 + M0(0) t / 2)`.
//!
//! `cargo run --release --example constant_kernel_benchmark`

use gcf::experiments::{constant_kernel_benchmark, Scenario};
use gcf::prelude::*;

fn main() -> gcf::Result<()> {
    let set = CoefficientSet::default().with_coagulation(CoagulationKernel::constant(1.0)?);
    let grid = build_grid(50.0, 300, GridScheme::geometric(1.035)?)?;
    let initial = StateVector::exp_decay(&grid, 1.0, 1.0)?;
    let stepper = StepperConfig::new(10.0).with_output_spacing(1.0)?;
    let scenario = Scenario::new(set, grid, &initial, stepper)?;
    let report = constant_kernel_benchmark(&scenario, 0.01, 0.01)?;

    println!("{:>6} {:>14} {:>14}", "t", "M0", "exact");
    let s = &report.series;
    for ((t, m), e) in s["t"].iter().zip(&s["m0"]).zip(&s["m0_exact"]) {
        println!("{t:>6.2} {m:>14.8} {e:>14.8}");
    }
    println!("max relative error {:.3e}", report.measured["max_relative_error"]);
    println!("overflow mass      {:.3e}", report.measured["overflow_mass"]);
    println!("verdict            {:?}", report.verdict);
    Ok(())
}
