//! Long-time decay of the zeroth and first moments under death-dominated
//! coagulation: Product(0.75) kernel, `mu(u) = u`, no growth or birth.
//!
//! Run with `cargo run --release --example longtime_decay`.

use gcf::experiments::{longtime_first, longtime_zeroth, Scenario};
use gcf::prelude::*;

fn main() -> gcf::Result<()> {
    let set = CoefficientSet::default()
        .with_coagulation(CoagulationKernel::product(0.75)?)
        .with_death(RateFunction::affine(1.0, 0.0)?);
    let grid = build_grid(100.0, 300, GridScheme::geometric(1.035)?)?;
    let initial = StateVector::exp_decay(&grid, 1.0, 1.0)?;

    let stepper = StepperConfig::new(100.0).with_log_output(1.0, 60)?;
    let scenario = Scenario::new(set.clone(), grid.clone(), &initial, stepper)?;
    let first = longtime_first(&scenario, (-0.7, -0.4), 3.0)?;
    println!("first moment, window [10, 100]");
    for key in ["slope", "prefactor", "lambda", "sqrt_t_m1_growth"] {
        println!("  {key:<18} {:.6}", first.measured[key]);
    }
    println!("  verdict            {:?}", first.verdict);
    let t = &first.series["t"];
    let m1 = &first.series["m1"];
    for (t, m) in t.iter().zip(m1).step_by(6) {
        println!("  t = {t:>9.4}  M1 = {m:.6e}");
    }

    let set0 = CoefficientSet::default()
        .with_coagulation(CoagulationKernel::constant(1.0)?)
        .with_death(RateFunction::affine(1.0, 0.0)?);
    let stepper = StepperConfig::new(20.0).with_output_spacing(0.5)?;
    let scenario = Scenario::new(set0, grid, &initial, stepper)?;
    let zeroth = longtime_zeroth(&scenario, 0.1)?;
    println!("zeroth moment, constant kernel");
    println!("  M0(20)/M0(0)       {:.6e}", zeroth.measured["m0_ratio"]);
    println!("  verdict            {:?}", zeroth.verdict);
    Ok(())
}
