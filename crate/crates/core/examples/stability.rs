//! Twin runs from perturbed initial data: amplification of the weighted
//! distance over time.
//!
//! `cargo run --release --example stability`

use gcf::experiments::{stability_experiment, Scenario};
use gcf::prelude::*;

fn main() -> gcf::Result<()> {
    let set = CoefficientSet::default()
        .with_coagulation(CoagulationKernel::constant(1.0)?)
        .with_growth(RateFunction::affine(0.2, 0.1)?)
        .with_death(RateFunction::constant(0.5)?)
        .with_birth(RateFunction::constant(0.3)?);
    let grid = build_grid(20.0, 200, GridScheme::Uniform)?;
    let initial = StateVector::exp_decay(&grid, 1.0, 1.0)?;
    let stepper = StepperConfig::new(2.0).with_output_spacing(0.25)?;
    let r = stability_experiment(&Scenario::new(set, grid, &initial, stepper)?, &[1e-2, 1e-3, 1e-4], 2.0)?;
    let t = &r.series["t"];
    for key in r.series.keys().filter(|k| k.starts_with("rho(")) {
        let line: Vec<String> = t
            .iter()
            .zip(&r.series[key])
            .map(|(t, v)| format!("{t:.2}:{v:.4}"))
            .collect();
        println!("{key:<14} {}", line.join(" "));
    }
    println!(
        "K_fit {:.4}  spread {:.6}  {:?}",
        r.measured["k_fit"], r.measured["spread"], r.verdict
    );
    Ok(())
}
