//! Hypothesis report for each coagulation kernel in the catalogue.
//!
//! Prints which bounds hold and the fitted constants that feed the moment
//! envelopes. `cargo run --example check_kernels`

use gcf::prelude::*;

fn main() -> gcf::Result<()> {
    let kernels = [
        CoagulationKernel::LinearShear,
        CoagulationKernel::NonlinearShear,
        CoagulationKernel::Gravitational,
        CoagulationKernel::modified_smoluchowski(1.0)?,
        CoagulationKernel::activated_sludge(1.5, 2.0)?,
        CoagulationKernel::product(0.5)?,
        CoagulationKernel::product(0.75)?,
        CoagulationKernel::constant(1.0)?,
    ];
    let probes = ProbeSpec::default();
    for k in kernels {
        let set = CoefficientSet::default()
            .with_coagulation(k.clone())
            .with_death(RateFunction::affine(1.0, 0.0)?);
        let report = verify_assumptions(&set, &probes)?;
        let status: Vec<String> = [
            "kernel-multiplicative",
            "kernel-additive",
            "kernel-factorized",
            "kernel-lower-bound",
            "kernel-power-lower-bound",
        ]
        .iter()
        .map(|id| format!("{id}:{}", if report.satisfied(id) { "ok" } else { "--" }))
        .collect();
        let y0 = report
            .constant("kernel-multiplicative", "Y0")
            .map_or("-".into(), |v| format!("{v:.3}"));
        let lambda = report
            .constant("kernel-power-lower-bound", "lambda")
            .map_or("-".into(), |v| format!("{v:.2}"));
        println!("{:<32} {}  Y0={y0} lambda={lambda}", k.name(), status.join(" "));
    }
    Ok(())
}
