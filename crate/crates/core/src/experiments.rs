//! Scenario runners that turn the well-posedness and long-time results into
//! pass/fail checks.
//!
//! Each runner re-verifies the hypotheses it depends on before integrating.
//! A violated hypothesis aborts with [`Error::Hypothesis`]; the CLI turns it
//! into a failing report that names the hypothesis.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::coefficients::{verify_assumptions, AssumptionReport, CoefficientSet, ProbeSpec};
use crate::diagnostics::{decay_fit, nonincreasing, weighted_difference_norm, weighted_norm, Which};
use crate::error::{Error, Result};
use crate::grid::SizeGrid;
use crate::integrator::{run, StepperConfig, Trajectory};
use crate::operators::{truncate_coefficients, Discretization, Parallelism, StateVector, TruncationLevel};

/// Everything a run needs.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub set: CoefficientSet,
    pub grid: Arc<SizeGrid>,
    pub initial: Vec<f64>,
    pub stepper: StepperConfig,
    pub parallelism: Parallelism,
    pub probes: ProbeSpec,
    /// Reported instead of the computed digest, e.g. the digest of the
    /// configuration file the scenario was read from.
    pub digest_override: Option<String>,
}

impl Scenario {
    pub fn new(set: CoefficientSet, grid: SizeGrid, initial: &StateVector, stepper: StepperConfig) -> Result<Self> {
        if initial.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            set,
            grid: Arc::new(grid),
            initial: initial.xi.clone(),
            stepper,
            parallelism: Parallelism::Serial,
            probes: ProbeSpec::default(),
            digest_override: None,
        })
    }

    pub fn with_parallelism(mut self, p: Parallelism) -> Self {
        self.parallelism = p;
        self
    }

    pub fn with_probes(mut self, probes: ProbeSpec) -> Self {
        self.probes = probes;
        self
    }

    /// SHA-256 of the canonical JSON form of the scenario.
    pub fn digest(&self) -> String {
        if let Some(d) = &self.digest_override {
            return d.clone();
        }
        let doc = serde_json::json!({
            "coefficients": self.set,
            "grid": *self.grid,
            "initial": self.initial,
            "stepper": self.stepper,
        });
        let bytes = serde_json::to_vec(&doc).expect("scenario serializes");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn discretization(&self, set: &CoefficientSet) -> Result<Discretization> {
        Ok(Discretization::on(self.grid.clone(), set)?.with_parallelism(self.parallelism))
    }

    pub fn initial_state(&self) -> Result<StateVector> {
        StateVector::on(self.grid.clone(), self.initial.clone())
    }

    /// Runs the untruncated model.
    pub fn run(&self) -> Result<(Discretization, Trajectory)> {
        let disc = self.discretization(&self.set)?;
        let traj = run(&disc, self.initial_state()?, &self.stepper)?;
        Ok((disc, traj))
    }

    pub fn assumptions(&self) -> Result<AssumptionReport> {
        verify_assumptions(&self.set, &self.probes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The run cannot support a verdict (overflow budget exceeded, or a
    /// configuration outside the proven regime).
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub id: String,
    pub config_digest: String,
    pub measured: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub tolerances: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub pass: bool,
    pub runtime_seconds: f64,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    fn new(id: &str, scenario: &Scenario) -> Self {
        Self {
            id: id.into(),
            config_digest: scenario.digest(),
            measured: BTreeMap::new(),
            series: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            verdict: Verdict::Inconclusive,
            pass: false,
            runtime_seconds: 0.0,
            notes: Vec::new(),
        }
    }

    fn measure(&mut self, name: &str, value: f64) {
        self.measured.insert(name.into(), value);
    }

    fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.into(), value);
    }

    fn finish(mut self, verdict: Verdict, started: Instant) -> Self {
        self.verdict = verdict;
        self.pass = verdict == Verdict::Pass;
        self.runtime_seconds = started.elapsed().as_secs_f64();
        self
    }

    /// Failing report for a run whose hypotheses do not hold.
    pub fn hypothesis_failure(id: &str, digest: &str, err: &Error) -> Self {
        Self {
            id: id.into(),
            config_digest: digest.into(),
            measured: BTreeMap::new(),
            series: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            verdict: Verdict::Fail,
            pass: false,
            runtime_seconds: 0.0,
            notes: vec![err.to_string()],
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Hypotheses of the existence theory: either the multiplicative and
/// additive kernel bounds or the factorized sub-quadratic bound, plus the
/// bounds on the remaining coefficients.
fn require_existence(report: &AssumptionReport) -> Result<()> {
    report.require(&[
        "fragment-count",
        "fragment-mass",
        "fragmentation-bound",
        "death-bound",
        "growth-bound",
        "birth-bound",
    ])?;
    if (report.satisfied("kernel-multiplicative") && report.satisfied("kernel-additive"))
        || report.satisfied("kernel-factorized")
    {
        Ok(())
    } else {
        report.require(&["kernel-multiplicative", "kernel-additive"])
    }
}

/// Long-time results assume no fragmentation. Birth must also vanish here:
/// the discrete renewal flux is a genuine number source that would break
/// the monotone decay of the zeroth moment.
fn require_longtime(set: &CoefficientSet, report: &AssumptionReport, extra: &[&str]) -> Result<Vec<String>> {
    report.require(&["kernel-multiplicative", "death-bound", "death-dominated"])?;
    report.require(extra)?;
    if !set.birth.is_zero() {
        return Err(Error::Hypothesis {
            id: "birth-zero".into(),
            detail: "long-time runs require a vanishing birth rate".into(),
        });
    }
    let mut notes = Vec::new();
    if !set.fragmentation.is_zero() {
        notes.push("outside proven regime: fragmentation present".into());
    }
    Ok(notes)
}

/// Runs the truncated problems at each level and compares consecutive final
/// states in the weighted norm. Passes if the differences decrease and the
/// last one, relative to the finest solution, is at most `tolerance`.
pub fn truncation_convergence(
    scenario: &Scenario,
    levels: &[f64],
    growth_floor: bool,
    tolerance: f64,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut report = ExperimentReport::new("truncation_convergence", scenario);
    require_existence(&scenario.assumptions()?)?;
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter {
            name: "levels",
            value: levels.first().copied().unwrap_or(0.0),
            allowed: "strictly increasing truncation levels",
        });
    }
    if let Some(&n) = levels.iter().find(|n| !(**n > 0.0 && **n <= scenario.grid.u_max())) {
        return Err(Error::Parameter {
            name: "levels",
            value: n,
            allowed: "levels in (0, u_max]",
        });
    }
    report.tolerance("final_relative_difference", tolerance);
    report.measure("growth_floor", if growth_floor { 1.0 } else { 0.0 });
    let finals: Vec<StateVector> = levels
        .par_iter()
        .map(|&n| {
            let mut level = TruncationLevel::new(n)?;
            if !growth_floor {
                level = level.without_growth_floor();
            }
            let set = truncate_coefficients(&scenario.set, level)?;
            let disc = scenario.discretization(&set)?;
            let traj = run(&disc, scenario.initial_state()?, &scenario.stepper)?;
            Ok(traj.last().clone())
        })
        .collect::<Result<_>>()?;
    let diffs: Vec<f64> = finals
        .windows(2)
        .map(|w| weighted_difference_norm(&w[0], &w[1]))
        .collect::<Result<_>>()?;
    let scale = finals.last().map(weighted_norm).unwrap_or(0.0);
    let relative: Vec<f64> = diffs.iter().map(|d| if scale > 0.0 { d / scale } else { *d }).collect();
    report.series.insert("levels".into(), levels.to_vec());
    report.series.insert("differences".into(), diffs.clone());
    report.series.insert("relative_differences".into(), relative.clone());
    let monotone = diffs.windows(2).all(|w| w[1] < w[0]);
    let last = relative.last().copied().unwrap_or(0.0);
    report.measure("final_relative_difference", last);
    report.measure("monotone", if monotone { 1.0 } else { 0.0 });
    Ok(report.finish(verdict(monotone && last <= tolerance), started))
}

/// Twin runs from `xi_in` and `(1 + eps) xi_in`. Reports the amplification
/// `rho(t)` of the weighted difference, fits one rate `K` with
/// `rho(t) <= exp(K t)` across all perturbations, and passes if `K` is
/// finite and `rho(t_end)` varies by at most `max_spread` across them.
pub fn stability_experiment(scenario: &Scenario, eps: &[f64], max_spread: f64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut report = ExperimentReport::new("stability", scenario);
    let hyp = scenario.assumptions()?;
    hyp.require(&["kernel-additive", "death-bounded", "kernel-lipschitz"])?;
    if let Some(&e) = eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::Parameter {
            name: "eps",
            value: e,
            allowed: "positive perturbation sizes",
        });
    }
    if eps.is_empty() {
        return Err(Error::Parameter {
            name: "eps",
            value: 0.0,
            allowed: "at least one perturbation size",
        });
    }
    report.tolerance("max_spread", max_spread);
    let disc = scenario.discretization(&scenario.set)?;
    let base_initial = scenario.initial_state()?;
    let base = run(&disc, base_initial.clone(), &scenario.stepper)?;
    let ratios: Vec<Vec<f64>> = eps
        .par_iter()
        .map(|&e| {
            let perturbed = base_initial.scaled(1.0 + e)?;
            let d0 = weighted_difference_norm(&base_initial, &perturbed)?;
            let twin = run(&disc, perturbed, &scenario.stepper)?;
            base.snapshots()
                .iter()
                .zip(twin.snapshots())
                .map(|(a, b)| Ok(weighted_difference_norm(a, b)? / d0))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let times = base.times();
    let mut k_fit = 0.0f64;
    for r in &ratios {
        for (t, rho) in times.iter().zip(r) {
            if *t > 0.0 {
                k_fit = k_fit.max(rho.ln() / t);
            }
        }
    }
    let bounded = ratios.iter().all(|r| {
        times
            .iter()
            .zip(r)
            .all(|(t, rho)| *rho <= (k_fit * t).exp() * (1.0 + 1e-12))
    });
    let finals: Vec<f64> = ratios.iter().map(|r| r[r.len() - 1]).collect();
    let lo = finals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finals.iter().copied().fold(0.0, f64::max);
    let spread = hi / lo;
    report.series.insert("eps".into(), eps.to_vec());
    report.series.insert("rho_final".into(), finals);
    report.series.insert("t".into(), times);
    for (e, r) in eps.iter().zip(&ratios) {
        report.series.insert(format!("rho(eps={e:e})"), r.clone());
    }
    report.measure("k_fit", k_fit);
    report.measure("spread", spread);
    let ok = k_fit.is_finite() && bounded && spread <= max_spread;
    Ok(report.finish(verdict(ok), started))
}

/// Zeroth and first moments must not increase, and `M0(t_end)` must fall
/// to at most `fraction` of `M0(0)`.
pub fn longtime_zeroth(scenario: &Scenario, fraction: f64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut report = ExperimentReport::new("longtime_zeroth", scenario);
    let hyp = scenario.assumptions()?;
    report.notes = require_longtime(&scenario.set, &hyp, &["kernel-lower-bound"])?;
    report.tolerance("final_fraction", fraction);
    report.tolerance("monotone_relative_slack", MONOTONE_SLACK);
    let (_, traj) = scenario.run()?;
    let m0: Vec<f64> = traj.moments().iter().map(|r| r.m0).collect();
    let m1: Vec<f64> = traj.moments().iter().map(|r| r.m1).collect();
    let mono0 = nonincreasing(&m0, MONOTONE_SLACK);
    let mono1 = nonincreasing(&m1, MONOTONE_SLACK);
    let first = m0[0];
    let last = m0[m0.len() - 1];
    let ratio = if first > 0.0 { last / first } else { 0.0 };
    report.measure("m0_initial", first);
    report.measure("m0_final", last);
    report.measure("m0_ratio", ratio);
    report.measure("m0_monotone", f64::from(u8::from(mono0)));
    report.measure("m1_monotone", f64::from(u8::from(mono1)));
    report.series.insert("t".into(), traj.times());
    report.series.insert("m0".into(), m0);
    report.series.insert("m1".into(), m1);
    let ok = mono0 && mono1 && ratio <= fraction;
    let v = if report.notes.is_empty() {
        verdict(ok)
    } else {
        Verdict::Inconclusive
    };
    Ok(report.finish(v, started))
}

/// Relative slack allowed when checking that a moment sequence does not
/// increase; covers roundoff in the moment sums.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Decay of the first moment over the last decade of the run: the fitted
/// log-log slope must lie in `slope_band` and `M1(t) sqrt(t)` may grow by at
/// most `sqrt_growth` over the window.
pub fn longtime_first(scenario: &Scenario, slope_band: (f64, f64), sqrt_growth: f64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut report = ExperimentReport::new("longtime_first", scenario);
    let hyp = scenario.assumptions()?;
    report.notes = require_longtime(&scenario.set, &hyp, &["kernel-power-lower-bound"])?;
    report.tolerance("slope_min", slope_band.0);
    report.tolerance("slope_max", slope_band.1);
    report.tolerance("sqrt_growth", sqrt_growth);
    let (_, traj) = scenario.run()?;
    let t_end = scenario.stepper.t_end;
    let window = (t_end / 10.0, t_end);
    let fit = decay_fit(traj.moments(), Which::M1, window)?;
    let scaled: Vec<(f64, f64)> = traj
        .moments()
        .iter()
        .filter(|r| r.t >= window.0 * (1.0 - 1e-12) && r.t <= window.1)
        .map(|r| (r.t, r.m1 * r.t.sqrt()))
        .collect();
    let start = scaled.first().map(|p| p.1).unwrap_or(0.0);
    let max = scaled.iter().map(|p| p.1).fold(0.0, f64::max);
    let growth = if start > 0.0 { max / start } else { f64::INFINITY };
    report.measure("slope", fit.slope);
    report.measure("prefactor", fit.prefactor);
    report.measure("window_start", window.0);
    report.measure("window_end", window.1);
    report.measure(
        "lambda",
        hyp.constant("kernel-power-lower-bound", "lambda").unwrap_or(f64::NAN),
    );
    report.measure("sqrt_t_m1_max", max);
    report.measure("sqrt_t_m1_growth", growth);
    report.series.insert("t".into(), traj.times());
    report
        .series
        .insert("m1".into(), traj.moments().iter().map(|r| r.m1).collect());
    let in_band = fit.slope >= slope_band.0 && fit.slope <= slope_band.1;
    report.measure("slope_in_band", f64::from(u8::from(in_band)));
    report.measure("slope_below_max", f64::from(u8::from(fit.slope <= slope_band.1)));
    let ok = in_band && growth.is_finite() && growth <= sqrt_growth;
    let v = if report.notes.is_empty() {
        verdict(ok)
    } else {
        Verdict::Inconclusive
    };
    Ok(report.finish(v, started))
}

/// Constant-kernel pure coagulation against
/// `M0(t) = M0(0) / (1 + K M0(0) t / 2)`.
pub fn constant_kernel_benchmark(
    scenario: &Scenario,
    tolerance: f64,
    overflow_budget: f64,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut report = ExperimentReport::new("constant_kernel_benchmark", scenario);
    let set = &scenario.set;
    let k = match set.coagulation {
        crate::coefficients::CoagulationKernel::Constant { value } => value,
        _ => {
            return Err(Error::Hypothesis {
                id: "constant-kernel".into(),
                detail: format!("benchmark needs a constant kernel, got {}", set.coagulation.name()),
            })
        }
    };
    if !(set.growth.is_zero() && set.death.is_zero() && set.birth.is_zero() && set.fragmentation.is_zero()) {
        return Err(Error::Hypothesis {
            id: "pure-coagulation".into(),
            detail: "benchmark needs g = mu = a = alpha = 0".into(),
        });
    }
    report.tolerance("max_relative_error", tolerance);
    report.tolerance("overflow_budget", overflow_budget);
    let (_, traj) = scenario.run()?;
    let m = traj.moments();
    let m00 = m[0].m0;
    let mut worst = 0.0f64;
    let mut exact = Vec::with_capacity(m.len());
    for r in m {
        let e = m00 / (1.0 + k * m00 * r.t / 2.0);
        exact.push(e);
        if e > 0.0 {
            worst = worst.max((r.m0 - e).abs() / e);
        }
    }
    let overflow = m[m.len() - 1].overflow_mass;
    let budget = overflow_budget * m[0].m1;
    report.measure("max_relative_error", worst);
    report.measure("overflow_mass", overflow);
    report.measure("overflow_budget_mass", budget);
    report.measure("cells", scenario.grid.len() as f64);
    report.series.insert("t".into(), traj.times());
    report.series.insert("m0".into(), m.iter().map(|r| r.m0).collect());
    report.series.insert("m0_exact".into(), exact);
    let v = if overflow > budget {
        report.notes.push("overflow budget exceeded; enlarge u_max".into());
        Verdict::Inconclusive
    } else {
        verdict(worst <= tolerance)
    };
    Ok(report.finish(v, started))
}
