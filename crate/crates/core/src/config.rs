//! JSON run configuration.
//!
//! The document is walked by hand rather than deserialized so that every
//! problem is reported at once, each with its JSON path and allowed range,
//! and unknown keys are rejected.
//!
//! ```json
//! {
//!   "coagulation": {"kind": "product", "params": {"omega": 0.5}},
//!   "fragmentation": {"kind": "power_law", "params": {"l0": 1, "l1": 1}},
//!   "daughter": {"kind": "power_law", "params": {"nu": 0}},
//!   "growth": {"kind": "affine", "params": {"slope": 0.02, "intercept": 0.5}},
//!   "death": {"kind": "affine", "params": {"slope": 0.1, "intercept": 0.1}},
//!   "birth": {"kind": "constant", "params": {"value": 0.5}},
//!   "grid": {"u_max": 10, "cells": 1000, "scheme": "uniform"},
//!   "initial": {"kind": "exp_decay", "params": {"amplitude": 1, "scale": 1}},
//!   "stepper": {"t_end": 2, "output_spacing": 0.01}
//! }
//! ```

use std::path::PathBuf;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::coefficients::{
    CoagulationKernel, CoefficientSet, DaughterDistribution, FragmentationRate, ProbeSpec, RateFunction, SampledKernel,
};
use crate::error::{Error, Result};
use crate::experiments::Scenario;
use crate::grid::{build_grid, GridScheme, SizeGrid};
use crate::integrator::{Method, StepperConfig};
use crate::operators::{truncate_coefficients, Parallelism, StateVector, TruncationLevel};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `amplitude * exp(-u / scale)`, as exact cell averages.
    ExpDecay {
        amplitude: f64,
        scale: f64,
    },
    Monodisperse {
        cell: usize,
        density: f64,
    },
    Table {
        u: Vec<f64>,
        xi: Vec<f64>,
    },
}

impl InitialData {
    pub fn build(&self, grid: &SizeGrid) -> Result<StateVector> {
        match self {
            Self::ExpDecay { amplitude, scale } => StateVector::exp_decay(grid, *amplitude, *scale),
            Self::Monodisperse { cell, density } => StateVector::monodisperse(grid, *cell, *density),
            Self::Table { u, xi } => StateVector::from_table(grid, u, xi),
        }
    }
}

/// Parameters of the experiment runners; each has a documented default.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings {
    pub levels: Vec<f64>,
    pub growth_floor: bool,
    pub convergence_tolerance: f64,
    pub eps: Vec<f64>,
    pub max_spread: f64,
    pub zeroth_fraction: f64,
    pub slope_band: (f64, f64),
    pub sqrt_growth: f64,
    pub benchmark_tolerance: f64,
    pub overflow_budget: f64,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            levels: vec![5.0, 10.0, 20.0, 40.0],
            growth_floor: true,
            convergence_tolerance: 1e-3,
            eps: vec![1e-2, 1e-3, 1e-4],
            max_spread: 2.0,
            zeroth_fraction: 0.1,
            slope_band: (-0.7, -0.4),
            sqrt_growth: 3.0,
            benchmark_tolerance: 0.01,
            overflow_budget: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub set: CoefficientSet,
    pub grid: SizeGrid,
    pub initial: InitialData,
    pub stepper: StepperConfig,
    pub truncation: Option<TruncationLevel>,
    pub experiment: ExperimentSettings,
    pub probes: ProbeSpec,
    pub output_dir: PathBuf,
    /// Reserved; the solver is deterministic.
    pub seed: u64,
    pub parallelism: Parallelism,
    /// SHA-256 of the compact, key-sorted input document.
    pub digest: String,
}

impl RunConfig {
    /// The scenario with the optional truncation applied.
    pub fn scenario(&self) -> Result<Scenario> {
        let set = match self.truncation {
            Some(level) => truncate_coefficients(&self.set, level)?,
            None => self.set.clone(),
        };
        let initial = self.initial.build(&self.grid)?;
        let mut s = Scenario::new(set, self.grid.clone(), &initial, self.stepper.clone())?
            .with_parallelism(self.parallelism)
            .with_probes(self.probes.clone());
        s.digest_override = Some(self.digest.clone());
        Ok(s)
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::ConfigParse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let digest: String = Sha256::digest(serde_json::to_vec(&doc)?)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    let mut v = Validator::default();
    let Some(root) = v.object(&doc, "$") else {
        return Err(Error::ConfigInvalid(v.errors));
    };
    v.known(
        root,
        "$",
        &[
            "coagulation",
            "fragmentation",
            "daughter",
            "growth",
            "death",
            "birth",
            "grid",
            "initial",
            "stepper",
            "truncation",
            "experiment",
            "probes",
            "output_dir",
            "seed",
            "parallel",
        ],
    );

    let coagulation = match root.get("coagulation") {
        Some(node) => v.kernel(node, "$.coagulation"),
        None => Some(CoagulationKernel::Constant { value: 0.0 }),
    };
    let fragmentation = match root.get("fragmentation") {
        Some(node) => v.fragmentation(node, "$.fragmentation"),
        None => Some(FragmentationRate::default()),
    };
    let daughter = match root.get("daughter") {
        Some(node) => v.daughter(node, "$.daughter"),
        None => Some(DaughterDistribution::default()),
    };
    let mut rate = |key: &str| match root.get(key) {
        Some(node) => v.rate(node, &format!("$.{key}")),
        None => Some(RateFunction::zero()),
    };
    let growth = rate("growth");
    let death = rate("death");
    let birth = rate("birth");

    let grid = match root.get("grid") {
        Some(node) => v.grid(node, "$.grid"),
        None => {
            v.error("$.grid", "is required (no default grid size)");
            None
        }
    };
    let initial = match root.get("initial") {
        Some(node) => v.initial(node, "$.initial"),
        None => Some(InitialData::ExpDecay {
            amplitude: 1.0,
            scale: 1.0,
        }),
    };
    let stepper = match root.get("stepper") {
        Some(node) => v.stepper(node, "$.stepper"),
        None => StepperConfig::new(1.0).with_output_spacing(0.1).ok(),
    };
    let truncation = root.get("truncation").and_then(|n| v.truncation(n, "$.truncation"));
    let experiment = match root.get("experiment") {
        Some(node) => v.experiment(node, "$.experiment"),
        None => Some(ExperimentSettings::default()),
    };
    let probes = match root.get("probes") {
        Some(node) => v.probes(node, "$.probes"),
        None => Some(ProbeSpec::default()),
    };
    let output_dir = match root.get("output_dir") {
        Some(Value::String(s)) => PathBuf::from(s),
        Some(_) => {
            v.error("$.output_dir", "must be a string");
            PathBuf::new()
        }
        None => PathBuf::from("out"),
    };
    let seed = match root.get("seed") {
        Some(n) => n.as_u64().unwrap_or_else(|| {
            v.error("$.seed", "must be a nonnegative integer");
            0
        }),
        None => 0,
    };
    let parallel = v.boolean(root, "$", "parallel", false);

    if let (Some(g), Some(InitialData::Monodisperse { cell, .. })) = (&grid, &initial) {
        if *cell >= g.len() {
            v.error(
                "$.initial.params.cell",
                &format!("= {cell} out of range [0, {})", g.len()),
            );
        }
    }

    if !v.errors.is_empty() {
        return Err(Error::ConfigInvalid(v.errors));
    }
    let set = CoefficientSet {
        coagulation: coagulation.unwrap(),
        fragmentation: fragmentation.unwrap(),
        daughter: daughter.unwrap(),
        growth: growth.unwrap(),
        death: death.unwrap(),
        birth: birth.unwrap(),
    };
    Ok(RunConfig {
        set,
        grid: grid.unwrap(),
        initial: initial.unwrap(),
        stepper: stepper.unwrap(),
        truncation,
        experiment: experiment.unwrap(),
        probes: probes.unwrap(),
        output_dir,
        seed,
        parallelism: if parallel {
            Parallelism::Rayon
        } else {
            Parallelism::Serial
        },
        digest,
    })
}

#[derive(Default)]
struct Validator {
    errors: Vec<String>,
}

type Check = fn(f64) -> bool;

impl Validator {
    fn error(&mut self, path: &str, msg: &str) {
        self.errors.push(format!("{path}: {msg}"));
    }

    fn object<'a>(&mut self, node: &'a Value, path: &str) -> Option<&'a Map<String, Value>> {
        match node.as_object() {
            Some(m) => Some(m),
            None => {
                self.error(path, "must be an object");
                None
            }
        }
    }

    fn known(&mut self, obj: &Map<String, Value>, path: &str, keys: &[&str]) {
        for k in obj.keys() {
            if !keys.contains(&k.as_str()) {
                self.error(
                    &format!("{path}.{k}"),
                    &format!("unknown key (allowed: {})", keys.join(", ")),
                );
            }
        }
    }

    /// A number under `key`; `default` of `None` makes it required.
    fn number(
        &mut self,
        obj: &Map<String, Value>,
        path: &str,
        key: &str,
        default: Option<f64>,
        ok: Check,
        allowed: &str,
    ) -> Option<f64> {
        let p = format!("{path}.{key}");
        match obj.get(key) {
            None => {
                if default.is_none() {
                    self.error(&p, &format!("is required, allowed {allowed}"));
                }
                default
            }
            Some(n) => match n.as_f64() {
                Some(x) if ok(x) && x.is_finite() => Some(x),
                Some(x) => {
                    self.error(&p, &format!("= {x} out of range, allowed {allowed}"));
                    None
                }
                None => {
                    self.error(&p, &format!("must be a number, allowed {allowed}"));
                    None
                }
            },
        }
    }

    fn integer(
        &mut self,
        obj: &Map<String, Value>,
        path: &str,
        key: &str,
        default: Option<u64>,
        min: u64,
    ) -> Option<u64> {
        let p = format!("{path}.{key}");
        match obj.get(key) {
            None => {
                if default.is_none() {
                    self.error(&p, &format!("is required, allowed integer >= {min}"));
                }
                default
            }
            Some(n) => match n.as_u64() {
                Some(x) if x >= min => Some(x),
                _ => {
                    self.error(&p, &format!("= {n} out of range, allowed integer >= {min}"));
                    None
                }
            },
        }
    }

    fn boolean(&mut self, obj: &Map<String, Value>, path: &str, key: &str, default: bool) -> bool {
        match obj.get(key) {
            None => default,
            Some(Value::Bool(b)) => *b,
            Some(_) => {
                self.error(&format!("{path}.{key}"), "must be true or false");
                default
            }
        }
    }

    fn numbers(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<Vec<f64>> {
        let p = format!("{path}.{key}");
        let Some(node) = obj.get(key) else {
            self.error(&p, "is required");
            return None;
        };
        let Some(arr) = node.as_array() else {
            self.error(&p, "must be an array of numbers");
            return None;
        };
        let mut out = Vec::with_capacity(arr.len());
        for (i, x) in arr.iter().enumerate() {
            match x.as_f64() {
                Some(f) if f.is_finite() => out.push(f),
                _ => {
                    self.error(&format!("{p}[{i}]"), "must be a finite number");
                    return None;
                }
            }
        }
        Some(out)
    }

    /// Splits `{"kind": ..., "params": {...}}`; missing params means `{}`.
    fn tagged<'a>(&mut self, node: &'a Value, path: &str) -> Option<(&'a str, Map<String, Value>)> {
        let obj = self.object(node, path)?;
        self.known(obj, path, &["kind", "params"]);
        let kind = match obj.get("kind").and_then(Value::as_str) {
            Some(k) => k,
            None => {
                self.error(&format!("{path}.kind"), "is required and must be a string");
                return None;
            }
        };
        let params = match obj.get("params") {
            None => Map::new(),
            Some(Value::Object(m)) => m.clone(),
            Some(_) => {
                self.error(&format!("{path}.params"), "must be an object");
                return None;
            }
        };
        Some((kind, params))
    }

    fn kernel(&mut self, node: &Value, path: &str) -> Option<CoagulationKernel> {
        let (kind, p) = self.tagged(node, path)?;
        let pp = format!("{path}.params");
        let pp = pp.as_str();
        let kinds = [
            "linear_shear",
            "nonlinear_shear",
            "gravitational",
            "modified_smoluchowski",
            "activated_sludge",
            "product",
            "constant",
            "table",
        ];
        match kind {
            "linear_shear" | "nonlinear_shear" | "gravitational" => {
                self.known(&p, pp, &[]);
                Some(match kind {
                    "linear_shear" => CoagulationKernel::LinearShear,
                    "nonlinear_shear" => CoagulationKernel::NonlinearShear,
                    _ => CoagulationKernel::Gravitational,
                })
            }
            "modified_smoluchowski" => {
                self.known(&p, pp, &["c"]);
                let c = self.number(&p, pp, "c", None, |c| c > 0.0, "(0, inf)")?;
                Some(CoagulationKernel::ModifiedSmoluchowski { c })
            }
            "activated_sludge" => {
                self.known(&p, pp, &["q", "u_c"]);
                let q = self.number(&p, pp, "q", None, |q| (0.0..3.0).contains(&q), "[0, 3)");
                let u_c = self.number(&p, pp, "u_c", None, |u| u > 0.0, "(0, inf)");
                Some(CoagulationKernel::ActivatedSludge { q: q?, u_c: u_c? })
            }
            "product" => {
                self.known(&p, pp, &["omega"]);
                let omega = self.number(&p, pp, "omega", None, |w| (0.0..1.0).contains(&w), "[0, 1)")?;
                Some(CoagulationKernel::Product { omega })
            }
            "constant" => {
                self.known(&p, pp, &["value"]);
                let value = self.number(&p, pp, "value", None, |v| v >= 0.0, "[0, inf)")?;
                Some(CoagulationKernel::Constant { value })
            }
            "table" => {
                self.known(&p, pp, &["sizes", "values"]);
                let sizes = self.numbers(&p, pp, "sizes")?;
                let rows = match p.get("values").and_then(Value::as_array) {
                    Some(r) => r,
                    None => {
                        self.error(&format!("{pp}.values"), "must be a square array of arrays");
                        return None;
                    }
                };
                let mut values = Vec::new();
                for (i, row) in rows.iter().enumerate() {
                    match row.as_array() {
                        Some(r) if r.len() == sizes.len() => {
                            values.extend(r.iter().map(|x| x.as_f64().unwrap_or(f64::NAN)))
                        }
                        _ => {
                            self.error(
                                &format!("{pp}.values[{i}]"),
                                &format!("must have {} numbers", sizes.len()),
                            );
                            return None;
                        }
                    }
                }
                match SampledKernel::new(sizes, values) {
                    Ok(t) => Some(CoagulationKernel::Sampled(t)),
                    Err(e) => {
                        self.error(pp, &e.to_string());
                        None
                    }
                }
            }
            other => {
                self.error(
                    &format!("{path}.kind"),
                    &format!("unknown kind `{other}` (allowed: {})", kinds.join(", ")),
                );
                None
            }
        }
    }

    fn fragmentation(&mut self, node: &Value, path: &str) -> Option<FragmentationRate> {
        let (kind, p) = self.tagged(node, path)?;
        let pp = format!("{path}.params");
        match kind {
            "none" => {
                self.known(&p, &pp, &[]);
                Some(FragmentationRate::default())
            }
            "power_law" => {
                self.known(&p, &pp, &["l0", "l1"]);
                let l0 = self.number(&p, &pp, "l0", None, |x| x >= 0.0, "[0, inf)");
                let l1 = self.number(&p, &pp, "l1", None, |x| (0.0..=1.0).contains(&x), "[0, 1]");
                Some(FragmentationRate {
                    l0: l0?,
                    l1: l1?,
                    cutoff: None,
                })
            }
            other => {
                self.error(
                    &format!("{path}.kind"),
                    &format!("unknown kind `{other}` (allowed: none, power_law)"),
                );
                None
            }
        }
    }

    fn daughter(&mut self, node: &Value, path: &str) -> Option<DaughterDistribution> {
        let (kind, p) = self.tagged(node, path)?;
        let pp = format!("{path}.params");
        if kind != "power_law" {
            self.error(
                &format!("{path}.kind"),
                &format!("unknown kind `{kind}` (allowed: power_law)"),
            );
            return None;
        }
        self.known(&p, &pp, &["nu"]);
        let nu = self.number(&p, &pp, "nu", Some(0.0), |x| x > -1.0 && x <= 0.0, "(-1, 0]")?;
        Some(DaughterDistribution { nu })
    }

    fn rate(&mut self, node: &Value, path: &str) -> Option<RateFunction> {
        let (kind, p) = self.tagged(node, path)?;
        let pp = format!("{path}.params");
        let pp = pp.as_str();
        match kind {
            "zero" => {
                self.known(&p, pp, &[]);
                Some(RateFunction::zero())
            }
            "affine" => {
                self.known(&p, pp, &["slope", "intercept"]);
                let slope = self.number(&p, pp, "slope", Some(0.0), |x| x >= 0.0, "[0, inf)");
                let intercept = self.number(&p, pp, "intercept", Some(0.0), |x| x >= 0.0, "[0, inf)");
                Some(RateFunction::Affine {
                    slope: slope?,
                    intercept: intercept?,
                })
            }
            "power_law" => {
                self.known(&p, pp, &["coef", "exponent"]);
                let coef = self.number(&p, pp, "coef", None, |x| x >= 0.0, "[0, inf)");
                let exponent = self.number(&p, pp, "exponent", None, |x| (0.0..=1.0).contains(&x), "[0, 1]");
                Some(RateFunction::PowerLaw {
                    coef: coef?,
                    exponent: exponent?,
                })
            }
            "constant" => {
                self.known(&p, pp, &["value"]);
                let value = self.number(&p, pp, "value", None, |x| x >= 0.0, "[0, inf)")?;
                Some(RateFunction::Constant { value })
            }
            "table" => {
                self.known(&p, pp, &["u", "values"]);
                let u = self.numbers(&p, pp, "u");
                let values = self.numbers(&p, pp, "values");
                match RateFunction::table(u?, values?) {
                    Ok(f) => Some(f),
                    Err(e) => {
                        self.error(pp, &e.to_string());
                        None
                    }
                }
            }
            other => {
                self.error(
                    &format!("{path}.kind"),
                    &format!("unknown kind `{other}` (allowed: zero, affine, power_law, constant, table)"),
                );
                None
            }
        }
    }

    fn grid(&mut self, node: &Value, path: &str) -> Option<SizeGrid> {
        let obj = self.object(node, path)?;
        self.known(obj, path, &["u_max", "cells", "scheme", "ratio"]);
        let u_max = self.number(obj, path, "u_max", None, |x| x > 0.0, "(0, inf)");
        let cells = self.integer(obj, path, "cells", None, 2);
        let scheme = match obj.get("scheme").map(|s| s.as_str()) {
            None | Some(Some("geometric")) => {
                let default = 2f64.powf(1.0 / 3.0);
                self.number(obj, path, "ratio", Some(default), |r| r > 1.0, "(1, inf)")
                    .map(|ratio| GridScheme::Geometric { ratio })
            }
            Some(Some("uniform")) => {
                if obj.contains_key("ratio") {
                    self.error(&format!("{path}.ratio"), "only applies to the geometric scheme");
                }
                Some(GridScheme::Uniform)
            }
            _ => {
                self.error(&format!("{path}.scheme"), "must be \"uniform\" or \"geometric\"");
                None
            }
        };
        match build_grid(u_max?, cells? as usize, scheme?) {
            Ok(g) => Some(g),
            Err(e) => {
                self.error(path, &e.to_string());
                None
            }
        }
    }

    fn initial(&mut self, node: &Value, path: &str) -> Option<InitialData> {
        let (kind, p) = self.tagged(node, path)?;
        let pp = format!("{path}.params");
        let pp = pp.as_str();
        match kind {
            "exp_decay" => {
                self.known(&p, pp, &["amplitude", "scale"]);
                let amplitude = self.number(&p, pp, "amplitude", Some(1.0), |x| x >= 0.0, "[0, inf)");
                let scale = self.number(&p, pp, "scale", Some(1.0), |x| x > 0.0, "(0, inf)");
                Some(InitialData::ExpDecay {
                    amplitude: amplitude?,
                    scale: scale?,
                })
            }
            "monodisperse" => {
                self.known(&p, pp, &["cell", "density"]);
                let cell = self.integer(&p, pp, "cell", None, 0);
                let density = self.number(&p, pp, "density", None, |x| x >= 0.0, "[0, inf)");
                Some(InitialData::Monodisperse {
                    cell: cell? as usize,
                    density: density?,
                })
            }
            "table" => {
                self.known(&p, pp, &["u", "xi"]);
                let u = self.numbers(&p, pp, "u");
                let xi = self.numbers(&p, pp, "xi");
                let (u, xi) = (u?, xi?);
                if u.len() != xi.len() || u.len() < 2 {
                    self.error(pp, "u and xi must have the same length, at least 2");
                    return None;
                }
                if u.windows(2).any(|w| w[1] <= w[0]) || u[0] < 0.0 {
                    self.error(&format!("{pp}.u"), "must be nonnegative and strictly increasing");
                    return None;
                }
                if xi.iter().any(|x| *x < 0.0) {
                    self.error(&format!("{pp}.xi"), "must be nonnegative");
                    return None;
                }
                Some(InitialData::Table { u, xi })
            }
            other => {
                self.error(
                    &format!("{path}.kind"),
                    &format!("unknown kind `{other}` (allowed: exp_decay, monodisperse, table)"),
                );
                None
            }
        }
    }

    fn stepper(&mut self, node: &Value, path: &str) -> Option<StepperConfig> {
        let obj = self.object(node, path)?;
        self.known(
            obj,
            path,
            &["t_end", "output_times", "output_spacing", "safety", "dt_max", "method"],
        );
        let t_end = self.number(obj, path, "t_end", None, |x| x >= 0.0, "[0, inf)");
        let safety = self.number(obj, path, "safety", Some(0.9), |x| x > 0.0 && x <= 1.0, "(0, 1]");
        let dt_max = self.number(obj, path, "dt_max", Some(0.1), |x| x > 0.0, "(0, inf)");
        let method = match obj.get("method").map(|m| m.as_str()) {
            None | Some(Some("ssp_rk2")) => Some(Method::SspRk2),
            Some(Some("euler")) => Some(Method::Euler),
            _ => {
                self.error(&format!("{path}.method"), "must be \"euler\" or \"ssp_rk2\"");
                None
            }
        };
        let times = if obj.contains_key("output_times") {
            if obj.contains_key("output_spacing") {
                self.error(&format!("{path}.output_spacing"), "conflicts with output_times");
            }
            self.numbers(obj, path, "output_times").map(Some)
        } else {
            Some(None)
        };
        let spacing = self.number(obj, path, "output_spacing", Some(0.0), |x| x > 0.0, "(0, inf)");
        let t_end = t_end?;
        let mut cfg = StepperConfig::new(t_end);
        match times? {
            Some(list) => {
                if let Some(t) = list.iter().find(|t| !(**t >= 0.0 && **t <= t_end)) {
                    self.error(
                        &format!("{path}.output_times"),
                        &format!("contains {t} outside [0, t_end]"),
                    );
                    return None;
                }
                if list.windows(2).any(|w| w[1] <= w[0]) {
                    self.error(&format!("{path}.output_times"), "must be strictly increasing");
                    return None;
                }
                cfg = cfg.with_output_times(list).ok()?;
            }
            None => {
                let h = spacing?;
                if h > 0.0 && t_end > 0.0 {
                    cfg = cfg.with_output_spacing(h).ok()?;
                } else if t_end > 0.0 {
                    cfg = cfg.with_output_spacing(t_end / 10.0).ok()?;
                }
            }
        }
        cfg.safety = safety?;
        cfg.dt_max = dt_max?;
        cfg.method = method?;
        Some(cfg)
    }

    fn truncation(&mut self, node: &Value, path: &str) -> Option<TruncationLevel> {
        let obj = self.object(node, path)?;
        self.known(obj, path, &["n", "growth_floor"]);
        let n = self.number(obj, path, "n", None, |x| x > 0.0, "(0, inf)")?;
        let floor = self.boolean(obj, path, "growth_floor", true);
        Some(TruncationLevel { n, growth_floor: floor })
    }

    fn experiment(&mut self, node: &Value, path: &str) -> Option<ExperimentSettings> {
        let obj = self.object(node, path)?;
        self.known(
            obj,
            path,
            &[
                "levels",
                "growth_floor",
                "convergence_tolerance",
                "eps",
                "max_spread",
                "zeroth_fraction",
                "slope_min",
                "slope_max",
                "sqrt_growth",
                "benchmark_tolerance",
                "overflow_budget",
            ],
        );
        let d = ExperimentSettings::default();
        let levels = if obj.contains_key("levels") {
            self.numbers(obj, path, "levels")
        } else {
            Some(d.levels)
        };
        if let Some(l) = &levels {
            if l.is_empty() || l.iter().any(|x| *x <= 0.0) || l.windows(2).any(|w| w[1] <= w[0]) {
                self.error(&format!("{path}.levels"), "must be positive and strictly increasing");
            }
        }
        let eps = if obj.contains_key("eps") {
            self.numbers(obj, path, "eps")
        } else {
            Some(d.eps)
        };
        if let Some(e) = &eps {
            if e.is_empty() || e.iter().any(|x| *x <= 0.0) {
                self.error(&format!("{path}.eps"), "must be a nonempty list of positive numbers");
            }
        }
        let pos = |x: f64| x > 0.0;
        let settings = ExperimentSettings {
            levels: levels?,
            growth_floor: self.boolean(obj, path, "growth_floor", d.growth_floor),
            convergence_tolerance: self.number(
                obj,
                path,
                "convergence_tolerance",
                Some(d.convergence_tolerance),
                pos,
                "(0, inf)",
            )?,
            eps: eps?,
            max_spread: self.number(obj, path, "max_spread", Some(d.max_spread), |x| x >= 1.0, "[1, inf)")?,
            zeroth_fraction: self.number(obj, path, "zeroth_fraction", Some(d.zeroth_fraction), pos, "(0, inf)")?,
            slope_band: (
                self.number(obj, path, "slope_min", Some(d.slope_band.0), |_| true, "any number")?,
                self.number(obj, path, "slope_max", Some(d.slope_band.1), |_| true, "any number")?,
            ),
            sqrt_growth: self.number(obj, path, "sqrt_growth", Some(d.sqrt_growth), |x| x >= 1.0, "[1, inf)")?,
            benchmark_tolerance: self.number(
                obj,
                path,
                "benchmark_tolerance",
                Some(d.benchmark_tolerance),
                pos,
                "(0, inf)",
            )?,
            overflow_budget: self.number(obj, path, "overflow_budget", Some(d.overflow_budget), pos, "(0, inf)")?,
        };
        Some(settings)
    }

    fn probes(&mut self, node: &Value, path: &str) -> Option<ProbeSpec> {
        let obj = self.object(node, path)?;
        self.known(obj, path, &["u_lo", "u_hi", "per_decade", "thetas", "lambda"]);
        let d = ProbeSpec::default();
        let u_lo = self.number(obj, path, "u_lo", Some(d.u_lo), |x| x > 0.0, "(0, inf)");
        let u_hi = self.number(obj, path, "u_hi", Some(d.u_hi), |x| x > 0.0, "(0, inf)");
        let per_decade = self.integer(obj, path, "per_decade", Some(d.per_decade as u64), 1);
        let thetas = if obj.contains_key("thetas") {
            self.numbers(obj, path, "thetas")
        } else {
            Some(d.thetas)
        };
        let lambda = if obj.contains_key("lambda") {
            self.number(obj, path, "lambda", None, |x| x > 1.0 && x <= 2.0, "(1, 2]")
                .map(Some)
        } else {
            Some(None)
        };
        let (u_lo, u_hi) = (u_lo?, u_hi?);
        if u_hi <= u_lo {
            self.error(&format!("{path}.u_hi"), "must exceed u_lo");
            return None;
        }
        Some(ProbeSpec {
            u_lo,
            u_hi,
            per_decade: per_decade? as usize,
            thetas: thetas?,
            lambda: lambda?,
        })
    }
}
