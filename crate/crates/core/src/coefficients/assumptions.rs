//! Sampling-based certification of the coefficient hypotheses.
//!
//! Each hypothesis is an inequality over a continuum. The checker evaluates
//! it on a log-spaced probe set and reports the smallest constant that makes
//! it hold there, plus the probe where that constant is attained.
//!
//! A bound that holds on every finite probe set can still fail at infinity,
//! so every "bounded" verdict also requires the sampled supremum to stop
//! growing: over the last decade of probes it may grow by at most
//! [`TAIL_TOLERANCE_PER_DECADE`]. Lower bounds get the mirrored test at the
//! ends where they could degenerate.

use std::collections::BTreeMap;

use serde::Serialize;

use super::CoefficientSet;
use crate::error::{Error, Result};

/// Largest admissible growth factor of a sampled supremum over the outermost
/// probe decade (`10^0.1`, i.e. a log-log slope of 0.1).
pub const TAIL_TOLERANCE_PER_DECADE: f64 = 1.258_925_411_794_167_2;

const MASS_QUADRATURE_TOL: f64 = 1e-8;

/// Where and how densely the hypotheses are sampled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSpec {
    pub u_lo: f64,
    pub u_hi: f64,
    pub per_decade: usize,
    /// Thresholds at which the kernel lower bound `delta_theta` is reported.
    pub thetas: Vec<f64>,
    /// Exponent for the power-law kernel lower bound; fitted when absent.
    pub lambda: Option<f64>,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self {
            u_lo: 1e-3,
            u_hi: 1e3,
            per_decade: 10,
            thetas: vec![0.01, 0.1, 1.0],
            lambda: None,
        }
    }
}

impl ProbeSpec {
    fn validate(&self) -> Result<()> {
        if !(self.u_lo > 0.0 && self.u_lo.is_finite()) {
            return Err(Error::Probe(format!("u_lo must be positive, got {}", self.u_lo)));
        }
        if !(self.u_hi > self.u_lo && self.u_hi.is_finite()) {
            return Err(Error::Probe(format!(
                "u_hi must exceed u_lo, got ({}, {})",
                self.u_lo, self.u_hi
            )));
        }
        if self.per_decade == 0 {
            return Err(Error::Probe("per_decade must be at least 1".into()));
        }
        if let Some(&t) = self.thetas.iter().find(|t| !(**t > 0.0)) {
            return Err(Error::Probe(format!("theta must be positive, got {t}")));
        }
        if let Some(l) = self.lambda {
            if !(l > 1.0 && l <= 2.0) {
                return Err(Error::Probe(format!("lambda must lie in (1, 2], got {l}")));
            }
        }
        Ok(())
    }

    /// The probe sizes, log-spaced from `u_lo` to `u_hi` inclusive.
    pub fn points(&self) -> Vec<f64> {
        let decades = (self.u_hi / self.u_lo).log10();
        let n = ((decades * self.per_decade as f64).round() as usize).max(1) + 1;
        let ratio = self.u_hi / self.u_lo;
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    self.u_hi
                } else {
                    self.u_lo * ratio.powf(k as f64 / (n - 1) as f64)
                }
            })
            .collect()
    }

    fn spans_tails(&self) -> bool {
        self.u_hi / self.u_lo >= 100.0 * (1.0 - 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstPoint {
    pub u: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u1: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub id: String,
    pub satisfied: bool,
    pub constants: BTreeMap<String, f64>,
    pub worst: Option<WorstPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl HypothesisCheck {
    fn new(id: &str) -> Self {
        Self {
            id: id.to_string(),
            satisfied: true,
            constants: BTreeMap::new(),
            worst: None,
            note: None,
        }
    }

    fn constant(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    fn at(mut self, u: f64, u1: Option<f64>, value: f64) -> Self {
        self.worst = Some(WorstPoint { u, u1, value });
        self
    }

    fn verdict(mut self, ok: bool, why: impl Into<String>) -> Self {
        self.satisfied = ok;
        if !ok {
            self.note = Some(why.into());
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub probes: ProbeSpec,
    pub entries: Vec<HypothesisCheck>,
}

impl AssumptionReport {
    pub fn get(&self, id: &str) -> Option<&HypothesisCheck> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn satisfied(&self, id: &str) -> bool {
        self.get(id).is_some_and(|e| e.satisfied)
    }

    pub fn constant(&self, id: &str, name: &str) -> Option<f64> {
        self.get(id).and_then(|e| e.constants.get(name).copied())
    }

    /// Fails with the first listed hypothesis that is violated or missing.
    pub fn require(&self, ids: &[&str]) -> Result<()> {
        for id in ids {
            match self.get(id) {
                Some(e) if e.satisfied => {}
                Some(e) => {
                    return Err(Error::Hypothesis {
                        id: id.to_string(),
                        detail: e.note.clone().unwrap_or_else(|| "violated on probes".into()),
                    })
                }
                None => {
                    return Err(Error::Hypothesis {
                        id: id.to_string(),
                        detail: "not checked".into(),
                    })
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Checks every coefficient hypothesis on the probe set.
///
/// Entries, by id:
/// `kernel-multiplicative` (`Y0`), `kernel-additive` on `(1, inf)^2` (`Y1`),
/// `kernel-factorized` sub-quadratic bound (`r`), `fragment-count` (`M`),
/// `fragment-mass` local conservation, `fragmentation-bound`, `death-bound`,
/// `growth-bound`, `birth-bound`, `kernel-lipschitz` growth (`A`),
/// `death-bounded` rate, `death-dominated` for `g(u) <= u mu(u)`,
/// `kernel-lower-bound` (`delta_theta`), `kernel-power-lower-bound` (`lambda, Y2`).
pub fn verify_assumptions(set: &CoefficientSet, probes: &ProbeSpec) -> Result<AssumptionReport> {
    probes.validate()?;
    set.validate()?;
    let u = probes.points();
    let tails = probes.spans_tails();
    let kernel = |a: f64, b: f64| set.coagulation.rate(a, b);
    let grid = KernelGrid::sample(&u, kernel);

    let mut entries = vec![
        multiplicative_bound(&grid, tails),
        additive_bound(&grid, tails),
        subquadratic_bound(&grid, tails),
    ];

    entries.push(
        HypothesisCheck::new("fragment-count")
            .constant("M", set.daughter.count())
            .verdict(set.daughter.count().is_finite(), "unbounded daughter count"),
    );
    entries.push(local_mass_conservation(set, &u));

    let alpha = |x: f64| set.fragmentation.at(x);
    entries.push(affine_bound(
        "fragmentation-bound",
        "P_alpha",
        "Q_alpha",
        &u,
        alpha,
        tails,
    ));
    entries.push(affine_bound(
        "death-bound",
        "P_mu",
        "Q_mu",
        &u,
        |x| set.death.at(x),
        tails,
    ));
    entries.push(affine_bound(
        "growth-bound",
        "g1",
        "g0",
        &u,
        |x| set.growth.at(x),
        tails,
    ));
    let mut birth = affine_bound("birth-bound", "a1", "a1", &u, |x| set.birth.at(x), tails);
    birth.constants.remove("a1");
    let a1 = weighted_sup(&u, |x| set.birth.at(x)).0;
    birth.constants.insert("a1".into(), a1);
    entries.push(birth);

    entries.push(lipschitz_growth(set, &u, tails));
    entries.push(bounded_death(set, &u, tails));
    entries.push(death_domination(set, &u));
    entries.push(positive_lower_bounds(&grid, &probes.thetas, tails));
    entries.push(power_law_lower_bound(&grid, probes.lambda, tails));

    Ok(AssumptionReport {
        probes: probes.clone(),
        entries,
    })
}

struct KernelGrid {
    u: Vec<f64>,
    k: Vec<f64>,
}

impl KernelGrid {
    fn sample(u: &[f64], kernel: impl Fn(f64, f64) -> f64) -> Self {
        let n = u.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                k[i * n + j] = kernel(u[i], u[j]);
            }
        }
        Self { u: u.to_vec(), k }
    }

    fn n(&self) -> usize {
        self.u.len()
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n() + j]
    }

    fn upper_inner(&self, i: usize) -> bool {
        self.u[i] <= self.u[self.n() - 1] / 10.0 * (1.0 + 1e-12)
    }

    fn lower_inner(&self, i: usize) -> bool {
        self.u[i] >= self.u[0] * 10.0 * (1.0 - 1e-12)
    }
}

/// Running extremum with its location.
#[derive(Clone, Copy)]
struct Extremum {
    value: f64,
    u: f64,
    u1: Option<f64>,
}

fn arg_max<I: Iterator<Item = (f64, f64, Option<f64>)>>(it: I) -> Option<Extremum> {
    it.fold(None, |best: Option<Extremum>, (value, u, u1)| match best {
        Some(b) if b.value >= value => Some(b),
        _ => Some(Extremum { value, u, u1 }),
    })
}

fn arg_min<I: Iterator<Item = (f64, f64, Option<f64>)>>(it: I) -> Option<Extremum> {
    it.fold(None, |best: Option<Extremum>, (value, u, u1)| match best {
        Some(b) if b.value <= value => Some(b),
        _ => Some(Extremum { value, u, u1 }),
    })
}

fn grows_in_tail(all: f64, inner: f64) -> bool {
    all > inner * TAIL_TOLERANCE_PER_DECADE + 1e-300
}

fn decays_in_tail(all: f64, inner: f64) -> bool {
    all * TAIL_TOLERANCE_PER_DECADE < inner
}

fn pairs(g: &KernelGrid) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..g.n()).flat_map(move |i| (0..g.n()).map(move |j| (i, j)))
}

fn multiplicative_bound(g: &KernelGrid, tails: bool) -> HypothesisCheck {
    let ratio = |i: usize, j: usize| g.at(i, j) / ((1.0 + g.u[i]) * (1.0 + g.u[j]));
    let all = arg_max(pairs(g).map(|(i, j)| (ratio(i, j), g.u[i], Some(g.u[j])))).unwrap();
    let check = HypothesisCheck::new("kernel-multiplicative")
        .constant("Y0", all.value)
        .at(all.u, all.u1, all.value);

    if let Some((i, j)) = pairs(g).find(|&(i, j)| !(g.at(i, j) >= 0.0 && g.at(i, j).is_finite())) {
        return check
            .at(g.u[i], Some(g.u[j]), g.at(i, j))
            .verdict(false, "kernel negative or not finite");
    }
    if let Some((i, j)) = pairs(g).find(|&(i, j)| g.at(i, j) != g.at(j, i)) {
        return check
            .at(g.u[i], Some(g.u[j]), g.at(i, j) - g.at(j, i))
            .verdict(false, "kernel not symmetric");
    }
    if tails {
        let inner = arg_max(
            pairs(g)
                .filter(|&(i, j)| g.upper_inner(i) && g.upper_inner(j))
                .map(|(i, j)| (ratio(i, j), g.u[i], Some(g.u[j]))),
        )
        .unwrap();
        if grows_in_tail(all.value, inner.value) {
            return check.verdict(false, "K/((1+u)(1+u1)) still growing in the last probe decade");
        }
    }
    check
}

fn additive_bound(g: &KernelGrid, tails: bool) -> HypothesisCheck {
    let ratio = |i: usize, j: usize| g.at(i, j) / (g.u[i] + g.u[j]);
    let region = |&(i, j): &(usize, usize)| g.u[i] > 1.0 && g.u[j] > 1.0;
    let Some(all) = arg_max(
        pairs(g)
            .filter(region)
            .map(|(i, j)| (ratio(i, j), g.u[i], Some(g.u[j]))),
    ) else {
        return HypothesisCheck::new("kernel-additive").verdict(false, "no probes in (1, inf)^2");
    };
    let check = HypothesisCheck::new("kernel-additive")
        .constant("Y1", all.value)
        .at(all.u, all.u1, all.value);
    if tails {
        let inner = arg_max(
            pairs(g)
                .filter(region)
                .filter(|&(i, j)| g.upper_inner(i) && g.upper_inner(j))
                .map(|(i, j)| (ratio(i, j), g.u[i], Some(g.u[j]))),
        );
        if let Some(inner) = inner {
            if grows_in_tail(all.value, inner.value) {
                return check.verdict(false, "K/(u+u1) still growing in the last probe decade");
            }
        }
    }
    check
}

fn subquadratic_bound(g: &KernelGrid, tails: bool) -> HypothesisCheck {
    let n = g.n();
    // Diagonal factorization r(u) = sqrt(K(u,u)) is exact for product
    // kernels; otherwise fall back to the square root of the column
    // supremum, which always dominates on the probe set because
    // K(u,u1) <= min(sup_col(u), sup_col(u1)).
    let diag: Vec<f64> = (0..n).map(|i| g.at(i, i).sqrt()).collect();
    let diag_ok =
        diag.iter().all(|r| *r > 0.0) && pairs(g).all(|(i, j)| g.at(i, j) <= diag[i] * diag[j] * (1.0 + 1e-12));
    let (r, method) = if diag_ok {
        (diag, "diagonal")
    } else {
        let col: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| g.at(i, j)).fold(0.0, f64::max).sqrt())
            .collect();
        (col, "column-supremum")
    };

    let over_affine = arg_max((0..n).map(|i| (r[i] / (1.0 + g.u[i]), g.u[i], None))).unwrap();
    let mut check = HypothesisCheck::new("kernel-factorized")
        .constant("sup_r_over_1pu", over_affine.value)
        .constant("r_over_u_at_u_hi", r[n - 1] / g.u[n - 1])
        .at(over_affine.u, None, over_affine.value);
    check.note = Some(format!("r fitted by {method} factorization"));

    if r.iter().any(|x| !(*x > 0.0)) {
        return check.verdict(false, format!("{method} factor r vanishes on a probe"));
    }
    if tails {
        let inner = (0..n)
            .filter(|&i| g.upper_inner(i))
            .map(|i| r[i] / (1.0 + g.u[i]))
            .fold(0.0, f64::max);
        if grows_in_tail(over_affine.value, inner) {
            return check.verdict(false, "r/(1+u) still growing in the last probe decade");
        }
        let tail: Vec<f64> = (0..n)
            .filter(|&i| !g.upper_inner(i) || g.u[i] >= g.u[n - 1] / 10.0 * (1.0 - 1e-12))
            .map(|i| r[i] / g.u[i])
            .collect();
        if tail.windows(2).any(|w| w[1] >= w[0]) {
            return check.verdict(false, "r/u not decreasing over the last probe decade");
        }
    }
    check
}

fn local_mass_conservation(set: &CoefficientSet, u: &[f64]) -> HypothesisCheck {
    let nu = set.daughter.nu;
    let worst = arg_max(u.iter().map(|&parent| {
        // Substituting s = (x/parent)^(nu+1) removes the endpoint singularity.
        let p = nu + 1.0;
        let integrand = |s: f64| parent * s.powf(1.0 / p) * (nu + 2.0) / p;
        let quad = quadrature::double_exponential::integrate(integrand, 0.0, 1.0, 1e-12).integral;
        let closed = set.daughter.mass_between(0.0, parent, parent);
        let err = ((quad - parent).abs().max((closed - parent).abs())) / parent;
        (err, parent, None)
    }))
    .unwrap();
    HypothesisCheck::new("fragment-mass")
        .constant("max_rel_error", worst.value)
        .at(worst.u, None, worst.value)
        .verdict(
            worst.value <= MASS_QUADRATURE_TOL,
            "fragment mass differs from parent mass",
        )
}

/// `max f(u) / (1 + u)` and its location.
fn weighted_sup(u: &[f64], f: impl Fn(f64) -> f64) -> (f64, f64) {
    let m = arg_max(
        std::iter::once(0.0)
            .chain(u.iter().copied())
            .map(|x| (f(x) / (1.0 + x), x, None)),
    )
    .unwrap();
    (m.value, m.u)
}

/// Fits `f(u) <= P u + Q` with `P = Q = sup f(u)/(1+u)`, the smallest
/// common constant.
fn affine_bound(
    id: &str,
    p_name: &str,
    q_name: &str,
    u: &[f64],
    f: impl Fn(f64) -> f64,
    tails: bool,
) -> HypothesisCheck {
    let (sup, at) = weighted_sup(u, &f);
    let check = HypothesisCheck::new(id)
        .constant(p_name, sup)
        .constant(q_name, sup)
        .at(at, None, sup);
    if let Some(&x) = std::iter::once(&0.0)
        .chain(u.iter())
        .find(|x| !(f(**x) >= 0.0 && f(**x).is_finite()))
    {
        return check.at(x, None, f(x)).verdict(false, "negative or non-finite value");
    }
    if tails {
        let top = u[u.len() - 1] / 10.0 * (1.0 + 1e-12);
        let inner = weighted_sup(&u.iter().copied().filter(|x| *x <= top).collect::<Vec<_>>(), &f).0;
        if grows_in_tail(sup, inner) {
            return check.verdict(false, "f/(1+u) still growing in the last probe decade");
        }
    }
    check
}

fn lipschitz_growth(set: &CoefficientSet, u: &[f64], tails: bool) -> HypothesisCheck {
    let pts: Vec<f64> = std::iter::once(0.0).chain(u.iter().copied()).collect();
    let slopes: Vec<(f64, f64)> = pts
        .windows(2)
        .map(|w| {
            let s = (set.growth.at(w[1]) - set.growth.at(w[0])).abs() / (w[1] - w[0]);
            (s, w[0])
        })
        .collect();
    let all = arg_max(slopes.iter().map(|&(s, x)| (s, x, None))).unwrap();
    let check = HypothesisCheck::new("kernel-lipschitz")
        .constant("A", all.value)
        .at(all.u, None, all.value);
    if tails {
        let lo = u[0] * 10.0 * (1.0 - 1e-12);
        let hi = u[u.len() - 1] / 10.0 * (1.0 + 1e-12);
        let inner = slopes
            .iter()
            .filter(|(_, x)| *x >= lo && *x <= hi)
            .map(|(s, _)| *s)
            .fold(0.0, f64::max);
        if grows_in_tail(all.value, inner) {
            return check.verdict(false, "difference quotients of g grow at a probe end");
        }
    }
    check
}

fn bounded_death(set: &CoefficientSet, u: &[f64], tails: bool) -> HypothesisCheck {
    let all = arg_max(
        std::iter::once(0.0)
            .chain(u.iter().copied())
            .map(|x| (set.death.at(x), x, None)),
    )
    .unwrap();
    let check = HypothesisCheck::new("death-bounded")
        .constant("sup_mu", all.value)
        .at(all.u, None, all.value);
    if tails {
        let hi = u[u.len() - 1] / 10.0 * (1.0 + 1e-12);
        let inner = u
            .iter()
            .filter(|x| **x <= hi)
            .map(|&x| set.death.at(x))
            .fold(set.death.at(0.0), f64::max);
        if grows_in_tail(all.value, inner) {
            return check.verdict(false, "death rate still growing in the last probe decade");
        }
    }
    check
}

fn death_domination(set: &CoefficientSet, u: &[f64]) -> HypothesisCheck {
    let worst = arg_max(u.iter().map(|&x| {
        let g = set.growth.at(x);
        let d = x * set.death.at(x);
        (g - d, x, None)
    }))
    .unwrap();
    let violated = u.iter().copied().find(|&x| {
        let g = set.growth.at(x);
        let d = x * set.death.at(x);
        g > d * (1.0 + 1e-12) + 1e-300
    });
    let check = HypothesisCheck::new("death-dominated")
        .constant("max_g_minus_u_mu", worst.value)
        .at(worst.u, None, worst.value);
    match violated {
        Some(x) => check.verdict(false, format!("g(u) > u mu(u) at u = {x}")),
        None => check,
    }
}

fn positive_lower_bounds(g: &KernelGrid, thetas: &[f64], tails: bool) -> HypothesisCheck {
    let mut check = HypothesisCheck::new("kernel-lower-bound");
    let mut worst: Option<Extremum> = None;
    for &theta in thetas {
        let region = |&(i, j): &(usize, usize)| g.u[i] > theta && g.u[j] > theta;
        let Some(m) = arg_min(pairs(g).filter(region).map(|(i, j)| (g.at(i, j), g.u[i], Some(g.u[j])))) else {
            return check.verdict(false, format!("no probes above theta = {theta}"));
        };
        check = check.constant(&format!("delta_theta={theta}"), m.value);
        if worst.is_none_or(|w| m.value < w.value) {
            worst = Some(m);
        }
        if !(m.value > 0.0) {
            let c = check.at(m.u, m.u1, m.value);
            return c.verdict(false, format!("kernel vanishes above theta = {theta}"));
        }
        if tails {
            let inner = arg_min(
                pairs(g)
                    .filter(region)
                    .filter(|&(i, j)| g.upper_inner(i) && g.upper_inner(j))
                    .map(|(i, j)| (g.at(i, j), g.u[i], Some(g.u[j]))),
            );
            if let Some(inner) = inner {
                if decays_in_tail(m.value, inner.value) {
                    let c = check.at(m.u, m.u1, m.value);
                    return c.verdict(false, format!("kernel decays at large sizes (theta = {theta})"));
                }
            }
        }
    }
    match worst {
        Some(w) => check.at(w.u, w.u1, w.value),
        None => check,
    }
}

fn power_law_lower_bound(g: &KernelGrid, lambda: Option<f64>, tails: bool) -> HypothesisCheck {
    // Returns (Y2, location, worst log10 drift per decade at either end).
    let evaluate = |lambda: f64| {
        let ratio = |i: usize, j: usize| g.at(i, j) / (g.u[i] * g.u[j]).powf(lambda / 2.0);
        let all = arg_min(pairs(g).map(|(i, j)| (ratio(i, j), g.u[i], Some(g.u[j])))).unwrap();
        let mut drift = 0.0f64;
        if tails {
            let hi = arg_min(
                pairs(g)
                    .filter(|&(i, j)| g.upper_inner(i) && g.upper_inner(j))
                    .map(|(i, j)| (ratio(i, j), 0.0, None)),
            )
            .unwrap();
            let lo = arg_min(
                pairs(g)
                    .filter(|&(i, j)| g.lower_inner(i) && g.lower_inner(j))
                    .map(|(i, j)| (ratio(i, j), 0.0, None)),
            )
            .unwrap();
            for inner in [hi.value, lo.value] {
                if inner > 0.0 && all.value > 0.0 {
                    drift = drift.max((inner / all.value).log10());
                } else if inner > 0.0 {
                    drift = f64::INFINITY;
                }
            }
        }
        (all, drift)
    };

    let (lambda, (m, drift), fitted) = match lambda {
        Some(l) => (l, evaluate(l), false),
        None => (105..=200)
            .step_by(5)
            .map(|k| k as f64 / 100.0)
            .map(|l| (l, evaluate(l), true))
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .unwrap(),
    };
    let mut check = HypothesisCheck::new("kernel-power-lower-bound")
        .constant("lambda", lambda)
        .constant("Y2", m.value)
        .at(m.u, m.u1, m.value);
    if fitted {
        check.note = Some("lambda fitted over (1, 2] in steps of 0.05".into());
    }
    if !(m.value > 0.0) {
        return check.verdict(false, "kernel vanishes somewhere on the probes");
    }
    if drift > TAIL_TOLERANCE_PER_DECADE.log10() {
        return check.verdict(
            false,
            format!("K/(u u1)^(lambda/2) degenerates at a probe end (lambda = {lambda})"),
        );
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{CoagulationKernel, RateFunction};

    fn kernel_set(k: CoagulationKernel) -> CoefficientSet {
        CoefficientSet::default().with_coagulation(k)
    }

    #[test]
    fn constant_kernel_multiplicative_constant_is_brute_force_max() {
        let set = kernel_set(CoagulationKernel::constant(1.0).unwrap());
        let probes = ProbeSpec::default();
        let report = verify_assumptions(&set, &probes).unwrap();
        let pts = probes.points();
        let mut oracle = 0.0f64;
        for &a in &pts {
            for &b in &pts {
                oracle = oracle.max(1.0 / ((1.0 + a) * (1.0 + b)));
            }
        }
        assert!(report.satisfied("kernel-multiplicative"));
        assert_eq!(report.constant("kernel-multiplicative", "Y0").unwrap(), oracle);
        assert!((oracle - 1.0).abs() < 3e-3);
        let w = report.get("kernel-multiplicative").unwrap().worst.clone().unwrap();
        assert_eq!(w.u, pts[0]);
    }

    #[test]
    fn death_domination_violation_is_reported() {
        let set = CoefficientSet::default()
            .with_growth(RateFunction::constant(1.0).unwrap())
            .with_death(RateFunction::constant(1.0).unwrap());
        let report = verify_assumptions(&set, &ProbeSpec::default()).unwrap();
        assert!(!report.satisfied("death-dominated"));
        assert!(set.growth.at(0.5) > 0.5 * set.death.at(0.5));
        assert!(report.require(&["death-dominated"]).is_err());
    }

    #[test]
    fn death_domination_equality_case_passes() {
        let set = CoefficientSet::default()
            .with_growth(RateFunction::affine(1.0, 0.0).unwrap())
            .with_death(RateFunction::constant(1.0).unwrap());
        let report = verify_assumptions(&set, &ProbeSpec::default()).unwrap();
        assert!(report.satisfied("death-dominated"));
    }

    #[test]
    fn additive_class_membership() {
        let probes = ProbeSpec {
            u_lo: 1e-2,
            u_hi: 100.0,
            ..ProbeSpec::default()
        };
        for k in [
            CoagulationKernel::LinearShear,
            CoagulationKernel::NonlinearShear,
            CoagulationKernel::Gravitational,
            CoagulationKernel::modified_smoluchowski(1.0).unwrap(),
            CoagulationKernel::activated_sludge(1.5, 2.0).unwrap(),
            CoagulationKernel::product(0.5).unwrap(),
        ] {
            let r = verify_assumptions(&kernel_set(k.clone()), &probes).unwrap();
            assert!(r.satisfied("kernel-additive"), "{}", k.name());
            assert!(r.constant("kernel-additive", "Y1").unwrap().is_finite());
            assert!(r.satisfied("kernel-multiplicative"), "{}", k.name());
        }
        let r = verify_assumptions(&kernel_set(CoagulationKernel::product(0.75).unwrap()), &probes).unwrap();
        assert!(!r.satisfied("kernel-additive"));
    }

    #[test]
    fn product_kernel_factorizes_with_sublinear_r() {
        for omega in [0.3, 0.75, 0.95] {
            let set = kernel_set(CoagulationKernel::product(omega).unwrap());
            let r = verify_assumptions(&set, &ProbeSpec::default()).unwrap();
            let e = r.get("kernel-factorized").unwrap();
            assert!(e.satisfied, "omega = {omega}: {:?}", e.note);
            assert!(e.note.as_deref().unwrap().contains("diagonal"));
        }
    }

    #[test]
    fn lower_bounds() {
        let r = verify_assumptions(&kernel_set(CoagulationKernel::Gravitational), &ProbeSpec::default()).unwrap();
        assert!(!r.satisfied("kernel-lower-bound"));

        let r = verify_assumptions(
            &kernel_set(CoagulationKernel::constant(2.0).unwrap()),
            &ProbeSpec::default(),
        )
        .unwrap();
        assert!(r.satisfied("kernel-lower-bound"));
        assert_eq!(r.constant("kernel-lower-bound", "delta_theta=1").unwrap(), 2.0);
        assert!(!r.satisfied("kernel-power-lower-bound"));

        let r = verify_assumptions(
            &kernel_set(CoagulationKernel::product(0.75).unwrap()),
            &ProbeSpec::default(),
        )
        .unwrap();
        assert!(r.satisfied("kernel-power-lower-bound"));
        assert_eq!(r.constant("kernel-power-lower-bound", "lambda").unwrap(), 1.5);
        assert!((r.constant("kernel-power-lower-bound", "Y2").unwrap() - 1.0).abs() < 1e-12);

        let sludge = kernel_set(CoagulationKernel::activated_sludge(1.0, 1.0).unwrap());
        let r = verify_assumptions(&sludge, &ProbeSpec::default()).unwrap();
        assert!(!r.satisfied("kernel-lower-bound"));
    }

    #[test]
    fn fragmentation_and_rate_constants() {
        let set = CoefficientSet::default()
            .with_fragmentation(
                crate::coefficients::FragmentationRate::new(2.0, 1.0).unwrap(),
                crate::coefficients::DaughterDistribution::new(-0.5).unwrap(),
            )
            .with_birth(RateFunction::constant(0.5).unwrap());
        let r = verify_assumptions(&set, &ProbeSpec::default()).unwrap();
        assert_eq!(r.constant("fragment-count", "M").unwrap(), 3.0);
        assert!(r.satisfied("fragment-mass"));
        assert!(r.constant("fragmentation-bound", "P_alpha").unwrap() <= 2.0);
        assert!(r.constant("fragmentation-bound", "P_alpha").unwrap() > 1.99);
        assert_eq!(r.constant("birth-bound", "a1").unwrap(), 0.5);
    }

    #[test]
    fn lipschitz_and_bounded_death() {
        let set = CoefficientSet::default()
            .with_growth(RateFunction::power_law(1.0, 0.5).unwrap())
            .with_death(RateFunction::affine(1.0, 0.0).unwrap());
        let r = verify_assumptions(&set, &ProbeSpec::default()).unwrap();
        assert!(!r.satisfied("kernel-lipschitz"));
        assert!(!r.satisfied("death-bounded"));

        let set = CoefficientSet::default()
            .with_growth(RateFunction::affine(0.3, 1.0).unwrap())
            .with_death(RateFunction::constant(2.0).unwrap());
        let r = verify_assumptions(&set, &ProbeSpec::default()).unwrap();
        assert!(r.satisfied("kernel-lipschitz"));
        assert!((r.constant("kernel-lipschitz", "A").unwrap() - 0.3).abs() < 1e-9);
        assert!(r.satisfied("death-bounded"));
    }

    #[test]
    fn probe_errors() {
        let set = CoefficientSet::default();
        let bad = ProbeSpec {
            u_lo: 0.0,
            ..ProbeSpec::default()
        };
        assert!(matches!(verify_assumptions(&set, &bad), Err(Error::Probe(_))));
    }

    #[test]
    fn report_is_deterministic_and_serializes() {
        let set = kernel_set(CoagulationKernel::LinearShear);
        let a = verify_assumptions(&set, &ProbeSpec::default()).unwrap();
        let b = verify_assumptions(&set, &ProbeSpec::default()).unwrap();
        assert_eq!(a, b);
        let json = a.to_json().unwrap();
        assert_eq!(json, b.to_json().unwrap());
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["entries"].as_array().unwrap().len(), a.entries.len());
    }
}
