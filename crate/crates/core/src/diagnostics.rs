//! Moments, weighted norms, mass and weak-form balance residuals, moment
//! envelopes and power-law decay fits.

use serde::Serialize;
use statrs::function::gamma::{gamma, gamma_lr};

use crate::coefficients::{AssumptionReport, DaughterDistribution};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::operators::{Discretization, StateVector};

/// Moments of one snapshot plus the boundary ledger at that time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRecord {
    pub t: f64,
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub weighted_norm: f64,
    pub overflow_mass: f64,
    pub renewal_number: f64,
    pub renewal_mass_artifact: f64,
}

impl MomentRecord {
    pub const CSV_HEADER: &'static str = "t,M0,M1,M2,weighted_norm,overflow_mass,renewal_number,renewal_mass_artifact";

    pub fn from_state(s: &StateVector) -> Self {
        let m0 = moment_unchecked(s, 0.0);
        let m1 = moment_unchecked(s, 1.0);
        Self {
            t: s.t,
            m0,
            m1,
            m2: moment_unchecked(s, 2.0),
            weighted_norm: m0 + m1,
            overflow_mass: s.ledger.overflow_mass,
            renewal_number: s.ledger.renewal_number,
            renewal_mass_artifact: s.ledger.renewal_mass,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.t,
            self.m0,
            self.m1,
            self.m2,
            self.weighted_norm,
            self.overflow_mass,
            self.renewal_number,
            self.renewal_mass_artifact
        )
    }
}

/// `sum x_i^gamma xi_i d_i` over the cells.
pub fn moment(s: &StateVector, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("moment order must be >= 0, got {gamma}")));
    }
    Ok(moment_unchecked(s, gamma))
}

fn moment_unchecked(s: &StateVector, gamma: f64) -> f64 {
    let g = s.grid();
    let weight = |x: f64| {
        if gamma == 0.0 {
            1.0
        } else if gamma == 1.0 {
            x
        } else if gamma == 2.0 {
            x * x
        } else {
            x.powf(gamma)
        }
    };
    s.xi.iter()
        .zip(g.pivots())
        .zip(g.widths())
        .map(|((v, x), d)| weight(*x) * v * d)
        .sum()
}

/// `M0 + M1`, the discrete `int (1 + u) xi du`.
pub fn weighted_norm(s: &StateVector) -> f64 {
    moment_unchecked(s, 0.0) + moment_unchecked(s, 1.0)
}

/// `sum (1 + x_i) |a_i - b_i| d_i`.
pub fn weighted_difference_norm(a: &StateVector, b: &StateVector) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch);
    }
    let g = a.grid();
    Ok(a.xi
        .iter()
        .zip(&b.xi)
        .zip(g.pivots())
        .zip(g.widths())
        .map(|(((p, q), x), d)| (1.0 + x) * (p - q).abs() * d)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Which {
    M0,
    M1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Least-squares slope of `log M` against `log t`.
    pub slope: f64,
    /// `exp` of the fitted intercept, so `M ~ prefactor * t^slope`.
    pub prefactor: f64,
    pub points: usize,
}

/// Fits `M(t) ~ C t^p` over records with `t_lo <= t <= t_hi`.
pub fn decay_fit(moments: &[MomentRecord], which: Which, window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = moments
        .iter()
        .filter(|r| r.t >= window.0 && r.t <= window.1)
        .map(|r| (r.t, if which == Which::M0 { r.m0 } else { r.m1 }))
        .collect();
    if pts.len() < 5 {
        return Err(Error::DecayWindow(pts.len()));
    }
    if let Some(&(t, v)) = pts.iter().find(|(t, v)| !(*t > 0.0 && *v > 0.0)) {
        return Err(Error::Domain(format!(
            "decay fit needs positive times and moments, got M({t}) = {v}"
        )));
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (t, v)| (a + t.ln(), b + v.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (t, v)| {
        let dx = t.ln() - mx;
        (a + dx * (v.ln() - my), b + dx * dx)
    });
    if sxx == 0.0 {
        return Err(Error::Domain("decay fit window has a single distinct time".into()));
    }
    let slope = sxy / sxx;
    Ok(DecayFit {
        slope,
        prefactor: (my - slope * mx).exp(),
        points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassBalance {
    /// `M1(t2) - M1(t1)` minus the source terms.
    pub residual: f64,
    /// `|residual| / M1(t1)`, or `|residual|` when `M1(t1) = 0`.
    pub relative: f64,
}

/// Mass-balance residual over `[t1, t2]`: the change of `M1` minus the
/// trapezoid integral of `sum (g(x_i) - x_i mu(x_i)) xi_i d_i`, with the
/// renewal mass artifact and overflow taken from the ledger.
pub fn mass_balance_residual(traj: &Trajectory, disc: &Discretization, t1: f64, t2: f64) -> Result<MassBalance> {
    let (i1, i2) = (traj.index_of(t1)?, traj.index_of(t2)?);
    if i2 < i1 {
        return Err(Error::Domain(format!("t1 = {t1} is after t2 = {t2}")));
    }
    let snaps = traj.snapshots();
    let g = disc.growth_at_pivots();
    let mu = disc.mu();
    let grid = disc.grid();
    let source = |s: &StateVector| -> f64 {
        (0..s.xi.len())
            .map(|i| {
                let x = grid.pivots()[i];
                (g[i] - x * mu[i]) * s.xi[i] * grid.widths()[i]
            })
            .sum()
    };
    let mut integral = 0.0;
    for k in i1..i2 {
        let (a, b) = (&snaps[k], &snaps[k + 1]);
        integral += 0.5 * (b.t - a.t) * (source(a) + source(b));
    }
    let (a, b) = (&snaps[i1], &snaps[i2]);
    let m1a = moment_unchecked(a, 1.0);
    let dm1 = moment_unchecked(b, 1.0) - m1a;
    let renewal = b.ledger.renewal_mass - a.ledger.renewal_mass;
    let overflow = b.ledger.overflow_mass - a.ledger.overflow_mass;
    let clamped = b.ledger.clamped_mass - a.ledger.clamped_mass;
    let residual = dm1 - integral - renewal - clamped + overflow;
    Ok(MassBalance {
        residual,
        relative: if m1a > 0.0 {
            residual.abs() / m1a
        } else {
            residual.abs()
        },
    })
}

/// Discrepancy between the change of `M1` and the ledger's net mass flux.
/// Zero up to roundoff for every run.
pub fn ledger_mass_defect(traj: &Trajectory) -> f64 {
    let (a, b) = (traj.initial(), traj.last());
    let dm1 = moment_unchecked(b, 1.0) - moment_unchecked(a, 1.0);
    dm1 - (b.ledger.net_mass() - a.ledger.net_mass())
}

/// Test functions for the weak-form residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `exp(-k u)`, `k > 0`.
    ExpDecay { k: f64 },
    /// `min(u, cap)`; Lipschitz but not continuously differentiable.
    CappedLinear { cap: f64 },
    /// `cos^2(pi (u - center) / (2 half_width))` on `|u - center| < half_width`.
    SmoothBump { center: f64, half_width: f64 },
}

impl TestFunction {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::ExpDecay { k } => k > 0.0 && k.is_finite(),
            Self::CappedLinear { cap } => cap > 0.0 && cap.is_finite(),
            Self::SmoothBump { center, half_width } => half_width > 0.0 && center.is_finite() && half_width.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid test function {self:?}")))
        }
    }

    /// Regularity class, reported alongside the residual.
    pub fn class(&self) -> &'static str {
        match self {
            Self::CappedLinear { .. } => "lipschitz",
            _ => "c1_bounded",
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        match *self {
            Self::ExpDecay { k } => (-k * u).exp(),
            Self::CappedLinear { cap } => u.min(cap),
            Self::SmoothBump { center, half_width } => {
                let z = (u - center) / half_width;
                if z.abs() < 1.0 {
                    (0.5 * std::f64::consts::PI * z).cos().powi(2)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            Self::ExpDecay { k } => -k * (-k * u).exp(),
            Self::CappedLinear { cap } => {
                if u < cap {
                    1.0
                } else {
                    0.0
                }
            }
            Self::SmoothBump { center, half_width } => {
                let z = (u - center) / half_width;
                if z.abs() < 1.0 {
                    -std::f64::consts::PI / (2.0 * half_width) * (std::f64::consts::PI * z).sin()
                } else {
                    0.0
                }
            }
        }
    }

    /// `int_0^parent theta(u) beta(u | parent) du - theta(parent)`.
    pub fn psi(&self, parent: f64, daughter: DaughterDistribution) -> f64 {
        let nu = daughter.nu;
        let p = nu + 1.0;
        let integral = match *self {
            Self::ExpDecay { k } => {
                let z = k * parent;
                if z == 0.0 {
                    daughter.count()
                } else {
                    (nu + 2.0) * gamma(p) * gamma_lr(p, z) / z.powf(p)
                }
            }
            Self::CappedLinear { cap } => {
                if parent <= cap {
                    parent
                } else {
                    daughter.mass_between(0.0, cap, parent) + cap * daughter.number_between(cap, parent, parent)
                }
            }
            Self::SmoothBump { center, half_width } => {
                // With s = (u / parent)^(nu + 1), beta du = M ds.
                let lo = (center - half_width).max(0.0);
                let hi = (center + half_width).min(parent);
                if hi <= lo {
                    0.0
                } else {
                    let s = |u: f64| (u / parent).powf(p);
                    let f = |s: f64| self.value(parent * s.powf(1.0 / p));
                    daughter.count() * quadrature::double_exponential::integrate(f, s(lo), s(hi), 1e-12).integral
                }
            }
        };
        integral - self.value(parent)
    }

    /// `theta(u + v) - theta(u) - theta(v)`.
    pub fn tilde(&self, u: f64, v: f64) -> f64 {
        self.value(u + v) - self.value(u) - self.value(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakFormResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub class: &'static str,
}

/// Both sides of the weak formulation at snapshot time `t`, with the time
/// integral taken by the trapezoid rule over the snapshots.
pub fn weak_form_residual(
    traj: &Trajectory,
    disc: &Discretization,
    theta: TestFunction,
    t: f64,
) -> Result<WeakFormResidual> {
    theta.validate()?;
    let end = traj.index_of(t)?;
    let grid = disc.grid();
    let (x, d) = (grid.pivots(), grid.widths());
    let n = x.len();
    let set = disc.coefficients();
    let th: Vec<f64> = x.iter().map(|&u| theta.value(u)).collect();
    let dth: Vec<f64> = x.iter().map(|&u| theta.derivative(u)).collect();
    let psi: Vec<f64> = if set.fragmentation.is_zero() {
        vec![0.0; n]
    } else {
        x.iter().map(|&u| theta.psi(u, set.daughter)).collect()
    };
    let kernel = disc.kernel_table();
    let has_coag = kernel.iter().any(|k| *k != 0.0);
    let tilde: Vec<f64> = if has_coag {
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                t[i * n + j] = theta.tilde(x[i], x[j]) * kernel[i * n + j];
            }
        }
        t
    } else {
        Vec::new()
    };
    let theta0 = theta.value(0.0);
    let pairing = |s: &StateVector, w: &[f64]| -> f64 { (0..n).map(|i| w[i] * s.xi[i] * d[i]).sum() };
    let integrand = |s: &StateVector| -> f64 {
        let mut total = 0.0;
        for i in 0..n {
            let m = s.xi[i] * d[i];
            total += m
                * (dth[i] * disc.growth_at_pivots()[i] + theta0 * disc.birth()[i] - disc.mu()[i] * th[i]
                    + psi[i] * disc.alpha()[i]);
        }
        if has_coag {
            let mut c = 0.0;
            for i in 0..n {
                let mi = s.xi[i] * d[i];
                if mi == 0.0 {
                    continue;
                }
                let row = &tilde[i * n..(i + 1) * n];
                let mut r = 0.0;
                for j in 0..n {
                    r += row[j] * s.xi[j] * d[j];
                }
                c += mi * r;
            }
            total += 0.5 * c;
        }
        total
    };
    let snaps = traj.snapshots();
    let mut integral = 0.0;
    let mut prev = integrand(&snaps[0]);
    for k in 0..end {
        let next = integrand(&snaps[k + 1]);
        integral += 0.5 * (snaps[k + 1].t - snaps[k].t) * (prev + next);
        prev = next;
    }
    let lhs = pairing(&snaps[end], &th);
    let rhs = pairing(&snaps[0], &th) + integral;
    Ok(WeakFormResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        class: theta.class(),
    })
}

/// Constants of the exponential bound on the weighted norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeConstants {
    pub c1: f64,
    pub c3: f64,
}

impl EnvelopeConstants {
    /// `C1` is the initial weighted norm; `C3 = |a| + |g| + M max(P, Q) + 1`
    /// with each `|f|` the fitted constant of `f <= c (1 + u)`.
    pub fn from_report(report: &AssumptionReport, initial: &StateVector) -> Result<Self> {
        let get = |id: &str, name: &str| {
            report.constant(id, name).ok_or_else(|| Error::Hypothesis {
                id: id.into(),
                detail: format!("constant {name} missing"),
            })
        };
        let a = get("birth-bound", "a1")?;
        let g = get("growth-bound", "g1")?;
        let m = get("fragment-count", "M")?;
        let alpha = get("fragmentation-bound", "P_alpha")?.max(get("fragmentation-bound", "Q_alpha")?);
        Ok(Self {
            c1: weighted_norm(initial),
            c3: a + g + m * alpha + 1.0,
        })
    }

    pub fn bound(&self, t: f64) -> f64 {
        self.c1 * (self.c3 * t).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub violations: Vec<f64>,
    /// Largest `value / bound` over the snapshots.
    pub max_ratio: f64,
}

impl EnvelopeCheck {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `weighted_norm(t) <= C1 exp(C3 t) (1 + 1e-6)` at every snapshot.
pub fn exponential_envelope(traj: &Trajectory, c: &EnvelopeConstants) -> EnvelopeCheck {
    check_envelope(traj.moments(), |r| r.weighted_norm, |t| c.bound(t) * (1.0 + 1e-6))
}

/// Gronwall bound on the second moment over `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondMomentBound {
    pub horizon: f64,
    pub value: f64,
}

impl SecondMomentBound {
    /// `L(T) = (C0 + Y0 T C1^2 e^{2 C3 T} + (1 + |g|) T C1 e^{C3 T}) e^{L_K}`,
    /// `L_K = T (3 (1 + |g|) + (8 Y0 + 2 Y1) C1 e^{C3 T})`, `C0 = M2(0)`.
    pub fn new(report: &AssumptionReport, env: &EnvelopeConstants, m2_initial: f64, horizon: f64) -> Result<Self> {
        let get = |id: &str, name: &str| {
            report.constant(id, name).ok_or_else(|| Error::Hypothesis {
                id: id.into(),
                detail: format!("constant {name} missing"),
            })
        };
        let y0 = get("kernel-multiplicative", "Y0")?;
        let y1 = get("kernel-additive", "Y1")?;
        let g = get("growth-bound", "g1")?;
        let t = horizon;
        let grow = (env.c3 * t).exp();
        let lk = t * (3.0 * (1.0 + g) + (8.0 * y0 + 2.0 * y1) * env.c1 * grow);
        let value = (m2_initial + y0 * t * env.c1 * env.c1 * grow * grow + (1.0 + g) * t * env.c1 * grow) * lk.exp();
        Ok(Self { horizon, value })
    }
}

/// Checks `M2(t) <= factor * L(T)` at every snapshot up to `T`.
pub fn second_moment_envelope(traj: &Trajectory, bound: &SecondMomentBound, factor: f64) -> EnvelopeCheck {
    check_envelope(
        traj.moments(),
        |r| if r.t <= bound.horizon { r.m2 } else { 0.0 },
        |_| factor * bound.value,
    )
}

fn check_envelope(
    records: &[MomentRecord],
    value: impl Fn(&MomentRecord) -> f64,
    bound: impl Fn(f64) -> f64,
) -> EnvelopeCheck {
    let mut violations = Vec::new();
    let mut max_ratio = 0.0f64;
    for r in records {
        let (v, b) = (value(r), bound(r.t));
        if v > b {
            violations.push(r.t);
        }
        if b > 0.0 {
            max_ratio = max_ratio.max(v / b);
        }
    }
    EnvelopeCheck { violations, max_ratio }
}

/// True when the sequence never increases by more than `rel` times its
/// current value.
pub fn nonincreasing(values: &[f64], rel: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + rel * w[0].abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridScheme};

    fn record(t: f64, m: f64) -> MomentRecord {
        MomentRecord {
            t,
            m0: m,
            m1: m,
            m2: 0.0,
            weighted_norm: 2.0 * m,
            overflow_mass: 0.0,
            renewal_number: 0.0,
            renewal_mass_artifact: 0.0,
        }
    }

    #[test]
    fn moment_examples() {
        let g = build_grid(1.0, 100, GridScheme::Uniform).unwrap();
        let s = StateVector::new(&g, vec![1.0; 100]).unwrap();
        assert!((moment(&s, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((moment(&s, 1.0).unwrap() - 0.5).abs() < 1e-3);
        assert!(moment(&s, -1.0).is_err());
        let s = StateVector::monodisperse(&g, 7, 3.0).unwrap();
        let x = g.pivots()[7];
        assert!((moment(&s, 2.0).unwrap() - x * x * moment(&s, 0.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn weighted_difference_examples() {
        let g = build_grid(1.0, 10, GridScheme::Uniform).unwrap();
        let a = StateVector::monodisperse(&g, 3, 2.0).unwrap();
        let b = StateVector::monodisperse(&g, 3, 1.0).unwrap();
        assert_eq!(weighted_difference_norm(&a, &a).unwrap(), 0.0);
        let zero = StateVector::zeros(&g);
        assert!((weighted_difference_norm(&a, &zero).unwrap() - weighted_norm(&a)).abs() < 1e-15);
        let expected = (1.0 + g.pivots()[3]) * g.widths()[3];
        assert!((weighted_difference_norm(&a, &b).unwrap() - expected).abs() < 1e-15);
        let other = StateVector::zeros(&build_grid(2.0, 10, GridScheme::Uniform).unwrap());
        assert!(matches!(weighted_difference_norm(&a, &other), Err(Error::GridMismatch)));
    }

    #[test]
    fn decay_fit_examples() {
        let recs: Vec<_> = (1..=20).map(|k| k as f64).map(|t| record(t, t.powf(-0.5))).collect();
        let f = decay_fit(&recs, Which::M1, (1.0, 20.0)).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.prefactor - 1.0).abs() < 1e-12);
        let flat: Vec<_> = (1..=10).map(|k| record(k as f64, 3.0)).collect();
        assert!(decay_fit(&flat, Which::M0, (1.0, 10.0)).unwrap().slope.abs() < 1e-14);
        assert!(matches!(
            decay_fit(&flat, Which::M0, (1.0, 3.0)),
            Err(Error::DecayWindow(3))
        ));
        let zero: Vec<_> = (1..=10).map(|k| record(k as f64, 0.0)).collect();
        assert!(decay_fit(&zero, Which::M0, (1.0, 10.0)).is_err());
    }

    #[test]
    fn psi_closed_forms_match_quadrature() {
        for nu in [0.0, -0.3, -0.8] {
            let d = DaughterDistribution::new(nu).unwrap();
            for parent in [0.2, 1.0, 7.5] {
                for theta in [
                    TestFunction::ExpDecay { k: 0.7 },
                    TestFunction::CappedLinear { cap: 2.0 },
                ] {
                    // Same substitution as the bump: beta du = M ds.
                    let p = nu + 1.0;
                    let f = |s: f64| theta.value(parent * s.powf(1.0 / p));
                    // Split at the kink of the capped function.
                    let kink = match theta {
                        TestFunction::CappedLinear { cap } => (cap / parent).min(1.0).powf(p),
                        _ => 0.5,
                    };
                    let de = |a, b| quadrature::double_exponential::integrate(f, a, b, 1e-12).integral;
                    let q = d.count() * (de(0.0, kink) + de(kink, 1.0)) - theta.value(parent);
                    assert!(
                        (theta.psi(parent, d) - q).abs() < 1e-9,
                        "{theta:?} nu={nu} parent={parent}"
                    );
                }
            }
        }
    }

    #[test]
    fn psi_of_mass_is_zero() {
        let d = DaughterDistribution::new(-0.4).unwrap();
        let theta = TestFunction::CappedLinear { cap: 100.0 };
        assert!(theta.psi(3.0, d).abs() < 1e-14);
    }
}
