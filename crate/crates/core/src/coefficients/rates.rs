//! Single-size rates (growth, death, birth, fragmentation) and the
//! power-law daughter distribution.

use serde::Serialize;

use crate::error::{check_param, Error, Result};

/// A nonnegative function of size, used for growth `g`, death `mu` and
/// birth `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum RateFunction {
    /// `slope * u + intercept`
    Affine {
        slope: f64,
        intercept: f64,
    },
    /// `coef * u^exponent`, with `0^0 = 1`.
    PowerLaw {
        coef: f64,
        exponent: f64,
    },
    Constant {
        value: f64,
    },
    /// Piecewise-linear interpolation through `(u, values)`, constant beyond
    /// the sampled range.
    Table {
        u: Vec<f64>,
        values: Vec<f64>,
    },
    /// `inner(u)` for `u <= level`, zero above.
    Truncated {
        inner: Box<RateFunction>,
        level: f64,
    },
    /// `inner(u) + shift`.
    Shifted {
        inner: Box<RateFunction>,
        shift: f64,
    },
}

impl Default for RateFunction {
    fn default() -> Self {
        Self::Constant { value: 0.0 }
    }
}

impl RateFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn affine(slope: f64, intercept: f64) -> Result<Self> {
        check_param("slope", slope, slope >= 0.0, "slope >= 0")?;
        check_param("intercept", intercept, intercept >= 0.0, "intercept >= 0")?;
        Ok(Self::Affine { slope, intercept })
    }

    pub fn power_law(coef: f64, exponent: f64) -> Result<Self> {
        check_param("coef", coef, coef >= 0.0, "coef >= 0")?;
        check_param(
            "exponent",
            exponent,
            (0.0..=1.0).contains(&exponent),
            "exponent in [0, 1]",
        )?;
        Ok(Self::PowerLaw { coef, exponent })
    }

    pub fn constant(value: f64) -> Result<Self> {
        check_param("value", value, value >= 0.0, "value >= 0")?;
        Ok(Self::Constant { value })
    }

    pub fn table(u: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if u.is_empty() || u.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len().max(1),
                found: values.len(),
            });
        }
        if u[0] < 0.0 || u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter {
                name: "u",
                value: u[0],
                allowed: "nonnegative, strictly increasing sample sizes",
            });
        }
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Parameter {
                name: "values",
                value: bad,
                allowed: "finite nonnegative samples",
            });
        }
        Ok(Self::Table { u, values })
    }

    pub fn truncated(self, level: f64) -> Result<Self> {
        check_param("level", level, level > 0.0, "level > 0")?;
        Ok(Self::Truncated {
            inner: Box::new(self),
            level,
        })
    }

    pub fn shifted(self, shift: f64) -> Result<Self> {
        check_param("shift", shift, shift >= 0.0, "shift >= 0")?;
        Ok(Self::Shifted {
            inner: Box::new(self),
            shift,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Affine { slope, intercept } => Self::affine(*slope, *intercept).map(drop),
            Self::PowerLaw { coef, exponent } => Self::power_law(*coef, *exponent).map(drop),
            Self::Constant { value } => Self::constant(*value).map(drop),
            Self::Table { u, values } => Self::table(u.clone(), values.clone()).map(drop),
            Self::Truncated { inner, level } => {
                check_param("level", *level, *level > 0.0, "level > 0")?;
                inner.validate()
            }
            Self::Shifted { inner, shift } => {
                check_param("shift", *shift, *shift >= 0.0, "shift >= 0")?;
                inner.validate()
            }
        }
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!("rate needs u >= 0, got {u}")));
        }
        Ok(self.at(u))
    }

    /// Unchecked evaluation at a nonnegative size.
    pub fn at(&self, u: f64) -> f64 {
        match self {
            Self::Affine { slope, intercept } => slope * u + intercept,
            Self::PowerLaw { coef, exponent } => coef * u.powf(*exponent),
            Self::Constant { value } => *value,
            Self::Table { u: xs, values } => interpolate(xs, values, u),
            Self::Truncated { inner, level } => {
                if u <= *level {
                    inner.at(u)
                } else {
                    0.0
                }
            }
            Self::Shifted { inner, shift } => inner.at(u) + shift,
        }
    }

    /// True when the function is zero everywhere by construction.
    pub fn is_zero(&self) -> bool {
        match self {
            Self::Affine { slope, intercept } => *slope == 0.0 && *intercept == 0.0,
            Self::PowerLaw { coef, .. } => *coef == 0.0,
            Self::Constant { value } => *value == 0.0,
            Self::Table { values, .. } => values.iter().all(|v| *v == 0.0),
            Self::Truncated { inner, .. } => inner.is_zero(),
            Self::Shifted { inner, shift } => *shift == 0.0 && inner.is_zero(),
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], u: f64) -> f64 {
    if u <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if u >= xs[last] {
        return ys[last];
    }
    let hi = xs.partition_point(|&x| x <= u);
    let lo = hi - 1;
    let w = (u - xs[lo]) / (xs[hi] - xs[lo]);
    (1.0 - w) * ys[lo] + w * ys[hi]
}

/// Overall fragmentation rate `alpha(u) = l0 * u^l1`, optionally cut off
/// above a truncation level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FragmentationRate {
    pub l0: f64,
    pub l1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

impl Default for FragmentationRate {
    fn default() -> Self {
        Self {
            l0: 0.0,
            l1: 0.0,
            cutoff: None,
        }
    }
}

impl FragmentationRate {
    pub fn new(l0: f64, l1: f64) -> Result<Self> {
        check_param("l0", l0, l0 >= 0.0, "l0 >= 0")?;
        check_param("l1", l1, (0.0..=1.0).contains(&l1), "l1 in [0, 1]")?;
        Ok(Self { l0, l1, cutoff: None })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.l0, self.l1)?;
        if let Some(level) = self.cutoff {
            check_param("level", level, level > 0.0, "level > 0")?;
        }
        Ok(())
    }

    pub fn with_cutoff(mut self, level: f64) -> Result<Self> {
        check_param("level", level, level > 0.0, "level > 0")?;
        self.cutoff = Some(level);
        Ok(self)
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!("fragmentation rate needs u >= 0, got {u}")));
        }
        Ok(self.at(u))
    }

    pub fn at(&self, u: f64) -> f64 {
        match self.cutoff {
            Some(level) if u > level => 0.0,
            _ => self.l0 * u.powf(self.l1),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.l0 == 0.0
    }
}

/// Power-law daughter distribution
/// `beta(u | u1) = (nu + 2) u^nu / u1^(nu + 1)` on `0 < u < u1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DaughterDistribution {
    pub nu: f64,
}

impl Default for DaughterDistribution {
    fn default() -> Self {
        Self { nu: 0.0 }
    }
}

impl DaughterDistribution {
    pub fn new(nu: f64) -> Result<Self> {
        check_param("nu", nu, nu > -1.0 && nu <= 0.0, "nu in (-1, 0]")?;
        Ok(Self { nu })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.nu).map(drop)
    }

    pub fn eval(&self, u: f64, parent: f64) -> Result<f64> {
        if !(parent > 0.0) {
            return Err(Error::Domain(format!(
                "daughter distribution needs a positive parent size, got {parent}"
            )));
        }
        Ok(self.density(u, parent))
    }

    /// Unchecked density; zero outside `(0, parent)`.
    pub fn density(&self, u: f64, parent: f64) -> f64 {
        if u > 0.0 && u < parent {
            (self.nu + 2.0) * u.powf(self.nu) / parent.powf(self.nu + 1.0)
        } else {
            0.0
        }
    }

    /// Expected number of fragments per breakup, `(nu + 2) / (nu + 1)`.
    pub fn count(&self) -> f64 {
        (self.nu + 2.0) / (self.nu + 1.0)
    }

    /// Number of fragments with size in `[a, b]` produced by one parent,
    /// in closed form.
    pub fn number_between(&self, a: f64, b: f64, parent: f64) -> f64 {
        let (a, b) = (a.clamp(0.0, parent), b.clamp(0.0, parent));
        if b <= a {
            return 0.0;
        }
        let p = self.nu + 1.0;
        self.count() * ((b / parent).powf(p) - (a / parent).powf(p))
    }

    /// Fragment mass with size in `[a, b]` produced by one parent, in
    /// closed form.
    pub fn mass_between(&self, a: f64, b: f64, parent: f64) -> f64 {
        let (a, b) = (a.clamp(0.0, parent), b.clamp(0.0, parent));
        if b <= a {
            return 0.0;
        }
        let p = self.nu + 2.0;
        parent * ((b / parent).powf(p) - (a / parent).powf(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fragmentation_rate_examples() {
        assert_eq!(FragmentationRate::new(1.0, 1.0).unwrap().eval(3.0).unwrap(), 3.0);
        assert_eq!(FragmentationRate::new(2.0, 0.0).unwrap().eval(0.0).unwrap(), 2.0);
        assert_eq!(FragmentationRate::new(1.0, 0.5).unwrap().eval(4.0).unwrap(), 2.0);
        assert!(FragmentationRate::new(1.0, 1.0).unwrap().eval(-1.0).is_err());
        assert!(FragmentationRate::new(1.0, 1.5).is_err());
    }

    #[test]
    fn fragmentation_bound_holds_with_l0() {
        for &(l0, l1) in &[(1.0, 1.0), (2.0, 0.0), (0.7, 0.3)] {
            let a = FragmentationRate::new(l0, l1).unwrap();
            for k in 0..200 {
                let u = 1e-3 * 1.1f64.powi(k);
                assert!(a.at(u) <= l0 * u + l0 + 1e-12);
            }
        }
    }

    #[test]
    fn daughter_examples() {
        let binary = DaughterDistribution::new(0.0).unwrap();
        assert_eq!(binary.eval(0.5, 1.0).unwrap(), 2.0);
        assert_eq!(binary.count(), 2.0);
        let d = DaughterDistribution::new(-0.5).unwrap();
        assert!((d.eval(0.25, 1.0).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(d.count(), 3.0);
        for nu in [0.0, -0.3, -0.9] {
            let d = DaughterDistribution::new(nu).unwrap();
            assert_eq!(d.eval(2.0, 1.0).unwrap(), 0.0);
        }
        assert!(binary.eval(0.5, 0.0).is_err());
        assert!(DaughterDistribution::new(-1.0).is_err());
        assert!(DaughterDistribution::new(0.1).is_err());
    }

    #[test]
    fn closed_form_integrals_cover_the_parent() {
        for nu in [0.0, -0.25, -0.5, -0.9] {
            let d = DaughterDistribution::new(nu).unwrap();
            for parent in [0.01, 1.0, 37.0] {
                assert!((d.mass_between(0.0, parent, parent) - parent).abs() <= 1e-14 * parent);
                assert!((d.number_between(0.0, parent, parent) - d.count()).abs() < 1e-14);
                let split =
                    d.number_between(0.0, 0.3 * parent, parent) + d.number_between(0.3 * parent, 2.0 * parent, parent);
                assert!((split - d.count()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rate_functions() {
        assert_eq!(RateFunction::affine(2.0, 1.0).unwrap().at(3.0), 7.0);
        assert_eq!(RateFunction::power_law(3.0, 0.0).unwrap().at(0.0), 3.0);
        assert!(RateFunction::power_law(1.0, 1.5).is_err());
        assert!(RateFunction::constant(-1.0).is_err());
        let t = RateFunction::table(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 2.0]).unwrap();
        assert_eq!(t.at(0.5), 1.0);
        assert_eq!(t.at(10.0), 2.0);
        let mu = RateFunction::affine(1.0, 0.0).unwrap().truncated(5.0).unwrap();
        assert_eq!(mu.at(7.0), 0.0);
        assert_eq!(mu.at(3.0), 3.0);
        let g = RateFunction::zero().shifted(0.2).unwrap();
        assert_eq!(g.at(123.0), 0.2);
        assert!(RateFunction::zero().is_zero());
        assert!(!g.is_zero());
        assert!(RateFunction::zero().eval(-1.0).is_err());
    }
}
