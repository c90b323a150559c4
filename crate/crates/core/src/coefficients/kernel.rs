//! Coagulation kernels.
//!
//! Every closed-form variant is written so that swapping the two arguments
//! leaves the floating-point operation sequence unchanged, so symmetry holds
//! bit-for-bit rather than to rounding.

use serde::Serialize;

use crate::error::{check_param, Error, Result};

/// Coagulation rate between clusters of sizes `u` and `u1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum CoagulationKernel {
    /// `(u^{1/3} + u1^{1/3})^3`
    LinearShear,
    /// `(u^{1/3} + u1^{1/3})^{7/3}`
    NonlinearShear,
    /// `(u^{1/3} + u1^{1/3})^2 |u^{1/3} - u1^{1/3}|`
    Gravitational,
    /// `(u^{1/3} + u1^{1/3})^2 / (u^{1/3} u1^{1/3} + c)`, `c > 0`
    ModifiedSmoluchowski {
        c: f64,
    },
    /// `s^q / (1 + (s / (2 u_c^{1/3}))^3)` with `s = u^{1/3} + u1^{1/3}`,
    /// `0 <= q < 3`, `u_c > 0`
    ActivatedSludge {
        q: f64,
        u_c: f64,
    },
    /// `(u u1)^omega`, `0 <= omega < 1`
    Product {
        omega: f64,
    },
    Constant {
        value: f64,
    },
    /// Bilinear interpolation of a sampled square table, clamped outside the
    /// sampled range and symmetrized by averaging both argument orders.
    Sampled(SampledKernel),
    /// `inner(u, u1)` when both sizes are at most `level`, zero otherwise.
    Truncated {
        inner: Box<CoagulationKernel>,
        level: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledKernel {
    sizes: Vec<f64>,
    /// Row-major `sizes.len() x sizes.len()` values.
    values: Vec<f64>,
}

impl SampledKernel {
    pub fn new(sizes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = sizes.len();
        if n < 2 {
            return Err(Error::Parameter {
                name: "sizes",
                value: n as f64,
                allowed: "at least 2 sample sizes",
            });
        }
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: values.len(),
            });
        }
        if sizes[0] <= 0.0 || sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter {
                name: "sizes",
                value: sizes[0],
                allowed: "positive, strictly increasing sample sizes",
            });
        }
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Parameter {
                name: "values",
                value: bad,
                allowed: "finite nonnegative kernel samples",
            });
        }
        Ok(Self { sizes, values })
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn bracket(&self, u: f64) -> (usize, f64) {
        let s = &self.sizes;
        if u <= s[0] {
            return (0, 0.0);
        }
        if u >= s[s.len() - 1] {
            return (s.len() - 2, 1.0);
        }
        let hi = s.partition_point(|&x| x <= u);
        let lo = hi - 1;
        (lo, (u - s[lo]) / (s[hi] - s[lo]))
    }

    fn interpolate(&self, u: f64, u1: f64) -> f64 {
        let n = self.sizes.len();
        let (i, a) = self.bracket(u);
        let (j, b) = self.bracket(u1);
        let v = |r: usize, c: usize| self.values[r * n + c];
        (1.0 - a) * (1.0 - b) * v(i, j)
            + a * (1.0 - b) * v(i + 1, j)
            + (1.0 - a) * b * v(i, j + 1)
            + a * b * v(i + 1, j + 1)
    }

    fn eval(&self, u: f64, u1: f64) -> f64 {
        0.5 * (self.interpolate(u, u1) + self.interpolate(u1, u))
    }
}

impl CoagulationKernel {
    pub fn modified_smoluchowski(c: f64) -> Result<Self> {
        check_param("c", c, c > 0.0, "c > 0")?;
        Ok(Self::ModifiedSmoluchowski { c })
    }

    pub fn activated_sludge(q: f64, u_c: f64) -> Result<Self> {
        check_param("q", q, (0.0..3.0).contains(&q), "q in [0, 3)")?;
        check_param("u_c", u_c, u_c > 0.0, "u_c > 0")?;
        Ok(Self::ActivatedSludge { q, u_c })
    }

    pub fn product(omega: f64) -> Result<Self> {
        check_param("omega", omega, (0.0..1.0).contains(&omega), "omega in [0, 1)")?;
        Ok(Self::Product { omega })
    }

    pub fn constant(value: f64) -> Result<Self> {
        check_param("value", value, value >= 0.0, "value >= 0")?;
        Ok(Self::Constant { value })
    }

    pub fn truncated(self, level: f64) -> Result<Self> {
        check_param("level", level, level > 0.0, "level > 0")?;
        Ok(Self::Truncated {
            inner: Box::new(self),
            level,
        })
    }

    /// Re-checks the parameter ranges of a kernel built without the
    /// validating constructors.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::LinearShear | Self::NonlinearShear | Self::Gravitational => Ok(()),
            Self::ModifiedSmoluchowski { c } => Self::modified_smoluchowski(*c).map(drop),
            Self::ActivatedSludge { q, u_c } => Self::activated_sludge(*q, *u_c).map(drop),
            Self::Product { omega } => Self::product(*omega).map(drop),
            Self::Constant { value } => Self::constant(*value).map(drop),
            Self::Sampled(table) => SampledKernel::new(table.sizes.clone(), table.values.clone()).map(drop),
            Self::Truncated { inner, level } => {
                check_param("level", *level, *level > 0.0, "level > 0")?;
                inner.validate()
            }
        }
    }

    /// Evaluates the kernel; both sizes must be positive.
    pub fn eval(&self, u: f64, u1: f64) -> Result<f64> {
        if !(u > 0.0 && u1 > 0.0) {
            return Err(Error::Domain(format!(
                "coagulation kernel needs positive sizes, got ({u}, {u1})"
            )));
        }
        Ok(self.rate(u, u1))
    }

    /// Unchecked evaluation for callers that already guarantee positive sizes.
    pub fn rate(&self, u: f64, u1: f64) -> f64 {
        match self {
            Self::LinearShear => cube_root_sum(u, u1).powi(3),
            Self::NonlinearShear => cube_root_sum(u, u1).powf(7.0 / 3.0),
            Self::Gravitational => {
                let (a, b) = (u.cbrt(), u1.cbrt());
                (a + b).powi(2) * (a - b).abs()
            }
            Self::ModifiedSmoluchowski { c } => {
                let (a, b) = (u.cbrt(), u1.cbrt());
                (a + b).powi(2) / (a * b + c)
            }
            Self::ActivatedSludge { q, u_c } => {
                let s = cube_root_sum(u, u1);
                s.powf(*q) / (1.0 + (s / (2.0 * u_c.cbrt())).powi(3))
            }
            Self::Product { omega } => (u * u1).powf(*omega),
            Self::Constant { value } => *value,
            Self::Sampled(table) => table.eval(u, u1),
            Self::Truncated { inner, level } => {
                if u <= *level && u1 <= *level {
                    inner.rate(u, u1)
                } else {
                    0.0
                }
            }
        }
    }

    /// Human-readable name used in reports.
    pub fn name(&self) -> String {
        match self {
            Self::LinearShear => "linear_shear".into(),
            Self::NonlinearShear => "nonlinear_shear".into(),
            Self::Gravitational => "gravitational".into(),
            Self::ModifiedSmoluchowski { c } => format!("modified_smoluchowski(c={c})"),
            Self::ActivatedSludge { q, u_c } => format!("activated_sludge(q={q}, u_c={u_c})"),
            Self::Product { omega } => format!("product(omega={omega})"),
            Self::Constant { value } => format!("constant({value})"),
            Self::Sampled(t) => format!("sampled({} sizes)", t.sizes.len()),
            Self::Truncated { inner, level } => format!("{} cut at {level}", inner.name()),
        }
    }
}

fn cube_root_sum(u: f64, u1: f64) -> f64 {
    u.cbrt() + u1.cbrt()
}
